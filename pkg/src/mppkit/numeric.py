"""Shared numeric primitives.

Link functions (sigmoid, softmax), the central-difference gradient oracle
used by the gradient tests, and the toolkit's single seeded random
generator.  Every model and every fold stream draws randomness from
:class:`SeededRng`, so a run is a pure function of its seeds.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed for stream `index` (one stream per CV fold)."""
    return _mix64((int(seed) + (int(index) + 1) * _GAMMA) & _MASK64)


class SeededRng:
    """Counter-based splitmix64 generator.

    The i-th raw draw is ``mix64(seed + i * golden_gamma)``: a pure function
    of (seed, counter), with identical output on every platform.  Uniform
    doubles take the top 53 bits of a draw; normals come from Box-Muller on
    uniform pairs; permutations are argsorts of uniform keys.  This is the
    only randomness source in the toolkit, which is what makes reports
    byte-reproducible.
    """

    def __init__(self, seed: int):
        self._seed = int(seed) & _MASK64
        self._counter = 0

    @property
    def seed(self) -> int:
        return self._seed

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self._seed) + idx * np.uint64(_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
            return z ^ (z >> np.uint64(31))

    def random(self, size=None) -> np.ndarray | float:
        """Uniform doubles in [0, 1)."""
        if size is None:
            return float(self._raw(1)[0] >> np.uint64(11)) * 2.0**-53
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = int(np.prod(shape)) if shape else 1
        u = (self._raw(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return u.reshape(shape)

    def normal(self, size=None) -> np.ndarray | float:
        """Standard normals via Box-Muller (cosine branch only)."""
        if size is None:
            return float(self.normal(1)[0])
        shape = (size,) if isinstance(size, int) else tuple(size)
        count = int(np.prod(shape)) if shape else 1
        u1 = np.asarray(self.random(count))
        u2 = np.asarray(self.random(count))
        # 1 - u1 lies in (0, 1], so the log is finite.
        z = np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)
        return z.reshape(shape)

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in [low, high)."""
        if high <= low:
            raise ValueError("integers requires high > low")
        u = self.random(size)
        out = np.floor(np.asarray(u) * (high - low)).astype(np.int64) + low
        return int(out) if size is None else out

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.random(n), kind="stable")

    def spawn(self, index: int) -> "SeededRng":
        return SeededRng(derive_seed(self._seed, index))


def sigmoid(t):
    """1 / (1 + exp(-t)), sign-split so huge |t| saturates instead of overflowing."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("sigmoid requires finite input")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out[0]) if scalar else out


def softmax(v) -> np.ndarray:
    """Shift-invariant softmax over the last axis (1-D scores or a matrix of rows)."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValueError("softmax expects a vector or a matrix of row scores")
    if arr.shape[-1] == 0:
        raise ValueError("softmax requires at least one score")
    if not np.all(np.isfinite(arr)):
        raise ValueError("softmax requires finite input")
    shifted = arr - arr.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def argmax_lowest(values) -> int:
    """Index of the maximum, ties broken by the lowest index."""
    return int(np.argmax(np.asarray(values)))


def finite_difference_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function, one coordinate at a time.

    Used as the independent oracle against analytic gradients: it never sees
    how the gradient under test was computed.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        xp = flat.copy()
        xm = flat.copy()
        xp[i] += h
        xm[i] -= h
        fp = float(f(xp.reshape(x.shape)))
        fm = float(f(xm.reshape(x.shape)))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError("function evaluated to a non-finite value")
        g[i] = (fp - fm) / (2.0 * h)
    return grad
