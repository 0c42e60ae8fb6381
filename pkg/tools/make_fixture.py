#!/usr/bin/env python3
"""Regenerate the bundled synthetic fixture under tests/fixtures/.

Writes a 300-record CSV (10 continuous features, a provenance column the
schema ignores, and a handful of blanked cells to exercise imputation), the
matching schema manifest, a manifest of per-column min/max after cleaning,
and an experiment config wired to the fixture.  Deterministic: rerunning
produces byte-identical files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mppkit.data import clean_and_encode, generate_synthetic, load_raw

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
SEED = 20240917
# (row, feature) cells blanked in the CSV; cleaning imputes them
MISSING_CELLS = [(12, 0), (47, 3), (101, 3), (188, 7), (233, 7), (260, 9)]


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    ds = generate_synthetic(n=300, d=10, informative={0, 1}, seed=SEED, noise=0.05)

    blanked = {(r, c) for r, c in MISSING_CELLS}
    header = [f.name for f in ds.schema.features] + ["label", "row_id"]
    lines = [",".join(header)]
    for i in range(ds.n):
        cells = [
            "" if (i, j) in blanked else repr(float(ds.x[i, j]))
            for j in range(ds.d)
        ]
        cells.append(str(int(ds.y[i])))
        cells.append(f"rec-{i:04d}")
        lines.append(",".join(cells))
    (FIXTURE_DIR / "fixture.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    (FIXTURE_DIR / "fixture_schema.json").write_text(
        json.dumps(ds.schema.to_manifest(), indent=2) + "\n", encoding="utf-8"
    )

    cleaned = clean_and_encode(load_raw(FIXTURE_DIR / "fixture.csv", ds.schema), ds.schema)
    manifest = {
        "n": cleaned.n,
        "d": cleaned.d,
        "class_counts": [int(v) for v in np.bincount(cleaned.y, minlength=3)],
        "columns": {
            spec.name: {
                "min": repr(float(cleaned.x[:, j].min())),
                "max": repr(float(cleaned.x[:, j].max())),
            }
            for j, spec in enumerate(ds.schema.features)
        },
    }
    (FIXTURE_DIR / "fixture_manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )

    config = {
        "data": "fixture.csv",
        "schema": "fixture_schema.json",
        "models": {"logistic": {}, "tree": {}, "gbdt": {}, "svm": {}, "mlp": {}},
        "folds": 5,
        "seed": 7,
        "out": "reports",
        "format": "both",
    }
    (FIXTURE_DIR / "fixture_config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote fixture files to {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
