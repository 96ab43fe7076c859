"""Reproduce the protocol sweep at desk scale and summarize the CSV.

Writes a dataset, runs the experiment command over two training sizes with
all four methods, and prints per-method medians.  The MRC rows carry their
training-time bounds; the baseline rows leave those columns empty.
"""

import csv
import json
import tempfile
from collections import defaultdict
from pathlib import Path
from statistics import median

from mrckit.cli import main
from mrckit.data_io import save_dataset
from mrckit.datasets import two_class_demo_joint

workdir = Path(tempfile.mkdtemp(prefix="mrckit-sweep-"))
data_path = workdir / "demo.csv"
save_dataset(two_class_demo_joint().sample(3000, seed=20240501), data_path)

config = {
    "dataset": str(data_path),
    "train_sizes": [100, 500],
    "repetitions": 5,
    "test_size": 1000,
    "lambda": "0.25",
    "seed": 0,
    "max_iters": 4000,
}
cfg_path = workdir / "config.json"
cfg_path.write_text(json.dumps(config, indent=1))
out_path = workdir / "results.csv"

code = main(["experiment", "--config", str(cfg_path), "--out", str(out_path)])
assert code == 0, "experiment command failed"

rows = list(csv.DictReader(open(out_path)))
by_cell = defaultdict(list)
for r in rows:
    by_cell[(r["method"], r["n"])].append(r)

print(f"results written to {out_path}\n")
print(f"{'method':22s} {'n':>4s} {'median risk':>12s} {'median upper':>13s} {'median lower':>13s}")
for method in ("mrc-zero-one", "mrc-log", "adversarial-zero-one", "logistic-regression"):
    for n in ("100", "500"):
        cell = by_cell[(method, n)]
        risk = median(float(r["risk"]) for r in cell)
        if cell[0]["upper"]:
            up = median(float(r["upper"]) for r in cell)
            lo = median(float(r["lower"]) for r in cell)
            print(f"{method:22s} {n:>4s} {risk:12.4f} {up:13.4f} {lo:13.4f}")
        else:
            print(f"{method:22s} {n:>4s} {risk:12.4f} {'-':>13s} {'-':>13s}")
