"""Regenerate the bundled example CSV files (deterministic)."""

import csv
from pathlib import Path

import numpy as np

from partsdist.continuous import StacyLShift
from partsdist.discrete import RClass
from partsdist.inference import invert_r_class_mean
from partsdist.sbp import DiscreteParent

OUT = Path(__file__).resolve().parents[1] / "src" / "partsdist" / "data"


def survival(rng, n=400):
    x1 = np.round(rng.normal(size=n), 4)
    x2 = rng.integers(0, 2, n)
    alpha = 0.5 * np.exp(0.3 * x1 - 0.4 * x2)
    base = StacyLShift.from_xi(1.0, 1.0, 1.5, 0.8)
    t = base.rvs(rng, n) / alpha
    c = rng.exponential(4.0, n)
    event = (t <= c).astype(int)
    time = np.round(np.minimum(t, c), 6)
    time = np.maximum(time, 1e-6)
    with open(OUT / "survival_example.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "event", "x1", "x2"])
        for row in zip(time, event, x1, x2):
            w.writerow([f"{row[0]:.6f}", int(row[1]), f"{row[2]:.4f}", int(row[3])])


def counts(rng, n=600):
    x = np.round(rng.normal(size=n), 4)
    target = 1.8 * np.exp(0.35 * x)
    mu = invert_r_class_mean(target, 3.0, "negbin", 0.5)
    y = np.array([RClass(DiscreteParent.negbin(m, 0.5), 3.0).rvs(rng, 1)[0] for m in mu])
    with open(OUT / "counts_example.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["count", "x"])
        for row in zip(y, x):
            w.writerow([int(row[0]), f"{row[1]:.4f}"])


if __name__ == "__main__":
    rng = np.random.default_rng(20240501)
    survival(rng)
    counts(rng)
