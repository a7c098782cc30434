#!/usr/bin/env python3
"""Generate a synthetic multi-region monthly case-count CSV.

Each region gets its own seasonal shape, trend, dispersion, and scale so
the model-selection demo has something to disagree about. Deterministic
for a given seed.

Usage: python3 scripts/make_demo_data.py [--out data/demo_cases.csv]
"""

from __future__ import annotations

import argparse
import os

import numpy as np

REGIONS = (
    ("Northhill", 900.0, 0.55, 4.0, 0.02),
    ("Eastshore", 420.0, 0.75, 1.5, 0.00),
    ("Southvale", 1500.0, 0.35, -2.0, 0.05),
    ("Westbrook", 250.0, 0.90, 0.8, 0.00),
    ("Lakemarsh", 2100.0, 0.60, 6.0, -0.03),
    ("Highplain", 130.0, 0.40, 0.3, 0.01),
    ("Riverbend", 760.0, 0.80, 2.2, 0.00),
    ("Stonegate", 340.0, 0.50, -0.5, 0.02),
)


def make_csv(n_months: int = 60, seed: int = 20240901, start_year: int = 2018) -> str:
    rng = np.random.default_rng(seed)
    t = np.arange(1, n_months + 1)
    lines = ["Date," + ",".join(name for name, *_ in REGIONS)]
    columns = []
    for i, (name, level, amplitude, slope, curvature) in enumerate(REGIONS):
        phase = rng.uniform(0, 2 * np.pi)
        season = 1.0 + amplitude * np.sin(2 * np.pi * (t - 1) / 12 + phase)
        mean = level * season + slope * t + curvature * t * t
        noisy = mean * np.exp(rng.normal(0.0, 0.08, n_months))
        columns.append(np.maximum(np.round(noisy), 1.0))
    year, month = start_year, 1
    for row in range(n_months):
        cells = [f"{year:04d}-{month:02d}"]
        cells.extend(str(int(column[row])) for column in columns)
        lines.append(",".join(cells))
        month += 1
        if month == 13:
            month, year = 1, year + 1
    return "\n".join(lines) + "\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/demo_cases.csv")
    parser.add_argument("--months", type=int, default=60)
    parser.add_argument("--seed", type=int, default=20240901)
    args = parser.parse_args()
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(make_csv(args.months, args.seed))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
