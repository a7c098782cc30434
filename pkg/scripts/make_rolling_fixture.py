#!/usr/bin/env python3
"""Freeze an independent oracle for the rolling-forecast fixture test.

Everything here is computed from scratch with plain numpy: the seasonal
regression with quadratic trend is solved directly, three-step forecasts
are formed by evaluating the design at future months, and the per-window
MAPEs are written to tests/fixtures/rolling_fixture.json. The test suite
replays the same series through the library and must agree to 1e-8 per
window. This script intentionally imports nothing from the package.

Usage: python3 scripts/make_rolling_fixture.py
"""

from __future__ import annotations

import json
import os

import numpy as np

N_MONTHS = 40
MIN_TRAIN = 36
HORIZON = 3
START = (2015, 1)  # January 2015
SEED = 424242


def make_series() -> np.ndarray:
    rng = np.random.default_rng(SEED)
    t = np.arange(1, N_MONTHS + 1)
    month_of = ((t - 1) % 12).astype(int)
    seasonal = np.array(
        [210, 180, 160, 150, 170, 260, 420, 610, 560, 430, 330, 250], dtype=float
    )
    mean = seasonal[month_of] + 3.0 * t + 0.05 * t * t
    values = mean + rng.normal(0.0, 12.0, N_MONTHS)
    # one decimal place so the JSON round-trips exactly
    return np.round(np.maximum(values, 1.0), 1)


def design_for(length: int, positions: np.ndarray) -> np.ndarray:
    """Twelve month indicators plus linear and quadratic trend columns.

    Trend columns are standardized using the training positions 1..length
    so the matrix stays well conditioned; predictions are unchanged by
    this reparameterization because the indicator block spans constants.
    """
    train = np.arange(1, length + 1, dtype=float)
    center = train.mean()
    scale = train.std() or 1.0
    month_of = ((positions - 1) % 12).astype(int)
    dummies = np.zeros((positions.size, 12))
    dummies[np.arange(positions.size), month_of] = 1.0
    z = (positions - center) / scale
    return np.column_stack([dummies, z, z * z])


def window_mape(values: np.ndarray, train_size: int, horizon: int) -> float:
    steps = min(horizon, values.size - train_size)
    train_positions = np.arange(1, train_size + 1, dtype=float)
    test_positions = np.arange(train_size + 1, train_size + steps + 1, dtype=float)
    x_train = design_for(train_size, train_positions)
    x_test = design_for(train_size, test_positions)
    beta, *_ = np.linalg.lstsq(x_train, values[:train_size], rcond=None)
    predicted = x_test @ beta
    actual = values[train_size : train_size + steps]
    return float(np.mean(np.abs((actual - predicted) / actual)))


def main() -> None:
    values = make_series()
    windows = []
    for train_size in range(MIN_TRAIN, N_MONTHS):
        steps = min(HORIZON, N_MONTHS - train_size)
        windows.append(
            {
                "train_size": train_size,
                "horizon": steps,
                "mape": window_mape(values, train_size, HORIZON),
            }
        )
    fixture = {
        "comment": "frozen oracle output; regenerate with scripts/make_rolling_fixture.py",
        "start": f"{START[0]:04d}-{START[1]:02d}",
        "values": [float(v) for v in values],
        "model": "poly-season",
        "min_train": MIN_TRAIN,
        "horizon": HORIZON,
        "mode": "fixed",
        "windows": windows,
        "average_mape": float(np.mean([w["mape"] for w in windows])),
    }
    out = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "rolling_fixture.json")
    out = os.path.normpath(out)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", encoding="utf-8") as handle:
        json.dump(fixture, handle, indent=2)
        handle.write("\n")
    print(f"wrote {out}")
    for w in windows:
        print(f"  train {w['train_size']}  h={w['horizon']}  mape={w['mape']:.10f}")


if __name__ == "__main__":
    main()
