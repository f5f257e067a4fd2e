"""Mean-square deviation in linear and decibel scale."""

import numpy as np

DB_FLOOR = -300.0
_LIN_FLOOR = 10.0 ** (DB_FLOOR / 10.0)


def linear_to_db(value):
    """``10 log10(value)``, floored at -300 dB (also for zero and negative input)."""
    v = np.asarray(value, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v > _LIN_FLOOR, 10.0 * np.log10(np.where(v > _LIN_FLOOR, v, 1.0)), DB_FLOOR)
    out = np.where(np.isnan(v), np.nan, out)
    return float(out) if out.ndim == 0 else out


def msd_linear(estimate, truth) -> float:
    d = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    return float(d @ d)


def msd_db(estimate, truth) -> float:
    """``10 log10 ||estimate - truth||^2`` with the -300 dB floor for exact matches."""
    estimate, truth = np.asarray(estimate, dtype=float), np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        from .errors import InputError
        raise InputError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    return linear_to_db(msd_linear(estimate, truth))
