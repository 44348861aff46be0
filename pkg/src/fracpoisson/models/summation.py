"""Compensated summation for alternating series."""

import math

import numpy as np


def compensated_sum(terms, axis: int = -1) -> np.ndarray:
    """Sum ``terms`` along ``axis`` with ``math.fsum``, one row at a time.

    fsum tracks the exact partial sums, so the only error left in a row
    total is the final rounding and whatever error the terms carry.
    """
    values = np.moveaxis(np.asarray(terms, dtype=float), axis, -1)
    rows = values.reshape(-1, values.shape[-1])
    totals = np.array([math.fsum(row) for row in rows.tolist()])
    return totals.reshape(values.shape[:-1])


def cancellation_ratio(terms, total, axis: int = -1) -> np.ndarray:
    """Ratio of the largest |term| to |total|; inf where the total is zero."""
    largest = np.max(np.abs(np.asarray(terms, dtype=float)), axis=axis)
    magnitude = np.abs(np.asarray(total, dtype=float))
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(magnitude > 0, largest / np.where(magnitude > 0, magnitude, 1.0), np.inf)
    return np.where(largest == 0, 1.0, ratio)


def rounding_bound(terms, axis: int = -1) -> np.ndarray:
    """Error bound eps * sum |term| for a sum of terms with relative error ~eps each."""
    return np.finfo(float).eps * np.sum(np.abs(np.asarray(terms, dtype=float)), axis=axis)
