"""
Formatting utilities for console summaries.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def format_value(value: float, precision: int = 4) -> str:
    """
    Format a float in scientific notation, with NaN/Inf spelled out.

    Args:
        value: Number to format
        precision: Digits after the decimal point

    Returns:
        String like "1.2346e-03"
    """
    if value is None:
        return "n/a"
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{precision}e}"


def format_stats(stats: dict, keys: Sequence[str] = ("mean", "median", "max")) -> str:
    """
    Format selected entries of a statistics dictionary.

    Returns:
        String like "mean=1.0000e-02  median=8.0000e-03  max=5.0000e-02"
    """
    return "  ".join(f"{key}={format_value(stats.get(key))}" for key in keys)


def format_box(box_list: Sequence[Sequence[float]]) -> str:
    """Format [[lo, hi], ...] as "[lo, hi] x [lo, hi]"."""
    return " x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in box_list)


def format_matrix(matrix, precision: int = 4, max_rows: int = 8) -> str:
    """
    Format a small matrix row by row.

    Args:
        matrix: 2-D array
        precision: Digits after the decimal point
        max_rows: Rows shown before eliding the rest

    Returns:
        Multi-line string
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [
        "  ".join(f"{x: .{precision}f}" for x in row) for row in matrix[:max_rows]
    ]
    if matrix.shape[0] > max_rows:
        lines.append(f"... ({matrix.shape[0] - max_rows} more rows)")
    return "\n".join(lines)


def format_eigenvalues(eigenvalues, count: int = 6) -> str:
    """Format the count eigenvalues of largest modulus as "|lambda| (re+imj)"."""
    eigenvalues = np.asarray(eigenvalues)
    order = np.argsort(-np.abs(eigenvalues))[:count]
    return ", ".join(
        f"{abs(lam):.4f} ({lam.real:+.4f}{lam.imag:+.4f}j)" for lam in eigenvalues[order]
    )
