"""
Utility functions.
"""

from grassmann_edmd.utils.formatting import (
    format_box,
    format_eigenvalues,
    format_matrix,
    format_stats,
    format_value,
)

__all__ = [
    "format_value",
    "format_stats",
    "format_box",
    "format_matrix",
    "format_eigenvalues",
]
