"""Publication-style figures from contim harness CSV files.

This package reads the documented CSV schemas only (training logs,
results files); it shares no code with the experiment harness, so the two
sides can evolve independently as long as the schemas hold.
"""

from .figures import (
    comparison_data,
    plot_comparison,
    plot_validation_curve,
    validation_curve_data,
)
from .readers import read_results, read_training_log

__all__ = [
    "read_training_log",
    "read_results",
    "validation_curve_data",
    "plot_validation_curve",
    "comparison_data",
    "plot_comparison",
]
