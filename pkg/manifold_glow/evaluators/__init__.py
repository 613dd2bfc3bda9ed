from .evaluator import check_thresholds, evaluate, group_p_values
from .group_analysis import (
    field_features,
    iou_significant,
    permutation_test,
    permutation_test_features,
    significant_mask,
)
from .metrics import (
    chart_mean_field,
    confusion_matrix,
    dominance_score,
    fractional_anisotropy,
    reconstruction_error,
    reconstruction_errors,
    subset_dominance,
)
from .plots import plot_confusion, plot_error_histogram
from .report import EvalReport, read_array, temperature_key, write_array

__all__ = [
    'EvalReport',
    'evaluate',
    'check_thresholds',
    'group_p_values',
    'reconstruction_error',
    'reconstruction_errors',
    'confusion_matrix',
    'dominance_score',
    'subset_dominance',
    'chart_mean_field',
    'fractional_anisotropy',
    'field_features',
    'permutation_test',
    'permutation_test_features',
    'significant_mask',
    'iou_significant',
    'plot_error_histogram',
    'plot_confusion',
    'read_array',
    'write_array',
    'temperature_key',
]
