"""
Voxelwise two-group permutation testing on manifold-valued fields.

The statistic at a voxel is the norm of the difference between the two groups'
chart-space means (all channels stacked). Samples are put in a canonical order
before labels are shuffled, so swapping the roles of the groups yields the same
p-values.
"""

import numpy as np
from beartype.typing import Optional, Sequence
from scipy import stats

from ..configs import GeometryConfig
from ..data import Field, stack_fields
from ..geometry import get_manifold
from ..utils.error_handler import DegenerateGroupError, ShapeMismatchError

PERMUTATION_CHUNK = 256
TIE_TOLERANCE = 1e-12


def field_features(
    fields: Sequence[Field], tolerances: Optional[GeometryConfig] = None
) -> np.ndarray:
    """Chart coordinates of every voxel, shape (N, V, C * m)."""
    kind = fields[0].kind
    coords = get_manifold(kind, tolerances).chart_forward(stack_fields(fields))
    voxels = fields[0].voxel_count
    return coords.reshape(len(fields), voxels, -1).numpy()


def _mean_difference_norm(
    labels: np.ndarray, flat: np.ndarray, total: np.ndarray, voxels: int
) -> np.ndarray:
    """Statistic for each row of a (P, N) boolean label matrix, shape (P, V)."""
    size_a = labels[0].sum()
    size_b = labels.shape[1] - size_a
    sums_a = labels.astype(np.float64) @ flat
    diff = sums_a / size_a - (total - sums_a) / size_b
    return np.linalg.norm(diff.reshape(labels.shape[0], voxels, -1), axis=-1)


def permutation_test_features(
    features_a: np.ndarray, features_b: np.ndarray, n_perm: int, seed: int
) -> np.ndarray:
    """
    :param features_a: (N_a, V, d) per-voxel features of group A.
    :param features_b: (N_b, V, d) features of group B.
    :return: p-value per voxel, (1 + #{permuted >= observed}) / (1 + n_perm).
    """
    for name, group in (('A', features_a), ('B', features_b)):
        if group.shape[0] < 2:
            raise DegenerateGroupError(f'group {name} has {group.shape[0]} member(s)')
    if features_a.shape[1:] != features_b.shape[1:]:
        raise ShapeMismatchError(
            f'group shapes differ: {features_a.shape[1:]} vs {features_b.shape[1:]}'
        )
    voxels = features_a.shape[1]
    pooled = np.concatenate([features_a, features_b]).reshape(
        features_a.shape[0] + features_b.shape[0], -1
    )
    is_a = np.arange(pooled.shape[0]) < features_a.shape[0]
    key = pooled @ np.random.default_rng(0).standard_normal(pooled.shape[1])
    order = np.argsort(key, kind='stable')
    pooled, is_a = pooled[order], is_a[order]
    total = pooled.sum(axis=0)

    observed = _mean_difference_norm(is_a[None], pooled, total, voxels)[0]
    threshold = observed - TIE_TOLERANCE * np.maximum(1.0, observed)
    rng = np.random.default_rng(seed)
    exceed = np.zeros(voxels, dtype=np.int64)
    done = 0
    while done < n_perm:
        chunk = min(PERMUTATION_CHUNK, n_perm - done)
        shuffles = rng.permuted(np.tile(np.arange(pooled.shape[0]), (chunk, 1)), axis=1)
        permuted = _mean_difference_norm(is_a[shuffles], pooled, total, voxels)
        exceed += (permuted >= threshold).sum(axis=0)
        done += chunk
    return (1.0 + exceed) / (1.0 + n_perm)


def permutation_test(
    group_a: Sequence[Field],
    group_b: Sequence[Field],
    n_perm: int = 1000,
    seed: int = 0,
    tolerances: Optional[GeometryConfig] = None,
) -> np.ndarray:
    """Per-voxel p-values shaped like the fields' grid."""
    if n_perm < 100:
        raise ValueError(f'n_perm must be >= 100, got {n_perm}')
    for name, group in (('A', group_a), ('B', group_b)):
        if len(group) < 2:
            raise DegenerateGroupError(f'group {name} has {len(group)} member(s)')
    p_values = permutation_test_features(
        field_features(group_a, tolerances),
        field_features(group_b, tolerances),
        n_perm,
        seed,
    )
    return p_values.reshape(group_a[0].grid_shape)


def significant_mask(p_values: np.ndarray, alpha: float, fdr: bool = False) -> np.ndarray:
    """Voxels with p < alpha, after Benjamini-Hochberg adjustment when ``fdr``."""
    if fdr:
        adjusted = stats.false_discovery_control(p_values.reshape(-1), method='bh')
        return adjusted.reshape(p_values.shape) < alpha
    return p_values < alpha


def iou_significant(
    p_a: np.ndarray, p_b: np.ndarray, alpha: float = 0.05, fdr: bool = False
) -> float:
    """IoU of the two significant-voxel sets; 1 when both are empty."""
    if p_a.shape != p_b.shape:
        raise ShapeMismatchError(f'p-volumes differ: {p_a.shape} vs {p_b.shape}')
    if not 0.0 < alpha < 1.0:
        raise ValueError(f'alpha must lie in (0, 1), got {alpha}')
    sig_a = significant_mask(p_a, alpha, fdr)
    sig_b = significant_mask(p_b, alpha, fdr)
    union = np.logical_or(sig_a, sig_b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(sig_a, sig_b).sum() / union)
