import math

import numpy as np
import pytest
from beartype.typing import List

from manifold_glow.data import Field
from manifold_glow.evaluators import (
    iou_significant,
    permutation_test,
    permutation_test_features,
    significant_mask,
)
from manifold_glow.utils.error_handler import DegenerateGroupError, ShapeMismatchError
from tests.constants.config_constants import POSITIVE_REALS


def positive_fields(log_values: np.ndarray) -> List[Field]:
    return [
        Field(kind=POSITIVE_REALS, points=np.exp(values).reshape(2, 2, 1))
        for values in log_values
    ]


def test_duplicated_groups_are_not_different() -> None:
    group = positive_fields(np.random.default_rng(0).normal(size=(5, 4)))
    p = permutation_test(group, list(group), n_perm=200, seed=3)
    assert p.shape == (2, 2)
    assert np.allclose(p, 1.0)


def test_planted_difference_is_detected() -> None:
    rng = np.random.default_rng(1)
    base = rng.normal(scale=0.1, size=(10, 4))
    base[5:, 0] += 3.0
    fields = positive_fields(base)
    p = permutation_test(fields[:5], fields[5:], n_perm=200, seed=0)
    assert p[0, 0] < 0.1
    assert p[0, 0] >= 1.0 / 201


def test_group_order_does_not_matter() -> None:
    rng = np.random.default_rng(2)
    a = rng.normal(size=(4, 3, 2))
    b = rng.normal(size=(5, 3, 2))
    forward = permutation_test_features(a, b, 150, seed=9)
    backward = permutation_test_features(b, a, 150, seed=9)
    assert np.array_equal(forward, backward)
    assert np.array_equal(forward, permutation_test_features(a, b, 150, seed=9))


def test_degenerate_inputs_rejected() -> None:
    fields = positive_fields(np.zeros((3, 4)))
    with pytest.raises(DegenerateGroupError):
        permutation_test(fields[:1], fields[1:], n_perm=100)
    with pytest.raises(ValueError):
        permutation_test(fields[:2], fields[1:], n_perm=10)


def test_benjamini_hochberg() -> None:
    p = np.array([0.01, 0.04, 0.03, 0.5])
    assert significant_mask(p, 0.05).tolist() == [True, True, True, False]
    assert significant_mask(p, 0.05, fdr=True).tolist() == [True, False, False, False]


def test_iou() -> None:
    p = np.array([[0.01, 0.5], [0.02, 0.9]])
    assert iou_significant(p, p) == 1.0
    assert iou_significant(p, 1.0 - p) == 0.0
    assert iou_significant(np.ones(4), np.ones(4)) == 1.0
    half = np.array([[0.01, 0.5], [0.9, 0.9]])
    assert iou_significant(p, half) == pytest.approx(0.5)
    with pytest.raises(ShapeMismatchError):
        iou_significant(p, p.reshape(-1))
    with pytest.raises(ValueError):
        iou_significant(p, p, alpha=math.inf)


def test_planted_region_is_recovered() -> None:
    rng = np.random.default_rng(4)
    a = rng.normal(size=(10, 64, 1))
    b = rng.normal(size=(10, 64, 1))
    planted = np.zeros(64, dtype=bool)
    planted[:16] = True
    b[:, planted] += 3.0
    p = permutation_test_features(a, b, 1000, seed=5)
    assert np.mean(p[planted] < 0.01) >= 0.9
    assert np.median(p[~planted]) > 0.3


def test_null_p_values_are_super_uniform() -> None:
    rng = np.random.default_rng(6)
    voxels, alpha = 400, 0.05
    features = rng.normal(size=(16, voxels, 2))
    p = permutation_test_features(features[:8], features[8:], 200, seed=7)
    bound = alpha + 3.0 * math.sqrt(alpha * (1.0 - alpha) / voxels)
    assert np.mean(p < alpha) <= bound
    assert p.min() >= 1.0 / 201
