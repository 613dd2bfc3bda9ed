import numpy as np
import pytest

from manifold_glow.data import (
    PairedDataset,
    fibonacci_directions,
    odf_target,
    planted_region,
    synth_paired,
    synth_spd_field,
    synth_texture_pair,
    window_covariance,
)
from manifold_glow.data.synth import TEXTURE_REGULARIZER


def test_directions_are_antipodal_unit_vectors() -> None:
    directions = fibonacci_directions(12)
    assert directions.shape == (12, 3)
    assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)
    assert np.allclose(directions[6:], -directions[:6])
    with pytest.raises(ValueError):
        fibonacci_directions(7)


def test_isotropic_tensor_gives_uniform_profile() -> None:
    directions = fibonacci_directions(12)
    profile = odf_target(np.eye(3), directions)
    assert np.allclose(profile, np.full(12, 1.0 / np.sqrt(12.0)))
    assert np.linalg.norm(profile) == pytest.approx(1.0)


def test_profile_ignores_tensor_scale() -> None:
    directions = fibonacci_directions(8)
    tensor = np.array([[3.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 0.5]])
    assert np.allclose(
        odf_target(tensor, directions), odf_target(7.5 * tensor, directions)
    )


def test_spd_field_is_valid_and_seeded() -> None:
    field = synth_spd_field(3, (4, 4), channels=2)
    assert field.points.shape == (4, 4, 2, 3, 3)
    field.validate_points()
    eigvals = np.linalg.eigvalsh(field.points)
    assert eigvals.min() >= 0.1 - 1e-9
    assert eigvals.max() <= 10.0 + 1e-9
    assert np.array_equal(synth_spd_field(3, (4, 4), channels=2).points, field.points)


def test_planted_region_is_leading_corner() -> None:
    mask = planted_region((4, 4))
    assert mask.sum() == 4
    assert mask[:2, :2].all()


def test_paired_dataset_layout(example_dataset: PairedDataset) -> None:
    assert len(example_dataset) == 16
    assert example_dataset.groups[:4] == ['A', 'B', 'A', 'B']
    source, target = example_dataset.sources[0], example_dataset.targets[0]
    assert source.points.shape == (4, 4, 1, 3, 3)
    assert target.points.shape == (4, 4, 1, 6)
    assert target.kind.n == 6
    target.validate_points()
    assert bool((target.points > -0.1).all())


def test_paired_dataset_is_reproducible() -> None:
    first = synth_paired(5, (4, 4), 4, n_dirs=6, noise=0.05)
    second = synth_paired(5, (4, 4), 4, n_dirs=6, noise=0.05)
    other = synth_paired(6, (4, 4), 4, n_dirs=6, noise=0.05)
    for a, b in zip(first.targets, second.targets):
        assert np.array_equal(a.points, b.points)
    assert not np.array_equal(first.targets[0].points, other.targets[0].points)


def test_noise_free_targets_follow_sources() -> None:
    dataset = synth_paired(2, (2, 2), 2, n_dirs=6)
    directions = fibonacci_directions(6)
    for source, target in zip(dataset.sources, dataset.targets):
        expected = odf_target(source.points[..., 0, :, :], directions)
        assert np.allclose(target.points[..., 0, :], expected)


def test_group_effect_only_touches_group_b() -> None:
    plain = synth_paired(1, (4, 4), 2, n_dirs=6)
    planted = synth_paired(1, (4, 4), 2, n_dirs=6, group_effect=1.0)
    assert np.array_equal(plain.sources[0].points, planted.sources[0].points)
    region = planted_region((4, 4))
    plain_b, planted_b = plain.sources[1].points, planted.sources[1].points
    assert not np.allclose(plain_b[region], planted_b[region])
    assert np.array_equal(plain_b[~region], planted_b[~region])


def test_constant_texture_covariance_is_ridge() -> None:
    cov = window_covariance(np.ones((8, 8, 3)))
    assert cov.shape == (8, 8, 3, 3)
    assert np.allclose(cov, TEXTURE_REGULARIZER * np.eye(3))


def test_texture_pair_shapes() -> None:
    dataset = synth_texture_pair(0, (8, 8), count=2)
    assert dataset.sources[0].points.shape == (8, 8, 1, 3, 3)
    assert dataset.targets[0].points.shape == (8, 8, 3)
    dataset.sources[0].validate_points()
    assert (dataset.targets[0].points > 0).all()
    with pytest.raises(ValueError):
        synth_texture_pair(0, (4, 4))
