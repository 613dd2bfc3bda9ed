import math

import pytest
import torch

from manifold_glow.configs import ManifoldKind
from manifold_glow.geometry import (
    chart_forward,
    chart_inverse,
    chart_transition_logdet,
    distance,
    get_manifold,
    group_apply,
    group_inverse,
)
from manifold_glow.utils.error_handler import (
    CutLocusError,
    InvalidPointError,
    InvariantViolationError,
    ShapeMismatchError,
)
from tests.constants.config_constants import (
    POSITIVE_REALS,
    SPD2_CHOLESKY,
    SPD2_LOG,
    SPHERE3,
)

ALL_KINDS = [SPHERE3, POSITIVE_REALS, SPD2_LOG, SPD2_CHOLESKY]


def test_distance_examples() -> None:
    assert float(distance(POSITIVE_REALS, torch.tensor(2.0), torch.tensor(2.0))) == 0.0
    e1 = torch.tensor([1.0, 0.0, 0.0])
    e2 = torch.tensor([0.0, 1.0, 0.0])
    assert float(distance(SPHERE3, e1, e2)) == pytest.approx(math.pi / 2, abs=1e-12)
    eye = torch.eye(2)
    assert float(distance(SPD2_LOG, eye, 4 * eye)) == pytest.approx(
        math.sqrt(2) * math.log(4), abs=1e-10
    )


def test_distance_shape_mismatch() -> None:
    with pytest.raises(ShapeMismatchError):
        distance(POSITIVE_REALS, torch.ones(2), torch.ones(3))


def test_invalid_points_rejected() -> None:
    with pytest.raises(InvalidPointError):
        chart_forward(POSITIVE_REALS, torch.tensor([-1.0]))
    with pytest.raises(InvalidPointError):
        chart_forward(SPHERE3, torch.tensor([1.0, 1.0, 0.0]))
    with pytest.raises(InvalidPointError):
        chart_forward(SPD2_LOG, torch.tensor([[1.0, 2.0], [2.0, 1.0]]))


def test_chart_examples() -> None:
    assert chart_forward(POSITIVE_REALS, torch.tensor(math.e)).tolist() == pytest.approx(
        [1.0]
    )
    pole = torch.tensor([1.0, 0.0, 0.0])
    assert chart_forward(SPHERE3, pole).abs().max() < 1e-12
    assert chart_forward(SPD2_CHOLESKY, torch.eye(2)).tolist() == [1.0, 0.0, 1.0]
    assert float(chart_inverse(POSITIVE_REALS, torch.zeros(1))) == 1.0
    assert torch.allclose(chart_inverse(SPHERE3, torch.zeros(2)), pole)
    assert torch.allclose(
        chart_inverse(SPD2_CHOLESKY, torch.tensor([1.0, 0.0, 1.0])), torch.eye(2)
    )


def test_sphere_uniform_pole_maps_to_origin() -> None:
    kind = ManifoldKind(kind='sphere', n=4, pole='uniform')
    assert chart_forward(kind, torch.full((4,), 0.5)).abs().max() < 1e-12


def test_antipode_is_cut_locus() -> None:
    with pytest.raises(CutLocusError):
        chart_forward(SPHERE3, torch.tensor([-1.0, 0.0, 0.0]))


@pytest.mark.parametrize('kind', ALL_KINDS)
def test_chart_round_trip(kind: ManifoldKind) -> None:
    manifold = get_manifold(kind)
    generator = torch.Generator().manual_seed(0)
    x = manifold.random_points((100,), generator, spread=1.0)
    back = chart_inverse(kind, chart_forward(kind, x))
    assert float(manifold.distance(back, x).max()) < 1e-8


def test_group_examples() -> None:
    g = torch.tensor([2.0])
    assert float(group_apply(POSITIVE_REALS, g, torch.tensor(3.0))) == 6.0
    assert float(group_inverse(POSITIVE_REALS, torch.tensor([4.0]))) == 0.25
    q = torch.tensor([[0.0, -1.0], [1.0, 0.0]])
    assert torch.equal(group_inverse(SPHERE3, q), q.T)


@pytest.mark.parametrize('kind', ALL_KINDS)
def test_group_identity_fixes_points(kind: ManifoldKind) -> None:
    manifold = get_manifold(kind)
    x = manifold.random_points((5,), torch.Generator().manual_seed(1))
    assert torch.allclose(group_apply(kind, manifold.group_identity((5,)), x), x)


def test_non_rotation_rejected() -> None:
    with pytest.raises(InvariantViolationError):
        group_apply(SPHERE3, 2 * torch.eye(2), torch.tensor([1.0, 0.0, 0.0]))


def test_sphere_rotations_are_isometries() -> None:
    manifold = get_manifold(SPHERE3)
    generator = torch.Generator().manual_seed(2)
    g = manifold.random_group((100,), generator)
    x = manifold.random_points((100,), generator, spread=1.0)
    y = manifold.random_points((100,), generator, spread=1.0)
    before = manifold.distance(x, y)
    after = manifold.distance(manifold.group_apply(g, x), manifold.group_apply(g, y))
    assert float((after - before).abs().max()) < 1e-10


@pytest.mark.parametrize('kind', ALL_KINDS)
def test_group_inverse_round_trip(kind: ManifoldKind) -> None:
    manifold = get_manifold(kind)
    generator = torch.Generator().manual_seed(3)
    g = manifold.random_group((50,), generator)
    x = manifold.random_points((50,), generator)
    back = manifold.group_apply(
        manifold.group_inverse(g), manifold.group_apply(g, x)
    )
    assert float(manifold.distance(back, x).max()) < 1e-10


def test_spd_distance_affine_invariant() -> None:
    manifold = get_manifold(SPD2_LOG)
    generator = torch.Generator().manual_seed(4)
    g = manifold.random_group((20,), generator)
    x = manifold.random_points((20,), generator)
    y = manifold.random_points((20,), generator)
    moved = manifold.distance(manifold.group_apply(g, x), manifold.group_apply(g, y))
    assert torch.allclose(moved, manifold.distance(x, y), atol=1e-10)


def test_cholesky_conjugation_logdet_matches_autograd() -> None:
    manifold = get_manifold(SPD2_CHOLESKY)
    generator = torch.Generator().manual_seed(5)
    g = manifold.random_group((), generator)
    v = manifold.chart_forward(manifold.random_points((), generator))
    _, logdet = manifold.group_chart_forward(g, v)
    jacobian = torch.autograd.functional.jacobian(
        lambda t: manifold.group_chart_apply(g, t), v
    )
    assert float(logdet) == pytest.approx(
        float(torch.linalg.slogdet(jacobian)[1]), abs=1e-8
    )


def test_chart_transition_same_chart_is_zero() -> None:
    assert chart_transition_logdet(SPD2_LOG, SPD2_LOG, torch.eye(2)) == 0.0


def test_chart_transition_cholesky_to_log_at_identity() -> None:
    # Jacobian of L -> logm(L L^T) at I: diagonal 2, off-diagonal sqrt(2)
    value = chart_transition_logdet(SPD2_CHOLESKY, SPD2_LOG, torch.eye(2))
    assert value == pytest.approx(math.log(4 * math.sqrt(2)), abs=1e-6)


def test_chart_transition_between_sphere_poles() -> None:
    other = ManifoldKind(kind='sphere', n=3, pole=(0.0, 1.0, 0.0))
    at = torch.tensor([1.0, 1.0, 0.3])
    at = at / torch.linalg.vector_norm(at)
    src = get_manifold(SPHERE3)
    dst = get_manifold(other)
    v = src.chart_forward(at)
    eps = 1e-5
    columns = []
    for i in range(2):
        delta = torch.zeros(2)
        delta[i] = eps
        plus = dst.chart_forward(src.chart_inverse(v + delta))
        minus = dst.chart_forward(src.chart_inverse(v - delta))
        columns.append((plus - minus) / (2 * eps))
    numeric = float(torch.linalg.slogdet(torch.stack(columns, dim=1))[1])
    assert chart_transition_logdet(SPHERE3, other, at) == pytest.approx(
        numeric, abs=1e-4
    )
