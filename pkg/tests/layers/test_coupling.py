import pytest
import torch

from manifold_glow.configs import ManifoldKind
from manifold_glow.geometry import get_manifold
from manifold_glow.layers import AffineCoupling
from manifold_glow.oracle import fd_logdet, tensor_map
from manifold_glow.utils.error_handler import DivisibilityError, ShapeMismatchError
from tests.constants.config_constants import (
    POSITIVE_REALS,
    SPD2_CHOLESKY,
    SPD2_LOG,
    SPD3,
    SPHERE3,
    SPHERE12,
)


@torch.no_grad()
def randomize(layer: AffineCoupling, seed: int, scale: float) -> torch.Generator:
    generator = torch.Generator().manual_seed(seed)
    for param in layer.parameters():
        param.copy_(scale * torch.randn(param.shape, generator=generator))
    return generator


def test_zero_init_is_identity() -> None:
    manifold = get_manifold(SPD2_LOG)
    layer = AffineCoupling(manifold, 4, hidden_width=8, hidden_layers=1)
    v = torch.randn((2, 3, 4, 3), generator=torch.Generator().manual_seed(0))
    with torch.no_grad():
        y, logdet = layer(v)
    assert torch.allclose(y, v)
    assert torch.allclose(logdet, torch.zeros(2))


def test_single_channel_rejected() -> None:
    with pytest.raises(ShapeMismatchError):
        AffineCoupling(get_manifold(POSITIVE_REALS), 1)


@pytest.mark.parametrize(
    'kind', [POSITIVE_REALS, SPD2_LOG, SPD2_CHOLESKY, SPD3, SPHERE3, SPHERE12]
)
def test_round_trip_and_logdet(kind: ManifoldKind) -> None:
    manifold = get_manifold(kind)
    layer = AffineCoupling(manifold, 2, hidden_width=8, hidden_layers=1)
    generator = randomize(layer, 1, 0.2)
    points = manifold.random_points((1, 2, 2), generator, spread=0.2)
    v = manifold.chart_forward(points)
    with torch.no_grad():
        y, logdet = layer(v)
        back, inverse_logdet = layer.inverse(y)
    assert torch.allclose(back, v, atol=1e-10)
    assert torch.allclose(logdet, -inverse_logdet, atol=1e-10)
    numeric = fd_logdet(tensor_map(lambda t: layer(t)[0], tuple(v.shape)), v.numpy())
    assert float(logdet[0]) == pytest.approx(numeric, abs=1e-5)


def test_scales_stay_within_bound() -> None:
    manifold = get_manifold(POSITIVE_REALS)
    layer = AffineCoupling(manifold, 2, hidden_width=4, hidden_layers=1, scale_bound=1.5)
    randomize(layer, 2, 10.0)
    v = torch.randn((8, 3, 2, 1), generator=torch.Generator().manual_seed(3))
    with torch.no_grad():
        _, logdet = layer(v)
    assert bool((logdet.abs() <= 3 * 1.5 + 1e-12).all())


def test_unclamped_fault_breaks_logdet() -> None:
    manifold = get_manifold(POSITIVE_REALS)
    layer = AffineCoupling(manifold, 2, hidden_width=4, hidden_layers=1, scale_bound=0.5)
    randomize(layer, 4, 3.0)
    v = torch.randn((1, 2, 2, 1), generator=torch.Generator().manual_seed(5))
    layer.fault_unclamped = True
    with torch.no_grad():
        _, analytic = layer(v)
    numeric = fd_logdet(tensor_map(lambda t: layer(t)[0], tuple(v.shape)), v.numpy())
    assert abs(float(analytic[0]) - numeric) > 1e-3


def test_sliced_coupling_pairs_leading_slices() -> None:
    manifold = get_manifold(POSITIVE_REALS)
    layer = AffineCoupling(manifold, 2, hidden_width=4, hidden_layers=1, slices=2)
    randomize(layer, 6, 0.5)
    v = torch.randn((2, 8, 2, 1), generator=torch.Generator().manual_seed(7))
    with torch.no_grad():
        y, _ = layer(v)
        back, _ = layer.inverse(y)
    # parity 0: slices 0 and 2 of width 2 condition slices 1 and 3
    assert torch.equal(y[:, 0:2], v[:, 0:2])
    assert torch.equal(y[:, 4:6], v[:, 4:6])
    assert not torch.allclose(y[:, 2:4], v[:, 2:4])
    assert torch.allclose(back, v, atol=1e-12)


def test_sliced_coupling_needs_divisible_axis() -> None:
    layer = AffineCoupling(get_manifold(POSITIVE_REALS), 2, slices=2)
    with pytest.raises(DivisibilityError):
        layer(torch.zeros((1, 6, 2, 1)))


def test_unshared_slices_get_one_network_per_pair() -> None:
    manifold = get_manifold(POSITIVE_REALS)
    shared = AffineCoupling(manifold, 2, slices=4)
    separate = AffineCoupling(manifold, 2, slices=4, share=False)
    assert len(shared.nets) == 1
    assert len(separate.nets) == 4


@pytest.mark.parametrize('kind', [SPD3, SPHERE12])
def test_sliced_round_trip_on_large_manifolds(kind: ManifoldKind) -> None:
    manifold = get_manifold(kind)
    layer = AffineCoupling(manifold, 2, hidden_width=8, hidden_layers=1, slices=2)
    generator = randomize(layer, 4, 0.2)
    v = manifold.chart_forward(manifold.random_points((3, 4, 2), generator, spread=0.2))
    with torch.no_grad():
        y, logdet = layer(v)
        back, inverse_logdet = layer.inverse(y)
    assert torch.allclose(back, v, atol=1e-10)
    assert torch.allclose(logdet, -inverse_logdet, atol=1e-10)
