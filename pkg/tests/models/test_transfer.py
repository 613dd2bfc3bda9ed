import pytest
import torch

from manifold_glow.configs import ManifoldKind, TransferConfig
from manifold_glow.geometry import get_manifold
from manifold_glow.models import LatentTransfer
from manifold_glow.utils.error_handler import ShapeMismatchError
from tests.constants.config_constants import SPHERE3

UNIFORM_SPHERE = ManifoldKind(kind='sphere', n=3, pole='uniform')


def build(kind: ManifoldKind = SPHERE3) -> LatentTransfer:
    return LatentTransfer(
        [(2, 2, 6), (1, 4, 6)],
        [(2, 2, 2), (1, 4, 2)],
        kind,
        TransferConfig(width=8, residual_blocks=2),
    )


def test_untrained_transfer_predicts_standard_gaussian() -> None:
    transfer = build()
    sources = [torch.randn((3, 2, 2, 6)), torch.randn((3, 1, 4, 6))]
    means, log_vars = transfer(sources)
    assert [tuple(m.shape) for m in means] == [(3, 2, 2, 2), (3, 1, 4, 2)]
    assert all(bool((m == 0).all()) for m in means)
    assert all(bool((lv == 0).all()) for lv in log_vars)


def test_source_shape_checked() -> None:
    with pytest.raises(ShapeMismatchError):
        build()([torch.randn((1, 2, 2, 6))])


def test_log_variances_are_clamped() -> None:
    transfer = build()
    with torch.no_grad():
        transfer.log_var_head.bias.fill_(100.0)
    _, log_vars = transfer([torch.zeros((1, 2, 2, 6)), torch.zeros((1, 1, 4, 6))])
    assert float(torch.cat([lv.reshape(-1) for lv in log_vars]).max()) == pytest.approx(
        18.420680743952367
    )


def test_transfer_params_per_location() -> None:
    transfer = build(UNIFORM_SPHERE)
    gaussians = transfer.transfer_params(
        [torch.zeros((1, 2, 2, 6)), torch.zeros((1, 1, 4, 6))]
    )
    assert len(gaussians) == 4 + 4
    pole = get_manifold(UNIFORM_SPHERE).pole
    for gaussian in gaussians:
        assert torch.allclose(gaussian.mean, pole)
        assert torch.allclose(gaussian.covariance, torch.eye(2))
