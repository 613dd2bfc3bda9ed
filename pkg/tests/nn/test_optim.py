import pytest
import torch
from torch import nn

from manifold_glow.configs import OptimConfig
from manifold_glow.nn import (
    AdamOptimizer,
    adam_step,
    end_to_end_gradient,
    trainable_parameters,
)
from manifold_glow.utils.error_handler import NonFiniteGradientError


class Quadratic(nn.Module):
    def __init__(self) -> None:
        super().__init__()
        self.p = nn.Parameter(torch.tensor([1.0, -2.0, 0.5]))
        self.frozen = nn.Parameter(torch.ones(2), requires_grad=False)

    def loss(self, batch: object) -> torch.Tensor:
        return 0.5 * (self.p**2).sum()


def test_first_step_is_sign_like() -> None:
    param = nn.Parameter(torch.zeros(3))
    config = OptimConfig(lr=0.1, clip_norm=None)
    optimizer = AdamOptimizer([param], config)
    grad = torch.tensor([0.5, -2.0, 1e-3])
    optimizer.step([grad])
    expected = -0.1 * grad / (grad.abs() + config.eps)
    assert torch.allclose(param.detach(), expected, atol=1e-12)
    assert optimizer.step_count == 1
    first, second = optimizer.moments()[0]
    assert torch.allclose(first, 0.1 * grad)
    assert torch.allclose(second, 0.001 * grad**2)


def test_non_finite_gradient_leaves_state_untouched() -> None:
    param = nn.Parameter(torch.ones(2))
    optimizer = AdamOptimizer([param])
    with pytest.raises(NonFiniteGradientError):
        optimizer.step([torch.tensor([1.0, float('nan')])])
    assert torch.equal(param.detach(), torch.ones(2))
    assert optimizer.step_count == 0
    assert all(bool((m == 0).all()) for pair in optimizer.moments() for m in pair)


def test_gradient_shape_checked() -> None:
    optimizer = AdamOptimizer([nn.Parameter(torch.ones(2))])
    with pytest.raises(ValueError):
        optimizer.step([torch.ones(3)])
    with pytest.raises(ValueError):
        optimizer.step([torch.ones(2), torch.ones(2)])


def test_loaded_moments_continue_identically() -> None:
    grads = [torch.tensor([0.3, -0.1]), torch.tensor([0.2, 0.4])]
    reference = nn.Parameter(torch.zeros(2))
    straight = AdamOptimizer([reference])
    for grad in grads:
        straight.step([grad])

    resumed_param = nn.Parameter(torch.zeros(2))
    first = AdamOptimizer([resumed_param])
    first.step([grads[0]])
    second = AdamOptimizer([resumed_param])
    second.load_moments(first.moments(), first.step_count)
    second.step([grads[1]])
    assert torch.allclose(resumed_param.detach(), reference.detach(), atol=1e-15)


def test_named_step_and_end_to_end_gradient() -> None:
    model = Quadratic()
    named = trainable_parameters(model)
    assert [name for name, _ in named] == ['p']
    grads = end_to_end_gradient(model, None)
    assert torch.allclose(grads['p'], torch.tensor([1.0, -2.0, 0.5]))
    optimizer = AdamOptimizer([p for _, p in named], OptimConfig(lr=0.01))
    norm = adam_step(optimizer, grads, [name for name, _ in named])
    assert norm == pytest.approx(float(torch.linalg.vector_norm(grads['p'])))
    assert float(model.loss(None)) < 0.5 * (1.0 + 4.0 + 0.25)
