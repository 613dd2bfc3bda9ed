import pytest
import torch

from manifold_glow.nn import MLP, net_backward, net_forward
from manifold_glow.utils.error_handler import ShapeMismatchError, StaleTapeError


def test_zero_initialized_network_outputs_zero() -> None:
    net = MLP([3, 8, 8, 4])
    out = net(torch.randn((5, 2, 3)))
    assert out.shape == (5, 2, 4)
    assert bool((out == 0).all())
    assert net.in_features == 3
    assert net.out_features == 4


def test_width_checks() -> None:
    with pytest.raises(ValueError):
        MLP([3])
    with pytest.raises(ValueError):
        MLP([3, 4, 2], activations=['tanh'])
    with pytest.raises(ShapeMismatchError):
        MLP([3, 2])(torch.zeros((1, 4)))


def test_backward_of_affine_network() -> None:
    net = MLP([2, 3], zero_init_final=False)
    x = torch.tensor([[1.0, -2.0], [0.5, 3.0]])
    cotangent = torch.tensor([[1.0, 0.0, 2.0], [0.0, -1.0, 1.0]])
    outputs, tape = net_forward(net, x)
    assert torch.allclose(outputs, x @ net.layers[0].weight.T + net.layers[0].bias)
    grads, input_grad = net_backward(tape, cotangent)
    assert torch.allclose(input_grad, cotangent @ net.layers[0].weight)
    assert torch.allclose(grads['layers.0.weight'], cotangent.T @ x)
    assert torch.allclose(grads['layers.0.bias'], cotangent.sum(0))


def test_tape_goes_stale_after_update() -> None:
    net = MLP([2, 4, 1], zero_init_final=False)
    outputs, tape = net_forward(net, torch.ones((1, 2)))
    assert torch.allclose(tape.replay(), outputs.detach())
    with torch.no_grad():
        net.layers[0].bias.add_(1.0)
    assert tape.is_stale()
    with pytest.raises(StaleTapeError):
        net_backward(tape, torch.ones_like(outputs))


def test_cotangent_shape_checked() -> None:
    net = MLP([2, 1])
    outputs, tape = net_forward(net, torch.ones((3, 2)))
    with pytest.raises(ShapeMismatchError):
        net_backward(tape, torch.ones((2, 1)))
