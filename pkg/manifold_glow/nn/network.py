import torch
from beartype.typing import Dict, List, Literal, Optional, Sequence, Tuple
from pydantic import BaseModel, ConfigDict
from torch import nn

from ..utils.error_handler import ShapeMismatchError, StaleTapeError

Activation = Literal['tanh', 'relu', 'identity']

ACTIVATIONS = {
    'tanh': torch.tanh,
    'relu': torch.relu,
    'identity': lambda x: x,
}


class MLP(nn.Module):
    """
    Feedforward network applied independently along the last axis of its input.
    With ``zero_init_final`` the last affine map starts at zero, so the network
    outputs exactly 0 until trained.
    """

    def __init__(
        self,
        widths: Sequence[int],
        activation: Activation = 'tanh',
        zero_init_final: bool = True,
        activations: Optional[Sequence[Activation]] = None,
    ) -> None:
        super().__init__()
        if len(widths) < 2:
            raise ValueError('a network needs at least input and output widths')
        self.widths = list(widths)
        self.layers = nn.ModuleList(
            nn.Linear(w_in, w_out, dtype=torch.float64)
            for w_in, w_out in zip(widths[:-1], widths[1:])
        )
        if activations is None:
            activations = [activation] * (len(widths) - 2) + ['identity']
        if len(activations) != len(self.layers):
            raise ValueError('one activation per layer is required')
        self.activations: List[Activation] = list(activations)
        self.zero_init_final = zero_init_final
        if zero_init_final:
            nn.init.zeros_(self.layers[-1].weight)
            nn.init.zeros_(self.layers[-1].bias)

    @property
    def in_features(self) -> int:
        return self.widths[0]

    @property
    def out_features(self) -> int:
        return self.widths[-1]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_features:
            raise ShapeMismatchError(
                f'network expects width {self.in_features}, got {x.shape[-1]}'
            )
        for layer, name in zip(self.layers, self.activations):
            x = ACTIVATIONS[name](layer(x))
        return x


class GradientTape(BaseModel):
    """Primal values of one forward pass, enough to run the reverse pass later."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    network: MLP
    inputs: torch.Tensor
    outputs: torch.Tensor
    versions: Dict[str, int]

    def is_stale(self) -> bool:
        return any(
            p._version != self.versions[name]
            for name, p in self.network.named_parameters()
        )

    def replay(self) -> torch.Tensor:
        with torch.no_grad():
            return self.network(self.inputs.detach())


def net_forward(
    network: MLP, inputs: torch.Tensor
) -> Tuple[torch.Tensor, GradientTape]:
    tracked = inputs.detach().clone().requires_grad_(True)
    versions = {name: p._version for name, p in network.named_parameters()}
    outputs = network(tracked)
    return outputs, GradientTape(
        network=network, inputs=tracked, outputs=outputs, versions=versions
    )


def net_backward(
    tape: GradientTape, output_cotangent: torch.Tensor
) -> Tuple[Dict[str, torch.Tensor], torch.Tensor]:
    """
    Reverse pass of a recorded forward.
    :return: gradients per parameter name and the input cotangent.
    """
    if tape.is_stale():
        raise StaleTapeError('network parameters changed since the tape was recorded')
    if output_cotangent.shape != tape.outputs.shape:
        raise ShapeMismatchError(
            f'cotangent {tuple(output_cotangent.shape)} vs output '
            f'{tuple(tape.outputs.shape)}'
        )
    names, params = zip(*tape.network.named_parameters())
    grads = torch.autograd.grad(
        tape.outputs,
        [tape.inputs, *params],
        grad_outputs=output_cotangent,
        retain_graph=True,
        allow_unused=True,
    )
    input_grad = grads[0] if grads[0] is not None else torch.zeros_like(tape.inputs)
    param_grads = {
        name: grad if grad is not None else torch.zeros_like(param)
        for name, param, grad in zip(names, params, grads[1:])
    }
    return param_grads, input_grad
