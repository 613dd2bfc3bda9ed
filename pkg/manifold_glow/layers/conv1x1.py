import torch
from torch import nn

from ..geometry import Manifold
from ..utils.error_handler import attach_layer_index
from ..utils.linalg import cayley, skew_dim
from .layer_base import FlowLayer, LayerOutput


class Conv1x1(FlowLayer):
    """
    Channel mixing by a rotation R in SO(C), applied to every chart coordinate
    index at every location. R is the Cayley transform of a learned skew matrix,
    so R^{-1} = R^T and log|det R| = 0 up to rounding.
    """

    def __init__(self, manifold: Manifold, channels: int) -> None:
        super().__init__(manifold)
        self.channels = channels
        self.generator = nn.Parameter(
            torch.zeros(skew_dim(channels), dtype=torch.float64)
        )

    def rotation(self) -> torch.Tensor:
        return cayley(self.generator, self.channels)

    def _logdet(self, v: torch.Tensor, rotation: torch.Tensor) -> torch.Tensor:
        locations = v[0, ..., 0, 0].numel()
        per_sample = locations * self.manifold.dim * torch.linalg.slogdet(rotation)[1]
        return per_sample.expand(v.shape[0])

    @attach_layer_index
    def forward(self, v: torch.Tensor) -> LayerOutput:
        rotation = self.rotation()
        y = torch.einsum('cd,...dm->...cm', rotation, v)
        self.manifold.check_chart(y)
        return y, self._logdet(v, rotation)

    @attach_layer_index
    def inverse(self, y: torch.Tensor) -> LayerOutput:
        rotation = self.rotation()
        x = torch.einsum('dc,...dm->...cm', rotation, y)
        self.manifold.check_chart(x)
        return x, -self._logdet(y, rotation)
