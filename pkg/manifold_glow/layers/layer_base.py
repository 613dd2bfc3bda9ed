from abc import ABC, abstractmethod

import torch
from beartype.typing import Optional, Tuple
from torch import nn

from ..data import Field
from ..geometry import Manifold

LayerOutput = Tuple[torch.Tensor, torch.Tensor]


class FlowLayer(nn.Module, ABC):
    """
    Invertible map on batched chart coordinates of shape (B, *grid, C, m).

    ``forward`` and ``inverse`` both return the mapped coordinates and the
    per-sample log|det| of the map they applied, shape (B,). Every output is
    checked against the chart domain so leaving it raises ChartDomainError rather
    than producing NaN downstream.
    """

    def __init__(self, manifold: Manifold) -> None:
        super().__init__()
        self.manifold = manifold
        self.index: Optional[int] = None

    @abstractmethod
    def forward(self, v: torch.Tensor) -> LayerOutput:
        pass

    @abstractmethod
    def inverse(self, y: torch.Tensor) -> LayerOutput:
        pass

    def batch_logdet(self, v: torch.Tensor, per_site: torch.Tensor) -> torch.Tensor:
        """Sums a per-(location, channel) log-det term down to one value per sample."""
        return per_site.reshape(v.shape[0], -1).sum(-1)

    def forward_points(self, x: torch.Tensor) -> LayerOutput:
        """Forward map on ambient points (B, *grid, C, *ambient_shape)."""
        v = self.manifold.chart_forward(x)
        self.manifold.check_chart(v)
        y, logdet = self.forward(v)
        return self.manifold.chart_inverse(y), logdet

    def inverse_points(self, y: torch.Tensor) -> LayerOutput:
        v = self.manifold.chart_forward(y)
        self.manifold.check_chart(v)
        x, logdet = self.inverse(v)
        return self.manifold.chart_inverse(x), logdet

    def forward_field(self, x: Field) -> Tuple[Field, float]:
        points, logdet = self.forward_points(x.tensor()[None])
        return Field.from_tensor(x.kind, points[0]), float(logdet[0])

    def inverse_field(self, y: Field) -> Tuple[Field, float]:
        points, logdet = self.inverse_points(y.tensor()[None])
        return Field.from_tensor(y.kind, points[0]), float(logdet[0])
