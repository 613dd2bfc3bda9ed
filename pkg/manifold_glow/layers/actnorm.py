import math

import torch
from beartype.typing import Tuple
from torch import nn

from ..geometry import Manifold
from ..utils.error_handler import DegenerateBatchError, attach_layer_index
from .layer_base import FlowLayer, LayerOutput

LOG_SCALE_MIN = math.log(1e-6)
LOG_SCALE_MAX = math.log(1e6)
DEGENERATE_STD = 1e-8


class Actnorm(FlowLayer):
    """
    y = T . Phi^{-1}(S * Phi(x)) with a positive diagonal scale S (stored as logs)
    and a group element T, shared per channel or learned per location.
    """

    def __init__(
        self,
        manifold: Manifold,
        channels: int,
        grid_shape: Tuple[int, ...],
        per_location: bool = False,
        init_std: float = 1.0,
    ) -> None:
        super().__init__(manifold)
        site_shape = (tuple(grid_shape) if per_location else ()) + (channels,)
        self.per_location = per_location
        self.init_std = init_std
        self.log_scale = nn.Parameter(
            torch.zeros(site_shape + (manifold.dim,), dtype=torch.float64)
        )
        self.group_raw = nn.Parameter(
            torch.zeros(site_shape + (manifold.group_dim,), dtype=torch.float64)
        )
        self.register_buffer('initialized', torch.tensor(False))

    def scales(self) -> torch.Tensor:
        return torch.clamp(self.log_scale, LOG_SCALE_MIN, LOG_SCALE_MAX)

    def group(self) -> torch.Tensor:
        return self.manifold.group_from_raw(self.group_raw)

    @attach_layer_index
    def forward(self, v: torch.Tensor) -> LayerOutput:
        log_s = self.scales()
        y, group_logdet = self.manifold.group_chart_forward(
            self.group(), v * torch.exp(log_s)
        )
        self.manifold.check_chart(y)
        scale_logdet = log_s.expand(v.shape[1:]).sum()
        return y, scale_logdet + self.batch_logdet(v, group_logdet)

    @attach_layer_index
    def inverse(self, y: torch.Tensor) -> LayerOutput:
        log_s = self.scales()
        inverse_group = self.manifold.group_inverse(self.group())
        u, group_logdet = self.manifold.group_chart_forward(inverse_group, y)
        x = u * torch.exp(-log_s)
        self.manifold.check_chart(x)
        scale_logdet = log_s.expand(y.shape[1:]).sum()
        return x, self.batch_logdet(y, group_logdet) - scale_logdet

    @torch.no_grad()
    def initialize(self, v: torch.Tensor) -> None:
        """
        Data-dependent initialization: S = init_std / std of the chart coordinates
        and T the group element that best centers the scaled mean.
        """
        reduce_dims = tuple(range(v.dim() - (self.log_scale.dim())))
        std = v.std(dim=reduce_dims, correction=0)
        if bool((std < DEGENERATE_STD).any()):
            raise DegenerateBatchError(
                f'chart coordinate std {float(std.min()):.3e} below {DEGENERATE_STD}'
            )
        log_s = torch.log(self.init_std / std)
        self.log_scale.copy_(log_s)
        mean = (v * torch.exp(self.scales())).mean(dim=reduce_dims)
        self.group_raw.copy_(self.manifold.centering_raw(mean))
        self.initialized.fill_(True)
