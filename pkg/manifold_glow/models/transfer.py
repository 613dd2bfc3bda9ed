import math

import torch
from beartype.typing import List, Optional, Sequence, Tuple
from torch import nn

from ..configs import ManifoldKind, TransferConfig
from ..geometry import ManifoldGaussian, get_manifold
from ..nn import MLP
from ..utils.error_handler import ShapeMismatchError

LOG_VAR_MIN = math.log(1e-8)
LOG_VAR_MAX = math.log(1e8)


class ResidualBlock(nn.Module):
    def __init__(self, width: int) -> None:
        super().__init__()
        self.body = MLP([width, width, width], 'tanh', zero_init_final=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)


class LatentTransfer(nn.Module):
    """
    Maps the flattened chart coordinates of all source latents to a diagonal
    Gaussian over every target latent location: a mean in target chart
    coordinates and log-variances clamped to [ln 1e-8, ln 1e8].

    Both heads start at zero, so an untrained transfer predicts the standard
    Gaussian at the target chart origin.
    """

    def __init__(
        self,
        source_shapes: Sequence[Tuple[int, ...]],
        target_shapes: Sequence[Tuple[int, ...]],
        target_kind: ManifoldKind,
        config: Optional[TransferConfig] = None,
    ) -> None:
        super().__init__()
        config = config or TransferConfig()
        self.source_shapes = [tuple(s) for s in source_shapes]
        self.target_shapes = [tuple(s) for s in target_shapes]
        self.target_kind = target_kind
        source_dim = sum(math.prod(s) for s in self.source_shapes)
        target_dim = sum(math.prod(s) for s in self.target_shapes)
        self.input = nn.Linear(source_dim, config.width, dtype=torch.float64)
        self.blocks = nn.ModuleList(
            ResidualBlock(config.width) for _ in range(config.residual_blocks)
        )
        self.mean_head = nn.Linear(config.width, target_dim, dtype=torch.float64)
        self.log_var_head = nn.Linear(config.width, target_dim, dtype=torch.float64)
        for head in (self.mean_head, self.log_var_head):
            nn.init.zeros_(head.weight)
            nn.init.zeros_(head.bias)
        origin = get_manifold(target_kind).origin_coords()
        m = target_kind.dim
        self.register_buffer(
            'origin',
            torch.cat(
                [origin.expand(s[:-1] + (m,)).reshape(-1) for s in self.target_shapes]
            ),
        )

    def _unflatten(self, flat: torch.Tensor) -> List[torch.Tensor]:
        out, start = [], 0
        for shape in self.target_shapes:
            size = math.prod(shape)
            out.append(flat[:, start : start + size].reshape((flat.shape[0],) + shape))
            start += size
        return out

    def forward(
        self, source_latents: Sequence[torch.Tensor]
    ) -> Tuple[List[torch.Tensor], List[torch.Tensor]]:
        """
        :param source_latents: source latent chart coordinates, emission order.
        :return: per target latent, the predicted means and log-variances.
        """
        if [tuple(z.shape[1:]) for z in source_latents] != self.source_shapes:
            raise ShapeMismatchError(
                f'source latents {[tuple(z.shape[1:]) for z in source_latents]} '
                f'do not match {self.source_shapes}'
            )
        batch = source_latents[0].shape[0]
        h = self.input(torch.cat([z.reshape(batch, -1) for z in source_latents], -1))
        for block in self.blocks:
            h = block(h)
        mean = self.origin + self.mean_head(h)
        log_var = torch.clamp(self.log_var_head(h), LOG_VAR_MIN, LOG_VAR_MAX)
        return self._unflatten(mean), self._unflatten(log_var)

    def transfer_params(
        self, source_latents: Sequence[torch.Tensor]
    ) -> List[ManifoldGaussian]:
        """
        Target-latent Gaussians of the first sample, one per (latent, location,
        channel) in emission then row-major order.
        """
        means, log_vars = self.forward(source_latents)
        manifold = get_manifold(self.target_kind)
        m = self.target_kind.dim
        flat_mean = torch.cat([mu[0].reshape(-1, m) for mu in means])
        flat_var = torch.exp(torch.cat([lv[0].reshape(-1, m) for lv in log_vars]))
        centers = manifold.chart_inverse(flat_mean.detach())
        return [
            ManifoldGaussian(
                kind=self.target_kind,
                mean=center,
                covariance=torch.diag(var.detach()),
            )
            for center, var in zip(centers, flat_var)
        ]
