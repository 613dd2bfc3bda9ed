import torch
from beartype.typing import List, Optional, Tuple
from torch import nn

from ..configs import GeometryConfig, LevelShape, StreamConfig
from ..data import Field
from ..geometry import Manifold, diagonal_logpdf, get_manifold
from ..layers import (
    Actnorm,
    AffineCoupling,
    Conv1x1,
    FlowLayer,
    merge_latent,
    split_latent,
    squeeze,
    unsqueeze,
)
from ..utils.error_handler import NumericalAbortError, ShapeMismatchError
from ..utils.logger import logger

Latents = List[torch.Tensor]


class FlowModel(nn.Module):
    """
    Multiscale manifold GLOW on one stream.

    Every level squeezes, runs ``blocks_per_level`` (Actnorm, Conv1x1, Coupling)
    blocks and, except for the last level, emits half of its channels as a latent.
    All layers work in chart coordinates; points enter and leave through the
    manifold chart. Latents are scored under a diagonal Gaussian in chart
    coordinates, centred at the chart origin unless the prior is learned.
    """

    def __init__(
        self,
        config: StreamConfig,
        grid_shape: Tuple[int, ...],
        tolerances: Optional[GeometryConfig] = None,
    ) -> None:
        super().__init__()
        self.config = config
        self.grid_shape = tuple(grid_shape)
        self.tolerances = tolerances or GeometryConfig()
        self.manifold: Manifold = get_manifold(config.manifold, self.tolerances)
        self.plan: List[LevelShape] = config.check_grid(self.grid_shape)
        self.input_grids = [self.grid_shape] + [s.grid for s in self.plan[:-1]]

        self.levels = nn.ModuleList()
        index = 0
        for shape in self.plan:
            level = nn.ModuleList()
            for block in range(config.blocks_per_level):
                for layer in self._block(shape, parity=block % 2):
                    layer.index = index
                    index += 1
                    level.append(layer)
            self.levels.append(level)

        m = self.manifold.dim
        origin = self.manifold.origin_coords()
        self.prior_mean = nn.ParameterList()
        self.prior_log_var = nn.ParameterList()
        for channels in self.latent_channels:
            mean = origin.expand(channels, m).clone()
            self.prior_mean.append(nn.Parameter(mean, requires_grad=config.learn_prior))
            self.prior_log_var.append(
                nn.Parameter(
                    torch.zeros(channels, m, dtype=torch.float64),
                    requires_grad=config.learn_prior,
                )
            )

    def _block(self, shape: LevelShape, parity: int) -> List[FlowLayer]:
        config = self.config
        layers: List[FlowLayer] = [
            Actnorm(
                self.manifold,
                shape.channels,
                shape.grid,
                per_location=config.actnorm_per_location,
                init_std=config.actnorm_init_std,
            ),
            Conv1x1(self.manifold, shape.channels),
        ]
        # a single channel cannot be partitioned; slice coupling still applies
        if config.nanoflow_tau is not None or shape.channels >= 2:
            layers.append(
                AffineCoupling(
                    self.manifold,
                    shape.channels,
                    hidden_width=config.hidden_width,
                    hidden_layers=config.hidden_layers,
                    activation=config.activation,
                    scale_bound=config.coupling_scale_bound,
                    slices=config.nanoflow_tau,
                    share=config.nanoflow_share,
                    parity=parity,
                )
            )
        return layers

    @property
    def layers(self) -> List[FlowLayer]:
        return [layer for level in self.levels for layer in level]

    @property
    def latent_channels(self) -> List[int]:
        emitted = [s.emitted for s in self.plan if s.emitted is not None]
        last = self.plan[-1]
        return emitted + [last.channels]

    @property
    def latent_shapes(self) -> List[Tuple[int, ...]]:
        """Per-sample chart-coordinate shape of every latent, emission order."""
        m = self.manifold.dim
        grids = [s.grid for s in self.plan if s.emitted is not None] + [
            self.plan[-1].grid
        ]
        return [g + (c, m) for g, c in zip(grids, self.latent_channels)]

    @property
    def latent_dim(self) -> int:
        total = 0
        for shape in self.latent_shapes:
            size = 1
            for extent in shape:
                size *= extent
            total += size
        return total

    def coupling_layers(self) -> List[AffineCoupling]:
        return [layer for layer in self.layers if isinstance(layer, AffineCoupling)]

    def check_points(self, x: torch.Tensor) -> None:
        expected = self.grid_shape + (self.config.channels,) + self.manifold.ambient_shape
        if tuple(x.shape[1:]) != expected:
            raise ShapeMismatchError(
                f'expected fields of shape {expected}, got {tuple(x.shape[1:])}'
            )

    def to_coords(self, x: torch.Tensor) -> torch.Tensor:
        self.check_points(x)
        v = self.manifold.chart_forward(x)
        self.manifold.check_chart(v)
        return v

    def forward_coords(self, v: torch.Tensor) -> Tuple[Latents, torch.Tensor]:
        """
        :param v: chart coordinates (B, *grid, C, m).
        :return: latents in emission order and the per-sample log-determinant.
        """
        logdet = torch.zeros(v.shape[0], dtype=v.dtype)
        latents: Latents = []
        h = v
        for level, shape in zip(self.levels, self.plan):
            h = squeeze(h)
            for layer in level:
                h, layer_logdet = layer(h)
                logdet = logdet + layer_logdet
            if shape.emitted is not None:
                h, z = split_latent(h)
                latents.append(z)
        latents.append(h)
        return latents, logdet

    def inverse_coords(self, latents: Latents) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        :return: chart coordinates and the log-determinant of the inverse map.
        """
        if len(latents) != len(self.plan):
            raise ShapeMismatchError(
                f'{len(latents)} latents for a {len(self.plan)}-level model'
            )
        h = latents[-1]
        logdet = torch.zeros(h.shape[0], dtype=h.dtype)
        emitted = iter(reversed(latents[:-1]))
        for level, shape, grid in reversed(
            list(zip(self.levels, self.plan, self.input_grids))
        ):
            if shape.emitted is not None:
                h = merge_latent(h, next(emitted))
            for layer in reversed(level):
                h, layer_logdet = layer.inverse(h)
                logdet = logdet + layer_logdet
            h = unsqueeze(h, grid)
        return h, logdet

    def encode(self, x: torch.Tensor) -> Tuple[Latents, torch.Tensor]:
        """Ambient points (B, *grid, C, *ambient) to latent chart coordinates."""
        return self.forward_coords(self.to_coords(x))

    def decode(self, latents: Latents) -> Tuple[torch.Tensor, torch.Tensor]:
        """Latent chart coordinates to ambient points, with the inverse logdet."""
        v, logdet = self.inverse_coords(latents)
        return self.manifold.chart_inverse(v), logdet

    def latent_log_prob(self, latents: Latents) -> torch.Tensor:
        total = torch.zeros(latents[0].shape[0], dtype=latents[0].dtype)
        for z, mean, log_var in zip(latents, self.prior_mean, self.prior_log_var):
            total = total + diagonal_logpdf(z, mean, log_var)
        return total

    def nll_batch(self, x: torch.Tensor) -> torch.Tensor:
        """Per-sample negative log-likelihood in nats, shape (B,)."""
        latents, logdet = self.encode(x)
        log_prob = self.latent_log_prob(latents)
        check_magnitude(log_prob, 'latent log-density', self.tolerances)
        check_magnitude(logdet, 'log-determinant', self.tolerances)
        return -(log_prob + logdet)

    def loss(self, batch: torch.Tensor) -> torch.Tensor:
        return self.nll_batch(batch).mean()

    @torch.no_grad()
    def initialize(self, x: torch.Tensor) -> None:
        """Data-dependent Actnorm initialization, level by level on ``x``."""
        h = self.to_coords(x)
        for level, shape in zip(self.levels, self.plan):
            h = squeeze(h)
            for layer in level:
                if isinstance(layer, Actnorm):
                    layer.initialize(h)
                h, _ = layer(h)
            if shape.emitted is not None:
                h, _ = split_latent(h)
        logger.info(
            f'initialized {self.manifold!r} flow on {x.shape[0]} samples',
            extra={'msg_type': 'TRAIN'},
        )

    @property
    def initialized(self) -> bool:
        return all(
            bool(layer.initialized) for layer in self.layers if isinstance(layer, Actnorm)
        )

    # Field-level operations
    def flow_forward(self, x: Field) -> Tuple[List[Field], float]:
        latents, logdet = self.encode(x.tensor()[None])
        fields = [
            Field.from_tensor(self.config.manifold, self.manifold.chart_inverse(z[0]))
            for z in latents
        ]
        return fields, float(logdet[0])

    def flow_inverse(self, latents: List[Field]) -> Field:
        coords = [self.manifold.chart_forward(f.tensor())[None] for f in latents]
        points, _ = self.decode(coords)
        return Field.from_tensor(self.config.manifold, points[0])

    def nll(self, x: Field) -> float:
        return float(self.nll_batch(x.tensor()[None])[0])


def check_magnitude(
    value: torch.Tensor, name: str, tolerances: GeometryConfig
) -> None:
    limit = tolerances.magnitude_abort
    if not bool(torch.isfinite(value).all()) or bool((value.abs() > limit).any()):
        worst = float(value.abs().max())
        raise NumericalAbortError(f'{name} magnitude {worst:.3e} exceeds {limit:.0e}')
