import torch
from beartype.typing import List, Sequence, Tuple, Union
from torch import nn

from ..configs import RunConfig
from ..data import Field, stack_fields, unstack_fields
from ..geometry import diagonal_logpdf
from .flow_model import FlowModel, Latents, check_magnitude
from .transfer import LatentTransfer

PairBatch = Tuple[torch.Tensor, torch.Tensor]


class ConditionalFlow(nn.Module):
    """
    Two parallel flows joined through their latents. The source stream (manifold
    N) is scored under its fixed prior; the target stream (manifold M) is scored
    under the Gaussian that the latent transfer predicts from the source latents.
    All three parts are trained jointly.
    """

    def __init__(self, config: RunConfig) -> None:
        super().__init__()
        self.config = config
        grid = tuple(config.data.grid_shape)
        self.source = FlowModel(config.source, grid, config.geometry)
        self.target = FlowModel(config.target, grid, config.geometry)
        self.transfer = LatentTransfer(
            self.source.latent_shapes,
            self.target.latent_shapes,
            config.target.manifold,
            config.transfer,
        )

    def initialize(self, batch: PairBatch) -> None:
        source, target = batch
        self.source.initialize(source)
        self.target.initialize(target)

    def target_log_prob(
        self, source_latents: Latents, target_latents: Latents
    ) -> torch.Tensor:
        if not self.config.train.source_gradient:
            source_latents = [z.detach() for z in source_latents]
        means, log_vars = self.transfer(source_latents)
        total = torch.zeros(target_latents[0].shape[0], dtype=target_latents[0].dtype)
        for z, mean, log_var in zip(target_latents, means, log_vars):
            total = total + diagonal_logpdf(z, mean, log_var)
        return total

    def conditional_nll_batch(self, batch: PairBatch) -> torch.Tensor:
        """
        Per-sample -[log p(z_src) + logdet_src + log p(z_tgt | z_src) + logdet_tgt],
        each stream weighted by its configured weight.
        """
        source, target = batch
        train = self.config.train
        source_latents, source_logdet = self.source.encode(source)
        target_latents, target_logdet = self.target.encode(target)
        source_lp = self.source.latent_log_prob(source_latents)
        target_lp = self.target_log_prob(source_latents, target_latents)
        for value, name in (
            (source_lp, 'source log-density'),
            (source_logdet, 'source log-determinant'),
            (target_lp, 'target log-density'),
            (target_logdet, 'target log-determinant'),
        ):
            check_magnitude(value, name, self.config.geometry)
        return -(
            train.source_weight * (source_lp + source_logdet)
            + train.target_weight * (target_lp + target_logdet)
        )

    def loss(self, batch: PairBatch) -> torch.Tensor:
        return self.conditional_nll_batch(batch).mean()

    def conditional_nll(self, source: Field, target: Field) -> float:
        batch = (source.tensor()[None], target.tensor()[None])
        return float(self.conditional_nll_batch(batch)[0])

    @torch.no_grad()
    def generate_batch(
        self,
        source: torch.Tensor,
        temperature: float,
        seed: Union[int, torch.Generator],
    ) -> torch.Tensor:
        """
        Samples target fields for a batch of source fields: every target latent
        location is drawn from N(mean, temperature^2 * var) in chart coordinates
        (with chart-domain rejection), then decoded by the target flow.
        Temperature 0 gives the mode path.
        """
        if isinstance(seed, torch.Generator):
            generator = seed
        else:
            generator = torch.Generator().manual_seed(seed)
        source_latents, _ = self.source.encode(source)
        means, log_vars = self.transfer(source_latents)
        manifold = self.target.manifold
        latents: List[torch.Tensor] = []
        for mean, log_var in zip(means, log_vars):
            std = temperature * torch.exp(0.5 * log_var)
            latents.append(
                manifold.sample_chart(mean, lambda eps, s=std: s * eps, generator)
            )
        points, _ = self.target.decode(latents)
        return points

    def generate_conditional(
        self, source: Field, temperature: float = 1.0, seed: int = 0
    ) -> Field:
        points = self.generate_batch(source.tensor()[None], temperature, seed)
        return Field.from_tensor(self.config.target.manifold, points[0])

    def generate_fields(
        self, sources: Sequence[Field], temperature: float = 1.0, seed: int = 0
    ) -> List[Field]:
        points = self.generate_batch(stack_fields(sources), temperature, seed)
        return unstack_fields(self.config.target.manifold, points)
