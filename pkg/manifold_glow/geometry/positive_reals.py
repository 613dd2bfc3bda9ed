import torch
from beartype.typing import Tuple

from ..utils.error_handler import InvalidPointError
from .manifold_base import Manifold


class PositiveReals(Manifold):
    """R+ with the log chart; positive scalars act by multiplication."""

    @property
    def group_dim(self) -> int:
        return 1

    def check_point(self, x: torch.Tensor) -> None:
        if not bool(torch.isfinite(x).all()):
            raise InvalidPointError('positive real has non-finite entries')
        if bool((x <= 0).any()):
            raise InvalidPointError(
                f'positive real must be > 0, got {float(x.min()):.6g}'
            )

    def distance(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        self.check_point(x)
        self.check_point(y)
        return (torch.log(x) - torch.log(y)).abs()

    def chart_forward(self, x: torch.Tensor) -> torch.Tensor:
        self.check_point(x)
        return torch.log(x)[..., None]

    def chart_inverse(self, v: torch.Tensor) -> torch.Tensor:
        return torch.exp(v[..., 0])

    def chart_violation(self, v: torch.Tensor) -> torch.Tensor:
        return ~torch.isfinite(v).all(-1)

    def group_from_raw(self, raw: torch.Tensor) -> torch.Tensor:
        return torch.exp(raw)

    def group_identity(self, batch_shape: Tuple[int, ...] = ()) -> torch.Tensor:
        return torch.ones(batch_shape + (1,), dtype=torch.float64)

    def group_apply(self, g: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        return x * g[..., 0]

    def group_inverse(self, g: torch.Tensor) -> torch.Tensor:
        return 1.0 / g

    def group_chart_apply(self, g: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
        return v + torch.log(g)

    def centering_raw(self, mean_coords: torch.Tensor) -> torch.Tensor:
        return -mean_coords
