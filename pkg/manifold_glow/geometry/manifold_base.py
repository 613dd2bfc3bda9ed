from abc import ABC, abstractmethod

import torch
from beartype.typing import Callable, Optional, Tuple

from ..configs import GeometryConfig, ManifoldKind
from ..utils.error_handler import (
    ChartDomainError,
    InvariantViolationError,
    RejectionExhaustedError,
)
from ..utils.linalg import orthogonality_defect


class Manifold(ABC):
    """
    A Riemannian manifold together with one global chart and an isometry group.

    Points are batched float64 tensors whose trailing dimensions are
    ``ambient_shape``; chart coordinates carry a trailing axis of length ``dim``.
    Group elements are produced from unconstrained raw parameters with
    ``group_from_raw`` so that flow layers can learn them.
    """

    def __init__(
        self, kind: ManifoldKind, tolerances: Optional[GeometryConfig] = None
    ) -> None:
        self.kind = kind
        self.tol = tolerances or GeometryConfig()

    @property
    def dim(self) -> int:
        return self.kind.dim

    @property
    def ambient_shape(self) -> Tuple[int, ...]:
        return self.kind.ambient_shape

    @property
    def group_size(self) -> int:
        """Side of the rotation matrices acting on the manifold, 0 for scalars."""
        return 0

    @property
    def group_dim(self) -> int:
        """Number of raw parameters describing one group element."""
        k = self.group_size
        return k * (k - 1) // 2

    def batch_shape(self, x: torch.Tensor) -> Tuple[int, ...]:
        return tuple(x.shape[: x.dim() - len(self.ambient_shape)])

    @abstractmethod
    def check_point(self, x: torch.Tensor) -> None:
        """
        Raises InvalidPointError if any point violates the manifold's invariants.
        :param x: points, shape (..., *ambient_shape).
        """

    @abstractmethod
    def distance(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """
        Geodesic distance between matching points of two batches.
        :param x: points, shape (..., *ambient_shape).
        :param y: points, same shape as x.
        :return: distances, shape (...).
        """

    @abstractmethod
    def chart_forward(self, x: torch.Tensor) -> torch.Tensor:
        pass

    @abstractmethod
    def chart_inverse(self, v: torch.Tensor) -> torch.Tensor:
        pass

    @abstractmethod
    def chart_violation(self, v: torch.Tensor) -> torch.Tensor:
        """
        Boolean mask of coordinate vectors outside the chart's valid domain
        (including non-finite entries), shape (...).
        """

    def origin_coords(self) -> torch.Tensor:
        """Chart coordinates of the chart center."""
        return torch.zeros(self.dim, dtype=torch.float64)

    def check_chart(self, v: torch.Tensor) -> None:
        bad = self.chart_violation(v)
        if bool(bad.any()):
            count = int(bad.sum())
            raise ChartDomainError(
                f'{count} coordinate vector(s) left the {self.kind.chart} chart domain'
            )

    # group
    @abstractmethod
    def group_from_raw(self, raw: torch.Tensor) -> torch.Tensor:
        pass

    @abstractmethod
    def group_identity(self, batch_shape: Tuple[int, ...] = ()) -> torch.Tensor:
        pass

    @abstractmethod
    def group_apply(self, g: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        pass

    @abstractmethod
    def group_inverse(self, g: torch.Tensor) -> torch.Tensor:
        pass

    @abstractmethod
    def group_chart_apply(self, g: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
        """The group action read in chart coordinates, v -> Phi(g . Phi^{-1}(v))."""

    def group_chart_forward(
        self, g: torch.Tensor, v: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Group action in chart coordinates together with the log|det| of its
        Jacobian at ``v``, shape (...). Zero wherever the action is unit-Jacobian.
        """
        y = self.group_chart_apply(g, v)
        return y, torch.zeros(y.shape[:-1], dtype=y.dtype)

    def check_group(self, g: torch.Tensor) -> None:
        if self.group_size == 0:
            if bool((g <= 0).any()) or not bool(torch.isfinite(g).all()):
                raise InvariantViolationError('scalar group element must be > 0')
            return
        defect = orthogonality_defect(g)
        det = torch.linalg.det(g)
        if bool((defect >= self.tol.group_tol).any()) or bool(
            ((det - 1.0).abs() >= self.tol.group_tol).any()
        ):
            raise InvariantViolationError(
                f'group element is not a rotation (defect {float(defect.max()):.3e})'
            )

    def centering_raw(self, mean_coords: torch.Tensor) -> torch.Tensor:
        """
        Raw group parameters of the element that best moves ``mean_coords`` to the
        chart origin. Rotations cannot change the norm of the mean, so the default
        answer is the identity.
        """
        return torch.zeros(mean_coords.shape[:-1] + (self.group_dim,))

    def sample_chart(
        self,
        mean: torch.Tensor,
        transform: Callable[[torch.Tensor], torch.Tensor],
        generator: torch.Generator,
    ) -> torch.Tensor:
        """
        Draws ``mean + transform(eps)`` with standard normal eps at every location,
        redrawing locations that land outside the chart domain.
        """
        limit = self.tol.rejection_limit
        v = mean + transform(torch.randn(mean.shape, generator=generator))
        bad = self.chart_violation(v)
        rejected = torch.zeros(bad.shape, dtype=torch.long)
        while bool(bad.any()):
            rejected += bad.long()
            if int(rejected.max()) >= limit:
                raise RejectionExhaustedError(
                    f'{limit} draws rejected by the {self.kind.chart} chart; '
                    'covariance is too wide for the chart domain'
                )
            redraw = mean + transform(torch.randn(mean.shape, generator=generator))
            v = torch.where(bad[..., None], redraw, v)
            bad = bad & self.chart_violation(redraw)
        return v

    def random_points(
        self,
        batch_shape: Tuple[int, ...],
        generator: torch.Generator,
        spread: float = 0.5,
    ) -> torch.Tensor:
        """Random valid points scattered around the chart center."""
        mean = self.origin_coords().expand(batch_shape + (self.dim,))
        coords = self.sample_chart(mean, lambda eps: spread * eps, generator)
        return self.chart_inverse(coords)

    def random_group(
        self,
        batch_shape: Tuple[int, ...],
        generator: torch.Generator,
        spread: float = 1.0,
    ) -> torch.Tensor:
        raw = spread * torch.randn(batch_shape + (self.group_dim,), generator=generator)
        return self.group_from_raw(raw)

    def __repr__(self) -> str:
        return f'{type(self).__name__}(n={self.kind.n}, chart={self.kind.chart})'
