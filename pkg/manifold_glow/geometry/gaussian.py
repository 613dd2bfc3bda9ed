import math

import torch
from beartype import beartype
from beartype.typing import Optional, Union
from pydantic import BaseModel, ConfigDict, model_validator

from ..configs import GeometryConfig, ManifoldKind
from ..utils.error_handler import SingularCovarianceError
from .handler import get_manifold

LOG_2PI = math.log(2.0 * math.pi)


class ManifoldGaussian(BaseModel):
    """
    Gaussian pushed onto a manifold through its chart: density of Phi(z) is
    N(Phi(mean), covariance) with respect to Lebesgue measure in chart coordinates.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: ManifoldKind
    mean: torch.Tensor
    covariance: torch.Tensor
    log_det: Optional[float] = None

    @model_validator(mode='after')
    def check_covariance(self) -> 'ManifoldGaussian':
        m = self.kind.dim
        if tuple(self.covariance.shape) != (m, m):
            raise ValueError(f'covariance must be {m}x{m}')
        if not torch.allclose(self.covariance, self.covariance.T, atol=1e-12):
            raise ValueError('covariance must be symmetric')
        _, info = torch.linalg.cholesky_ex(self.covariance)
        if int(info) != 0:
            raise ValueError('covariance must be positive definite')
        log_det = float(torch.linalg.slogdet(self.covariance)[1])
        if self.log_det is None:
            self.log_det = log_det
        elif abs(self.log_det - log_det) > 1e-8:
            raise ValueError('stored log-determinant disagrees with covariance')
        return self

    @classmethod
    def standard(cls, kind: ManifoldKind) -> 'ManifoldGaussian':
        manifold = get_manifold(kind)
        return cls(
            kind=kind,
            mean=manifold.chart_inverse(manifold.origin_coords()),
            covariance=torch.eye(kind.dim, dtype=torch.float64),
        )


@beartype
def gaussian_logpdf(
    dist: ManifoldGaussian,
    z: torch.Tensor,
    tolerances: Optional[GeometryConfig] = None,
) -> torch.Tensor:
    """
    Log-density of points ``z`` (shape (..., *ambient_shape)) under ``dist``.
    """
    manifold = get_manifold(dist.kind, tolerances)
    assert dist.log_det is not None
    if dist.log_det < math.log(manifold.tol.singular_covariance):
        raise SingularCovarianceError(
            f'covariance determinant exp({dist.log_det:.3f}) is below '
            f'{manifold.tol.singular_covariance}'
        )
    diff = manifold.chart_forward(z) - manifold.chart_forward(dist.mean)
    solved = torch.linalg.solve(
        dist.covariance.expand(diff.shape[:-1] + dist.covariance.shape),
        diff[..., None],
    )[..., 0]
    quad = (diff * solved).sum(-1)
    m = manifold.dim
    return -0.5 * quad - 0.5 * (m * LOG_2PI + dist.log_det)


@beartype
def gaussian_sample(
    dist: ManifoldGaussian,
    rng_seed: Union[int, torch.Generator],
    count: Optional[int] = None,
    tolerances: Optional[GeometryConfig] = None,
) -> torch.Tensor:
    """
    Draws from ``dist`` in chart coordinates, redrawing samples that fall outside
    the chart domain, and maps them back onto the manifold.
    :param rng_seed: seed or an already seeded generator.
    :param count: number of samples; a single point when None.
    """
    manifold = get_manifold(dist.kind, tolerances)
    if isinstance(rng_seed, torch.Generator):
        generator = rng_seed
    else:
        generator = torch.Generator().manual_seed(rng_seed)
    lower = torch.linalg.cholesky(dist.covariance)
    center = manifold.chart_forward(dist.mean)
    shape = (1 if count is None else count, manifold.dim)
    coords = manifold.sample_chart(
        center.expand(shape), lambda eps: eps @ lower.T, generator
    )
    points = manifold.chart_inverse(coords)
    return points[0] if count is None else points


def diagonal_logpdf(
    v: torch.Tensor, mean: torch.Tensor, log_var: torch.Tensor
) -> torch.Tensor:
    """
    Per-sample log-density of chart coordinates ``v`` (B, ...) under independent
    Gaussians; sums over every axis but the first.
    """
    terms = -0.5 * ((v - mean) ** 2 * torch.exp(-log_var) + log_var + LOG_2PI)
    return terms.reshape(terms.shape[0], -1).sum(-1)
