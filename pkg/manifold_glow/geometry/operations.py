"""Function-style entry points over ManifoldKind, mirroring the manifold methods."""

import torch
from beartype import beartype
from beartype.typing import Optional

from ..configs import GeometryConfig, ManifoldKind
from ..utils.error_handler import DomainError, ShapeMismatchError
from .handler import get_manifold


@beartype
def distance(
    kind: ManifoldKind,
    x: torch.Tensor,
    y: torch.Tensor,
    tolerances: Optional[GeometryConfig] = None,
) -> torch.Tensor:
    if x.shape != y.shape:
        raise ShapeMismatchError(f'{tuple(x.shape)} vs {tuple(y.shape)}')
    return get_manifold(kind, tolerances).distance(x, y)


@beartype
def chart_forward(
    kind: ManifoldKind, x: torch.Tensor, tolerances: Optional[GeometryConfig] = None
) -> torch.Tensor:
    return get_manifold(kind, tolerances).chart_forward(x)


@beartype
def chart_inverse(
    kind: ManifoldKind, v: torch.Tensor, tolerances: Optional[GeometryConfig] = None
) -> torch.Tensor:
    return get_manifold(kind, tolerances).chart_inverse(v)


@beartype
def group_apply(
    kind: ManifoldKind,
    g: torch.Tensor,
    x: torch.Tensor,
    tolerances: Optional[GeometryConfig] = None,
) -> torch.Tensor:
    manifold = get_manifold(kind, tolerances)
    manifold.check_point(x)
    manifold.check_group(g)
    return manifold.group_apply(g, x)


@beartype
def group_inverse(
    kind: ManifoldKind, g: torch.Tensor, tolerances: Optional[GeometryConfig] = None
) -> torch.Tensor:
    manifold = get_manifold(kind, tolerances)
    manifold.check_group(g)
    return manifold.group_inverse(g)


@beartype
def chart_transition_logdet(
    src: ManifoldKind,
    dst: ManifoldKind,
    at: torch.Tensor,
    tolerances: Optional[GeometryConfig] = None,
) -> float:
    """
    log|det| of the Jacobian of dst_chart o src_chart^{-1} at src_chart(at).
    Both kinds must describe the same manifold; they may differ in chart or pole.
    """
    if (src.kind, src.n) != (dst.kind, dst.n):
        raise ShapeMismatchError(f'cannot compare charts of {src.kind} and {dst.kind}')
    if src == dst:
        return 0.0
    src_manifold = get_manifold(src, tolerances)
    dst_manifold = get_manifold(dst, tolerances)
    origin = src_manifold.chart_forward(at)

    def transition(v: torch.Tensor) -> torch.Tensor:
        return dst_manifold.chart_forward(src_manifold.chart_inverse(v))

    jacobian = torch.autograd.functional.jacobian(transition, origin)
    sign, logabsdet = torch.linalg.slogdet(jacobian)
    if float(sign) == 0.0 or not bool(torch.isfinite(logabsdet)):
        raise DomainError('chart transition is singular at this point')
    return float(logabsdet)


@beartype
def chart_mean(
    kind: ManifoldKind,
    x: torch.Tensor,
    dim: int = 0,
    tolerances: Optional[GeometryConfig] = None,
) -> torch.Tensor:
    """Mean taken in chart coordinates along ``dim`` and mapped back."""
    manifold = get_manifold(kind, tolerances)
    return manifold.chart_inverse(manifold.chart_forward(x).mean(dim))
