import math

import torch
from beartype.typing import Optional, Tuple

from ..configs import GeometryConfig, ManifoldKind
from ..utils.error_handler import (
    CutLocusError,
    DomainError,
    InvalidPointError,
    InvariantViolationError,
)
from ..utils.linalg import cayley, safe_norm
from .manifold_base import Manifold


def pole_vector(kind: ManifoldKind) -> torch.Tensor:
    n = kind.n
    if kind.pole == 'canonical':
        pole = torch.zeros(n, dtype=torch.float64)
        pole[0] = 1.0
    elif kind.pole == 'uniform':
        pole = torch.full((n,), 1.0 / math.sqrt(n), dtype=torch.float64)
    else:
        pole = torch.tensor(kind.pole, dtype=torch.float64)
        pole = pole / torch.linalg.vector_norm(pole)
    return pole


def tangent_basis(pole: torch.Tensor) -> torch.Tensor:
    """
    Orthonormal basis of the tangent space at ``pole`` from Gram-Schmidt on the
    canonical vectors, returned as the columns of an (n, n-1) matrix.
    """
    n = pole.shape[0]
    frame = [pole]
    for i in range(n):
        w = torch.zeros(n, dtype=torch.float64)
        w[i] = 1.0
        for q in frame:
            w = w - torch.dot(q, w) * q
        norm = torch.linalg.vector_norm(w)
        if norm > 1e-8:
            frame.append(w / norm)
        if len(frame) == n:
            break
    return torch.stack(frame[1:], dim=1)


class Sphere(Manifold):
    """
    Unit sphere S^{n-1} in R^n with the pole-log chart: the Riemannian log map at a
    fixed pole, read in a fixed orthonormal tangent basis. The isometries used by
    the flow are the rotations fixing the pole, acting as SO(n-1) on coordinates.
    """

    def __init__(
        self, kind: ManifoldKind, tolerances: Optional[GeometryConfig] = None
    ) -> None:
        super().__init__(kind, tolerances)
        self.pole = pole_vector(kind)
        self.basis = tangent_basis(self.pole)

    @property
    def group_size(self) -> int:
        return self.kind.n - 1

    @property
    def radius(self) -> float:
        return math.pi - self.tol.cut_margin

    def check_point(self, x: torch.Tensor) -> None:
        norms = torch.linalg.vector_norm(x, dim=-1)
        if not bool(torch.isfinite(x).all()):
            raise InvalidPointError('sphere point has non-finite entries')
        worst = float((norms - 1.0).abs().max()) if norms.numel() else 0.0
        if worst >= self.tol.point_tol:
            raise InvalidPointError(f'sphere point off unit norm by {worst:.3e}')

    def distance(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        self.check_point(x)
        self.check_point(y)
        inner = (x * y).sum(-1)
        window = 1.0 + self.tol.arccos_window
        if bool((inner.abs() > window).any()):
            raise DomainError('arccos argument outside [-1, 1] after clamping window')
        # same value as arccos(<x, y>), without its loss of precision near 0 and pi
        return 2.0 * torch.atan2(
            torch.linalg.vector_norm(x - y, dim=-1),
            torch.linalg.vector_norm(x + y, dim=-1),
        )

    def chart_forward(self, x: torch.Tensor) -> torch.Tensor:
        self.check_point(x)
        s = x @ self.basis
        c = x @ self.pole
        sn = safe_norm(s)
        theta = torch.atan2(sn, c)
        if bool((theta >= self.radius).any()):
            raise CutLocusError(
                f'sphere point within {self.tol.cut_margin} of the antipode of the pole'
            )
        return s * (theta / sn)[..., None]

    def chart_inverse(self, v: torch.Tensor) -> torch.Tensor:
        r = safe_norm(v)
        if bool((r >= math.pi).any()):
            raise DomainError('pole-log coordinates must have norm < pi')
        tangent = (v * torch.sinc(r / math.pi)[..., None]) @ self.basis.T
        return torch.cos(r)[..., None] * self.pole + tangent

    def chart_violation(self, v: torch.Tensor) -> torch.Tensor:
        finite = torch.isfinite(v).all(-1)
        norm = torch.linalg.vector_norm(torch.nan_to_num(v), dim=-1)
        return ~finite | (norm >= self.radius)

    def group_from_raw(self, raw: torch.Tensor) -> torch.Tensor:
        return cayley(raw, self.group_size)

    def group_identity(self, batch_shape: Tuple[int, ...] = ()) -> torch.Tensor:
        k = self.group_size
        return torch.eye(k, dtype=torch.float64).expand(batch_shape + (k, k)).clone()

    def group_apply(self, g: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        s = x @ self.basis
        rotated = (g @ s[..., None])[..., 0]
        out = (x @ self.pole)[..., None] * self.pole + rotated @ self.basis.T
        drift = (torch.linalg.vector_norm(out, dim=-1) - 1.0).abs()
        if bool((drift >= self.tol.reproject_tol).any()):
            raise InvariantViolationError(
                f'rotated point drifted {float(drift.max()):.3e} off the sphere'
            )
        return out / torch.linalg.vector_norm(out, dim=-1, keepdim=True)

    def group_inverse(self, g: torch.Tensor) -> torch.Tensor:
        return g.transpose(-1, -2)

    def group_chart_apply(self, g: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
        return (g @ v[..., None])[..., 0]
