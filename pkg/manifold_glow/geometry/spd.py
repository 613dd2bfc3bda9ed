import torch
from beartype.typing import Tuple

from ..utils.error_handler import DomainError, InvalidPointError, InvariantViolationError
from ..utils.linalg import (
    cayley,
    coords_to_sym,
    coords_to_tril,
    sym_expm,
    sym_logm,
    sym_to_coords,
)
from .manifold_base import Manifold


class Spd(Manifold):
    """
    Symmetric positive-definite n x n matrices with the affine-invariant metric.

    Two charts are available. ``matrix_log`` flattens the matrix logarithm with
    sqrt(2)-weighted off-diagonals, so conjugation by a rotation is an orthogonal
    linear map of the coordinates. ``cholesky`` flattens the lower Cholesky factor;
    there the conjugation action has a non-unit Jacobian, reported exactly by
    ``group_chart_forward``.
    """

    @property
    def group_size(self) -> int:
        return self.kind.n

    @property
    def is_cholesky(self) -> bool:
        return self.kind.chart == 'cholesky'

    def check_point(self, x: torch.Tensor) -> None:
        if not bool(torch.isfinite(x).all()):
            raise InvalidPointError('spd point has non-finite entries')
        if x.numel() == 0:
            return
        asym = float((x - x.transpose(-1, -2)).abs().max())
        if asym >= self.tol.point_tol:
            raise InvalidPointError(f'spd point is not symmetric (off by {asym:.3e})')
        smallest = float(torch.linalg.eigvalsh(x).min())
        if smallest <= self.tol.spd_eig_floor:
            raise InvalidPointError(
                f'spd point has eigenvalue {smallest:.3e} <= {self.tol.spd_eig_floor}'
            )

    def relative_eigvals(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """Eigenvalues of x^{-1} y, computed as those of L^{-1} y L^{-T}."""
        lower = torch.linalg.cholesky(x)
        half = torch.linalg.solve_triangular(lower, y, upper=False)
        whitened = torch.linalg.solve_triangular(
            lower, half.transpose(-1, -2), upper=False
        )
        whitened = 0.5 * (whitened + whitened.transpose(-1, -2))
        return torch.linalg.eigvalsh(whitened)

    def distance(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        self.check_point(x)
        self.check_point(y)
        # symmetric in x and y up to rounding; average both orders so d(x, y) == d(y, x)
        forward = torch.log(self.relative_eigvals(x, y)).pow(2).sum(-1)
        backward = torch.log(self.relative_eigvals(y, x)).pow(2).sum(-1)
        return torch.sqrt(0.5 * (forward + backward))

    def chart_forward(self, x: torch.Tensor) -> torch.Tensor:
        self.check_point(x)
        if self.is_cholesky:
            return sym_to_coords(torch.linalg.cholesky(x), scaled=False)
        return sym_to_coords(sym_logm(x))

    def chart_inverse(self, v: torch.Tensor) -> torch.Tensor:
        n = self.kind.n
        if self.is_cholesky:
            lower = coords_to_tril(v, n)
            if bool((torch.diagonal(lower, dim1=-2, dim2=-1) <= 0).any()):
                raise DomainError('cholesky coordinates need a positive diagonal')
            return lower @ lower.transpose(-1, -2)
        return sym_expm(coords_to_sym(v, n))

    def chart_violation(self, v: torch.Tensor) -> torch.Tensor:
        bad = ~torch.isfinite(v).all(-1)
        if self.is_cholesky:
            lower = coords_to_tril(torch.nan_to_num(v), self.kind.n)
            diag = torch.diagonal(lower, dim1=-2, dim2=-1)
            bad = bad | (diag <= 0).any(-1)
        return bad

    def origin_coords(self) -> torch.Tensor:
        if self.is_cholesky:
            return sym_to_coords(torch.eye(self.kind.n, dtype=torch.float64), False)
        return super().origin_coords()

    def group_from_raw(self, raw: torch.Tensor) -> torch.Tensor:
        return cayley(raw, self.group_size)

    def group_identity(self, batch_shape: Tuple[int, ...] = ()) -> torch.Tensor:
        n = self.kind.n
        return torch.eye(n, dtype=torch.float64).expand(batch_shape + (n, n)).clone()

    def group_apply(self, g: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        out = g @ x @ g.transpose(-1, -2)
        asym = (out - out.transpose(-1, -2)).abs()
        if out.numel() and float(asym.max()) >= self.tol.reproject_tol:
            raise InvariantViolationError(
                f'conjugated matrix lost symmetry by {float(asym.max()):.3e}'
            )
        return 0.5 * (out + out.transpose(-1, -2))

    def group_inverse(self, g: torch.Tensor) -> torch.Tensor:
        return g.transpose(-1, -2)

    def group_chart_apply(self, g: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
        return self.group_chart_forward(g, v)[0]

    def group_chart_forward(
        self, g: torch.Tensor, v: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        n = self.kind.n
        if not self.is_cholesky:
            sym = coords_to_sym(v, n)
            y = sym_to_coords(g @ sym @ g.transpose(-1, -2))
            return y, torch.zeros(y.shape[:-1], dtype=y.dtype)
        lower = coords_to_tril(v, n)
        conj = g @ lower @ lower.transpose(-1, -2) @ g.transpose(-1, -2)
        moved = torch.linalg.cholesky(0.5 * (conj + conj.transpose(-1, -2)))
        # L -> L L^T has Jacobian 2^n prod_i L_ii^(n - i); conjugation is unimodular
        powers = torch.arange(n, 0, -1, dtype=v.dtype)
        diag_in = torch.diagonal(lower, dim1=-2, dim2=-1)
        diag_out = torch.diagonal(moved, dim1=-2, dim2=-1)
        logdet = (powers * (torch.log(diag_in) - torch.log(diag_out))).sum(-1)
        return sym_to_coords(moved, scaled=False), logdet
