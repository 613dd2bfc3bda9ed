"""Small dense linear-algebra kernels shared by the geometry and flow layers.

Everything here works on batched float64 torch tensors whose trailing one or two
dimensions carry the vector / matrix.
"""

import math
import warnings

import torch
from beartype.typing import Any, Callable, Dict, Tuple
from torch.autograd.function import once_differentiable

from .error_handler import ConditioningWarning
from .logger import logger

EIGEN_GAP_WARNING = 1e-8
EIGEN_GAP_MERGE = 1e-10

_MatrixFunction = Tuple[
    Callable[[torch.Tensor], torch.Tensor], Callable[[torch.Tensor], torch.Tensor]
]

# value and first derivative
_SPECTRAL_FUNCTIONS: Dict[str, _MatrixFunction] = {
    'log': (torch.log, torch.reciprocal),
    'exp': (torch.exp, torch.exp),
}


def divided_differences(
    eigvals: torch.Tensor, name: str, warn: bool = True
) -> torch.Tensor:
    """
    First divided differences f[l_i, l_j] of a spectral function, with the
    derivative on (numerically) repeated eigenvalues.
    :param eigvals: (..., n) eigenvalues.
    :param name: 'log' or 'exp'.
    :param warn: emit a ConditioningWarning for near-degenerate but distinct pairs.
    :return: (..., n, n) symmetric matrix of divided differences.
    """
    func, deriv = _SPECTRAL_FUNCTIONS[name]
    lam_i = eigvals[..., :, None]
    lam_j = eigvals[..., None, :]
    gap = lam_i - lam_j
    scale = torch.clamp(torch.maximum(lam_i.abs(), lam_j.abs()), min=1.0)
    merged = gap.abs() <= EIGEN_GAP_MERGE * scale
    if warn:
        near = (~merged) & (gap.abs() < EIGEN_GAP_WARNING)
        if bool(near.any()):
            smallest = float(gap.abs()[near].min())
            warnings.warn(
                f'eigenvalue gap {smallest:.3e} below {EIGEN_GAP_WARNING:.0e} '
                f'in matrix {name} derivative',
                ConditioningWarning,
                stacklevel=3,
            )
            logger.debug(f'conditioning: eigen gap {smallest:.3e} in {name}')
    f_vals = func(eigvals)
    diff = (f_vals[..., :, None] - f_vals[..., None, :]) / torch.where(
        merged, torch.ones_like(gap), gap
    )
    return torch.where(merged, deriv(0.5 * (lam_i + lam_j)), diff)


class SymmetricMatrixFunction(torch.autograd.Function):
    """Spectral function of a symmetric matrix with a Daleckii-Krein backward."""

    @staticmethod
    def forward(ctx: Any, x: torch.Tensor, name: str) -> torch.Tensor:
        eigvals, eigvecs = torch.linalg.eigh(x)
        func, _ = _SPECTRAL_FUNCTIONS[name]
        y = (eigvecs * func(eigvals)[..., None, :]) @ eigvecs.transpose(-1, -2)
        ctx.save_for_backward(eigvals, eigvecs)
        ctx.name = name
        return y

    @staticmethod
    @once_differentiable
    def backward(ctx: Any, grad: torch.Tensor) -> Tuple[torch.Tensor, None]:
        eigvals, eigvecs = ctx.saved_tensors
        sym_grad = 0.5 * (grad + grad.transpose(-1, -2))
        inner = eigvecs.transpose(-1, -2) @ sym_grad @ eigvecs
        weighted = divided_differences(eigvals, ctx.name) * inner
        return eigvecs @ weighted @ eigvecs.transpose(-1, -2), None


def sym_logm(x: torch.Tensor) -> torch.Tensor:
    return SymmetricMatrixFunction.apply(x, 'log')  # type: ignore[no-any-return]


def sym_expm(x: torch.Tensor) -> torch.Tensor:
    return SymmetricMatrixFunction.apply(x, 'exp')  # type: ignore[no-any-return]


def tril_index(n: int) -> Tuple[torch.Tensor, torch.Tensor]:
    rows, cols = torch.tril_indices(n, n)
    return rows, cols


def isometric_weights(n: int) -> torch.Tensor:
    rows, cols = tril_index(n)
    return torch.where(
        rows == cols,
        torch.ones(rows.shape, dtype=torch.float64),
        torch.full(rows.shape, math.sqrt(2.0), dtype=torch.float64),
    )


def sym_to_coords(mat: torch.Tensor, scaled: bool = True) -> torch.Tensor:
    """
    Flattens the lower triangle of (..., n, n) row by row; off-diagonal entries are
    multiplied by sqrt(2) when ``scaled`` so the flattening preserves the Frobenius
    inner product on symmetric matrices.
    """
    n = mat.shape[-1]
    rows, cols = tril_index(n)
    coords = mat[..., rows, cols]
    if scaled:
        coords = coords * isometric_weights(n).to(mat.dtype)
    return coords


def coords_to_tril(coords: torch.Tensor, n: int) -> torch.Tensor:
    rows, cols = tril_index(n)
    out = coords.new_zeros(coords.shape[:-1] + (n, n))
    out[..., rows, cols] = coords
    return out


def coords_to_sym(coords: torch.Tensor, n: int, scaled: bool = True) -> torch.Tensor:
    if scaled:
        coords = coords / isometric_weights(n).to(coords.dtype)
    lower = coords_to_tril(coords, n)
    diag = torch.diagonal(lower, dim1=-2, dim2=-1)
    return lower + lower.transpose(-1, -2) - torch.diag_embed(diag)


def side_from_dim(m: int) -> int:
    n = int(round((math.sqrt(8 * m + 1) - 1) / 2))
    if n * (n + 1) // 2 != m:
        raise ValueError(f'{m} is not a triangular number')
    return n


def skew_dim(k: int) -> int:
    return k * (k - 1) // 2


def skew_from_raw(raw: torch.Tensor, k: int) -> torch.Tensor:
    """
    Builds the skew-symmetric (..., k, k) matrix whose strict upper triangle, read
    row by row, equals ``raw``.
    """
    rows, cols = torch.triu_indices(k, k, offset=1)
    upper = raw.new_zeros(raw.shape[:-1] + (k, k))
    upper[..., rows, cols] = raw
    return upper - upper.transpose(-1, -2)


def cayley(raw: torch.Tensor, k: int) -> torch.Tensor:
    """
    Cayley transform R = (I - A)^{-1} (I + A) of the skew matrix built from ``raw``;
    always a rotation, identity for ``raw = 0``.
    """
    eye = torch.eye(k, dtype=raw.dtype).expand(raw.shape[:-1] + (k, k))
    if k == 1:
        return eye.clone()
    skew = skew_from_raw(raw, k)
    return torch.linalg.solve(eye - skew, eye + skew)


def safe_norm(v: torch.Tensor) -> torch.Tensor:
    """Euclidean norm over the last axis with a finite gradient at the origin."""
    return torch.sqrt(torch.clamp((v * v).sum(-1), min=1e-300))


def orthogonality_defect(q: torch.Tensor) -> torch.Tensor:
    eye = torch.eye(q.shape[-1], dtype=q.dtype)
    return torch.linalg.matrix_norm(q.transpose(-1, -2) @ q - eye)
