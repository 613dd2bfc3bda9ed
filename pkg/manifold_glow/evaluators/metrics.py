import numpy as np
import torch
from beartype import beartype
from beartype.typing import List, Optional, Sequence, Union, cast

from ..configs import GeometryConfig
from ..data import Field, stack_fields
from ..geometry import chart_mean, get_manifold
from ..utils.error_handler import ShapeMismatchError


@beartype
def reconstruction_error(
    generated: Field, reference: Field, tolerances: Optional[GeometryConfig] = None
) -> float:
    """Mean over voxels and channels of the geodesic distance between two fields."""
    if generated.points.shape != reference.points.shape or (
        generated.kind.kind,
        generated.kind.n,
    ) != (reference.kind.kind, reference.kind.n):
        raise ShapeMismatchError(
            f'cannot compare {generated.kind.kind}{generated.points.shape} with '
            f'{reference.kind.kind}{reference.points.shape}'
        )
    manifold = get_manifold(reference.kind, tolerances)
    return float(manifold.distance(generated.tensor(), reference.tensor()).mean())


def reconstruction_errors(
    generated: Sequence[Field],
    references: Sequence[Field],
    tolerances: Optional[GeometryConfig] = None,
) -> List[float]:
    if len(generated) != len(references):
        raise ShapeMismatchError(
            f'{len(generated)} generated fields for {len(references)} references'
        )
    return [
        reconstruction_error(g, r, tolerances) for g, r in zip(generated, references)
    ]


@beartype
def confusion_matrix(
    generated: Union[Sequence[Field], Sequence[Sequence[Field]]],
    references: Sequence[Field],
    tolerances: Optional[GeometryConfig] = None,
) -> np.ndarray:
    """
    Entry (i, j) is the reconstruction error of generated i against reference j.

    :param generated: one generated field per reference, or several such runs
        (repeated sampling of the same subjects); runs are averaged entrywise.
    """
    runs: List[Sequence[Field]]
    if len(generated) > 0 and isinstance(generated[0], Field):
        runs = [cast(Sequence[Field], generated)]
    else:
        runs = list(cast(Sequence[Sequence[Field]], generated)) or [[]]
    total = np.zeros((len(references), len(references)))
    for run in runs:
        if len(run) != len(references):
            raise ShapeMismatchError(
                f'{len(run)} generated fields for {len(references)} references'
            )
        total += np.array(
            [[reconstruction_error(g, r, tolerances) for r in references] for g in run]
        ).reshape(total.shape)
    return total / len(runs)


def dominance_score(matrix: np.ndarray) -> float:
    """Fraction of rows whose diagonal entry is the row minimum."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise ShapeMismatchError(f'need a nonempty square matrix, got {matrix.shape}')
    diagonal = np.diag(matrix)
    return float(np.mean(diagonal <= matrix.min(axis=1)))


def subset_dominance(
    matrix: np.ndarray, k: int, repeats: int, seed: int
) -> List[float]:
    """
    Dominance on ``repeats`` random k-subjects sub-matrices (the same subjects
    index rows and columns); k is capped at the number of subjects.
    """
    count = matrix.shape[0]
    k = min(k, count)
    rng = np.random.default_rng([seed, count, k])
    scores = []
    for _ in range(repeats):
        idx = np.sort(rng.choice(count, size=k, replace=False))
        scores.append(dominance_score(matrix[np.ix_(idx, idx)]))
    return scores


def chart_mean_field(
    fields: Sequence[Field], tolerances: Optional[GeometryConfig] = None
) -> Field:
    """Voxelwise chart-space mean of a set of fields: the constant-predictor baseline."""
    kind = fields[0].kind
    mean = chart_mean(kind, stack_fields(fields), 0, tolerances)
    return Field.from_tensor(kind, mean)


def fractional_anisotropy(field: Field) -> np.ndarray:
    """Per-voxel, per-channel FA of an SPD field, shape (*grid, C)."""
    if field.kind.kind != 'spd':
        raise ShapeMismatchError(f'FA needs an spd field, got {field.kind.kind}')
    eigvals = torch.linalg.eigvalsh(field.tensor()).numpy()
    n = eigvals.shape[-1]
    centered = eigvals - eigvals.mean(-1, keepdims=True)
    return np.sqrt(n / (n - 1.0)) * np.sqrt(
        (centered**2).sum(-1) / (eigvals**2).sum(-1)
    )
