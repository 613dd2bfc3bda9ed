import numpy as np
import torch
from beartype.typing import List, Literal, Optional, Sequence, Tuple
from pydantic import BaseModel, ConfigDict, Field as PydanticField, model_validator

from ..configs import GeometryConfig, ManifoldKind
from ..geometry import get_manifold
from ..utils.error_handler import ShapeMismatchError


class Field(BaseModel):
    """
    A grid (1 to 3 spatial axes) times channels of points on one manifold, stored
    in ambient form as float64 with shape (*grid_shape, channels, *ambient_shape).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: ManifoldKind
    points: np.ndarray

    @model_validator(mode='after')
    def check_shape(self) -> 'Field':
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        ambient = self.kind.ambient_shape
        rank = self.points.ndim - 1 - len(ambient)
        if not 1 <= rank <= 3:
            raise ValueError(f'field needs 1 to 3 spatial axes, got {rank}')
        if tuple(self.points.shape[self.points.ndim - len(ambient) :]) != ambient:
            raise ValueError(
                f'trailing axes {self.points.shape} do not match ambient {ambient}'
            )
        return self

    @property
    def ambient_rank(self) -> int:
        return len(self.kind.ambient_shape)

    @property
    def grid_shape(self) -> Tuple[int, ...]:
        return tuple(self.points.shape[: self.points.ndim - 1 - self.ambient_rank])

    @property
    def channels(self) -> int:
        return int(self.points.shape[len(self.grid_shape)])

    @property
    def voxel_count(self) -> int:
        return int(np.prod(self.grid_shape))

    def tensor(self) -> torch.Tensor:
        return torch.from_numpy(self.points.copy())

    @classmethod
    def from_tensor(cls, kind: ManifoldKind, points: torch.Tensor) -> 'Field':
        return cls(kind=kind, points=points.detach().cpu().numpy().astype(np.float64))

    def validate_points(self, tolerances: Optional[GeometryConfig] = None) -> None:
        get_manifold(self.kind, tolerances).check_point(self.tensor())

    def with_kind(self, kind: ManifoldKind) -> 'Field':
        """Same points read through another chart or pole of the same manifold."""
        if (kind.kind, kind.n) != (self.kind.kind, self.kind.n):
            raise ShapeMismatchError(f'{self.kind.kind} field cannot become {kind.kind}')
        return Field(kind=kind, points=self.points)


def stack_fields(fields: Sequence[Field]) -> torch.Tensor:
    """Batch tensor (B, *grid, channels, *ambient) of equally shaped fields."""
    if not fields:
        raise ShapeMismatchError('cannot stack an empty list of fields')
    shape = fields[0].points.shape
    for field in fields:
        if field.points.shape != shape or field.kind.kind != fields[0].kind.kind:
            raise ShapeMismatchError(
                f'field of shape {field.points.shape} does not match {shape}'
            )
    return torch.from_numpy(np.stack([f.points for f in fields]))


def unstack_fields(kind: ManifoldKind, batch: torch.Tensor) -> List[Field]:
    return [Field.from_tensor(kind, points) for points in batch]


GroupLabel = Literal['A', 'B']


class PairedDataset(BaseModel):
    """Aligned (source, target) fields with the metadata that reproduces them."""

    sources: List[Field]
    targets: List[Field]
    groups: List[GroupLabel]
    seed: int = 0
    generator: str = 'paired'
    noise: float = 0.0
    names: List[str] = PydanticField(default_factory=list)

    @model_validator(mode='after')
    def check_pairs(self) -> 'PairedDataset':
        if not (len(self.sources) == len(self.targets) == len(self.groups)):
            raise ValueError('sources, targets and groups must have equal length')
        if not self.names:
            self.names = [f'{i:04d}' for i in range(len(self.sources))]
        if len(self.names) != len(self.sources):
            raise ValueError('one name per pair is required')
        for source, target in zip(self.sources, self.targets):
            if source.grid_shape != target.grid_shape:
                raise ValueError(
                    f'paired grids differ: {source.grid_shape} vs {target.grid_shape}'
                )
        return self

    def __len__(self) -> int:
        return len(self.sources)

    def subset(self, indices: Sequence[int]) -> 'PairedDataset':
        return PairedDataset(
            sources=[self.sources[i] for i in indices],
            targets=[self.targets[i] for i in indices],
            groups=[self.groups[i] for i in indices],
            names=[self.names[i] for i in indices],
            seed=self.seed,
            generator=self.generator,
            noise=self.noise,
        )
