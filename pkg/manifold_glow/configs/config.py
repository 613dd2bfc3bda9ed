import math
import os

import yaml
from beartype.typing import Any, Dict, List, Literal, Optional, Tuple, Union
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from ..utils.error_handler import ConfigValidationError, DivisibilityError

ManifoldName = Literal['sphere', 'positive_reals', 'spd']
ChartName = Literal['pole_log', 'scalar_log', 'cholesky', 'matrix_log']

DEFAULT_CHARTS: Dict[str, str] = {
    'sphere': 'pole_log',
    'positive_reals': 'scalar_log',
    'spd': 'matrix_log',
}

COMPATIBLE_CHARTS: Dict[str, Tuple[str, ...]] = {
    'sphere': ('pole_log',),
    'positive_reals': ('scalar_log',),
    'spd': ('cholesky', 'matrix_log'),
}


class StrictModel(BaseModel):
    model_config = ConfigDict(extra='forbid')


# GeometryConfig holds every module-wide numerical tolerance
class GeometryConfig(StrictModel):
    point_tol: float = 1e-10
    spd_eig_floor: float = 1e-12
    group_tol: float = 1e-8
    reproject_tol: float = 1e-8
    arccos_window: float = 1e-8
    cut_margin: float = 1e-3
    eigen_gap_warning: float = 1e-8
    singular_covariance: float = 1e-30
    rejection_limit: int = 10000
    round_trip_tol: float = 1e-8
    fd_agreement: float = 1e-4
    magnitude_abort: float = 1e6


class ManifoldKind(BaseModel):
    """Manifold plus the global chart used for it."""

    model_config = ConfigDict(extra='forbid', frozen=True)

    kind: ManifoldName
    n: int = 1
    chart: ChartName = 'pole_log'
    pole: Union[Literal['canonical', 'uniform'], Tuple[float, ...]] = 'canonical'

    @model_validator(mode='before')
    @classmethod
    def fill_default_chart(cls, values: Any) -> Any:
        if isinstance(values, dict) and values.get('chart') is None:
            values = dict(values)
            values['chart'] = DEFAULT_CHARTS.get(str(values.get('kind')), 'pole_log')
        return values

    @model_validator(mode='after')
    def check_kind(self) -> 'ManifoldKind':
        if self.kind in ('sphere', 'spd') and self.n < 2:
            raise ValueError(f'{self.kind} requires n >= 2, got {self.n}')
        if self.kind == 'positive_reals' and self.n != 1:
            raise ValueError('positive_reals is one-dimensional, n must be 1')
        if self.chart not in COMPATIBLE_CHARTS[self.kind]:
            raise ValueError(f"chart '{self.chart}' is not defined on {self.kind}")
        if isinstance(self.pole, tuple):
            if self.kind != 'sphere':
                raise ValueError('a pole is only meaningful on the sphere')
            if len(self.pole) != self.n:
                raise ValueError(f'pole has {len(self.pole)} entries, expected {self.n}')
            if math.sqrt(sum(p * p for p in self.pole)) < 1e-12:
                raise ValueError('pole must be a nonzero vector')
        return self

    @property
    def dim(self) -> int:
        if self.kind == 'sphere':
            return self.n - 1
        if self.kind == 'positive_reals':
            return 1
        return self.n * (self.n + 1) // 2

    @property
    def ambient_shape(self) -> Tuple[int, ...]:
        if self.kind == 'sphere':
            return (self.n,)
        if self.kind == 'positive_reals':
            return ()
        return (self.n, self.n)


class LevelShape(BaseModel):
    grid: Tuple[int, ...]
    channels: int
    emitted: Optional[int] = None


def squeezed_grid(grid: Tuple[int, ...]) -> Tuple[Tuple[int, ...], int]:
    """
    Grid after one squeeze and the channel multiplier; extent-1 axes are left alone.
    """
    new_grid = []
    factor = 1
    for extent in grid:
        if extent == 1:
            new_grid.append(1)
            continue
        if extent % 2 != 0:
            raise DivisibilityError(f'grid extent {extent} is not divisible by 2')
        new_grid.append(extent // 2)
        factor *= 2
    return tuple(new_grid), factor


def plan_levels(
    grid: Tuple[int, ...], channels: int, levels: int
) -> List[LevelShape]:
    """
    Shape schedule of a multiscale flow: every level squeezes, runs its blocks, and
    all but the last emit half of their channels as a latent.
    """
    if not 1 <= len(grid) <= 3:
        raise ValueError(f'grid must have 1 to 3 axes, got {len(grid)}')
    plan = []
    for level in range(levels):
        grid, factor = squeezed_grid(grid)
        channels *= factor
        emitted = None
        if level < levels - 1:
            if channels % 2 != 0:
                raise DivisibilityError(
                    f'level {level} has {channels} channels, cannot split'
                )
            emitted = channels // 2
        plan.append(LevelShape(grid=grid, channels=channels, emitted=emitted))
        if emitted is not None:
            channels -= emitted
    return plan


class StreamConfig(StrictModel):
    manifold: ManifoldKind
    channels: int = Field(default=1, ge=1)
    levels: int = Field(default=1, ge=1)
    blocks_per_level: int = Field(default=2, ge=1)
    hidden_width: int = Field(default=64, ge=1)
    hidden_layers: int = Field(default=2, ge=1)
    activation: Literal['tanh', 'relu', 'identity'] = 'tanh'
    actnorm_per_location: bool = False
    actnorm_init_std: float = Field(default=1.0, gt=0.0)
    coupling_scale_bound: float = Field(default=2.0, gt=0.0)
    nanoflow_tau: Optional[int] = Field(default=None, ge=1)
    nanoflow_share: bool = True
    learn_prior: bool = False

    def check_grid(self, grid: Tuple[int, ...]) -> List[LevelShape]:
        plan = plan_levels(grid, self.channels, self.levels)
        if self.nanoflow_tau is not None:
            for level, shape in enumerate(plan):
                if shape.grid[0] % (2 * self.nanoflow_tau) != 0:
                    raise DivisibilityError(
                        f'level {level}: leading extent {shape.grid[0]} is not '
                        f'divisible by 2*tau = {2 * self.nanoflow_tau}'
                    )
        return plan


class TransferConfig(StrictModel):
    width: int = Field(default=128, ge=1)
    residual_blocks: int = Field(default=3, ge=0)


class OptimConfig(StrictModel):
    lr: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    clip_norm: Optional[float] = Field(default=100.0, gt=0.0)


class TrainConfig(StrictModel):
    steps: int = Field(default=200, ge=0)
    batch_size: int = Field(default=8, ge=1)
    init_batch_size: int = Field(default=32, ge=2)
    checkpoint_every: int = Field(default=50, ge=1)
    source_weight: float = Field(default=1.0, ge=0.0)
    target_weight: float = Field(default=1.0, ge=0.0)
    source_gradient: bool = True
    max_skipped_steps: int = Field(default=20, ge=0)


class DataConfig(StrictModel):
    generator: Literal['paired', 'texture'] = 'paired'
    seed: int = 0
    grid_shape: Tuple[int, ...] = (4, 4, 4)
    count: int = Field(default=80, ge=2)
    n_dirs: int = Field(default=12, ge=4)
    noise: float = Field(default=0.0, ge=0.0)
    smoothness: float = Field(default=0.5, ge=0.0, le=1.0)
    group_effect: float = Field(default=0.0, ge=0.0)
    split_fraction: float = Field(default=0.8, gt=0.0, lt=1.0)
    directory: Optional[str] = None

    @field_validator('n_dirs')
    @classmethod
    def check_even_dirs(cls, v: int) -> int:
        if v % 2 != 0:
            raise ValueError('n_dirs must be even (antipodally symmetric set)')
        return v


class EvalThresholds(StrictModel):
    min_dominance: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    max_baseline_ratio: Optional[float] = Field(default=None, gt=0.0)
    max_reconstruction_error: Optional[float] = Field(default=None, gt=0.0)


class EvalConfig(StrictModel):
    n_perm: int = Field(default=1000, ge=100)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    temperatures: List[float] = Field(default_factory=lambda: [0.0])
    fdr: bool = False
    confusion_k: int = Field(default=10, ge=2)
    confusion_repeats: int = Field(default=10, ge=1)
    # generation runs at the first temperature averaged into the confusion matrix
    generation_repeats: int = Field(default=1, ge=1)
    histogram_bins: int = Field(default=20, ge=1)
    thresholds: EvalThresholds = Field(default_factory=EvalThresholds)

    @field_validator('temperatures')
    @classmethod
    def check_temperatures(cls, v: List[float]) -> List[float]:
        if not v or any(t < 0 for t in v):
            raise ValueError('temperatures must be a nonempty list of values >= 0')
        return v


class CheckConfig(StrictModel):
    cases: int = Field(default=20, ge=1)
    fd_step: float = Field(default=1e-5, ge=1e-9, le=1e-2)
    inject_fault: Optional[Literal['scale_clamp']] = None


class RunConfig(StrictModel):
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)
    out_dir: str = 'runs/default'
    source: StreamConfig
    target: StreamConfig
    transfer: TransferConfig = Field(default_factory=TransferConfig)
    optim: OptimConfig = Field(default_factory=OptimConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    check: CheckConfig = Field(default_factory=CheckConfig)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)

    def __init__(self, yaml_config_path: Optional[str] = None, **kwargs: Any) -> None:
        if yaml_config_path:
            yaml_data = self._load_yaml_file(yaml_config_path)
            yaml_data.update(kwargs)
            kwargs = yaml_data
        super().__init__(**kwargs)

    @model_validator(mode='after')
    def check_streams(self) -> 'RunConfig':
        grid = tuple(self.data.grid_shape)
        for name, stream in (('source', self.source), ('target', self.target)):
            try:
                stream.check_grid(grid)
            except DivisibilityError as e:
                raise ValueError(f'{name}: {e.message}') from e
        source, target = self.source.manifold, self.target.manifold
        if self.data.generator == 'paired':
            if source.kind != 'spd' or source.n != 3:
                raise ValueError('paired generator produces spd n=3 sources')
            if target.kind != 'sphere' or target.n != self.data.n_dirs:
                raise ValueError(
                    f'paired generator produces sphere n={self.data.n_dirs} targets'
                )
            if self.source.channels != 1 or self.target.channels != 1:
                raise ValueError('paired generator produces single-channel fields')
        else:
            if source.kind != 'spd' or source.n != 3 or self.source.channels != 1:
                raise ValueError('texture generator produces spd n=3 sources')
            if target.kind != 'positive_reals' or self.target.channels != 3:
                raise ValueError('texture generator produces 3-channel positive_reals')
            if min(grid) < 8 or len(grid) != 2:
                raise ValueError('texture generator needs a 2D grid of at least 8x8')
        return self

    @property
    def data_dir(self) -> str:
        return self.data.directory or os.path.join(self.out_dir, 'data')

    @staticmethod
    def _load_yaml_file(file_path: str) -> Dict[str, Any]:
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"YAML file '{file_path}' does not exist.")
        with open(file_path, 'r') as f:
            data = yaml.safe_load(f)
        return dict(data or {})

    def save(self, directory: str, file_name: str = 'resolved_config.yaml') -> str:
        os.makedirs(directory, exist_ok=True)
        file_path = os.path.join(directory, file_name)
        with open(file_path, 'w') as f:
            yaml.dump(self.model_dump(mode='json'), f, sort_keys=False)
        return file_path


def apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """
    Sets dotted keys (``eval.temperatures``) on a nested mapping; ``None`` values
    are skipped so unset command-line flags keep the file's value.
    """
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = data
        keys = dotted.split('.')
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return data


def load_config(
    yaml_config_path: str, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    try:
        data = apply_overrides(
            RunConfig._load_yaml_file(yaml_config_path), overrides or {}
        )
        return RunConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        key = '.'.join(str(part) for part in first['loc']) or '<root>'
        raise ConfigValidationError(first['msg'], key=key) from e
    except yaml.YAMLError as e:
        raise ConfigValidationError(f'malformed YAML: {e}') from e
