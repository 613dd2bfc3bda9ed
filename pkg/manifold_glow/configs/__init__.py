from .config import (
    CheckConfig,
    DataConfig,
    EvalConfig,
    EvalThresholds,
    GeometryConfig,
    LevelShape,
    ManifoldKind,
    OptimConfig,
    RunConfig,
    StreamConfig,
    TrainConfig,
    TransferConfig,
    apply_overrides,
    load_config,
    plan_levels,
    squeezed_grid,
)

__all__ = [
    'RunConfig',
    'StreamConfig',
    'TransferConfig',
    'OptimConfig',
    'TrainConfig',
    'DataConfig',
    'EvalConfig',
    'EvalThresholds',
    'CheckConfig',
    'GeometryConfig',
    'ManifoldKind',
    'LevelShape',
    'apply_overrides',
    'load_config',
    'plan_levels',
    'squeezed_grid',
]
