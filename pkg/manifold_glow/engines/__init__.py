from .trainer import (
    CHECKPOINT_FILE,
    METRICS_FILE,
    TIMING_FILE,
    Trainer,
    TrainSummary,
    batch_indices,
    read_losses,
    train_conditional,
    truncate_log,
)

__all__ = [
    'Trainer',
    'TrainSummary',
    'train_conditional',
    'batch_indices',
    'truncate_log',
    'read_losses',
    'CHECKPOINT_FILE',
    'METRICS_FILE',
    'TIMING_FILE',
]
