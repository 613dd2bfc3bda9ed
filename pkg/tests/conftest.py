from .constants.model_constants import (
    example_dataset,
    example_run,
    example_run_config,
)

__all__ = [
    'example_dataset',
    'example_run_config',
    'example_run',
]
