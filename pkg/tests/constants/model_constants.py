from pathlib import Path

import pytest

from manifold_glow.configs import RunConfig
from manifold_glow.data import PairedDataset, synth_paired, write_dataset

from .config_constants import example_config_data


@pytest.fixture
def example_dataset() -> PairedDataset:
    """Sixteen paired Spd(3) -> Sphere(6) fields on a 4x4 grid."""
    return synth_paired(0, (4, 4), 16, n_dirs=6, noise=0.02)


@pytest.fixture
def example_run_config(tmp_path: Path) -> RunConfig:
    """The example run config writing into a temporary directory."""
    data = dict(example_config_data, out_dir=str(tmp_path / 'run'))
    return RunConfig(**data)


@pytest.fixture
def example_run(
    example_run_config: RunConfig, example_dataset: PairedDataset
) -> RunConfig:
    """Run config whose dataset is already on disk."""
    write_dataset(example_dataset, example_run_config.data_dir)
    return example_run_config
