import os
from pathlib import Path

import numpy as np
import pytest

from manifold_glow.data import (
    PairedDataset,
    read_dataset,
    read_manifest,
    split_dataset,
    split_indices,
    write_dataset,
)
from manifold_glow.utils.error_handler import EmptySplitError, FieldFormatError


def test_split_sizes() -> None:
    train, test = split_indices(1065, 0.8, seed=0)
    assert (len(train), len(test)) == (852, 213)
    assert not set(train) & set(test)
    assert sorted(train + test) == list(range(1065))
    assert split_indices(1065, 0.8, seed=0) == (train, test)


def test_degenerate_split_rejected() -> None:
    with pytest.raises(EmptySplitError):
        split_indices(4, 0.99, seed=0)
    with pytest.raises(EmptySplitError):
        split_indices(1, 0.5, seed=0)


def test_split_dataset_keeps_names(example_dataset: PairedDataset) -> None:
    train, test = split_dataset(example_dataset, 0.5, seed=1)
    assert len(train) == len(test) == 8
    assert set(train.names) | set(test.names) == set(example_dataset.names)
    index = example_dataset.names.index(test.names[0])
    assert np.array_equal(test.targets[0].points, example_dataset.targets[index].points)


def test_directory_round_trip(example_dataset: PairedDataset, tmp_path: Path) -> None:
    manifest = write_dataset(example_dataset, str(tmp_path))
    entries = read_manifest(manifest)
    assert entries[1] == ('source_0001.mfld', 'target_0001.mfld', 'B')
    restored = read_dataset(str(tmp_path))
    assert restored.names == example_dataset.names
    assert restored.groups == example_dataset.groups
    assert restored.noise == pytest.approx(0.02)
    for a, b in zip(restored.sources, example_dataset.sources):
        assert np.array_equal(a.points, b.points)


def test_malformed_manifest(tmp_path: Path) -> None:
    path = os.path.join(tmp_path, 'manifest.tsv')
    with open(path, 'w') as f:
        f.write('source_0000.mfld\ttarget_0000.mfld\tC\n')
    with pytest.raises(FieldFormatError):
        read_manifest(path)


def test_mismatched_pairs_rejected(example_dataset: PairedDataset) -> None:
    with pytest.raises(ValueError):
        PairedDataset(
            sources=example_dataset.sources[:2],
            targets=example_dataset.targets[:1],
            groups=['A', 'B'],
        )
