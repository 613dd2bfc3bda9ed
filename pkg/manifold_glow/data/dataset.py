import os

import numpy as np
import yaml
from beartype import beartype
from beartype.typing import List, Tuple, cast

from ..utils.error_handler import EmptySplitError, FieldFormatError
from .data import GroupLabel, PairedDataset
from .field_file import read_field, write_field

MANIFEST_NAME = 'manifest.tsv'
METADATA_NAME = 'dataset.yaml'


@beartype
def split_indices(
    count: int, train_fraction: float, seed: int
) -> Tuple[List[int], List[int]]:
    """
    Seeded disjoint train/test index split with round(count * fraction) train items.
    """
    n_train = int(round(count * train_fraction))
    if count < 2 or n_train == 0 or n_train == count:
        raise EmptySplitError(
            f'{count} items at fraction {train_fraction} leave an empty split'
        )
    order = np.random.default_rng(seed).permutation(count)
    return sorted(int(i) for i in order[:n_train]), sorted(
        int(i) for i in order[n_train:]
    )


def split_dataset(
    dataset: PairedDataset, train_fraction: float = 0.8, seed: int = 0
) -> Tuple[PairedDataset, PairedDataset]:
    train, test = split_indices(len(dataset), train_fraction, seed)
    return dataset.subset(train), dataset.subset(test)


def write_dataset(dataset: PairedDataset, directory: str) -> str:
    """
    Writes every field as a field file plus a tab-separated manifest of
    ``source<TAB>target<TAB>group`` lines (paths relative to ``directory``).
    :return: the manifest path.
    """
    os.makedirs(directory, exist_ok=True)
    lines = []
    for name, source, target, group in zip(
        dataset.names, dataset.sources, dataset.targets, dataset.groups
    ):
        source_name = f'source_{name}.mfld'
        target_name = f'target_{name}.mfld'
        write_field(os.path.join(directory, source_name), source)
        write_field(os.path.join(directory, target_name), target)
        lines.append(f'{source_name}\t{target_name}\t{group}\n')
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    with open(manifest_path, 'w') as f:
        f.writelines(lines)
    with open(os.path.join(directory, METADATA_NAME), 'w') as f:
        yaml.dump(
            {
                'seed': dataset.seed,
                'generator': dataset.generator,
                'noise': dataset.noise,
                'count': len(dataset),
            },
            f,
            sort_keys=False,
        )
    return manifest_path


def read_manifest(manifest_path: str) -> List[Tuple[str, str, GroupLabel]]:
    entries: List[Tuple[str, str, GroupLabel]] = []
    with open(manifest_path, 'r') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.rstrip('\n').split('\t')
            if len(parts) != 3 or parts[2] not in ('A', 'B'):
                raise FieldFormatError(
                    f'{manifest_path}:{lineno}: expected source, target, group', 0
                )
            entries.append((parts[0], parts[1], cast(GroupLabel, parts[2])))
    return entries


def read_dataset(directory: str) -> PairedDataset:
    entries = read_manifest(os.path.join(directory, MANIFEST_NAME))
    metadata = {}
    metadata_path = os.path.join(directory, METADATA_NAME)
    if os.path.exists(metadata_path):
        with open(metadata_path, 'r') as f:
            metadata = yaml.safe_load(f) or {}
    return PairedDataset(
        sources=[read_field(os.path.join(directory, s)) for s, _, _ in entries],
        targets=[read_field(os.path.join(directory, t)) for _, t, _ in entries],
        groups=[g for _, _, g in entries],
        names=[s[len('source_') : -len('.mfld')] for s, _, _ in entries],
        seed=int(metadata.get('seed', 0)),
        generator=str(metadata.get('generator', 'paired')),
        noise=float(metadata.get('noise', 0.0)),
    )
