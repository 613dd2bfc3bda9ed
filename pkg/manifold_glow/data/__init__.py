from .data import Field, GroupLabel, PairedDataset, stack_fields, unstack_fields
from .dataset import (
    read_dataset,
    read_manifest,
    split_dataset,
    split_indices,
    write_dataset,
)
from .field_file import decode_field, encode_field, read_field, write_field
from .synth import (
    fibonacci_directions,
    odf_target,
    planted_region,
    synth_paired,
    synth_spd_field,
    synth_texture_pair,
    window_covariance,
)

__all__ = [
    'Field',
    'GroupLabel',
    'PairedDataset',
    'stack_fields',
    'unstack_fields',
    'read_field',
    'write_field',
    'encode_field',
    'decode_field',
    'read_dataset',
    'write_dataset',
    'read_manifest',
    'split_dataset',
    'split_indices',
    'synth_spd_field',
    'synth_paired',
    'synth_texture_pair',
    'fibonacci_directions',
    'odf_target',
    'planted_region',
    'window_covariance',
]
