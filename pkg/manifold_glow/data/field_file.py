"""
Binary field file, little-endian throughout:

    offset  size  content
    0       4     magic b'MFLD'
    4       2     format version (u16)
    6       1     manifold tag (u8): 1 sphere, 2 positive_reals, 3 spd
    7       2     manifold n (u16)
    9       1     chart tag (u8): 1 pole_log, 2 scalar_log, 3 cholesky, 4 matrix_log
    10      1     spatial rank r (u8), 1..3
    11      4r    extents (u32 each)
    11+4r   4     channels (u32)
    15+4r   ...   float64 ambient values, row-major (spatial..., channel, ambient...)
"""

import os
import struct

import numpy as np
from beartype.typing import Dict, Tuple

from ..configs import ManifoldKind
from ..utils.error_handler import FieldFormatError, InvalidPointError
from .data import Field

MAGIC = b'MFLD'
FORMAT_VERSION = 1

KIND_TAGS: Dict[str, int] = {'sphere': 1, 'positive_reals': 2, 'spd': 3}
CHART_TAGS: Dict[str, int] = {
    'pole_log': 1,
    'scalar_log': 2,
    'cholesky': 3,
    'matrix_log': 4,
}
_KIND_NAMES = {tag: name for name, tag in KIND_TAGS.items()}
_CHART_NAMES = {tag: name for name, tag in CHART_TAGS.items()}

_PREFIX = struct.Struct('<4sHBHBB')


def encode_field(field: Field) -> bytes:
    grid = field.grid_shape
    header = _PREFIX.pack(
        MAGIC,
        FORMAT_VERSION,
        KIND_TAGS[field.kind.kind],
        field.kind.n,
        CHART_TAGS[field.kind.chart],
        len(grid),
    )
    header += struct.pack(f'<{len(grid)}I', *grid)
    header += struct.pack('<I', field.channels)
    return header + field.points.astype('<f8').tobytes(order='C')


def _decode_header(blob: bytes) -> Tuple[ManifoldKind, Tuple[int, ...], int, int]:
    if len(blob) < _PREFIX.size:
        raise FieldFormatError(
            f'header truncated, need {_PREFIX.size} bytes, got {len(blob)}', len(blob)
        )
    magic, version, kind_tag, n, chart_tag, rank = _PREFIX.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FieldFormatError(f'bad magic {magic!r}, expected {MAGIC!r}', 0)
    if version != FORMAT_VERSION:
        raise FieldFormatError(
            f'unsupported format version {version} (reader is {FORMAT_VERSION})', 4
        )
    if kind_tag not in _KIND_NAMES:
        raise FieldFormatError(f'unknown manifold tag {kind_tag}', 6)
    if chart_tag not in _CHART_NAMES:
        raise FieldFormatError(f'unknown chart tag {chart_tag}', 9)
    if not 1 <= rank <= 3:
        raise FieldFormatError(f'spatial rank {rank} outside 1..3', 10)
    offset = _PREFIX.size
    if len(blob) < offset + 4 * rank + 4:
        raise FieldFormatError('header truncated inside extents', len(blob))
    extents = struct.unpack_from(f'<{rank}I', blob, offset)
    for axis, extent in enumerate(extents):
        if extent == 0:
            raise FieldFormatError(f'extent of axis {axis} is zero', offset + 4 * axis)
    offset += 4 * rank
    (channels,) = struct.unpack_from('<I', blob, offset)
    if channels == 0:
        raise FieldFormatError('channel count is zero', offset)
    offset += 4
    try:
        kind = ManifoldKind(
            kind=_KIND_NAMES[kind_tag], n=n, chart=_CHART_NAMES[chart_tag]
        )
    except ValueError as e:
        raise FieldFormatError(f'inconsistent manifold description: {e}', 6) from e
    return kind, tuple(extents), channels, offset


def decode_field(blob: bytes, check: bool = True) -> Field:
    kind, grid, channels, offset = _decode_header(blob)
    shape = grid + (channels,) + kind.ambient_shape
    expected = int(np.prod(shape)) * 8
    actual = len(blob) - offset
    if actual != expected:
        raise FieldFormatError(
            f'payload is {actual} bytes, header implies {expected}', offset
        )
    points = np.frombuffer(blob, dtype='<f8', offset=offset).reshape(shape)
    field = Field(kind=kind, points=points.astype(np.float64))
    if check:
        try:
            field.validate_points()
        except InvalidPointError as e:
            raise InvalidPointError(f'payload at byte {offset}: {e.message}') from e
    return field


def write_field(path: str, field: Field) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(encode_field(field))


def read_field(path: str, check: bool = True) -> Field:
    with open(path, 'rb') as f:
        return decode_field(f.read(), check=check)
