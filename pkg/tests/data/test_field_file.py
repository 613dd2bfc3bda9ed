import struct
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from manifold_glow.configs import ManifoldKind
from manifold_glow.data import Field, decode_field, encode_field, read_field, write_field
from manifold_glow.utils.error_handler import FieldFormatError, InvalidPointError
from tests.constants.config_constants import SPD2_CHOLESKY
from tests.constants.data_constants import positive_pair, sphere_mixed


def test_header_layout() -> None:
    blob = encode_field(sphere_mixed)
    magic, version, kind_tag, n, chart_tag, rank = struct.unpack_from('<4sHBHBB', blob)
    assert (magic, version, kind_tag, n, chart_tag, rank) == (b'MFLD', 1, 1, 3, 1, 1)
    assert struct.unpack_from('<II', blob, 11) == (2, 1)
    assert len(blob) == 19 + 2 * 1 * 3 * 8


def test_file_round_trip(tmp_path: Path) -> None:
    field = Field(kind=SPD2_CHOLESKY, points=np.tile(np.eye(2), (2, 3, 1, 1, 1)))
    path = str(tmp_path / 'nested' / 'spd.mfld')
    write_field(path, field)
    restored = read_field(path)
    assert restored.kind == SPD2_CHOLESKY
    assert restored.grid_shape == (2, 3)
    assert np.array_equal(restored.points, field.points)


def test_bad_magic_reports_offset() -> None:
    blob = b'XXXX' + encode_field(positive_pair)[4:]
    with pytest.raises(FieldFormatError) as info:
        decode_field(blob)
    assert info.value.offset == 0


def test_unknown_tags() -> None:
    blob = bytearray(encode_field(positive_pair))
    blob[6] = 9
    with pytest.raises(FieldFormatError) as info:
        decode_field(bytes(blob))
    assert info.value.offset == 6


def test_truncated_payload() -> None:
    blob = encode_field(positive_pair)
    with pytest.raises(FieldFormatError):
        decode_field(blob[:-3])
    with pytest.raises(FieldFormatError):
        decode_field(blob[:5])


def test_zero_extent_rejected() -> None:
    blob = bytearray(encode_field(positive_pair))
    struct.pack_into('<I', blob, 11, 0)
    with pytest.raises(FieldFormatError) as info:
        decode_field(bytes(blob))
    assert info.value.offset == 11


def test_invalid_points_are_checked_unless_disabled() -> None:
    bad = Field(
        kind=ManifoldKind(kind='positive_reals'), points=np.array([[1.0, -2.0]])
    )
    blob = encode_field(bad)
    with pytest.raises(InvalidPointError):
        decode_field(blob)
    assert decode_field(blob, check=False).points[0, 1] == -2.0


def test_field_rank_bounds() -> None:
    with pytest.raises(ValidationError):
        Field(kind=ManifoldKind(kind='positive_reals'), points=np.ones((2, 2, 2, 2, 1)))
    with pytest.raises(ValidationError):
        Field(kind=ManifoldKind(kind='spd', n=2), points=np.ones((2, 1, 3, 3)))
