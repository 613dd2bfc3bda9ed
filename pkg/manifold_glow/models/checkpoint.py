"""
Checkpoint file, little-endian:

    offset  size  content
    0       4     magic b'MGCK'
    4       2     format version (u16)
    6       4     header length h (u32)
    10      h     JSON header (CheckpointHeader)
    10+h    ...   float64 payload: every state tensor in header order, then the
                  Adam first and second moments of every trainable parameter
    end-32  32    sha256 of everything before it
"""

import hashlib
import os
import struct

import numpy as np
import torch
from beartype.typing import Any, Dict, List, Literal, Optional, Tuple, Union
from pydantic import BaseModel, ConfigDict

from ..configs import GeometryConfig, LevelShape, RunConfig, StreamConfig
from ..nn import AdamOptimizer, trainable_parameters
from ..utils.error_handler import (
    CheckpointError,
    CheckpointFormatError,
    CheckpointShapeError,
    CheckpointVersionError,
    ChecksumError,
)
from ..utils.logger import logger
from .conditional import ConditionalFlow
from .flow_model import FlowModel

MAGIC = b'MGCK'
CHECKPOINT_VERSION = 1
DIGEST_SIZE = 32

_PREFIX = struct.Struct('<4sHI')

AnyModel = Union[FlowModel, ConditionalFlow]


class TensorEntry(BaseModel):
    name: str
    shape: List[int]
    dtype: Literal['float64', 'bool']


class CheckpointHeader(BaseModel):
    version: int = CHECKPOINT_VERSION
    model_type: Literal['flow', 'conditional']
    config: Dict[str, Any]
    grid_shape: List[int]
    schedule: Dict[str, List[LevelShape]]
    tensors: List[TensorEntry]
    moment_names: List[str] = []
    step: int = 0
    optimizer_step: int = 0


class Checkpoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: Any
    header: CheckpointHeader
    moments: List[Tuple[torch.Tensor, torch.Tensor]] = []

    @property
    def step(self) -> int:
        return self.header.step

    def restore_optimizer(self, optimizer: AdamOptimizer) -> None:
        if self.moments:
            optimizer.load_moments(self.moments, self.header.optimizer_step)


def _describe(
    model: AnyModel,
) -> Tuple[str, Dict[str, Any], List[int], Dict[str, List[LevelShape]]]:
    if isinstance(model, ConditionalFlow):
        config = model.config.model_dump(mode='json')
        grid = list(model.config.data.grid_shape)
        schedule = {'source': model.source.plan, 'target': model.target.plan}
        return 'conditional', config, grid, schedule
    config = {
        'stream': model.config.model_dump(mode='json'),
        'geometry': model.tolerances.model_dump(mode='json'),
    }
    return 'flow', config, list(model.grid_shape), {'flow': model.plan}


def _build(header: CheckpointHeader) -> AnyModel:
    if header.model_type == 'conditional':
        return ConditionalFlow(RunConfig(**header.config))
    return FlowModel(
        StreamConfig(**header.config['stream']),
        tuple(header.grid_shape),
        GeometryConfig(**header.config['geometry']),
    )


def encode_checkpoint(
    model: AnyModel, optimizer: Optional[AdamOptimizer] = None, step: int = 0
) -> bytes:
    model_type, config, grid, schedule = _describe(model)
    state = model.state_dict()
    tensors = [
        TensorEntry(
            name=name,
            shape=list(t.shape),
            dtype='bool' if t.dtype == torch.bool else 'float64',
        )
        for name, t in state.items()
    ]
    moment_names: List[str] = []
    chunks = [
        t.detach().to(torch.float64).numpy().astype('<f8').tobytes()
        for t in state.values()
    ]
    if optimizer is not None:
        moment_names = [name for name, _ in trainable_parameters(model)]
        if len(moment_names) != len(optimizer.params):
            raise CheckpointError('optimizer does not cover the trainable parameters')
        for first, second in optimizer.moments():
            chunks.append(first.numpy().astype('<f8').tobytes())
            chunks.append(second.numpy().astype('<f8').tobytes())
    header = CheckpointHeader(
        model_type=model_type,
        config=config,
        grid_shape=grid,
        schedule=schedule,
        tensors=tensors,
        moment_names=moment_names,
        step=step,
        optimizer_step=0 if optimizer is None else optimizer.step_count,
    )
    header_bytes = header.model_dump_json().encode('utf-8')
    blob = _PREFIX.pack(MAGIC, CHECKPOINT_VERSION, len(header_bytes)) + header_bytes
    blob += b''.join(chunks)
    return blob + hashlib.sha256(blob).digest()


def save_checkpoint(
    model: AnyModel,
    path: str,
    optimizer: Optional[AdamOptimizer] = None,
    step: int = 0,
) -> str:
    """Writes atomically: a crash mid-write leaves the previous file intact."""
    blob = encode_checkpoint(model, optimizer, step)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    partial = path + '.partial'
    with open(partial, 'wb') as f:
        f.write(blob)
    os.replace(partial, path)
    logger.info(f'checkpoint written to {path}', extra={'msg_type': 'DETAIL'})
    return path


def _read_header(blob: bytes) -> Tuple[CheckpointHeader, int]:
    if len(blob) < _PREFIX.size + DIGEST_SIZE:
        raise CheckpointError(f'checkpoint truncated at {len(blob)} bytes')
    body, digest = blob[:-DIGEST_SIZE], blob[-DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumError('checkpoint content checksum does not match')
    magic, version, header_size = _PREFIX.unpack_from(body, 0)
    if magic != MAGIC:
        raise CheckpointError(f'bad magic {magic!r}, expected {MAGIC!r}')
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f'checkpoint version {version}, reader supports {CHECKPOINT_VERSION}'
        )
    start = _PREFIX.size
    header = CheckpointHeader.model_validate_json(body[start : start + header_size])
    return header, start + header_size


def _stream_manifolds(model_type: str, config: Dict[str, Any]) -> Dict[str, Any]:
    if model_type == 'conditional':
        return {
            'source': config['source']['manifold'],
            'target': config['target']['manifold'],
        }
    return {'flow': config['stream']['manifold']}


def _check_manifolds(header: CheckpointHeader, model: AnyModel) -> None:
    """Model type and every stream manifold (kind, n, chart, pole) must match."""
    model_type, config, _, _ = _describe(model)
    if header.model_type != model_type:
        raise CheckpointFormatError(
            f'checkpoint holds a {header.model_type} model, not a {model_type} one'
        )
    stored = _stream_manifolds(header.model_type, header.config)
    expected = _stream_manifolds(model_type, config)
    for stream, kind in stored.items():
        if kind != expected[stream]:
            raise CheckpointFormatError(
                f'{stream} stream was saved on {kind}, '
                f'the model uses {expected[stream]}'
            )


def decode_checkpoint(blob: bytes, model: Optional[AnyModel] = None) -> Checkpoint:
    """
    Restores a checkpoint into ``model`` (checked for matching manifolds and
    tensor shapes) or into a model rebuilt from the stored configuration.
    """
    header, offset = _read_header(blob)
    if model is None:
        model = _build(header)
    else:
        _check_manifolds(header, model)
    state = model.state_dict()
    stored = {entry.name: entry for entry in header.tensors}
    if set(stored) != set(state):
        missing = sorted(set(stored) ^ set(state))[:3]
        raise CheckpointShapeError(f'tensor names differ from the model: {missing}')
    payload = blob[:-DIGEST_SIZE]
    restored: Dict[str, torch.Tensor] = {}
    for entry in header.tensors:
        if list(state[entry.name].shape) != entry.shape:
            raise CheckpointShapeError(
                f'{entry.name}: stored shape {entry.shape}, model expects '
                f'{list(state[entry.name].shape)}'
            )
        values, offset = _take(payload, offset, entry.shape)
        restored[entry.name] = values.bool() if entry.dtype == 'bool' else values
    model.load_state_dict(restored)

    moments: List[Tuple[torch.Tensor, torch.Tensor]] = []
    if header.moment_names:
        params = dict(trainable_parameters(model))
        if header.moment_names != list(params):
            raise CheckpointShapeError('optimizer state does not match the parameters')
        for name in header.moment_names:
            shape = list(params[name].shape)
            first, offset = _take(payload, offset, shape)
            second, offset = _take(payload, offset, shape)
            moments.append((first, second))
    if offset != len(payload):
        raise CheckpointError(f'{len(payload) - offset} trailing payload bytes')
    return Checkpoint(model=model, header=header, moments=moments)


def _take(payload: bytes, offset: int, shape: List[int]) -> Tuple[torch.Tensor, int]:
    count = int(np.prod(shape)) if shape else 1
    end = offset + 8 * count
    if end > len(payload):
        raise CheckpointError(f'payload truncated at byte {len(payload)}')
    values = np.frombuffer(payload, dtype='<f8', count=count, offset=offset)
    return torch.from_numpy(values.astype(np.float64).reshape(shape)), end


def load_checkpoint(path: str, model: Optional[AnyModel] = None) -> Checkpoint:
    if not os.path.exists(path):
        raise FileNotFoundError(f"checkpoint '{path}' does not exist.")
    with open(path, 'rb') as f:
        blob = f.read()
    return decode_checkpoint(blob, model)
