from .checkpoint import (
    Checkpoint,
    CheckpointHeader,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .conditional import ConditionalFlow, PairBatch
from .flow_model import FlowModel, Latents
from .nanoflow import coupling_parameter_count, nanoflow_share
from .transfer import LatentTransfer

__all__ = [
    'FlowModel',
    'Latents',
    'LatentTransfer',
    'ConditionalFlow',
    'PairBatch',
    'nanoflow_share',
    'coupling_parameter_count',
    'Checkpoint',
    'CheckpointHeader',
    'save_checkpoint',
    'load_checkpoint',
    'encode_checkpoint',
    'decode_checkpoint',
]
