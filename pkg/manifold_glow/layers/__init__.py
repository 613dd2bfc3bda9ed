from .actnorm import Actnorm
from .conv1x1 import Conv1x1
from .coupling import AffineCoupling
from .layer_base import FlowLayer, LayerOutput
from .squeeze import (
    merge_field,
    merge_latent,
    split_field,
    split_latent,
    squeeze,
    squeeze_field,
    unsqueeze,
    unsqueeze_field,
)

__all__ = [
    'FlowLayer',
    'LayerOutput',
    'Actnorm',
    'Conv1x1',
    'AffineCoupling',
    'squeeze',
    'unsqueeze',
    'split_latent',
    'merge_latent',
    'squeeze_field',
    'unsqueeze_field',
    'split_field',
    'merge_field',
]
