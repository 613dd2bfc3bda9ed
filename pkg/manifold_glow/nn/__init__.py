from .network import MLP, GradientTape, net_backward, net_forward
from .optim import (
    AdamOptimizer,
    LossModel,
    adam_step,
    end_to_end_gradient,
    trainable_parameters,
)

__all__ = [
    'MLP',
    'GradientTape',
    'net_forward',
    'net_backward',
    'AdamOptimizer',
    'LossModel',
    'adam_step',
    'end_to_end_gradient',
    'trainable_parameters',
]
