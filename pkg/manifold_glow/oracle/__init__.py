from .finite_difference import (
    NumericJacobianConfig,
    fd_gradient,
    fd_jacobian,
    fd_logdet,
    tensor_map,
)

__all__ = [
    'NumericJacobianConfig',
    'fd_jacobian',
    'fd_logdet',
    'fd_gradient',
    'tensor_map',
]
