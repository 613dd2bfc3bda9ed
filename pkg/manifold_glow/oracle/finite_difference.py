"""
Brute-force derivative oracles. They only evaluate the maps they are given, in
numpy float64, and never touch autograd, so they can check the analytic
log-determinants and gradients independently.
"""

import math

import numpy as np
import torch
from beartype.typing import Callable, Literal, Optional, Tuple
from pydantic import Field

from ..configs.config import StrictModel
from ..utils.error_handler import NonFiniteEvaluationError, SingularJacobianError

ArrayMap = Callable[[np.ndarray], np.ndarray]

SINGULAR_DET = 1e-300


class NumericJacobianConfig(StrictModel):
    step: float = Field(default=1e-5, ge=1e-9, le=1e-2)
    scheme: Literal['central'] = 'central'
    domain: Literal['chart'] = 'chart'


def _evaluate(fn: ArrayMap, at: np.ndarray) -> np.ndarray:
    out = np.asarray(fn(at), dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise NonFiniteEvaluationError('map returned non-finite values near the point')
    return out


def fd_jacobian(
    fn: ArrayMap, at: np.ndarray, config: Optional[NumericJacobianConfig] = None
) -> np.ndarray:
    """Central-difference Jacobian of a flat vector map, shape (out, in)."""
    step = (config or NumericJacobianConfig()).step
    at = np.asarray(at, dtype=np.float64).ravel()
    columns = []
    for i in range(at.size):
        delta = np.zeros_like(at)
        delta[i] = step
        plus = _evaluate(fn, at + delta).ravel()
        minus = _evaluate(fn, at - delta).ravel()
        columns.append((plus - minus) / (2.0 * step))
    return np.stack(columns, axis=1)


def fd_logdet(
    fn: ArrayMap, at: np.ndarray, config: Optional[NumericJacobianConfig] = None
) -> float:
    """log|det J| of ``fn`` at ``at`` via an LU-pivoted factorization."""
    jacobian = fd_jacobian(fn, at, config)
    if jacobian.shape[0] != jacobian.shape[1]:
        raise ValueError(f'Jacobian is not square: {jacobian.shape}')
    sign, logabs = np.linalg.slogdet(jacobian)
    if sign == 0 or logabs < math.log(SINGULAR_DET):
        raise SingularJacobianError(f'|det J| below {SINGULAR_DET:.0e}')
    return float(logabs)


def fd_gradient(
    loss: Callable[[np.ndarray], float],
    params: np.ndarray,
    config: Optional[NumericJacobianConfig] = None,
) -> np.ndarray:
    """Central-difference gradient of a scalar function, shaped like ``params``."""
    step = (config or NumericJacobianConfig()).step
    flat = np.asarray(params, dtype=np.float64).ravel()
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        delta = np.zeros_like(flat)
        delta[i] = step
        plus = float(loss((flat + delta).reshape(np.shape(params))))
        minus = float(loss((flat - delta).reshape(np.shape(params))))
        if not (math.isfinite(plus) and math.isfinite(minus)):
            raise NonFiniteEvaluationError(f'loss is non-finite around coordinate {i}')
        grad[i] = (plus - minus) / (2.0 * step)
    return grad.reshape(np.shape(params))


def tensor_map(
    fn: Callable[[torch.Tensor], torch.Tensor], shape: Tuple[int, ...]
) -> ArrayMap:
    """Wraps a tensor map on ``shape``-shaped inputs as a flat numpy map."""

    def mapped(flat: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            out = fn(torch.from_numpy(flat.reshape(shape).copy()))
        return out.detach().numpy().ravel()

    return mapped
