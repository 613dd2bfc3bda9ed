from .gaussian import (
    ManifoldGaussian,
    diagonal_logpdf,
    gaussian_logpdf,
    gaussian_sample,
)
from .handler import ManifoldHandler, get_manifold
from .manifold_base import Manifold
from .operations import (
    chart_forward,
    chart_inverse,
    chart_mean,
    chart_transition_logdet,
    distance,
    group_apply,
    group_inverse,
)
from .positive_reals import PositiveReals
from .registry import MANIFOLD_REGISTRY
from .spd import Spd
from .sphere import Sphere

__all__ = [
    'Manifold',
    'Sphere',
    'PositiveReals',
    'Spd',
    'MANIFOLD_REGISTRY',
    'ManifoldHandler',
    'get_manifold',
    'ManifoldGaussian',
    'gaussian_logpdf',
    'gaussian_sample',
    'diagonal_logpdf',
    'distance',
    'chart_forward',
    'chart_inverse',
    'chart_mean',
    'chart_transition_logdet',
    'group_apply',
    'group_inverse',
]
