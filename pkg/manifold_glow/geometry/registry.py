from beartype.typing import Dict, Type

from .manifold_base import Manifold
from .positive_reals import PositiveReals
from .sphere import Sphere
from .spd import Spd

MANIFOLD_REGISTRY: Dict[str, Type[Manifold]] = {
    'sphere': Sphere,
    'positive_reals': PositiveReals,
    'spd': Spd,
}
