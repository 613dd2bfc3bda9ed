from beartype.typing import Dict, Optional, Tuple

from ..configs import GeometryConfig, ManifoldKind
from .manifold_base import Manifold
from .registry import MANIFOLD_REGISTRY


class ManifoldHandler:
    __manifolds__: Dict[Tuple[ManifoldKind, str], Manifold] = {}

    @classmethod
    def get_manifold(
        cls, kind: ManifoldKind, tolerances: Optional[GeometryConfig] = None
    ) -> Manifold:
        tolerances = tolerances or GeometryConfig()
        key = (kind, tolerances.model_dump_json())
        if key not in cls.__manifolds__:
            manifold_type = MANIFOLD_REGISTRY.get(kind.kind)
            if not manifold_type:
                raise ValueError(f'Manifold: {kind.kind} not found')
            cls.__manifolds__[key] = manifold_type(kind, tolerances)
        return cls.__manifolds__[key]

    @classmethod
    def reset(cls) -> None:
        cls.__manifolds__ = {}


def get_manifold(
    kind: ManifoldKind, tolerances: Optional[GeometryConfig] = None
) -> Manifold:
    return ManifoldHandler.get_manifold(kind, tolerances)
