"""
Squeeze and split plumbing for multiscale flows.

Squeeze layout: each spatial axis of extent g > 1 is cut into (g / 2, 2); the
2 x ... x 2 sub-block of a new location is flattened row-major and becomes the
fastest-varying part of the new channel index, i.e.

    new_channel = old_channel * 2^d + row_major(sub_block_offsets)

where d is the number of halved axes. Extent-1 axes are left alone. Both
directions are pure index permutations and contribute no log-determinant.
"""

import torch
from beartype.typing import List, Tuple

from ..configs import squeezed_grid
from ..data import Field
from ..utils.error_handler import DivisibilityError


def _layout(
    shape: Tuple[int, ...], grid: Tuple[int, ...], tail: int
) -> Tuple[List[int], List[int]]:
    """Shape with every halved axis expanded to (g / 2, 2), and the permutation
    moving the sub-block axes behind the channel axis."""
    expanded = [shape[0]]
    outer, inner = [], []
    for extent in grid:
        if extent == 1:
            outer.append(len(expanded))
            expanded.append(1)
            continue
        if extent % 2 != 0:
            raise DivisibilityError(f'grid extent {extent} is not divisible by 2')
        outer.append(len(expanded))
        inner.append(len(expanded) + 1)
        expanded += [extent // 2, 2]
    channel_axis = len(expanded)
    expanded.append(shape[1 + len(grid)])
    tail_axes = list(range(len(expanded), len(expanded) + tail))
    expanded += list(shape[len(shape) - tail :])
    return expanded, [0] + outer + [channel_axis] + inner + tail_axes


def squeeze(t: torch.Tensor, tail: int = 1) -> torch.Tensor:
    """
    :param t: batched field tensor (B, *grid, C, *tail_shape); ``tail`` is 1 for
        chart coordinates and len(ambient_shape) for ambient points.
    :return: (B, *grid / 2, C * 2^d, *tail_shape).
    """
    grid = tuple(t.shape[1 : t.dim() - 1 - tail])
    new_grid, factor = squeezed_grid(grid)
    expanded, perm = _layout(tuple(t.shape), grid, tail)
    tail_shape = tuple(t.shape[t.dim() - tail :])
    channels = t.shape[1 + len(grid)]
    moved = t.reshape(expanded).permute(perm)
    return moved.reshape((t.shape[0],) + new_grid + (channels * factor,) + tail_shape)


def unsqueeze(t: torch.Tensor, grid: Tuple[int, ...], tail: int = 1) -> torch.Tensor:
    """
    Exact inverse of ``squeeze``.
    :param grid: spatial extents before squeezing.
    """
    new_grid, factor = squeezed_grid(grid)
    if tuple(t.shape[1 : 1 + len(grid)]) != new_grid:
        raise DivisibilityError(
            f'grid {tuple(t.shape[1 : 1 + len(grid)])} does not come from {grid}'
        )
    squeezed_channels = t.shape[1 + len(grid)]
    if squeezed_channels % factor != 0:
        raise DivisibilityError(f'{squeezed_channels} channels not divisible by {factor}')
    channels = squeezed_channels // factor
    tail_shape = tuple(t.shape[t.dim() - tail :])
    original = (t.shape[0],) + tuple(grid) + (channels,) + tail_shape
    expanded, perm = _layout(original, tuple(grid), tail)
    moved_shape = [expanded[axis] for axis in perm]
    inverse_perm = sorted(range(len(perm)), key=perm.__getitem__)
    return t.reshape(moved_shape).permute(inverse_perm).reshape(original)


def split_latent(v: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """First half of the channels continues, the second half is emitted."""
    channels = v.shape[-2]
    if channels % 2 != 0:
        raise DivisibilityError(f'cannot split {channels} channels in half')
    return v[..., : channels // 2, :], v[..., channels // 2 :, :]


def merge_latent(kept: torch.Tensor, emitted: torch.Tensor) -> torch.Tensor:
    return torch.cat([kept, emitted], dim=-2)


def squeeze_field(x: Field) -> Field:
    tail = len(x.kind.ambient_shape)
    return Field.from_tensor(x.kind, squeeze(x.tensor()[None], tail)[0])


def unsqueeze_field(x: Field, grid: Tuple[int, ...]) -> Field:
    tail = len(x.kind.ambient_shape)
    return Field.from_tensor(x.kind, unsqueeze(x.tensor()[None], grid, tail)[0])


def split_field(x: Field) -> Tuple[Field, Field]:
    channels = x.channels
    if channels % 2 != 0:
        raise DivisibilityError(f'cannot split {channels} channels in half')
    points = x.tensor()
    axis = len(x.grid_shape)
    kept, emitted = points.split(channels // 2, dim=axis)
    return Field.from_tensor(x.kind, kept), Field.from_tensor(x.kind, emitted)


def merge_field(kept: Field, emitted: Field) -> Field:
    axis = len(kept.grid_shape)
    return Field.from_tensor(
        kept.kind, torch.cat([kept.tensor(), emitted.tensor()], dim=axis)
    )
