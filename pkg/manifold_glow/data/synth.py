import math

import numpy as np
from beartype import beartype
from beartype.typing import List, Tuple
from scipy.ndimage import gaussian_filter

from ..configs import ManifoldKind
from ..utils.logger import logger
from .data import Field, GroupLabel, PairedDataset

EIG_LOG_MIN = math.log(0.1)
EIG_LOG_MAX = math.log(10.0)
TEXTURE_REGULARIZER = 1e-4


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *stream]))


def smooth_unit_field(
    rng: np.random.Generator, grid_shape: Tuple[int, ...], sigma: float = 1.0
) -> np.ndarray:
    """Periodic Gaussian-smoothed white noise rescaled to unit standard deviation."""
    noise = gaussian_filter(rng.standard_normal(grid_shape), sigma=sigma, mode='wrap')
    std = float(noise.std())
    return noise / std if std > 0 else noise


def sym_from_isometric(coords: np.ndarray, n: int) -> np.ndarray:
    rows, cols = np.tril_indices(n)
    weights = np.where(rows == cols, 1.0, math.sqrt(2.0))
    mat = np.zeros(coords.shape[:-1] + (n, n))
    mat[..., rows, cols] = coords / weights
    mat[..., cols, rows] = coords / weights
    return mat


def spd_from_log(sym: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(sym)
    eigvals = np.exp(np.clip(eigvals, EIG_LOG_MIN, EIG_LOG_MAX))
    spd = (eigvecs * eigvals[..., None, :]) @ np.swapaxes(eigvecs, -1, -2)
    return 0.5 * (spd + np.swapaxes(spd, -1, -2))


@beartype
def synth_spd_field(
    seed: int,
    grid_shape: Tuple[int, ...],
    channels: int = 1,
    smoothness: float = 0.5,
    n: int = 3,
    amplitude: float = 0.6,
) -> Field:
    """
    Spatially smooth random SPD field: every component of the matrix logarithm is
    sqrt(s) * (one global draw) + sqrt(1 - s) * (smoothed noise), then exponentiated
    with eigenvalues clipped into [0.1, 10].
    """
    if not 0.0 <= smoothness <= 1.0:
        raise ValueError(f'smoothness must lie in [0, 1], got {smoothness}')
    rng = _rng(seed)
    m = n * (n + 1) // 2
    coords = np.empty(tuple(grid_shape) + (channels, m))
    for c in range(channels):
        for k in range(m):
            shared = rng.standard_normal()
            local = smooth_unit_field(rng, tuple(grid_shape))
            coords[..., c, k] = amplitude * (
                math.sqrt(smoothness) * shared + math.sqrt(1.0 - smoothness) * local
            )
    points = spd_from_log(sym_from_isometric(coords, n))
    return Field(kind=ManifoldKind(kind='spd', n=n), points=points)


def fibonacci_directions(n_dirs: int) -> np.ndarray:
    """
    Antipodally symmetric unit directions: a Fibonacci spiral over the upper
    hemisphere followed by its negatives, shape (n_dirs, 3).
    """
    if n_dirs < 4 or n_dirs % 2 != 0:
        raise ValueError(f'n_dirs must be even and >= 4, got {n_dirs}')
    half = n_dirs // 2
    golden = math.pi * (3.0 - math.sqrt(5.0))
    i = np.arange(half)
    z = (i + 0.5) / half
    r = np.sqrt(1.0 - z * z)
    upper = np.stack([r * np.cos(golden * i), r * np.sin(golden * i), z], axis=1)
    return np.concatenate([upper, -upper], axis=0)


def odf_target(tensors: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """
    Square-root orientation profile of diffusion tensors: the componentwise square
    root of (u_k^T D u_k)_k normalized to sum 1, i.e. a unit vector with
    nonnegative entries. Invariant to scaling D.
    """
    profile = np.einsum('ki,...ij,kj->...k', directions, tensors, directions)
    return np.sqrt(profile / profile.sum(-1, keepdims=True))


def perturb_on_sphere(
    points: np.ndarray, noise: float, rng: np.random.Generator
) -> np.ndarray:
    """Adds isotropic Gaussian noise in normal coordinates at each point."""
    if noise <= 0:
        return points
    xi = noise * rng.standard_normal(points.shape)
    xi -= (xi * points).sum(-1, keepdims=True) * points
    norm = np.linalg.norm(xi, axis=-1, keepdims=True)
    direction = np.divide(xi, norm, out=np.zeros_like(xi), where=norm > 0)
    moved = np.cos(norm) * points + np.sin(norm) * direction
    return moved / np.linalg.norm(moved, axis=-1, keepdims=True)


def planted_region(grid_shape: Tuple[int, ...]) -> np.ndarray:
    """Boolean mask of the leading half-block of the grid (lower corner)."""
    mask = np.ones(grid_shape, dtype=bool)
    for axis, extent in enumerate(grid_shape):
        index = [slice(None)] * len(grid_shape)
        index[axis] = slice((extent + 1) // 2, None)
        mask[tuple(index)] = False
    return mask


def plant_anisotropy(
    tensors: np.ndarray, region: np.ndarray, effect: float
) -> np.ndarray:
    """Stretches tensors inside ``region`` along the first axis: D -> E D E."""
    stretch = np.diag([math.exp(effect), math.exp(-effect / 2), math.exp(-effect / 2)])
    out = tensors.copy()
    out[region] = stretch @ tensors[region] @ stretch
    return out


@beartype
def synth_paired(
    seed: int,
    grid_shape: Tuple[int, ...],
    count: int,
    n_dirs: int = 12,
    noise: float = 0.0,
    smoothness: float = 0.5,
    group_effect: float = 0.0,
) -> PairedDataset:
    """
    Paired Spd(3) -> Sphere(n_dirs) dataset. Subjects alternate between groups A
    and B; group B carries a planted anisotropy inside ``planted_region`` when
    ``group_effect`` > 0. Targets follow ``odf_target`` exactly before noise.
    """
    directions = fibonacci_directions(n_dirs)
    region = planted_region(tuple(grid_shape))
    sources: List[Field] = []
    targets: List[Field] = []
    groups: List[GroupLabel] = []
    for i in range(count):
        group: GroupLabel = 'A' if i % 2 == 0 else 'B'
        source = synth_spd_field(
            int(_rng(seed, i).integers(2**31)), tuple(grid_shape), 1, smoothness
        )
        tensors = source.points[..., 0, :, :]
        if group == 'B' and group_effect > 0:
            tensors = plant_anisotropy(tensors, region, group_effect)
        clean = odf_target(tensors, directions)
        noisy = perturb_on_sphere(clean, noise, _rng(seed, i, 1))
        sources.append(
            Field(kind=source.kind, points=tensors[..., None, :, :].copy())
        )
        targets.append(
            Field(
                kind=ManifoldKind(kind='sphere', n=n_dirs),
                points=noisy[..., None, :],
            )
        )
        groups.append(group)
    logger.info(
        f'synthesized {count} paired fields on grid {tuple(grid_shape)}',
        extra={'msg_type': 'DATA'},
    )
    return PairedDataset(
        sources=sources,
        targets=targets,
        groups=groups,
        seed=seed,
        generator='paired',
        noise=noise,
    )


def window_covariance(texture: np.ndarray, radius: int = 1) -> np.ndarray:
    """
    Population covariance of the channel vectors inside the (2r+1)^2 window around
    each pixel, clipped at the borders, plus a small ridge.
    :param texture: (H, W, C) array.
    :return: (H, W, C, C) array.
    """
    height, width, channels = texture.shape
    padded = np.pad(
        texture,
        ((radius, radius), (radius, radius), (0, 0)),
        constant_values=np.nan,
    )
    windows = np.stack(
        [
            padded[dy : dy + height, dx : dx + width]
            for dy in range(2 * radius + 1)
            for dx in range(2 * radius + 1)
        ]
    )
    mean = np.nanmean(windows, axis=0)
    centered = windows - mean
    outer = centered[..., :, None] * centered[..., None, :]
    cov = np.nanmean(outer, axis=0)
    return cov + TEXTURE_REGULARIZER * np.eye(channels)


@beartype
def synth_texture(
    seed: int, grid_shape: Tuple[int, int], contrast: float = 0.5
) -> np.ndarray:
    """Positive 3-channel texture: exp of correlated smooth noise per channel."""
    rng = _rng(seed)
    base = smooth_unit_field(rng, grid_shape, sigma=1.5)
    channels = []
    for _ in range(3):
        own = smooth_unit_field(rng, grid_shape, sigma=0.8)
        channels.append(np.exp(contrast * (0.6 * base + 0.8 * own)))
    return np.stack(channels, axis=-1)


@beartype
def synth_texture_pair(
    seed: int,
    grid_shape: Tuple[int, ...],
    count: int = 1,
    contrast: float = 0.5,
) -> PairedDataset:
    """
    Spd(3) local-covariance fields paired with the 3-channel positive textures they
    summarize.
    """
    if len(grid_shape) != 2 or min(grid_shape) < 8:
        raise ValueError(f'texture grids must be 2D and at least 8x8, got {grid_shape}')
    grid = (int(grid_shape[0]), int(grid_shape[1]))
    sources: List[Field] = []
    targets: List[Field] = []
    groups: List[GroupLabel] = []
    for i in range(count):
        texture = synth_texture(int(_rng(seed, i).integers(2**31)), grid, contrast)
        cov = window_covariance(texture)
        sources.append(
            Field(kind=ManifoldKind(kind='spd', n=3), points=cov[:, :, None, :, :])
        )
        targets.append(Field(kind=ManifoldKind(kind='positive_reals'), points=texture))
        groups.append('A' if i % 2 == 0 else 'B')
    return PairedDataset(
        sources=sources, targets=targets, groups=groups, seed=seed, generator='texture'
    )
