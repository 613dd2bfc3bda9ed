import os

import matplotlib

matplotlib.use('Agg')
# stable element ids so reruns write identical SVG
matplotlib.rcParams['svg.hashsalt'] = 'manifold-glow'

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from beartype.typing import Sequence  # noqa: E402


def plot_error_histogram(
    errors: Sequence[float], path: str, bins: int = 20, baseline: float = float('nan')
) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist(np.asarray(errors), bins=bins, color='tab:blue', alpha=0.8)
    if np.isfinite(baseline):
        ax.axvline(baseline, color='tab:red', linestyle='--', label='chart-mean baseline')
        ax.legend()
    ax.set_xlabel('reconstruction error (mean geodesic distance)')
    ax.set_ylabel('subjects')
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path


def plot_confusion(matrix: np.ndarray, path: str) -> str:
    fig, ax = plt.subplots(figsize=(4.5, 4))
    image = ax.imshow(matrix, cmap='viridis')
    fig.colorbar(image, ax=ax, label='reconstruction error')
    ax.set_xlabel('reference subject')
    ax.set_ylabel('generated subject')
    fig.tight_layout()
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path
