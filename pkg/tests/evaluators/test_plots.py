from pathlib import Path

import numpy as np

from manifold_glow.evaluators import plot_confusion, plot_error_histogram


def test_histogram_is_reproducible(tmp_path: Path) -> None:
    errors = np.random.default_rng(0).random(20).tolist()
    first = plot_error_histogram(errors, str(tmp_path / 'a' / 'hist.svg'), 5, 0.4)
    second = plot_error_histogram(errors, str(tmp_path / 'b' / 'hist.svg'), 5, 0.4)
    with open(first, 'rb') as f, open(second, 'rb') as g:
        assert f.read() == g.read()


def test_confusion_plot_written(tmp_path: Path) -> None:
    path = plot_confusion(np.eye(3), str(tmp_path / 'confusion.svg'))
    with open(path, 'r') as f:
        assert '<svg' in f.read()
