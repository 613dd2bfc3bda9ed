import os

import numpy as np
from beartype.typing import Dict, List, Optional, Sequence

from ..configs import EvalConfig, EvalThresholds, GeometryConfig
from ..data import Field, PairedDataset
from ..utils.logger import logger
from .group_analysis import (
    iou_significant,
    permutation_test,
    permutation_test_features,
    significant_mask,
)
from .metrics import (
    chart_mean_field,
    confusion_matrix,
    dominance_score,
    fractional_anisotropy,
    reconstruction_errors,
    subset_dominance,
)
from .plots import plot_confusion, plot_error_histogram
from .report import EvalReport, temperature_key


def check_thresholds(report: EvalReport, thresholds: EvalThresholds) -> List[str]:
    failures = []
    if thresholds.min_dominance is not None:
        dominance = report.mean_subset_dominance
        if dominance is None:
            dominance = report.dominance
        if dominance < thresholds.min_dominance:
            failures.append(
                f'dominance {dominance:.3f} below {thresholds.min_dominance}'
            )
    if thresholds.max_baseline_ratio is not None:
        ratio = report.baseline_ratio
        if ratio is None or ratio > thresholds.max_baseline_ratio:
            failures.append(
                f'baseline ratio {ratio} above {thresholds.max_baseline_ratio}'
            )
    if thresholds.max_reconstruction_error is not None:
        first = temperature_key(report.temperatures[0])
        error = report.mean_reconstruction_error[first]
        if error > thresholds.max_reconstruction_error:
            failures.append(
                f'reconstruction error {error:.4f} above '
                f'{thresholds.max_reconstruction_error}'
            )
    return failures


def _by_group(fields: Sequence[Field], groups: Sequence[str], label: str) -> List[Field]:
    return [f for f, g in zip(fields, groups) if g == label]


def group_p_values(
    test: PairedDataset,
    generated: Sequence[Field],
    config: EvalConfig,
    seed: int,
    tolerances: Optional[GeometryConfig] = None,
) -> Dict[str, np.ndarray]:
    """
    Group-difference p-maps of the true targets, the generated targets, the
    sources and the source FA, all on the same label permutations.
    """
    groups = test.groups
    settings = {
        'target': test.targets,
        'generated': list(generated),
        'source': test.sources,
    }
    p_values = {
        name: permutation_test(
            _by_group(fields, groups, 'A'),
            _by_group(fields, groups, 'B'),
            config.n_perm,
            seed,
            tolerances,
        )
        for name, fields in settings.items()
    }
    fa = np.stack([fractional_anisotropy(f) for f in test.sources])
    fa = fa.reshape(len(test), test.sources[0].voxel_count, -1)
    labels = np.asarray(groups)
    p_values['fa'] = permutation_test_features(
        fa[labels == 'A'], fa[labels == 'B'], config.n_perm, seed
    ).reshape(test.sources[0].grid_shape)
    return p_values


def evaluate(
    test: PairedDataset,
    generated: Dict[float, List[Field]],
    train_targets: Sequence[Field],
    config: EvalConfig,
    seed: int = 0,
    tolerances: Optional[GeometryConfig] = None,
    out_dir: Optional[str] = None,
    repeat_runs: Sequence[List[Field]] = (),
) -> EvalReport:
    """
    Scores generated target fields against the held-out references.

    :param generated: generated fields per temperature, aligned with ``test``.
    :param train_targets: targets the chart-mean baseline is fitted on.
    :param repeat_runs: further generations at the first temperature; the
        confusion matrix averages them with the first run.
    """
    temperatures = list(generated)
    errors = {
        temperature_key(t): reconstruction_errors(fields, test.targets, tolerances)
        for t, fields in generated.items()
    }
    main = generated[temperatures[0]]
    baseline = chart_mean_field(train_targets, tolerances)
    baseline_errors = reconstruction_errors(
        [baseline] * len(test), test.targets, tolerances
    )
    runs = [main] + list(repeat_runs)
    matrix = confusion_matrix(runs, test.targets, tolerances)
    main_error = np.mean(errors[temperature_key(temperatures[0])])
    logger.info(
        f'mean reconstruction error {main_error:.4f} '
        f'(baseline {np.mean(baseline_errors):.4f})',
        extra={'msg_type': 'EVAL'},
    )

    p_values = group_p_values(test, main, config, seed, tolerances)
    significant = {
        name: float(significant_mask(p, config.alpha, config.fdr).mean())
        for name, p in p_values.items()
    }
    iou = {
        name: iou_significant(p, p_values['target'], config.alpha, config.fdr)
        for name, p in p_values.items()
        if name != 'target'
    }
    report = EvalReport(
        seed=seed,
        temperatures=temperatures,
        n_perm=config.n_perm,
        alpha=config.alpha,
        fdr=config.fdr,
        subjects=list(test.names),
        grid_shape=list(test.targets[0].grid_shape),
        reconstruction_errors=errors,
        baseline_errors=baseline_errors,
        confusion=matrix.tolist(),
        confusion_runs=len(runs),
        dominance=dominance_score(matrix),
        subset_dominance=subset_dominance(
            matrix, config.confusion_k, config.confusion_repeats, seed
        ),
        p_values={name: p.reshape(-1).tolist() for name, p in p_values.items()},
        significant_fraction=significant,
        iou=iou,
    )
    report.failures = check_thresholds(report, config.thresholds)
    for failure in report.failures:
        logger.error(f'threshold failed: {failure}', extra={'msg_type': 'FAIL'})
    if out_dir is not None:
        report.save(out_dir)
        plot_error_histogram(
            errors[temperature_key(temperatures[0])],
            os.path.join(out_dir, 'reconstruction_hist.svg'),
            config.histogram_bins,
            report.baseline_mean_error,
        )
        plot_confusion(matrix, os.path.join(out_dir, 'confusion.svg'))
    return report

