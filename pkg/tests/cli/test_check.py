from pathlib import Path

import pytest

from manifold_glow.cli.check import CHECK_KINDS, CheckSuite, cmd_check
from manifold_glow.configs import RunConfig
from manifold_glow.utils.error_handler import ThresholdFailure


def test_squeeze_check_is_exact(example_run_config: RunConfig) -> None:
    assert CheckSuite(example_run_config).check_squeeze() == 0.0


def test_chart_round_trips(example_run_config: RunConfig) -> None:
    suite = CheckSuite(example_run_config)
    for label in CHECK_KINDS:
        assert suite.check_chart_round_trip(label) < 1e-8


@pytest.mark.slow
def test_clean_run_passes(example_run_config: RunConfig, tmp_path: Path) -> None:
    report = cmd_check(example_run_config, str(tmp_path))
    assert report.passed
    assert (tmp_path / 'check_report.yaml').exists()


@pytest.mark.slow
def test_unclamped_scale_is_detected(
    example_run_config: RunConfig, tmp_path: Path
) -> None:
    config = example_run_config.model_copy(
        update={
            'check': example_run_config.check.model_copy(
                update={'inject_fault': 'scale_clamp'}
            )
        }
    )
    with pytest.raises(ThresholdFailure):
        cmd_check(config, str(tmp_path))
    assert (tmp_path / 'check_report.yaml').exists()


def test_suite_covers_large_manifolds() -> None:
    dims = {label: kind.dim for label, kind in CHECK_KINDS.items()}
    assert dims['sphere12'] == 11
    assert dims['spd3'] == 6


@pytest.mark.parametrize('label', ['sphere12', 'spd3'])
@pytest.mark.parametrize(
    'layer_name', ['actnorm', 'conv1x1', 'coupling', 'coupling_sliced']
)
def test_layer_round_trips_on_large_manifolds(
    example_run_config: RunConfig, label: str, layer_name: str
) -> None:
    suite = CheckSuite(example_run_config)
    worst = suite.over_cases(label, layer_name, suite.layer_round_trip)
    assert worst < example_run_config.geometry.round_trip_tol


@pytest.mark.parametrize('layer_name', ['actnorm', 'coupling'])
def test_layer_logdet_on_spd3(example_run_config: RunConfig, layer_name: str) -> None:
    suite = CheckSuite(example_run_config)
    worst = suite.over_cases('spd3', layer_name, suite.layer_logdet)
    assert worst < example_run_config.geometry.fd_agreement


def test_tiny_model_couples_both_parities(example_run_config: RunConfig) -> None:
    model, points = CheckSuite(example_run_config).tiny_model(0)
    assert [c.parity for c in model.coupling_layers()] == [0, 1]
    assert tuple(points.shape) == (4, 2, 2, 1)
    assert CheckSuite(example_run_config).check_model_logdet() < 1e-4
