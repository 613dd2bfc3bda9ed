from pathlib import Path

import pytest
import yaml

from manifold_glow.cli.main import build_parser, main, overrides_from
from tests.constants.config_constants import example_config_data


def write_config(tmp_path: Path, **updates: object) -> str:
    data = dict(example_config_data, out_dir=str(tmp_path / 'run'), **updates)
    path = tmp_path / 'run.yaml'
    with open(path, 'w') as f:
        yaml.dump(data, f)
    return str(path)


def test_overrides_from_flags() -> None:
    args = build_parser().parse_args(
        ['eval', '--config', 'run.yaml', '--seed', '3', '--temperature', '0.5']
    )
    overrides = overrides_from(args)
    assert overrides['seed'] == 3
    assert overrides['eval.temperatures'] == [0.5]
    assert overrides['out_dir'] is None


def test_synth_exits_cleanly(tmp_path: Path) -> None:
    assert main(['synth', '--config', write_config(tmp_path)]) == 0
    assert (tmp_path / 'run' / 'data' / 'manifest.tsv').exists()
    assert (tmp_path / 'run' / 'resolved_config.yaml').exists()
    assert (tmp_path / 'run' / 'run.log').exists()


def test_invalid_config_exits_with_2(tmp_path: Path) -> None:
    train = dict(example_config_data['train'], batch_size=0)
    assert main(['synth', '--config', write_config(tmp_path, train=train)]) == 2


def test_missing_config_exits_with_2(tmp_path: Path) -> None:
    assert main(['synth', '--config', str(tmp_path / 'absent.yaml')]) == 2


def test_unknown_command_is_a_usage_error(tmp_path: Path) -> None:
    with pytest.raises(SystemExit):
        main(['serve', '--config', write_config(tmp_path)])


@pytest.mark.slow
def test_detected_fault_exits_with_3(tmp_path: Path) -> None:
    config = write_config(tmp_path)
    assert main(['check', '--config', config, '--inject-fault', 'scale_clamp']) == 3
