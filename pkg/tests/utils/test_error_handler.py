import pytest
import torch

from manifold_glow.utils.error_handler import (
    ChartDomainError,
    CheckpointError,
    ConfigValidationError,
    CutLocusError,
    NonFiniteGradientError,
    NumericalAbortError,
    ShapeMismatchError,
    ThresholdFailure,
    attach_layer_index,
    exit_code_for,
)


class Tagged:
    def __init__(self, index: int) -> None:
        self.index = index

    @attach_layer_index
    def fail(self) -> torch.Tensor:
        raise ChartDomainError('coordinate left the chart ball')

    @attach_layer_index
    def fail_tagged(self) -> torch.Tensor:
        raise ChartDomainError('already tagged', layer_index=1)


def test_exit_codes() -> None:
    assert exit_code_for(ThresholdFailure('dominance')) == 3
    assert exit_code_for(NumericalAbortError('loss')) == 4
    assert exit_code_for(NonFiniteGradientError('nan')) == 4
    assert exit_code_for(CutLocusError('antipode')) == 4
    assert exit_code_for(ConfigValidationError('bad', key='seed')) == 2
    assert exit_code_for(ShapeMismatchError('shape')) == 2
    assert exit_code_for(CheckpointError('truncated')) == 2
    assert exit_code_for(ValueError('anything else')) == 2


def test_layer_index_is_attached() -> None:
    with pytest.raises(ChartDomainError) as info:
        Tagged(5).fail()
    assert info.value.layer_index == 5
    assert str(info.value) == 'layer 5: coordinate left the chart ball'


def test_existing_layer_index_is_kept() -> None:
    with pytest.raises(ChartDomainError) as info:
        Tagged(5).fail_tagged()
    assert info.value.layer_index == 1


def test_config_error_names_the_key() -> None:
    error = ConfigValidationError('must be >= 1', key='train.batch_size')
    assert error.key == 'train.batch_size'
    assert str(error) == 'train.batch_size: must be >= 1'
