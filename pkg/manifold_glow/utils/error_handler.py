from functools import wraps

from beartype.typing import Any, Callable, Optional, TypeVar, cast

T = TypeVar('T', bound=Callable[..., Any])


class ManifoldGlowError(Exception):
    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


# geometry
class InvalidPointError(ManifoldGlowError):
    pass


class DomainError(ManifoldGlowError):
    pass


class CutLocusError(DomainError):
    pass


class ChartDomainError(DomainError):
    def __init__(self, message: str, layer_index: Optional[int] = None) -> None:
        super().__init__(message)
        self.layer_index = layer_index

    def __str__(self) -> str:
        if self.layer_index is None:
            return self.message
        return f'layer {self.layer_index}: {self.message}'


class InvariantViolationError(ManifoldGlowError):
    pass


class SingularCovarianceError(ManifoldGlowError):
    pass


class RejectionExhaustedError(ManifoldGlowError):
    pass


# layers and models
class ShapeMismatchError(ManifoldGlowError):
    pass


class DivisibilityError(ManifoldGlowError):
    pass


class DegenerateBatchError(ManifoldGlowError):
    pass


class NumericalAbortError(ManifoldGlowError):
    pass


# nn
class StaleTapeError(ManifoldGlowError):
    pass


class NonFiniteGradientError(ManifoldGlowError):
    pass


# files
class FieldFormatError(ManifoldGlowError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f'byte {offset}: {message}')
        self.offset = offset


class CheckpointError(ManifoldGlowError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class ChecksumError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


class CheckpointFormatError(CheckpointError):
    pass


# data and evaluation
class EmptySplitError(ManifoldGlowError):
    pass


class DegenerateGroupError(ManifoldGlowError):
    pass


# oracle
class SingularJacobianError(ManifoldGlowError):
    pass


class NonFiniteEvaluationError(ManifoldGlowError):
    pass


class ConfigValidationError(ManifoldGlowError):
    def __init__(self, message: str, key: Optional[str] = None) -> None:
        super().__init__(message if key is None else f'{key}: {message}')
        self.key = key


class ThresholdFailure(ManifoldGlowError):
    pass


class ConditioningWarning(UserWarning):
    pass


def attach_layer_index(func: T) -> T:
    """
    Decorator for flow-layer methods: a ChartDomainError leaving the layer is
    tagged with the layer's position inside its model.
    :param func: a method of an object carrying an integer ``index`` attribute.
    :return: The wrapped method.
    """

    @wraps(func)
    def wrapper(self: Any, *args: Any, **kwargs: Any) -> Any:
        try:
            return func(self, *args, **kwargs)
        except ChartDomainError as e:
            if e.layer_index is None:
                e.layer_index = getattr(self, 'index', None)
            raise

    return cast(T, wrapper)


def exit_code_for(error: BaseException) -> int:
    """
    Maps an exception raised by a command to the process exit code.
    :param error: the exception.
    :return: 2 for validation problems, 3 for threshold failures, 4 for numerical aborts.
    """
    if isinstance(error, ThresholdFailure):
        return 3
    if isinstance(
        error,
        (
            NumericalAbortError,
            NonFiniteGradientError,
            RejectionExhaustedError,
            DomainError,
        ),
    ):
        return 4
    return 2
