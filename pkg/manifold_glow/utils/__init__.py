from .error_handler import attach_layer_index, exit_code_for
from .logger import logger

__all__ = ['logger', 'attach_layer_index', 'exit_code_for']
