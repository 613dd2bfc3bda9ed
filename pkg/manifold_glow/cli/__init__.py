from .check import CheckReport, CheckResult, CheckSuite, cmd_check
from .commands import cmd_eval, cmd_generate, cmd_synth, cmd_train
from .main import main

__all__ = [
    'cmd_synth',
    'cmd_train',
    'cmd_generate',
    'cmd_eval',
    'cmd_check',
    'CheckSuite',
    'CheckReport',
    'CheckResult',
    'main',
]
