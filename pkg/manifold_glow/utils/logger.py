import logging
from logging import StreamHandler

from beartype.typing import Any, Literal, Mapping
from termcolor import colored

ColorType = Literal[
    'blue',
    'green',
    'yellow',
    'magenta',
    'cyan',
    'red',
    'light_green',
    'light_red',
]

LOG_COLORS: Mapping[str, ColorType] = {
    'DATA': 'blue',
    'TRAIN': 'green',
    'EVAL': 'yellow',
    'CHECK': 'magenta',
    'DETAIL': 'cyan',
    'ERROR': 'red',
    'PASS': 'light_green',
    'FAIL': 'light_red',
}

# widest tag, so PASS/FAIL/TRAIN lines line up
TAG_WIDTH = max(len(tag) for tag in LOG_COLORS)


class ColoredFormatter(logging.Formatter):
    """
    Colours records by their ``msg_type`` extra. ``STEP`` records (one per CLI
    command) print as a banner; records without a known type fall back to the
    plain format.
    """

    def format(self, record: logging.LogRecord) -> Any:
        msg_type = record.__dict__.get('msg_type', None)
        if msg_type == 'STEP':
            title = record.getMessage()
            rule = '=' * max(14, len(title))
            return f'\n{rule}\n{title}\n{rule}'
        if msg_type not in LOG_COLORS:
            return super().format(record)
        color = LOG_COLORS[msg_type]
        time_str = colored(self.formatTime(record, self.datefmt), color)
        tag = colored(msg_type.ljust(TAG_WIDTH), color, attrs=['bold'])
        msg = colored(record.getMessage(), color)
        if msg_type == 'ERROR':
            where = f'{record.filename}:{record.lineno}'
            return f'{time_str} - {tag} {where}\n{msg}'
        return f'{time_str} - {tag} {msg}'


console_formatter = ColoredFormatter(
    '\033[92m%(asctime)s - %(name)s:%(levelname)s\033[0m: %(filename)s:%(lineno)s - %(message)s',
    datefmt='%H:%M:%S',
)


def get_console_handler() -> StreamHandler:  # type: ignore[type-arg]
    console_handler = StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(console_formatter)
    return console_handler


def get_file_handler(path: str) -> logging.FileHandler:
    """
    Plain-text handler mirroring every record (DEBUG included) into ``run.log``
    of a run directory; the ``msg_type`` tag is kept, colours are not.
    """
    file_handler = logging.FileHandler(path, mode='a')
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(
        logging.Formatter('%(asctime)s - %(levelname)s - %(msg_type)s - %(message)s')
    )
    file_handler.addFilter(_default_msg_type)
    return file_handler


def _default_msg_type(record: logging.LogRecord) -> bool:
    if not hasattr(record, 'msg_type'):
        record.msg_type = 'DETAIL'
    return True


logger = logging.getLogger('manifold_glow')
logger.setLevel(logging.DEBUG)
logger.addHandler(get_console_handler())
