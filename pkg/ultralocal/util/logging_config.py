import inspect
import logging
import logging.config
import os
import platform
import sys
import time
from collections import defaultdict
from typing import Any, DefaultDict, Dict, Iterable, Optional, Tuple

LOG_FORMAT = '[%(asctime)16s | %(levelname)8s | %(name)24s | %(filename)s:%(lineno)s %(funcName)s() ] %(message)s'

# per-iteration solver output is only wanted in the debug file
QUIET_LOGGERS = ('ultralocal.sdp.interior_point', 'InteriorPointSolver')

LOG_FILE_BYTES = 50 * 1024 * 1024
LOG_FILE_BACKUPS = 3

_last_logged: DefaultDict[Tuple[Any, ...], float] = defaultdict(float)
_times_suppressed: DefaultDict[Tuple[Any, ...], int] = defaultdict(int)


def intermittent_log(
        logger: logging.Logger,
        line: str,
        frequency: float = 60,
        level: int = logging.INFO,
        negative_level: Optional[int] = None,
        caller_extra_id: Any = None) -> None:
    """
    Log `line` at most once every `frequency` seconds per call site.

    Suppressed calls go out at `negative_level` when given. The number suppressed is appended to the next line
    that gets through.
    """
    caller: Optional[inspect.FrameInfo]
    try:
        caller = inspect.stack()[1]
        key: Tuple[Any, ...] = (caller.filename, caller.lineno, caller_extra_id)
    except Exception:
        caller = None
        key = ('???', 0, caller_extra_id)

    now = time.time()
    if now - _last_logged[key] > frequency:
        _last_logged[key] = now
        suppressed = _times_suppressed.pop(key, 0)
        if suppressed:
            line += f' [{suppressed} similar lines suppressed]'
        output = level
    else:
        _times_suppressed[key] += 1
        if negative_level is None:
            return
        output = negative_level

    if not logger.isEnabledFor(output):
        return
    if caller is None:
        logger.log(output, line)
        return
    # attribute the record to the caller, not to this helper
    code = caller.frame.f_code
    logger.handle(logger.makeRecord(logger.name, output, code.co_filename, caller.frame.f_lineno, line, (), None, code.co_name))


def _rotating_file(path: str, level: str) -> Dict[str, Any]:
    return {
        'level': level,
        'formatter': 'standard',
        'class': 'logging.handlers.RotatingFileHandler',
        'filename': path,
        'maxBytes': LOG_FILE_BYTES,
        'backupCount': LOG_FILE_BACKUPS,
        'delay': True,
    }


def config_logger(
        name: str,
        level: int = logging.INFO,
        write_to_file: bool = True,
        logdir: str = 'logs',
        quiet: Iterable[str] = QUIET_LOGGERS) -> None:
    """
    Console logging at `level`; with `write_to_file`, `<logdir>/<name>.log` (INFO) and `<logdir>/<name>.debug.log`
    (everything). Loggers in `quiet` stay at INFO on every handler.
    """
    name = os.path.basename(name).rsplit('.py', 1)[0]

    handlers: Dict[str, Dict[str, Any]] = {
        'console': {
            'level': logging.getLevelName(level),
            'formatter': 'standard',
            'class': 'logging.StreamHandler',
        }
    }
    if write_to_file:
        os.makedirs(logdir, exist_ok=True)
        handlers['file'] = _rotating_file(os.path.join(logdir, f'{name}.log'), 'INFO')
        handlers['file_debug'] = _rotating_file(os.path.join(logdir, f'{name}.debug.log'), 'DEBUG')
    else:
        handlers['file'] = {'class': 'logging.NullHandler'}
        handlers['file_debug'] = {'class': 'logging.NullHandler'}
    targets = list(handlers)

    logging.config.dictConfig({
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'standard': {
                'format': LOG_FORMAT
            },
        },
        'handlers': handlers,
        'loggers': {
            '': {
                'handlers': targets,
                'level': 'DEBUG',
            },
            **{
                q: {
                    'handlers': targets,
                    'level': 'INFO',
                    'propagate': False,
                }
                for q in quiet
            },
        }
    })

    root = logging.getLogger()
    root.info(f'Command: "{" ".join(sys.argv)}", pid={os.getpid()}, name={name}')
    root.debug(f'Python {platform.python_version()} on {platform.platform()}, logdir={os.path.abspath(logdir) if write_to_file else None}')
