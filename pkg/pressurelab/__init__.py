# pressurelab/__init__.py

import logging

__version__ = '1.0.0'

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level=None):
    """
    Configure root logging for command-line runs.

    Args:
        level: Optional level name or number; defaults to the active config's LOG_LEVEL.
    """
    from config import get_config

    if level is None:
        level = get_config().LOG_LEVEL
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger('pressurelab').setLevel(level)


def create_context(threads=None, out_dir=None):
    """
    Build the run context shared by every CLI task.

    Args:
        threads: Worker pool size override (falls back to config THREADS).
        out_dir: Output directory override (falls back to config OUTPUT_DIR).

    Returns:
        Dict with the resolved config class, thread count and output directory.
    """
    from config import get_config

    cfg = get_config()
    configure_logging(cfg.LOG_LEVEL)
    context = {
        'config': cfg,
        'threads': max(1, int(threads if threads is not None else cfg.THREADS)),
        'out_dir': out_dir or cfg.OUTPUT_DIR,
    }
    logging.getLogger(__name__).info(
        f"pressurelab {__version__} context created (threads={context['threads']}, out={context['out_dir']})"
    )
    return context
