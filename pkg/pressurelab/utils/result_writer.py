# pressurelab/utils/result_writer.py

"""
Result table and run manifest emission.

Core responsibilities:
- write_table(): CSV with a fixed column order and 12 significant digits, so
  reruns of the same config produce byte-identical files.
- write_manifest(): JSON with the config echo, package versions, seeds, wall
  time and the partial flag.

Used by:
- commands (the `run` command)
"""

import json
import logging
import math
import os
import platform
from importlib import metadata

import pandas as pd

from config import get_config

logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ('numpy', 'scipy', 'pandas', 'click', 'python-dotenv')


def package_versions():
    """Installed versions of the numerical stack, plus pressurelab and Python."""
    from pressurelab import __version__

    versions = {'pressurelab': __version__, 'python': platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def output_paths(out_dir, stem):
    """(csv path, manifest path) for an output stem."""
    return os.path.join(out_dir, f"{stem}.csv"), os.path.join(out_dir, f"{stem}.manifest.json")


def write_table(rows, columns, path):
    """
    Write result rows as CSV.

    Args:
        rows: List of dicts; missing keys become empty cells.
        columns: Column order for the task.
        path: Target file.

    Returns:
        Number of rows written.
    """
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    frame = pd.DataFrame(rows, columns=list(columns))
    frame.to_csv(path, index=False, float_format=get_config().FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"wrote {len(frame)} rows to {path}")
    return len(frame)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_manifest(path, *, config_echo, task, seeds, wall_time, rows, partial, exit_code,
                   error=None, numerical_failures=()):
    """Write the run manifest next to the table."""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    manifest = {
        'task': task,
        'config': config_echo,
        'versions': package_versions(),
        'seeds': list(seeds),
        'wall_time_s': round(wall_time, 6),
        'rows': rows,
        'partial': partial,
        'exit_code': exit_code,
        'error': error,
        'numerical_failures': list(numerical_failures),
    }
    with open(path, 'w') as f:
        json.dump(_jsonable(manifest), f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info(f"manifest written to {path}")
    return manifest
