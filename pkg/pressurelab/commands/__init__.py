# pressurelab/commands/__init__.py

"""
Command-line interface.

    run CONFIG [--threads N] [--out DIR]   execute one experiment config
    list-builtins                          print the built-in catalog with oracle values

Exit codes: 0 success, 2 validation error, 3 numerical failure (an error
raised by a numerical procedure, a refused model hypothesis, or flagged
infinite values where the task does not expect them).
"""

import logging
import time

import click

from pressurelab import create_context
from pressurelab.commands.helper_functions import load_config
from pressurelab.commands.tasks import TASKS, TaskResult, execute
from pressurelab.errors import NumericalError, PressureLabError
from pressurelab.services.builtins import list_builtins
from pressurelab.utils.result_writer import output_paths, write_manifest, write_table

logger = logging.getLogger(__name__)


def run_config(config_path, threads=None, out_dir=None):
    """
    Load, execute and persist one experiment.

    Args:
        config_path: Path to the JSON config document.
        threads: Worker pool size override.
        out_dir: Output directory override.

    Returns:
        Exit code (0, 2 or 3).
    """
    context = create_context(threads, out_dir)
    started = time.perf_counter()
    try:
        cfg = load_config(config_path)
    except PressureLabError as e:
        logger.error(f"invalid config {config_path}: {e}")
        return e.exit_code

    columns = TASKS[cfg.task][1]
    table_path, manifest_path = output_paths(context['out_dir'], cfg.output_path)
    result = TaskResult()
    exit_code, error, partial = 0, None, False
    try:
        execute(cfg, context['threads'], result)
        if result.failures:
            for failure in result.failures:
                logger.warning(failure)
            exit_code = NumericalError.exit_code
    except PressureLabError as e:
        logger.error(f"task {cfg.task} failed: {e}")
        exit_code, error, partial = e.exit_code, str(e), True

    rows = write_table(result.rows, columns, table_path)
    write_manifest(
        manifest_path,
        config_echo=cfg.raw,
        task=cfg.task,
        seeds=cfg.seeds,
        wall_time=time.perf_counter() - started,
        rows=rows,
        partial=partial,
        exit_code=exit_code,
        error=error,
        numerical_failures=result.failures,
    )
    return exit_code


@click.group()
def cli():
    """Finite-scale pressure, entropy and dimension experiments on subshifts."""


@cli.command('run')
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.option('--threads', type=click.IntRange(min=1), default=None,
              help='Worker pool size (default: PRESSURELAB_THREADS or 1).')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
              help='Output directory (default: PRESSURELAB_OUT or ./results).')
def run_command(config_path, threads, out_dir):
    """Run the experiment described by CONFIG_PATH."""
    raise SystemExit(run_config(config_path, threads, out_dir))


@cli.command('list-builtins')
def list_builtins_command():
    """Print built-in systems, measures and models with their oracle values."""
    for entry in list_builtins():
        click.echo(f"{entry['kind']:<8} {entry['name']:<18} {entry['oracle']:<40} {entry['value']:.12g}  "
                   f"({entry['description']})")
