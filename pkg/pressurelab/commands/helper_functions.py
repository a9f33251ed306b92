# pressurelab/commands/helper_functions.py

"""
Helper functions for the command-line tasks.

Core responsibilities:
- load_config(): read a JSON config document from disk.
- parse_config(): validate the document and turn it into an ExperimentConfig;
  every error is a ConfigError naming the offending key and the constraint.
- Spec parsers for systems, potentials, measures, models and cylinder sets,
  each accepting either a built-in name or an inline description.
"""

import json
import logging
import math
import os

from config import get_config
from pressurelab.errors import ConfigError, ValidationError
from pressurelab.models.experiment import TASKS, ExperimentConfig, Schedule
from pressurelab.models.geometry import HyperbolicModel, RepellerModel
from pressurelab.models.measure import BernoulliMeasure, MarkovMeasure, MixtureMeasure
from pressurelab.models.subshift import CylinderUnion, Potential, Subshift
from pressurelab.services import builtins

logger = logging.getLogger(__name__)

EXHAUSTIVE_TASKS = ('pressure', 'sp', 'cp', 'entropy', 'lemma-check')
SCHEDULE_KEYS = ('n', 'eps_exponents', 'delta', 'theta', 'L', 'D', 'N', 'k', 'log_radii')


def load_config(path):
    """
    Read and parse a config document.

    Args:
        path: Path to a JSON file.

    Returns:
        ExperimentConfig.
    """
    if not os.path.exists(path):
        raise ConfigError('config', f"file {path!r} does not exist")
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError('config', f"invalid JSON ({e})") from None
    stem = os.path.splitext(os.path.basename(path))[0]
    return parse_config(doc, default_output=stem)


def _wrap(key, fn, *args):
    """Run a model constructor, re-raising validation failures as ConfigError on `key`."""
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValidationError, TypeError, ValueError) as e:
        raise ConfigError(key, str(e)) from None


def parse_system(spec, key='system'):
    """Built-in system name or {"alphabet_size", "transition", "sided"}."""
    if isinstance(spec, str):
        return _wrap(key, builtins.get_system, spec)
    if not isinstance(spec, dict):
        raise ConfigError(key, "must be a built-in name or an object")
    if 'alphabet_size' not in spec:
        raise ConfigError(f"{key}.alphabet_size", "is required")
    k = spec['alphabet_size']
    transition = spec.get('transition', [[1] * k for _ in range(k)] if isinstance(k, int) else None)
    return _wrap(key, Subshift, k, transition, spec.get('sided', 'one_sided'), spec.get('name', ''))


def _symbols_label(values):
    try:
        return "(" + ", ".join(f"{float(v):g}" for v in values) + ")"
    except (TypeError, ValueError):
        return ""


def parse_potential(spec, s, key='potential'):
    """
    Potential spec.

    Accepted forms: a number (constant), a list (depth-1 values per symbol),
    {"kind": "constant", "value": c}, {"kind": "symbols", "values": [...]},
    {"kind": "table", "depth": d, "values": {"01": ...}, "default": x}.
    """
    if s is None:
        raise ConfigError(key, "needs a system to be defined")
    if isinstance(spec, bool):
        raise ConfigError(key, "must be a number, a list or an object")
    if isinstance(spec, (int, float)):
        return _wrap(key, Potential.constant, s, float(spec), f"const {float(spec):g}")
    if isinstance(spec, list):
        return _wrap(key, Potential.from_symbols, s, spec, _symbols_label(spec))
    if not isinstance(spec, dict):
        raise ConfigError(key, "must be a number, a list or an object")
    kind = spec.get('kind', 'table')
    name = spec.get('name') or key
    if kind == 'constant':
        return _wrap(key, Potential.constant, s, float(spec.get('value', 0.0)), name)
    if kind == 'symbols':
        return _wrap(key, Potential.from_symbols, s, spec.get('values', []), name)
    if kind == 'table':
        if not isinstance(spec.get('values'), dict):
            raise ConfigError(f"{key}.values", "must map words to numbers")
        return _wrap(key, Potential.from_mapping, s, spec.get('depth', 1), spec['values'], spec.get('default'), name)
    raise ConfigError(f"{key}.kind", f"must be one of constant, symbols, table (got {kind!r})")


def parse_measure(spec, s, key='measure'):
    """Built-in measure name, or {"kind": bernoulli|markov|mixture, ...}."""
    if isinstance(spec, str):
        mu = _wrap(key, builtins.get_measure, spec)
        if s is not None and mu.subshift != s:
            raise ConfigError(key, f"built-in measure {spec!r} lives on {mu.subshift}, not on {s}")
        return mu
    if not isinstance(spec, dict):
        raise ConfigError(key, "must be a built-in name or an object")
    kind = spec.get('kind')
    name = spec.get('name', '')
    if kind == 'mixture':
        components = spec.get('components')
        if not isinstance(components, list) or not components:
            raise ConfigError(f"{key}.components", "must be a nonempty list")
        parsed = []
        for i, c in enumerate(components):
            if isinstance(c, dict) and c.get('kind') == 'mixture':
                raise ConfigError(f"{key}.components[{i}]", "nested mixtures are not allowed")
            parsed.append(parse_measure(c, s, f"{key}.components[{i}]"))
        return _wrap(key, MixtureMeasure, spec.get('weights'), tuple(parsed), name)
    if s is None:
        raise ConfigError(key, "inline measures need a system to be defined")
    if kind == 'bernoulli':
        p = spec.get('p')
        if isinstance(p, (int, float)) and not isinstance(p, bool):
            p = [float(p), 1.0 - float(p)]
        return _wrap(key, BernoulliMeasure, s, p, name)
    if kind == 'markov':
        return _wrap(key, MarkovMeasure, s, spec.get('P'), spec.get('pi'), name)
    raise ConfigError(f"{key}.kind", f"must be one of bernoulli, markov, mixture (got {kind!r})")


def parse_model(spec, s, key='model'):
    """Built-in model name, {"kind": "repeller", "geometry": ...} or {"kind": "hyperbolic", ...}."""
    if isinstance(spec, str):
        model = _wrap(key, builtins.get_model, spec)
        if s is not None and model.base != s:
            raise ConfigError(key, f"built-in model {spec!r} lives on {model.base}, not on {s}")
        return model
    if not isinstance(spec, dict):
        raise ConfigError(key, "must be a built-in name or an object")
    kind = spec.get('kind')
    name = spec.get('name', '')
    if kind == 'repeller':
        geometry = parse_potential(spec.get('geometry'), s, f"{key}.geometry")
        return _wrap(key, RepellerModel, geometry, spec.get('ambient_dim', 1), name)
    if kind == 'hyperbolic':
        phi_u = parse_potential(spec.get('phi_u'), s, f"{key}.phi_u")
        phi_s = parse_potential(spec.get('phi_s'), s, f"{key}.phi_s")
        return _wrap(key, HyperbolicModel, phi_u, phi_s, bool(spec.get('volume_preserving', True)),
                     spec.get('ambient_dim', 2), name)
    raise ConfigError(f"{key}.kind", f"must be one of repeller, hyperbolic (got {kind!r})")


def _as_list(doc, key):
    value = doc.get(key)
    if value is None:
        return []
    return value if isinstance(value, list) else [value]


def _numbers(values, key, integer=False, low=None, high=None, strict_low=False):
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(key, f"values must be numbers (got {v!r})")
        if not math.isfinite(v):
            raise ConfigError(key, f"values must be finite (got {v!r})")
        if integer and int(v) != v:
            raise ConfigError(key, f"values must be integers (got {v!r})")
        if low is not None and (v <= low if strict_low else v < low):
            raise ConfigError(key, f"values must be {'>' if strict_low else '>='} {low} (got {v})")
        if high is not None and v > high:
            raise ConfigError(key, f"values must be <= {high} (got {v})")
        out.append(int(v) if integer else float(v))
    return tuple(out)


def parse_schedule(doc, task):
    """Validate the schedule block against the configured caps."""
    cfg = get_config()
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError('schedule', "must be an object")
    unknown = sorted(set(doc) - set(SCHEDULE_KEYS))
    if unknown:
        raise ConfigError(f"schedule.{unknown[0]}", f"unknown key; allowed keys are {', '.join(SCHEDULE_KEYS)}")
    cap = cfg.MAX_EXHAUSTIVE_N if task in EXHAUSTIVE_TASKS else cfg.MAX_ORBIT_LENGTH

    def values(key):
        v = doc.get(key, [])
        return v if isinstance(v, list) else [v]

    kwargs = {
        'n': _numbers(values('n'), 'schedule.n', integer=True, low=1, high=cap),
        'delta': _numbers(values('delta'), 'schedule.delta', low=0.0, high=1.0, strict_low=True),
        'theta': _numbers(values('theta'), 'schedule.theta', low=0.0, high=2.0, strict_low=True),
        'D': _numbers(values('D'), 'schedule.D', integer=True, low=1, high=cfg.MAX_EXHAUSTIVE_N),
        'N': _numbers(values('N'), 'schedule.N', integer=True, low=1, high=cfg.MAX_EXHAUSTIVE_N),
        'k': _numbers(values('k'), 'schedule.k', integer=True, low=2, high=8),
        'log_radii': _numbers(values('log_radii'), 'schedule.log_radii'),
    }
    if 'eps_exponents' in doc:
        kwargs['eps_exponents'] = _numbers(values('eps_exponents'), 'schedule.eps_exponents', integer=True, low=0, high=8)
    if 'L' in doc:
        kwargs['L'] = _numbers(values('L'), 'schedule.L', integer=True, low=1, high=cap)
    if any(r >= 0 for r in kwargs['log_radii']):
        raise ConfigError('schedule.log_radii', "values must be negative (natural log of radii < 1)")
    return Schedule(**kwargs)


def _require(cfg_items, key, task):
    if not cfg_items:
        raise ConfigError(key, f"is required for task {task!r}")


def parse_config(doc, default_output='results'):
    """
    Validate a config document.

    Args:
        doc: Parsed JSON tree.
        default_output: Output stem when the document has no output.path.

    Returns:
        ExperimentConfig.
    """
    if not isinstance(doc, dict):
        raise ConfigError('config', "top level must be an object")
    task = doc.get('task')
    if task not in TASKS:
        raise ConfigError('task', f"must be one of {', '.join(TASKS)} (got {task!r})")
    cfg = get_config()

    system = parse_system(doc['system']) if 'system' in doc else None
    if system is None:
        # built-in measures or models carry their own subshift
        for key in ('measure', 'measures', 'model', 'models'):
            for item in _as_list(doc, key):
                if isinstance(item, str):
                    try:
                        system = builtins.get_measure(item).subshift
                    except ValidationError:
                        system = _wrap(key, builtins.get_model, item).base
                    break
            if system is not None:
                break

    potentials = [parse_potential(p, system, f"potentials[{i}]") for i, p in enumerate(_as_list(doc, 'potentials'))]
    if 'potential' in doc:
        potentials.insert(0, parse_potential(doc['potential'], system, 'potential'))

    # without an explicit system every built-in measure keeps its own subshift
    def measure_system(item):
        return None if isinstance(item, str) and 'system' not in doc else system

    measure_items = [(f"measures[{i}]", m) for i, m in enumerate(_as_list(doc, 'measures'))]
    if 'measure' in doc:
        measure_items.insert(0, ('measure', doc['measure']))
    measures = [parse_measure(m, measure_system(m), key) for key, m in measure_items]
    models = [parse_model(m, system, f"models[{i}]") for i, m in enumerate(_as_list(doc, 'models'))]
    if 'model' in doc:
        models.insert(0, parse_model(doc['model'], system, 'model'))
    schedule = parse_schedule(doc.get('schedule'), task)

    if task in ('pressure', 'cp', 'sp') and system is None:
        raise ConfigError('system', f"is required for task {task!r}")
    if task in ('pressure', 'cp', 'sp', 'pointwise') and not potentials:
        potentials = [Potential.constant(system, 0.0, 'zero')] if system is not None else []
    if task in ('sp', 'entropy', 'pointwise', 'dimension', 'hyperbolic'):
        _require(measures, 'measures', task)
    if task != 'entropy':
        for (key, _), mu in zip(measure_items, measures):
            if system is not None and mu.subshift != system:
                raise ConfigError(key, f"measure {mu} lives on {mu.subshift}, not on {system}")
    if task in ('dimension', 'hyperbolic'):
        _require(models, 'models', task)
        wanted = RepellerModel if task == 'dimension' else HyperbolicModel
        for i, model in enumerate(models):
            if not isinstance(model, wanted):
                raise ConfigError(f"models[{i}]", f"task {task!r} needs {wanted.__name__} models")
    if task == 'sp' and not schedule.n:
        raise ConfigError('schedule.n', "is required for task 'sp'")
    if task == 'cp' and not schedule.N:
        raise ConfigError('schedule.N', "is required for task 'cp'")

    mode = doc.get('mode', 'n_eps')
    if mode not in ('n_eps', 'hamming'):
        raise ConfigError('mode', f"must be n_eps or hamming (got {mode!r})")
    if task == 'sp' and mode == 'hamming' and not schedule.delta:
        raise ConfigError('schedule.delta', "is required in hamming mode")

    seeds = _numbers(_as_list(doc, 'seeds'), 'seeds', integer=True, low=0)
    if task == 'pointwise' and not seeds:
        raise ConfigError('seeds', "is required for task 'pointwise'")
    orbit_length = doc.get('orbit_length', 10_000)
    _numbers([orbit_length], 'orbit_length', integer=True, low=1, high=cfg.MAX_ORBIT_LENGTH)
    samples_per_component = doc.get('samples_per_component', 50)
    _numbers([samples_per_component], 'samples_per_component', integer=True, low=0)

    cylinders = None
    if 'Z' in doc:
        if system is None:
            raise ConfigError('Z', "needs a system to be defined")
        if not isinstance(doc['Z'], list):
            raise ConfigError('Z', "must be a list of words")
        cylinders = _wrap('Z', CylinderUnion, system, tuple(doc['Z']))

    output = doc.get('output', {})
    if not isinstance(output, dict):
        raise ConfigError('output', "must be an object with path and format")
    fmt = output.get('format', 'csv')
    if fmt != 'csv':
        raise ConfigError('output.format', f"only csv is supported (got {fmt!r})")

    logger.info(f"config validated: task={task}, {len(potentials)} potentials, {len(measures)} measures, {len(models)} models")
    return ExperimentConfig(
        task=task,
        system=system,
        potentials=tuple(potentials),
        measures=tuple(measures),
        models=tuple(models),
        schedule=schedule,
        seeds=seeds,
        mode=mode,
        orbit_length=int(orbit_length),
        samples_per_component=int(samples_per_component),
        cylinders=cylinders,
        output_path=output.get('path', default_output),
        output_format=fmt,
        raw=doc,
    )
