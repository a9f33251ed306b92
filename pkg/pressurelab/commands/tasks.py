# pressurelab/commands/tasks.py

"""
Task handlers for the `run` command.

Each handler takes an ExperimentConfig, the worker-pool size and a TaskResult
to fill. Rows are appended group by group so a failure part-way through still
leaves the finished groups in place for a partial result file.

TASKS maps the config `task` value to (handler, columns, tolerance). Columns are
fixed per task; `flagged` is set on a row whose value is not finite or whose
diff exceeds the task tolerance. For sp the tolerance is held against the
series limit in `extrapolated` (the raw value when no fit is accepted),
and rows of a series without an accepted fit are flagged.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial

from pressurelab.errors import ValidationError
from pressurelab.models.measure import NeighborhoodSpec
from pressurelab.models.reports import SchedulePoint
from pressurelab.services.dimension import (
    bowen_root,
    hausdorff_dim_oracle,
    hyperbolic_pointwise_dim,
    hyperbolic_roots,
    pointwise_dim_estimate,
)
from pressurelab.services.measure_pressure import (
    esssup_consistency_check,
    mt_entropy,
    mt_pressure,
    pointwise_pressure,
)
from pressurelab.services.measures import block_entropy_rate, entropy, free_energy, integrate, sample_orbit
from pressurelab.services.pressure import (
    coupled_schedule,
    cp_crossing,
    cp_lower_upper,
    jump_up_point,
    limit_estimate,
    pressure_oracle,
    separated_pressure,
)
from pressurelab.services.symbolic_core import ball_depth, ball_span, hamming_ball_bound, hamming_ball_count
from pressurelab.utils.worker_pool import map_ordered

logger = logging.getLogger(__name__)

DEFAULT_SP_THETA = 0.05
LEMMA_GRID_STEP = 0.05
POINTWISE_MAX_TOLERANCE = 0.03
BOX_COUNT_TOLERANCE = 0.03
POINTWISE_DIM_TOLERANCE = 0.05


@dataclass
class TaskResult:
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def _diff(value, oracle):
    if oracle is None or value is None:
        return None
    if not (math.isfinite(value) and math.isfinite(oracle)):
        return math.inf
    return abs(value - oracle)


def _with_oracle(row, value, oracle, tolerance, checked=None):
    """
    Fill value, oracle, diff and flagged on a row.

    The tolerance is held against `checked` (default: value).
    """
    diff = _diff(value, oracle)
    off = diff if checked is None else _diff(checked, oracle)
    row['value'] = value
    row['oracle'] = oracle
    row['diff'] = diff
    row['flagged'] = bool(
        row.get('flagged') or not math.isfinite(value) or (off is not None and off > tolerance)
    )
    return row


def _label(obj):
    return str(obj)


def run_pressure(cfg, threads, result):
    """Jump-up point per (potential, eps, D); one row per minimal cover length N."""
    s, Z = cfg.system, cfg.cylinders
    sched = cfg.schedule
    depths = sched.D or (None,)
    points = [(phi, eps, D) for phi in cfg.potentials for eps in sched.eps_values for D in depths]

    def work(point):
        phi, eps, D = point
        N_schedule = None
        if sched.N:
            N_schedule = [N for N in sched.N if D is None or N <= D] or None
        return jump_up_point(s, phi, Z, N_schedule, eps, D)

    tolerance = TASKS['pressure'][2]
    for (phi, eps, _), report in zip(points, map_ordered(work, points, threads)):
        for N, alpha in report.trace:
            row = {'system': _label(s), 'potential': _label(phi), 'eps': eps, 'm': report.params['m'],
                   'D': report.params['D'], 'N': N}
            result.rows.append(_with_oracle(row, alpha, report.oracle, tolerance))


def run_cp(cfg, threads, result):
    """Uniform-length cover crossings per N, with the lower and upper surrogates over the N range."""
    s, Z = cfg.system, cfg.cylinders
    tolerance = TASKS['cp'][2]
    for phi in cfg.potentials:
        oracle = pressure_oracle(s, phi) if Z is None or Z.is_whole_space else None
        for eps in cfg.schedule.eps_values:
            lower, upper = cp_lower_upper(s, phi, Z, eps, cfg.schedule.N)
            crossings = map_ordered(lambda N: cp_crossing(s, phi, Z, N, eps), cfg.schedule.N, threads)
            for N, value in zip(cfg.schedule.N, crossings):
                row = {'system': _label(s), 'potential': _label(phi), 'eps': eps, 'm': ball_depth(eps),
                       'N': N, 'lower': lower, 'upper': upper}
                result.rows.append(_with_oracle(row, value, oracle, tolerance))


def _sp_points(sched, eps):
    ns = sorted(sched.n)
    if len(sched.theta) == len(ns) and len(ns) > 1:
        return [SchedulePoint(n, theta, eps) for n, theta in zip(ns, sched.theta)]
    theta = sched.theta[0] if sched.theta else DEFAULT_SP_THETA
    return coupled_schedule(ns, theta, eps)


def run_sp(cfg, threads, result):
    """Separated-set pressure series per (potential, measure, L, eps, delta), one row per schedule point."""
    s = cfg.system
    sched = cfg.schedule
    deltas = sched.delta if cfg.mode == 'hamming' else (None,)
    tolerance = TASKS['sp'][2]
    for phi in cfg.potentials:
        for mu in cfg.measures:
            oracle = free_energy(mu, phi).value
            for L in sched.L:
                for eps in sched.eps_values:
                    for delta in deltas:
                        points = _sp_points(sched, eps)

                        def work(point, mu=mu, L=L, delta=delta):
                            F = NeighborhoodSpec(mu, L, point.theta)
                            return separated_pressure(s, phi, F, point.n, point.eps, cfg.mode, delta)

                        reports = map_ordered(work, points, threads)
                        limit, fitted = limit_estimate([(p.n, r.value) for p, r in zip(points, reports)])
                        for point, report in zip(points, reports):
                            row = {'system': _label(s), 'potential': _label(phi), 'measure': _label(mu),
                                   'mode': cfg.mode, 'delta': delta, 'L': L, 'eps': eps, 'm': ball_depth(eps),
                                   'n': point.n, 'theta': point.theta,
                                   'cardinality': report.extras['cardinality'],
                                   'cylinders': report.extras['cylinders'],
                                   'extrapolated': limit, 'flagged': report.flagged or not fitted}
                            result.rows.append(_with_oracle(row, report.value, oracle, tolerance, checked=limit))
                        if not math.isfinite(reports[-1].value):
                            result.failures.append(
                                f"sp: empty X_(n,F) at the last schedule point n={points[-1].n} "
                                f"for {mu} (L={L}, eps={eps}, delta={delta})"
                            )


def run_entropy(cfg, threads, result):
    """Block entropy rate against the closed-form entropy, with the ess-sup entropy and the gap."""
    tolerance = TASKS['entropy'][2]
    ns = cfg.schedule.n or (2,)
    for mu in cfg.measures:
        oracle = entropy(mu).value
        gap = mt_entropy(mu)
        values = map_ordered(partial(block_entropy_rate, mu), ns, threads)
        for n, value in zip(ns, values):
            row = {'measure': _label(mu), 'n': n, 'esssup': gap.esssup, 'gap': gap.gap}
            result.rows.append(_with_oracle(row, value, oracle, tolerance))


def run_pointwise(cfg, threads, result):
    """
    Point-wise pressure per seed against the generating component's free energy.

    With samples_per_component > 0 every positive-weight component is also
    sampled on its own: one 'cluster' row per component (mean sample value
    against the component free energy, flagged when any sample strays beyond
    the sample tolerance). Each series ends with an 'esssup' row comparing the
    largest sampled value with mt_pressure.
    """
    sample_tol, max_tol = TASKS['pointwise'][2], POINTWISE_MAX_TOLERANCE
    ns = cfg.schedule.n or (cfg.orbit_length,)
    for mu in cfg.measures:
        for phi in cfg.potentials:
            parts = free_energy(mu, phi).components
            target = mt_pressure(mu, phi)
            for eps in cfg.schedule.eps_values:
                span = ball_span(ball_depth(eps), mu.subshift.sided)
                for n in ns:
                    def work(seed, n=n, eps=eps, span=span):
                        o = sample_orbit(mu, n + span + phi.depth - 1, seed)
                        return o.component_id, pointwise_pressure(mu, phi, o, n, eps)

                    samples = map_ordered(work, cfg.seeds, threads)
                    for seed, (cid, pp) in zip(cfg.seeds, samples):
                        row = {'row': 'sample', 'measure': _label(mu), 'potential': _label(phi), 'seed': seed,
                               'component': cid, 'n': n, 'eps': eps,
                               'local_entropy': pp.local_entropy.value,
                               'local_entropy_corrected': pp.local_entropy.corrected,
                               'birkhoff_average': pp.birkhoff_average, 'flagged': pp.flagged}
                        result.rows.append(_with_oracle(row, pp.value, parts[cid], sample_tol))
                        if pp.flagged:
                            result.failures.append(f"pointwise: zero-mass ball for seed {seed} of {mu}")
                    sample_max = max(pp.value for _, pp in samples)

                    if cfg.samples_per_component > 0:
                        check = esssup_consistency_check(mu, phi, n, cfg.samples_per_component, eps=eps,
                                                         cluster_tolerance=sample_tol, max_tolerance=max_tol)
                        for cluster in check.clusters:
                            row = {'row': 'cluster', 'measure': _label(mu), 'potential': _label(phi),
                                   'component': cluster.component_id, 'n': n, 'eps': eps,
                                   'flagged': not cluster.within_tolerance}
                            result.rows.append(_with_oracle(row, cluster.mean, cluster.oracle, sample_tol))
                        sample_max = max(sample_max, check.sample_max)

                    row = {'row': 'esssup', 'measure': _label(mu), 'potential': _label(phi), 'n': n, 'eps': eps}
                    result.rows.append(_with_oracle(row, sample_max, target, max_tol))


def _orbit_length_for(model, log_radii):
    geometry = model.geometry
    return int(math.ceil(-min(log_radii) / geometry.min)) + geometry.depth + 2


def run_dimension(cfg, threads, result):
    """
    Bowen root against the closed form for every (model, measure); with seeds and
    log_radii also the point-wise dimension per seed and radius.
    """
    root_tol, box_tol = TASKS['dimension'][2], BOX_COUNT_TOLERANCE
    log_radii = cfg.schedule.log_radii
    for model in cfg.models:
        for mu in cfg.measures:
            root = bowen_root(mu, model)
            oracle = hausdorff_dim_oracle(mu, model).value
            row = {'measure': _label(mu), 'model': _label(model), 'method': root.method,
                   'iterations': root.root_data['iterations'], 'flagged': root.flagged}
            result.rows.append(_with_oracle(row, root.value, oracle, root_tol))
            if not (log_radii and cfg.seeds):
                continue
            length = _orbit_length_for(model, log_radii)
            if length > cfg.orbit_length:
                raise ValidationError(
                    f"log r = {min(log_radii):g} needs orbits of length {length}, above orbit_length={cfg.orbit_length}"
                )

            def work(seed, mu=mu, model=model, length=length):
                o = sample_orbit(mu, length, seed)
                return o.component_id, pointwise_dim_estimate(mu, model, o, log_radii)

            for seed, (cid, report) in zip(cfg.seeds, map_ordered(work, cfg.seeds, threads)):
                for log_r, depth, estimate, lo, hi in zip(report.log_radii, report.depths, report.estimates,
                                                          report.lower, report.upper):
                    row = {'measure': _label(mu), 'model': _label(model), 'method': 'box_count', 'seed': seed,
                           'component': cid, 'log_r': log_r, 'depth': depth,
                           'lower': lo, 'upper': hi, 'flagged': report.flagged}
                    result.rows.append(_with_oracle(row, estimate, report.target, box_tol))


def run_hyperbolic(cfg, threads, result):
    """t_s + t_u against the closed form; with seeds also the point-wise formula per orbit."""
    root_tol, sample_tol = TASKS['hyperbolic'][2], POINTWISE_DIM_TOLERANCE
    eps = cfg.schedule.eps_values[0]
    ns = cfg.schedule.n or (cfg.orbit_length,)
    for model in cfg.models:
        for mu in cfg.measures:
            roots = hyperbolic_roots(mu, model)
            row = {'measure': _label(mu), 'model': _label(model), 'method': roots.method,
                   't_s': roots.root_data['t_s'], 't_u': roots.root_data['t_u'], 'flagged': roots.flagged}
            result.rows.append(_with_oracle(row, roots.value, roots.closed_form, root_tol))
            if not cfg.seeds:
                continue
            span = ball_span(ball_depth(eps), mu.subshift.sided)
            depth = max(model.phi_u.depth, model.phi_s.depth)
            h = entropy(mu).components
            for n in ns:
                def work(seed, mu=mu, model=model, n=n):
                    o = sample_orbit(mu, n + span + depth - 1, seed)
                    return o.component_id, hyperbolic_pointwise_dim(mu, model, o, n, eps)

                for seed, (cid, value) in zip(cfg.seeds, map_ordered(work, cfg.seeds, threads)):
                    nu = mu.components[cid]
                    oracle = h[cid] * (1.0 / integrate(nu, model.phi_u) - 1.0 / integrate(nu, model.phi_s))
                    row = {'measure': _label(mu), 'model': _label(model), 'method': 'pointwise', 'seed': seed,
                           'component': cid, 'n': n}
                    result.rows.append(_with_oracle(row, value, oracle, sample_tol))


def _delta_grid(k):
    top = (k - 1) / k
    return [round(LEMMA_GRID_STEP * i, 10) for i in range(1, int(top / LEMMA_GRID_STEP + 1e-9) + 1)]


def run_lemma_check(cfg, threads, result):
    """Exact Hamming-ball sizes against the cardinality bound on a (k, n, delta) grid."""
    ks = cfg.schedule.k or (2, 3, 4)
    ns = cfg.schedule.n or tuple(range(1, 13))
    for k in ks:
        deltas = [d for d in cfg.schedule.delta if d <= (k - 1) / k + 1e-12] if cfg.schedule.delta else _delta_grid(k)
        for n in ns:
            for delta in deltas:
                exact = hamming_ball_count(k, n, delta)
                bound = hamming_ball_bound(k, n, delta)
                ok = bound >= exact * (1.0 - 1e-12)
                result.rows.append({'k': k, 'n': n, 'delta': delta, 'exact': exact, 'bound': bound, 'ok': ok})
                if not ok:
                    result.failures.append(f"lemma-check: bound {bound:.6g} < exact {exact} at k={k}, n={n}, delta={delta}")
    logger.info(f"lemma-check: {len(result.rows)} grid points, {len(result.failures)} violations")


TASKS = {
    'pressure': (run_pressure,
                 ('system', 'potential', 'eps', 'm', 'D', 'N', 'value', 'oracle', 'diff', 'flagged'), 0.02),
    'cp': (run_cp,
           ('system', 'potential', 'eps', 'm', 'N', 'value', 'lower', 'upper', 'oracle', 'diff', 'flagged'), 0.05),
    'sp': (run_sp,
           ('system', 'potential', 'measure', 'mode', 'delta', 'L', 'eps', 'm', 'n', 'theta', 'value',
            'cardinality', 'cylinders', 'oracle', 'diff', 'extrapolated', 'flagged'), 0.08),
    'entropy': (run_entropy,
                ('measure', 'n', 'value', 'oracle', 'diff', 'esssup', 'gap', 'flagged'), 1e-9),
    'pointwise': (run_pointwise,
                  ('row', 'measure', 'potential', 'seed', 'component', 'n', 'eps', 'local_entropy',
                   'local_entropy_corrected', 'birkhoff_average', 'value', 'oracle', 'diff', 'flagged'), 0.05),
    'dimension': (run_dimension,
                  ('measure', 'model', 'method', 'seed', 'component', 'log_r', 'depth', 'value', 'lower', 'upper',
                   'oracle', 'diff', 'iterations', 'flagged'), 1e-8),
    'hyperbolic': (run_hyperbolic,
                   ('measure', 'model', 'method', 'seed', 'component', 'n', 't_s', 't_u', 'value', 'oracle', 'diff',
                    'flagged'), 1e-8),
    'lemma-check': (run_lemma_check, ('k', 'n', 'delta', 'exact', 'bound', 'ok'), 0.0),
}


def execute(cfg, threads, result):
    """
    Run the handler for cfg.task, appending rows and failures to result.

    Exceptions propagate; rows appended before the failure stay in result.
    """
    handler = TASKS[cfg.task][0]
    logger.info(f"task {cfg.task} started")
    handler(cfg, threads, result)
    flagged = sum(1 for row in result.rows if row.get('flagged'))
    logger.info(f"task {cfg.task} finished: {len(result.rows)} rows, {flagged} flagged, {len(result.failures)} failures")
    return result
