# pressurelab/services/pressure.py

"""
Pressure functionals on subshifts of finite type.

Core responsibilities:
- pressure_oracle(): exact topological pressure as the log Perron root of the
  higher-block transfer matrix (power iteration with Collatz-Wielandt bounds).
- Caratheodory-Pesin cover functionals: cp_cover_value() (exact infimum over
  covers by dynamical balls, via dynamic programming on the cylinder tree),
  jump_up_point(), cp_uniform_value() and the lower/upper crossings.
- Separated-set pressure over X_{n,F}: separated_pressure() and the scheduled
  sp_estimate() with its finite-size extrapolation.
- cp_measure_pressure(): exploratory direct estimate of P_mu on a high-mass set Z.

Under the dyadic metric a dynamical ball B_n(x, eps) is a cylinder of length
n + span (span = m one-sided, 2m two-sided), so every functional here is exact
cylinder combinatorics at its scale.

Used by:
- commands.tasks (pressure, cp and sp tasks)
- services.builtins (catalog oracle values)
"""

import logging
import math

import numpy as np
from scipy.optimize import bisect
from scipy.special import logsumexp

from config import get_config
from pressurelab.errors import NumericalError, ValidationError
from pressurelab.models.measure import NeighborhoodSpec
from pressurelab.models.reports import EstimateReport, SchedulePoint
from pressurelab.models.subshift import CylinderUnion, is_irreducible
from pressurelab.services.measure_pressure import mt_pressure
from pressurelab.services.measures import (
    empirical_frequencies,
    free_energy,
    log_cylinder_masses,
    marginal,
    tv_distances,
)
from pressurelab.services.symbolic_core import (
    ball_depth,
    ball_span,
    birkhoff_sums,
    hamming_params,
    select_separated,
    sup_birkhoff,
    word_array,
    words_to_codes,
)

logger = logging.getLogger(__name__)

DEFAULT_SP_NS = (8, 10, 12, 14, 16, 18)


def _default_depth(s):
    return get_config().DEPTH_CAP.get(s.alphabet_size, 8)


def transfer_matrix(s, phi):
    """
    Higher-block transfer matrix indexed by admissible k_phi-words.

    Entry (u, v) is e^{phi(u)} when v continues u by one symbol.
    """
    k = s.alphabet_size
    words = word_array(s, phi.depth).astype(np.int64)
    weights = np.exp(phi.values[words_to_codes(words, k)])
    if phi.depth > 1:
        overlap = words_to_codes(words[:, 1:], k)[:, None] == words_to_codes(words[:, :-1], k)[None, :]
    else:
        overlap = np.ones((len(words), len(words)), dtype=bool)
    step = s.matrix[words[:, -1][:, None], words[:, -1][None, :]].astype(bool)
    return np.where(overlap & step, weights[:, None], 0.0)


def pressure_oracle(s, phi, tol=None, max_iter=None):
    """
    Topological pressure P(f, phi) = log spectral radius of the transfer matrix.

    Args:
        s: Irreducible subshift.
        phi: Potential on s.
        tol: Relative gap between the Collatz-Wielandt bounds at which to stop.
        max_iter: Iteration cap.

    Returns:
        The pressure as a float.
    """
    cfg = get_config()
    tol = cfg.POWER_ITER_TOL if tol is None else tol
    max_iter = cfg.POWER_ITER_MAX if max_iter is None else max_iter
    if phi.subshift != s:
        raise ValidationError("potential lives on a different subshift")

    A = transfer_matrix(s, phi)
    if not is_irreducible(A):
        raise NumericalError("oracle undefined: induced transfer matrix is reducible")

    # A + cI is primitive and shares the Perron vector of A
    shift = float(A.sum(axis=1).min())
    B = A + shift * np.eye(len(A))
    x = np.full(len(A), 1.0 / len(A))
    for iteration in range(1, max_iter + 1):
        y = B @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        x = y / y.sum()
        if hi - lo <= tol * hi:
            rho = 0.5 * (lo + hi) - shift
            logger.debug(f"pressure_oracle converged in {iteration} iterations (rho={rho:.15g})")
            return float(math.log(rho))
    raise NumericalError(f"power iteration did not converge in {max_iter} iterations")


class _CoverTree:
    """
    Cylinder tree of depth D + span with everything M(alpha, N) needs.

    Each level stores the ball length n of its nodes, the sup of S_n phi over
    each node, whether the node meets Z, and where each parent's children start
    in the (lexicographically sorted) child level.
    """

    def __init__(self, s, phi, Z, eps, D):
        if Z.subshift != s or phi.subshift != s:
            raise ValidationError("Z, potential and subshift must agree")
        m = ball_depth(eps)
        self.span = ball_span(m, s.sided)
        self.offset = m if s.two_sided else 0
        self.D = D
        k = s.alphabet_size
        self.levels = []
        for d in range(1, D + self.span + 1):
            arr = word_array(s, d)
            n = d - self.span
            z_len = min(max(d - self.offset, 0), Z.length)
            if z_len:
                meets = np.isin(words_to_codes(arr[:, self.offset:self.offset + z_len], k), Z.codes(z_len))
            else:
                meets = np.ones(len(arr), dtype=bool)
            sup_s = sup_birkhoff(s, phi, arr, n, start=self.offset) if n >= 1 else None
            starts = None
            if d > 1:
                parents = words_to_codes(arr[:, :-1], k)
                starts = np.flatnonzero(np.r_[True, parents[1:] != parents[:-1]])
            self.levels.append({'n': n, 'meets': meets, 'sup': sup_s, 'starts': starts})
        logger.debug(f"cover tree built: depth {len(self.levels)}, {len(self.levels[-1]['meets'])} leaves")

    def log_total(self, alpha, N):
        """log M(Z, phi, alpha, N, eps) with balls of length N <= n <= D."""
        if N > self.D:
            raise NumericalError(f"insufficient depth: D={self.D} cannot carry covers with n >= N={N}")
        cost = None
        with np.errstate(invalid='ignore'):
            for level in reversed(self.levels):
                own = None
                if level['n'] >= N:
                    own = np.where(level['meets'], -alpha * level['n'] + level['sup'], -np.inf)
                if cost is None:
                    cost = own
                else:
                    children = np.logaddexp.reduceat(cost, child_starts)
                    cost = children if own is None else np.minimum(own, children)
                child_starts = level['starts']
        return float(logsumexp(cost))


def cp_cover_value(s, phi, Z, p):
    """
    M(Z, phi, alpha, N, eps): infimum over covers of Z by balls B_{n_i}(x_i, eps), N <= n_i <= D.

    Args:
        s: Subshift.
        phi: Potential.
        Z: CylinderUnion.
        p: CpParams (alpha, N, eps, D).

    Returns:
        The exact infimum (float; may overflow to inf for very negative alpha).
    """
    tree = _CoverTree(s, phi, Z, p.eps, p.D)
    return float(np.exp(tree.log_total(p.alpha, p.N)))


def _crossing(log_m, lo, hi, tol):
    """Root of the decreasing function log_m, growing [lo, hi] until it brackets a sign change."""
    width = max(hi - lo, 1.0)
    for _ in range(60):
        if log_m(lo) > 0:
            break
        lo -= width
        width *= 2
    else:
        raise NumericalError("jump-up bisection: could not find a lower bracket")
    width = max(hi - lo, 1.0)
    for _ in range(60):
        if log_m(hi) < 0:
            break
        hi += width
        width *= 2
    else:
        raise NumericalError("jump-up bisection: could not find an upper bracket")
    logger.debug(f"jump-up bracket [{lo:.6g}, {hi:.6g}]")
    return bisect(log_m, lo, hi, xtol=tol)


def jump_up_point(s, phi, Z=None, N_schedule=None, eps=1.0, D=None, tol=None):
    """
    Finite-scale P_Z(f, phi, eps): the alpha where M(Z, phi, alpha, N, eps) crosses 1.

    Args:
        s: Subshift.
        phi: Potential.
        Z: CylinderUnion (default: whole space).
        N_schedule: Increasing minimal cover lengths (default: D/4, D/2, 3D/4, D).
        eps: Ball radius.
        D: Depth cap (default from config DEPTH_CAP).
        tol: Bisection tolerance (default config JUMP_TOL).

    Returns:
        EstimateReport whose trace holds (N, crossing) pairs; value is the crossing at the last N.
    """
    Z = CylinderUnion.whole_space(s) if Z is None else Z
    D = _default_depth(s) if D is None else D
    tol = get_config().JUMP_TOL if tol is None else tol
    if N_schedule is None:
        N_schedule = sorted({max(1, D // 4), max(1, D // 2), max(1, 3 * D // 4), D})
    N_schedule = list(N_schedule)
    if not N_schedule or any(N < 1 for N in N_schedule):
        raise ValidationError("N_schedule must be a nonempty list of positive integers")
    if max(N_schedule) > D:
        raise NumericalError(f"insufficient depth: D={D} is below N={max(N_schedule)}")

    tree = _CoverTree(s, phi, Z, eps, D)
    lo = phi.min - 1.0
    hi = math.log(s.alphabet_size) + phi.max + 1.0
    trace = []
    for N in N_schedule:
        alpha = _crossing(lambda a: tree.log_total(a, N), lo, hi, tol)
        trace.append((N, alpha))
        logger.debug(f"jump-up crossing at N={N}: {alpha:.8f}")

    oracle = pressure_oracle(s, phi) if Z.is_whole_space else None
    return EstimateReport(
        value=trace[-1][1],
        params={'eps': eps, 'm': ball_depth(eps), 'D': D, 'N': N_schedule[-1], 'z_cylinders': len(Z.words)},
        trace=tuple(trace),
        oracle=oracle,
    )


def _uniform_log_terms(s, phi, Z, N, eps):
    """sup S_N phi over every (N + span)-cylinder meeting Z."""
    Z = CylinderUnion.whole_space(s) if Z is None else Z
    m = ball_depth(eps)
    span, offset = ball_span(m, s.sided), (m if s.two_sided else 0)
    length = N + span
    arr = word_array(s, length)
    z_len = min(max(length - offset, 0), Z.length)
    if z_len:
        k = s.alphabet_size
        arr = arr[np.isin(words_to_codes(arr[:, offset:offset + z_len], k), Z.codes(z_len))]
    return sup_birkhoff(s, phi, arr, N, start=offset)


def cp_uniform_value(s, phi, Z, alpha, N, eps=1.0):
    """
    R(Z, phi, alpha, N, eps): covers by balls of the single length N.

    The infimum is attained by the (N + span)-cylinders that meet Z.
    """
    if N < 1:
        raise ValidationError(f"N must be >= 1 (got {N})")
    terms = _uniform_log_terms(s, phi, Z, N, eps)
    return float(np.exp(logsumexp(-alpha * N + terms)))


def cp_crossing(s, phi, Z, N, eps=1.0):
    """The alpha at which R(Z, phi, alpha, N, eps) = 1, i.e. (1/N) log sum e^{sup S_N phi}."""
    return float(logsumexp(_uniform_log_terms(s, phi, Z, N, eps)) / N)


def cp_lower_upper(s, phi, Z, eps, N_range):
    """
    Lower and upper pressure surrogates: min and max of the R-crossings over N_range.

    Returns:
        (lower, upper) tuple.
    """
    crossings = [cp_crossing(s, phi, Z, N, eps) for N in N_range]
    if not crossings:
        raise ValidationError("N_range must not be empty")
    return min(crossings), max(crossings)


def separated_pressure(s, phi, F, n, eps=1.0, mode='n_eps', delta=None, order='weighted'):
    """
    P(F; phi, n, eps) or, in hamming mode, P(F; phi, delta, n, eps).

    X_{n,F} is built at the word level: every admissible word long enough to
    determine the ball and S_n phi is kept when the depth-L empirical of its
    first n symbols lies in F. Distinct ball cylinders are (n, eps)-separated,
    so n_eps mode sums e^{sup S_n phi} over all surviving cylinders; hamming mode
    first extracts a greedy maximal Hamming-separated subset of them.

    Args:
        s: Subshift.
        phi: Potential.
        F: NeighborhoodSpec (center, L, theta).
        n: Number of iterates.
        eps: Ball radius.
        mode: 'n_eps' or 'hamming'.
        delta: Fraction for hamming mode.
        order: Scan order for the hamming extraction.

    Returns:
        EstimateReport with value (1/n) log of the sum; -inf and flagged when X_{n,F} is empty.
        extras carries the separated-set cardinality and |X_{n,F}| at cylinder level.
    """
    if F.center.subshift != s or phi.subshift != s:
        raise ValidationError("neighborhood center, potential and subshift must agree")
    L = F.depth
    if L > n:
        raise ValidationError(f"neighborhood depth L={L} exceeds n={n}")
    k = s.alphabet_size
    m = ball_depth(eps)
    span, offset = ball_span(m, s.sided), (m if s.two_sided else 0)
    cyl_len = n + span
    arr = word_array(s, max(cyl_len, offset + n + phi.depth - 1))

    freqs = empirical_frequencies(arr[:, offset:offset + n], L, k)
    keep = tv_distances(freqs, marginal(F.center, L)) < F.radius
    params = {'n': n, 'eps': eps, 'm': m, 'L': L, 'theta': F.radius, 'mode': mode}
    if mode == 'hamming':
        delta = hamming_params(delta, k)
        params['delta'] = delta.delta

    if not keep.any():
        logger.warning(f"X_(n,F) is empty at n={n}, theta={F.radius}, L={L}")
        return EstimateReport(value=-np.inf, params=params, trace=((n, -np.inf),), flagged=True,
                              extras={'cardinality': 0, 'cylinders': 0})

    arr = arr[keep]
    sums = birkhoff_sums(phi, arr, n, start=offset)
    prefix = words_to_codes(arr[:, :cyl_len], k)
    starts = np.flatnonzero(np.r_[True, prefix[1:] != prefix[:-1]])
    sup_s = np.maximum.reduceat(sums, starts)

    if mode == 'n_eps':
        chosen = np.arange(len(starts))
    else:
        cylinders = arr[starts, :cyl_len]
        chosen = select_separated(cylinders, 'hamming', n, span, delta, order,
                                  weights=np.exp(sup_s - sup_s.max()), k=k)
    value = float(logsumexp(sup_s[chosen]) / n)
    logger.debug(f"separated_pressure n={n} mode={mode}: {len(chosen)} of {len(starts)} cylinders, value={value:.6f}")
    return EstimateReport(value=value, params=params, trace=((n, value),),
                          extras={'cardinality': int(len(chosen)), 'cylinders': int(len(starts))})


def coupled_schedule(ns=DEFAULT_SP_NS, theta=0.05, eps=1.0):
    """Schedule with theta_n = theta * sqrt(n_last / n), capped at 2."""
    ns = sorted(ns)
    return [SchedulePoint(n, min(2.0, theta * math.sqrt(ns[-1] / n)), eps) for n in ns]


def _is_monotone(values, tol=1e-12):
    steps = np.diff(values)
    return bool((steps >= -tol).all() or (steps <= tol).all())


def extrapolate_trace(trace):
    """
    Least-squares fit v(n) = a + b log(n)/n + c/n over the finite trace points.

    A trace that rises and falls (lattice jitter of narrow neighbourhoods)
    is refused.

    Returns:
        a, or None with fewer than three finite points or a non-monotone trace.
    """
    pts = sorted((n, v) for n, v in trace if np.isfinite(v))
    if len(pts) < 3:
        return None
    n = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts])
    if not _is_monotone(v):
        logger.warning(f"trace over n={[int(x) for x in n]} is not monotone; no extrapolation")
        return None
    design = np.column_stack([np.ones_like(n), np.log(n) / n, 1.0 / n])
    return float(np.linalg.lstsq(design, v, rcond=None)[0][0])


def limit_estimate(trace):
    """
    (estimate, fitted) for a trace: the extrapolated limit when the fit is
    accepted, otherwise the last trace value with fitted = False.
    """
    fitted = extrapolate_trace(trace)
    if fitted is None:
        return float(trace[-1][1]), False
    return fitted, True


def sp_estimate(s, phi, mu, schedule=None, mode='n_eps', delta=None, L=1, order='weighted'):
    """
    Separated-set pressure along a schedule, against the free-energy oracle.

    Args:
        s: Subshift.
        phi: Potential.
        mu: Center measure of the neighbourhoods.
        schedule: SchedulePoints with n increasing (default coupled_schedule()).
        mode: 'n_eps' or 'hamming'.
        delta: Fraction for hamming mode.
        L: Neighbourhood depth.
        order: Scan order for the hamming extraction.

    Returns:
        EstimateReport with the trace over n, the free-energy oracle and the limit
        estimate: the extrapolated value, or the last value (flagged, extras
        fitted=False) when the trace is too short or not monotone.
    """
    schedule = coupled_schedule() if schedule is None else list(schedule)
    if not schedule:
        raise ValidationError("sp schedule must not be empty")
    trace, last = [], None
    for point in schedule:
        F = NeighborhoodSpec(mu, L, point.theta)
        last = separated_pressure(s, phi, F, point.n, point.eps, mode, delta, order)
        trace.append((point.n, last.value))
    oracle = free_energy(mu, phi).value
    extrapolated, fitted = limit_estimate(trace)
    logger.info(f"sp_estimate ({mode}): value={trace[-1][1]:.6f}, oracle={oracle:.6f}, extrapolated={extrapolated}")
    return EstimateReport(
        value=trace[-1][1],
        params=dict(last.params),
        trace=tuple(trace),
        flagged=last.flagged or not fitted,
        oracle=oracle,
        extrapolated=extrapolated,
        extras=dict(last.extras, fitted=fitted),
    )


def cp_measure_pressure(s, phi, mu, ell, delta, N_schedule=None, eps=1.0, D=None):
    """
    Exploratory direct estimate of P_mu: jump-up point on a high-mass set Z.

    Z is the smallest union of ell-cylinders, taken by descending mu-mass
    (lexicographic tie-break), with mu(Z) >= 1 - delta.

    Returns:
        EstimateReport flagged exploratory in extras, with the ess-sup oracle attached.
    """
    if not 0.0 <= delta < 1.0:
        raise ValidationError(f"delta must lie in [0, 1) (got {delta})")
    words = word_array(s, ell)
    masses = np.exp(log_cylinder_masses(mu, words))
    order = np.lexsort((np.arange(len(words)), -masses))
    cumulative = np.cumsum(masses[order])
    size = int(np.searchsorted(cumulative, 1.0 - delta - 1e-12)) + 1
    size = min(size, len(words))
    Z = CylinderUnion(s, tuple(tuple(int(x) for x in words[i]) for i in order[:size]))
    report = jump_up_point(s, phi, Z, N_schedule, eps, D)
    extras = {'exploratory': True, 'z_cylinders': size, 'z_mass': float(cumulative[size - 1])}
    return EstimateReport(value=report.value, params=dict(report.params, ell=ell, delta=delta),
                          trace=report.trace, oracle=mt_pressure(mu, phi), extras=extras)
