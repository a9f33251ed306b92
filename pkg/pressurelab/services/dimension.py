# pressurelab/services/dimension.py

"""
Dimension of measures on repeller and hyperbolic models.

Core responsibilities:
- bowen_root(): root t0 of P_mu(-t phi_geom) = 0 using the exact ess-sup
  pressure oracle, found by doubling a bracket and bisecting.
- hausdorff_dim_oracle(): closed form max_i h_i / lambda_i.
- pointwise_dim_estimate(): log mu(B(x, r)) / log r from coding cylinders,
  bracketed by the adjacent depth.
- hyperbolic_roots(): t_s + t_u for volume-preserving hyperbolic surrogates,
  cross-checked against max_i h_i (1/lambda_u - 1/lambda_s).
- hyperbolic_pointwise_dim(): the same quantity from local entropy and
  Birkhoff averages along one orbit.
- entropy_matched_bernoulli(): Bernoulli measure with a prescribed entropy.

Used by:
- commands.tasks (dimension and hyperbolic tasks)
- services.builtins (hyperbolic surrogate measures, catalog oracles)
"""

import logging
import math

import numpy as np
from scipy.optimize import bisect, brentq
from scipy.stats import entropy as shannon_entropy

from config import get_config
from pressurelab.errors import HypothesisError, NumericalError, ValidationError
from pressurelab.models.measure import BernoulliMeasure
from pressurelab.models.reports import DimensionResult, PointwiseDimensionReport
from pressurelab.services.measure_pressure import birkhoff_average, local_entropy, orbit_offset
from pressurelab.services.measures import entropy, integrate, prefix_log_masses
from pressurelab.services.symbolic_core import window_codes

logger = logging.getLogger(__name__)


def _positive_components(mu, phi):
    """(h_i, integral of phi d nu_i) for every positive-weight component."""
    hs = entropy(mu).components
    out = []
    for h, c, nu in zip(hs, mu.weights, mu.components):
        if c > 0:
            out.append((h, integrate(nu, phi)))
    return out


def _root_of_max(pairs, tol):
    """
    Root of P(t) = max_i (h_i - t lam_i) with every lam_i > 0.

    Returns:
        (t0, root_data dict).
    """
    def pressure(t):
        return max(h - t * lam for h, lam in pairs)

    if pressure(0.0) == 0.0:
        return 0.0, {'t0': 0.0, 'bracket': (0.0, 0.0), 'iterations': 0}
    T = 1.0
    for _ in range(200):
        if pressure(T) < 0:
            break
        T *= 2.0
    else:
        raise NumericalError("Bowen bracket did not close: pressure stays nonnegative")
    # strictly decreasing on the bracket
    if not pressure(0.0) > pressure(T / 2) > pressure(T):
        raise NumericalError("Bowen pressure function is not strictly decreasing on the bracket")
    t0, info = bisect(pressure, 0.0, T, xtol=tol, full_output=True)
    return float(t0), {'t0': float(t0), 'bracket': (0.0, T), 'iterations': info.iterations}


def bowen_root(mu, model, tol=None):
    """
    t0 with P_mu(f, -t0 phi_geom) = 0.

    Args:
        mu: Measure on model.base.
        model: RepellerModel.
        tol: Bisection tolerance (default config ROOT_TOL).

    Returns:
        DimensionResult(method='bowen_root') with the closed form attached.
    """
    if mu.subshift != model.base:
        raise ValidationError("measure does not live on the model's base subshift")
    tol = get_config().ROOT_TOL if tol is None else tol
    pairs = _positive_components(mu, model.geometry)
    t0, root_data = _root_of_max(pairs, tol)
    closed = max(h / lam for h, lam in pairs)
    flagged = t0 > model.ambient_dim + tol
    if flagged:
        logger.warning(f"dimension {t0:.6f} exceeds ambient dimension {model.ambient_dim}")
    logger.debug(f"bowen_root {mu} on {model}: t0={t0:.12f} in {root_data['iterations']} iterations")
    return DimensionResult(t0, 'bowen_root', root_data, closed, flagged)


def hausdorff_dim_oracle(mu, model):
    """dim_H mu = max over positive-weight components of h_i / lambda_i."""
    if mu.subshift != model.base:
        raise ValidationError("measure does not live on the model's base subshift")
    value = max(h / lam for h, lam in _positive_components(mu, model.geometry))
    return DimensionResult(value, 'closed_form', closed_form=value)


def pointwise_dim_estimate(mu, model, o, log_radii):
    """
    Point-wise dimension log mu(B(x, r)) / log r along a radius schedule.

    The ball is replaced by the deepest coding cylinder whose interval length
    exp(-S_d phi_geom) is still >= r; the next depth gives the other bracket.

    Args:
        mu: Measure.
        model: RepellerModel.
        o: OrbitSample coding the point.
        log_radii: Natural logs of the radii (negative, decreasing).

    Returns:
        PointwiseDimensionReport; value is the estimate at the smallest radius.
    """
    log_radii = [float(r) for r in log_radii]
    if not log_radii or any(r >= 0 for r in log_radii):
        raise ValidationError("log_radii must be a nonempty list of negative numbers")
    geometry = model.geometry
    codes = window_codes(o.word, geometry.depth, geometry.subshift.alphabet_size)[0]
    log_lengths = -np.concatenate([[0.0], np.cumsum(geometry.values[codes])])
    log_masses = prefix_log_masses(mu, o.word)

    depths, estimates, lower, upper = [], [], [], []
    flagged = False
    for log_r in log_radii:
        d = int(np.searchsorted(-log_lengths, -log_r + 1e-12, side='right')) - 1
        if d + 1 >= min(len(log_lengths), len(log_masses)):
            raise ValidationError(f"orbit of length {len(o.word)} too short for log r = {log_r:g}")
        a = log_masses[d] / log_r
        b = log_masses[d + 1] / log_r
        if not (np.isfinite(a) and np.isfinite(b)):
            flagged = True
        depths.append(d)
        estimates.append(float(a))
        lower.append(float(min(a, b)))
        upper.append(float(max(a, b)))

    target = None
    if o.component_id is not None:
        nu = mu.components[o.component_id]
        target = float(entropy(nu).value / integrate(nu, geometry))
    return PointwiseDimensionReport(tuple(log_radii), tuple(depths), tuple(estimates),
                                    tuple(lower), tuple(upper), estimates[-1], target, flagged)


def _check_volume(mu, model):
    if not model.volume_preserving:
        raise HypothesisError("volume-preserving hypothesis fails: model is not flagged volume preserving")
    tol = get_config().VOLUME_TOL
    out = []
    for h, c, nu in zip(entropy(mu).components, mu.weights, mu.components):
        if c <= 0:
            continue
        lam_u, lam_s = integrate(nu, model.phi_u), integrate(nu, model.phi_s)
        if abs(lam_u + lam_s) > tol:
            raise HypothesisError(
                f"volume-preserving hypothesis fails: int phi_u = {lam_u:.12g}, int phi_s = {lam_s:.12g}"
            )
        out.append((h, lam_u, lam_s))
    return out


def hyperbolic_roots(mu, model, tol=None):
    """
    dim_H mu = t_s + t_u on a volume-preserving hyperbolic surrogate.

    t_u solves max_i (h_i - t lambda_u,i) = 0 and t_s solves max_i (h_i + t lambda_s,i) = 0.

    Raises:
        HypothesisError when the model is not volume preserving for some positive-weight component.
    """
    if mu.subshift != model.base:
        raise ValidationError("measure does not live on the model's base subshift")
    tol = get_config().ROOT_TOL if tol is None else tol
    parts = _check_volume(mu, model)
    t_u, data_u = _root_of_max([(h, lu) for h, lu, _ in parts], tol)
    t_s, data_s = _root_of_max([(h, -ls) for h, _, ls in parts], tol)
    closed = max(h * (1.0 / lu - 1.0 / ls) for h, lu, ls in parts)
    value = t_s + t_u
    if abs(value - closed) > 10 * tol:
        logger.warning(f"hyperbolic roots {value:.12f} disagree with closed form {closed:.12f}")
    flagged = value > model.ambient_dim + tol
    if flagged:
        logger.warning(f"dimension {value:.6f} exceeds ambient dimension {model.ambient_dim}")
    root_data = {'t_s': t_s, 't_u': t_u, 'bracket_s': data_s['bracket'], 'bracket_u': data_u['bracket'],
                 'iterations': data_s['iterations'] + data_u['iterations']}
    return DimensionResult(value, 'bowen_root', root_data, closed, flagged)


def hyperbolic_pointwise_dim(mu, model, o, n, eps=1.0):
    """
    h_mu(x) (1/lambda_u(x) - 1/lambda_s(x)) from one orbit sample.

    Lyapunov averages start at the point x, index orbit_offset() of the sampled
    word (m on the two-sided base), while the local entropy covers [-m, n+m).
    """
    h = local_entropy(mu, o, n, eps)
    start = orbit_offset(mu.subshift, eps)
    lam_u = birkhoff_average(model.phi_u, o, n, start=start)
    lam_s = birkhoff_average(model.phi_s, o, n, start=start)
    return float(h.value * (1.0 / lam_u - 1.0 / lam_s))


def entropy_matched_bernoulli(s, h, name=''):
    """
    Bernoulli measure p = (a, (1-a)/(k-1), ...) on a full shift with entropy exactly h.

    Args:
        s: Full shift with k >= 2 symbols.
        h: Target entropy in (0, log k].
    """
    k = s.alphabet_size
    if not s.is_full:
        raise ValidationError("entropy matching needs a full shift")
    if not 0.0 < h <= math.log(k) + 1e-15:
        raise ValidationError(f"target entropy must lie in (0, log {k}] (got {h})")

    def vector(a):
        return np.r_[a, np.full(k - 1, (1.0 - a) / (k - 1))]

    if abs(h - math.log(k)) <= 1e-15:
        a = 1.0 / k
    else:
        a = brentq(lambda x: shannon_entropy(vector(x)) - h, 1.0 / k, 1.0 - 1e-15, xtol=1e-15)
    p = vector(a)
    p[-1] = 1.0 - p[:-1].sum()
    return BernoulliMeasure(s, tuple(p), name)
