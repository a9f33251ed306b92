# pressurelab/services/measure_pressure.py

"""
Point-wise and measure-theoretic pressure.

Core responsibilities:
- local_entropy(): Brin-Katok local entropy along a sampled orbit; the
  dynamical ball is a cylinder, so the mass is exact.
- birkhoff_average(), pointwise_pressure() = local entropy + Birkhoff average.
- mt_pressure(): ess-sup of the ergodic free energies (max over positive-weight
  components), mt_entropy() with the gap E_mu - h_mu.
- esssup_consistency_check(): statistical check that point-wise pressures
  cluster at the component free energies and that their max reaches mt_pressure.

Used by:
- services.pressure (oracle for the exploratory direct estimate)
- services.dimension (Bowen roots use the same ess-sup structure)
- commands.tasks (pointwise and entropy tasks)
"""

import logging
import math

import numpy as np

from pressurelab.errors import ValidationError
from pressurelab.models.reports import (
    ComponentCluster,
    EntropyGap,
    EssSupReport,
    LocalEntropy,
    PointwisePressure,
)
from pressurelab.services.measures import entropy, free_energy, log_cylinder_masses, sample_orbit
from pressurelab.services.symbolic_core import ball_depth, ball_span, birkhoff_sums

logger = logging.getLogger(__name__)


def local_entropy(mu, o, n, eps=1.0):
    """
    -(1/n) log mu(B_n(x, eps)) for the point coded by an orbit sample.

    Args:
        mu: Measure.
        o: OrbitSample.
        n: Number of iterates.
        eps: Ball radius.

    Returns:
        LocalEntropy with the raw value, the (n + span)-normalized value and the log mass;
        zero mass gives +inf, flagged.
    """
    m = ball_depth(eps)
    span = ball_span(m, mu.subshift.sided)
    if n < 1 or n + span > len(o.word):
        raise ValidationError(f"orbit of length {len(o.word)} cannot carry n={n} with ball span {span}")
    log_mass = float(log_cylinder_masses(mu, o.word[None, :n + span])[0])
    if log_mass == -np.inf:
        logger.warning(f"zero-mass ball along orbit seed={o.seed}: sample is inadmissible for the measure")
        return LocalEntropy(np.inf, np.inf, n, m, log_mass, flagged=True)
    return LocalEntropy(-log_mass / n, -log_mass / (n + span), n, m, log_mass)


def orbit_offset(s, eps=1.0):
    """
    Index of the coded point x inside a sampled word.

    A two-sided ball B_n(x, eps) fixes the coordinates [-m, n+m), so the
    sampled word starts at coordinate -m and x sits at index m. One-sided
    words start at x.
    """
    return ball_depth(eps) if s.two_sided else 0


def birkhoff_average(phi, o, n, start=0):
    """S_n phi(x) / n along an orbit sample whose point x sits at index `start`."""
    if n < 1:
        raise ValidationError(f"n must be >= 1 (got {n})")
    return float(birkhoff_sums(phi, o.word[None, :], n, start=start)[0] / n)


def pointwise_pressure(mu, phi, o, n, eps=1.0):
    """
    Point-wise pressure h_mu(x) + phi*(x) at matched (n, eps).

    The local entropy uses the ball word o.word[:n + span]; the Birkhoff sum
    starts at the point itself, index orbit_offset() of that word.
    """
    h = local_entropy(mu, o, n, eps)
    avg = birkhoff_average(phi, o, n, start=orbit_offset(mu.subshift, eps))
    return PointwisePressure(h.value + avg, h, avg)


def mt_pressure_breakdown(mu, phi):
    """
    Ess-sup of the component free energies.

    Returns:
        (value, index of the maximizing positive-weight component).
    """
    parts = free_energy(mu, phi).components
    candidates = [(value, i) for i, (value, c) in enumerate(zip(parts, mu.weights)) if c > 0]
    value, index = max(candidates, key=lambda vi: (vi[0], -vi[1]))
    return float(value), index


def mt_pressure(mu, phi):
    """P_mu(f, phi): free energy for ergodic mu, max over positive-weight components for mixtures."""
    return mt_pressure_breakdown(mu, phi)[0]


def mt_entropy(mu):
    """
    E_mu(f) with the affine entropy and the gap.

    Returns:
        EntropyGap(esssup=E_mu, affine=h_mu, gap=E_mu - h_mu >= 0).
    """
    h = entropy(mu)
    esssup = max(hi for hi, c in zip(h.components, h.weights) if c > 0)
    return EntropyGap(float(esssup), h.value, float(esssup - h.value))


def esssup_consistency_check(mu, phi, n=10_000, samples_per_component=50, seeds=None, eps=1.0,
                             cluster_tolerance=0.05, max_tolerance=0.03):
    """
    Sample orbits per component and compare point-wise pressures with the oracles.

    Args:
        mu: Mixture (an ergodic measure is treated as one component).
        phi: Potential.
        n: Orbit length used for every point-wise pressure.
        samples_per_component: Orbits drawn from each positive-weight component.
        seeds: Explicit seed list (default 0..samples_per_component-1).
        eps: Ball radius.
        cluster_tolerance: Allowed deviation of every sample from its component's free energy.
        max_tolerance: Allowed gap between the sample max and mt_pressure.

    Returns:
        EssSupReport.
    """
    seeds = list(range(samples_per_component)) if seeds is None else list(seeds)
    if not seeds:
        raise ValidationError("esssup_consistency_check needs at least one seed")
    span = ball_span(ball_depth(eps), mu.subshift.sided)
    oracles = free_energy(mu, phi).components
    clusters = []
    for cid, (weight, oracle) in enumerate(zip(mu.weights, oracles)):
        if weight <= 0:
            continue
        values = []
        for seed in seeds:
            o = sample_orbit(mu, n + span + phi.depth - 1, seed, component=cid)
            values.append(pointwise_pressure(mu, phi, o, n, eps).value)
        values = np.array(values)
        deviation = float(np.abs(values - oracle).max())
        clusters.append(ComponentCluster(
            component_id=cid,
            weight=weight,
            oracle=oracle,
            values=tuple(float(v) for v in values),
            mean=float(values.mean()),
            max_deviation=deviation,
            within_tolerance=deviation <= cluster_tolerance,
        ))
        logger.info(f"component {cid}: mean {values.mean():.5f} vs oracle {oracle:.5f} (max dev {deviation:.4f})")

    sample_max = max(max(c.values) for c in clusters)
    target = mt_pressure(mu, phi)
    report = EssSupReport(
        clusters=tuple(clusters),
        sample_max=sample_max,
        target=target,
        max_gap=abs(sample_max - target) if math.isfinite(sample_max) else math.inf,
        cluster_tolerance=cluster_tolerance,
        max_tolerance=max_tolerance,
    )
    if not report.passed:
        logger.warning(f"ess-sup check outside tolerance: max {sample_max:.5f} vs target {target:.5f}")
    return report
