# pressurelab/models/reports.py

"""
Result and parameter records returned by the services.

All records are frozen dataclasses; commands.tasks flattens the ones it needs
into result-table rows.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pressurelab.errors import ValidationError


@dataclass(frozen=True)
class CpParams:
    """alpha, minimal cover length N, eps and depth cap D of the cover functional."""
    alpha: float
    N: int
    eps: float = 1.0
    D: int = 16

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError(f"N must be >= 1 (got {self.N})")
        if self.N > self.D:
            raise ValidationError(f"N must not exceed the depth cap D (N={self.N}, D={self.D})")
        if not 0.0 < self.eps <= 1.0:
            raise ValidationError(f"eps must lie in (0, 1] (got {self.eps})")


@dataclass(frozen=True)
class SchedulePoint:
    """One (n, theta, eps) point of a separated-pressure schedule."""
    n: int
    theta: float
    eps: float = 1.0


def _same(a, b):
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


@dataclass(frozen=True)
class EstimateReport:
    """
    A finite-scale estimate with its convergence trace.

    `value` always equals the last trace entry. `extrapolated`, when present,
    removes the leading finite-size terms from the trace (see pressure.extrapolate_trace).
    """
    value: float
    params: dict
    trace: tuple
    flagged: bool = False
    oracle: Optional[float] = None
    extrapolated: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        trace = tuple((s, float(v)) for s, v in self.trace)
        if not trace:
            raise ValidationError("an estimate report needs a nonempty trace")
        if not _same(float(self.value), trace[-1][1]):
            raise ValidationError("report value must equal the last trace entry")
        object.__setattr__(self, 'trace', trace)
        object.__setattr__(self, 'value', float(self.value))

    @property
    def diff(self):
        if self.oracle is None:
            return None
        return abs(self.value - self.oracle)


@dataclass(frozen=True)
class OrbitSample:
    """A long admissible word sampled from a measure (or one of its components)."""
    word: np.ndarray = field(compare=False)
    seed: int
    component_id: Optional[int] = None

    def __len__(self):
        return len(self.word)


@dataclass(frozen=True)
class LocalEntropy:
    """-(1/n) log mu(ball) and its (n+m)-normalized companion."""
    value: float
    corrected: float
    n: int
    m: int
    log_mass: float
    flagged: bool = False


@dataclass(frozen=True)
class PointwisePressure:
    value: float
    local_entropy: LocalEntropy
    birkhoff_average: float

    @property
    def corrected(self):
        return self.local_entropy.corrected + self.birkhoff_average

    @property
    def flagged(self):
        return self.local_entropy.flagged


@dataclass(frozen=True)
class EntropyGap:
    """E_mu (ess-sup of component entropies), h_mu (affine entropy) and E_mu - h_mu."""
    esssup: float
    affine: float
    gap: float


@dataclass(frozen=True)
class ComponentCluster:
    component_id: int
    weight: float
    oracle: float
    values: tuple
    mean: float
    max_deviation: float
    within_tolerance: bool


@dataclass(frozen=True)
class EssSupReport:
    """Per-component sample clusters and the empirical maximum against the ess-sup oracle."""
    clusters: tuple
    sample_max: float
    target: float
    max_gap: float
    cluster_tolerance: float
    max_tolerance: float

    @property
    def passed(self):
        return all(c.within_tolerance for c in self.clusters) and self.max_gap <= self.max_tolerance


@dataclass(frozen=True)
class DimensionResult:
    """
    Dimension value and how it was obtained.

    method is one of 'bowen_root', 'closed_form', 'box_count'. root_data holds
    t0 (or t_s, t_u), the bracket and the iteration count.
    """
    value: float
    method: str
    root_data: dict = field(default_factory=dict)
    closed_form: Optional[float] = None
    flagged: bool = False


@dataclass(frozen=True)
class PointwiseDimensionReport:
    """log mu(B(x,r)) / log r along a radius schedule with adjacent-depth brackets."""
    log_radii: tuple
    depths: tuple
    estimates: tuple
    lower: tuple
    upper: tuple
    value: float
    target: Optional[float] = None
    flagged: bool = False

    @property
    def gaps(self):
        return tuple(u - lo for lo, u in zip(self.lower, self.upper))
