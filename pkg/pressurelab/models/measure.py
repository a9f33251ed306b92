# pressurelab/models/measure.py

"""
Invariant measure specifications and their neighbourhoods.

Bernoulli and Markov measures are ergodic; a MixtureMeasure is a finite convex
combination of distinct ergodic components (its ergodic decomposition). Every
measure exposes the same small protocol used by the services:

    subshift, kind, is_ergodic, components, weights,
    stochastic_matrix (ergodic only), stationary (ergodic only)

A Bernoulli measure is the Markov measure whose rows all equal p, which lets
the mass computations treat both kinds through one code path.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar

import numpy as np

from config import get_config
from pressurelab.errors import ValidationError
from pressurelab.models.subshift import Subshift, all_words, is_irreducible, word_code


def _probability_vector(values, label):
    tol = get_config().PROB_TOL
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValidationError(f"{label} must not be empty")
    if not np.isfinite(v).all() or (v < 0).any():
        raise ValidationError(f"{label} entries must be finite and >= 0")
    if abs(v.sum() - 1.0) > tol:
        raise ValidationError(f"{label} must sum to 1 within {tol:g} (sums to {v.sum():.15g})")
    return v


def stationary_vector(P):
    """Stationary distribution of a stochastic matrix by least squares on pi(P - I) = 0, sum(pi) = 1."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    a = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(a, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@dataclass(frozen=True)
class BernoulliMeasure:
    """i.i.d. measure with symbol probabilities p."""
    subshift: Subshift
    p: tuple
    name: str = field(default='', compare=False)
    kind: ClassVar[str] = 'bernoulli'
    is_ergodic: ClassVar[bool] = True

    def __post_init__(self):
        p = _probability_vector(self.p, 'bernoulli p')
        k = self.subshift.alphabet_size
        if p.size != k:
            raise ValidationError(f"bernoulli p needs {k} entries (got {p.size})")
        support = np.flatnonzero(p > 0)
        if not self.subshift.matrix[np.ix_(support, support)].all():
            raise ValidationError("bernoulli support must be closed under the transition matrix")
        object.__setattr__(self, 'p', tuple(float(x) for x in p))

    @property
    def components(self):
        return (self,)

    @property
    def weights(self):
        return (1.0,)

    @cached_property
    def stationary(self):
        return np.array(self.p)

    @cached_property
    def stochastic_matrix(self):
        return np.tile(np.array(self.p), (self.subshift.alphabet_size, 1))

    def __str__(self):
        return self.name or 'B(' + ','.join(f"{x:g}" for x in self.p) + ')'


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov measure with stochastic matrix P supported on the transition matrix."""
    subshift: Subshift
    P: tuple
    pi: tuple = None
    name: str = field(default='', compare=False)
    kind: ClassVar[str] = 'markov'
    is_ergodic: ClassVar[bool] = True

    def __post_init__(self):
        k = self.subshift.alphabet_size
        P = np.asarray(self.P, dtype=float)
        if P.shape != (k, k):
            raise ValidationError(f"markov P must be {k}x{k} (got shape {P.shape})")
        for i, row in enumerate(P):
            _probability_vector(row, f"markov P row {i}")
        if ((P > 0) & (self.subshift.matrix == 0)).any():
            raise ValidationError("markov P puts mass on a forbidden transition")
        if not is_irreducible(P):
            raise ValidationError("markov P must be irreducible")
        pi = stationary_vector(P) if self.pi is None else _probability_vector(self.pi, 'markov pi')
        if pi.size != k:
            raise ValidationError(f"markov pi needs {k} entries (got {pi.size})")
        tol = get_config().PROB_TOL
        if np.abs(pi @ P - pi).max() > tol:
            raise ValidationError(f"markov pi is not stationary for P within {tol:g}")
        object.__setattr__(self, 'P', tuple(tuple(float(x) for x in row) for row in P))
        object.__setattr__(self, 'pi', tuple(float(x) for x in pi))

    @property
    def components(self):
        return (self,)

    @property
    def weights(self):
        return (1.0,)

    @cached_property
    def stationary(self):
        return np.array(self.pi)

    @cached_property
    def stochastic_matrix(self):
        return np.array(self.P)

    def __str__(self):
        return self.name or f"Markov(k={self.subshift.alphabet_size})"


@dataclass(frozen=True)
class MixtureMeasure:
    """Finite convex combination sum_i c_i nu_i of distinct ergodic measures."""
    weights: tuple
    components: tuple
    name: str = field(default='', compare=False)
    kind: ClassVar[str] = 'mixture'
    is_ergodic: ClassVar[bool] = False

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ValidationError("a mixture needs at least one component")
        c = _probability_vector(self.weights, 'mixture weights')
        if c.size != len(components):
            raise ValidationError(f"mixture has {len(components)} components but {c.size} weights")
        for nu in components:
            if not getattr(nu, 'is_ergodic', False):
                raise ValidationError("mixture components must be ergodic (nested mixtures are not allowed)")
        if len({nu.subshift for nu in components}) != 1:
            raise ValidationError("mixture components must live on the same subshift")
        if len(set(components)) != len(components):
            raise ValidationError("mixture components must be pairwise distinct")
        object.__setattr__(self, 'weights', tuple(float(x) for x in c))
        object.__setattr__(self, 'components', components)

    @property
    def subshift(self):
        return self.components[0].subshift

    def __str__(self):
        if self.name:
            return self.name
        return ' + '.join(f"{c:g}*{nu}" for c, nu in zip(self.weights, self.components))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Sliding-window L-word frequencies, stored as a vector over the k**L codes."""
    alphabet_size: int
    depth: int
    frequencies: tuple

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.size != self.alphabet_size ** self.depth:
            raise ValidationError("empirical frequency vector has the wrong size")
        if abs(f.sum() - 1.0) > 1e-9:
            raise ValidationError("empirical frequencies must sum to 1")
        object.__setattr__(self, 'frequencies', tuple(float(x) for x in f))

    @property
    def vector(self):
        return np.array(self.frequencies)

    def as_dict(self):
        """Nonzero frequencies keyed by word tuple."""
        words = all_words(self.alphabet_size, self.depth)
        return {tuple(int(x) for x in words[i]): f for i, f in enumerate(self.frequencies) if f > 0}

    def embedded(self, k):
        """The same frequencies re-indexed over an alphabet of k symbols."""
        if k == self.alphabet_size:
            return self
        freq = np.zeros(k ** self.depth)
        for word, f in self.as_dict().items():
            if max(word) >= k:
                raise ValidationError(f"empirical measure charges symbol {max(word)}, outside an alphabet of {k}")
            freq[word_code(word, k)] += f
        return EmpiricalMeasure(k, self.depth, tuple(freq))


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Total-variation ball of radius theta around the depth-L marginal of `center`."""
    center: object
    depth: int
    radius: float

    def __post_init__(self):
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValidationError(f"neighborhood depth L must be an integer >= 1 (got {self.depth!r})")
        if not 0.0 < self.radius <= 2.0:
            raise ValidationError(f"neighborhood radius theta must lie in (0, 2] (got {self.radius})")


@dataclass(frozen=True)
class Decomposition:
    """Affine value of a measure functional plus its per-component values."""
    value: float
    components: tuple
    weights: tuple

    def __float__(self):
        return float(self.value)
