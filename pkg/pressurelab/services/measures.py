# pressurelab/services/measures.py

"""
Exact computations with Bernoulli, Markov and mixture measures.

Core responsibilities:
- Cylinder masses (in log space, so orbits of length 10^4 do not underflow).
- Kolmogorov-Sinai entropy (closed forms), potential integrals, free energy;
  mixtures report the affine value together with the component list.
- Depth-L cylinder marginals, empirical measures of words, and membership in
  total-variation neighbourhoods.
- Seeded orbit sampling from a measure or from a designated mixture component.

Used by:
- services.pressure (neighbourhoods X_{n,F}, free-energy oracles)
- services.measure_pressure, services.dimension
- commands.tasks (entropy task)
"""

import logging

import numpy as np
from scipy.special import entr, logsumexp
from scipy.stats import entropy as shannon_entropy

from pressurelab.errors import ValidationError
from pressurelab.models.measure import Decomposition, EmpiricalMeasure
from pressurelab.models.reports import OrbitSample
from pressurelab.models.subshift import all_words, as_word
from pressurelab.services.symbolic_core import window_codes, word_array, words_to_codes

logger = logging.getLogger(__name__)


def _ergodic_log_masses(nu, arr):
    P, pi = nu.stochastic_matrix, nu.stationary
    with np.errstate(divide='ignore'):
        log_pi = np.log(pi)
        log_P = np.log(P)
    out = log_pi[arr[:, 0]]
    if arr.shape[1] > 1:
        out = out + log_P[arr[:, :-1], arr[:, 1:]].sum(axis=1)
    return out


def log_cylinder_masses(mu, arr):
    """
    log mu([w]) for every row of a word array.

    Args:
        mu: Bernoulli, Markov or mixture measure.
        arr: Integer array of shape (rows, length).

    Returns:
        Float array; -inf marks zero mass.
    """
    arr = np.atleast_2d(np.asarray(arr, dtype=np.int64))
    if arr.shape[1] == 0:
        return np.zeros(arr.shape[0])
    if mu.is_ergodic:
        return _ergodic_log_masses(mu, arr)
    stacked = np.vstack([_ergodic_log_masses(nu, arr) for nu in mu.components])
    with np.errstate(divide='ignore'):
        log_c = np.log(np.array(mu.weights))[:, None]
    return logsumexp(stacked + log_c, axis=0)


def log_cylinder_mass(mu, w):
    """log mu([w]); -inf for inadmissible or null words."""
    w = as_word(w)
    if not mu.subshift.is_admissible(w):
        return -np.inf
    return float(log_cylinder_masses(mu, np.array([w]))[0])


def cylinder_mass(mu, w):
    """
    mu([w]) for a word w.

    Inadmissible words have mass 0 rather than raising.
    """
    return float(np.exp(log_cylinder_mass(mu, w)))


def prefix_log_masses(mu, w):
    """log mu([w_0..w_{d-1}]) for d = 0..|w| (entry 0 is the whole space)."""
    w = np.asarray(w, dtype=np.int64).ravel()

    def ergodic(nu):
        with np.errstate(divide='ignore'):
            log_pi = np.log(nu.stationary)
            log_P = np.log(nu.stochastic_matrix)
        out = np.zeros(len(w) + 1)
        if len(w):
            out[1] = log_pi[w[0]]
            out[2:] = log_pi[w[0]] + np.cumsum(log_P[w[:-1], w[1:]])
        return out

    if mu.is_ergodic:
        return ergodic(mu)
    with np.errstate(divide='ignore'):
        log_c = np.log(np.array(mu.weights))[:, None]
    return logsumexp(np.vstack([ergodic(nu) for nu in mu.components]) + log_c, axis=0)


def marginal(mu, L):
    """Depth-L cylinder marginal of mu as a vector over the k**L codes."""
    s = mu.subshift
    masses = np.exp(log_cylinder_masses(mu, all_words(s.alphabet_size, L)))
    return np.where(s.admissible_mask(L), masses, 0.0)


def _component_entropy(nu):
    if nu.kind == 'bernoulli':
        return float(shannon_entropy(nu.p))
    return float(sum(pi_i * shannon_entropy(row) for pi_i, row in zip(nu.stationary, nu.stochastic_matrix)))


def entropy(mu):
    """
    Kolmogorov-Sinai entropy h_mu.

    Returns:
        Decomposition(value=sum_i c_i h_i, components=(h_i...), weights=(c_i...)).
        Ergodic measures have a single component.
    """
    hs = tuple(_component_entropy(nu) for nu in mu.components)
    return Decomposition(float(np.dot(mu.weights, hs)), hs, tuple(mu.weights))


def _component_integral(nu, phi):
    s = nu.subshift
    words = word_array(s, phi.depth)
    masses = np.exp(_ergodic_log_masses(nu, words.astype(np.int64)))
    return float(masses @ phi.values[words_to_codes(words, s.alphabet_size)])


def integrate(mu, phi):
    """Integral of a locally constant potential, via depth-k_phi marginals."""
    if phi.subshift != mu.subshift:
        raise ValidationError("potential and measure live on different subshifts")
    return float(np.dot(mu.weights, [_component_integral(nu, phi) for nu in mu.components]))


def free_energy(mu, phi):
    """
    h_mu + integral of phi.

    Returns:
        Decomposition with the affine value and the component free energies h_i + int phi d nu_i.
    """
    if phi.subshift != mu.subshift:
        raise ValidationError("potential and measure live on different subshifts")
    hs = entropy(mu).components
    parts = tuple(h + _component_integral(nu, phi) for h, nu in zip(hs, mu.components))
    return Decomposition(float(np.dot(mu.weights, parts)), parts, tuple(mu.weights))


def block_entropy_rate(mu, n):
    """
    Conditional block entropy H_n - H_{n-1}, with H_n = -sum over n-words of mu(w) log mu(w).

    Equals h_mu for Bernoulli (n >= 1) and Markov (n >= 2) measures and
    decreases to h_mu for mixtures.
    """
    if n < 1:
        raise ValidationError(f"block length must be >= 1 (got {n})")
    s = mu.subshift

    def block(length):
        if length == 0:
            return 0.0
        return float(entr(np.exp(log_cylinder_masses(mu, word_array(s, length)))).sum())

    return block(n) - block(n - 1)


def empirical_frequencies(arr, L, k):
    """Sliding-window depth-L frequency vectors (rows x k**L) for the rows of a word array."""
    codes = window_codes(arr, L, k)
    rows, windows = codes.shape
    flat = (np.arange(rows, dtype=np.int64)[:, None] * k ** L + codes).ravel()
    return np.bincount(flat, minlength=rows * k ** L).reshape(rows, k ** L) / windows


def empirical_of_word(w, L, k=None):
    """
    Empirical measure of a word at depth L (n - L + 1 windows, no wraparound).

    Args:
        w: Word.
        L: Window depth.
        k: Alphabet size (defaults to the largest symbol + 1, at least 2).
    """
    w = as_word(w)
    if len(w) < L:
        raise ValidationError(f"word of length {len(w)} is shorter than depth L={L}")
    k = max(2, max(w) + 1) if k is None else k
    freq = empirical_frequencies(np.array([w], dtype=np.int64), L, k)[0]
    return EmpiricalMeasure(k, L, tuple(freq))


def tv_distances(freqs, center):
    """Total-variation distances between frequency rows and a center marginal."""
    return 0.5 * np.abs(np.atleast_2d(freqs) - center).sum(axis=1)


def in_neighborhood(e, F):
    """True iff the TV distance between e and the center's depth-L marginal is < theta."""
    if e.depth != F.depth:
        raise ValidationError(f"empirical depth {e.depth} does not match neighborhood depth {F.depth}")
    center = marginal(F.center, F.depth)
    e = e.embedded(F.center.subshift.alphabet_size)
    return bool(tv_distances(e.vector, center)[0] < F.radius)


def _sample_chain(nu, length, rng):
    if nu.kind == 'bernoulli':
        return rng.choice(nu.subshift.alphabet_size, size=length, p=nu.stationary).astype(np.int8)
    cum = np.cumsum(nu.stochastic_matrix, axis=1)
    cum /= cum[:, -1:]
    start = np.cumsum(nu.stationary)
    start /= start[-1]
    u = rng.random(length)
    out = np.empty(length, dtype=np.int8)
    x = int(np.searchsorted(start, u[0], side='right'))
    out[0] = x
    for i in range(1, length):
        x = int(np.searchsorted(cum[x], u[i], side='right'))
        out[i] = x
    return out


def sample_orbit(mu, length, seed, component=None):
    """
    Draw an admissible word of the given length from mu.

    Args:
        mu: Measure to sample from.
        length: Number of symbols.
        seed: Integer seed for numpy's default_rng.
        component: For mixtures, index of the component to sample from; None picks one by weight.

    Returns:
        OrbitSample carrying the seed and the generating component.
    """
    if length < 1:
        raise ValidationError(f"orbit length must be >= 1 (got {length})")
    if component is not None and not 0 <= component < len(mu.components):
        raise ValidationError(f"component {component} out of range for {len(mu.components)} components")
    rng = np.random.default_rng(seed if component is None else [seed, component])
    if component is None:
        component = int(rng.choice(len(mu.components), p=mu.weights)) if len(mu.components) > 1 else 0
    word = _sample_chain(mu.components[component], length, rng)
    return OrbitSample(word=word, seed=seed, component_id=component)
