# pressurelab/models/subshift.py

"""
Value types for the symbolic phase space.

- Subshift: alphabet + 0/1 transition matrix, one- or two-sided.
- Potential: locally constant function given by a table over k**depth word codes.
- HammingParams: the delta of (delta, n, eps)-separation with its eta(delta),
  Hamming-ball radius and separation threshold.
- CylinderUnion: a set Z given as a finite union of equal-length cylinders.

Words are tuples of ints. Tables are indexed by the base-k code of a word,
so lexicographic order of words equals numeric order of codes.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from pressurelab.errors import ValidationError

Word = Tuple[int, ...]

SIDES = ('one_sided', 'two_sided')


def as_word(word):
    """
    Normalize a word given as a digit string, sequence or array to a tuple of ints.

    Args:
        word: '0110', [0, 1, 1, 0], (0, 1), or a 1-D integer array.

    Returns:
        Tuple of ints.
    """
    if isinstance(word, str):
        if not word.isdigit():
            raise ValidationError(f"word '{word}' must be a string of digits")
        return tuple(int(ch) for ch in word)
    return tuple(int(x) for x in np.asarray(word).ravel())


def word_code(word, k):
    """Base-k code of a word (most significant symbol first)."""
    code = 0
    for symbol in word:
        code = code * k + int(symbol)
    return code


def all_words(k, depth):
    """Every word of the given length over k symbols, in code order, as an int8 array."""
    if depth == 0:
        return np.zeros((1, 0), dtype=np.int8)
    return np.array(list(itertools.product(range(k), repeat=depth)), dtype=np.int8).reshape(-1, depth)


def is_irreducible(matrix):
    """True when every state of the nonnegative square matrix reaches every state."""
    graph = csr_matrix((np.asarray(matrix) > 0).astype(np.int8))
    n_components, _ = connected_components(graph, directed=True, connection='strong')
    return n_components == 1


@dataclass(frozen=True)
class Subshift:
    """A subshift of finite type on {0..k-1} with a 0/1 transition matrix."""
    alphabet_size: int
    transition: tuple
    sided: str = 'one_sided'
    name: str = field(default='', compare=False)

    def __post_init__(self):
        k = self.alphabet_size
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 2:
            raise ValidationError(f"alphabet_size must be an integer >= 2 (got {k!r})")
        matrix = np.asarray(self.transition)
        if matrix.shape != (k, k):
            raise ValidationError(f"transition must be {k}x{k} (got shape {matrix.shape})")
        if not np.isin(matrix, (0, 1)).all():
            raise ValidationError("transition entries must be 0 or 1")
        if self.sided not in SIDES:
            raise ValidationError(f"sided must be one of {SIDES} (got {self.sided!r})")
        if (matrix.sum(axis=1) == 0).any() or (matrix.sum(axis=0) == 0).any():
            raise ValidationError("every row and column of transition needs at least one 1")
        if not is_irreducible(matrix):
            raise ValidationError("transition matrix is not irreducible")
        object.__setattr__(self, 'alphabet_size', int(k))
        object.__setattr__(self, 'transition', tuple(tuple(int(x) for x in row) for row in matrix))

    @classmethod
    def full(cls, k, sided='one_sided', name=''):
        return cls(k, tuple((1,) * k for _ in range(k)), sided, name or f"full-{k}")

    @classmethod
    def golden_mean(cls, sided='one_sided'):
        """Binary shift forbidding the word 11."""
        return cls(2, ((1, 1), (1, 0)), sided, 'golden-mean')

    @cached_property
    def matrix(self):
        m = np.array(self.transition, dtype=np.int64)
        m.flags.writeable = False
        return m

    @property
    def is_full(self):
        return bool(self.matrix.all())

    @property
    def two_sided(self):
        return self.sided == 'two_sided'

    def is_admissible(self, word):
        """Check every consecutive pair of a word against the transition matrix."""
        w = as_word(word)
        if any(x < 0 or x >= self.alphabet_size for x in w):
            return False
        return all(self.transition[a][b] for a, b in zip(w, w[1:]))

    def admissible_mask(self, depth):
        """Boolean vector over the k**depth codes marking admissible words."""
        words = all_words(self.alphabet_size, depth)
        if depth < 2:
            return np.ones(len(words), dtype=bool)
        return self.matrix[words[:, :-1], words[:, 1:]].astype(bool).all(axis=1)

    def __str__(self):
        return self.name or f"SFT(k={self.alphabet_size})"


@dataclass(frozen=True)
class Potential:
    """Locally constant potential of finite depth on a subshift."""
    subshift: Subshift
    depth: int
    table: tuple
    name: str = field(default='', compare=False)

    def __post_init__(self):
        if isinstance(self.depth, bool) or int(self.depth) != self.depth or self.depth < 1:
            raise ValidationError(f"potential depth must be an integer >= 1 (got {self.depth!r})")
        k = self.subshift.alphabet_size
        values = np.asarray(self.table, dtype=float).ravel()
        if len(values) != k ** self.depth:
            raise ValidationError(f"potential table needs {k ** self.depth} entries (got {len(values)})")
        mask = self.subshift.admissible_mask(self.depth)
        if not np.isfinite(values[mask]).all():
            raise ValidationError("potential values must be finite on every admissible word")
        values = np.where(mask, values, np.nan)
        object.__setattr__(self, 'depth', int(self.depth))
        object.__setattr__(self, 'table', tuple(float(v) for v in values))

    @classmethod
    def constant(cls, s, c=0.0, name=''):
        return cls(s, 1, (float(c),) * s.alphabet_size, name or f"const({c:g})")

    @classmethod
    def from_symbols(cls, s, values, name=''):
        """Depth-1 potential with phi(a) = values[a]."""
        return cls(s, 1, tuple(float(v) for v in values), name)

    @classmethod
    def from_mapping(cls, s, depth, mapping, default=None, name=''):
        """
        Build a potential from a word -> value mapping.

        Args:
            s: Subshift.
            depth: Window length of the potential.
            mapping: Dict keyed by digit strings or tuples.
            default: Value for admissible words missing from the mapping; None makes them an error.
            name: Optional label.
        """
        k = s.alphabet_size
        table = np.full(k ** depth, np.nan)
        for key, value in mapping.items():
            w = as_word(key)
            if len(w) != depth:
                raise ValidationError(f"potential key {key!r} has length {len(w)}, expected {depth}")
            if not s.is_admissible(w):
                raise ValidationError(f"potential key {key!r} is not admissible")
            table[word_code(w, k)] = float(value)
        mask = s.admissible_mask(depth)
        missing = mask & np.isnan(table)
        if missing.any():
            if default is None:
                first = tuple(all_words(k, depth)[np.argmax(missing)])
                raise ValidationError(f"potential table is not total: missing admissible word {first}")
            table[missing] = float(default)
        return cls(s, depth, tuple(table), name)

    @cached_property
    def values(self):
        v = np.array(self.table, dtype=float)
        v.flags.writeable = False
        return v

    @property
    def admissible_values(self):
        return self.values[~np.isnan(self.values)]

    @property
    def min(self):
        return float(self.admissible_values.min())

    @property
    def max(self):
        return float(self.admissible_values.max())

    def __call__(self, word):
        w = as_word(word)
        if len(w) != self.depth:
            raise ValidationError(f"potential of depth {self.depth} evaluated on word of length {len(w)}")
        value = self.values[word_code(w, self.subshift.alphabet_size)]
        if math.isnan(value):
            raise ValidationError(f"word {w} is not admissible")
        return float(value)

    def shifted(self, c):
        """phi + c"""
        return Potential(self.subshift, self.depth, tuple(self.values + c), self.name)

    def scaled(self, t):
        """t * phi"""
        return Potential(self.subshift, self.depth, tuple(self.values * t), self.name)

    def __neg__(self):
        return self.scaled(-1.0)

    def __str__(self):
        return self.name or f"potential(depth={self.depth})"


@dataclass(frozen=True)
class HammingParams:
    """The delta of (delta, n, eps)-separation."""
    delta: float

    def __post_init__(self):
        if isinstance(self.delta, bool) or not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1) (got {self.delta})")
        object.__setattr__(self, 'delta', float(self.delta))

    @property
    def eta_of_delta(self):
        d = self.delta
        return -d * math.log2(d) - (1 - d) * math.log2(1 - d)

    def radius(self, n):
        """Hamming-ball radius floor(delta n)."""
        return math.floor(self.delta * n + 1e-9)

    def threshold(self, n):
        """Separating times needed out of n: ceil(delta n), at least 1."""
        return max(1, math.ceil(self.delta * n - 1e-9))

    def fits(self, k):
        return self.delta <= (k - 1) / k + 1e-12


@dataclass(frozen=True)
class CylinderUnion:
