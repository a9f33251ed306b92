# pressurelab/services/symbolic_core.py

"""
Finite combinatorics of the shift space.

Core responsibilities:
- Word enumeration (lexicographic) and word counts via transition-matrix powers.
- Birkhoff sums of locally constant potentials, including the sup over
  admissible completions when a cylinder does not determine every window.
- The dyadic metric: eps -> ball depth m, so B_n(x, eps) is the cylinder on
  [0, n+m) (one-sided) or [-m, n+m) (two-sided).
- Hamming distance, Hamming-ball counts and the 2^{n eta(delta)} bound.
- Greedy maximal (n, eps)- and (delta, n, eps)-separated subsets.

Used by:
- services.measures (empirical measures, marginals)
- services.pressure (cover trees, separated pressure)
- commands.tasks (lemma-check task)
"""

import itertools
import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from pressurelab.errors import ValidationError
from pressurelab.models.subshift import HammingParams, as_word

logger = logging.getLogger(__name__)

SEPARATION_MODES = ('n_eps', 'hamming')
SCAN_ORDERS = ('lexicographic', 'weighted')

# Hamming balls larger than this are not enumerated; pairwise scans are used instead.
_MAX_BALL_PATTERNS = 4096


def word_array(s, n):
    """
    All admissible n-words of a subshift as rows of an int8 array.

    Args:
        s: Subshift.
        n: Word length >= 1.

    Returns:
        Array of shape (count, n), rows in lexicographic order.
    """
    if n < 1:
        raise ValidationError(f"word length must be >= 1 (got {n})")
    T = s.matrix.astype(bool)
    arr = np.arange(s.alphabet_size, dtype=np.int8)[:, None]
    for _ in range(n - 1):
        successors = T[arr[:, -1]]
        rows = np.repeat(arr, successors.sum(axis=1), axis=0)
        # nonzero walks row-major, so each row's successors come out in ascending order
        nxt = np.nonzero(successors)[1].astype(np.int8)
        arr = np.hstack([rows, nxt[:, None]])
    return arr


def enumerate_words(s, n):
    """Yield every admissible n-word exactly once, in lexicographic order."""
    for row in word_array(s, n):
        yield tuple(int(x) for x in row)


def word_count(s, n):
    """Number of admissible n-words: 1^T T^{n-1} 1."""
    if n < 1:
        raise ValidationError(f"word length must be >= 1 (got {n})")
    ones = np.ones(s.alphabet_size, dtype=np.int64)
    return int(ones @ np.linalg.matrix_power(s.matrix, n - 1) @ ones)


def words_to_codes(arr, k):
    """Base-k codes of the rows of a word array."""
    arr = np.asarray(arr)
    powers = k ** np.arange(arr.shape[1] - 1, -1, -1, dtype=np.int64)
    return arr.astype(np.int64) @ powers


def window_codes(arr, depth, k):
    """Codes of every length-`depth` sliding window of each row; shape (rows, width - depth + 1)."""
    arr = np.atleast_2d(np.asarray(arr))
    powers = k ** np.arange(depth - 1, -1, -1, dtype=np.int64)
    return sliding_window_view(arr, depth, axis=1).astype(np.int64) @ powers


def birkhoff_sums(phi, arr, n, start=0):
    """
    Vectorized S_n phi over rows of a word array, windows starting at `start`.

    Every row must determine the n windows, i.e. have width >= start + n + depth - 1.
    """
    arr = np.atleast_2d(np.asarray(arr))
    if n <= 0:
        return np.zeros(arr.shape[0])
    stop = start + n + phi.depth - 1
    if arr.shape[1] < stop:
        raise ValidationError("undetermined evaluation: word too short for the requested Birkhoff sum")
    codes = window_codes(arr[:, start:stop], phi.depth, phi.subshift.alphabet_size)
    return phi.values[codes].sum(axis=1)


def birkhoff_sum(s, phi, w):
    """
    S_n phi over a single word, with n = |w| - depth(phi) + 1.

    Args:
        s: Subshift the word lives on.
        phi: Potential.
        w: Admissible word.

    Returns:
        Sum of phi over the n windows of w.
    """
    w = as_word(w)
    if len(w) < phi.depth:
        raise ValidationError(
            f"undetermined evaluation: word of length {len(w)} is shorter than potential depth {phi.depth}"
        )
    if not s.is_admissible(w):
        raise ValidationError(f"word {w} is not admissible")
    n = len(w) - phi.depth + 1
    return float(birkhoff_sums(phi, np.array([w], dtype=np.int8), n)[0])


def sup_birkhoff(s, phi, arr, n, start=0):
    """
    Sup of S_n phi over each cylinder given by the rows of `arr`.

    Windows that run past the end of a row are maximized over every admissible
    completion of the row. Exact for locally constant potentials.
    """
    arr = np.atleast_2d(np.asarray(arr))
    k, kp = s.alphabet_size, phi.depth
    width = arr.shape[1]
    need = start + n + kp - 1
    if need <= width:
        return birkhoff_sums(phi, arr, n, start)

    n_det = max(0, min(n, width - kp - start + 1))
    determined = birkhoff_sums(phi, arr, n_det, start) if n_det > 0 else np.zeros(arr.shape[0])

    t0 = start + n_det
    anchor = min(t0, width - 1)
    known = width - anchor
    ext = word_array(s, need - anchor)
    ext_sums = birkhoff_sums(phi, ext, n - n_det, start=t0 - anchor)

    prefix = words_to_codes(ext[:, :known], k)
    uniq, first = np.unique(prefix, return_index=True)
    tail_sup = np.full(k ** known, -np.inf)
    tail_sup[uniq] = np.maximum.reduceat(ext_sums, first)
    return determined + tail_sup[words_to_codes(arr[:, anchor:width], k)]


def ball_depth(eps):
    """
    The m >= 0 with 2^-(m+1) < eps <= 2^-m.

    B_n(x, eps) is then the cylinder on [0, n+m) (one-sided).
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError(f"eps must lie in (0, 1] (got {eps})")
    mantissa, exponent = math.frexp(eps)
    return 1 - exponent if mantissa == 0.5 else -exponent


def ball_span(m, sided='one_sided'):
    """Extra coordinates a dynamical ball fixes beyond [0, n): m one-sided, 2m two-sided."""
    return 2 * m if sided == 'two_sided' else m


def hamming_distance(v, w):
    v, w = as_word(v), as_word(w)
    if len(v) != len(w):
        raise ValidationError(f"hamming distance needs equal lengths (got {len(v)} and {len(w)})")
    return sum(a != b for a, b in zip(v, w))


def eta(delta):
    """eta(delta) = -delta log2 delta - (1-delta) log2 (1-delta), with eta(0) = eta(1) = 0."""
    if delta <= 0.0 or delta >= 1.0:
        return 0.0
    return HammingParams(delta).eta_of_delta


def hamming_params(delta, k=None):
    """
    Coerce a float or HammingParams to HammingParams.

    With k given, also require delta <= (k-1)/k, the largest fraction a
    Hamming ball over k symbols can use.
    """
    if delta is None:
        raise ValidationError("hamming separation needs delta")
    params = delta if isinstance(delta, HammingParams) else HammingParams(delta)
    if k is not None and not params.fits(k):
        raise ValidationError(f"delta must lie in (0, {(k - 1) / k:g}] for alphabet size {k} (got {params.delta})")
    return params


def hamming_ball_count(k, n, delta):
    """Exact size of a Hamming ball of radius floor(delta n) in {0..k-1}^n."""
    params = hamming_params(delta, k)
    if n < 1:
        raise ValidationError(f"n must be >= 1 (got {n})")
    return sum(math.comb(n, j) * (k - 1) ** j for j in range(params.radius(n) + 1))


def hamming_ball_bound(k, n, delta):
    """The cardinality bound 2^{n eta(delta)} (k-1)^{floor(delta n)}."""
    params = hamming_params(delta, k)
    return 2.0 ** (n * params.eta_of_delta) * float(k - 1) ** params.radius(n)


def separation_threshold(n, delta):
    """Integer form of the count condition '>= delta n', i.e. ceil(delta n)."""
    return hamming_params(delta).threshold(n)


def _separating_times(arr, row, n, width):
    """For each row of arr: number of j < n whose coordinate window [j, j+width) differs from `row`."""
    diff = arr[:, :n + width - 1] != row[:n + width - 1]
    if width == 1:
        return diff[:, :n].sum(axis=1)
    return sliding_window_view(diff, width, axis=1)[:, :n].any(axis=2).sum(axis=1)


def is_separated(v, w, mode='n_eps', n=None, eps=1.0, delta=None, sided='one_sided'):
    """
    Pairwise separation predicate under the dyadic metric.

    n_eps: the words differ somewhere in the ball coordinates [0, n + span).
    hamming: at least ceil(delta n) times j < n have a difference in the window
    [j, j + span] (coordinates relative to the start of the words).
    """
    v, w = as_word(v), as_word(w)
    if len(v) != len(w):
        raise ValidationError("separation needs words of equal length")
    span = ball_span(ball_depth(eps), sided)
    n = len(v) - span if n is None else n
    if n < 1 or n + span > len(v):
        raise ValidationError(f"words of length {len(v)} cannot carry n={n} with ball span {span}")
    if mode == 'n_eps':
        return v[:n + span] != w[:n + span]
    if mode == 'hamming':
        if delta is None:
            raise ValidationError("hamming separation needs delta")
        a = np.array([v], dtype=np.int8)
        times = _separating_times(a, np.array(w, dtype=np.int8), n, span + 1)[0]
        return int(times) >= separation_threshold(n, delta)
    raise ValidationError(f"unknown separation mode {mode!r}; expected one of {SEPARATION_MODES}")


def _ball_patterns(n, radius, k):
    """(positions, offsets) arrays for every nonzero Hamming-ball displacement, grouped by size."""
    patterns = []
    for r in range(1, radius + 1):
        pos = np.array(list(itertools.combinations(range(n), r)), dtype=np.int64)
        offs = np.array(list(itertools.product(range(1, k), repeat=r)), dtype=np.int64)
        patterns.append((np.repeat(pos, len(offs), axis=0), np.tile(offs, (len(pos), 1))))
    return patterns


def _ball_size(n, radius, k):
    return sum(math.comb(n, j) * (k - 1) ** j for j in range(radius + 1))


def _neighbor_codes(word, code, patterns, powers, k):
    """Codes of every word within the pattern set's Hamming radius of `word` (itself included)."""
    out = [np.array([code], dtype=np.int64)]
    for pos, offs in patterns:
        old = word[pos]
        new = (old + offs) % k
        out.append(code + ((new - old) * powers[pos]).sum(axis=1))
    return np.concatenate(out)


def _conflict_degrees(arr, n, span, t, k):
    """Number of other rows each row fails to be separated from."""
    rows = arr.shape[0]
    radius = t - 1
    if span == 0 and _ball_size(n, radius, k) <= _MAX_BALL_PATTERNS:
        codes = words_to_codes(arr[:, :n], k)
        uniq, counts = np.unique(codes, return_counts=True)
        powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
        prefix = arr[:, :n].astype(np.int64)
        degrees = np.zeros(rows, dtype=np.int64)

        def hits(neighbors):
            idx = np.clip(np.searchsorted(uniq, neighbors), 0, len(uniq) - 1)
            return np.where(uniq[idx] == neighbors, counts[idx], 0)

        degrees += hits(codes) - 1
        for pos, offs in _ball_patterns(n, radius, k):
            for p, o in zip(pos, offs):
                old = prefix[:, p]
                new = (old + o) % k
                degrees += hits(codes + ((new - old) * powers[p]).sum(axis=1))
        return degrees
    degrees = np.empty(rows, dtype=np.int64)
    for i in range(rows):
        degrees[i] = int((_separating_times(arr, arr[i], n, span + 1) < t).sum()) - 1
    return degrees


def _scan_order(arr, order, weights, degrees):
    lex_rank = np.lexsort(arr.T[::-1])
    if order == 'lexicographic':
        return lex_rank
    if order != 'weighted':
        raise ValidationError(f"unknown scan order {order!r}; expected one of {SCAN_ORDERS}")
    rank = np.empty(len(lex_rank), dtype=np.int64)
    rank[lex_rank] = np.arange(len(lex_rank))
    score = np.asarray(weights, dtype=float) / (degrees + 1.0)
    return np.lexsort((rank, -score))


def select_separated(arr, mode, n, span=0, delta=None, order='lexicographic', weights=None, k=None):
    """
    Indices of a greedy maximal separated subset of the rows of a word array.

    Args:
        arr: Integer array of distinct words, shape (rows, length >= n + span).
        mode: 'n_eps' or 'hamming'.
        n: Number of iterates.
        span: Extra ball coordinates (see ball_span).
        delta: Fraction (or HammingParams) for hamming mode.
        order: 'lexicographic' or 'weighted'.
        weights: Per-row weights for the weighted order.
        k: Alphabet size (defaults to the largest symbol + 1).

    Returns:
        Integer array of selected row indices, in scan order.
    """
    if mode not in SEPARATION_MODES:
        raise ValidationError(f"unknown separation mode {mode!r}; expected one of {SEPARATION_MODES}")
    if mode == 'hamming' and delta is None:
        raise ValidationError("hamming separation needs delta")
    if order not in SCAN_ORDERS:
        raise ValidationError(f"unknown scan order {order!r}; expected one of {SCAN_ORDERS}")
    arr = np.asarray(arr)
    rows = arr.shape[0]
    if rows == 0:
        return np.zeros(0, dtype=np.int64)
    k = max(2, int(arr.max()) + 1) if k is None else k
    t = hamming_params(delta, k).threshold(n) if mode == 'hamming' else 1
    weights = np.ones(rows) if weights is None else np.asarray(weights, dtype=float)
    if len(weights) != rows:
        raise ValidationError("weights must align with the words")

    degrees = None
    if order == 'weighted':
        if mode == 'n_eps':
            prefix = words_to_codes(arr[:, :n + span], k)
            _, inverse, counts = np.unique(prefix, return_inverse=True, return_counts=True)
            degrees = counts[inverse] - 1
        else:
            degrees = _conflict_degrees(arr, n, span, t, k)
    scan = _scan_order(arr, order, weights, degrees)

    selected = []
    if mode == 'n_eps':
        prefix = words_to_codes(arr[:, :n + span], k)
        seen = set()
        for i in scan:
            if prefix[i] not in seen:
                seen.add(prefix[i])
                selected.append(i)
    elif span == 0 and _ball_size(n, t - 1, k) <= _MAX_BALL_PATTERNS:
        patterns = _ball_patterns(n, t - 1, k)
        powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
        prefix = arr[:, :n].astype(np.int64)
        codes = prefix @ powers
        blocked = set()
        for i in scan:
            if codes[i] in blocked:
                continue
            selected.append(i)
            blocked.update(_neighbor_codes(prefix[i], codes[i], patterns, powers, k).tolist())
    else:
        chosen = np.empty_like(arr)
        count = 0
        for i in scan:
            if count == 0 or (_separating_times(chosen[:count], arr[i], n, span + 1) >= t).all():
                chosen[count] = arr[i]
                count += 1
                selected.append(i)

    logger.debug(f"select_separated: {len(selected)} of {rows} words kept (mode={mode}, order={order})")
    return np.array(selected, dtype=np.int64)


def extract_separated(words, mode='n_eps', eps=1.0, delta=None, n=None,
                      order='lexicographic', weights=None, sided='one_sided'):
    """
    Greedy maximal separated subset of a set of equal-length words.

    Args:
        words: Iterable of words (tuples, strings or arrays).
        mode: 'n_eps' or 'hamming'.
        eps: Ball radius; only its dyadic depth matters.
        delta: Fraction (or HammingParams) for hamming mode.
        n: Number of iterates; defaults to the word length minus the ball span.
        order: 'lexicographic' scan, or 'weighted' (descending weight / (conflict degree + 1),
               lexicographic tie-break).
        weights: Per-word weights for the weighted order (default all ones).
        sided: 'one_sided' or 'two_sided' metric convention.

    Returns:
        List of the selected words in scan order.
    """
    unique = list(dict.fromkeys(as_word(w) for w in words))
    if not unique:
        return []
    length = len(unique[0])
    if any(len(w) != length for w in unique):
        raise ValidationError("extract_separated needs words of equal length")
    span = ball_span(ball_depth(eps), sided)
    n = length - span if n is None else n
    if n < 1 or n + span > length:
        raise ValidationError(f"words of length {length} cannot carry n={n} with ball span {span}")
    arr = np.array(unique, dtype=np.int8)
    idx = select_separated(arr, mode, n, span, delta, order, weights)
    return [unique[i] for i in idx]
