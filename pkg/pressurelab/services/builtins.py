# pressurelab/services/builtins.py

"""
Catalog of built-in systems, measures and models.

Names are the identifiers accepted in config documents ("system": "golden-mean",
"measure": "mixture-1/2-0.9", "model": "middle-third"). list_builtins() pairs
each entry with its closed-form oracle value.
"""

import logging
import math
from functools import lru_cache

from pressurelab.errors import ValidationError
from pressurelab.models.geometry import HyperbolicModel, RepellerModel
from pressurelab.models.measure import BernoulliMeasure, MarkovMeasure, MixtureMeasure
from pressurelab.models.subshift import Potential, Subshift

logger = logging.getLogger(__name__)

# Unstable eigenvalue of the cat map [[2, 1], [1, 1]]
CAT_LAMBDA = (3 + math.sqrt(5)) / 2


@lru_cache(maxsize=None)
def systems():
    return {
        'full-2': Subshift.full(2),
        'full-3': Subshift.full(3),
        'golden-mean': Subshift.golden_mean(),
        'two-sided-full-2': Subshift.full(2, 'two_sided', 'two-sided-full-2'),
        'two-sided-full-3': Subshift.full(3, 'two_sided', 'two-sided-full-3'),
    }


def _bernoulli(s, p, name):
    return BernoulliMeasure(s, (p, 1.0 - p), name)


@lru_cache(maxsize=None)
def measures():
    from pressurelab.services.dimension import entropy_matched_bernoulli

    full2 = systems()['full-2']
    golden = systems()['golden-mean']
    cat_base = systems()['two-sided-full-3']
    half, b07, b09 = _bernoulli(full2, 0.5, 'B(1/2)'), _bernoulli(full2, 0.7, 'B(0.7)'), _bernoulli(full2, 0.9, 'B(0.9)')
    cat_max = entropy_matched_bernoulli(cat_base, math.log(CAT_LAMBDA), 'cat-max')
    cat_half = entropy_matched_bernoulli(cat_base, 0.5 * math.log(CAT_LAMBDA), 'cat-half')
    return {
        'B(1/2)': half,
        'B(0.7)': b07,
        'B(0.9)': b09,
        'B(1,0)': BernoulliMeasure(full2, (1.0, 0.0), 'B(1,0)'),
        'mixture-1/2-0.9': MixtureMeasure((0.5, 0.5), (half, b09), 'mixture-1/2-0.9'),
        'mixture-0.7-0.9': MixtureMeasure((1 / 3, 2 / 3), (b07, b09), 'mixture-0.7-0.9'),
        'golden-markov': MarkovMeasure(golden, ((0.5, 0.5), (1.0, 0.0)), name='golden-markov'),
        'cat-max': cat_max,
        'cat-half': cat_half,
        'cat-mixture': MixtureMeasure((0.5, 0.5), (cat_max, cat_half), 'cat-mixture'),
    }


@lru_cache(maxsize=None)
def models():
    full2 = systems()['full-2']
    cat_base = systems()['two-sided-full-3']
    log_lam = math.log(CAT_LAMBDA)
    return {
        'middle-third': RepellerModel(Potential.constant(full2, math.log(3), 'log 3'), 1, 'middle-third'),
        'ratios-1/2-1/4': RepellerModel(
            Potential.from_symbols(full2, (math.log(2), math.log(4)), '(log 2, log 4)'), 1, 'ratios-1/2-1/4'
        ),
        'cat-surrogate': HyperbolicModel(
            Potential.constant(cat_base, log_lam, 'log lambda+'),
            Potential.constant(cat_base, -log_lam, '-log lambda+'),
            True, 2, 'cat-surrogate',
        ),
    }


def _lookup(table, name, kind):
    try:
        return table[name]
    except KeyError:
        raise ValidationError(f"unknown built-in {kind} {name!r}; known: {', '.join(sorted(table))}") from None


def get_system(name):
    return _lookup(systems(), name, 'system')


def get_measure(name):
    return _lookup(measures(), name, 'measure')


def get_model(name):
    return _lookup(models(), name, 'model')


def list_builtins():
    """
    Catalog entries with their oracle values.

    Returns:
        List of dicts with keys: kind, name, description, oracle, value.
    """
    from pressurelab.services.dimension import hausdorff_dim_oracle, hyperbolic_roots
    from pressurelab.services.measures import entropy
    from pressurelab.services.pressure import pressure_oracle

    catalog = []
    for name, s in systems().items():
        catalog.append({
            'kind': 'system', 'name': name,
            'description': f"{s.sided} SFT on {s.alphabet_size} symbols",
            'oracle': 'topological entropy (pressure of phi=0)',
            'value': pressure_oracle(s, Potential.constant(s, 0.0)),
        })
    for name, mu in measures().items():
        catalog.append({
            'kind': 'measure', 'name': name,
            'description': f"{mu.kind} on {mu.subshift}",
            'oracle': 'entropy h_mu',
            'value': entropy(mu).value,
        })
    for name, model in models().items():
        if isinstance(model, RepellerModel):
            value = hausdorff_dim_oracle(measures()['B(1/2)'], model).value
            oracle = 'dim_H of B(1/2)'
        else:
            value = hyperbolic_roots(measures()['cat-max'], model).value
            oracle = 'dim_H of cat-max'
        catalog.append({
            'kind': 'model', 'name': name,
            'description': f"{type(model).__name__} on {model.base}",
            'oracle': oracle,
            'value': value,
        })
    logger.debug(f"catalog has {len(catalog)} entries")
    return catalog
