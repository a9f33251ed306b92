# pressurelab/models/__init__.py
from pressurelab.models.geometry import HyperbolicModel, RepellerModel
from pressurelab.models.measure import (
    BernoulliMeasure,
    Decomposition,
    EmpiricalMeasure,
    MarkovMeasure,
    MixtureMeasure,
    NeighborhoodSpec,
)
from pressurelab.models.subshift import CylinderUnion, HammingParams, Potential, Subshift

__all__ = [
    'Subshift', 'Potential', 'HammingParams', 'CylinderUnion',
    'BernoulliMeasure', 'MarkovMeasure', 'MixtureMeasure', 'EmpiricalMeasure', 'NeighborhoodSpec', 'Decomposition',
    'RepellerModel', 'HyperbolicModel',
]
