# pressurelab/models/experiment.py

"""
Parsed experiment configuration.

An ExperimentConfig is produced by commands.helper_functions.parse_config()
from a JSON document; by the time it exists every object in it is a validated
model instance and every schedule value is inside the configured caps.
"""

from dataclasses import dataclass, field
from typing import Optional

TASKS = ('pressure', 'sp', 'cp', 'entropy', 'pointwise', 'dimension', 'hyperbolic', 'lemma-check')


@dataclass(frozen=True)
class Schedule:
    n: tuple = ()
    eps_exponents: tuple = (0,)
    delta: tuple = ()
    theta: tuple = ()
    L: tuple = (1,)
    D: tuple = ()
    N: tuple = ()
    k: tuple = ()
    log_radii: tuple = ()

    @property
    def eps_values(self):
        return tuple(2.0 ** -m for m in self.eps_exponents)


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    system: Optional[object]
    potentials: tuple
    measures: tuple
    models: tuple
    schedule: Schedule
    seeds: tuple = ()
    mode: str = 'n_eps'
    orbit_length: int = 10_000
    samples_per_component: int = 50
    cylinders: Optional[object] = None
    output_path: str = 'results'
    output_format: str = 'csv'
    raw: dict = field(default_factory=dict, compare=False)
