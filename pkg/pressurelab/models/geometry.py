# pressurelab/models/geometry.py

"""
Geometric realizations used for dimension computations.

RepellerModel: an interval repeller coded by a one-sided subshift; cylinder
intervals of the word x_0..x_{n-1} have length exp(-S_n phi_geom).

HyperbolicModel: a symbolic surrogate of a hyperbolic set on a two-sided
subshift with unstable/stable log-expansion potentials phi_u > 0 > phi_s.
"""

from dataclasses import dataclass, field

from pressurelab.errors import ValidationError
from pressurelab.models.subshift import Potential


@dataclass(frozen=True)
class RepellerModel:
    geometry: Potential
    ambient_dim: int = 1
    name: str = field(default='', compare=False)

    def __post_init__(self):
        if self.base.two_sided:
            raise ValidationError("repeller models need a one-sided base subshift")
        if self.geometry.min <= 0:
            raise ValidationError("phi_geom must be > 0 on every admissible word (uniform expansion)")

    @property
    def base(self):
        return self.geometry.subshift

    def scaled(self, c):
        """Same model with phi_geom replaced by c * phi_geom."""
        if c <= 0:
            raise ValidationError(f"geometry scale must be > 0 (got {c})")
        return RepellerModel(self.geometry.scaled(c), self.ambient_dim, self.name)

    def __str__(self):
        return self.name or 'repeller'


@dataclass(frozen=True)
class HyperbolicModel:
    phi_u: Potential
    phi_s: Potential
    volume_preserving: bool = True
    ambient_dim: int = 2
    name: str = field(default='', compare=False)

    def __post_init__(self):
        if self.phi_u.subshift != self.phi_s.subshift:
            raise ValidationError("phi_u and phi_s must live on the same subshift")
        if not self.base.two_sided:
            raise ValidationError("hyperbolic models need a two-sided base subshift")
        if self.phi_u.min <= 0:
            raise ValidationError("phi_u must be > 0 on every admissible word")
        if self.phi_s.max >= 0:
            raise ValidationError("phi_s must be < 0 on every admissible word")

    @property
    def base(self):
        return self.phi_u.subshift

    def __str__(self):
        return self.name or 'hyperbolic'
