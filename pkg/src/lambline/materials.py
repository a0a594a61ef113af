"""Material constants and quasi-static velocity/stiffening relations.

A thin piezoelectric plate is described by one isotropicized stiffness pair
(c11, c44) per electrical boundary condition: "short" for a metallized
surface (bare elastic constants) and "open" for a free surface (stiffened
constants).  Bulk wave speeds follow from sqrt(c/rho); everything downstream
(cutoffs, dispersion, transducer design) is parameterized by these four
numbers plus the density.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class MaterialSet:
    """Isotropicized elastic constants for one electrical boundary condition.

    Attributes:
        name: label, e.g. "linbo3_short".
        c11: longitudinal stiffness, Pa.
        c44: shear stiffness, Pa.
        rho: mass density, kg/m^3.
        v_l_override: optional tabulated longitudinal velocity, m/s.  When
            set it takes precedence over sqrt(c11/rho) in every plate-wave
            formula (the constants and the tabulated plate velocity of a
            real film do not have to be perfectly consistent).
    """

    name: str
    c11: float
    c44: float
    rho: float
    v_l_override: float | None = None

    def __post_init__(self):
        if not (self.c11 > self.c44 > 0.0):
            raise InvalidArgumentError(
                f"{self.name}: need c11 > c44 > 0, got c11={self.c11}, c44={self.c44}"
            )
        if self.rho <= 0.0:
            raise InvalidArgumentError(f"{self.name}: density must be positive, got {self.rho}")
        if self.v_l_override is not None and self.v_l_override <= 0.0:
            raise InvalidArgumentError(f"{self.name}: v_l_override must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MaterialSet":
        return cls(**d)


@dataclass(frozen=True)
class ElectrodeMaterial:
    """Bulk constants of an electrode metal.

    Attributes:
        name: label, e.g. "al".
        rho: density, kg/m^3.
        v_s: bulk shear velocity, m/s.
        v_l: bulk longitudinal velocity, m/s.
        resistivity: bulk electrical resistivity, Ohm*m.
        resistivity_scale: thin-film multiplier applied to the bulk
            resistivity (sputtered films are markedly more resistive).
    """

    name: str
    rho: float
    v_s: float
    v_l: float
    resistivity: float
    resistivity_scale: float = 3.0

    def __post_init__(self):
        for field in ("rho", "v_s", "v_l", "resistivity", "resistivity_scale"):
            if getattr(self, field) <= 0.0:
                raise InvalidArgumentError(f"{self.name}: {field} must be positive")
        if self.v_l <= self.v_s:
            raise InvalidArgumentError(f"{self.name}: need v_l > v_s")

    @property
    def sheet_resistivity(self) -> float:
        """Effective thin-film resistivity, Ohm*m."""
        return self.resistivity * self.resistivity_scale

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ElectrodeMaterial":
        return cls(**d)


# Z-cut lithium niobate, quasi-static isotropic approximation.  The "open"
# set carries the tabulated plate velocity 6795 m/s, which differs from
# sqrt(c11/rho) = 6826 m/s by 0.46%; the tabulated value is the default so
# that worked device frequencies track it (longitudinal_velocity still
# reports the computed one).
LINBO3_SHORT = MaterialSet(name="linbo3_short", c11=2.03e11, c44=0.60e11, rho=4700.0)
LINBO3_OPEN = MaterialSet(
    name="linbo3_open", c11=2.19e11, c44=0.95e11, rho=4700.0, v_l_override=6795.0
)

# Handbook electrode constants (not part of the film model; user-overridable
# via the CLI config).
ELECTRODES = {
    "al": ElectrodeMaterial("al", rho=2700.0, v_s=3100.0, v_l=6420.0, resistivity=2.65e-8),
    "au": ElectrodeMaterial("au", rho=19300.0, v_s=1200.0, v_l=3240.0, resistivity=2.44e-8),
    "mo": ElectrodeMaterial("mo", rho=10220.0, v_s=3350.0, v_l=6250.0, resistivity=5.34e-8),
}


def builtin_linbo3() -> tuple[MaterialSet, MaterialSet]:
    """Return the built-in (short, open) LiNbO3 material sets."""
    return LINBO3_SHORT, LINBO3_OPEN


def builtin_electrode(name: str) -> ElectrodeMaterial:
    """Look up a built-in electrode metal by name (al, au, mo)."""
    try:
        return ELECTRODES[name.lower()]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown electrode material {name!r}; built-ins: {sorted(ELECTRODES)}"
        ) from None


def longitudinal_velocity(m: MaterialSet) -> float:
    """Longitudinal bulk velocity sqrt(c11/rho), m/s."""
    return math.sqrt(m.c11 / m.rho)


def shear_velocity(m: MaterialSet) -> float:
    """Shear bulk velocity sqrt(c44/rho), m/s."""
    return math.sqrt(m.c44 / m.rho)


def effective_longitudinal_velocity(m: MaterialSet) -> float:
    """Longitudinal velocity used by the plate-wave model.

    The tabulated override wins when present; otherwise sqrt(c11/rho).
    """
    if m.v_l_override is not None:
        return m.v_l_override
    return longitudinal_velocity(m)


def stiffen(c_e: float, e_eff: float, eps_eff: float) -> float:
    """Piezoelectrically stiffened elastic constant, reduced scalar form.

    c_stiffened = c_e + e_eff^2 / eps_eff, with e_eff an effective
    piezoelectric constant (C/m^2) and eps_eff an effective permittivity
    (F/m).  Always >= c_e.
    """
    if eps_eff <= 0.0:
        raise InvalidArgumentError(f"eps_eff must be positive, got {eps_eff}")
    return c_e + e_eff * e_eff / eps_eff


def material_to_json(m: MaterialSet | ElectrodeMaterial) -> str:
    """Serialize a material to JSON (floats round-trip bit-exactly)."""
    return json.dumps(m.to_dict())


def material_set_from_json(text: str) -> MaterialSet:
    return MaterialSet.from_dict(json.loads(text))


def electrode_from_json(text: str) -> ElectrodeMaterial:
    return ElectrodeMaterial.from_dict(json.loads(text))
