"""Electrode loading: bilayer cutoff, composite velocity, center frequency, resistance.

A metal film on the plate lowers both the metallized-region cutoff (mass
loading of the thickness-shear resonance) and the longitudinal plate
velocity.  The cutoff comes from an exact bilayer transverse-resonance
condition; the composite velocity uses a rule-of-mixtures estimate
(thickness-weighted stiffness over thickness-weighted density), which
preserves the bare-plate limit and the heavier-metal ordering.  The
transducer center frequency is the root of

    f * L_open / v_open(f) + f * L_short / v_short(f) = 1

i.e. one acoustic wavelength fitting the cell, duty-cycle weighted between
the free and metallized regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import PlateSpec, a1_cutoff
from .errors import DesignInfeasibleError, InvalidArgumentError, SolverFailureError
from .materials import (
    ElectrodeMaterial,
    effective_longitudinal_velocity,
    longitudinal_velocity,
    shear_velocity,
)

F_CENTER_MAX = 20e9  # upper root bracket for the center-frequency solve


@dataclass(frozen=True)
class LayerStack:
    """Plate plus a metal overlayer of thickness metal_thickness (may be 0)."""

    plate: PlateSpec
    metal: ElectrodeMaterial
    metal_thickness: float

    def __post_init__(self):
        if self.metal_thickness < 0.0:
            raise InvalidArgumentError("metal thickness must be non-negative")


@dataclass(frozen=True)
class TransducerGeometry:
    """Interdigitated transducer geometry.

    Attributes:
        cell_length: cell pitch Lambda, m (one electrode pair per cell).
        n_cells: number of cascaded cells N.
        duty: electrode coverage fraction per cell (two electrodes of width
            duty*Lambda/2 each); 0.5 reproduces the quarter-pitch layout.
        aperture: acoustic aperture W_a, m.
        electrode_thickness: metal film thickness, m.
        electrode: electrode material.
    """

    cell_length: float
    n_cells: int
    aperture: float
    electrode: ElectrodeMaterial
    electrode_thickness: float
    duty: float = 0.5

    def __post_init__(self):
        if self.cell_length <= 0.0:
            raise InvalidArgumentError("cell length must be positive")
        if self.n_cells < 1:
            raise InvalidArgumentError("need at least one cell")
        if not 0.0 < self.duty < 1.0:
            raise InvalidArgumentError("duty must lie strictly between 0 and 1")
        if self.aperture <= 0.0:
            raise InvalidArgumentError("aperture must be positive")
        if self.electrode_thickness < 0.0:
            raise InvalidArgumentError("electrode thickness must be non-negative")

    @property
    def transducer_length(self) -> float:
        """Total transducer span L_T = N * Lambda, m."""
        return self.n_cells * self.cell_length

    @property
    def electrode_width(self) -> float:
        """Single electrode width, duty * Lambda / 2 (Lambda/4 at 50% duty)."""
        return self.duty * self.cell_length / 2.0

    def stack(self, plate: PlateSpec) -> LayerStack:
        return LayerStack(plate=plate, metal=self.electrode, metal_thickness=self.electrode_thickness)


def _bilayer_residual(f, stack: LayerStack):
    """Pole-free form of the bilayer cutoff condition.

    tan(a_m)/tan(a_p) = -(rho_p v_p)/(rho_m v_m) cleared to
    rho_m v_m sin(a_m) cos(a_p) + rho_p v_p sin(a_p) cos(a_m) = 0.
    """
    plate = stack.plate
    v_p = shear_velocity(plate.short)
    rho_p = plate.short.rho
    v_m = stack.metal.v_s
    rho_m = stack.metal.rho
    a_m = 2.0 * math.pi * f * stack.metal_thickness / v_m
    a_p = 2.0 * math.pi * f * plate.thickness_b / v_p
    return rho_m * v_m * np.sin(a_m) * np.cos(a_p) + rho_p * v_p * np.sin(a_p) * np.cos(a_m)


def bilayer_cutoff_short(stack: LayerStack, scan_points: int = 20000) -> float:
    """Metallized-region cutoff of the metal-on-plate stack, Hz.

    Smallest positive root of the bilayer transverse-resonance condition,
    located by sign-change scan plus bisection on (0, v_s_plate/t].  Reduces
    exactly to v_s/(2t) at zero metal thickness.
    """
    plate = stack.plate
    if stack.metal_thickness == 0.0:
        return a1_cutoff(plate, "short")
    f_hi = shear_velocity(plate.short) / plate.thickness_b
    fs = np.linspace(f_hi / scan_points, f_hi, scan_points)
    r = _bilayer_residual(fs, stack)
    sign = np.sign(r)
    idx = np.where(sign[:-1] * sign[1:] < 0.0)[0]
    if len(idx) == 0:
        raise SolverFailureError(
            f"no bilayer cutoff root in (0, {f_hi:.6g}] Hz for "
            f"{stack.metal.name} {stack.metal_thickness * 1e9:.1f} nm"
        )
    a, b = float(fs[idx[0]]), float(fs[idx[0] + 1])
    fa, fb = float(r[idx[0]]), float(r[idx[0] + 1])
    for _ in range(200):
        m = 0.5 * (a + b)
        if (b - a) < 1e-3 or m == a or m == b:
            break
        fm = float(_bilayer_residual(m, stack))
        if fm == 0.0:
            return m
        if (fa < 0.0) != (fm < 0.0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def stress_profile(stack: LayerStack, f_c: float, samples: int = 201) -> list[tuple[float, float]]:
    """Shear-stress profile through the stack thickness at the cutoff.

    Piecewise sine, zero on both free surfaces, amplitudes chosen so the two
    pieces agree at the interface, normalized to max |T| = 1.  The interface
    z = t is always included in the returned samples.
    """
    if samples < 2:
        raise InvalidArgumentError("need at least two samples")
    plate = stack.plate
    t = plate.thickness_b
    b = stack.metal_thickness
    v_p = shear_velocity(plate.short)
    zs = np.linspace(0.0, t + b, samples)
    if b > 0.0:
        zs = np.unique(np.append(zs, t))
        v_m = stack.metal.v_s
        # continuity at z=t: amp_p*sin(2pi f t/v_p) = amp_m*sin(2pi f b/v_m)
        amp_p = math.sin(2.0 * math.pi * f_c * b / v_m)
        amp_m = math.sin(2.0 * math.pi * f_c * t / v_p)
        vals = np.where(
            zs < t,
            amp_p * np.sin(2.0 * math.pi * f_c / v_p * zs),
            amp_m * np.sin(2.0 * math.pi * f_c / v_m * (t + b - zs)),
        )
    else:
        vals = np.sin(2.0 * math.pi * f_c / v_p * zs)
    peak = np.max(np.abs(vals))
    if peak > 0.0:
        vals = vals / peak
    return [(float(z), float(v)) for z, v in zip(zs, vals)]


def composite_vl_short(stack: LayerStack) -> float:
    """Rule-of-mixtures longitudinal velocity of the metallized stack, m/s.

    sqrt of (thickness-weighted stiffness) / (thickness-weighted density)
    with per-layer stiffness rho * v_l^2.  The paper-grade alternative is a
    finite-element solve; a config override can supply such values.
    """
    plate = stack.plate
    t = plate.thickness_b
    b = stack.metal_thickness
    v_p = longitudinal_velocity(plate.short)
    if b == 0.0:
        return v_p
    c_p = plate.short.rho * v_p * v_p
    c_m = stack.metal.rho * stack.metal.v_l * stack.metal.v_l
    num = t * c_p + b * c_m
    den = t * plate.short.rho + b * stack.metal.rho
    return math.sqrt(num / den)


def center_frequency(
    geom: TransducerGeometry,
    plate: PlateSpec,
    loaded: LayerStack | None = None,
    fc_short: float | None = None,
    vl_short: float | None = None,
) -> float:
    """Transducer center frequency, Hz.

    Solves f*L_open/v_open(f) + f*L_short/v_short(f) = 1 by bisection on
    (max cutoff, 20 GHz).  With `loaded` given, the metallized-region cutoff
    and longitudinal velocity come from the bilayer and rule-of-mixtures
    models; otherwise the electrodes are treated as massless.  Explicit
    fc_short / vl_short values (e.g. finite-element results) win over both.
    """
    lam = geom.cell_length
    l_open = (1.0 - geom.duty) * lam
    l_short = geom.duty * lam
    fc_open = a1_cutoff(plate, "open")
    vl_open = effective_longitudinal_velocity(plate.open)
    if fc_short is None:
        fc_short = bilayer_cutoff_short(loaded) if loaded is not None else a1_cutoff(plate, "short")
    if vl_short is None:
        vl_short = (
            composite_vl_short(loaded)
            if loaded is not None
            else effective_longitudinal_velocity(plate.short)
        )

    fc_max = max(fc_open, fc_short)

    def g(f: float) -> float:
        # f/v_p(f) written as sqrt(f^2 - fc^2)/v_l; strictly increasing in f
        return (
            l_open * math.sqrt(f * f - fc_open * fc_open) / vl_open
            + l_short * math.sqrt(f * f - fc_short * fc_short) / vl_short
            - 1.0
        )

    lo = fc_max * (1.0 + 1e-12)
    hi = F_CENTER_MAX
    if g(hi) < 0.0 or g(lo) > 0.0:
        raise DesignInfeasibleError(
            f"no center frequency in ({fc_max:.4g}, {F_CENTER_MAX:.3g}) Hz for "
            f"cell length {lam * 1e6:.3g} um"
        )
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (hi - lo) < 1e-3 or mid == lo or mid == hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (glo < 0.0) != (gm < 0.0):
            hi = mid
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)


def electrode_resistance(geom: TransducerGeometry) -> tuple[float, float]:
    """(R_ele, R_s): single-IDT distributed resistance and transducer series
    resistance, Ohms.

    R_ele = 2 * rho_sheet * W_a / (3 * t * w_e) with w_e the electrode width,
    R_s = 2 * R_ele / N.
    """
    if geom.electrode_thickness <= 0.0:
        raise InvalidArgumentError("electrode thickness must be positive for resistance")
    rho_s = geom.electrode.sheet_resistivity
    r_ele = 2.0 * rho_s * geom.aperture / (3.0 * geom.electrode_thickness * geom.electrode_width)
    r_s = 2.0 * r_ele / geom.n_cells
    return r_ele, r_s
