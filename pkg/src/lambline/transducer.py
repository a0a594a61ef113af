"""Delta-function transducer model: array response and port immittance.

Each electrode is a delta source of alternating polarity at its center; the
array response is the polarity-weighted sum of propagation phasors with the
duty-averaged plate wavenumber.  Radiation conductance follows the response
squared with a peak value calibrated from the classic interdigitated-
transducer scaling G0 = 8 k^2 f0 C0 N, the susceptance is its Hilbert
transform, and the electrical port adds the static capacitance and the
electrode series resistance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from . import dispersion as disp
from .errors import InvalidArgumentError, ResolutionError
from .loading import LayerStack, TransducerGeometry, bilayer_cutoff_short, center_frequency, composite_vl_short, electrode_resistance
from .materials import effective_longitudinal_velocity

EPS0 = 8.8541878128e-12
# Effective surface permittivity of Z-cut LiNbO3 for the parallel-plate-style
# per-cell capacitance estimate (clamped constants, geometric mean).
EPS_EFF_LINBO3 = 35.0
C_CELL_PER_APERTURE = EPS0 * (1.0 + EPS_EFF_LINBO3)  # F per cell per meter of aperture
MIN_LOBE_POINTS = 64


@dataclass
class TransducerResponse:
    """Sampled transducer frequency response and immittance.

    h is the array response normalized to unit grid maximum; ga/ba are the
    radiation conductance and susceptance in S; c0 the static capacitance in
    F; r_s the electrode series resistance in Ohms.
    """

    f_grid: np.ndarray
    h: np.ndarray
    ga: np.ndarray
    ba: np.ndarray
    c0: float
    r_s: float
    g0: float
    f_center: float

    def port_impedance(self) -> np.ndarray:
        """Electrical port impedance r_s + 1/(ga + j(ba + w*c0)) per grid point."""
        w = 2.0 * math.pi * self.f_grid
        return self.r_s + 1.0 / (self.ga + 1j * (self.ba + w * self.c0))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["f_hz", "re_h", "im_h", "ga_s", "ba_s"])
            for f, h, g, b in zip(self.f_grid, self.h, self.ga, self.ba):
                w.writerow([f"{f:.12g}", f"{h.real:.12g}", f"{h.imag:.12g}", f"{g:.12g}", f"{b:.12g}"])


def electrode_positions(geom: TransducerGeometry) -> list[tuple[float, int]]:
    """Electrode centers and polarities.

    2N electrodes at x = (k + 0.25) * Lambda/2 for k = 0..2N-1, alternating
    polarity starting with +1, measured from the transducer's left edge.
    """
    lam = geom.cell_length
    out = []
    for k in range(2 * geom.n_cells):
        out.append(((k + 0.25) * lam / 2.0, 1 if k % 2 == 0 else -1))
    return out


def _avg_wavenumber(f, plate: disp.PlateSpec, geom: TransducerGeometry,
                    dispersion_source: str):
    """Duty-averaged complex wavenumber under the transducer."""
    if dispersion_source == "massless":
        beta_short = disp.a1_beta(f, plate, "short")
    elif dispersion_source == "loaded":
        stack = geom.stack(plate)
        fc_s = bilayer_cutoff_short(stack)
        vl_s = composite_vl_short(stack)
        beta_short = _beta_from(f, fc_s, vl_s)
    else:
        raise InvalidArgumentError(
            f"dispersion_source must be 'massless' or 'loaded', got {dispersion_source!r}"
        )
    beta_open = disp.a1_beta(f, plate, "open")
    return geom.duty * beta_short + (1.0 - geom.duty) * beta_open


def _beta_from(f, fc: float, vl: float):
    f = np.asarray(f, dtype=float)
    af = np.abs(f)
    out = np.empty(f.shape, dtype=complex)
    prop = af > fc
    out[prop] = np.sign(f[prop]) * 2.0 * math.pi * np.sqrt(f[prop] ** 2 - fc * fc) / vl
    out[~prop] = -2j * math.pi * np.sqrt(fc * fc - f[~prop] ** 2) / vl
    return out


def array_response(geom: TransducerGeometry, plate: disp.PlateSpec, f,
                   dispersion_source: str = "massless", centered: bool = False):
    """Complex array response h(f) = (1/2N) sum_n pol_n exp(-j beta x_n).

    Below the relevant cutoffs beta continues evanescently, so the response
    decays instead of oscillating.  |h| <= 1 with equality at the frequency
    where the average acoustic wavelength equals the cell length.  With
    centered=True positions are taken relative to the transducer midpoint,
    removing the phase-center delay (used when composing a delay line whose
    path length already includes the half-transducers).
    """
    beta = _avg_wavenumber(f, plate, geom, dispersion_source)
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    pos = electrode_positions(geom)
    offset = geom.transducer_length / 2.0 if centered else 0.0
    x = np.array([p[0] for p in pos]) - offset
    pol = np.array([p[1] for p in pos], dtype=float)
    h = (pol[None, :] * np.exp(-1j * np.outer(beta, x))).sum(axis=1) / (2.0 * geom.n_cells)
    if np.ndim(f) == 0:
        return complex(h[0])
    return h


def design_k2(geom: TransducerGeometry, plate: disp.PlateSpec) -> float:
    """Coupling estimate for the design wavelength: open/short phase
    velocities at their respective decoupled-model frequencies."""
    lam = geom.cell_length
    v_f = lam * disp.a1_freq(lam, plate, "open")
    v_m = lam * disp.a1_freq(lam, plate, "short")
    return disp.k2_from_velocities(v_f, v_m)


def admittance(
    geom: TransducerGeometry,
    plate: disp.PlateSpec,
    f_grid: np.ndarray,
    dispersion_source: str = "massless",
    c_cell_per_aperture: float = C_CELL_PER_APERTURE,
    k2: float | None = None,
) -> TransducerResponse:
    """Transducer immittance on a frequency grid.

    ga = G0 |h|^2 with G0 = 8 k^2 f_center C0 N; ba is the discrete Hilbert
    transform of ga; c0 = N * c_cell * W_a.  Raises ResolutionError when the
    grid puts fewer than 64 points across the response main lobe (the
    Hilbert transform would alias).
    """
    f_grid = np.asarray(f_grid, dtype=float)
    if f_grid.ndim != 1 or len(f_grid) < 2:
        raise InvalidArgumentError("need a 1-D frequency grid with at least two points")
    loaded = geom.stack(plate) if dispersion_source == "loaded" else None
    f0 = center_frequency(geom, plate, loaded=loaded)
    h = array_response(geom, plate, f_grid, dispersion_source)
    mag2 = np.abs(h) ** 2
    peak = mag2.max()
    if peak <= 0.0:
        raise ResolutionError("grid does not cover the transducer response at all")
    lobe_points = _main_lobe_count(mag2)
    if lobe_points < MIN_LOBE_POINTS:
        raise ResolutionError(
            f"only {lobe_points} grid points across the response main lobe; "
            f"need at least {MIN_LOBE_POINTS} for a usable Hilbert transform"
        )
    h_n = h / math.sqrt(peak)
    c0 = geom.n_cells * c_cell_per_aperture * geom.aperture
    if k2 is None:
        k2 = design_k2(geom, plate)
    g0 = 8.0 * k2 * f0 * c0 * geom.n_cells
    ga = g0 * np.abs(h_n) ** 2
    ba = -np.imag(hilbert(ga))
    _, r_s = electrode_resistance(geom)
    return TransducerResponse(
        f_grid=f_grid, h=h_n, ga=ga, ba=ba, c0=c0, r_s=r_s, g0=g0, f_center=f0
    )


def _main_lobe_count(mag2: np.ndarray) -> int:
    """Number of contiguous grid points at or above half of the peak."""
    i0 = int(np.argmax(mag2))
    half = mag2[i0] / 2.0
    lo = i0
    while lo > 0 and mag2[lo - 1] >= half:
        lo -= 1
    hi = i0
    while hi < len(mag2) - 1 and mag2[hi + 1] >= half:
        hi += 1
    return hi - lo + 1
