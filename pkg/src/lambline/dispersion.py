"""Lamb-wave dispersion: exact Rayleigh-Lamb branches and the decoupled A1 model.

The exact characteristic equation for a free isotropic plate of thickness b
(half-thickness h = b/2) is

    tan(k_ts h) / tan(k_tl h) = -[4 b^2 k_ts k_tl / (k_ts^2 - b^2)^2]^(+-1)

with k_tl^2 = (w/v_l)^2 - beta^2 and k_ts^2 = (w/v_s)^2 - beta^2, "+" for
symmetric and "-" for antisymmetric modes.  Internally the equation is
evaluated in a cleared, pole-free product form written with even functions
of k^2, so the evanescent continuation tan(ix) = i tanh(x) needs no complex
arithmetic and sign-change scanning is safe everywhere.

The decoupled A1 model replaces all of this with

    f^2 = f_c^2 + (v_l / lambda)^2,     f_c = v_s / (2 b)

which is accurate for small thickness-to-wavelength ratios.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AboveCutoffError, BelowCutoffError, InvalidArgumentError
from .materials import (
    MaterialSet,
    effective_longitudinal_velocity,
    longitudinal_velocity,
    shear_velocity,
)

IMAG_ZERO_TOL = 0.0  # beta_imag stored exactly 0 for propagating points


@dataclass(frozen=True)
class PlateSpec:
    """A suspended piezoelectric plate: thickness plus both material sets."""

    thickness_b: float
    short: MaterialSet
    open: MaterialSet

    def __post_init__(self):
        if self.thickness_b <= 0.0:
            raise InvalidArgumentError(f"plate thickness must be positive, got {self.thickness_b}")

    def set_for(self, bc: str) -> MaterialSet:
        if bc == "short":
            return self.short
        if bc == "open":
            return self.open
        raise InvalidArgumentError(f"boundary condition must be 'short' or 'open', got {bc!r}")


@dataclass(frozen=True)
class DispersionPoint:
    """One sampled point of a dispersion branch.

    Exactly one of (beta, beta_imag) is nonzero except at cutoff, where both
    vanish.  vp/vg are None where undefined (beta = 0 or branch endpoints).
    """

    f: float
    beta: float
    beta_imag: float = 0.0
    vp: float | None = None
    vg: float | None = None

    def __post_init__(self):
        if self.f <= 0.0:
            raise InvalidArgumentError("point frequency must be positive")
        if self.beta < 0.0 or self.beta_imag < 0.0:
            raise InvalidArgumentError("wavenumbers are stored non-negative")
        if self.beta > 0.0 and self.beta_imag > 0.0:
            raise InvalidArgumentError("a point is either propagating or evanescent, not both")


@dataclass
class DispersionCurve:
    """A single mode branch for one boundary condition."""

    mode_label: str
    bc: str
    points: list[DispersionPoint] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    CSV_HEADER = ["f_hz", "beta_rad_per_m", "beta_imag_rad_per_m", "vp_m_per_s", "vg_m_per_s", "mode", "bc"]

    def frequencies(self) -> np.ndarray:
        return np.array([p.f for p in self.points])

    def betas(self) -> np.ndarray:
        return np.array([p.beta for p in self.points])

    def write_csv(self, path) -> None:
        write_curves_csv([self], path)


def write_curves_csv(curves: list[DispersionCurve], path) -> None:
    """Serialize one or more branches to a single CSV file."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DispersionCurve.CSV_HEADER)
        for c in curves:
            for p in c.points:
                w.writerow([
                    f"{p.f:.12g}",
                    f"{p.beta:.12g}",
                    f"{p.beta_imag:.12g}",
                    "" if p.vp is None else f"{p.vp:.12g}",
                    "" if p.vg is None else f"{p.vg:.12g}",
                    c.mode_label,
                    c.bc,
                ])


def read_curves_csv(path) -> list[DispersionCurve]:
    """Inverse of write_curves_csv; groups rows by (mode, bc)."""
    groups: dict[tuple[str, str], DispersionCurve] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != DispersionCurve.CSV_HEADER:
            raise InvalidArgumentError(f"unexpected dispersion CSV header: {header}")
        for row in r:
            key = (row[5], row[6])
            curve = groups.setdefault(key, DispersionCurve(mode_label=row[5], bc=row[6]))
            curve.points.append(
                DispersionPoint(
                    f=float(row[0]),
                    beta=float(row[1]),
                    beta_imag=float(row[2]),
                    vp=float(row[3]) if row[3] else None,
                    vg=float(row[4]) if row[4] else None,
                )
            )
    return list(groups.values())


# --- pole-free characteristic function -------------------------------------
#
# Writing q = k_ts, p = k_tl, the cleared antisymmetric form is
#     4 b^2 [q sin(qh)] cos(ph) + (q^2-b^2)^2 [sin(ph)/p] cos(qh)
# and the symmetric form swaps the roles of the bracketed factors.  Each
# bracket depends on k^2 only, so negative k^2 (evanescent partial waves)
# evaluates through sinh/cosh with plain real arithmetic.


def _ksin(k2: np.ndarray, h: float) -> np.ndarray:
    """k*sin(k h) continued to negative k^2 (= -kappa*sinh(kappa h))."""
    k2 = np.asarray(k2, dtype=float)
    out = np.empty_like(k2)
    pos = k2 >= 0.0
    k = np.sqrt(k2[pos])
    out[pos] = k * np.sin(k * h)
    kap = np.sqrt(-k2[~pos])
    out[~pos] = -kap * np.sinh(kap * h)
    return out


def _cosk(k2: np.ndarray, h: float) -> np.ndarray:
    """cos(k h) continued to negative k^2 (= cosh(kappa h))."""
    k2 = np.asarray(k2, dtype=float)
    out = np.empty_like(k2)
    pos = k2 >= 0.0
    out[pos] = np.cos(np.sqrt(k2[pos]) * h)
    out[~pos] = np.cosh(np.sqrt(-k2[~pos]) * h)
    return out


def _sinc_k(k2: np.ndarray, h: float) -> np.ndarray:
    """sin(k h)/k continued to negative k^2 (= sinh(kappa h)/kappa); h at k=0."""
    k2 = np.asarray(k2, dtype=float)
    out = np.full_like(k2, h)
    pos = k2 > 0.0
    neg = k2 < 0.0
    k = np.sqrt(k2[pos])
    out[pos] = np.sin(k * h) / k
    kap = np.sqrt(-k2[neg])
    out[neg] = np.sinh(kap * h) / kap
    return out


def _env_ksin(k2: np.ndarray, h: float) -> np.ndarray:
    """Envelope of |k sin(k h)|: k for oscillatory k, exact for hyperbolic."""
    k2 = np.asarray(k2, dtype=float)
    out = np.empty_like(k2)
    pos = k2 >= 0.0
    out[pos] = np.sqrt(k2[pos])
    kap = np.sqrt(-k2[~pos])
    out[~pos] = kap * np.sinh(kap * h)
    return out


def _env_cos(k2: np.ndarray, h: float) -> np.ndarray:
    k2 = np.asarray(k2, dtype=float)
    out = np.ones_like(k2)
    neg = k2 < 0.0
    out[neg] = np.cosh(np.sqrt(-k2[neg]) * h)
    return out


def _env_sinc(k2: np.ndarray, h: float) -> np.ndarray:
    """Envelope of |sin(k h)/k|: min(h, 1/k) oscillatory, exact hyperbolic."""
    k2 = np.asarray(k2, dtype=float)
    out = np.full_like(k2, h)
    pos = k2 > 0.0
    neg = k2 < 0.0
    k = np.sqrt(k2[pos])
    out[pos] = np.minimum(h, 1.0 / k)
    kap = np.sqrt(-k2[neg])
    out[neg] = np.sinh(kap * h) / kap
    return out


def _char_terms(f, beta, plate: PlateSpec, bc: str, symmetry: str):
    """The two product terms of the cleared characteristic equation together
    with their magnitude envelopes (for normalization)."""
    m = plate.set_for(bc)
    v_l = longitudinal_velocity(m)
    v_s = shear_velocity(m)
    h = plate.thickness_b / 2.0
    f = np.asarray(f, dtype=float)
    beta = np.asarray(beta, dtype=float)
    w = 2.0 * math.pi * f
    b2 = beta * beta
    ktl2 = (w / v_l) ** 2 - b2
    kts2 = (w / v_s) ** 2 - b2
    if symmetry == "antisym":
        t1 = 4.0 * b2 * _ksin(kts2, h) * _cosk(ktl2, h)
        t2 = (kts2 - b2) ** 2 * _sinc_k(ktl2, h) * _cosk(kts2, h)
        e1 = 4.0 * b2 * _env_ksin(kts2, h) * _env_cos(ktl2, h)
        e2 = (kts2 - b2) ** 2 * _env_sinc(ktl2, h) * _env_cos(kts2, h)
    elif symmetry == "sym":
        t1 = (kts2 - b2) ** 2 * _sinc_k(kts2, h) * _cosk(ktl2, h)
        t2 = 4.0 * b2 * _ksin(ktl2, h) * _cosk(kts2, h)
        e1 = (kts2 - b2) ** 2 * _env_sinc(kts2, h) * _env_cos(ktl2, h)
        e2 = 4.0 * b2 * _env_ksin(ktl2, h) * _env_cos(kts2, h)
    else:
        raise InvalidArgumentError(f"symmetry must be 'sym' or 'antisym', got {symmetry!r}")
    return t1, t2, e1, e2


def rayleigh_lamb_residual(f, beta, plate: PlateSpec, bc: str, symmetry: str):
    """Normalized Rayleigh-Lamb characteristic residual.

    Zero exactly on a dispersion branch of the requested symmetry and
    bounded to [-1, 1]: the two product terms of the cleared (pole-free)
    characteristic equation are normalized by the sum of their magnitude
    envelopes, so the value stays meaningful even where one term vanishes
    identically (e.g. beta = 0).  Accepts scalars or arrays (broadcast).
    """
    t1, t2, e1, e2 = _char_terms(f, beta, plate, bc, symmetry)
    scale = e1 + e2
    scale = np.where(scale > 0.0, scale, 1.0)
    r = (t1 + t2) / scale
    if r.ndim == 0:
        return float(r)
    return r


def a1_cutoff(plate: PlateSpec, bc: str) -> float:
    """A1 cutoff frequency f_c = v_s / (2 b), Hz."""
    return shear_velocity(plate.set_for(bc)) / (2.0 * plate.thickness_b)


def a1_freq(lam: float, plate: PlateSpec, bc: str) -> float:
    """Decoupled-model A1 frequency for wavelength lam: sqrt(f_c^2 + (v_l/lam)^2)."""
    if lam <= 0.0:
        raise InvalidArgumentError(f"wavelength must be positive, got {lam}")
    fc = a1_cutoff(plate, bc)
    vl = effective_longitudinal_velocity(plate.set_for(bc))
    return math.hypot(fc, vl / lam)


def a1_vp(f: float, plate: PlateSpec, bc: str) -> float:
    """Decoupled-model phase velocity v_l / sqrt(1 - (f_c/f)^2), m/s."""
    fc = a1_cutoff(plate, bc)
    if f <= fc:
        raise BelowCutoffError(
            f"f = {f:.6g} Hz is at or below the {bc} cutoff {fc:.6g} Hz; "
            "use evanescent_decay for the decay constant instead"
        )
    vl = effective_longitudinal_velocity(plate.set_for(bc))
    return vl / math.sqrt(1.0 - (fc / f) ** 2)


def a1_vg(f: float, plate: PlateSpec, bc: str) -> float:
    """Decoupled-model group velocity v_l * sqrt(1 - (f_c/f)^2), m/s."""
    fc = a1_cutoff(plate, bc)
    if f <= fc:
        raise BelowCutoffError(
            f"f = {f:.6g} Hz is at or below the {bc} cutoff {fc:.6g} Hz"
        )
    vl = effective_longitudinal_velocity(plate.set_for(bc))
    return vl * math.sqrt(1.0 - (fc / f) ** 2)


def a1_beta(f, plate: PlateSpec, bc: str):
    """Decoupled-model complex wavenumber, odd in f, -j*kappa below cutoff.

    Returns 2*pi*sqrt(f^2 - f_c^2)/v_l above cutoff and -2j*pi*
    sqrt(f_c^2 - f^2)/v_l below, so exp(-j*beta*x) propagates with decay in
    +x and the f -> -f extension is conjugate-symmetric.
    """
    fc = a1_cutoff(plate, bc)
    vl = effective_longitudinal_velocity(plate.set_for(bc))
    f = np.asarray(f, dtype=float)
    af = np.abs(f)
    out = np.empty(f.shape, dtype=complex)
    prop = af > fc
    out[prop] = np.sign(f[prop]) * 2.0 * math.pi * np.sqrt(f[prop] ** 2 - fc * fc) / vl
    out[~prop] = -2j * math.pi * np.sqrt(fc * fc - f[~prop] ** 2) / vl
    if out.ndim == 0:
        return complex(out)
    return out


def evanescent_decay(f: float, plate: PlateSpec, bc: str) -> float:
    """Evanescent amplitude decay constant below cutoff, 1/m.

    Amplitude over a distance d decays as exp(-decay * d).
    """
    fc = a1_cutoff(plate, bc)
    if f > fc:
        raise AboveCutoffError(f"f = {f:.6g} Hz is above the {bc} cutoff {fc:.6g} Hz")
    vl = effective_longitudinal_velocity(plate.set_for(bc))
    return 2.0 * math.pi * math.sqrt(fc * fc - f * f) / vl


def k2_from_velocities(v_f: float, v_m: float) -> float:
    """Electromechanical coupling k^2 = (v_f^2 - v_m^2) / v_m^2."""
    if v_m <= 0.0:
        raise InvalidArgumentError("v_m must be positive")
    if v_f < v_m:
        raise InvalidArgumentError(
            f"open-surface velocity {v_f} must not be below short-surface velocity {v_m}"
        )
    return (v_f * v_f - v_m * v_m) / (v_m * v_m)


# --- full-equation branch solving -------------------------------------------

F_SCAN_MIN = 1e3  # Hz; low enough that A0 is caught at the smallest betas
F_REFINE_TOL = 1e-3  # Hz; bisection interval width at convergence


def _bisect_root(fun, a: float, b: float, fa: float, fb: float) -> float:
    """Bisection to F_REFINE_TOL interval width (well past the 1 kHz contract,
    so the on-branch residual lands near machine level)."""
    for _ in range(200):
        m = 0.5 * (a + b)
        if (b - a) < F_REFINE_TOL or m == a or m == b:
            return m
        fm = fun(m)
        if fm == 0.0:
            return m
        if (fa < 0.0) != (fm < 0.0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _roots_in_f(plate, bc, symmetry, beta: float, f_grid: np.ndarray, max_roots: int) -> list[float]:
    r = rayleigh_lamb_residual(f_grid, beta, plate, bc, symmetry)
    sign = np.sign(r)
    idx = np.where(sign[:-1] * sign[1:] < 0.0)[0]
    roots = []
    fun = lambda f: rayleigh_lamb_residual(f, beta, plate, bc, symmetry)
    for i in idx[:max_roots]:
        roots.append(_bisect_root(fun, f_grid[i], f_grid[i + 1], r[i], r[i + 1]))
    # exact grid-point zeros (e.g. beta = 0 landing on a cutoff)
    for i in np.where(sign == 0.0)[0]:
        roots.append(float(f_grid[i]))
    return sorted(roots)[:max_roots]


def _align_roots(prev: list[float | None], roots: list[float]) -> list[float | None]:
    """Order-preserving assignment of sorted roots to tracked branches.

    Branches never cross within one symmetry family, so the roots of one
    scan map to branch slots in order; missing roots (not found at this
    beta) leave gaps chosen to minimize total |f - f_prev|.
    """
    n_b = len(prev)
    n_r = len(roots)
    if n_r >= n_b:
        return list(roots[:n_b])
    # choose which branch slots the n_r roots occupy (order preserved)
    best, best_cost = None, math.inf
    from itertools import combinations

    for slots in combinations(range(n_b), n_r):
        cost = 0.0
        for r, s in zip(roots, slots):
            ref = prev[s]
            cost += abs(r - ref) if ref is not None else 0.0
        if cost < best_cost:
            best, best_cost = slots, cost
    assigned: list[float | None] = [None] * n_b
    for r, s in zip(roots, best):
        assigned[s] = r
    return assigned


def solve_branches(
    plate: PlateSpec,
    bc: str,
    symmetry: str,
    f_max: float,
    n_branches: int,
    grid: int = 200,
    beta_max: float | None = None,
    points_per_decade: int = 2000,
) -> list[DispersionCurve]:
    """Solve the lowest n_branches dispersion branches on a uniform beta grid.

    For each beta the residual is scanned on a log-spaced frequency grid
    (points_per_decade per decade from F_SCAN_MIN to f_max) and every sign
    change is refined by bisection.  Branches are labeled by frequency
    ordering and stitched across beta by order-preserving continuity;
    missing roots are omitted with a note, near-degenerate adjacent roots
    are flagged as a crossing ambiguity.
    """
    if f_max <= F_SCAN_MIN:
        raise InvalidArgumentError("f_max too small")
    if beta_max is None:
        beta_max = 2.0 * math.pi * f_max / shear_velocity(plate.set_for(bc))
    betas = np.linspace(0.0, beta_max, grid)
    decades = math.log10(f_max / F_SCAN_MIN)
    n_f = max(64, int(decades * points_per_decade))
    f_grid = np.logspace(math.log10(F_SCAN_MIN), math.log10(f_max), n_f)

    # iterate beta DESCENDING: at large beta all low branches have roots, so
    # the ordered seed assignment is unambiguous; descending continuity then
    # places sparse root sets (e.g. only A1 surviving at beta = 0, where A0
    # has no positive-frequency root) on the right branches.
    branch_f: list[list[float | None]] = [[] for _ in range(n_branches)]
    last: list[float | None] = [None] * n_branches
    notes: list[str] = []
    missing = 0
    for beta in betas[::-1]:
        roots = _roots_in_f(plate, bc, symmetry, float(beta), f_grid, n_branches)
        if any(v is not None for v in last) and len(roots) < n_branches:
            assigned = _align_roots(last, roots)
        else:
            assigned = list(roots) + [None] * (n_branches - len(roots))
        for k in range(n_branches):
            branch_f[k].append(assigned[k])
            if assigned[k] is not None:
                last[k] = assigned[k]
            elif last[k] is not None:
                missing += 1
        present = [v for v in assigned if v is not None]
        for a, b in zip(present[:-1], present[1:]):
            if b - a < 10.0 * F_REFINE_TOL:
                notes.append(f"crossing ambiguity near beta={beta:.6g}, f={a:.6g}")
    for k in range(n_branches):
        branch_f[k].reverse()
    if missing:
        msg = f"{missing} grid points omitted (no root found at that beta)"
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)

    # order branches by their first available frequency (cutoff ordering)
    curves: list[DispersionCurve] = []
    prefix = "A" if symmetry == "antisym" else "S"
    order = sorted(
        range(n_branches),
        key=lambda k: next((v for v in branch_f[k] if v is not None), math.inf),
    )
    for label_i, k in enumerate(order):
        fs = branch_f[k]
        bs = [float(b) for b, v in zip(betas, fs) if v is not None]
        vals = [v for v in fs if v is not None]
        if not vals:
            continue
        curve = DispersionCurve(mode_label=f"{prefix}{label_i}", bc=bc, notes=list(notes))
        vg = _branch_group_velocity(np.array(bs), np.array(vals))
        for i, (bb, ff) in enumerate(zip(bs, vals)):
            vp = (2.0 * math.pi * ff / bb) if bb > 0.0 else None
            curve.points.append(
                DispersionPoint(f=ff, beta=bb, beta_imag=0.0, vp=vp, vg=vg[i])
            )
        curves.append(curve)
    return curves


def _branch_group_velocity(betas: np.ndarray, freqs: np.ndarray) -> list[float | None]:
    """d(omega)/d(beta) along a sampled branch, central differences inside,
    one-sided at the ends."""
    if len(betas) < 2:
        return [None] * len(betas)
    w = 2.0 * math.pi * freqs
    vg = np.gradient(w, betas)
    return [float(v) for v in vg]
