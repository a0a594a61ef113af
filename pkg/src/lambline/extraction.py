"""Recover device metrics and propagation characteristics from S-parameter sets.

Transmission curves are smoothed with a Savitzky-Golay filter before band
metrics are read off; group delay comes from the unwrapped s21 phase; and
propagation loss / group velocity follow from ordinary least squares of
delay and smoothed insertion loss against the gap length of a device
family, exactly as one extracts them from measured delay-line sets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import BandTruncatedError, InvalidArgumentError, ResolutionError
from .network import TwoPortNetwork

UNWRAP_GUARD = 0.95 * math.pi  # in-band phase steps beyond this are treated as aliasing
DEFAULT_WINDOW = 51
DEFAULT_ORDER = 3
DEFAULT_NOISE_FLOOR_DB = -80.0
INBAND_SELECT_DB = 20.0  # "in band" for the unwrap check: within 20 dB of the peak


@dataclass(frozen=True)
class BandMetrics:
    """Passband summary of one delay line."""

    f_center: float
    il_min: float
    il_avg: float
    fbw_3db: float
    rl_min_inband: float
    window_used: int

    def __post_init__(self):
        if self.il_avg < self.il_min - 1e-9:
            raise InvalidArgumentError("average IL cannot be below minimum IL")
        if not 0.0 < self.fbw_3db < 1.0:
            raise InvalidArgumentError(f"fractional bandwidth out of range: {self.fbw_3db}")


@dataclass(frozen=True)
class PropagationFit:
    """Least-squares propagation parameters at one frequency.

    The identity pl_db_per_us = pl_db_per_um * vg holds exactly by
    construction (a m/s group velocity is numerically um/us).
    """

    f: float
    vg: float
    pl_db_per_um: float
    pl_db_per_us: float
    intercept_il_db: float
    r_squared_delay: float
    r_squared_il: float
    negative_pl: bool = False


def effective_window(window: int) -> int:
    """Odd window actually used; even requests round up to the next odd."""
    if window < 1:
        raise InvalidArgumentError("window must be positive")
    return window + 1 if window % 2 == 0 else window


def _fit_coeffs(offsets: np.ndarray, order: int, eval_offset: float) -> np.ndarray:
    """Least-squares polynomial smoothing weights for samples at `offsets`,
    evaluated at `eval_offset`."""
    a = np.vander(offsets, order + 1, increasing=True)
    pinv = np.linalg.pinv(a)
    powers = np.array([eval_offset**k for k in range(order + 1)])
    return powers @ pinv


def savgol(values, window: int, order: int) -> np.ndarray:
    """Savitzky-Golay smoothing with truncated asymmetric edge windows.

    Interior points use the fixed centered least-squares stencil; each edge
    point is the value at that point of a polynomial fitted over the window
    truncated to available samples (order reduced if the truncated window is
    too short).  Even windows round up to the next odd (see
    effective_window).  A polynomial of degree <= order is reproduced
    exactly.
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1:
        raise InvalidArgumentError("savgol expects a 1-D series")
    win = effective_window(window)
    if order >= win:
        raise InvalidArgumentError(f"order {order} must be below the window {win}")
    if len(y) < win:
        raise InvalidArgumentError(f"series length {len(y)} is below the window {win}")
    half = win // 2
    out = np.empty_like(y)
    center = _fit_coeffs(np.arange(-half, half + 1, dtype=float), order, 0.0)
    # interior: correlation with the fixed stencil
    out[half:len(y) - half] = np.correlate(y, center, mode="valid")
    # edges: per-point truncated asymmetric fits
    for i in range(half):
        lo, hi = max(0, i - half), min(len(y), i + half + 1)
        offs = np.arange(lo, hi, dtype=float) - i
        eff_order = min(order, len(offs) - 1)
        out[i] = _fit_coeffs(offs, eff_order, 0.0) @ y[lo:hi]
    for i in range(len(y) - half, len(y)):
        lo, hi = max(0, i - half), min(len(y), i + half + 1)
        offs = np.arange(lo, hi, dtype=float) - i
        eff_order = min(order, len(offs) - 1)
        out[i] = _fit_coeffs(offs, eff_order, 0.0) @ y[lo:hi]
    return out


def group_delay(net: TwoPortNetwork) -> tuple[np.ndarray, np.ndarray]:
    """(f, tau): group delay -d(phase s21)/d(omega), s.

    Phase is unwrapped with the standard pi threshold; zero-magnitude s21
    points become NaN gaps rather than being interpolated over.  Raises
    ResolutionError when in-band phase steps approach pi (the grid would
    alias the true delay).
    """
    f = net.f
    if np.any(np.diff(f) <= 0.0):
        raise InvalidArgumentError("frequency grid must increase monotonically")
    s21 = net.s21
    mag = np.abs(s21)
    dead = mag == 0.0
    phase = np.unwrap(np.angle(np.where(dead, 1.0, s21)))
    with np.errstate(divide="ignore"):
        il = -20.0 * np.log10(np.where(dead, np.nan, mag))
    il_min = np.nanmin(il)
    inband = il <= il_min + INBAND_SELECT_DB
    steps = np.abs(np.diff(phase))
    step_inband = steps[(inband[:-1]) & (inband[1:])]
    if step_inband.size and step_inband.max() >= UNWRAP_GUARD:
        raise ResolutionError(
            f"in-band phase step {step_inband.max():.3f} rad is at the unwrap "
            "threshold; refine the frequency grid"
        )
    tau = -np.gradient(phase, 2.0 * math.pi * f)
    tau = np.where(dead, np.nan, tau)
    return f, tau


def band_metrics(net: TwoPortNetwork, smoothing_window: int = DEFAULT_WINDOW,
                 order: int = DEFAULT_ORDER) -> BandMetrics:
    """Passband metrics from the smoothed transmission.

    f_center is the smoothed-IL minimum; il_min comes from the raw curve
    within the 3-dB band; il_avg is the mean smoothed IL over the band; the
    band edges are linear-interpolated crossings of the smoothed curve.
    """
    il_raw = net.il_db()
    win = effective_window(smoothing_window)
    il_s = savgol(il_raw, win, order)
    i0 = int(np.argmin(il_s))
    f_center = float(net.f[i0])
    il0 = float(il_s[i0])
    target = il0 + 3.0

    f_lo = _crossing(net.f, il_s, i0, target, step=-1)
    if f_lo is None:
        raise BandTruncatedError("3-dB band extends past the low-frequency grid edge", "low")
    f_hi = _crossing(net.f, il_s, i0, target, step=+1)
    if f_hi is None:
        raise BandTruncatedError("3-dB band extends past the high-frequency grid edge", "high")

    band = (net.f >= f_lo) & (net.f <= f_hi)
    il_min = float(np.min(il_raw[band]))
    il_avg = float(np.mean(il_s[band]))
    rl = net.rl_db()
    rl_min = float(np.min(rl[band]))
    return BandMetrics(
        f_center=f_center,
        il_min=il_min,
        il_avg=il_avg,
        fbw_3db=(f_hi - f_lo) / f_center,
        rl_min_inband=rl_min,
        window_used=win,
    )


def _crossing(f: np.ndarray, il: np.ndarray, i0: int, target: float, step: int) -> float | None:
    """First f where il crosses `target` walking from i0 in `step` direction."""
    i = i0
    while 0 <= i + step < len(f):
        j = i + step
        if il[j] >= target:
            # linear interpolation between i and j
            frac = (target - il[i]) / (il[j] - il[i])
            return float(f[i] + frac * (f[j] - f[i]))
        i = j
    return None


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Ordinary least squares y = a*x + b; returns (a, b, r_squared)."""
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(a), float(b), r2


def fit_propagation(
    family: list[tuple[TwoPortNetwork, float]],
    f_eval: float,
    smoothing_window: int = DEFAULT_WINDOW,
    order: int = DEFAULT_ORDER,
) -> PropagationFit:
    """Propagation loss and group velocity from a gap-length family.

    OLS of tau(f_eval) against gap gives 1/vg; OLS of smoothed IL(f_eval)
    against gap gives the loss per meter and the transducer-pair intercept.
    Negative fitted loss is reported with the negative_pl flag, not clamped.
    """
    gaps = [lg for _, lg in family]
    if len(set(gaps)) < 2:
        raise InvalidArgumentError("need at least two distinct gap lengths")
    taus, ils = [], []
    for net, _ in family:
        if not (net.f[0] <= f_eval <= net.f[-1]):
            raise InvalidArgumentError(
                f"f_eval {f_eval:.6g} Hz outside the grid of one family member"
            )
        f, tau = group_delay(net)
        taus.append(float(np.interp(f_eval, f, tau)))
        il_s = savgol(net.il_db(), smoothing_window, order)
        ils.append(float(np.interp(f_eval, net.f, il_s)))
    gaps_arr = np.array(gaps, dtype=float)
    slope_tau, _, r2_tau = _ols(gaps_arr, np.array(taus))
    if slope_tau <= 0.0:
        raise InvalidArgumentError("fitted delay slope is non-positive; family inconsistent")
    vg = 1.0 / slope_tau
    slope_il, intercept, r2_il = _ols(gaps_arr, np.array(ils))
    pl_per_um = slope_il * 1e-6
    return PropagationFit(
        f=f_eval,
        vg=vg,
        pl_db_per_um=pl_per_um,
        pl_db_per_us=pl_per_um * vg,
        intercept_il_db=intercept,
        r_squared_delay=r2_tau,
        r_squared_il=r2_il,
        negative_pl=pl_per_um < 0.0,
    )


def wideband_fit(
    family: list[tuple[TwoPortNetwork, float]],
    f_grid: np.ndarray | None = None,
    smoothing_window: int = DEFAULT_WINDOW,
    order: int = DEFAULT_ORDER,
    noise_floor_db: float = DEFAULT_NOISE_FLOOR_DB,
) -> list[PropagationFit]:
    """fit_propagation at every point of the common grid.

    Points where any family member's |s21| sits below the noise floor are
    absent from the result (flagged by omission).  All members must share
    the evaluation grid.
    """
    if len({lg for _, lg in family}) < 2:
        raise InvalidArgumentError("need at least two distinct gap lengths")
    f0 = family[0][0].f if f_grid is None else np.asarray(f_grid, dtype=float)
    gaps = np.array([lg for _, lg in family], dtype=float)
    taus, ils, mags_db = [], [], []
    for net, _ in family:
        if len(net.f) != len(f0) or not np.allclose(net.f, f0):
            raise InvalidArgumentError("wideband fitting needs a shared frequency grid")
        _, tau = group_delay(net)
        taus.append(tau)
        ils.append(savgol(net.il_db(), smoothing_window, order))
        mags_db.append(-net.il_db())
    taus = np.array(taus)
    ils = np.array(ils)
    mags_db = np.array(mags_db)

    out: list[PropagationFit] = []
    for j, fj in enumerate(f0):
        if np.any(mags_db[:, j] < noise_floor_db) or np.any(np.isnan(taus[:, j])):
            continue
        slope_tau, _, r2_tau = _ols(gaps, taus[:, j])
        if slope_tau <= 0.0:
            continue
        vg = 1.0 / slope_tau
        slope_il, intercept, r2_il = _ols(gaps, ils[:, j])
        pl_per_um = slope_il * 1e-6
        out.append(
            PropagationFit(
                f=float(fj),
                vg=vg,
                pl_db_per_um=pl_per_um,
                pl_db_per_us=pl_per_um * vg,
                intercept_il_db=intercept,
                r_squared_delay=r2_tau,
                r_squared_il=r2_il,
                negative_pl=pl_per_um < 0.0,
            )
        )
    return out


REPORT_HEADER = ["f_hz", "vg_m_per_s", "pl_db_per_us", "pl_db_per_um",
                 "intercept_db", "r2_delay", "r2_il"]


def write_propagation_csv(fits: list[PropagationFit], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_HEADER)
        for p in fits:
            w.writerow([
                f"{p.f:.12g}", f"{p.vg:.12g}", f"{p.pl_db_per_us:.12g}",
                f"{p.pl_db_per_um:.12g}", f"{p.intercept_il_db:.12g}",
                f"{p.r_squared_delay:.12g}", f"{p.r_squared_il:.12g}",
            ])


BAND_HEADER = ["file", "f_center_hz", "il_min_db", "il_avg_db", "fbw_3db",
               "rl_min_inband_db", "window_used"]


def write_band_metrics_csv(rows: list[tuple[str, BandMetrics]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BAND_HEADER)
        for name, m in rows:
            w.writerow([
                name, f"{m.f_center:.12g}", f"{m.il_min:.12g}", f"{m.il_avg:.12g}",
                f"{m.fbw_3db:.12g}", f"{m.rl_min_inband:.12g}", m.window_used,
            ])
