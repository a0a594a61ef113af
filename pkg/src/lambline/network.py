"""Two-port delay-line scattering networks: synthesis, renormalization, Touchstone I/O.

The behavioral transmission model is

    s21 = B(f) h_tx h_rx A e^{-j phi} (1 + g^2 A^2 e^{-2j phi}) / (1 + g^2)
          + j w C_ft Z0

with phi = beta_open * l over the phase-center path l = L_g + (L_Ttx +
L_Trx)/2, A the amplitude attenuation from the propagation-loss parameter,
g the per-transducer triple-transit reflection, and B = (1/2) sqrt((1 -
|s11|^2)(1 - |s22|^2)) the bidirectional conversion factor tied to the port
mismatch.  At the conjugate-matched center frequency |s21| = 1/2 exactly
(the 6.02 dB bidirectional floor); the (1 + g^2) normalization keeps ripple
peaks at or below that floor without changing the echo-to-main amplitude
ratio g^2 A^2.  The port reflections come from the transducer immittances
referenced to their conjugate-matched center-frequency impedances.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import dispersion as disp
from .errors import InvalidArgumentError, TouchstoneParseError
from .loading import TransducerGeometry
from .materials import effective_longitudinal_velocity
from .transducer import TransducerResponse, admittance, array_response

FILE_Z0 = 50.0  # canonical Touchstone reference impedance, Ohms
BIDIRECTIONAL_FLOOR_DB = 20.0 * math.log10(2.0)


@dataclass
class TwoPortNetwork:
    """Frequency grid, 2x2 scattering matrices, per-port reference impedances."""

    f: np.ndarray
    s: np.ndarray  # shape (n, 2, 2), complex
    z_ref_1: complex = complex(FILE_Z0)
    z_ref_2: complex = complex(FILE_Z0)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        self.s = np.asarray(self.s, dtype=complex)
        if self.f.ndim != 1:
            raise InvalidArgumentError("frequency grid must be 1-D")
        if self.s.shape != (len(self.f), 2, 2):
            raise InvalidArgumentError(
                f"S array shape {self.s.shape} does not match grid length {len(self.f)}"
            )
        for z in (self.z_ref_1, self.z_ref_2):
            if complex(z).real <= 0.0:
                raise InvalidArgumentError(f"reference impedance needs Re(z) > 0, got {z}")

    @property
    def s11(self) -> np.ndarray:
        return self.s[:, 0, 0]

    @property
    def s12(self) -> np.ndarray:
        return self.s[:, 0, 1]

    @property
    def s21(self) -> np.ndarray:
        return self.s[:, 1, 0]

    @property
    def s22(self) -> np.ndarray:
        return self.s[:, 1, 1]

    def il_db(self) -> np.ndarray:
        """Insertion loss -20 log10 |s21|, dB."""
        with np.errstate(divide="ignore"):
            return -20.0 * np.log10(np.abs(self.s21))

    def rl_db(self) -> np.ndarray:
        """Return loss -20 log10 |s11|, dB."""
        with np.errstate(divide="ignore"):
            return -20.0 * np.log10(np.abs(self.s11))

    def max_singular_value(self) -> np.ndarray:
        return np.linalg.svd(self.s, compute_uv=False)[:, 0]

    def copy(self) -> "TwoPortNetwork":
        return TwoPortNetwork(self.f.copy(), self.s.copy(), self.z_ref_1, self.z_ref_2)


@dataclass(frozen=True)
class DelaySpec:
    """Acoustic path length and its dispersive group delay."""

    path_length: float
    plate: disp.PlateSpec

    def __post_init__(self):
        if self.path_length <= 0.0:
            raise InvalidArgumentError("path length must be positive")

    def group_delay_at(self, f: float) -> float:
        """Path delay l / v_g(f) on the free-surface branch, s."""
        return self.path_length / disp.a1_vg(f, self.plate, "open")


@dataclass(frozen=True)
class AdlDesign:
    """Full delay-line design: two transducers, gap, and loss/parasitic knobs."""

    tx: TransducerGeometry
    rx: TransducerGeometry
    gap_lg: float
    pl_db_per_us: float = 0.0
    gamma_tt: float = 0.0
    feedthrough_c: float = 0.0
    dispersion_source: str = "massless"

    def __post_init__(self):
        if self.gap_lg < 0.0:
            raise InvalidArgumentError("gap length must be non-negative")
        if not 0.0 <= self.gamma_tt < 1.0:
            raise InvalidArgumentError("gamma_tt must lie in [0, 1)")

    @property
    def path_length(self) -> float:
        """Phase-center separation: gap plus half of each transducer."""
        return self.gap_lg + (self.tx.transducer_length + self.rx.transducer_length) / 2.0

    def delay_spec(self, plate: disp.PlateSpec) -> DelaySpec:
        return DelaySpec(path_length=self.path_length, plate=plate)


def _interp_complex(x: float, xs: np.ndarray, ys: np.ndarray) -> complex:
    return complex(np.interp(x, xs, ys.real), np.interp(x, xs, ys.imag))


def _port_reflection(resp: TransducerResponse) -> tuple[np.ndarray, complex]:
    """Power-wave reflection of the transducer impedance against its
    conjugate-matched center-frequency value; returns (s_ii(f), z_ref)."""
    z = resp.port_impedance()
    z0 = _interp_complex(resp.f_center, resp.f_grid, z)
    z_ref = z0.conjugate()
    gamma = (z - z0) / (z + np.conj(z0))
    return gamma, z_ref


def synthesize(
    design: AdlDesign,
    plate: disp.PlateSpec,
    f_grid: np.ndarray,
    c_cell_per_aperture: float | None = None,
    k2: float | None = None,
) -> TwoPortNetwork:
    """Assemble the two-port delay-line network on a frequency grid.

    The returned network is referenced to the conjugate-matched
    center-frequency impedance of each transducer, so it is "matched" in the
    sense of the design procedure; renormalize to 50 Ohms for file output.
    c_cell_per_aperture and k2 pass through to the transducer calibration.
    """
    f = np.asarray(f_grid, dtype=float)
    if f.ndim != 1 or len(f) < 2 or np.any(np.diff(f) <= 0.0):
        raise InvalidArgumentError("need a strictly increasing 1-D frequency grid")
    fc_open = disp.a1_cutoff(plate, "open")
    fc_short = disp.a1_cutoff(plate, "short")
    if f.max() < min(fc_open, fc_short):
        warnings.warn(
            "frequency grid lies entirely below both cutoffs; passband is empty",
            stacklevel=2,
        )

    adm_kwargs = {}
    if c_cell_per_aperture is not None:
        adm_kwargs["c_cell_per_aperture"] = c_cell_per_aperture
    if k2 is not None:
        adm_kwargs["k2"] = k2
    resp_tx = admittance(design.tx, plate, f, design.dispersion_source, **adm_kwargs)
    resp_rx = admittance(design.rx, plate, f, design.dispersion_source, **adm_kwargs)
    s11, z1 = _port_reflection(resp_tx)
    s22, z2 = _port_reflection(resp_rx)
    m1 = np.clip(1.0 - np.abs(s11) ** 2, 0.0, None)
    m2 = np.clip(1.0 - np.abs(s22) ** 2, 0.0, None)

    h_tx = array_response(design.tx, plate, f, design.dispersion_source, centered=True)
    h_rx = array_response(design.rx, plate, f, design.dispersion_source, centered=True)

    ell = design.path_length
    beta_o = disp.a1_beta(f, plate, "open")
    prop = np.exp(-1j * beta_o * ell)

    # attenuation from the dB/us loss parameter via the model group velocity;
    # below cutoff the evanescent propagation factor handles the decay
    above = f > fc_open
    vl_open = effective_longitudinal_velocity(plate.open)
    att = np.ones_like(f)
    vg_above = vl_open * np.sqrt(1.0 - (fc_open / f[above]) ** 2)
    att[above] = 10.0 ** (-design.pl_db_per_us * (ell / vg_above) * 1e6 / 20.0)

    g2 = design.gamma_tt**2
    tts = (1.0 + g2 * att**2 * prop**2) / (1.0 + g2)

    s21 = 0.5 * np.sqrt(m1 * m2) * h_tx * h_rx * att * prop * tts
    s21 = s21 + 1j * 2.0 * math.pi * f * design.feedthrough_c * FILE_Z0

    s = np.empty((len(f), 2, 2), dtype=complex)
    s[:, 0, 0] = s11
    s[:, 1, 1] = s22
    s[:, 1, 0] = s21
    s[:, 0, 1] = s21
    return TwoPortNetwork(f=f, s=s, z_ref_1=z1, z_ref_2=z2)


# --- renormalization ---------------------------------------------------------


def renormalize(net: TwoPortNetwork, z_new_1: complex, z_new_2: complex) -> TwoPortNetwork:
    """Power-wave renormalization of the reference impedances.

    Exact generalized-S transformation: with the per-port wave scalings
    D = diag(1/(2 sqrt(Re z))), the old S maps to

        S' = D' [I - (Z + W*) (2 Re Z)^-1 (I - M)]
                [I + (W - Z) (2 Re Z)^-1 (I - M)]^-1 D'^-1,
        M = D^-1 S D

    which reduces to the identity when W = Z.
    """
    z_new_1 = complex(z_new_1)
    z_new_2 = complex(z_new_2)
    for z in (z_new_1, z_new_2):
        if z.real <= 0.0:
            raise InvalidArgumentError(f"new reference impedance needs Re(z) > 0, got {z}")
    z_old = np.array([complex(net.z_ref_1), complex(net.z_ref_2)])
    z_new = np.array([z_new_1, z_new_2])

    d_old = 1.0 / (2.0 * np.sqrt(z_old.real))
    d_new = 1.0 / (2.0 * np.sqrt(z_new.real))
    m = (1.0 / d_old)[None, :, None] * net.s * d_old[None, None, :]
    eye = np.eye(2)
    k = ((z_old + np.conj(z_new)) / (2.0 * z_old.real))[:, None] * (eye[None, :, :] - m)
    p = eye[None, :, :] - k
    q = eye[None, :, :] + ((z_new - z_old) / (2.0 * z_old.real))[:, None] * (eye[None, :, :] - m)
    # s_mid = p @ inv(q), computed as solve(q^T, p^T)^T per frequency
    s_mid = np.linalg.solve(np.swapaxes(q, 1, 2), np.swapaxes(p, 1, 2))
    s_mid = np.swapaxes(s_mid, 1, 2)
    s_new = d_new[None, :, None] * s_mid * (1.0 / d_new)[None, None, :]
    return TwoPortNetwork(f=net.f.copy(), s=s_new, z_ref_1=z_new_1, z_ref_2=z_new_2)


@dataclass(frozen=True)
class MatchResult:
    """Simultaneous conjugate-match impedances at the transmission peak."""

    z1: complex
    z2: complex
    f_hz: float
    fallback: bool = False


def _gamma_to_impedance(gamma: complex, z_ref: complex) -> complex:
    """Invert the power-wave reflection (Z - z*)/(Z + z)."""
    if abs(1.0 - gamma) < 1e-15:
        raise InvalidArgumentError("reflection coefficient of 1: impedance undefined")
    return (np.conj(z_ref) + gamma * z_ref) / (1.0 - gamma)


def conjugate_match(net: TwoPortNetwork) -> MatchResult:
    """Simultaneous conjugate-match source/load impedances at max |s21|.

    Standard two-port simultaneous match from the S-matrix (Rollett K with
    the sub-unity root).  When the stability condition fails (K <= 1 or no
    real discriminant) the result falls back to the one-port conjugate match
    Z_in*/Z_out* with the fallback flag set.  Renormalizing the network to
    (z1, z2) zeroes s11/s22 at the match frequency in the non-fallback case.
    """
    idx = int(np.argmax(np.abs(net.s21)))
    f_hz = float(net.f[idx])
    s11 = complex(net.s[idx, 0, 0])
    s12 = complex(net.s[idx, 0, 1])
    s21 = complex(net.s[idx, 1, 0])
    s22 = complex(net.s[idx, 1, 1])
    delta = s11 * s22 - s12 * s21
    denom = 2.0 * abs(s12 * s21)
    fallback = False
    if denom == 0.0:
        fallback = True
    else:
        k_st = (1.0 - abs(s11) ** 2 - abs(s22) ** 2 + abs(delta) ** 2) / denom
        fallback = k_st <= 1.0
    if not fallback:
        b1 = 1.0 + abs(s11) ** 2 - abs(s22) ** 2 - abs(delta) ** 2
        b2 = 1.0 - abs(s11) ** 2 + abs(s22) ** 2 - abs(delta) ** 2
        c1 = s11 - delta * np.conj(s22)
        c2 = s22 - delta * np.conj(s11)
        disc1 = b1 * b1 - 4.0 * abs(c1) ** 2
        disc2 = b2 * b2 - 4.0 * abs(c2) ** 2
        if disc1 < 0.0 or disc2 < 0.0 or abs(c1) == 0.0 or abs(c2) == 0.0:
            fallback = True
        else:
            gs = (b1 - math.sqrt(disc1)) / (2.0 * c1)
            gl = (b2 - math.sqrt(disc2)) / (2.0 * c2)
            z_s = _gamma_to_impedance(gs, net.z_ref_1)
            z_l = _gamma_to_impedance(gl, net.z_ref_2)
            if z_s.real <= 0.0 or z_l.real <= 0.0:
                fallback = True
            else:
                return MatchResult(z1=complex(z_s), z2=complex(z_l), f_hz=f_hz)
    # one-port fallback: conjugate of the input/output impedances
    z_in = _gamma_to_impedance(s11, net.z_ref_1)
    z_out = _gamma_to_impedance(s22, net.z_ref_2)
    return MatchResult(
        z1=complex(np.conj(z_in)), z2=complex(np.conj(z_out)), f_hz=f_hz, fallback=True
    )


# --- Touchstone v1 I/O -------------------------------------------------------

_UNIT_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def touchstone_write(net: TwoPortNetwork, path) -> None:
    """Write a two-port Touchstone v1 file, always at the 50 Ohm reference.

    Networks held at any other reference are renormalized to 50 Ohms first,
    so the "R 50" header is always truthful.  Values carry 17 significant
    digits, which round-trips float64 bit-exactly.
    """
    if (complex(net.z_ref_1) != complex(FILE_Z0)) or (complex(net.z_ref_2) != complex(FILE_Z0)):
        net = renormalize(net, FILE_Z0, FILE_Z0)
    lines = ["# Hz S RI R 50"]
    for i, f in enumerate(net.f):
        s = net.s[i]
        vals = [f, s[0, 0].real, s[0, 0].imag, s[1, 0].real, s[1, 0].imag,
                s[0, 1].real, s[0, 1].imag, s[1, 1].real, s[1, 1].imag]
        lines.append(" ".join(f"{v:.17g}" for v in vals))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def touchstone_read(path) -> TwoPortNetwork:
    """Read a two-port Touchstone v1 file (S-parameters; RI, MA or DB formats;
    Hz/kHz/MHz/GHz units).  Parse errors carry the offending line number."""
    with open(path) as fh:
        raw = fh.readlines()

    unit = fmt = None
    z0 = FILE_Z0
    rows: list[list[float]] = []
    freqs: list[float] = []
    header_seen = False
    for lineno, line in enumerate(raw, start=1):
        text = line.split("!", 1)[0].strip()
        if not text:
            continue
        if text.startswith("#"):
            if header_seen:
                raise TouchstoneParseError("duplicate option line", lineno)
            tokens = text[1:].upper().split()
            unit, fmt, z0 = _parse_options(tokens, lineno)
            header_seen = True
            continue
        if not header_seen:
            raise TouchstoneParseError("data before the '#' option line", lineno)
        parts = text.split()
        if len(parts) != 9:
            raise TouchstoneParseError(
                f"expected 9 columns (f + 4 complex S), got {len(parts)}", lineno
            )
        try:
            nums = [float(p) for p in parts]
        except ValueError as exc:
            raise TouchstoneParseError(f"bad number: {exc}", lineno) from None
        f_hz = nums[0] * _UNIT_SCALE[unit]
        if freqs and f_hz <= freqs[-1]:
            raise TouchstoneParseError(
                f"frequencies must increase (got {f_hz:.6g} after {freqs[-1]:.6g})", lineno
            )
        freqs.append(f_hz)
        rows.append(nums[1:])
    if not header_seen:
        raise TouchstoneParseError("missing '#' option line", len(raw) or 1)
    if not rows:
        raise TouchstoneParseError("no data lines", len(raw))

    s = np.empty((len(rows), 2, 2), dtype=complex)
    for i, row in enumerate(rows):
        pairs = [_decode_pair(row[2 * k], row[2 * k + 1], fmt) for k in range(4)]
        # v1 two-port column order: S11 S21 S12 S22
        s[i, 0, 0], s[i, 1, 0], s[i, 0, 1], s[i, 1, 1] = pairs
    return TwoPortNetwork(f=np.array(freqs), s=s, z_ref_1=complex(z0), z_ref_2=complex(z0))


def _parse_options(tokens: list[str], lineno: int) -> tuple[str, str, float]:
    unit, fmt, z0 = "GHZ", "MA", FILE_Z0  # Touchstone defaults
    i = 0
    seen_type = False
    while i < len(tokens):
        tok = tokens[i]
        if tok in _UNIT_SCALE:
            unit = tok
        elif tok in ("RI", "MA", "DB"):
            fmt = tok
        elif tok == "S":
            seen_type = True
        elif tok in ("Y", "Z", "H", "G"):
            raise TouchstoneParseError(f"unsupported parameter type {tok}", lineno)
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneParseError("R not followed by a resistance", lineno)
            try:
                z0 = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneParseError(
                    f"bad reference resistance {tokens[i + 1]!r}", lineno
                ) from None
            i += 1
        else:
            raise TouchstoneParseError(f"unknown option token {tok!r}", lineno)
        i += 1
    if not seen_type:
        raise TouchstoneParseError("option line does not declare S-parameters", lineno)
    return unit, fmt, z0


def _decode_pair(a: float, b: float, fmt: str) -> complex:
    if fmt == "RI":
        return complex(a, b)
    if fmt == "MA":
        return a * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))
    mag = 10.0 ** (a / 20.0)
    return mag * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))


# --- metadata sidecar --------------------------------------------------------


def write_meta(path, entries: dict) -> None:
    """key=value sidecar; complex values use Python literal form."""
    with open(path, "w", newline="\n") as fh:
        for k, v in entries.items():
            if isinstance(v, complex):
                fh.write(f"{k}={v.real:.17g}{v.imag:+.17g}j\n")
            elif isinstance(v, float):
                fh.write(f"{k}={v:.17g}\n")
            else:
                fh.write(f"{k}={v}\n")


def read_meta(path) -> dict:
    out: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = _parse_meta_value(v.strip())
    return out


def _parse_meta_value(v: str):
    if v.endswith("j"):
        try:
            return complex(v)
        except ValueError:
            pass
    try:
        f = float(v)
        return int(f) if f.is_integer() and ("." not in v and "e" not in v.lower()) else f
    except ValueError:
        return v
