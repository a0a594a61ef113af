"""Run configuration: flat INI-style text, lengths in um, grid bounds in GHz.

Sections:
    [plate]           thickness_um
    [material.NAME]   c11, c44, rho, v_l_override   (plate material overrides)
    [electrode.NAME]  rho, v_s, v_l, resistivity, resistivity_scale
    [grid]            f_start_ghz, f_stop_ghz, n_points
    [sweep]           lambda_um (list), n_cells (list), metal,
                      metal_thickness_um, f_max_ghz, n_branches, beta_points
    [design.NAME]     lambda_um, n_cells, duty, aperture_um, metal,
                      metal_thickness_um, lg_um (list), pl_db_per_us,
                      gamma_tt, feedthrough_ff, dispersion_source
    [transducer]      c_cell_f_per_m, k2   (calibration overrides)
    [loading]         fc_short_hz, vl_short_m_per_s   (FEA-derived overrides)
    [extraction]      window, order, f_eval_ghz, noise_floor_db

Everything has a built-in default (the reference 490 nm / 2.4 um geometry),
so every command runs without a config file.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .dispersion import PlateSpec
from .errors import InvalidArgumentError
from .loading import TransducerGeometry
from .materials import (
    ELECTRODES,
    LINBO3_OPEN,
    LINBO3_SHORT,
    ElectrodeMaterial,
    MaterialSet,
)
from .network import AdlDesign

UM = 1e-6
GHZ = 1e9
FF = 1e-15


@dataclass
class DesignBlock:
    """One [design.*] section resolved to SI units."""

    name: str
    cell_length: float = 2.4 * UM
    n_cells: int = 4
    duty: float = 0.5
    aperture: float = 50.0 * UM
    metal: str = "al"
    metal_thickness: float = 30e-9
    gaps: list[float] = field(default_factory=lambda: [g * UM for g in (20, 40, 80, 160, 240, 320)])
    pl_db_per_us: float = 71.0
    gamma_tt: float = 0.2
    feedthrough_c: float = 0.0
    dispersion_source: str = "massless"

    def geometry(self, electrodes: dict[str, ElectrodeMaterial]) -> TransducerGeometry:
        if self.metal not in electrodes:
            raise InvalidArgumentError(f"design {self.name}: unknown metal {self.metal!r}")
        return TransducerGeometry(
            cell_length=self.cell_length,
            n_cells=self.n_cells,
            duty=self.duty,
            aperture=self.aperture,
            electrode=electrodes[self.metal],
            electrode_thickness=self.metal_thickness,
        )

    def design(self, electrodes: dict[str, ElectrodeMaterial], gap: float) -> AdlDesign:
        geom = self.geometry(electrodes)
        return AdlDesign(
            tx=geom,
            rx=geom,
            gap_lg=gap,
            pl_db_per_us=self.pl_db_per_us,
            gamma_tt=self.gamma_tt,
            feedthrough_c=self.feedthrough_c,
            dispersion_source=self.dispersion_source,
        )


@dataclass
class RunConfig:
    plate_thickness: float = 490e-9
    materials: dict[str, MaterialSet] = field(
        default_factory=lambda: {"linbo3_short": LINBO3_SHORT, "linbo3_open": LINBO3_OPEN}
    )
    electrodes: dict[str, ElectrodeMaterial] = field(default_factory=lambda: dict(ELECTRODES))
    f_start: float = 3.2 * GHZ
    f_stop: float = 6.5 * GHZ
    n_points: int = 4001
    sweep_lambdas: list[float] = field(default_factory=lambda: [l * UM for l in (2.0, 2.4, 2.8, 3.2)])
    sweep_n_cells: list[int] = field(default_factory=lambda: [2, 4, 8])
    sweep_metal: str = "al"
    sweep_metal_thickness: float = 30e-9
    sweep_f_max: float = 8.0 * GHZ
    sweep_n_branches: int = 2
    sweep_beta_points: int = 120
    designs: list[DesignBlock] = field(default_factory=lambda: [DesignBlock(name="groupA")])
    c_cell_per_aperture: float | None = None
    k2_override: float | None = None
    fc_short_override: float | None = None
    vl_short_override: float | None = None
    window: int = 51
    order: int = 3
    f_eval: float = 5.0 * GHZ
    noise_floor_db: float = -80.0

    def plate(self) -> PlateSpec:
        try:
            short = self.materials["linbo3_short"]
            open_ = self.materials["linbo3_open"]
        except KeyError as exc:
            raise InvalidArgumentError(f"missing plate material set: {exc}") from None
        return PlateSpec(thickness_b=self.plate_thickness, short=short, open=open_)

    def f_grid(self) -> np.ndarray:
        if self.f_stop <= self.f_start:
            raise InvalidArgumentError("grid must have f_stop > f_start")
        if self.n_points < 2:
            raise InvalidArgumentError("grid needs at least two points")
        return np.linspace(self.f_start, self.f_stop, self.n_points)


def _floats(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    return [float(tok) for tok in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(round(v)) for v in _floats(text)]


def default_config() -> RunConfig:
    return RunConfig()


def parse_config(path) -> RunConfig:
    """Load a RunConfig from an INI file; unspecified values keep defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise InvalidArgumentError(f"config file not found: {path}")
    cfg = RunConfig()

    if cp.has_section("plate"):
        sec = cp["plate"]
        if "thickness_um" in sec:
            cfg.plate_thickness = sec.getfloat("thickness_um") * UM

    for section in cp.sections():
        if section.startswith("material."):
            name = section.split(".", 1)[1]
            base = cfg.materials.get(name)
            sec = cp[section]
            kwargs = {
                "name": name,
                "c11": sec.getfloat("c11", base.c11 if base else None),
                "c44": sec.getfloat("c44", base.c44 if base else None),
                "rho": sec.getfloat("rho", base.rho if base else None),
            }
            if any(v is None for v in kwargs.values()):
                raise InvalidArgumentError(
                    f"[{section}] must define c11, c44 and rho for a new material"
                )
            if "v_l_override" in sec and sec.get("v_l_override").strip():
                kwargs["v_l_override"] = sec.getfloat("v_l_override")
            elif base is not None:
                kwargs["v_l_override"] = base.v_l_override
            cfg.materials[name] = MaterialSet(**kwargs)
        elif section.startswith("electrode."):
            name = section.split(".", 1)[1]
            base = cfg.electrodes.get(name)
            sec = cp[section]
            kwargs = {
                "name": name,
                "rho": sec.getfloat("rho", base.rho if base else None),
                "v_s": sec.getfloat("v_s", base.v_s if base else None),
                "v_l": sec.getfloat("v_l", base.v_l if base else None),
                "resistivity": sec.getfloat("resistivity", base.resistivity if base else None),
                "resistivity_scale": sec.getfloat(
                    "resistivity_scale", base.resistivity_scale if base else 3.0
                ),
            }
            if any(v is None for v in kwargs.values()):
                raise InvalidArgumentError(
                    f"[{section}] must define rho, v_s, v_l and resistivity for a new metal"
                )
            cfg.electrodes[name] = ElectrodeMaterial(**kwargs)

    if cp.has_section("grid"):
        sec = cp["grid"]
        cfg.f_start = sec.getfloat("f_start_ghz", cfg.f_start / GHZ) * GHZ
        cfg.f_stop = sec.getfloat("f_stop_ghz", cfg.f_stop / GHZ) * GHZ
        cfg.n_points = sec.getint("n_points", cfg.n_points)
        if cfg.f_stop <= cfg.f_start:
            raise InvalidArgumentError("grid must have f_stop > f_start")

    if cp.has_section("sweep"):
        sec = cp["sweep"]
        if "lambda_um" in sec:
            cfg.sweep_lambdas = [v * UM for v in _floats(sec.get("lambda_um"))]
        if "n_cells" in sec:
            cfg.sweep_n_cells = _ints(sec.get("n_cells"))
        cfg.sweep_metal = sec.get("metal", cfg.sweep_metal).strip()
        cfg.sweep_metal_thickness = (
            sec.getfloat("metal_thickness_um", cfg.sweep_metal_thickness / UM) * UM
        )
        cfg.sweep_f_max = sec.getfloat("f_max_ghz", cfg.sweep_f_max / GHZ) * GHZ
        cfg.sweep_n_branches = sec.getint("n_branches", cfg.sweep_n_branches)
        cfg.sweep_beta_points = sec.getint("beta_points", cfg.sweep_beta_points)

    design_sections = [s for s in cp.sections() if s.startswith("design.")]
    if design_sections:
        cfg.designs = []
        for section in design_sections:
            sec = cp[section]
            block = DesignBlock(name=section.split(".", 1)[1])
            block.cell_length = sec.getfloat("lambda_um", block.cell_length / UM) * UM
            block.n_cells = sec.getint("n_cells", block.n_cells)
            block.duty = sec.getfloat("duty", block.duty)
            block.aperture = sec.getfloat("aperture_um", block.aperture / UM) * UM
            block.metal = sec.get("metal", block.metal).strip()
            block.metal_thickness = (
                sec.getfloat("metal_thickness_um", block.metal_thickness / UM) * UM
            )
            if "lg_um" in sec:
                block.gaps = [v * UM for v in _floats(sec.get("lg_um"))]
            block.pl_db_per_us = sec.getfloat("pl_db_per_us", block.pl_db_per_us)
            block.gamma_tt = sec.getfloat("gamma_tt", block.gamma_tt)
            block.feedthrough_c = sec.getfloat("feedthrough_ff", block.feedthrough_c / FF) * FF
            block.dispersion_source = sec.get("dispersion_source", block.dispersion_source).strip()
            if block.dispersion_source not in ("massless", "loaded"):
                raise InvalidArgumentError(
                    f"[{section}] dispersion_source must be massless or loaded"
                )
            cfg.designs.append(block)

    if cp.has_section("transducer"):
        sec = cp["transducer"]
        if "c_cell_f_per_m" in sec:
            cfg.c_cell_per_aperture = sec.getfloat("c_cell_f_per_m")
        if "k2" in sec:
            cfg.k2_override = sec.getfloat("k2")

    if cp.has_section("loading"):
        sec = cp["loading"]
        if "fc_short_hz" in sec:
            cfg.fc_short_override = sec.getfloat("fc_short_hz")
        if "vl_short_m_per_s" in sec:
            cfg.vl_short_override = sec.getfloat("vl_short_m_per_s")

    if cp.has_section("extraction"):
        sec = cp["extraction"]
        cfg.window = sec.getint("window", cfg.window)
        cfg.order = sec.getint("order", cfg.order)
        cfg.f_eval = sec.getfloat("f_eval_ghz", cfg.f_eval / GHZ) * GHZ
        cfg.noise_floor_db = sec.getfloat("noise_floor_db", cfg.noise_floor_db)

    # every design block must resolve (unknown metals etc. fail here)
    for block in cfg.designs:
        block.geometry(cfg.electrodes)
    return cfg
