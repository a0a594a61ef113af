"""Command-line front end: dispersion tables, design sweeps, synthesis, extraction.

Subcommands: dispersion, design, synth, extract, match.  All outputs are CSV
or Touchstone files with unit-bearing column names; identical configs give
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import dispersion as disp
from . import extraction as ext
from . import network as net
from .config import GHZ, UM, RunConfig, default_config, parse_config
from .errors import DesignInfeasibleError, InvalidArgumentError
from .loading import LayerStack, center_frequency, electrode_resistance
from .transducer import C_CELL_PER_APERTURE, design_k2


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> RunConfig:
    if args.config:
        return parse_config(args.config)
    return default_config()


def _say(args, msg: str) -> None:
    if args.verbose:
        print(msg)


# --- dispersion ---------------------------------------------------------------


def cmd_dispersion(args) -> int:
    cfg = _load_config(args)
    if not cfg.sweep_lambdas:
        return 0
    out = _out_dir(args)
    plate = cfg.plate()

    with open(out / "dispersion_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bc", "f_c_hz", "v_l_m_per_s", "v_s_m_per_s", "v_l_effective_m_per_s"])
        for bc in ("short", "open"):
            m = plate.set_for(bc)
            from .materials import effective_longitudinal_velocity, longitudinal_velocity, shear_velocity

            w.writerow([
                bc,
                f"{disp.a1_cutoff(plate, bc):.12g}",
                f"{longitudinal_velocity(m):.12g}",
                f"{shear_velocity(m):.12g}",
                f"{effective_longitudinal_velocity(m):.12g}",
            ])

    failures = 0
    for bc in ("short", "open"):
        try:
            curves = disp.solve_branches(
                plate, bc, "antisym",
                f_max=cfg.sweep_f_max,
                n_branches=cfg.sweep_n_branches,
                grid=cfg.sweep_beta_points,
            )
            disp.write_curves_csv(curves, out / f"rayleigh_lamb_{bc}.csv")
        except Exception as exc:  # solver failure is reportable, not fatal to the other bc
            print(f"dispersion: {bc} branch solve failed: {exc}", file=sys.stderr)
            failures += 1

    lam_lo = 0.6 * min(cfg.sweep_lambdas)
    lam_hi = 2.0 * max(cfg.sweep_lambdas)
    lams = np.unique(np.concatenate([np.linspace(lam_lo, lam_hi, 201), cfg.sweep_lambdas]))
    with open(out / "decoupled_a1.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "lambda_um", "beta_rad_per_m",
            "f_short_hz", "vp_short_m_per_s", "vg_short_m_per_s",
            "f_open_hz", "vp_open_m_per_s", "vg_open_m_per_s", "k2",
        ])
        for lam in lams:
            f_s = disp.a1_freq(lam, plate, "short")
            f_o = disp.a1_freq(lam, plate, "open")
            v_m = lam * f_s
            v_f = lam * f_o
            w.writerow([
                f"{lam / UM:.12g}", f"{2.0 * math.pi / lam:.12g}",
                f"{f_s:.12g}", f"{v_m:.12g}", f"{disp.a1_vg(f_s, plate, 'short'):.12g}",
                f"{f_o:.12g}", f"{v_f:.12g}", f"{disp.a1_vg(f_o, plate, 'open'):.12g}",
                f"{disp.k2_from_velocities(v_f, v_m):.12g}",
            ])
    _say(args, f"dispersion tables written to {out}")
    return 1 if failures else 0


# --- design -------------------------------------------------------------------


def cmd_design(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    plate = cfg.plate()
    metal = cfg.electrodes[cfg.sweep_metal]
    rows, failures = [], []
    for lam in cfg.sweep_lambdas:
        for n in cfg.sweep_n_cells:
            from .loading import TransducerGeometry

            geom = TransducerGeometry(
                cell_length=lam, n_cells=n, aperture=50.0 * UM,
                electrode=metal, electrode_thickness=cfg.sweep_metal_thickness,
            )
            stack = LayerStack(plate=plate, metal=metal, metal_thickness=cfg.sweep_metal_thickness)
            try:
                f0 = center_frequency(geom, plate)
                f0_loaded = center_frequency(
                    geom, plate, loaded=stack,
                    fc_short=cfg.fc_short_override, vl_short=cfg.vl_short_override,
                )
            except DesignInfeasibleError as exc:
                failures.append((lam, n, str(exc)))
                continue
            from .loading import bilayer_cutoff_short

            _, r_s = electrode_resistance(geom)
            fc_loaded = bilayer_cutoff_short(stack)
            vg_s = disp.a1_vg(f0, plate, "short")
            vg_o = disp.a1_vg(f0, plate, "open")
            vg_eff = 1.0 / (geom.duty / vg_s + (1.0 - geom.duty) / vg_o)
            fbw = 0.886 * vg_eff / (n * lam * f0)
            delay_us_per_mm = 1000.0 / disp.a1_vg(f0, plate, "open")
            rows.append([
                f"{lam / UM:.12g}", n, f"{f0:.12g}", f"{r_s:.12g}", f"{fc_loaded:.12g}",
                cfg.sweep_metal, f"{f0_loaded:.12g}", f"{fbw:.12g}", f"{delay_us_per_mm:.12g}",
            ])
    with open(out / "design_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "lambda_um", "n_cells", "f_center_hz", "r_s_ohm", "f_c_short_loaded_hz",
            "metal", "f_center_loaded_hz", "fbw_pred", "delay_us_per_mm",
        ])
        w.writerows(rows)
    if failures:
        with open(out / "design_failures.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda_um", "n_cells", "reason"])
            for lam, n, reason in failures:
                w.writerow([f"{lam / UM:.12g}", n, reason])
        for lam, n, reason in failures:
            print(f"design infeasible: lambda={lam / UM:g} um N={n}: {reason}", file=sys.stderr)
    _say(args, f"design sweep written to {out / 'design_sweep.csv'}")
    return 0


# --- synth --------------------------------------------------------------------


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    plate = cfg.plate()
    grid = cfg.f_grid()
    failures = 0
    for block in cfg.designs:
        geom = block.geometry(cfg.electrodes)
        k2 = cfg.k2_override if cfg.k2_override is not None else design_k2(geom, plate)
        c_cell = cfg.c_cell_per_aperture if cfg.c_cell_per_aperture is not None else C_CELL_PER_APERTURE
        for gap in block.gaps:
            design = block.design(cfg.electrodes, gap)
            name = f"{block.name}_lg{gap / UM:g}um"
            try:
                network = net.synthesize(design, plate, grid, c_cell_per_aperture=c_cell, k2=k2)
            except Exception as exc:
                print(f"synth: {name}: {exc}", file=sys.stderr)
                failures += 1
                continue
            z1, z2 = network.z_ref_1, network.z_ref_2
            net.touchstone_write(network, out / f"{name}.s2p")
            loaded = geom.stack(plate) if block.dispersion_source == "loaded" else None
            f0 = center_frequency(geom, plate, loaded=loaded)
            c0 = geom.n_cells * c_cell * geom.aperture
            net.write_meta(out / f"{name}.meta", {
                "lg_m": gap,
                "lambda_m": geom.cell_length,
                "n_cells": geom.n_cells,
                "z_match_1": z1,
                "z_match_2": z2,
                "f_center_hz": f0,
                "g0_s": 8.0 * k2 * f0 * c0 * geom.n_cells,
                "k2": k2,
                "pl_db_per_us": design.pl_db_per_us,
                "gamma_tt": design.gamma_tt,
                "feedthrough_f": design.feedthrough_c,
                "il_avg_definition": "mean smoothed IL over the 3 dB band",
            })
            _say(args, f"wrote {name}.s2p")
    return 1 if failures else 0


# --- extract ------------------------------------------------------------------


def _gaps_for(paths: list[Path], gaps_flag: str | None) -> dict[Path, float | None]:
    flag_gaps: list[float] = []
    if gaps_flag:
        flag_gaps = [float(tok) * UM for tok in gaps_flag.replace(",", " ").split()]
        if len(flag_gaps) not in (0, len(paths)):
            raise InvalidArgumentError(
                f"--gaps lists {len(flag_gaps)} values for {len(paths)} files"
            )
    out: dict[Path, float | None] = {}
    for i, p in enumerate(paths):
        meta_path = p.with_suffix(".meta")
        meta_gap = None
        if meta_path.exists():
            meta = net.read_meta(meta_path)
            if "lg_m" in meta:
                meta_gap = float(meta["lg_m"])
        flag_gap = flag_gaps[i] if flag_gaps else None
        if meta_gap is not None and flag_gap is not None and not math.isclose(meta_gap, flag_gap):
            warnings.warn(
                f"{p.name}: sidecar gap {meta_gap / UM:g} um overrides --gaps value "
                f"{flag_gap / UM:g} um",
                stacklevel=2,
            )
        out[p] = meta_gap if meta_gap is not None else flag_gap
    return out


def cmd_extract(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    window = args.window if args.window else cfg.window
    f_eval = args.f_eval * GHZ if args.f_eval else cfg.f_eval
    paths = [Path(p) for p in args.paths]
    if not paths:
        print("extract: no input files", file=sys.stderr)
        return 1
    gaps = _gaps_for(paths, args.gaps)

    band_rows: list[tuple[str, ext.BandMetrics]] = []
    family: list[tuple[net.TwoPortNetwork, float]] = []
    failures: list[tuple[str, str]] = []
    for p in paths:
        try:
            network = net.touchstone_read(p)
            if args.match:
                match = net.conjugate_match(network)
                network = net.renormalize(network, match.z1, match.z2)
            metrics = ext.band_metrics(network, window, cfg.order)
        except Exception as exc:
            failures.append((p.name, str(exc)))
            print(f"extract: {p.name}: {exc}", file=sys.stderr)
            continue
        band_rows.append((p.name, metrics))
        if gaps[p] is not None:
            family.append((network, gaps[p]))
    ext.write_band_metrics_csv(band_rows, out / "band_metrics.csv")

    distinct = {lg for _, lg in family}
    if len(distinct) >= 2:
        fit = ext.fit_propagation(family, f_eval, smoothing_window=window, order=cfg.order)
        ext.write_propagation_csv([fit], out / "propagation.csv")
        wide = ext.wideband_fit(
            family, smoothing_window=window, order=cfg.order,
            noise_floor_db=cfg.noise_floor_db,
        )
        ext.write_propagation_csv(wide, out / "wideband.csv")
        print(
            f"propagation at {f_eval / GHZ:.4g} GHz: vg = {fit.vg:.4g} m/s, "
            f"PL = {fit.pl_db_per_us:.4g} dB/us ({fit.pl_db_per_um:.4g} dB/um)"
        )
    else:
        print("propagation: not computed (need >= 2 files with distinct gap lengths)")

    if failures:
        print(f"extract: {len(failures)} file(s) failed:", file=sys.stderr)
        for name, reason in failures:
            print(f"  {name}: {reason}", file=sys.stderr)
        return 1
    return 0


# --- match --------------------------------------------------------------------


def cmd_match(args) -> int:
    out = _out_dir(args)
    rows = []
    failures = 0
    for p in (Path(q) for q in args.paths):
        try:
            network = net.touchstone_read(p)
            m = net.conjugate_match(network)
        except Exception as exc:
            print(f"match: {p.name}: {exc}", file=sys.stderr)
            failures += 1
            continue
        rows.append([
            p.name, f"{m.f_hz:.12g}",
            f"{m.z1.real:.12g}", f"{m.z1.imag:.12g}",
            f"{m.z2.real:.12g}", f"{m.z2.imag:.12g}",
            int(m.fallback),
        ])
        print(
            f"{p.name}: match at {m.f_hz / GHZ:.4g} GHz, "
            f"z1 = {m.z1.real:.1f}{m.z1.imag:+.1f}j Ohm, "
            f"z2 = {m.z2.real:.1f}{m.z2.imag:+.1f}j Ohm"
            + (" (one-port fallback)" if m.fallback else "")
        )
        if args.apply:
            matched = net.renormalize(network, m.z1, m.z2)
            with open(out / f"{p.stem}_matched.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["f_hz", "il_db", "rl_db"])
                for f, il, rl in zip(matched.f, matched.il_db(), matched.rl_db()):
                    w.writerow([f"{f:.12g}", f"{il:.12g}", f"{rl:.12g}"])
    with open(out / "match.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["file", "f_hz", "z1_re_ohm", "z1_im_ohm", "z2_re_ohm", "z2_im_ohm", "fallback"])
        w.writerows(rows)
    return 1 if failures else 0


# --- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lambline",
        description="A1 Lamb-wave acoustic delay line design and extraction toolkit",
    )
    ap.add_argument("--config", help="INI config file (defaults built in)")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("dispersion", help="dispersion branches and decoupled-model tables")
    sub.add_parser("design", help="center frequency / resistance design sweep")
    sub.add_parser("synth", help="synthesize two-port networks to .s2p files")

    p_ext = sub.add_parser("extract", help="band metrics and propagation extraction")
    p_ext.add_argument("paths", nargs="*", help=".s2p files")
    p_ext.add_argument("--gaps", help="comma-separated gap lengths in um (sidecars win)")
    p_ext.add_argument("--window", type=int, help="Savitzky-Golay window (points)")
    p_ext.add_argument("--f-eval", dest="f_eval", type=float, help="evaluation frequency, GHz")
    p_ext.add_argument("--match", action="store_true",
                       help="conjugately match each network before metrics")

    p_match = sub.add_parser("match", help="conjugate-match impedances of .s2p files")
    p_match.add_argument("paths", nargs="+", help=".s2p files")
    p_match.add_argument("--apply", action="store_true",
                         help="also write matched IL/RL curves as CSV")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "dispersion": cmd_dispersion,
        "design": cmd_design,
        "synth": cmd_synth,
        "extract": cmd_extract,
        "match": cmd_match,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:
        print(f"lambline {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
