"""
Command-line entry point
------------------------

::

    wcdshock run MANIFEST [--out DIR] [--tau T] [--order P] [--c SPEC] [--margin M]
    wcdshock sweep MANIFEST [--out DIR] [--workers N]
    wcdshock compare A.csv B.csv [--interpolate]
    wcdshock stencil dump --p N
    wcdshock oracle kinetic --delta D --uL U
    wcdshock oracle classical --uL A --uR B [--t T --x0 X0 --like CSV --out FILE]

Exit status is 0 on success, 2 for configuration errors and 3 for
numerical aborts.
"""

from __future__ import annotations

import argparse
import copy
import csv
import logging
import math
import os
import sys
from typing import List, Optional

import numpy as np

from wcdshock import __version__
from wcdshock.analysis import (
    DEFAULT_MIN_CELLS, DEFAULT_REL_TOL, MhdSweepConfig, SweepConfig,
    kinetic_sweep, mhd_kinetic_sweep,
)
from wcdshock.io import (
    ManifestError, fmt, load_json, parse_manifest, parse_wcd, read_field_csv,
    write_field_csv, write_json, write_rows,
)
from wcdshock.models import ModelDomainError
from wcdshock.oracles import (
    NoConnectionError, Rarefaction, TravelingWaveProblem, classical_riemann_cubic,
    traveling_wave_kinetic,
)
from wcdshock.scheme import NonFiniteStateError, run
from wcdshock.stencil import StencilError, dump_csv_rows
from wcdshock.wcd import InfeasibleToleranceError

logger = logging.getLogger("wcdshock")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class CliError(Exception):
    def __init__(self, message: str, status: int = EXIT_CONFIG):
        self.status = status
        super().__init__(message)


def _apply_wcd_overrides(raw: dict, args) -> dict:
    raw = copy.deepcopy(raw)
    wcd = raw.setdefault("wcd", {})
    if getattr(args, "tau", None) is not None:
        wcd["tau"] = args.tau
    if getattr(args, "order", None) is not None:
        wcd["p"] = args.order
    if getattr(args, "c", None) is not None:
        wcd["c"] = args.c
    if getattr(args, "margin", None) is not None:
        wcd["safety_margin"] = args.margin
    return raw


# {{{ run


def cmd_run(args) -> int:
    raw = _apply_wcd_overrides(load_json(args.manifest), args)
    if args.out:
        raw.setdefault("output", {})["dir"] = args.out
    manifest = parse_manifest(raw)
    config = manifest.config
    out = manifest.out_dir

    try:
        result = run(config)
    except NonFiniteStateError as exc:
        raise CliError(f"numerical abort at step {exc.step}, t = {exc.time:.17g}: {exc}",
                       EXIT_NUMERICAL) from None
    except ModelDomainError as exc:
        raise CliError(f"numerical abort: {exc}", EXIT_NUMERICAL) from None

    names = config.model.component_names
    write_field_csv(os.path.join(out, "final.csv"), result.final, names)
    snap_files = []
    for k, snap in enumerate(result.snapshots):
        name = f"snapshot_{k:03d}.csv"
        write_field_csv(os.path.join(out, name), snap, names)
        snap_files.append({"file": name, "time": snap.time})

    write_rows(os.path.join(out, "diagnostics.csv"), ["step", "t", "dt", "c"],
               ([n, fmt(t), fmt(dt), fmt(c)] for n, (t, dt, c) in enumerate(
                   zip(result.t_history, result.dt_history, result.c_history))))

    b = result.bounds
    write_json(os.path.join(out, "run.json"), {
        "manifest": raw,
        "package_version": __version__,
        "final": {"file": "final.csv", "time": result.final.time},
        "snapshots": snap_files,
        "n_steps": result.n_steps,
        "max_c": max(result.c_history, default=0.0),
        "series_bounds": None if b is None else {
            "p": b.p, "s_f_hat": b.s_f_hat, "s_d_hat": b.s_d_hat,
            "s_c_hat": None if math.isnan(b.s_c_hat) else b.s_c_hat,
            "k_truncation": b.k_truncation},
    })
    print(f"wrote {out}: {result.n_steps} steps, t = {result.final.time:.17g}")
    return 0


# }}}


# {{{ sweep


def _values_list(spec, key: str) -> List[float]:
    if isinstance(spec, dict):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError):
            raise ManifestError(key, "expected {start, stop, num} or a list") from None
        return [float(v) for v in np.linspace(start, stop, num)]
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    if isinstance(spec, (int, float)):
        return [float(spec)]
    raise ManifestError(key, "expected {start, stop, num} or a list")


def _tag(value: float) -> str:
    return f"{value:g}"


def cmd_sweep(args) -> int:
    raw = load_json(args.manifest)
    kind = raw.get("kind", "cubic")
    out = args.out or (raw.get("output") or {}).get("dir")
    if not out:
        raise ManifestError("output.dir", "missing (or pass --out)")
    grid = raw.get("grid", {})
    wcd = parse_wcd(raw.get("wcd"))
    workers = args.workers if args.workers is not None else int(raw.get("workers", 1))
    common = dict(
        n_cells=int(grid.get("n_cells", 2000 if kind == "cubic" else 1000)),
        x_min=float(grid.get("x_min", 0.0)), x_max=float(grid.get("x_max", 1.0)),
        wcd=wcd, cfl=float(raw.get("cfl", 0.45)), workers=workers)

    written = []
    if kind == "cubic":
        u_l = _values_list(raw.get("u_l", []), "u_l")
        if not u_l:
            raise ManifestError("u_l", "empty range")
        ext = raw.get("extraction", {})
        cfg = SweepConfig(jump_location=float(raw.get("jump_location", SweepConfig.jump_location)),
                          t_scale=float(raw.get("t_scale", SweepConfig.t_scale)),
                          rel_tol=float(ext.get("rel_tol", DEFAULT_REL_TOL)),
                          min_cells=int(ext.get("min_cells", DEFAULT_MIN_CELLS)),
                          **common)
        u_r = float(raw.get("u_r", -2.0))
        for delta in _values_list(raw.get("delta", 1.0), "delta"):
            recs = kinetic_sweep(u_l, u_r, delta, cfg)
            path = os.path.join(out, f"kinetic_{_tag(delta)}.csv")
            write_rows(path, ["u_L", "u_M", "cells", "p", "tau", "error"],
                       ([r.left_state, "" if r.middle_state is None else r.middle_state,
                         r.mesh_cells, r.p, r.tau, r.error or ""] for r in recs))
            written.append(path)
    elif kind == "hall-mhd":
        r_l = _values_list(raw.get("r_l", []), "r_l")
        if not r_l:
            raise ManifestError("r_l", "empty range")
        cfg = MhdSweepConfig(jump_location=float(raw.get("jump_location", 0.25)),
                             t_scale=float(raw.get("t_scale", 0.1)),
                             ratio=float(raw.get("ratio", 0.6)),
                             theta_l=float(raw.get("theta_l", 0.3 * math.pi)),
                             theta_r=float(raw.get("theta_r", 1.3 * math.pi)),
                             **common)
        for alpha in _values_list(raw.get("alpha", 1.0), "alpha"):
            recs = mhd_kinetic_sweep(r_l, alpha, cfg)
            path = os.path.join(out, f"mhd_kinetic_{_tag(alpha)}.csv")

            def row(r):
                if not r.ok:
                    return [r.left_state, "", "", "", r.mesh_cells, r.p, r.tau, r.error]
                return [r.left_state, r.shock_speed, r.phi, r.phi / r.shock_speed**2,
                        r.mesh_cells, r.p, r.tau, ""]

            write_rows(path, ["r_L", "s", "phi", "phi_over_s2", "cells", "p", "tau", "error"],
                       (row(r) for r in recs))
            written.append(path)
    else:
        raise ManifestError("kind", f"expected 'cubic' or 'hall-mhd', got {kind!r}")

    write_json(os.path.join(out, "sweep.json"),
               {"manifest": raw, "package_version": __version__,
                "files": [os.path.basename(p) for p in written]})
    for p in written:
        print(p)
    return 0


# }}}


# {{{ compare


def field_distances(xa, va, xb, vb, interpolate: bool = False, dx: Optional[float] = None):
    """L1, L2 and Linf distances between two sampled fields, on the grid of
    the first one."""
    va, vb = np.atleast_2d(va), np.atleast_2d(vb)
    if va.shape[0] != vb.shape[0]:
        raise ValueError("compare: component counts differ")
    if va.shape != vb.shape or not np.allclose(xa, xb, rtol=0, atol=1e-12 * max(1.0, np.ptp(xa))):
        if not interpolate:
            raise ValueError("compare: grids differ; pass --interpolate")
        vb = np.stack([np.interp(xa, xb, row) for row in vb])
    if dx is None:
        dx = float(xa[1] - xa[0]) if xa.size > 1 else 1.0
    d = np.abs(va - vb)
    return {"L1": float(np.sum(d) * dx),
            "L2": float(np.sqrt(np.sum(d**2) * dx)),
            "Linf": float(np.max(d))}


def cmd_compare(args) -> int:
    xa, va, _ = read_field_csv(args.a)
    xb, vb, _ = read_field_csv(args.b)
    try:
        d = field_distances(xa, va, xb, vb, args.interpolate)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    for k in ("L1", "L2", "Linf"):
        print(f"{k},{fmt(d[k])}")
    return 0


# }}}


# {{{ stencil, oracles


def cmd_stencil_dump(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    for row in dump_csv_rows(args.p, args.tol_tail):
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return 0


def cmd_oracle_kinetic(args) -> int:
    try:
        res = traveling_wave_kinetic(TravelingWaveProblem(args.uL, args.delta))
    except NoConnectionError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from None
    print(f"u_plus,{fmt(res.u_plus)}")
    print(f"s,{fmt(res.speed)}")
    print(f"residual,{fmt(res.residual)}")
    return 0


def cmd_oracle_classical(args) -> int:
    sol = classical_riemann_cubic(args.uL, args.uR)
    if args.like is None:
        for wave in sol.waves:
            if isinstance(wave, Rarefaction):
                print(f"rarefaction,{fmt(wave.left)},{fmt(wave.right)},"
                      f"{fmt(wave.speed_left)},{fmt(wave.speed_right)}")
            else:
                print(f"shock,{fmt(wave.left)},{fmt(wave.right)},{fmt(wave.speed)}")
        return 0

    if args.t is None:
        raise CliError("oracle classical: --like requires --t")
    x, _, _ = read_field_csv(args.like)
    u = sol.sample(x, args.t, args.x0)
    if args.out:
        write_rows(args.out, ["x", "u"], ([fmt(a), fmt(b)] for a, b in zip(x, u)))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["x", "u"])
        for a, b in zip(x, u):
            w.writerow([fmt(a), fmt(b)])
    return 0


# }}}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wcdshock", description=__doc__.split("\n")[1])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a manifest")
    r.add_argument("manifest")
    r.add_argument("--out")
    r.add_argument("--tau", type=float)
    r.add_argument("--order", type=int, help="stencil half-width p")
    r.add_argument("--c", help="'adaptive' or 'fixed:<value>'")
    r.add_argument("--margin", type=float)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="kinetic-function sweep")
    s.add_argument("manifest")
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="distances between two field CSVs")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--interpolate", action="store_true")
    c.set_defaults(func=cmd_compare)

    st = sub.add_parser("stencil", help="stencil utilities")
    st_sub = st.add_subparsers(dest="stencil_command", required=True)
    d = st_sub.add_parser("dump", help="weights and tail sums for half-width p")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--tol-tail", type=float, default=1e-14)
    d.set_defaults(func=cmd_stencil_dump)

    o = sub.add_parser("oracle", help="reference solutions")
    o_sub = o.add_subparsers(dest="oracle_command", required=True)
    k = o_sub.add_parser("kinetic", help="traveling-wave kinetic function")
    k.add_argument("--delta", type=float, default=1.0)
    k.add_argument("--uL", type=float, required=True)
    k.set_defaults(func=cmd_oracle_kinetic)
    cl = o_sub.add_parser("classical", help="classical Riemann solution, cubic flux")
    cl.add_argument("--uL", type=float, required=True)
    cl.add_argument("--uR", type=float, required=True)
    cl.add_argument("--t", type=float)
    cl.add_argument("--x0", type=float, default=0.0)
    cl.add_argument("--like", help="field CSV whose x column to sample on")
    cl.add_argument("--out")
    cl.set_defaults(func=cmd_oracle_classical)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except (ManifestError, InfeasibleToleranceError, StencilError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
