"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 a solve did not
converge, 4 input/output error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import convergence_study, decay_profile, eigenvalue_exchange_profile, q0_field
from .config import PRESETS, STUDY_KINDS, RunConfig, load_config
from .errors import ConfigError, DivergenceError, DomainError
from .fields import cylindrical_matrix
from .harmonic import (
    degree_samples,
    detect_defects,
    initial_psi,
    psi_relax,
    solve_multistart,
)
from .io import csv_text, field_csv, json_text, parse_float, psi_csv, write_text
from .ldg_relax import initial_field, relax, sup_bound
from .qtensor import biaxiality_array, eigenvalues_sorted
from .quadrupole import QuadrupolarConfig, ring_radius

log = logging.getLogger("nematic")

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_IO = 0, 2, 3, 4


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _report(data: dict, wall_time: float) -> dict:
    # timestamps live only in the metadata block; "data" is deterministic
    return {
        "data": data,
        "metadata": {
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "version": __version__,
            "wall_time": wall_time,
        },
    }


class _Sink:
    """Routes named outputs to files under ``--out`` or the primary one to stdout."""

    def __init__(self, out: str | None, fmt: str | None, formats):
        self.out = Path(out) if out else None
        self.fmt = fmt
        self.formats = tuple(formats)

    def emit(self, name: str, kind: str, text: str, primary: bool = False):
        if self.out is not None:
            if self.fmt is None and kind not in self.formats:
                return
            if self.fmt is not None and kind != self.fmt:
                return
            write_text(self.out / name, text)
        elif (self.fmt is None and primary) or (self.fmt == kind and primary):
            sys.stdout.write(text)


def _sink(args, cfg: RunConfig) -> _Sink:
    out = args.out or cfg.directory or None
    return _Sink(out, args.format, cfg.formats)


# ---------------------------------------------------------------------------
# commands


def cmd_ring(args, cfg: RunConfig) -> int:
    tokens = list(args.w) if args.w else [str(w) for w in cfg.w_values]
    if not tokens:
        raise _Usage("ring needs at least one w value")
    rows, bad = [], False
    for tok in tokens:
        try:
            w = parse_float(tok)
            res = ring_radius(w)
            rows.append([w, res.exists, res.r_w, res.residual, res.boundary, ""])
        except (ValueError, DomainError) as exc:
            bad = True
            rows.append([tok, "", "", "", "", f"error: {exc}".replace(",", ";")])
    table = csv_text(("w", "exists", "r_w", "residual", "boundary", "error"), rows)
    records = [dict(zip(("w", "exists", "r_w", "residual", "boundary", "error"), r)) for r in rows]
    sink = _sink(args, cfg)
    sink.emit("ring.csv", "csv", table, primary=args.format != "json")
    sink.emit("ring.json", "json", json_text({"rows": records}), primary=args.format == "json")
    return EXIT_USAGE if bad else EXIT_OK


def cmd_q0_field(args, cfg: RunConfig) -> int:
    g = cfg.grid
    qc = QuadrupolarConfig(cfg.w, cfg.material.s_star)
    F = q0_field(g, qc)
    M = cylindrical_matrix(F.m)
    lam = eigenvalues_sorted(M)
    beta = biaxiality_array(M)
    R, P = np.meshgrid(g.r, g.phi, indexing="ij")
    cols = [R, P, g.rho, g.z, F.m[..., 0], F.m[..., 1], F.m[..., 2], lam[..., 0], lam[..., 1], lam[..., 2], beta]
    data = np.column_stack([np.broadcast_to(c, g.shape).ravel() for c in cols])
    header = ("r", "phi", "rho", "z", "m_rr", "m_tt", "m_rz", "lambda1", "lambda2", "lambda3", "biaxiality")
    sink = _sink(args, cfg)
    sink.emit("q0_field.csv", "csv", csv_text(header, data.tolist()), primary=args.format != "json")
    summary = {"w": cfg.w, "s_star": qc.s_star, "ring": _ring_record(cfg.w), "config": cfg.echo()}
    sink.emit("q0_field.json", "json", json_text(summary), primary=args.format == "json")
    return EXIT_OK


def _ring_record(w: float) -> dict:
    res = ring_radius(w)
    return {"exists": res.exists, "r_w": res.r_w, "residual": res.residual, "boundary": res.boundary}


def cmd_ldg_solve(args, cfg: RunConfig) -> int:
    p, g = cfg.material, cfg.grid
    t0 = time.perf_counter()
    F, rep = relax(initial_field(p, g, cfg.init), p, g, cfg.schedule)
    data = rep.payload()
    data["bound"] = sup_bound(p)
    data["config"] = cfg.echo()
    sink = _sink(args, cfg)
    sink.emit("ldg_field.csv", "csv", field_csv(F, g), primary=args.format != "json")
    sink.emit("ldg_report.json", "json", json_text(_report(data, time.perf_counter() - t0)), primary=args.format == "json")
    if not rep.converged:
        log.warning("%s", rep.message)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_harmonic_solve(args, cfg: RunConfig) -> int:
    g, sched = cfg.grid, cfg.schedule
    t0 = time.perf_counter()
    multi = cfg.multi_start or args.multi_start
    branches = []
    if multi:
        res = solve_multistart(g, sched, far_field=cfg.far_field)
        for b in res.branches:
            log.info("branch %s: energy %.17g converged=%s", b.init, b.energy, b.report.converged)
            branches.append({"init": b.init, "energy": b.energy, "converged": b.report.converged})
        F, rep = res.best.field, res.best.report
        chosen = res.best.init
    else:
        F, rep = psi_relax(initial_psi(g, cfg.psi_init, cfg.far_field), g, sched, cfg.far_field)
        chosen = cfg.psi_init
    census = detect_defects(F, g)
    try:
        samples = degree_samples(F, g, 8, census)
    except DomainError as exc:
        log.warning("degree sampling skipped: %s", exc)
        samples = []
    doc = {
        "defects": census.to_record(),
        "unresolved": [list(u) for u in census.unresolved],
        "energy": rep.final_energy,
        "degreeSamples": [{"r": r, "value": v} for r, v in samples],
        "init": chosen,
        "branches": branches,
        "solve": rep.payload(),
        "config": cfg.echo(),
    }
    sink = _sink(args, cfg)
    sink.emit("psi_field.csv", "csv", psi_csv(F, g), primary=args.format != "json")
    sink.emit("defect_census.json", "json", json_text(_report(doc, time.perf_counter() - t0)), primary=args.format == "json")
    if not rep.converged:
        log.warning("%s", rep.message)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_study(args, cfg: RunConfig) -> int:
    kind = args.kind or cfg.study_kind
    if kind not in STUDY_KINDS:
        raise _Usage(f"unknown study kind {kind!r}; choose from {', '.join(STUDY_KINDS)}")
    t0 = time.perf_counter()
    sink = _sink(args, cfg)
    p, g = cfg.material, cfg.grid
    table = None
    if kind == "rate":
        st = convergence_study(cfg.Ls, cfg.w, p, g, cfg.schedule, r_max=cfg.r_max)
        data = {
            "kind": kind,
            "w": cfg.w,
            "fit": st.fit.to_record(),
            "runs": [
                {"L": r.L, "error": r.error, "sup_norm": r.report.sup_norm, "iterations": r.report.iterations,
                 "residual": r.report.residual, "final_energy": r.report.final_energy}
                for r in st.runs
            ],
            "bound": sup_bound(p),
            "config": cfg.echo(),
        }
        table = csv_text(("L", "error"), [[r.L, r.error] for r in st.runs])
    elif kind == "decay":
        F, rep = relax(initial_field(p, g, cfg.init), p, g, cfg.schedule)
        if not rep.converged:
            raise DivergenceError(rep.message)
        prof = decay_profile(F, p, g, n=cfg.n_radii, r_min=cfg.r_min)
        data = {"kind": kind, "profile": prof.to_records(), "growth_ratio": prof.growth_ratio(),
                "solve": rep.payload(), "config": cfg.echo()}
        table = csv_text(("r", "dist_scaled", "tail_scaled"), [[x["r"], x["dist_scaled"], x["tail_scaled"]] for x in prof.to_records()])
    else:
        radii = np.linspace(1.0, cfg.r_max, 401)
        if cfg.source == "q0":
            prof = eigenvalue_exchange_profile(QuadrupolarConfig(cfg.w, p.s_star), radii)
        else:
            F, rep = relax(initial_field(p, g, cfg.init), p, g, cfg.schedule)
            if not rep.converged:
                raise DivergenceError(rep.message)
            prof = eigenvalue_exchange_profile(F, g.r[g.r <= cfg.r_max], grid=g)
        data = {"kind": kind, "source": cfg.source, "crossing": prof.crossing, "min_gap": prof.min_gap,
                "ring": _ring_record(cfg.w), "config": cfg.echo()}
        table = csv_text(("r", "lambda1", "lambda2", "lambda3", "biaxiality"), prof.table.tolist())
    sink.emit(f"study_{kind}.json", "json", json_text(_report(data, time.perf_counter() - t0)), primary=args.format != "csv")
    sink.emit(f"study_{kind}.csv", "csv", table, primary=args.format == "csv")
    return EXIT_OK


COMMANDS = {
    "ring": cmd_ring,
    "q0-field": cmd_q0_field,
    "ldg-solve": cmd_ldg_solve,
    "harmonic-solve": cmd_harmonic_solve,
    "study": cmd_study,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--out", metavar="DIR", help="write outputs under DIR instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="restrict output to one format")
    common.add_argument("--preset", choices=sorted(PRESETS), help="named starting configuration")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="nematic", description="Landau-de Gennes colloid laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("ring", parents=[common], help="Saturn-ring radius table")
    p.add_argument("w", nargs="*", help="anchoring ratios (use 'inf' for strong anchoring)")
    sub.add_parser("q0-field", parents=[common], help="sample the small-particle limit on the grid")
    sub.add_parser("ldg-solve", parents=[common], help="relax the Landau-de Gennes equations")
    p = sub.add_parser("harmonic-solve", parents=[common], help="axisymmetric harmonic map and its defects")
    p.add_argument("--multi-start", action="store_true", help="try every initialisation, keep the lowest energy")
    p = sub.add_parser("study", parents=[common], help="decay, rate or exchange study")
    p.add_argument("kind", nargs="?", help="one of: " + ", ".join(STUDY_KINDS))
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        print(f"nematic: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.command:
        print("nematic: usage error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.preset)
        return COMMANDS[args.command](args, cfg)
    except _Usage as exc:
        print(f"nematic: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DomainError) as exc:
        print(f"nematic: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"nematic: not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        where = f" ({exc.filename})" if getattr(exc, "filename", None) else ""
        print(f"nematic: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
