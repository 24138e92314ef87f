"""Command-line front end: ``platehom {cell,classify,energy,recover,twoscale} -c CONFIG``."""
from __future__ import annotations

import argparse
import cmath
import json
import logging
from pathlib import Path
import sys

from .cellprob import Direction, solve_cell, verify_cell
from .config import COMMANDS, RunConfig, parse_config
from .energy import QuadratureSpec, energy_eps, energy_hom
from .errors import ConfigError, PlateHomError, QuadratureNotConverged
from .recovery import (BumpWindow, build_theta, convergence_study, cosine_shape, square_shape,
                       two_scale_coefficient, uniform_theta)
from .surface import ImmersionSampler, classify, write_mesh

log = logging.getLogger("platehom")

EXIT_OK, EXIT_VALIDATION, EXIT_QUADRATURE = 0, 2, 3


def _fmt(v) -> str:
    return f"{v:.17g}"


def _theta_factory(cfg: RunConfig, Q, chart):
    theta = cfg.run["theta"]
    if theta == "none":
        return lambda eps: None
    if theta == "recovery":
        sols = {}
        return lambda eps: build_theta(chart, Q, eps, solutions=sols)
    amp = float(theta.get("amplitude", 0.5))
    shape = cosine_shape(amp) if theta["type"] == "cosine" else square_shape(amp)
    return lambda eps: uniform_theta(chart, shape, eps)


# execution-only keys; left out of the echo so output bytes depend on inputs alone
_NOT_ECHOED = ("threads", "out", "mesh")


def _metadata(cfg: RunConfig) -> list:
    d = cfg.to_dict()
    for key in _NOT_ECHOED:
        d["run"].pop(key, None)
    return [f"# config = {json.dumps(d, sort_keys=True)}"]


def _cmd_cell(cfg, Q):
    d = cfg.run["direction"]
    T = Direction.generic(d["angle"]) if "angle" in d else Direction.rational(d["p"], d["q"])
    sol = solve_cell(Q, T)
    text = sol.to_csv()
    if sol.r > 0:
        text = f"# verify_residual = {verify_cell(Q, sol):.3e}\n" + text
    return text


def _cmd_classify(cfg, Q):
    summary = classify(cfg.build_chart())
    lines = ["kind,direction,measure", f"flat,,{_fmt(summary['flat_measure'])}"]
    for D, m in sorted(summary["cylindrical_measure_per_direction"].items(), key=lambda kv: kv[0].label()):
        lines.append(f"cylindrical,{D.label()},{_fmt(m)}")
    lines.append(f"conical,,{_fmt(summary['conical_measure'])}")
    return "\n".join(lines) + "\n"


def _quad(cfg):
    return QuadratureSpec(**cfg.run["quadrature"])


def _cmd_energy(cfg, Q):
    chart = cfg.build_chart()
    factory = _theta_factory(cfg, Q, chart)
    quad = _quad(cfg)
    lines = [f"# E_hom = {_fmt(energy_hom(Q, chart))}", "eps,E_eps"]
    for eps in cfg.run["eps"]:
        E = energy_eps(Q, ImmersionSampler(chart, factory(eps)), eps, quad)
        lines.append(f"{_fmt(eps)},{_fmt(E)}")
    return "\n".join(lines) + "\n"


def _cmd_recover(cfg, Q):
    rep = convergence_study(Q, cfg.build_chart(), cfg.run["eps"], _quad(cfg), threads=int(cfg.run["threads"]))
    return rep.to_csv()


def _cmd_twoscale(cfg, Q):
    chart = cfg.build_chart()
    factory = _theta_factory(cfg, Q, chart)
    window = BumpWindow.interior(chart, cfg.run["window_margin"])
    k = cfg.run["k"]
    lines = [f"# k = {k[0]} {k[1]}", "eps,abs_M,arg_M"]
    for eps in cfg.run["eps"]:
        M = two_scale_coefficient(ImmersionSampler(chart, factory(eps)), eps, k, window,
                                  tol=cfg.run["twoscale_tol"])
        lines.append(f"{_fmt(eps)},{_fmt(abs(M))},{_fmt(cmath.phase(M))}")
    return "\n".join(lines) + "\n"


HANDLERS = {"cell": _cmd_cell, "classify": _cmd_classify, "energy": _cmd_energy,
            "recover": _cmd_recover, "twoscale": _cmd_twoscale}


def run(cfg: RunConfig, seed: int | None = None) -> int:
    """Execute the configured command and write ``<out>/<command>.csv``."""
    command = cfg.run["command"]
    try:
        Q = cfg.build_material(seed)
        body = HANDLERS[command](cfg, Q)
        out = Path(cfg.run["out"])
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{command}.csv"
        path.write_text("\n".join(_metadata(cfg)) + "\n" + body)
        log.info("wrote %s", path)
        if cfg.run.get("mesh") and cfg.chart is not None:
            chart = cfg.build_chart()
            theta = _theta_factory(cfg, Q, chart)(min(cfg.run["eps"]))
            write_mesh(ImmersionSampler(chart, theta), cfg.run["mesh"])
            log.info("wrote mesh %s", cfg.run["mesh"])
    except QuadratureNotConverged as exc:
        print(f"platehom: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (ConfigError, PlateHomError) as exc:
        print(f"platehom: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="platehom", description="Homogenized plate bending: cell problems, energies and recovery sweeps.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("-c", "--config", required=True, help="JSON config file")
    ap.add_argument("-o", "--out", help="output directory (default from config, else .)")
    ap.add_argument("--threads", type=int, help="parallel eps evaluations")
    ap.add_argument("--seed", type=int, help="seed for random materials")
    ap.add_argument("--quad-nodes", type=int, help="Gauss nodes per material cell")
    ap.add_argument("--richardson-tol", type=float, help="relative Richardson acceptance tolerance")
    ap.add_argument("--mesh", help="write an ASCII triangle mesh of u to this path")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"platehom: cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(f"platehom: $: invalid JSON: {exc.msg}", file=sys.stderr)
        return EXIT_VALIDATION
    if isinstance(raw, dict):
        run_sec = raw.setdefault("run", {})
        run_sec["command"] = args.command
        if args.out is not None:
            run_sec["out"] = args.out
        if args.threads is not None:
            run_sec["threads"] = args.threads
        if args.mesh is not None:
            run_sec["mesh"] = args.mesh
        quad = run_sec.setdefault("quadrature", {})
        if args.quad_nodes is not None:
            quad["nodes_per_cell"] = args.quad_nodes
        if args.richardson_tol is not None:
            quad["richardson_tol"] = args.richardson_tol
    try:
        cfg = parse_config(json.dumps(raw))
    except ConfigError as exc:
        print(f"platehom: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if cfg.run["command"] in ("classify", "energy", "recover", "twoscale") and cfg.chart is None:
        print("platehom: chart: missing", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg, args.seed)


if __name__ == "__main__":
    sys.exit(main())
