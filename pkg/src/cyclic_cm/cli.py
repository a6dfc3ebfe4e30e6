"""Command-line entry point: gen, verify, evolve, curve.

Exit codes: 0 all checks passed, 1 a verification failed, 2 bad
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from dataclasses import fields
from typing import Optional

import numpy as np

from . import __version__
from .config import DEFAULT, Tolerances
from .curves import conjugates, curve_polys, default_sample_points, incidence_check, quotient_residuals, quotient_samples, samples_csv
from .dynamics import FlowSpec, H_spectral, H_trace, crosscheck_m1, evolve, positions
from .errors import CyclicCMError, DegenerateSpectrum
from .model import build_dual, derived_constants, is_regular, random_coupling, sample, sample_qmodel
from .serialize import cnum, cvec, from_obj, to_obj
from .suites import CRITERIA, SUITES, CaseConfig, run_all

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def parse_coupling(text: str) -> list[complex]:
    """'re,im;re,im;...' (a bare 're' is allowed for a real entry)."""
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = [p.strip() for p in item.split(",")]
        try:
            if len(parts) == 1:
                out.append(complex(float(parts[0]), 0.0))
            elif len(parts) == 2:
                out.append(complex(float(parts[0]), float(parts[1])))
            else:
                raise ValueError
        except ValueError:
            raise ConfigError(f"cannot parse coupling entry {item!r}; expected 're,im'") from None
    if not out:
        raise ConfigError("empty coupling")
    return out


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("CYCLIC_CM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"CYCLIC_CM_SEED={env!r} is not an integer") from None


def _tol_dest(name: str) -> str:
    return "tol_" + name


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="order of the cyclic group")
    common.add_argument("--n", type=int, help="number of particles")
    common.add_argument("--d", type=int, help="spin dimension (0 = spinless)")
    common.add_argument("--g", help="coupling as 're,im;re,im;...' (fixes m)")
    common.add_argument("--seed", type=int, help="random seed (default: $CYCLIC_CM_SEED or 0)")
    common.add_argument("--cases", type=int, default=None)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    for f in fields(Tolerances):
        common.add_argument("--tol-" + f.name.replace("_", "-"), dest=_tol_dest(f.name), type=float, default=None, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="cyclic-cm", description="Cyclic Calogero-Moser spaces: sampling, verification, flows and curves.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen", parents=[common], help="sample points and their dual-model quadruples")

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES), help="run only this suite (repeatable)")
    p.add_argument("--negative-control", action="store_true", help="negate w before the constraint check (must fail)")
    p.add_argument("--bracket-cases", type=int, default=100)

    p = sub.add_parser("evolve", parents=[common], help="exact flow of H_K in spectral coordinates")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--t", type=complex, default=1.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--crosscheck-m1", action="store_true", help="compare with RK4 for the m = 1 particle system")
    p.add_argument("--input", help="JSON file from 'gen' to read the first case from")

    p = sub.add_parser("curve", parents=[common], help="interpolation curve and quotient samples")
    p.add_argument("--delta", type=int, choices=(1, 2), default=1)
    p.add_argument("--samples", type=int, default=16, help="number of ring sample points")
    p.add_argument("--input", help="JSON file from 'gen' to read the first case from")
    return parser


def tolerances(args) -> Tolerances:
    overrides = {f.name: getattr(args, _tol_dest(f.name)) for f in fields(Tolerances) if getattr(args, _tol_dest(f.name)) is not None}
    return DEFAULT.with_overrides(**overrides)


def case_config(args, default_cases: int) -> CaseConfig:
    g = parse_coupling(args.g) if args.g else None
    if g is not None and args.m is not None and args.m != len(g):
        raise ConfigError(f"--m {args.m} disagrees with the {len(g)} coupling entries")
    for flag, low in (("m", 1), ("n", 1), ("d", 0)):
        val = getattr(args, flag)
        if val is not None and val < low:
            raise ConfigError(f"--{flag} must be >= {low}")
    cases = args.cases if args.cases is not None else default_cases
    if cases < 1:
        raise ConfigError("--cases must be >= 1")
    if g is not None:
        ok, cert = is_regular(derived_constants(len(g), g))
        if not ok:
            raise ConfigError(f"coupling is not regular: {cert}")
    return CaseConfig(seed=resolve_seed(args.seed), cases=cases, m=args.m, n=args.n, d=args.d, g=g)


def _draw(cfg: CaseConfig, k: int = 0):
    """One (coupling, point, framing) for gen/evolve/curve; defaults m = 2, n = 3, spinless."""
    rng = np.random.default_rng([cfg.seed, k])
    m = len(cfg.g) if cfg.g is not None else (cfg.m or 2)
    n = cfg.n or 3
    coupling = derived_constants(m, cfg.g) if cfg.g is not None else random_coupling(rng, m)
    point, framing = sample(rng, m, n, coupling, cfg.d or None)
    return coupling, point, framing


def _load_input(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    first = doc["cases"][0] if "cases" in doc else doc
    framing = from_obj(first["framing"]) if first.get("framing") else None
    return from_obj(first["coupling"]), from_obj(first["point"]), framing


def _emit(args, text: str) -> None:
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _meta(args, cfg: CaseConfig, tol: Tolerances) -> dict:
    return {
        "tool": "cyclic-cm",
        "version": __version__,
        "command": args.command,
        "seed": cfg.seed,
        "config": {"m": cfg.m, "n": cfg.n, "d": cfg.d, "g": None if cfg.g is None else cvec(cfg.g), "cases": cfg.cases},
        "tolerances": tol.as_dict(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    cfg = case_config(args, default_cases=1)
    out = []
    for k in range(cfg.cases):
        coupling, point, framing = _draw(cfg, k)
        quad = build_dual(point, coupling, framing)
        out.append(
            {
                "case": k,
                "coupling": to_obj(coupling),
                "point": to_obj(point),
                "framing": to_obj(framing) if framing is not None else None,
                "quadruple": to_obj(quad),
                "spin_constraint_residual": framing.constraint_residual(coupling) if framing is not None else None,
            }
        )
    meta = _meta(args, cfg, DEFAULT)
    meta.pop("python")
    meta.pop("numpy")
    _emit(args, _dump({"meta": meta, "cases": out}))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = case_config(args, default_cases=200)
    tol = tolerances(args)
    results = run_all(cfg, tol, args.suite, negative_control=args.negative_control, bracket_cases=args.bracket_cases)
    crit = {v: k for k, v in CRITERIA.items()}
    report = {
        "meta": _meta(args, cfg, tol),
        "suites": [dict(r.as_dict(), criterion=crit[r.name]) for r in results],
        "pass": all(r.passed for r in results),
    }
    if args.format == "csv":
        lines = ["criterion,suite,check,value,tolerance,pass"]
        for r in report["suites"]:
            for name, c in r["checks"].items():
                lines.append(f"{r['criterion']},{r['suite']},{name},{c['value']!r},{c['tolerance']!r},{c['pass']}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _dump(report))
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name:<13} max residual {r.max_residual:.3e}", file=sys.stderr)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_evolve(args) -> int:
    cfg = case_config(args, default_cases=1)
    tol = tolerances(args)
    coupling, point, framing = _load_input(args.input) if args.input else _draw(cfg)
    if args.K < 1:
        raise ConfigError("--K must be >= 1")
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    rows = []
    H0 = [H_spectral(point, K) for K in range(1, point.n + 1)]
    worst = 0.0
    for s in range(args.steps + 1):
        t = args.t * s / args.steps
        moved, fr = evolve(point, FlowSpec(K=args.K, t=t), framing)
        quad = build_dual(moved, coupling, fr)
        Ht = [H_trace(quad, K) for K in range(1, point.n + 1)]
        worst = max([worst] + [abs(a - b) / max(1.0, abs(b)) for a, b in zip(Ht, H0)])
        try:
            pos = cvec(positions(moved, coupling, fr))
        except DegenerateSpectrum:
            pos = None
        rows.append({"t": cnum(t), "phi": cvec(moved.phi), "positions": pos, "H": [cnum(h) for h in Ht]})
    doc = {
        "meta": _meta(args, cfg, tol),
        "coupling": to_obj(coupling),
        "K": args.K,
        "series": rows,
        "conservation_residual": worst,
        "pass": worst <= tol.conservation,
    }
    if args.crosscheck_m1:
        if point.m != 1:
            raise ConfigError("--crosscheck-m1 needs m = 1")
        rng = np.random.default_rng([cfg.seed, 1])
        qp = sample_qmodel(rng, 1, min(point.n, 3), real=True)
        g0 = complex(coupling.g[0])
        check = crosscheck_m1(qp, g0, steps=2000)
        check["pass"] = check["max_residual"] <= tol.crosscheck
        check["g0"] = cnum(g0)
        check["rows"] = [{"t": r["t"], "residual": r["residual"]} for r in check["rows"]]
        doc["crosscheck_m1"] = check
        doc["pass"] = doc["pass"] and check["pass"]
    if args.format == "csv":
        n = point.n
        head = ["t_re", "t_im"] + [f"phi{j}_{p}" for j in range(n) for p in ("re", "im")] + [f"H{K}_{p}" for K in range(1, n + 1) for p in ("re", "im")]
        lines = [",".join(head)]
        for r in rows:
            vals = r["t"] + [x for pair in r["phi"] for x in pair] + [x for pair in r["H"] for x in pair]
            lines.append(",".join(repr(v) for v in vals))
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _dump(doc))
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_curve(args) -> int:
    cfg = case_config(args, default_cases=1)
    tol = tolerances(args)
    coupling, point, framing = _load_input(args.input) if args.input else _draw(cfg)
    curve = curve_polys(point, coupling, framing, args.delta, tol)
    gamma = conjugates(point, coupling, framing, args.delta)
    zs = default_sample_points(point, args.samples)
    samples, skipped = quotient_samples(curve, zs)
    if skipped:
        print(f"warning: skipped {skipped} sample point(s) at poles", file=sys.stderr)
    inc = incidence_check(curve, point, gamma)
    curve_res, surf_res = quotient_residuals(curve, samples)
    curve_res /= max(1.0, curve.p.scale(), curve.q.scale())
    ok = inc <= tol.incidence and curve_res <= tol.quotient and surf_res <= tol.quotient_identity and curve.two_route_residual <= tol.divisibility
    if args.format == "csv":
        _emit(args, samples_csv(samples))
    else:
        doc = {
            "meta": _meta(args, cfg, tol),
            "curve": to_obj(curve),
            "report": {
                "incidence": inc,
                "quotient_curve": curve_res,
                "quotient_surface": surf_res,
                "two_route": curve.two_route_residual,
                "divisibility": curve.divisibility_residual,
                "skipped_poles": skipped,
                "pass": ok,
            },
            "samples": [{"z": cnum(s.z), "a": cnum(s.a), "b": cnum(s.b), "c": cnum(s.c)} for s in samples],
        }
        _emit(args, _dump(doc))
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"gen": cmd_gen, "verify": cmd_verify, "evolve": cmd_evolve, "curve": cmd_curve}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CyclicCMError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
