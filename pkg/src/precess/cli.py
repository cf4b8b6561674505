"""Command-line front end: ``precess {bound,score,probspace,verify,witness,repro}``.

JSON goes to stdout, CSV to files, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import observables as ob
from . import probspace as ps
from . import protocol as pr
from . import repro, spectral


class CliError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _family_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--family", choices=["four_level", "spin", "clock", "raw"], required=required)
    p.add_argument("--x-plus", type=float)
    p.add_argument("--x-minus", type=float)
    p.add_argument("--j", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--file", help="JSON family description (required for --family raw)")


def _tolerance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zero-tol", type=float, default=spectral.DEFAULT_ZERO_TOL)
    p.add_argument("--score-tol", type=float, default=pr.SCORE_TOL)


def family_from_args(args) -> ob.FamilySpec:
    try:
        if args.family == "four_level":
            if args.x_plus is None or args.x_minus is None:
                raise CliError("four_level needs --x-plus and --x-minus", 2)
            return ob.FourLevel(args.x_plus, args.x_minus)
        if args.family == "spin":
            if args.j is None:
                raise CliError("spin needs --j", 2)
            return ob.Spin(args.j)
        if args.family == "clock":
            if args.N is None:
                raise CliError("clock needs --N", 2)
            return ob.Clock(args.N, args.l, args.x_plus, args.x_minus)
        if args.family == "raw":
            if not args.file:
                raise CliError("raw needs --file", 2)
            obj = json.loads(Path(args.file).read_text())
            obj.setdefault("family", "raw")
            return ob.family_from_json(obj)
    except ValueError as exc:
        raise CliError(str(exc), 2) from exc
    raise CliError(f"unknown family {args.family!r}", 2)


def _check_tols(args) -> None:
    for name in ("zero_tol", "score_tol", "tol"):
        v = getattr(args, name, None)
        if v is not None and v <= 0:
            raise CliError(f"--{name.replace('_', '-')} must be positive", 2)


def cmd_bound(args) -> int:
    if args.family:
        pair = ob.build_pair(family_from_args(args))
        spec = pr.spectrum(pair, args.zero_tol)
        xp, xm, zero = spec.x_plus, spec.x_minus, spec.has_zero
    else:
        if args.x_plus is None and args.x_minus is None:
            raise CliError("give --family or at least one of --x-plus/--x-minus", 2)
        for v in (args.x_plus, args.x_minus):
            if v is not None and v <= 0:
                raise CliError("--x-plus and --x-minus are magnitudes and must be positive", 2)
        xp, xm, zero = args.x_plus, args.x_minus, args.has_zero
    try:
        g = pr.bound_from_extremes(xp, xm, zero)
    except ValueError as exc:
        raise CliError(str(exc), 1) from exc
    _emit({"x_plus": xp, "x_minus": xm, "has_zero": zero, "general_bound": g,
           "classical_bound": pr.CLASSICAL_BOUND})
    return 0


def _load_state(path: str) -> np.ndarray:
    obj = json.loads(Path(path).read_text())
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    return re + 1j * im


def choose_state(pair: ob.PrecessingPair, kind: str, seed: int, state_file: str | None):
    if kind == "optimal":
        try:
            return ob.optimal_state(pair)
        except ValueError:
            return pr.max_p3(pair)[1]
    if kind == "mixed":
        return np.eye(pair.dim, dtype=complex) / pair.dim
    if kind == "random":
        return spectral.random_state(pair.dim, np.random.default_rng(seed))
    if kind == "file":
        if not state_file:
            raise CliError("--state file needs --state-file", 2)
        return _load_state(state_file)
    raise CliError(f"unknown state {kind!r}", 2)


def cmd_score(args) -> int:
    pair = ob.build_pair(family_from_args(args))
    state = choose_state(pair, args.state, args.seed, args.state_file)
    try:
        report = pr.p3_score(pair, state, args.zero_tol, args.score_tol)
    except ValueError as exc:
        raise CliError(str(exc), 1) from exc
    _emit(report.to_dict())
    return 0


def cmd_probspace(args) -> int:
    if args.directions < 1:
        raise CliError("--directions must be at least 1", 2)
    pair = ob.build_pair(family_from_args(args))
    oracle = ps.SupportOracle(pair, args.zero_tol)
    results = ps.sample_surface(pair, args.directions, seed=args.seed, tol=args.tol,
                                threads=args.threads, oracle=oracle)
    ps.write_surface_csv(results, args.out)
    good = [r for r in results if r.error is None]
    failed = len(results) - len(good)
    unconverged = sum(not r.converged for r in good)
    p3 = [r.p3 for r in good]
    gaps = [r.gap for r in good]
    _emit({
        "family": ob.family_to_json(pair.family) if not isinstance(pair.family, ob.Raw) else {"family": "raw"},
        "n_directions": len(results),
        "out": str(args.out),
        "max_p3": max(p3) if p3 else None,
        "min_p3": min(p3) if p3 else None,
        "max_gap": max(gaps) if gaps else None,
        "mean_gap": float(np.mean(gaps)) if gaps else None,
        "n_failed": failed,
        "n_unconverged": unconverged,
        "center_reanchored": oracle.center_reanchored,
        "tol": args.tol,
    })
    for r in results:
        if r.error:
            print(f"direction {r.direction.tolist()}: {r.error}", file=sys.stderr)
    return 0 if failed == 0 and unconverged == 0 else 3


def _reference_state(pair: ob.PrecessingPair) -> np.ndarray:
    try:
        return ob.optimal_state(pair)
    except ValueError:
        return pr.max_p3(pair)[1]


def cmd_verify(args) -> int:
    spec = family_from_args(args)
    pair = ob.build_pair(spec, check=False)
    checks = []

    rep = ob.verify_precession(pair, args.precession_tol)
    checks.append({"name": "precession", "pass": rep.passed, **rep.to_dict()})

    rng = np.random.default_rng(args.seed)
    states = [spectral.random_state(pair.dim, rng) for _ in range(args.states)]
    m = pr.check_mean_sum_zero(pair, states)
    thr = args.precession_tol * max(spectral.op_norm(pair.probes()[0]), 1e-300)
    checks.append({"name": "mean_sum_zero", "pass": m <= thr, "max_abs_sum": m, "threshold": thr})

    try:
        pr.spectrum(pair, args.zero_tol)
        checks.append({"name": "spectrum_time_independent", "pass": True})
    except ob.PrecessionError as exc:
        checks.append({"name": "spectrum_time_independent", "pass": False, "detail": str(exc)})

    embeds = {"all": ("real", "grassmann"), "none": ()}.get(args.embed, (args.embed,))
    if embeds:
        psi = _reference_state(pair)
        base = pr.probabilities(pair, psi, args.zero_tol).mean()
        for kind in embeds:
            if kind == "real":
                enc, rho = pr.embed_real(pair), pr.encode_state_real(psi)
            else:
                enc, rho = pr.embed_grassmann(pair, args.grassmann_n), pr.encode_state_grassmann(psi, args.grassmann_n)
            p = pr.probabilities(enc, rho, args.zero_tol).mean()
            ok = abs(p - base) <= args.score_tol and ob.verify_precession(enc, args.precession_tol).passed
            checks.append({"name": f"embed_{kind}", "pass": bool(ok), "p3": float(p), "p3_original": float(base)})

    for c in checks:
        c["pass"] = bool(c["pass"])
    passed = all(c["pass"] for c in checks)
    _emit({"label": pair.label, "checks": checks, "pass": passed})
    return 0 if passed else 1


def cmd_witness(args) -> int:
    pair = ob.build_pair(family_from_args(args))
    try:
        rep = pr.dimension_witness(pair, args.zero_tol)
    except ValueError as exc:
        raise CliError(str(exc), 1) from exc
    out = rep.to_dict()
    out["max"] = rep.p3_range[1]
    _emit(out)
    return 0


def cmd_repro(args) -> int:
    outcomes = repro.run_all(set(args.only) if args.only else None)
    if args.json:
        _emit([{"key": o.key, "title": o.title, "pass": o.passed, "detail": o.detail,
                "elapsed": o.elapsed, "budget": o.budget} for o in outcomes])
    else:
        for o in outcomes:
            print(o.line)
        print(f"{sum(o.passed for o in outcomes)}/{len(outcomes)} criteria passed")
    return 0 if all(o.passed for o in outcomes) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="precess", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="theory-independent score bound")
    _family_args(p, required=False)
    p.add_argument("--has-zero", action="store_true", help="zero is a possible outcome (with --x-plus/--x-minus)")
    _tolerance_args(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("score", help="score a state")
    _family_args(p)
    p.add_argument("--state", default="optimal", choices=["optimal", "mixed", "random", "file"])
    p.add_argument("--state-file")
    p.add_argument("--seed", type=int, default=0)
    _tolerance_args(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("probspace", help="sample the quantum probability space to CSV")
    _family_args(p)
    p.add_argument("--directions", type=int, default=500)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=ps.DEFAULT_RAY_TOL, help="ray bracket tolerance")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $PRECESS_THREADS or CPU count)")
    _tolerance_args(p)
    p.set_defaults(func=cmd_probspace)

    p = sub.add_parser("verify", help="precession, mean-sum, spectrum and embedding checks")
    _family_args(p)
    p.add_argument("--embed", default="all", choices=["all", "real", "grassmann", "none"])
    p.add_argument("--grassmann-n", type=int, default=2)
    p.add_argument("--states", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precession-tol", type=float, default=ob.PRECESSION_TOL)
    _tolerance_args(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("witness", help="energy-level count and score range")
    _family_args(p)
    _tolerance_args(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("repro", help="run the reproduction checks and print a pass/fail table")
    p.add_argument("--only", nargs="*", help="criterion keys to run")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_tols(args)
        return args.func(args)
    except CliError as exc:
        print(f"precess {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, RuntimeError) as exc:
        print(f"precess {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
