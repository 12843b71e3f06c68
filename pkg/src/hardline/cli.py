"""Command-line front end: scattering, trajectory export, verification runs.

Exit codes: 0 success, 1 usage or configuration error, 2 domain error in the
supplied data, 3 a verification run detected a violation (which, for checks
that are supposed to detect one, is the successful outcome).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import battery as battery_mod
from .errors import ConfigError, DomainViolationError, HardlineError, InvalidInputError
from .flow import trajectory, write_trajectory_csv
from .geometry import PhasePoint, cone_membership
from .identities import run_suite, sigma_star_certificate
from .measure import ChartRegion, MeasureSpec
from .scattering import (
    BUILTIN_NAMES,
    LinearScatteringMap,
    builtin_map,
    load_linear_map,
    sample_pre_cone,
    conservation_summary,
    pde_residual,
)

USAGE_EXIT, DOMAIN_EXIT, VIOLATION_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors exit with code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(part) for part in text.split(",")]
    except ValueError as err:
        raise ConfigError(f"cannot parse vector {text!r}") from err
    return np.asarray(vals)


def _parse_fraction_vector(text: str) -> list[Fraction]:
    return [Fraction(part) for part in text.split(",")]


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as err:
        raise ConfigError(f"cannot parse dims {text!r}") from err


def _resolve_map(spec: str, dim: int):
    """Map selector: builtin name, or a JSON matrix file (with optional @)."""
    name = spec.lstrip("@")
    if name.replace("_", "-").lower() in BUILTIN_NAMES:
        return builtin_map(name, dim)
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"map {spec!r} is neither a builtin {BUILTIN_NAMES} "
                          "nor an existing matrix file")
    return load_linear_map(path)


def _load_structured(path: Path) -> dict:
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return json.load(fh)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib as toml
        except ModuleNotFoundError:
            import tomli as toml
        with open(path, "rb") as fh:
            return toml.load(fh)
    raise ConfigError(f"config {path} must be .json or .toml")


def _fmt_number(frac: Fraction) -> str:
    if frac.denominator == 1:
        return str(frac.numerator)
    return repr(float(frac))


def _emit_report(payload: dict, out: str | None) -> None:
    """Reports carry the deterministic body under "report"; the timestamp is
    isolated under "meta" so byte comparisons can exclude it."""
    doc = {
        "report": payload,
        "meta": {"created": datetime.now(timezone.utc).isoformat()},
    }
    text = json.dumps(doc, indent=1, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _default_workers() -> int:
    env = os.environ.get("HARDLINE_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError as err:
        raise ConfigError("HARDLINE_THREADS must be an integer") from err


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_scatter(args) -> int:
    v = _parse_vector(args.v)
    map_ = _resolve_map(args.map, v.size)
    if not cone_membership(v, "pre"):
        sys.stderr.write("error: velocity is not pre-collisional\n")
        return DOMAIN_EXIT
    if isinstance(map_, LinearScatteringMap) and map_.exact is not None:
        # exact rational path: parse the input verbatim and apply the exact matrix
        vf = _parse_fraction_vector(args.v)
        image = [sum(row[j] * vf[j] for j in range(len(vf))) for row in map_.exact]
        print(",".join(_fmt_number(val) for val in image))
        p_in, e_in = sum(vf), sum(q * q for q in vf)
        p_out, e_out = sum(image), sum(q * q for q in image)
        out_post = cone_membership(np.array([float(q) for q in image]), "post")
        print(f"momentum: {_fmt_number(p_in)} -> {_fmt_number(p_out)}")
        print(f"energy:   {_fmt_number(e_in)} -> {_fmt_number(e_out)}")
        print(f"cones:    input pre-collisional: True, "
              f"output post-collisional: {out_post}")
        return 0
    summary = conservation_summary(map_, v)
    print(",".join(repr(float(x)) for x in summary["output"]))
    print(f"momentum: {summary['momentum_before']:.17g} -> "
          f"{summary['momentum_after']:.17g}")
    print(f"energy:   {summary['energy_before']:.17g} -> "
          f"{summary['energy_after']:.17g}")
    print(f"cones:    input pre-collisional: {summary['input_precollisional']}, "
          f"output post-collisional: {summary['output_postcollisional']}")
    return 0


def cmd_simulate(args) -> int:
    x = _parse_vector(args.x)
    v = _parse_vector(args.v)
    times = _parse_vector(args.times)
    map_ = _resolve_map(args.map, x.size)
    sample = trajectory(map_, PhasePoint(x, v), times)
    if args.out:
        with open(args.out, "w") as fh:
            write_trajectory_csv(sample, fh)
    else:
        write_trajectory_csv(sample, sys.stdout)
    return 0


def _verify_identities(args) -> int:
    card = run_suite(n_per_identity=args.n, dims=_parse_dims(args.dims),
                     seed=args.seed)
    _emit_report(card.to_dict(), args.out)
    return 0 if card.all_pass else VIOLATION_EXIT


def _verify_pde(args) -> int:
    dims = _parse_dims(args.dims)
    entries = []
    solved = True
    for dim in dims:
        map_ = _resolve_map(args.map, dim)
        if getattr(map_, "n", dim) != dim:
            if len(dims) > 1:
                raise ConfigError("matrix maps fix the dimension; pass a "
                                  "single matching --dims entry")
            raise ConfigError(f"matrix is {map_.n}x{map_.n}, got --dims {dim}")
        samples = sample_pre_cone(args.n, dim, np.random.default_rng(args.seed))
        rep = pde_residual(map_, samples, sign_threshold=args.threshold)
        entries.append({"dim": dim, **rep.to_dict()})
        solved &= rep.chosen_sign is not None
    _emit_report({"map": args.map, "n": args.n, "seed": args.seed,
                  "threshold": args.threshold, "entries": entries}, args.out)
    return 0 if solved else VIOLATION_EXIT


def _verify_invariance(args) -> int:
    measure = {"liouville": MeasureSpec.liouville(),
               "hausdorff": MeasureSpec.hausdorff()}.get(args.measure)
    if measure is None:
        raise ConfigError(f"unknown measure {args.measure!r}")
    workers = args.workers if args.workers else _default_workers()
    dim = 3
    map_ = _resolve_map(args.map, dim)
    if args.config:
        spec = battery_mod.battery_from_config(
            _load_structured(Path(args.config)),
            region_override=_region_from_file(args.region),
        )
    else:
        if args.t is None:
            raise ConfigError("--t is required without --config")
        if args.region:
            raise ConfigError("--region applies to --config batteries only")
        spec = battery_mod.battery(args.t)
    t = args.t if args.t is not None else spec.t
    reports = battery_mod.run_battery(
        measure, map_, t, spec, n_samples=args.n, seed=args.seed,
        workers=workers,
    )
    payload = {
        "measure": args.measure,
        "map": args.map,
        "n": args.n,
        "seed": args.seed,
        "t": t,
        "per_phi": [r.to_dict() for r in reports],
        "verdict": battery_mod.overall_verdict(reports),
    }
    _emit_report(payload, args.out)
    return 0 if payload["verdict"] == "invariant" else VIOLATION_EXIT


def _region_from_file(path: str | None):
    if not path:
        return None
    return ChartRegion.from_dict(_load_structured(Path(path)))


def _verify_certificate(args) -> int:
    cert = sigma_star_certificate(dims=_parse_dims(args.dims))
    _emit_report(cert.to_dict(), args.out)
    return 0 if cert.all_pass else VIOLATION_EXIT


def cmd_verify(args) -> int:
    handler = {
        "identities": _verify_identities,
        "pde": _verify_pde,
        "invariance": _verify_invariance,
        "certificate": _verify_certificate,
    }[args.kind]
    return handler(args)


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="hardline",
                     description="Hard-rod billiards with simultaneous "
                                 "collisions: scattering, flows, verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scatter = sub.add_parser("scatter", help="apply a scattering map")
    p_scatter.add_argument("--map", default="sigma-star",
                           help=f"builtin {BUILTIN_NAMES} or matrix JSON path")
    p_scatter.add_argument("--v", required=True,
                           help="comma-separated pre-collisional velocities")
    p_scatter.set_defaults(func=cmd_scatter)

    p_sim = sub.add_parser("simulate", help="export a trajectory as CSV")
    p_sim.add_argument("--map", default="sigma-star")
    p_sim.add_argument("--x", required=True, help="comma-separated positions")
    p_sim.add_argument("--v", required=True, help="comma-separated velocities")
    p_sim.add_argument("--times", "--t", dest="times", required=True,
                       help="comma-separated sorted sample times")
    p_sim.add_argument("--out", help="CSV path (default: stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("kind",
                          choices=["identities", "pde", "invariance",
                                   "certificate"])
    p_verify.add_argument("--map", default="sigma-star")
    p_verify.add_argument("--measure", default="liouville")
    p_verify.add_argument("--t", type=float, default=None)
    p_verify.add_argument("--n", type=int, default=None)
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--workers", type=int, default=None)
    p_verify.add_argument("--dims", default="3,4,5")
    p_verify.add_argument("--threshold", type=float, default=1e-4,
                          help="residual threshold for the pde check")
    p_verify.add_argument("--region", help="region config file (json/toml)")
    p_verify.add_argument("--config", help="battery config file (json/toml)")
    p_verify.add_argument("--out", help="report JSON path (default: stdout)")
    p_verify.set_defaults(func=cmd_verify)
    return parser


_DEFAULT_N = {"identities": 1000, "pde": 10000, "invariance": 1000000,
              "certificate": 0}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "verify" and args.n is None:
        args.n = _DEFAULT_N[args.kind]
    try:
        return args.func(args)
    except ConfigError as err:
        sys.stderr.write(f"error: {err}\n")
        return USAGE_EXIT
    except (DomainViolationError, InvalidInputError) as err:
        sys.stderr.write(f"error: {err}\n")
        return DOMAIN_EXIT
    except HardlineError as err:
        sys.stderr.write(f"error: {err}\n")
        return DOMAIN_EXIT


if __name__ == "__main__":
    sys.exit(main())
