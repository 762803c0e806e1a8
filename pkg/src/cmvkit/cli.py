"""Command-line front end.

Exit status: 0 on success, 1 for invalid input, 2 when a numerical check
breaches its tolerance.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import cmv, gz, opuc, weyl
from .coefficients import (
    BUILTINS,
    CoefficientSchedule,
    MeasureSpec,
    builtin_schedule,
    moments,
    verblunsky_from_measure,
)
from .tolerances import ToleranceBreach, ladder, tolerance


def load_schema(name: str) -> dict:
    text = resources.files("cmvkit").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _read_json(path: str, schema: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    jsonschema.validate(data, load_schema(schema))
    return data


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"expected RE,IM, got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def parse_phase(text: str) -> complex:
    """``0.25pi`` -> e^{iπ/4}; a bare number is an angle in radians."""
    text = text.strip()
    if text.endswith("pi"):
        return cmath.exp(1j * math.pi * float(text[:-2] or 1.0))
    return cmath.exp(1j * float(text))


def parse_window(text: str) -> tuple[int, int]:
    lo, hi = (int(v) for v in text.split(","))
    return lo, hi


# input resolution

def resolve_schedule(args) -> CoefficientSchedule:
    zeta = parse_phase(args.zeta_const) if args.zeta_const else None
    if args.schedule:
        sched = CoefficientSchedule.from_json(_read_json(args.schedule, "schedule"))
        return sched if zeta is None else sched.with_zeta(zeta)
    if args.measure:
        if args.n is None:
            raise ValueError("--measure needs --n to fix the number of coefficients")
        return builtin_schedule(args.measure, args.n, 1.0 if zeta is None else zeta)
    if args.random:
        lo, hi = parse_window(args.random)
        sched = CoefficientSchedule.random(np.random.default_rng(args.seed), lo, hi)
        return sched if zeta is None else sched.with_zeta(zeta)
    raise ValueError("give one of --schedule, --measure or --random")


def resolve_measure(args) -> MeasureSpec:
    if args.measure:
        return MeasureSpec.builtin(args.measure)
    if args.density:
        data = _read_json(args.density, "density")
        return MeasureSpec.density_grid(data["theta"], data["density"], data.get("point_masses", ()))
    if args.schedule:
        sched = CoefficientSchedule.from_json(_read_json(args.schedule, "schedule"))
        return MeasureSpec.coefficient_defined(sched)
    raise ValueError("give one of --measure, --density or --schedule")


# output helpers

def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _dump_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _pair(c: complex) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def _report(identity: str, residuals: dict, tol: float, **extra) -> dict:
    passed = all(v < tol for v in residuals.values())
    out = {"identity": identity, "residuals": residuals, "tolerance": tol, "passed": passed}
    out.update(extra)
    return out


def _checked(report: dict) -> dict:
    if not report["passed"]:
        worst = max(report["residuals"].values())
        raise ToleranceBreach(report["identity"], worst, report["tolerance"])
    return report


# subcommands

def cmd_opuc(args) -> str:
    sched = resolve_schedule(args)
    count = len(sched) if args.count is None else args.count
    seq = opuc.opuc_sequence(sched, count, args.variant)
    if args.format == "json":
        return _dump_json([
            {"n": pair.n, "p": pair.p.to_json(pair.n), "p_star": pair.p_star.to_json(pair.n)}
            for pair in seq
        ])
    header = ["n", "component"] + [f"{part}_{j}" for j in range(count + 1) for part in ("re", "im")]
    rows = []
    for pair in seq:
        for name, poly in (("p", pair.p), ("p_star", pair.p_star)):
            coeffs = poly.padded(count + 1)
            rows.append([pair.n, name] + [x for c in coeffs for x in (c.real, c.imag)])
    return _dump_csv(header, rows)


def cmd_measure_moments(args) -> str:
    mom = moments(resolve_measure(args), args.max_order, args.nodes)
    centre = args.max_order
    return _dump_json({"moments": [[k] + _pair(mom[centre + k]) for k in range(-centre, centre + 1)]})


def cmd_measure_verblunsky(args) -> str:
    alpha = verblunsky_from_measure(resolve_measure(args), args.count, args.nodes)
    sched = CoefficientSchedule(0, alpha, np.ones(alpha.size))
    return _dump_json(sched.to_json())


def _window(args):
    return parse_window(args.window) if args.window else None


def cmd_cmv_build(args) -> str:
    sched = resolve_schedule(args)
    mat = cmv.build_cmv(sched, _window(args), args.variant, bool(args.rotated), args.boundary, args.closure)
    return _dump_json(mat.to_json())


def cmd_cmv_factorize(args) -> str:
    sched = resolve_schedule(args)
    rotated = True if args.rotated is None else args.rotated
    res = cmv.factorization_residual(sched, _window(args), rotated, args.boundary)
    return _dump_json(_checked(_report("LM factorization", res, tolerance("algebraic"))))


def cmd_cmv_conjugate(args) -> str:
    sched = resolve_schedule(args)
    res = cmv.conjugation_residuals(sched, _window(args), args.boundary)
    return _dump_json(_checked(_report("phase conjugation", res, tolerance("algebraic") * 10)))


def cmd_cmv_split(args) -> str:
    sched = resolve_schedule(args)
    rotated = True if args.rotated is None else args.rotated
    left, right = cmv.split_at(sched, args.k, _window(args), rotated, args.boundary)
    return _dump_json({"left": left.to_json(), "right": right.to_json()})


def cmd_cmv_evolve(args) -> str:
    sched = resolve_schedule(args)
    rotated = True if args.rotated is None else args.rotated
    op = cmv.walk_operator(sched, _window(args), rotated, args.boundary)
    start = args.start
    if start is None:
        start = 0 if op.lo <= 0 <= op.hi else op.lo
    if not op.lo <= start <= op.hi:
        raise ValueError(f"start site {start} outside window [{op.lo}, {op.hi}]")
    v = np.zeros(op.size, dtype=complex)
    v[start - op.lo] = 1.0
    probs = cmv.evolve(op, v, args.steps, tol=tolerance("quadrature"))
    rows = [
        [t, int(k), float(p)]
        for t in range(probs.shape[0])
        for k, p in zip(op.indices, probs[t])
    ]
    return _dump_csv(["step", "index", "probability"], rows)


def _gz_rows(states, family=None):
    rows = []
    for s in states:
        row = [s.n, s.f.real, s.f.imag, s.g.real, s.g.imag]
        rows.append(([family] if family else []) + row)
    return rows


GZ_HEADER = ["n", "re_f", "im_f", "re_g", "im_g"]


def cmd_gz_propagate(args) -> str:
    sched = resolve_schedule(args)
    z = parse_complex(args.z)
    seed = gz.half_lattice_seeds(args.k, args.family, z)
    states = gz.propagate(sched, seed, args.stop, z)
    return _dump_csv(GZ_HEADER, _gz_rows(states))


def cmd_gz_table(args) -> str:
    sched = resolve_schedule(args)
    z = parse_complex(args.z)
    table = gz.neighbor_table(sched, args.k, z)
    rows = []
    for family in gz.FAMILIES:
        left, right = table[family]
        rows += _gz_rows([left, right], family)
    return _dump_csv(["family"] + GZ_HEADER, rows)


def cmd_gz_verify(args) -> str:
    sched = resolve_schedule(args)
    z = parse_complex(args.z)
    lo, hi = args.k + 1, args.stop - 1
    if hi < lo:
        raise ValueError("--stop must exceed --k by at least 2")
    states = gz.propagate(sched, gz.half_lattice_seeds(args.k, args.family, z), args.stop, z)
    f = np.array([s.f for s in states])
    g = np.array([s.g for s in states])
    if args.perturb:
        idx, eps = args.perturb.split(":")
        f[int(idx) - args.k] += float(eps)
    rep = gz.verify_equivalence(sched, f, g, z, (lo, hi))
    report = _report(
        "transfer equivalence",
        {"block": rep.block_residual, "transfer": rep.transfer_residual},
        rep.tol,
        window=list(rep.window),
        consistent=rep.consistent,
    )
    return _dump_json(_checked(report))


def cmd_weyl_classify(args) -> str:
    z = parse_complex(args.z)
    if args.schedule or args.random:
        sched = resolve_schedule(args)
        count = len(sched) if args.n is None else args.n
    else:
        count = 256 if args.n is None else args.n
        if not args.measure:
            raise ValueError("give one of --schedule, --measure or --random")
        sched = builtin_schedule(args.measure, count)
    if args.r is None:
        r = weyl.caratheodory_from_schedule(sched, z)
    else:
        r = parse_complex(args.r)
    sample = weyl.weyl_residual(sched, z, r, count)
    return _dump_json(sample.to_json())


def cmd_weyl_caratheodory(args) -> str:
    z = parse_complex(args.z)
    F = weyl.caratheodory(resolve_measure(args), z, args.nodes)
    return _dump_json({"z": _pair(z), "F": _pair(F)})


# parser

def _add_source(p, measure_names=True) -> None:
    src = p.add_argument_group("coefficient source")
    src.add_argument("--schedule", metavar="FILE", help="JSON schedule file")
    if measure_names:
        src.add_argument("--measure", choices=BUILTINS, help="builtin measure")
    src.add_argument("--random", metavar="LO,HI", help="random schedule on the window LO..HI (uses --seed)")
    src.add_argument("--seed", type=int, default=0, help="seed for --random")
    src.add_argument("--n", type=int, help="number of coefficients for --measure")
    src.add_argument("--zeta-const", metavar="Xpi", help="constant phase, e.g. 0.25pi")


def _add_cmv_common(p, rotated_default_note: str, boundary: str) -> None:
    _add_source(p)
    p.add_argument("--window", metavar="LO,HI")
    p.add_argument("--rotated", action=argparse.BooleanOptionalAction, default=None,
                   help=f"use the rotated coefficients ({rotated_default_note})")
    p.add_argument("--boundary", choices=cmv.BOUNDARIES, default=boundary)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmvkit", description=__doc__.splitlines()[0])
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("opuc", parents=[out], help="orthonormal polynomial sequences")
    _add_source(p)
    p.add_argument("--count", type=int, help="highest degree (default: schedule length)")
    p.add_argument("--variant", choices=opuc.VARIANTS, default="standard")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_opuc)

    meas = sub.add_parser("measure", help="moments and coefficient extraction").add_subparsers(
        dest="action", required=True
    )
    for name, func in (("moments", cmd_measure_moments), ("verblunsky", cmd_measure_verblunsky)):
        p = meas.add_parser(name, parents=[out])
        p.add_argument("--measure", choices=BUILTINS)
        p.add_argument("--density", metavar="FILE", help="JSON sampled density")
        p.add_argument("--schedule", metavar="FILE", help="measure defined by its coefficients")
        p.add_argument("--nodes", type=int)
        if name == "moments":
            p.add_argument("--max-order", type=int, required=True)
        else:
            p.add_argument("--count", type=int, required=True)
        p.set_defaults(func=func)

    c = sub.add_parser("cmv", help="CMV matrices").add_subparsers(dest="action", required=True)
    p = c.add_parser("build", parents=[out])
    _add_cmv_common(p, "default off", "principal_truncation")
    p.add_argument("--variant", choices=cmv.SHAPES, default="standard")
    p.add_argument("--closure", type=parse_complex, default=-1.0)
    p.set_defaults(func=cmd_cmv_build)
    p = c.add_parser("factorize", parents=[out])
    _add_cmv_common(p, "default on", "principal_truncation")
    p.set_defaults(func=cmd_cmv_factorize)
    p = c.add_parser("conjugate", parents=[out])
    _add_cmv_common(p, "always compares both", "principal_truncation")
    p.set_defaults(func=cmd_cmv_conjugate)
    p = c.add_parser("split", parents=[out])
    _add_cmv_common(p, "default on", "half_lattice_closed")
    p.add_argument("--k", type=int, required=True, help="index with |alpha_K| = 1")
    p.set_defaults(func=cmd_cmv_split)
    p = c.add_parser("evolve", parents=[out])
    _add_cmv_common(p, "default on", "periodic_closed")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--start", type=int, help="initial site (default 0, else the window start)")
    p.set_defaults(func=cmd_cmv_evolve)

    g = sub.add_parser("gz", help="transfer-matrix propagation").add_subparsers(dest="action", required=True)
    for name, func in (("propagate", cmd_gz_propagate), ("table", cmd_gz_table), ("verify", cmd_gz_verify)):
        p = g.add_parser(name, parents=[out])
        _add_source(p)
        p.add_argument("--z", required=True, metavar="RE,IM")
        p.add_argument("--k", type=int, required=True, help="seed index")
        if name != "table":
            p.add_argument("--family", choices=gz.FAMILIES, default="f+")
            p.add_argument("--stop", type=int, required=True, help="last index")
        if name == "verify":
            p.add_argument("--perturb", metavar="N:EPS", help="add EPS to f_N before checking")
        p.set_defaults(func=func)

    w = sub.add_parser("weyl", help="Weyl solutions").add_subparsers(dest="action", required=True)
    p = w.add_parser("classify", parents=[out])
    _add_source(p)
    p.add_argument("--z", required=True, metavar="RE,IM")
    p.add_argument("--r", metavar="RE,IM", help="mixing coefficient (default F(z))")
    p.set_defaults(func=cmd_weyl_classify)
    p = w.add_parser("caratheodory", parents=[out])
    p.add_argument("--measure", choices=BUILTINS)
    p.add_argument("--density", metavar="FILE")
    p.add_argument("--schedule", metavar="FILE")
    p.add_argument("--z", required=True, metavar="RE,IM")
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_weyl_caratheodory)
    return parser


SOURCES = ("schedule", "measure", "density", "random")


@dataclass(frozen=True)
class RunConfig:
    """One parsed invocation: command, input source, parameters and tolerances."""

    command: str
    source: str | None
    args: argparse.Namespace = field(repr=False)
    tolerances: dict = field(default_factory=ladder)

    @classmethod
    def from_argv(cls, argv=None) -> "RunConfig":
        args = build_parser().parse_args(argv)
        given = [name for name in SOURCES if getattr(args, name, None)]
        if len(given) > 1:
            raise ValueError(f"give exactly one input source, got {', '.join('--' + g for g in given)}")
        command = " ".join(filter(None, (args.command, getattr(args, "action", None))))
        return cls(command, given[0] if given else None, args, ladder())

    @property
    def out(self) -> str | None:
        return self.args.out


def render(config: RunConfig) -> str:
    """Text the command would write."""
    return config.args.func(config.args)


def run(config: RunConfig) -> int:
    """Execute ``config``; returns the exit status."""
    try:
        text = render(config)
    except ToleranceBreach as exc:
        print(f"cmvkit: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, KeyError, OSError, jsonschema.ValidationError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else exc
        print(f"cmvkit: {msg}", file=sys.stderr)
        return 1
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        config = RunConfig.from_argv(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    except ValueError as exc:
        print(f"cmvkit: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
