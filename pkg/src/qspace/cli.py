"""Command-line front end.

Exit codes: 0 success, 1 I/O or missing input, 2 validation or parse failure,
3 numerical failure (divergence, pole).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .dynamics import VectorField, bracket_apply, classicalize, validate_field
from .errors import (
    DimensionMismatch,
    MissingField,
    NotAHomomorphism,
    NotAnEquilibrium,
    NotInvertible,
    NumericalError,
    ParseError,
    PoleAtZero,
)
from .qparse import SystemDef, format_real_poly, generator_name, parse_expr, parse_q_value, parse_system, print_canonical
from .simulate import IntegratorConfig, integrate, quantum_limit_sweep, search_equilibria
from .stability import StabilityQuery, classify_equilibrium, probe_stability

DEFAULT_SEED = 20240101

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CLIError(f"expected comma-separated numbers, got {text!r}", EXIT_INVALID) from None


def load_system(path: str) -> SystemDef:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"cannot read system file {path!r}: {exc.strerror or exc}", EXIT_IO) from None
    return parse_system(text)


def resolve_q(args, system: SystemDef | None) -> float:
    if args.q is not None:
        value = parse_q_value(args.q)
        if value is not None:
            return value
    if system is not None and system.q_value is not None:
        return system.q_value
    return 1.0


def resolve_point(args, system: SystemDef) -> list[float]:
    if args.point is not None:
        point = _floats(args.point)
    elif system.initial_point is not None:
        point = list(system.initial_point)
    else:
        raise MissingField("no initial point: add 'point = ...' to the system file or pass --point")
    if len(point) != system.dim:
        raise CLIError(f"point needs {system.dim} coordinates", EXIT_INVALID)
    return point


def emit(args, text: str) -> None:
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CLIError(f"cannot write {args.out!r}: {exc.strerror or exc}", EXIT_IO) from None
    else:
        sys.stdout.write(text)


def write_manifest(args, config: dict) -> None:
    target = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if not target:
        return
    manifest = {
        "command": args.command,
        "input": getattr(args, "system", None),
        "config": config,
        "version": __version__,
        "seed": args.seed,
    }
    Path(target).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _config(args) -> dict:
    skip = {"func", "manifest"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# subcommands


def cmd_normalize(args) -> None:
    if args.dim is None:
        raise CLIError("normalize needs --dim", EXIT_INVALID)
    f = parse_expr(args.expr, args.dim)
    q_value = parse_q_value(args.q) if args.q is not None else None
    if q_value is None:
        text = print_canonical(f)
    else:
        text = format_real_poly(classicalize(f, q_value))
    if args.format == "json":
        emit(args, json.dumps({"expr": args.expr, "dim": args.dim, "result": text}) + "\n")
    else:
        emit(args, text + "\n")


def cmd_validate(args) -> None:
    system = load_system(args.system)
    report = validate_field(VectorField(system.field_images))

    def names(i: int) -> str:
        return generator_name(i, system.dim, aliases=True)

    if args.format == "json":
        payload = {
            "strict_ok": report.strict_ok,
            "residuals": {f"{names(i)},{names(j)}": print_canonical(r) for (i, j), r in report.residuals.items()},
        }
        emit(args, json.dumps(payload, indent=2) + "\n")
        return
    lines = [f"strict_ok: {'true' if report.strict_ok else 'false'}"]
    for (i, j), r in report.residuals.items():
        lines.append(f"residual[{names(i)},{names(j)}] = {print_canonical(r)}")
    emit(args, "\n".join(lines) + "\n")


def cmd_bracket(args) -> None:
    system = load_system(args.system)
    if system.second_field is None:
        raise MissingField("bracket needs a second field given as Y[1..n] in the system file")
    X = VectorField(system.field_images)
    Y = VectorField(system.second_field)
    f = parse_expr(args.probe, system.dim)
    emit(args, print_canonical(bracket_apply(X, Y, f)) + "\n")


def cmd_simulate(args) -> None:
    system = load_system(args.system)
    cfg = IntegratorConfig(method=args.method, h=args.h, T=args.T, q0=resolve_q(args, system))
    point = resolve_point(args, system)
    traj = integrate(VectorField(system.field_images), point, cfg)
    if args.format == "json":
        payload = {
            "q0": traj.q0,
            "method": traj.method,
            "step": traj.step,
            "times": [float(t) for t in traj.times],
            "points": [[float(v) for v in p] for p in traj.points],
        }
        emit(args, json.dumps(payload) + "\n")
    else:
        emit(args, traj.to_csv())
    write_manifest(args, _config(args))


def cmd_equilibria(args) -> None:
    system = load_system(args.system)
    q0 = resolve_q(args, system)
    lo, hi = _floats(args.box) if args.box else (-2.0, 2.0)
    X = VectorField(system.field_images)
    found = search_equilibria(X, q0, [(lo, hi)] * system.dim, args.seeds)
    rows = []
    for p in found.points:
        try:
            lin = classify_equilibrium(X, p, q0)
            rows.append((p, lin.cls, lin.eigenvalues))
        except NotAnEquilibrium:
            rows.append((p, "unknown", ()))
    if args.format == "json":
        payload = [
            {"point": list(p), "class": cls, "eigenvalues": [[z.real, z.imag] for z in ev]}
            for p, cls, ev in rows
        ]
        emit(args, json.dumps(payload, indent=2) + "\n")
    else:
        header = ",".join([*(f"x{i + 1}" for i in range(system.dim)), "class"])
        lines = [header] + [",".join([*(repr(v) for v in p), cls]) for p, cls, _ in rows]
        emit(args, "\n".join(lines) + "\n")
    write_manifest(args, _config(args))


def cmd_stability(args) -> None:
    system = load_system(args.system)
    eps = sorted(_floats(args.epsilons), reverse=True)
    query = StabilityQuery(
        epsilons=tuple(eps),
        t0=args.t0,
        T=args.T,
        samples=args.samples,
        delta_min=args.delta_min,
        q0=resolve_q(args, system),
        h=args.h,
        method=args.method,
        seed=args.seed,
    )
    point = resolve_point(args, system)
    report = probe_stability(VectorField(system.field_images), point, query)
    emit(args, report.to_json())
    write_manifest(args, _config(args))


def cmd_limit(args) -> None:
    system = load_system(args.system)
    if not system.q_symbolic:
        raise CLIError("the limit sweep needs 'q = symbolic' in the system file", EXIT_INVALID)
    q_list = _floats(args.q_list)
    cfg = IntegratorConfig(method=args.method, h=args.h, T=args.T)
    point = resolve_point(args, system)
    table = quantum_limit_sweep(VectorField(system.field_images), point, q_list, cfg)
    emit(args, table.to_csv())
    write_manifest(args, _config(args))


def cmd_replay(args) -> None:
    try:
        manifest = json.loads(Path(args.manifest_file).read_text())
    except OSError as exc:
        raise CLIError(f"cannot read manifest {args.manifest_file!r}: {exc.strerror or exc}", EXIT_IO) from None
    except json.JSONDecodeError as exc:
        raise CLIError(f"malformed manifest: {exc}", EXIT_INVALID) from None
    command = manifest.get("command")
    if command not in HANDLERS or command == "replay":
        raise CLIError(f"manifest names unknown command {command!r}", EXIT_INVALID)
    ns = argparse.Namespace(**manifest["config"])
    ns.manifest = None
    if args.out:
        ns.out = args.out
    HANDLERS[command](ns)


HANDLERS = {
    "normalize": cmd_normalize,
    "validate": cmd_validate,
    "bracket": cmd_bracket,
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "limit": cmd_limit,
    "replay": cmd_replay,
}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=None, help="ambient dimension (normalize)")
    common.add_argument("--q", default=None, help="'symbolic' or a value in (0, 1]; overrides the system file")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for all sampling")
    common.add_argument("--out", default=None, help="write output to PATH instead of stdout")
    common.add_argument("--manifest", default=None, help="write the run manifest to PATH")
    return common


def _integrator_options(T: float = 1.0) -> argparse.ArgumentParser:
    # built per subcommand: argparse parents share action objects
    integ = argparse.ArgumentParser(add_help=False)
    integ.add_argument("--method", choices=("euler", "rk4"), default="rk4")
    integ.add_argument("--h", type=float, default=0.01, help="fixed step size")
    integ.add_argument("--T", type=float, default=T, help="time horizon")
    integ.add_argument("--point", default=None, help="initial point, comma separated")
    return integ


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="qspace", description="Quantum n-space algebra and dynamics toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", parents=[common], help="normal-order an expression")
    p.add_argument("expr")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("validate", parents=[common], help="check the commutation relations of a field")
    p.add_argument("system")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("bracket", parents=[common], help="apply [X, Y] to a probe expression")
    p.add_argument("system")
    p.add_argument("--probe", "-f", required=True, help="expression the bracket acts on")
    p.add_argument("--format", choices=("text",), default="text")

    p = sub.add_parser("simulate", parents=[common, _integrator_options()], help="integrate the induced classical system")
    p.add_argument("system")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("equilibria", parents=[common], help="Newton search for rest points")
    p.add_argument("system")
    p.add_argument("--box", default="-2,2", help="LO,HI applied to every axis")
    p.add_argument("--seeds", type=int, default=5, help="seeds per axis")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("stability", parents=[common, _integrator_options(T=5.0)], help="epsilon-delta stability probe")
    p.add_argument("system")
    p.add_argument("--epsilons", default="0.1,0.01")
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--delta-min", type=float, default=1e-4)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("limit", parents=[common, _integrator_options()], help="sweep q toward 0")
    p.add_argument("system")
    p.add_argument("--q-list", default="0.5,0.25,0.1,0.01")
    p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest_file")
    p.add_argument("--out", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        HANDLERS[args.command](args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PoleAtZero, NumericalError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DimensionMismatch, NotInvertible, NotAHomomorphism, NotAnEquilibrium, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
