"""Command-line entry point. Every command prints one JSON document ``{meta, results}``.

Exit codes: 0 pass, 1 law failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__, sampling
from .catalog import catalog_entries, catalog_get
from .category import (
    counit,
    equivalence_witness_check,
    k_bijectivity_check,
    k_tau_check,
    naturality_check_k,
    naturality_check_l,
    promote_to_rate_preserving,
    rate_preserving_check,
    rate_scaling_check,
    triangle_identity_1,
    triangle_identity_2,
)
from .errors import (
    CatalogError,
    ConfigError,
    DimensionError,
    FlowcatError,
    ParseError,
    PreconditionError,
    UnboundVariableError,
)
from .morphisms import WeakMorphism, identity_map_morphism, identity_morphism
from .reports import CheckReport, run_check
from .sections import (
    GlobalSectionSystem,
    SectionedFlow,
    poincare_system,
    recurrence_check,
    transversality_probe,
)
from .spaces import DEFAULT_TOLERANCES, Space, Tolerances
from .suspension import SuspensionSystem, TorusPoint, suspend_system
from .systems import FlowSystem, MapSystem, check_flow_laws, check_map_laws, map_apply

EXIT_PASS, EXIT_LAW, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SUITES = ("flow-laws", "poincare", "suspension", "adjunction", "naturality", "rate")
CONFIG_ERRORS = (ConfigError, CatalogError, ParseError, DimensionError, UnboundVariableError)


class CommandFailed(Exception):
    def __init__(self, code: int, results: Any):
        super().__init__(code)
        self.code = code
        self.results = results


# -- system configuration ------------------------------------------------------------

def system_from_config(cfg: dict, tol: Tolerances = DEFAULT_TOLERANCES):
    """Build a map system, flow, or flow with section from a config document."""
    if not isinstance(cfg, dict):
        raise ConfigError("system config must be a JSON object")
    try:
        space = Space.from_dict(cfg["space"])
        kind = cfg["kind"]
        exprs = list(cfg["exprs"])
    except KeyError as exc:
        raise ConfigError(f"system config is missing {exc.args[0]!r}") from None
    params = {k: float(v) for k, v in (cfg.get("params") or {}).items()}
    label = cfg.get("label", "config")
    if kind == "map":
        if "inverse_exprs" not in cfg:
            raise ConfigError("a map system needs inverse_exprs")
        return MapSystem.from_exprs(space, exprs, list(cfg["inverse_exprs"]), params, label=label)
    if kind == "flow-closed":
        flow = FlowSystem.closed_form(space, exprs, params=params, domain=cfg.get("domain"), label=label)
    elif kind == "flow-ode":
        flow = FlowSystem.ode(space, exprs, step=float(cfg.get("step", 1e-3)), params=params,
                              domain=cfg.get("domain"), label=label)
    else:
        raise ConfigError(f"unknown system kind {kind!r}; use map, flow-closed or flow-ode")
    section = cfg.get("section")
    if section is None:
        return flow
    if not isinstance(section, dict) or "g" not in section:
        raise ConfigError("section needs a 'g' expression")
    return GlobalSectionSystem(flow, section["g"], section.get("domain"), int(section.get("orientation", 0)),
                               tol=tol, label=label)


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects name=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key} is not a number: {value!r}") from None
    return out


def _with_tol(system, tol: Tolerances):
    if isinstance(system, GlobalSectionSystem):
        return system.with_tolerances(tol)
    if isinstance(system, SuspensionSystem):
        return SuspensionSystem(system.base, tol, system.label)
    return system


def resolve_system(name: str | None, config: str | None, params: list | None, tol: Tolerances):
    if (name is None) == (config is None):
        raise ConfigError("give exactly one of --system or --config")
    if config is not None:
        try:
            with open(config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{config} is not valid JSON: {exc.msg}") from None
        return system_from_config(doc, tol)
    return _with_tol(catalog_get(name, _parse_params(params)), tol)


def _tolerances(args) -> Tolerances:
    changes = {}
    for flag, key in (("tol_law", "tol_law"), ("tol_time", "tol_time"), ("tol_space", "tol_space"),
                      ("horizon", "max_horizon"), ("dt", "dt"), ("t_min", "t_min")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    try:
        return DEFAULT_TOLERANCES.override(**changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} is not valid JSON: {exc.msg}") from None


def _point(system, text: str):
    data = _json_arg(text, "point")
    return system.space.point_from_json(data)


def _pt(p):
    return p.to_json() if hasattr(p, "to_json") else p


def _check_space_point(system, x):
    if isinstance(system, GlobalSectionSystem):
        ok = system.flow.in_domain(x)
    elif isinstance(system, FlowSystem):
        ok = system.in_domain(x)
    elif isinstance(system, MapSystem) and isinstance(system.space, Space):
        ok = not system.space.out_of_bounds(x)
    else:
        ok = True
    if not ok:
        raise ConfigError(f"initial point {_pt(x)} is outside the domain of {system.label}")


# -- commands --------------------------------------------------------------------------

def cmd_catalog(args, tol):
    return EXIT_PASS, catalog_entries()


def _time_grid(t0: float, t1: float, step: float) -> list[float]:
    if not step > 0:
        raise ConfigError("--step must be positive")
    if t1 < t0:
        raise ConfigError("--t1 must not be below --t0")
    n = int(math.floor((t1 - t0) / step + 1e-9))
    return [t0 + i * step for i in range(n + 1)]


def cmd_orbit(args, tol):
    system = resolve_system(args.system, args.config, args.param, tol)
    x = _point(system, args.point)
    _check_space_point(system, x)
    times = _time_grid(args.t0, args.t1, args.step)
    out = []
    if isinstance(system, MapSystem):
        if any(t != int(t) for t in times):
            raise ConfigError("map orbits need integer times; use a whole-number --step and --t0")
        for t in times:
            out.append({"t": t, "point": _pt(map_apply(system, x, int(t)))})
    else:
        for t in times:
            out.append({"t": t, "point": _pt(system.evolve(x, t))})
    return EXIT_PASS, {"system": system.label, "orbit": out}


def _grid_points(system, args) -> list:
    if args.points is not None:
        data = _json_arg(args.points, "--points")
        if not isinstance(data, list):
            raise ConfigError("--points must be a JSON list of points")
        return [system.space.point_from_json(p) for p in data]
    if args.start is None or args.end is None:
        raise ConfigError("give --points, or --from and --to with --n")
    a = np.asarray(_json_arg(args.start, "--from"), dtype=float)
    b = np.asarray(_json_arg(args.end, "--to"), dtype=float)
    if a.shape != b.shape:
        raise ConfigError("--from and --to differ in dimension")
    if args.n < 0:
        raise ConfigError("--n must be non-negative")
    if args.n == 1:
        return [system.space.canonicalize(a)]
    return [system.space.canonicalize(a + (b - a) * i / (args.n - 1)) for i in range(args.n)]


def cmd_return_map(args, tol):
    system = resolve_system(args.system, args.config, args.param, tol)
    if not isinstance(system, SectionedFlow):
        raise ConfigError(f"{system.label} has no section")
    points = _grid_points(system, args)
    rows, failed = [], False
    for x in points:
        row = {"x": _pt(x)}
        try:
            if not system.on_section(x):
                raise ConfigError("grid point is not on the section")
            t, y = system.first_return(x)
            row.update(return_time=t, image=_pt(y))
        except (FlowcatError, ArithmeticError, ValueError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            failed = True
        rows.append(row)
    return (EXIT_NUMERIC if failed else EXIT_PASS), {"system": system.label, "records": rows}


def cmd_suspend(args, tol):
    m = resolve_system(args.system, args.config, args.param, tol)
    if not isinstance(m, MapSystem):
        raise ConfigError(f"{m.label} is not a map system")
    s = _with_tol(suspend_system(m), tol)
    rng = sampling.rng_for(args.seed)
    rows = []
    for _ in range(args.samples):
        x = m.sample(rng)
        t, y = s.first_return(TorusPoint(x, 0.0))
        rows.append({"x": _pt(x), "return_time": t, "image": _pt(y), "base_image": _pt(m.forward(x))})
    d = s.space.distance
    samples = sampling.map_samples(m, args.samples, args.seed)
    report = run_check(
        f"poincare-of-suspension[{m.label}]", tol.tol_law, samples,
        lambda x: max(abs(s.first_return(TorusPoint(x, 0.0))[0] - 1.0),
                      d(s.first_return(TorusPoint(x, 0.0))[1], TorusPoint(m.forward(x), 0.0))),
        args.seed,
    )
    code = EXIT_PASS if report.passed else EXIT_LAW
    return code, {"system": s.label, "records": rows, "reports": [report.to_dict()]}


def _suite_reports(suite: str, system, tol: Tolerances, n: int, seed: int) -> list[CheckReport]:
    law = tol.tol_law
    if suite == "flow-laws":
        if isinstance(system, MapSystem):
            return [check_map_laws(system, sampling.map_samples(system, n, seed), law, seed)]
        return [check_flow_laws(system, sampling.flow_law_samples(system, n, seed), law, seed)]

    if isinstance(system, MapSystem):
        m = system
        if suite == "suspension":
            s = suspend_system(m)
            d = s.space.distance
            rng = sampling.rng_for(seed)
            triples = [(s.sample_point(rng), float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3))) for _ in range(n)]
            pts = sampling.map_samples(m, n, seed)
            return [
                check_flow_laws(s, triples, law, seed),
                run_check(f"suspension-return-time[{m.label}]", law, pts,
                          lambda x: abs(s.first_return(TorusPoint(x, 0.0))[0] - 1.0), seed),
                run_check(f"suspension-poincare[{m.label}]", law, pts,
                          lambda x: d(s.first_return(TorusPoint(x, 0.0))[1], TorusPoint(m.forward(x), 0.0)), seed),
            ]
        if suite == "adjunction":
            return [
                triangle_identity_1(m, sampling.base_torus_samples(m, n, seed), law, seed),
                equivalence_witness_check(m, sampling.map_samples(m, n, seed), law, seed),
            ]
        if suite == "naturality":
            return [naturality_check_l(identity_map_morphism(m), sampling.map_samples(m, n, seed), law, seed)]
        system = suspend_system(m)

    if not isinstance(system, SectionedFlow):
        raise ConfigError(f"suite {suite} needs a map system or a flow with a section")
    sys_ = system
    if suite == "poincare":
        xs = sampling.section_samples(sys_, n, seed)
        d = sys_.space.distance

        def inverse_residual(x):
            return max(d(sys_.first_return_backward(sys_.first_return(x)[1])[1], x),
                       d(sys_.first_return(sys_.first_return_backward(x)[1])[1], x))

        def time_residual(x):
            tb, y = sys_.first_return_backward(x)
            return abs(tb - sys_.first_return(y)[0])

        transversal = run_check(f"transversality[{sys_.label}]", 0.0, xs,
                                lambda x: 0.0 if transversality_probe(sys_, x) else 1.0, seed)
        return [
            recurrence_check(sys_, sampling.space_samples(sys_, n, seed), tol.max_horizon, seed),
            transversal,
            run_check(f"poincare-inverse[{sys_.label}]", law, xs, inverse_residual, seed),
            run_check(f"backward-return-time[{sys_.label}]", law, xs, time_residual, seed),
        ]
    if suite == "suspension":
        p = poincare_system(sys_)
        s = suspend_system(p)
        d = s.space.distance
        xs = sampling.section_samples(sys_, n, seed)
        return [
            run_check(f"suspension-return-time[{p.label}]", law, xs,
                      lambda x: abs(s.first_return(TorusPoint(x, 0.0))[0] - 1.0), seed),
            run_check(f"suspension-poincare[{p.label}]", law, xs,
                      lambda x: d(s.first_return(TorusPoint(x, 0.0))[1], TorusPoint(p.forward(x), 0.0)), seed),
        ]
    if suite == "adjunction":
        rng = sampling.rng_for(seed)
        torus = [TorusPoint(sys_.sample_section_point(rng), float(rng.uniform(0, 1))) for _ in range(n)]
        return [
            triangle_identity_2(sys_, sampling.section_samples(sys_, n, seed), law, seed),
            k_tau_check(sys_, sampling.torus_samples(sys_, n, seed), law, seed),
            k_bijectivity_check(sys_, sampling.space_samples(sys_, n, seed), torus, law, seed),
        ]
    if suite == "naturality":
        return [naturality_check_k(identity_morphism(sys_), sampling.torus_samples(sys_, n, seed), law, seed)]
    if suite == "rate":
        w = counit(sys_)
        src = w.source
        rng = sampling.rng_for(seed)
        cs = [(src.sample_section_point(rng), float(rng.uniform(0, 1)), float(rng.uniform(-3, 3))) for _ in range(n)]
        trip = sampling.torus_samples(sys_, n, seed)
        return [
            rate_preserving_check(identity_morphism(sys_), trip, law, seed),
            rate_preserving_check(w, cs, law, seed),
            rate_scaling_check(identity_morphism(sys_), [(x, t) for x, t, _ in trip], law, seed),
        ]
    raise ConfigError(f"unknown suite {suite!r}")


def cmd_verify(args, tol):
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    system = resolve_system(args.system, args.config, args.param, tol)
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    try:
        reports = _suite_reports(args.suite, system, tol, args.samples, args.seed)
    except PreconditionError as exc:
        failing = exc.report.to_dict() if exc.report is not None else None
        raise CommandFailed(EXIT_LAW, {"suite": args.suite, "error": str(exc), "reports": [failing]}) from None
    passed = all(r.passed for r in reports)
    results = {"suite": args.suite, "system": system.label, "pass": passed, "reports": [r.to_dict() for r in reports]}
    return (EXIT_PASS if passed else EXIT_LAW), results


def _morphism(source, target, h_exprs, tau: str, params) -> WeakMorphism:
    if not h_exprs:
        raise ConfigError("give the morphism's space part with --h (one per coordinate)")
    return WeakMorphism.from_exprs(source, target, h_exprs, tau, params)


def cmd_promote(args, tol):
    source = resolve_system(args.system, args.config, args.param, tol)
    target = resolve_system(args.target, args.target_config, args.target_param, tol)
    for s in (source, target):
        if not isinstance(s, GlobalSectionSystem):
            raise ConfigError(f"{s.label} is not a flow with a section")
    w = _morphism(source, target, args.h, args.tau, _parse_params(args.morphism_param))
    inverse = None
    if args.inverse_h:
        inverse = _morphism(target, source, args.inverse_h, args.inverse_tau, _parse_params(args.morphism_param))
    try:
        promoted = promote_to_rate_preserving(w, inverse, tol=tol.tol_law, seed=args.seed)
    except PreconditionError as exc:
        failing = exc.report.to_dict() if exc.report is not None else None
        raise CommandFailed(EXIT_LAW, {"error": str(exc), "reports": [failing]}) from None
    rng = sampling.rng_for(args.seed)
    table = []
    s_grid = [-1.0, -0.5, 0.0, 0.5, 1.0]
    for _ in range(args.samples):
        y = source.sample_point(rng)
        table.append({"y": _pt(y), "h": _pt(promoted.h(y)), "tau": {str(s): promoted.tau(y, s) for s in s_grid}})
    report = rate_preserving_check(promoted, sampling.torus_samples(source, args.samples, args.seed),
                                   tol.tol_law, args.seed)
    code = EXIT_PASS if report.passed else EXIT_LAW
    return code, {"morphism": promoted.label, "table": table, "reports": [report.to_dict()]}


# -- argument parsing ------------------------------------------------------------------

def _add_system(p, prefix: str = ""):
    under = prefix.replace("-", "_")
    p.add_argument(f"--{prefix}system", dest=f"{under}system" if not prefix else under.rstrip("_"),
                   help="catalog system name")
    p.add_argument(f"--{prefix}config", dest=f"{under}config", help="JSON system config file")
    p.add_argument(f"--{prefix}param", dest=f"{under}param", action="append",
                   metavar="NAME=VALUE", help="catalog parameter (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-law", type=float)
    common.add_argument("--tol-time", type=float)
    common.add_argument("--tol-space", type=float)
    common.add_argument("--t-min", type=float)
    common.add_argument("--horizon", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--samples", type=int, default=20)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", help="write the document here instead of stdout")

    parser = argparse.ArgumentParser(prog="flowcat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"flowcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", parents=[common], help="list catalog systems")

    p = sub.add_parser("orbit", parents=[common], help="sample a trajectory on a uniform time grid")
    _add_system(p)
    p.add_argument("--point", required=True, help="initial point as JSON")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.25)

    p = sub.add_parser("return-map", parents=[common], help="return times and Poincaré images over a grid")
    _add_system(p)
    p.add_argument("--points", help="JSON list of section points")
    p.add_argument("--from", dest="start", help="first grid point as JSON")
    p.add_argument("--to", dest="end", help="last grid point as JSON")
    p.add_argument("--n", type=int, default=10)

    p = sub.add_parser("suspend", parents=[common], help="suspend a map system and check its return map")
    _add_system(p)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    _add_system(p)
    p.add_argument("--suite", required=True, help=", ".join(SUITES))

    p = sub.add_parser("promote", parents=[common], help="promote a weak morphism to a rate-preserving one")
    _add_system(p)
    _add_system(p, "target-")
    p.add_argument("--h", action="append", help="space part, one expression per coordinate")
    p.add_argument("--tau", default="t", help="time part in x1..xn and t")
    p.add_argument("--inverse-h", action="append")
    p.add_argument("--inverse-tau", default="t")
    p.add_argument("--morphism-param", action="append", metavar="NAME=VALUE")
    return parser


COMMANDS = {
    "catalog": cmd_catalog,
    "orbit": cmd_orbit,
    "return-map": cmd_return_map,
    "suspend": cmd_suspend,
    "verify": cmd_verify,
    "promote": cmd_promote,
}


def _meta(args) -> dict:
    echo = {k: v for k, v in sorted(vars(args).items()) if k != "output"}
    return {"tool": "flowcat", "version": __version__, "command": args.command, "seed": args.seed, "config": echo}


def _emit(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _tolerances(args)
        code, results = COMMANDS[args.command](args, tol)
    except CommandFailed as exc:
        code, results = exc.code, exc.results
    except CONFIG_ERRORS as exc:
        print(f"flowcat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FlowcatError, ArithmeticError) as exc:
        print(f"flowcat: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit({"meta": _meta(args), "results": results}, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
