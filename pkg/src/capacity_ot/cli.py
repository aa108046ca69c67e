"""Command-line front end.

JSON goes to stdout, a one-line summary to stderr.  Exit codes: 0 success,
1 usage error, 2 validation error, 3 infeasible, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from pathlib import Path

from . import io
from .choquet import choquet_integral, choquet_quadrature
from .cyclic import improve_plan, is_c_cyclically_monotone, min_cycle_weight, support
from .duality import check_cm, dual_objective, is_dual_feasible, potentials_from_monotone_set, solve_dual
from .errors import (
    CapacityError,
    DistortionError,
    GroundMismatchError,
    InstanceFormatError,
    SizeGuardError,
    SolverError,
)
from .generate import KINDS, RunConfig, generate_instance
from .setfunc import capacity_distance, capacity_from_values, classify
from .transport import (
    CH,
    CH_STAR,
    TransportInstance,
    classical_ot_oracle,
    is_transport_plan,
    solve_optimal,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 1, 2, 3, 4

SWEEP_FIELDS = (
    "name", "n", "m", "primal_ch", "primal_ch_star", "classical", "dual", "gap",
    "gap_flagged", "cyclically_monotone", "support_size",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--class", dest="cls", choices=(CH, CH_STAR), default=CH_STAR)
    p.add_argument("--tau", type=float, default=1e-9, help="support threshold")
    p.add_argument("--gap-flag", type=float, default=1e-6, help="duality gap reported as flagged above this")
    p.add_argument("--max-cells", type=int, default=None, help="size-guard override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="capacity-ot", description="Optimal transport between capacities.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check", parents=[common], help="validate an instance (and optionally a plan)")
    p.add_argument("instance", type=Path)
    p.add_argument("--plan", type=Path)

    p = sub.add_parser("integrate", parents=[common], help="Choquet integral against mu or nu")
    p.add_argument("instance", type=Path)
    p.add_argument("--f", required=True, help="comma-separated integrand values")
    p.add_argument("--side", choices=("mu", "nu"), default="mu")

    p = sub.add_parser("solve", parents=[common], help="optimal plan")
    p.add_argument("instance", type=Path)

    p = sub.add_parser("dual", parents=[common], help="dual value, primal value and gap")
    p.add_argument("instances", type=Path, nargs="+")

    for name, text in (("cyclic", "cyclic monotonicity of a plan's support"),
                       ("improve", "apply one cycle-exchange step to a plan"),
                       ("potentials", "potentials tight on a plan's support")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("instance", type=Path)
        p.add_argument("plan", type=Path)

    p = sub.add_parser("gen", parents=[common], help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kind", choices=KINDS, default="additive")

    p = sub.add_parser("distance", parents=[common], help="distance between the mu (or nu) of two instances")
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)
    p.add_argument("--side", choices=("mu", "nu"), default="mu")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(cls=args.cls, tau=args.tau, gap_flag=args.gap_flag, max_cells=args.max_cells,
                     seed=args.seed)


def _load(args, path) -> TransportInstance:
    return io.load_instance(path, args.max_cells or 0)


def _classification(cap) -> dict:
    c = classify(cap)
    return {"supermodular": c.supermodular, "submodular": c.submodular, "additive": c.additive}


def _cmd_check(args):
    inst = _load(args, args.instance)
    out = {"valid": True, "shape": list(inst.shape), "mu": _classification(inst.mu),
           "nu": _classification(inst.nu)}
    if args.plan:
        pi = io.load_plan(args.plan, inst)
        rep = is_transport_plan(pi, inst.mu, inst.nu, tol=1e-9)
        out["plan"] = {"transport_plan": rep.feasible, "worst_violation": rep.worst_violation,
                       "supermodular": pi.class_tag == CH_STAR}
    return out, EXIT_OK, f"instance {inst.shape[0]}x{inst.shape[1]} is valid"


def _cmd_integrate(args):
    inst = _load(args, args.instance)
    cap = inst.mu if args.side == "mu" else inst.nu
    try:
        f = [float(v) for v in args.f.split(",")]
    except ValueError:
        raise UsageError(f"--f must be comma-separated numbers, got {args.f!r}") from None
    out = {"side": args.side, "f": f, "integral": choquet_integral(f, cap),
           "quadrature": choquet_quadrature(f, cap), "quadrature_strict": choquet_quadrature(f, cap, True)}
    return out, EXIT_OK, f"Choquet integral {out['integral']:.12g}"


def _cmd_solve(args):
    inst = _load(args, args.instance)
    res = solve_optimal(inst, args.cls, max_cells=args.max_cells)
    if not res.feasible:
        return ({"version": io.VERSION, "class": args.cls, "status": res.status, "cost": None, "plan": None},
                EXIT_INFEASIBLE, f"{args.cls} plan class is empty")
    rep = is_transport_plan(res.plan, inst.mu, inst.nu, tol=1e-9)
    out = {
        "version": io.VERSION, "class": args.cls, "status": res.status, "cost": res.cost,
        "transport_plan": rep.feasible, "supermodular": res.plan.class_tag == CH_STAR,
        "plan": io.plan_to_json(res.plan),
    }
    return out, EXIT_OK, f"{args.cls} optimum {res.cost:.12g}"


def sweep_row(name: str, inst: TransportInstance, cfg: RunConfig) -> dict:
    """One CSV row: both primal optima, classical value, dual, gap, cyclicity."""
    ch = solve_optimal(inst, CH, max_cells=cfg.max_cells)
    star = solve_optimal(inst, CH_STAR, max_cells=cfg.max_cells)
    additive = classify(inst.mu).additive and classify(inst.nu).additive
    dual = solve_dual(inst, primal=star.cost if star.feasible else None)
    cyc, size = None, None
    if star.feasible:
        S = support(star.plan, cfg.tau)
        cyc, size = bool(is_c_cyclically_monotone(S, inst.cost, tol=1e-9)), len(S)
    return {
        "name": name, "n": inst.shape[0], "m": inst.shape[1],
        "primal_ch": ch.cost if ch.feasible else None,
        "primal_ch_star": star.cost if star.feasible else None,
        "classical": classical_ot_oracle(inst) if additive else None,
        "dual": dual.dual_value, "gap": dual.gap,
        "gap_flagged": dual.gap is not None and abs(dual.gap) > cfg.gap_flag,
        "cyclically_monotone": cyc, "support_size": size,
    }


def _cmd_dual(args):
    cfg = _config(args)
    if args.format == "csv":
        rows = [sweep_row(str(p), _load(args, p), cfg) for p in args.instances]
        flagged = sum(r["gap_flagged"] for r in rows)
        return rows, EXIT_OK, f"{len(rows)} instances, {flagged} with gap above {cfg.gap_flag:g}"
    reports = []
    status = EXIT_OK
    for p in args.instances:
        inst = _load(args, p)
        rep = solve_dual(inst)
        if rep.primal_value is None:
            status = EXIT_INFEASIBLE
        reports.append({
            "instance": str(p), "dual_value": rep.dual_value, "primal_value": rep.primal_value,
            "primal_status": rep.primal_status, "gap": rep.gap,
            "gap_flagged": rep.gap is not None and abs(rep.gap) > cfg.gap_flag,
            "phi": rep.pair.phi.tolist(), "psi": rep.pair.psi.tolist(),
            "orderings_searched": rep.orderings_searched,
        })
    out = reports[0] if len(reports) == 1 else reports
    return out, status, f"dual value {reports[0]['dual_value']:.12g}"


def _cmd_cyclic(args):
    inst = _load(args, args.instance)
    pi = io.load_plan(args.plan, inst)
    S = support(pi, args.tau)
    rep = is_c_cyclically_monotone(S, inst.cost, tol=1e-9)
    out = {
        "cyclically_monotone": rep.monotone,
        "support": [list(p) for p in S],
        "min_cycle_weight": io.finite_or_none(min_cycle_weight(S, inst.cost)),
        "cycle": None if rep.cycle is None else {
            "points": [list(p) for p in rep.cycle.points], "sigma": list(rep.cycle.sigma),
            "weight": rep.cycle_weight},
    }
    if not S.points:
        out["empty_support"] = True
    return out, EXIT_OK, "support is c-cyclically monotone" if rep else "negative exchange cycle found"


def _cmd_improve(args):
    inst = _load(args, args.instance)
    pi = io.load_plan(args.plan, inst)
    rep = is_c_cyclically_monotone(support(pi, args.tau), inst.cost, tol=1e-9)
    if rep.monotone:
        return {"improved": False, "cycle": None}, EXIT_OK, "no violating cycle; plan unchanged"
    imp = improve_plan(pi, rep.cycle, inst.cost)
    out = {
        "improved": True, "alpha": imp.alpha, "cost_before": imp.cost_before, "cost_after": imp.cost_after,
        "cycle": {"points": [list(p) for p in rep.cycle.points], "sigma": list(rep.cycle.sigma)},
        "plan": io.plan_to_json(imp.gamma),
    }
    return out, EXIT_OK, f"cost {imp.cost_before:.12g} -> {imp.cost_after:.12g}"


def _cmd_potentials(args):
    inst = _load(args, args.instance)
    pi = io.load_plan(args.plan, inst)
    S = support(pi, args.tau)
    pair = potentials_from_monotone_set(S, inst.cost)
    cm = check_cm(pair, S, inst.cost)
    out = {
        "phi": pair.phi.tolist(), "psi": pair.psi.tolist(),
        "cm1": cm.cm1, "cm2": cm.cm2, "cm3": cm.cm3,
        "dual_feasible": is_dual_feasible(pair, inst.cost).feasible,
        "dual_objective": dual_objective(pair, inst.mu, inst.nu),
    }
    return out, EXIT_OK, f"potentials with CM residual {max(cm.cm1, cm.cm2, cm.cm3):.3g}"


def _cmd_gen(args):
    inst = generate_instance(_config(args), args.n, args.m, args.kind)
    return io.instance_to_json(inst), EXIT_OK, f"generated {args.kind} {args.n}x{args.m} instance"


def _cmd_distance(args):
    a, b = _load(args, args.first), _load(args, args.second)
    ca, cb = (a.mu, b.mu) if args.side == "mu" else (a.nu, b.nu)
    if ca.n != cb.n:
        raise GroundMismatchError("capacities have different ground set sizes")
    d = capacity_distance(ca, capacity_from_values(ca.ground, cb.values))
    return {"distance": d}, EXIT_OK, f"distance {d:.12g}"


COMMANDS = {
    "check": _cmd_check, "integrate": _cmd_integrate, "solve": _cmd_solve, "dual": _cmd_dual,
    "cyclic": _cmd_cyclic, "improve": _cmd_improve, "potentials": _cmd_potentials, "gen": _cmd_gen,
    "distance": _cmd_distance,
}


def _render(out, fmt: str) -> str:
    if fmt == "csv":
        rows = out if isinstance(out, list) else [out]
        buf = _stdio.StringIO()
        fields = list(rows[0].keys()) if rows else list(SWEEP_FIELDS)
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
        return buf.getvalue()
    return io.dumps(out)


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        out, code, summary = COMMANDS[args.command](args)
        if args.format == "csv" and not (isinstance(out, list) and out and isinstance(out[0], dict)):
            if not isinstance(out, dict) or any(isinstance(v, (dict, list)) for v in out.values()):
                raise UsageError(f"--format csv is not available for '{args.command}'")
        text = _render(out, args.format)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (InstanceFormatError, CapacityError, DistortionError, GroundMismatchError, SizeGuardError,
            FileNotFoundError, ValueError) as exc:
        print(f"validation error: {exc}", file=stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    if args.out is not None:
        args.out.write_text(text)
    stdout.write(text)
    print(summary, file=stderr)
    return code


def main():
    sys.exit(run_command())
