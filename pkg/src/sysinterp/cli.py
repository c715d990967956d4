"""Command-line front end.

Subcommands: quadrature, check, discretize, plan, synthesize, simulate, bounds,
demo and zoh-baseline. Run ``sysinterp <subcommand> --help`` for options.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from ._config import Tolerances, get_tolerances
from .bounds import Point, build_delta, point_region_distance, region_from_dict, segment_bound_terms, stl_score_bound
from .discretization import build_problem, discretize
from .exceptions import SysInterpError
from .interpolation import MODES, SegmentSolution, Synthesis, build_interpolating_input, check_interpolator
from .legendre import build_operator_set, build_quadrature
from .planner import atom_to_dict, dt_stl_satisfied, load_spec, robot_spec, plan, sampled_stl_report
from .systems import (
    CtLti,
    DiscreteSignal,
    DtLti,
    PiecewisePolySignal,
    _matrices_from_dict,
    ct_simulate,
    is_interpolation,
    load_ct,
    load_dt,
    read_discrete_csv,
    save_system,
    system_to_dict,
    write_discrete_csv,
    write_signal_csv,
)

log = logging.getLogger("sysinterp")

SCHEMA_VERSION = 1
DEMO_TAU = 0.2
DEMO_DEGREE = 5
DEMO_HORIZON = 10
DEMO_UBOUND = 200.0
DEMO_A_C = np.array([[0.0, 1.0], [0.0, 0.0]])
DEMO_B_C = np.array([[0.0], [1.0]])
REFERENCE_A_D = np.array([[0.6990, 0.1398], [0.0, 0.6990]])
REFERENCE_B_D = np.array([[0.0], [0.1398]])
REFERENCE_MATCH_TOL = 5e-4
BREAKPOINT_TOL = 1e-6
BOUND_SLACK = 1e-9
BOUND_SUBSAMPLES = 1000


@dataclass
class RunConfig:
    subcommand: str
    tau: float = DEMO_TAU
    degree_N: int = DEMO_DEGREE
    steps_per_segment: int = 256
    mode: str = "min-norm"
    outdir: str = "."
    inputs: dict = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=get_tolerances)
    model_source: str = "reference"

    def __post_init__(self):
        if not self.tau > 0:
            raise SysInterpError("tau must be positive")
        if int(self.degree_N) < 1:
            raise SysInterpError("degree must be >= 1")
        if self.mode not in MODES:
            raise SysInterpError(f"mode must be one of {MODES}")


class StageError(SysInterpError):
    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _parse_vector(text):
    return np.array([float(v) for v in text.replace(";", ",").split(",") if v.strip()])


def _dense_times(tau, ell, per_segment=50):
    return np.linspace(0.0, ell * tau, ell * per_segment + 1)


# --- trace files ------------------------------------------------------------------


def synthesis_to_dict(ct, dt, scheme, x0, syn, mode):
    return {
        "schema_version": SCHEMA_VERSION,
        "tau": scheme.tau,
        "degree": scheme.N,
        "mode": mode,
        "system": system_to_dict(ct.A_c, ct.B_c),
        "model": system_to_dict(dt.A_d, dt.B_d),
        "x0": np.asarray(x0, dtype=float).tolist(),
        "u_d": syn.u_d.values.tolist(),
        "x_d": syn.x_d.values.tolist(),
        "u_nodes": syn.u_c.segment_values.tolist(),
        "x_nodes": syn.x_pred.segment_values.tolist(),
        "segments": [
            {"X": s.X.tolist(), "U": s.U.tolist(), "residual": s.residual, "null_dim": s.null_dim}
            for s in syn.segments
        ],
    }


def load_trace(path):
    """Rebuild ``(ct, dt, scheme, x0, synthesis)`` from a ``synthesis.json`` file."""
    with open(path) as fh:
        data = json.load(fh)
    ct = CtLti(*_matrices_from_dict(data["system"]))
    dt = DtLti(*_matrices_from_dict(data["model"]))
    scheme = build_quadrature(data["tau"], data["degree"])
    segments = tuple(
        SegmentSolution(
            X=np.asarray(s["X"], dtype=float).reshape(ct.n, scheme.N),
            U=np.asarray(s["U"], dtype=float).reshape(ct.m, scheme.N),
            residual=s["residual"],
            mode=data["mode"],
            null_dim=s["null_dim"],
        )
        for s in data["segments"]
    )
    syn = Synthesis(
        u_c=PiecewisePolySignal(scheme, np.asarray(data["u_nodes"], dtype=float)),
        x_pred=PiecewisePolySignal(scheme, np.asarray(data["x_nodes"], dtype=float)),
        x_d=DiscreteSignal(data["x_d"]),
        u_d=DiscreteSignal(data["u_d"]),
        segments=segments,
    )
    return ct, dt, scheme, np.asarray(data["x0"], dtype=float), syn


# --- bounds -----------------------------------------------------------------------


def segment_bounds(ct, scheme, x0, syn, path=None, targets=None, subsamples=BOUND_SUBSAMPLES):
    """Per-segment bound terms and the empirical maximum distance to the target.

    ``path`` defaults to the sampled states (as points) and each segment's target
    defaults to its own starting region.
    """
    ell = syn.u_d.horizon_ell
    if path is None:
        path = [Point(x) for x in syn.x_d.values]
    if targets is None:
        targets = [path[i] for i in range(ell)]
    traj = ct_simulate(ct, x0, syn.u_c, steps_per_segment=subsamples)
    delta = build_delta(ct, scheme)
    rows = []
    for i in range(ell):
        sol = syn.segments[i]
        terms = segment_bound_terms(
            ct, scheme, syn.x_d[i], syn.u_d[i], sol, path[i], path[i + 1], targets[i], delta
        )
        window = traj.states[i * subsamples : (i + 1) * subsamples + 1]
        empirical = max(point_region_distance(x, targets[i]) for x in window)
        rows.append(
            {
                "segment": i,
                "term1": terms.drift,
                "term2": terms.interior,
                "dH_term": terms.region,
                "bound": terms.total,
                "empirical_max_distance": empirical,
            }
        )
    return rows


def write_bounds_csv(path, rows):
    fields = ["segment", "term1", "term2", "dH_term", "bound", "empirical_max_distance"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (row[k] if k == "segment" else f"{row[k]:.17g}") for k in fields})


# --- demo -------------------------------------------------------------------------


def _first_time(times, values, predicate):
    hits = np.flatnonzero(predicate(values))
    return float(times[hits[0]]) if hits.size else None


def _atom_dict(result):
    return {**atom_to_dict(result.atom), "satisfied": bool(result.satisfied), "robustness": result.robustness}


def _select_demo_model(ct, scheme, config, checks, summary):
    try:
        found = discretize(ct, scheme, tol=config.tolerances.residual)
    except SysInterpError as exc:
        raise StageError("discretize", str(exc)) from exc
    summary["discretize"] = {
        "A_d": found.model.A_d.tolist(),
        "B_d": found.model.B_d.tolist(),
        "residual": found.residual,
        "free_dims": found.free_dims,
    }
    matches = bool(
        np.max(np.abs(found.model.A_d - REFERENCE_A_D)) <= REFERENCE_MATCH_TOL
        and np.max(np.abs(found.model.B_d - REFERENCE_B_D)) <= REFERENCE_MATCH_TOL
    )
    reference = DtLti(REFERENCE_A_D, REFERENCE_B_D)
    ref_residual = build_problem(ct, build_operator_set(scheme)).residual(reference.A_d, reference.B_d)
    ref_check = check_interpolator(ct, reference, scheme, tol=config.tolerances.inclusion)
    summary["reference_model"] = {
        "A_d": REFERENCE_A_D.tolist(),
        "B_d": REFERENCE_B_D.tolist(),
        "residual": ref_residual,
        "inclusion": ref_check.to_dict(),
        "matches_min_norm": matches,
    }
    checks["reference_discretization"] = matches or (
        found.free_dims > 0 and ref_residual <= config.tolerances.residual and ref_check.holds
    )
    model = reference if config.model_source == "reference" else found.model
    summary["model_source"] = config.model_source
    summary["A_d"] = model.A_d.tolist()
    summary["B_d"] = model.B_d.tolist()
    return model


def run_demo(config):
    """Discretize, plan, synthesize, simulate and bound the double-integrator example.

    Returns ``(summary, checks, artifacts)``; ``checks`` maps each assertion to a bool.
    """
    ct = CtLti(DEMO_A_C, DEMO_B_C)
    scheme = build_quadrature(config.tau, config.degree_N)
    checks, summary = {}, {"schema_version": SCHEMA_VERSION, "tau": config.tau, "degree": config.degree_N}
    model = _select_demo_model(ct, scheme, config, checks, summary)

    spec = robot_spec(DEMO_HORIZON, DEMO_UBOUND)
    x0 = np.zeros(2)
    planned = plan(model, x0, spec)
    if planned is None:
        raise StageError("plan", "no input sequence satisfies the specification")
    summary["u_d"] = planned.u_d.values.ravel().tolist()
    summary["x_d"] = planned.x_d.values.tolist()
    summary["witnesses"] = list(planned.witnesses)
    log.info("planned with witnesses %s", planned.witnesses)
    summary["discrete_atoms"] = [_atom_dict(r) for r in planned.report.atoms]
    checks["discrete_spec"] = planned.report.satisfied

    try:
        syn = build_interpolating_input(ct, model, scheme, x0, planned.u_d, mode=config.mode)
    except SysInterpError as exc:
        raise StageError("synthesize", str(exc)) from exc
    summary["segment_null_dims"] = [s.null_dim for s in syn.segments]
    summary["segment_residuals"] = [s.residual for s in syn.segments]

    traj = ct_simulate(ct, x0, syn.u_c, config.steps_per_segment)
    at_bp = traj.at_breakpoints()
    err = np.abs(at_bp - syn.x_d.values) / np.maximum(1.0, np.abs(syn.x_d.values))
    summary["breakpoint_max_rel_error"] = float(err.max())
    checks["breakpoints_match"] = bool(err.max() <= BREAKPOINT_TOL)
    checks["x_pred_interpolates"] = bool(is_interpolation(syn.x_pred, syn.x_d))

    x1, v = at_bp[:, 0], at_bp[:, 1]
    sampled = {
        "reach_low_1_4": bool(np.any(x1[1:5] <= -2.0)),
        "reach_high_5_7": bool(np.any(x1[5:8] >= 2.0)),
        "reach_low_8_10": bool(np.any(x1[8:11] <= -2.0)),
        "speed_limit_0_10": bool(np.all(np.abs(v) <= 15.0)),
    }
    summary["sampled_conjuncts"] = sampled
    checks["sampled_spec"] = all(sampled.values())

    continuous = sampled_stl_report(traj.times, traj.states, spec, config.tau)
    summary["continuous_atoms"] = [_atom_dict(r) for r in continuous.atoms]
    summary["event_times"] = {
        "first_x_le_-2": _first_time(traj.times, traj.states[:, 0], lambda x: x <= -2.0),
        "first_x_ge_2": _first_time(traj.times, traj.states[:, 0], lambda x: x >= 2.0),
        "max_abs_velocity": float(np.abs(traj.states[:, 1]).max()),
    }

    rows = segment_bounds(ct, scheme, x0, syn)
    summary["bounds"] = rows
    checks["bounds_sound"] = all(r["bound"] >= r["empirical_max_distance"] - BOUND_SLACK for r in rows)
    summary["stl_score_bounds"] = {
        "displacement": [stl_score_bound(ct, scheme, [1.0, 0.0], syn.x_d[i], syn.u_d[i], syn.segments[i]) for i in range(DEMO_HORIZON)],
        "velocity": [stl_score_bound(ct, scheme, [0.0, 1.0], syn.x_d[i], syn.u_d[i], syn.segments[i]) for i in range(DEMO_HORIZON)],
    }
    summary["checks"] = checks
    return summary, checks, {"ct": ct, "model": model, "scheme": scheme, "synthesis": syn,
                             "trajectory": traj, "spec": spec, "plan": planned}


def zoh_input(scheme, u_d):
    """Hold ``u_d(i)`` constant on segment ``i``."""
    vals = np.asarray(u_d.values, dtype=float)
    ell = vals.shape[0] - 1
    nodes = np.repeat(vals[:ell, None, :], scheme.N + 1, axis=1)
    return PiecewisePolySignal(scheme, nodes)


def run_zoh_baseline(config, demo=None):
    if demo is None:
        _, _, demo = run_demo(config)
    ct, scheme, syn, spec = demo["ct"], demo["scheme"], demo["synthesis"], demo["spec"]
    u_zoh = zoh_input(scheme, syn.u_d)
    traj = ct_simulate(ct, np.zeros(ct.n), u_zoh, config.steps_per_segment)
    sampled = dt_stl_satisfied(DiscreteSignal(traj.at_breakpoints()), spec)
    continuous = sampled_stl_report(traj.times, traj.states, spec, config.tau)
    summary = {
        "sampled_atoms": [_atom_dict(r) for r in sampled.atoms],
        "continuous_atoms": [_atom_dict(r) for r in continuous.atoms],
        "continuous_satisfied": continuous.satisfied,
        "max_abs_velocity": float(np.abs(traj.states[:, 1]).max()),
        "max_displacement_1_0_to_1_4": float(
            traj.states[(traj.times >= 1.0 - 1e-12) & (traj.times <= 1.4 + 1e-12), 0].max()
        ),
    }
    return summary, traj, demo["trajectory"]


# --- subcommand handlers ------------------------------------------------------------


def _cmd_quadrature(args):
    scheme = build_quadrature(args.tau, args.degree)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["index", "node", "weight"])
        for i, (t, w) in enumerate(zip(scheme.nodes, scheme.weights)):
            writer.writerow([i, f"{t:.17g}", f"{w:.17g}"])
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_check(args):
    ct, dt = load_ct(args.system), load_dt(args.model)
    report = check_interpolator(ct, dt, build_quadrature(args.tau, args.degree))
    verdict = "IS" if report.holds else "is NOT"
    print(f"continuous system {verdict} an order-{args.degree} interpolator (tau={args.tau})")
    print(json.dumps(report.to_dict()))
    return 0 if report.holds else 1


def _cmd_discretize(args):
    ct = load_ct(args.system)
    model, residual, free_dims = discretize(ct, build_quadrature(args.tau, args.degree))
    if args.out:
        save_system(args.out, model.A_d, model.B_d)
    else:
        print(json.dumps(system_to_dict(model.A_d, model.B_d)))
    print(f"residual {residual:.3e}")
    print(f"free_dims {free_dims}")
    return 0


def _cmd_plan(args):
    dt = load_dt(args.model)
    spec = load_spec(args.spec, args.horizon, args.ubound)
    result = plan(dt, _parse_vector(args.x0), spec)
    if result is None:
        print("infeasible")
        return 1
    write_discrete_csv(args.out, result.u_d)
    print(f"witnesses {list(result.witnesses)}; wrote {args.out}")
    return 0


def _cmd_synthesize(args):
    ct, dt = load_ct(args.system), load_dt(args.model)
    scheme = build_quadrature(args.tau, args.degree)
    x0 = _parse_vector(args.x0)
    u_d = read_discrete_csv(args.inputs)
    syn = build_interpolating_input(ct, dt, scheme, x0, u_d, mode=args.mode)
    os.makedirs(args.outdir, exist_ok=True)
    times = _dense_times(scheme.tau, u_d.horizon_ell)
    write_signal_csv(os.path.join(args.outdir, "input.csv"), times, {"u": syn.u_c(times)})
    write_signal_csv(os.path.join(args.outdir, "state_pred.csv"), times, {"x": syn.x_pred(times)})
    with open(os.path.join(args.outdir, "synthesis.json"), "w") as fh:
        json.dump(synthesis_to_dict(ct, dt, scheme, x0, syn, args.mode), fh, indent=2)
    print(f"wrote {args.outdir}/input.csv, state_pred.csv, synthesis.json")
    return 0


def _cmd_simulate(args):
    ct, _, scheme, x0, syn = load_trace(args.trace)
    u = zoh_input(scheme, syn.u_d) if args.zoh else syn.u_c
    traj = ct_simulate(ct, x0, u, args.steps)
    write_signal_csv(args.out, traj.times, {"x": traj.states, "u": traj.inputs})
    print(f"wrote {args.out}")
    return 0


def _cmd_bounds(args):
    ct, _, scheme, x0, syn = load_trace(args.trace)
    path = targets = None
    if args.regions:
        with open(args.regions) as fh:
            data = json.load(fh)
        if "path" in data:
            path = [region_from_dict(r) for r in data["path"]]
        if "targets" in data:
            targets = [region_from_dict(r) for r in data["targets"]]
        elif "target" in data:
            targets = [region_from_dict(data["target"])] * syn.u_d.horizon_ell
    rows = segment_bounds(ct, scheme, x0, syn, path, targets, args.subsamples)
    write_bounds_csv(args.out, rows)
    print(f"wrote {args.out}; smallest slack {min(r['bound'] - r['empirical_max_distance'] for r in rows):.3e}")
    return 0


def _config_from_args(args, subcommand):
    return RunConfig(
        subcommand=subcommand,
        tau=args.tau,
        degree_N=args.degree,
        steps_per_segment=args.steps,
        mode=args.mode,
        outdir=args.outdir,
        model_source=args.model_source,
    )


def _write_demo_artifacts(outdir, summary, demo):
    os.makedirs(outdir, exist_ok=True)
    traj = demo["trajectory"]
    write_signal_csv(os.path.join(outdir, "displacement.csv"), traj.times, {"x": traj.states[:, :1]})
    write_signal_csv(os.path.join(outdir, "velocity.csv"), traj.times, {"v": traj.states[:, 1:]})
    write_signal_csv(os.path.join(outdir, "input.csv"), traj.times, {"u": traj.inputs})
    write_bounds_csv(os.path.join(outdir, "bounds.csv"), summary["bounds"])
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)


def _cmd_demo(args):
    config = _config_from_args(args, "demo")
    try:
        summary, checks, demo = run_demo(config)
    except StageError as exc:
        print(f"demo failed: {exc}", file=sys.stderr)
        return 2
    _write_demo_artifacts(config.outdir, summary, demo)
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"artifacts in {config.outdir}")
    return 0 if all(checks.values()) else 1


def _cmd_zoh(args):
    config = _config_from_args(args, "zoh-baseline")
    try:
        summary, zoh, interp = run_zoh_baseline(config)
    except StageError as exc:
        print(f"zoh-baseline failed: {exc}", file=sys.stderr)
        return 2
    os.makedirs(config.outdir, exist_ok=True)
    write_signal_csv(
        os.path.join(config.outdir, "zoh.csv"),
        zoh.times,
        {"x_zoh": zoh.states, "u_zoh": zoh.inputs, "x_interp": interp.states, "u_interp": interp.inputs},
    )
    with open(os.path.join(config.outdir, "zoh_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    for atom in summary["continuous_atoms"]:
        state = "satisfied" if atom["satisfied"] else "VIOLATED"
        print(f"{atom['kind']}{atom['window']} continuous: {state} (robustness {atom['robustness']:.4g})")
    print(f"max |v| under ZOH: {summary['max_abs_velocity']:.4g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sysinterp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def grid(p, defaults=True):
        p.add_argument("--tau", type=float, required=not defaults, default=DEMO_TAU if defaults else None)
        p.add_argument("--degree", type=int, required=not defaults, default=DEMO_DEGREE if defaults else None)

    p = sub.add_parser("quadrature", help="Gauss-Radau nodes and weights as CSV")
    grid(p, defaults=False)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_quadrature)

    p = sub.add_parser("check", help="test whether a continuous system interpolates a discrete model")
    p.add_argument("--system", required=True)
    p.add_argument("--model", required=True)
    grid(p, defaults=False)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("discretize", help="compute an interpolated discrete model")
    p.add_argument("--system", required=True)
    grid(p, defaults=False)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_discretize)

    p = sub.add_parser("plan", help="plan a discrete input sequence for a G/F specification")
    p.add_argument("--model", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--x0", required=True, help="comma-separated initial state")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--ubound", type=float, default=DEMO_UBOUND)
    p.add_argument("--out", default="plan.csv")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("synthesize", help="build the interpolating continuous input")
    p.add_argument("--system", required=True)
    p.add_argument("--model", required=True)
    grid(p, defaults=False)
    p.add_argument("--x0", required=True)
    p.add_argument("--inputs", required=True, help="discrete input CSV (step, u_1..u_m)")
    p.add_argument("--mode", choices=MODES, default="min-norm")
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("simulate", help="simulate a synthesis trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--steps", type=int, default=256)
    p.add_argument("--zoh", action="store_true", help="hold u_d constant instead")
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bounds", help="per-segment inter-sample violation bounds")
    p.add_argument("--trace", required=True)
    p.add_argument("--regions")
    p.add_argument("--subsamples", type=int, default=BOUND_SUBSAMPLES)
    p.add_argument("--out", default="bounds.csv")
    p.set_defaults(func=_cmd_bounds)

    for name, func, help_text in (
        ("demo", _cmd_demo, "double-integrator STL example end to end"),
        ("zoh-baseline", _cmd_zoh, "compare against a zero-order-hold input"),
    ):
        p = sub.add_parser(name, help=help_text)
        grid(p)
        p.add_argument("--steps", type=int, default=256)
        p.add_argument("--mode", choices=MODES, default="min-norm")
        p.add_argument("--model-source", choices=("reference", "min-norm"), default="reference",
                       help="reference model pair or the minimum-norm discretization")
        p.add_argument("--outdir", default="demo_out")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (SysInterpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
