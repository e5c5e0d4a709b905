"""Command-line entry point.

Subcommands:
  run    -- simulate one benchmark (or a config-defined problem) with one
            or more controllers; writes trajectory CSVs, run reports,
            figures and a comparison table; exit 0 iff all expected
            metrics pass.
  sweep  -- repeat a run over a list of values for one numeric parameter
            and aggregate the metrics into a CSV.
  list   -- enumerate benchmarks and their controllers.

Configuration is flat `key = value` text with dotted sections
(`controller.smc.K = 20`); CLI flags override the file, and environment
variables with the SLIDEOPT_ prefix override both (dots spelled as
double underscores, e.g. SLIDEOPT_INTEGRATOR__DT=1e-3).
"""

from __future__ import annotations

import argparse
import dataclasses
import inspect
import os
import sys

import numpy as np

from . import benchmarks as bm
from . import controllers as ctl
from . import disturbances as dist
from . import engine, report
from .problem import ProblemSpec

ENV_PREFIX = "SLIDEOPT_"


# ---------------------------------------------------------------------------
# Configuration handling
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines; '#' starts a comment."""
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {ln}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for k, v in environ.items():
        if k.startswith(ENV_PREFIX):
            key = k[len(ENV_PREFIX):].lower().replace("__", ".")
            out[key] = v
    return out


def _parse_scalar(s: str) -> float:
    return float(s)


def _parse_vector(s: str) -> np.ndarray:
    return np.array([float(v) for v in s.replace(";", ",").split(",") if v.strip()])


def _parse_matrix(s: str) -> np.ndarray:
    rows = [r for r in s.split(";") if r.strip()]
    return np.array([[float(v) for v in r.split(",")] for r in rows])


def load_config(path: str | None, cli_pairs: dict, environ=None) -> dict:
    cfg = {}
    if path:
        with open(path) as f:
            cfg.update(parse_config_text(f.read()))
    cfg.update(env_overrides(environ))
    cfg.update({k: v for k, v in cli_pairs.items() if v is not None})
    return cfg


# ---------------------------------------------------------------------------
# Problem/benchmark assembly
# ---------------------------------------------------------------------------

def problem_from_config(cfg: dict) -> bm.BenchmarkCase:
    """User-defined quadratic problem with linear constraints:
    problem.Q, problem.c, problem.A, problem.b (matrix rows ';'-separated),
    controlled by an SMC law with controller.K/eps/smoothing."""
    Q = _parse_matrix(cfg["problem.Q"])
    c = _parse_vector(cfg.get("problem.c", ""))
    n = Q.shape[0]
    if c.size == 0:
        c = np.zeros(n)
    A = _parse_matrix(cfg["problem.A"])
    b = _parse_vector(cfg.get("problem.b", ""))
    m = A.shape[0]
    if b.size == 0:
        b = np.zeros(m)
    spec = ProblemSpec(
        dim_x=n, dim_h=m,
        objective=lambda x: 0.5 * float(x @ Q @ x) + float(c @ x),
        gradient=lambda x: Q @ x + c,
        constraints=lambda x: A @ x + b,
        jacobian=lambda x: A,
        hessian_phi=lambda x: Q,
        name="custom",
        linear_constraints=True,
        constant_jacobian=True,
    )
    K = float(cfg.get("controller.K", 1.0))
    smoothing = cfg.get("controller.smoothing", "sign")
    eps = float(cfg.get("controller.eps", 1e-3))
    gains = ctl.SmcGains(K=np.full(m, K), smoothing=smoothing, eps=eps)
    x0 = _parse_vector(cfg.get("problem.x0", "")) if cfg.get("problem.x0") \
        else np.ones(n)
    return bm.BenchmarkCase(
        name="custom",
        spec=spec,
        controllers={"smc": gains},
        default_controller="smc",
        disturbance=dist.none(),
        x0_rule=lambda seed: (x0.copy(), np.zeros(m)),
        integrator=engine.IntegratorConfig(),
        optimum=None,
        goal_point=None,
    )


def build_case(cfg: dict) -> bm.BenchmarkCase:
    name = cfg.get("benchmark")
    if not name:
        if "problem.Q" in cfg:
            return problem_from_config(cfg)
        raise ValueError("no benchmark selected: pass --benchmark or define "
                         "a problem.* section")
    if os.path.isfile(name):
        with open(name) as f:
            sub = parse_config_text(f.read())
        sub.update({k: v for k, v in cfg.items() if k not in sub})
        return problem_from_config(sub)
    builder = bm.BENCHMARKS.get(name)
    if builder is None:
        raise ValueError(f"unknown benchmark {name!r}; valid options: "
                         f"{sorted(bm.BENCHMARKS)}")
    sig = inspect.signature(builder)
    kwargs = {}
    for pname, param in sig.parameters.items():
        key = f"benchmark.{pname}"
        if key in cfg:
            kwargs[pname] = type(param.default)(cfg[key]) \
                if param.default is not None and not isinstance(param.default, bool) \
                else cfg[key]
        elif pname in cfg:   # short form: K = 20, x0 = 1
            kwargs[pname] = type(param.default)(cfg[pname]) \
                if param.default is not None else cfg[pname]
    return builder(**kwargs)


def apply_disturbance_choice(case: bm.BenchmarkCase, cfg: dict) -> dist.DisturbanceSpec:
    choice = cfg.get("disturbance", "default")
    if choice in ("default", None):
        return case.disturbance
    if choice == "none":
        return dist.none()
    if choice == "matched":
        if case.disturbance.matched is None:
            raise ValueError(f"benchmark {case.name!r} has no matched "
                             "disturbance configured")
        return dist.DisturbanceSpec(matched=case.disturbance.matched,
                                    seed=case.disturbance.seed)
    if choice == "noise":
        delta = float(cfg.get("disturbance.delta", 0.05))
        seed = int(cfg.get("disturbance.seed", 0))
        noise_fn = dist.uniform_noise_fn(delta, case.spec.dim_h, seed)
        return dist.DisturbanceSpec(matched=case.disturbance.matched,
                                    noise=dist.MeasurementNoise(noise_fn, delta),
                                    seed=seed)
    raise ValueError(f"unknown disturbance choice {choice!r}; valid: "
                     "default, none, matched, noise")


def apply_integrator_overrides(icfg: engine.IntegratorConfig, cfg: dict):
    kwargs = dataclasses.asdict(icfg)
    if "integrator.method" in cfg:
        kwargs["method"] = cfg["integrator.method"]
    if "integrator.dt" in cfg:
        kwargs["dt"] = float(cfg["integrator.dt"])
    if "integrator.t_final" in cfg:
        kwargs["t_final"] = float(cfg["integrator.t_final"])
    if "integrator.record_stride" in cfg:
        kwargs["record_stride"] = int(cfg["integrator.record_stride"])
    return engine.IntegratorConfig(**kwargs)


# ---------------------------------------------------------------------------
# Metric evaluation
# ---------------------------------------------------------------------------

def evaluate_expected(case: bm.BenchmarkCase, rep: engine.RunReport,
                      traj: engine.Trajectory) -> list[tuple[str, float, bool]]:
    """Check the benchmark's expected metrics; returns (name, value, ok)."""
    results = []
    for metric, (center, halfwidth) in case.expected.items():
        if metric == "reaching_time":
            value = rep.reaching_time_empirical
        elif metric == "final_distance":
            value = rep.final_distance_to_optimum
        elif metric == "final_max_violation":
            value = float(traj.violation_inf()[-1])
        elif metric == "final_estimate_error":
            target = case.goal_point
            value = float(np.max(np.abs(traj.final_state() - target)))
        else:
            raise KeyError(f"unknown expected metric {metric!r}")
        ok = value is not None and abs(value - center) <= halfwidth
        results.append((metric, value, ok))
    return results


def run_one(case: bm.BenchmarkCase, controller_name: str,
            disturbance: dist.DisturbanceSpec, icfg: engine.IntegratorConfig,
            seed: int, outdir: str, figures: bool = True):
    controller = case.controller(controller_name)
    x0, lam0 = case.x0_rule(seed)
    traj = engine.simulate(case.spec, controller, disturbance, x0, lam0, icfg)
    bound = case.reach_bound(controller_name, x0) \
        if isinstance(controller, ctl.SmcGains) else None
    target = case.optimum.x_star if case.optimum is not None else case.goal_point
    rep = engine.run_report(traj, case.settle_tol, case.dwell, bound, target)

    os.makedirs(outdir, exist_ok=True)
    stem = f"{case.name}_{controller_name}_seed{seed}"
    engine.export_csv(traj, os.path.join(outdir, stem + ".csv"))
    report.write_run_report(rep, os.path.join(outdir, stem + ".txt"), header={
        "benchmark": case.name,
        "controller": controller_name,
        "seed": seed,
        "disturbance": disturbance.variant,
        "dt": icfg.dt,
        "t_final": icfg.t_final,
    })
    return traj, rep


def cmd_run(cfg: dict) -> int:
    case = build_case(cfg)
    disturbance = apply_disturbance_choice(case, cfg)
    icfg = apply_integrator_overrides(case.integrator, cfg)
    outdir = cfg.get("output_dir", "slideopt_out")
    figures = str(cfg.get("figures", "true")).lower() not in ("false", "0", "no")

    names = [c.strip() for c in
             str(cfg.get("controllers", cfg.get("controller",
                                                case.default_controller))).split(",")]
    seeds = [int(s) for s in str(cfg.get("seeds", cfg.get("seed", "0"))).split(",")]

    status = 0
    rows = []
    trajs_for_fig = {}
    for name in names:
        for seed in seeds:
            try:
                traj, rep = run_one(case, name, disturbance, icfg, seed,
                                    outdir, figures)
            except KeyError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
            trajs_for_fig[f"{name}_s{seed}" if len(seeds) > 1 else name] = traj
            final_obj = None if traj.diverged else case.spec.value(traj.final_state())
            rows.append(report.comparison_row(
                f"{name} (seed {seed})" if len(seeds) > 1 else name,
                traj, rep, final_obj))
            if traj.diverged:
                print(f"note: {name} seed {seed} diverged at "
                      f"t={traj.divergence_time:.4g} s")
            if name == case.default_controller:
                for metric, value, ok in evaluate_expected(case, rep, traj):
                    tag = "PASS" if ok else "FAIL"
                    print(f"[{tag}] {case.name}/{name} seed {seed} {metric} = "
                          f"{value if value is not None else 'none'}")
                    if not ok:
                        status = 1

    if len(rows) > 1:
        table = report.format_comparison(rows)
        print(table, end="")
        with open(os.path.join(outdir, f"{case.name}_comparison.txt"), "w") as f:
            f.write(table)
        report.write_comparison_csv(
            rows, os.path.join(outdir, f"{case.name}_comparison.csv"))
    if figures:
        report.render_figures(trajs_for_fig, case, outdir)
    print(f"outputs written to {outdir}/")
    return status


def cmd_sweep(cfg: dict, axis: str, values: list[str]) -> int:
    if not values:
        print("error: empty sweep values", file=sys.stderr)
        return 2
    outdir = cfg.get("output_dir", "slideopt_out")
    os.makedirs(outdir, exist_ok=True)
    rows = []
    status = 0
    for v in values:
        sub = dict(cfg)
        sub[axis] = v
        sub["output_dir"] = os.path.join(outdir, f"{axis.replace('.', '_')}_{v}")
        case = build_case(sub)
        disturbance = apply_disturbance_choice(case, sub)
        icfg = apply_integrator_overrides(case.integrator, sub)
        name = sub.get("controller", case.default_controller)
        seed = int(sub.get("seed", 0))
        traj, rep = run_one(case, name, disturbance, icfg, seed,
                            sub["output_dir"],
                            figures=str(sub.get("figures", "true")).lower()
                            not in ("false", "0", "no"))
        chat = rep.chattering_amplitude
        rows.append((float(v), rep.reaching_time_empirical, chat,
                     rep.final_distance_to_optimum, rep.bound_satisfied))
        for metric, value, ok in evaluate_expected(case, rep, traj):
            if not ok:
                status = 1
    agg = os.path.join(outdir, "sweep.csv")
    with open(agg, "w") as f:
        f.write(f"{axis},reaching_time,chattering_amplitude,"
                "final_distance,bound_satisfied\n")
        for row in rows:
            f.write(",".join("none" if c is None else
                             (str(c).lower() if isinstance(c, bool) else f"{c:.17g}")
                             for c in row) + "\n")
    print(f"sweep aggregate written to {agg}")
    return status


def cmd_list() -> int:
    for name, builder in sorted(bm.BENCHMARKS.items()):
        case = builder()
        marks = ", ".join(sorted(case.controllers))
        print(f"{name}: controllers [{marks}], default {case.default_controller}, "
              f"disturbance {case.disturbance.variant}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="slideopt",
        description="Sliding-mode constrained-optimization benchmark harness")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--benchmark", help="benchmark name or problem file")
        sp.add_argument("--controller", help="controller name")
        sp.add_argument("--controllers", help="comma-separated controller names")
        sp.add_argument("--disturbance",
                        help="default | none | matched | noise")
        sp.add_argument("--dt", help="integrator step size")
        sp.add_argument("--t-final", dest="t_final", help="simulation horizon")
        sp.add_argument("--method", help="euler | rk4")
        sp.add_argument("--seed", help="run seed")
        sp.add_argument("--seeds", help="comma-separated run seeds")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
        sp.add_argument("--K", help="benchmark gain override")
        sp.add_argument("--x0", help="benchmark initial-state override")
        sp.add_argument("--w", help="example1 curvature override")
        sp.add_argument("--eta-max", dest="eta_max",
                        help="obstacle disturbance bound override")

    pr = sub.add_parser("run", help="run one benchmark")
    add_common(pr)

    ps = sub.add_parser("sweep", help="sweep one numeric parameter")
    add_common(ps)
    ps.add_argument("--axis", required=True,
                    help="config key to sweep, e.g. integrator.dt or K")
    ps.add_argument("--values", required=True,
                    help="comma-separated values")

    sub.add_parser("list", help="list benchmarks and controllers")
    return p


def _collect_cli_pairs(args) -> dict:
    pairs = {
        "benchmark": args.benchmark,
        "controller": args.controller,
        "controllers": args.controllers,
        "disturbance": args.disturbance,
        "integrator.dt": args.dt,
        "integrator.t_final": args.t_final,
        "integrator.method": args.method,
        "seed": args.seed,
        "seeds": args.seeds,
        "output_dir": args.out,
        "K": args.K,
        "x0": args.x0,
        "w": args.w,
        "eta_max": args.eta_max,
    }
    if args.no_figures:
        pairs["figures"] = "false"
    return pairs


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()
    try:
        cfg = load_config(args.config, _collect_cli_pairs(args))
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.axis,
                             [v for v in args.values.split(",") if v.strip()])
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
