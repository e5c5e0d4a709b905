"""Report rendering: run summaries, comparison tables and figures.

The CLI report path writes, per run, a trajectory CSV (see
engine.export_csv), a plain-text RunReport, matplotlib figures of the
constraint violation and state evolution, and a comparison table when
several controllers are requested.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import engine
from .benchmarks import BenchmarkCase


@dataclass
class ComparisonRow:
    controller: str
    reaching_time: Optional[float]
    feasibility: str          # "finite" | "asymptotic" | "failed"
    final_objective: Optional[float]
    bound_satisfied: Optional[bool]


def classify_feasibility(traj: engine.Trajectory, reach: Optional[float]) -> str:
    """finite: settled within the run; asymptotic: the violation tail sits a
    decade below its start without settling; failed: diverged or not
    shrinking (the tail max guards against oscillating divergence)."""
    if traj.diverged:
        return "failed"
    if reach is not None:
        return "finite"
    v = traj.violation_inf()
    tail = v[-max(1, v.size // 10):]
    if np.max(tail) < 0.1 * max(v[0], 1e-300):
        return "asymptotic"
    return "failed"


def comparison_row(name: str, traj: engine.Trajectory, report: engine.RunReport,
                   final_objective: Optional[float]) -> ComparisonRow:
    return ComparisonRow(
        controller=name,
        reaching_time=report.reaching_time_empirical,
        feasibility=classify_feasibility(traj, report.reaching_time_empirical),
        final_objective=final_objective,
        bound_satisfied=report.bound_satisfied,
    )


def _fmt(v, digits=6) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def format_comparison(rows: list[ComparisonRow]) -> str:
    headers = ["controller", "reaching_time", "feasibility", "final_objective",
               "bound_satisfied"]
    table = [[r.controller, _fmt(r.reaching_time), r.feasibility,
              _fmt(r.final_objective), _fmt(r.bound_satisfied)] for r in rows]
    widths = [max(len(h), *(len(row[i]) for row in table)) if table else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in table:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def write_comparison_csv(rows: list[ComparisonRow], path) -> None:
    with open(path, "w") as f:
        f.write("controller,reaching_time,feasibility,final_objective,"
                "bound_satisfied\n")
        for r in rows:
            f.write(f"{r.controller},{_fmt(r.reaching_time, 17)},{r.feasibility},"
                    f"{_fmt(r.final_objective, 17)},{_fmt(r.bound_satisfied)}\n")


def write_run_report(report: engine.RunReport, path, header: dict) -> None:
    """Structured plain-text summary, one `key = value` per line."""
    with open(path, "w") as f:
        for k, v in header.items():
            f.write(f"{k} = {_fmt(v, 12)}\n")
        f.write(f"reaching_time_empirical = {_fmt(report.reaching_time_empirical, 12)}\n")
        f.write(f"reaching_time_bound = {_fmt(report.reaching_time_bound, 12)}\n")
        f.write(f"bound_satisfied = {_fmt(report.bound_satisfied)}\n")
        f.write(f"max_violation_after_reach = {_fmt(report.max_violation_after_reach, 12)}\n")
        f.write(f"chattering_amplitude = {_fmt(report.chattering_amplitude, 12)}\n")
        f.write(f"final_distance_to_optimum = {_fmt(report.final_distance_to_optimum, 12)}\n")
        f.write(f"diverged = {_fmt(report.diverged)}\n")


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

def render_violation_figure(trajs: dict[str, engine.Trajectory], path,
                            title: str = "") -> None:
    """Constraint violation ||h(x(t))||_inf per controller, log scale."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, traj in trajs.items():
        v = np.maximum(traj.violation_inf(), 1e-18)
        ax.semilogy(traj.times, v, label=name, lw=1.2)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(r"$\|h(x(t))\|_\infty$")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_state_figure(trajs: dict[str, engine.Trajectory],
                        case: Optional[BenchmarkCase], path) -> None:
    """State evolution; planar problems get a path plot with the goal and
    obstacle discs, higher dimensions a time-series panel."""
    first = next(iter(trajs.values()))
    n = first.states.shape[1]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if n == 2:
        for name, traj in trajs.items():
            ax.plot(traj.states[:, 0], traj.states[:, 1], label=name, lw=1.2)
            ax.plot(traj.states[0, 0], traj.states[0, 1], "ko", ms=4)
        if case is not None and case.goal_point is not None:
            ax.plot(case.goal_point[0], case.goal_point[1], "r*", ms=12,
                    label="goal")
        if case is not None and case.name == "obstacle_course":
            from .benchmarks import OBSTACLE_CENTERS, SAFETY_RADIUS
            for c in OBSTACLE_CENTERS:
                ax.add_patch(plt.Circle(c, SAFETY_RADIUS, color="gray",
                                        alpha=0.4))
        ax.set_xlabel("x_1")
        ax.set_ylabel("x_2")
        ax.set_aspect("equal", adjustable="datalim")
    else:
        for name, traj in trajs.items():
            for i in range(min(n, 6)):
                ax.plot(traj.times, traj.states[:, i], lw=0.9,
                        label=f"{name} x_{i + 1}" if i < 3 else None)
        ax.set_xlabel("t [s]")
        ax.set_ylabel("states")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_figures(trajs: dict[str, engine.Trajectory],
                   case: Optional[BenchmarkCase], outdir) -> list[str]:
    """Render the standard figure set next to the CSV output; returns the
    written paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    p = os.path.join(outdir, "violations.png")
    render_violation_figure(trajs, p, title=case.name if case else "")
    paths.append(p)
    p = os.path.join(outdir, "states.png")
    render_state_figure(trajs, case, p)
    paths.append(p)
    return paths
