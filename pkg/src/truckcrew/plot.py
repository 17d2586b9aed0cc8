"""Static Gantt rendering of schedules: one lane per driver.

Tasks are coloured by kind, shuttle legs drawn as hatched grey blocks,
days separated by grid lines.  Output format follows the file extension
(SVG by default).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Patch

from .model import Schedule, cost_stage2, shuttle_legs

KIND_COLOR = {"pickup": "#2a9d8f", "delivery": "#e76f51", "trip": "#4a6fa5"}
SHUTTLE_COLOR = "#9a9a9a"


def render_gantt(schedule: Schedule, path: str, title: str | None = None) -> str:
    """Draw the schedule to ``path`` and return the path."""
    inst = schedule.plan.instance
    tasks = schedule.plan.task_by_id
    drivers = [d.id for d in inst.drivers]
    n_hours = 24 * inst.horizon_days

    fig_height = max(2.8, 0.45 * len(drivers) + 1.6)
    fig_width = max(8.0, 1.0 * inst.horizon_days + 4.0)
    fig, ax = plt.subplots(figsize=(fig_width, fig_height))

    for row, driver_id in enumerate(drivers):
        for leg in shuttle_legs(schedule, driver_id):
            ax.barh(
                row,
                leg.end - leg.start,
                left=leg.start,
                height=0.62,
                color=SHUTTLE_COLOR,
                alpha=0.55,
                hatch="//",
                edgecolor="#5a5a5a",
                linewidth=0.4,
            )
        for tid in schedule.routes.get(driver_id, ()):
            task = tasks.get(tid)
            start = schedule.delta.get(tid)
            if task is None or start is None:
                continue
            ax.barh(
                row,
                task.duration,
                left=start,
                height=0.62,
                color=KIND_COLOR.get(task.kind, "#888888"),
                edgecolor="black",
                linewidth=0.4,
            )

    for day in range(inst.horizon_days + 1):
        ax.axvline(24 * day, color="#cccccc", linewidth=0.6, zorder=0)
    ax.set_xlim(0, n_hours)
    ax.set_ylim(-0.6, len(drivers) - 0.4)
    ax.set_yticks(range(len(drivers)))
    ax.set_yticklabels(drivers)
    ax.invert_yaxis()
    ax.set_xlabel("hours from horizon start")
    ax.set_xticks([24 * day for day in range(inst.horizon_days + 1)])
    ax.set_title(title or f"driver schedule (shuttle cost {cost_stage2(schedule):g})")
    ax.legend(
        handles=[
            Patch(color=KIND_COLOR["pickup"], label="pickup"),
            Patch(color=KIND_COLOR["delivery"], label="delivery"),
            Patch(color=KIND_COLOR["trip"], label="trip"),
            Patch(facecolor=SHUTTLE_COLOR, hatch="//", label="shuttle"),
        ],
        loc="upper right",
        fontsize=8,
    )
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
