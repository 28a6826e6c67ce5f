"""Time-series figures rendered from simulation logs.

Plotting is a pure view of the log: it never changes metrics or state.
Output is self-contained SVG with hashing salted for reproducible bytes.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "evysc"

import matplotlib.pyplot as plt

from .engine import SimulationLog


def _axes(fig_height: float = 9.0):
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8.0, fig_height))
    axes[0].set_ylabel("yaw rate (rad/s)")
    axes[1].set_ylabel("sideslip (rad)")
    axes[2].set_ylabel("commands")
    axes[2].set_xlabel("time (s)")
    return fig, axes


def _draw(axes, log: SimulationLog, label: str = "", dashed: bool = False):
    t = log.col("t")
    style = "--" if dashed else "-"
    suffix = f" [{label}]" if label else ""
    axes[0].plot(t, log.col("r"), style, label="r" + suffix)
    axes[0].plot(t, log.col("r_limited"), ":", label="r ref" + suffix)
    axes[1].plot(t, log.col("beta"), style, label="beta" + suffix)
    axes[1].plot(t, log.col("beta_hat"), ":", label="beta est" + suffix)
    axes[2].plot(t, [m / 1000.0 for m in log.col("M")], style, label="M (kN*m)" + suffix)
    tb = [sum(vals) / 1000.0 for vals in zip(log.col("T_b_FL"), log.col("T_b_FR"),
                                             log.col("T_b_RL"), log.col("T_b_RR"))]
    axes[2].plot(t, tb, ":", label="brake (kN*m)" + suffix)
    axes[2].plot(t, [m / 100.0 for m in log.col("motor_torque")], "-.",
                 label="motor (hN*m)" + suffix)


def _save(fig, axes, path):
    for ax in axes:
        ax.legend(loc="upper right", fontsize=7)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_log(log: SimulationLog, path) -> None:
    """Yaw rate vs references, sideslip true vs estimated, and commands."""
    fig, axes = _axes()
    _draw(axes, log)
    _save(fig, axes, path)


def plot_overlay(log_a: SimulationLog, log_b: SimulationLog,
                 labels: tuple[str, str], path) -> None:
    """Two runs on shared axes for side-by-side comparison."""
    fig, axes = _axes()
    _draw(axes, log_a, labels[0])
    _draw(axes, log_b, labels[1], dashed=True)
    _save(fig, axes, path)
