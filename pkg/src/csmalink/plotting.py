"""Figure rendering for report output. Headless only."""

from __future__ import annotations

import math
from collections.abc import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .constellation import Constellation  # noqa: E402
from .mapping import AllocationPlan  # noqa: E402
from .simulate import BerReport  # noqa: E402


def _finite_points(report: BerReport):
    xs, sers, bers, theory = [], [], [], []
    for row in report.aggregate_rows():
        if not math.isfinite(row.snr_db):
            continue
        xs.append(row.snr_db)
        sers.append(row.ser)
        bers.append(row.ber)
        theory.append(row.theory_ser)
    return xs, sers, bers, theory


def _snr_label(mode: str) -> str:
    return "SNR per data bit (dB)" if mode == "databit" else "SNR per symbol (dB)"


def save_ber_figure(reports: Mapping[str, BerReport], path: str) -> None:
    """Semilog error-rate curves, one line pair per named run."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    mode = "symbol"
    for name, report in reports.items():
        xs, sers, bers, _ = _finite_points(report)
        if not xs:
            continue
        mode = report.rows[0].snr_mode
        prefix = f"{name}: " if name else ""
        ax.semilogy(xs, sers, marker="o", label=f"{prefix}SER")
        ax.semilogy(xs, bers, marker="s", linestyle="--", label=f"{prefix}BER")
    ax.set_xlabel(_snr_label(mode))
    ax.set_ylabel("error rate")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_theory_figure(
    curves: Mapping[str, tuple[tuple[float, ...], tuple[float, ...]]],
    path: str,
    snr_mode: str = "symbol",
) -> None:
    """Closed-form curves only: name -> (snr_db axis, values)."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for name, (xs, ys) in curves.items():
        pairs = [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and y > 0]
        if pairs:
            ax.semilogy([p[0] for p in pairs], [p[1] for p in pairs], label=name)
    ax.set_xlabel(_snr_label(snr_mode))
    ax.set_ylabel("error rate")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_constellation_figure(
    constellation: Constellation, path: str, plan: AllocationPlan | None = None
) -> None:
    """Scatter of the constellation, colored by owning user when a plan is given."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    points = constellation.points
    if plan is None:
        ax.scatter(points.real, points.imag, s=12)
    else:
        for user in plan.users:
            subset = points[list(user.codewords)]
            ax.scatter(subset.real, subset.imag, s=14, label=f"user {user.user_id}")
        ax.legend(loc="upper right", fontsize="small")
    if constellation.order <= 64:
        for label in range(constellation.order):
            p = points[label]
            ax.annotate(
                format(label, f"0{constellation.bits_per_symbol}b"),
                (p.real, p.imag),
                textcoords="offset points",
                xytext=(0, 5),
                ha="center",
                fontsize=6,
            )
    ax.set_xlabel("in-phase")
    ax.set_ylabel("quadrature")
    ax.set_aspect("equal")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
