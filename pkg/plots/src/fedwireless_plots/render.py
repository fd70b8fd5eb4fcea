"""Render fedwireless CSV trajectories into figures.

Two figure kinds, matching the two CSV schemas the simulator emits:

* ``accuracy`` — simulate CSVs (``round,policy,K,selected,test_accuracy,
  mean_loss,mean_q,mean_bits``); one curve per (policy, K) pair.
* ``bound``    — bound/sweep CSVs (``series,round,rho_mean,dist_bound,
  loss_gap_bound``); one curve per series label, optional log y-axis.

Rendering is a pure function of the CSV bytes and the spec: inputs are
never modified, and identical inputs yield identical images (the PNG
writer is told to drop its software metadata so reruns are byte-stable
under a pinned matplotlib).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("accuracy", "bound")

_REQUIRED = {
    "accuracy": ("round", "policy", "K", "test_accuracy"),
    "bound": ("series", "round", "loss_gap_bound"),
}

_AXIS_LABELS = {
    "accuracy": ("round", "test accuracy"),
    "bound": ("round", "loss-gap bound"),
}


@dataclass(frozen=True)
class PlotSpec:
    """What to read, which kind of figure to draw, and where to put it."""

    inputs: tuple[str, ...]
    kind: str
    out: str
    series: tuple[str, ...] = ()
    logy: bool = False
    figsize: tuple[float, float] = (7.0, 4.5)
    dpi: int = 110

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        suffix = Path(self.out).suffix.lower()
        if suffix not in (".png", ".svg"):
            raise ValueError(f"output must end in .png or .svg, got {self.out!r}")


@dataclass
class Series:
    label: str
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)


def _read_rows(path: str, kind: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise ValueError(f"{path}: empty CSV")
        missing = [c for c in _REQUIRED[kind] if c not in header]
        if missing:
            raise ValueError(f"{path}: missing column(s) {missing} for {kind} figure")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _collect(spec: PlotSpec) -> list[Series]:
    table: dict[str, Series] = {}
    for path in spec.inputs:
        for row in _read_rows(path, spec.kind):
            if spec.kind == "accuracy":
                label = f"{row['policy']} (K={row['K']})"
                y = float(row["test_accuracy"])
            else:
                label = row["series"]
                y = float(row["loss_gap_bound"])
            if spec.series and label not in spec.series:
                continue
            series = table.setdefault(label, Series(label=label))
            series.x.append(int(row["round"]))
            series.y.append(y)
    if not table:
        raise ValueError("no series left to plot (check the series filter)")
    return list(table.values())


def render(spec: PlotSpec) -> str:
    """Draw the figure described by ``spec``; returns the output path."""
    all_series = _collect(spec)
    fig, ax = plt.subplots(figsize=spec.figsize, dpi=spec.dpi)
    try:
        for series in all_series:
            ax.plot(series.x, series.y, label=series.label, linewidth=1.5)
        if spec.logy:
            ax.set_yscale("log")
        xlabel, ylabel = _AXIS_LABELS[spec.kind]
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        if Path(spec.out).suffix.lower() == ".png":
            # Drop the writer's Software text chunk so bytes are rerun-stable.
            fig.savefig(spec.out, metadata={"Software": None})
        else:
            fig.savefig(spec.out, metadata={"Date": None})
    finally:
        plt.close(fig)
    return spec.out
