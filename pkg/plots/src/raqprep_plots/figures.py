"""Publication-style figures from raqprep CSV aggregates.

Four figure kinds mirror the experiment plots: strategy alpha curves on a
log step axis, alpha vs pool size, semilog scaling insets, and the paired
haar-vs-2-design comparison with a difference inset. Rendering never
recomputes statistics; it draws exactly the columns the CSV carries.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

FIGURE_KINDS = ("alpha_vs_M", "alpha_vs_poolsize", "scaling_inset", "difference_inset")

_REQUIRED_COLUMNS = {
    "alpha_vs_M": ("strategy", "M_checkpoint", "mean_alpha"),
    "alpha_vs_poolsize": ("strategy", "pool_size", "mean_alpha"),
    "scaling_inset": ("sweep_name", "n", "M_checkpoint", "pool_size"),
    "difference_inset": ("M_checkpoint", "alpha_haar", "alpha_two_design",
                         "abs_difference"),
}

_STYLE = {
    "figure.figsize": (5.2, 3.6),
    "figure.dpi": 160,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}


class RenderError(ValueError):
    """Unusable figure spec or CSV content."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_path: Path
    output_path: Path
    x_scale: Optional[str] = None  # default chosen per kind
    y_scale: Optional[str] = None
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {FIGURE_KINDS}")
        object.__setattr__(self, "csv_path", Path(self.csv_path))
        object.__setattr__(self, "output_path", Path(self.output_path))


def read_rows(path: Path, required: tuple) -> list:
    """Rows as dicts; verifies the header and rejects empty tables."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            rows = list(reader)
    except OSError as exc:
        raise RenderError(f"cannot read CSV {path}: {exc}") from exc
    missing = [col for col in required if col not in header]
    if missing:
        raise RenderError(f"CSV {path} is missing column(s): {', '.join(missing)}")
    if not rows:
        raise RenderError(f"CSV {path} has no data rows")
    return rows


def _float(row: dict, col: str) -> float:
    raw = (row.get(col) or "").strip()
    if not raw:
        raise RenderError(f"empty value in column {col!r}")
    return float(raw)


def _series_by(rows: list, key: str) -> dict:
    groups: dict = {}
    for row in rows:
        groups.setdefault(row[key], []).append(row)
    return {k: sorted(v, key=lambda r: _float(r, "M_checkpoint") if "M_checkpoint" in r else 0)
            for k, v in sorted(groups.items())}


def _errorbar(ax, xs, ys, errs, label):
    if any(e > 0 for e in errs):
        ax.errorbar(xs, ys, yerr=errs, marker="o", markersize=3,
                    linewidth=1.1, capsize=2, label=label)
    else:
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.1, label=label)


def _stderr(row: dict) -> float:
    raw = (row.get("stderr_alpha") or "").strip()
    return float(raw) if raw else 0.0


def _draw_alpha_vs_m(spec: FigureSpec, ax) -> None:
    rows = read_rows(spec.csv_path, _REQUIRED_COLUMNS["alpha_vs_M"])
    for strategy, group in _series_by(rows, "strategy").items():
        group = sorted(group, key=lambda r: _float(r, "M_checkpoint"))
        xs = [_float(r, "M_checkpoint") for r in group]
        ys = [_float(r, "mean_alpha") for r in group]
        errs = [_stderr(r) for r in group]
        _errorbar(ax, xs, ys, errs, strategy)
    ax.set_xscale(spec.x_scale or "log")
    ax.set_xlabel("adaptive steps M")
    ax.set_ylabel(r"mean approximation ratio $\alpha$")
    ax.legend()


def _draw_alpha_vs_poolsize(spec: FigureSpec, ax) -> None:
    rows = read_rows(spec.csv_path, _REQUIRED_COLUMNS["alpha_vs_poolsize"])
    for strategy, group in _series_by(rows, "strategy").items():
        group = sorted(group, key=lambda r: _float(r, "pool_size"))
        xs = [_float(r, "pool_size") for r in group]
        ys = [_float(r, "mean_alpha") for r in group]
        errs = [_stderr(r) for r in group]
        _errorbar(ax, xs, ys, errs, strategy)
    ax.set_xscale(spec.x_scale or "log")
    ax.set_xlabel(r"pool size $|\mathcal{A}|$")
    ax.set_ylabel(r"mean approximation ratio $\alpha$")
    ax.legend()


def _draw_scaling_inset(spec: FigureSpec, ax) -> None:
    rows = read_rows(spec.csv_path, _REQUIRED_COLUMNS["scaling_inset"])
    for sweep_name, group in sorted(
            _series_by(rows, "sweep_name").items()):
        group = sorted(group, key=lambda r: _float(r, "n"))
        xs = [_float(r, "n") for r in group]
        if sweep_name.endswith("pool_star"):
            ys = [_float(r, "pool_size") for r in group]
            label = r"minimal $|\mathcal{A}|$"
        else:
            ys = [_float(r, "M_checkpoint") for r in group]
            label = r"minimal $M$"
        ax.plot(xs, ys, marker="s", markersize=4, linewidth=1.1, label=label)
    ax.set_yscale(spec.y_scale or "log")
    ax.set_xlabel("qubits n")
    ax.set_ylabel("steps / pool size to threshold")
    ax.legend()


def _draw_difference_inset(spec: FigureSpec, ax) -> None:
    rows = read_rows(spec.csv_path, _REQUIRED_COLUMNS["difference_inset"])
    rows = sorted(rows, key=lambda r: _float(r, "M_checkpoint"))
    xs = [_float(r, "M_checkpoint") for r in rows]
    ax.plot(xs, [_float(r, "alpha_haar") for r in rows],
            marker="o", markersize=3, linewidth=1.1, label="Haar")
    ax.plot(xs, [_float(r, "alpha_two_design") for r in rows],
            marker="^", markersize=3, linewidth=1.1, label="2-design")
    ax.set_xscale(spec.x_scale or "log")
    ax.set_xlabel("adaptive steps M")
    ax.set_ylabel(r"mean approximation ratio $\alpha$")
    ax.legend(loc="lower right")
    inset = ax.inset_axes([0.12, 0.58, 0.38, 0.34])
    inset.plot(xs, [_float(r, "abs_difference") for r in rows],
               linewidth=1.0, color="tab:red")
    inset.set_xscale(spec.x_scale or "log")
    inset.set_title(r"$|\alpha_{Haar} - \alpha_{2design}|$", fontsize=7)
    inset.tick_params(labelsize=6)


_DRAWERS = {
    "alpha_vs_M": _draw_alpha_vs_m,
    "alpha_vs_poolsize": _draw_alpha_vs_poolsize,
    "scaling_inset": _draw_scaling_inset,
    "difference_inset": _draw_difference_inset,
}


def render(spec: FigureSpec) -> Path:
    """Draw the figure and write it to spec.output_path.

    Pure function of the CSV: the same input yields the same data series,
    labels, and scales. Nothing is written when the input is unusable.
    """
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        try:
            _DRAWERS[spec.kind](spec, ax)
            if spec.title:
                ax.set_title(spec.title)
            if spec.y_scale and spec.kind != "scaling_inset":
                ax.set_yscale(spec.y_scale)
            spec.output_path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(spec.output_path)
        finally:
            plt.close(fig)
    return spec.output_path


def extract_series(spec: FigureSpec) -> dict:
    """The plotted (label -> (xs, ys)) mapping, for determinism checks."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        try:
            _DRAWERS[spec.kind](spec, ax)
            out = {}
            handles, labels = ax.get_legend_handles_labels()
            for handle, label in zip(handles, labels):
                line = handle if hasattr(handle, "get_xdata") else handle.lines[0]
                out[label] = (tuple(line.get_xdata()), tuple(line.get_ydata()))
            return out
        finally:
            plt.close(fig)
