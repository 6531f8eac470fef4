"""Figure construction from harness CSV output files.

Three figure kinds are supported:

``decay-loglog``
    One log-log curve per norm column of a decay CSV
    (``t,u_k0..u_k3,tau_k0..tau_k2``), with a dashed reference line per
    curve drawn at the declared target slope and anchored to the final
    data point.
``independence-overlay``
    The same curves overlaid for several decay CSVs (e.g. a viscosity
    sweep), one subplot per norm column.
``bounds-heatmap``
    Kernel/bound ratio heatmaps over the (r, t) grid, read from the
    long-format ``bound,r,t,ratio`` CSV, one subplot per bound.

Rendering never alters the data: every plotted curve carries the CSV
values verbatim (see ``extract_points``).
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import EmptySeries, MissingColumn, SpecError

__all__ = [
    "DECAY_COLUMNS",
    "TARGET_SLOPES",
    "FigureSpec",
    "read_csv_columns",
    "build_figure",
    "extract_points",
    "render",
]

KINDS = ("decay-loglog", "independence-overlay", "bounds-heatmap")

DECAY_COLUMNS = ("u_k0", "u_k1", "u_k2", "u_k3", "tau_k0", "tau_k1", "tau_k2")

# Theoretical log-log decay slopes: -3/4 - k/2 for u, -5/4 - k/2 for tau.
TARGET_SLOPES = {
    **{f"u_k{k}": -0.75 - 0.5 * k for k in range(4)},
    **{f"tau_k{k}": -1.25 - 0.5 * k for k in range(3)},
}

_CANVAS = {"decay-loglog": (6.4, 4.8),
           "independence-overlay": (12.8, 7.2),
           "bounds-heatmap": (12.8, 7.2)}


@dataclass(frozen=True)
class FigureSpec:
    """Declarative description of one figure."""

    kind: str
    inputs: tuple
    output: str
    columns: tuple = DECAY_COLUMNS
    slopes: dict = field(default_factory=lambda: dict(TARGET_SLOPES))
    labels: tuple = ()
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SpecError("figure spec lists no input files")
        if self.labels and len(self.labels) != len(self.inputs):
            raise SpecError("labels do not match inputs one-to-one")

    @classmethod
    def from_dict(cls, doc: dict) -> "FigureSpec":
        try:
            kind = doc["kind"]
            inputs = tuple(doc["inputs"])
            output = doc["output"]
        except KeyError as exc:
            raise SpecError(f"figure spec is missing key {exc}") from None
        kwargs = {}
        if "columns" in doc:
            kwargs["columns"] = tuple(doc["columns"])
        if "slopes" in doc:
            kwargs["slopes"] = {k: float(v) for k, v in doc["slopes"].items()}
        if "labels" in doc:
            kwargs["labels"] = tuple(doc["labels"])
        if "title" in doc:
            kwargs["title"] = str(doc["title"])
        return cls(kind, inputs, output, **kwargs)

    def input_labels(self) -> tuple:
        return self.labels or tuple(Path(p).stem for p in self.inputs)


def read_csv_columns(path, required=()) -> dict:
    """Read a harness CSV into {column: float array}; validate columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySeries(f"{path}: no header") from None
        rows = [row for row in reader if row]
    for name in required:
        if name not in header:
            raise MissingColumn(f"{path}: no column {name!r}")
    if not rows:
        raise EmptySeries(f"{path}: no data rows")
    data = np.array(rows, dtype=object)
    out = {}
    for j, name in enumerate(header):
        try:
            out[name] = data[:, j].astype(float)
        except ValueError:
            out[name] = data[:, j].astype(str)
    return out


def _decay_axes(ax, spec: FigureSpec, path, label_prefix=""):
    cols = read_csv_columns(path, required=("t", *spec.columns))
    t = cols["t"]
    for name in spec.columns:
        ax.plot(t, cols[name], label=f"{label_prefix}{name}")
    return t, cols


def _reference_lines(ax, spec: FigureSpec, t, cols):
    for name in spec.columns:
        slope = spec.slopes.get(name)
        if slope is None:
            continue
        anchor = cols[name][-1]
        ax.plot(t, anchor * (t / t[-1]) ** slope, linestyle="--",
                linewidth=0.8, color="0.4", label=f"ref:{name}")


def _build_decay(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=_CANVAS[spec.kind])
    t, cols = _decay_axes(ax, spec, spec.inputs[0])
    _reference_lines(ax, spec, t, cols)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize="small", ncol=2)
    ax.set_title(spec.title or Path(spec.inputs[0]).stem)
    return fig


def _build_overlay(spec: FigureSpec):
    n = len(spec.columns)
    ncols = math.ceil(math.sqrt(n))
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=_CANVAS[spec.kind],
                             squeeze=False)
    labels = spec.input_labels()
    for i, name in enumerate(spec.columns):
        ax = axes[i // ncols][i % ncols]
        for label, path in zip(labels, spec.inputs):
            cols = read_csv_columns(path, required=("t", name))
            ax.plot(cols["t"], cols[name], label=f"{label}:{name}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_title(name, fontsize="small")
        ax.legend(fontsize="x-small")
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].set_axis_off()
    fig.suptitle(spec.title or "rate independence overlay")
    fig.tight_layout()
    return fig


def _build_heatmap(spec: FigureSpec):
    cols = read_csv_columns(spec.inputs[0],
                            required=("bound", "r", "t", "ratio"))
    names = list(dict.fromkeys(cols["bound"]))
    ncols = math.ceil(math.sqrt(len(names)))
    nrows = math.ceil(len(names) / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=_CANVAS[spec.kind],
                             squeeze=False)
    for i, name in enumerate(names):
        ax = axes[i // ncols][i % ncols]
        mask = cols["bound"] == name
        rg = np.unique(cols["r"][mask])
        tg = np.unique(cols["t"][mask])
        grid = np.full((rg.size, tg.size), np.nan)
        ri = np.searchsorted(rg, cols["r"][mask])
        ti = np.searchsorted(tg, cols["t"][mask])
        grid[ri, ti] = cols["ratio"][mask]
        mesh = ax.pcolormesh(rg, tg, grid.T, shading="nearest")
        ax.set_xscale("log")
        ax.set_xlabel("r")
        ax.set_ylabel("t")
        ax.set_title(name, fontsize="small")
        fig.colorbar(mesh, ax=ax)
    for j in range(len(names), nrows * ncols):
        axes[j // ncols][j % ncols].set_axis_off()
    fig.suptitle(spec.title or "kernel/bound ratios")
    fig.tight_layout()
    return fig


_BUILDERS = {"decay-loglog": _build_decay,
             "independence-overlay": _build_overlay,
             "bounds-heatmap": _build_heatmap}


def build_figure(spec: FigureSpec):
    """Construct the matplotlib Figure for a spec without writing files."""
    return _BUILDERS[spec.kind](spec)


def extract_points(fig) -> dict:
    """{line label: (x array, y array)} for every data line in a figure.

    Reference lines (labels starting with ``ref:``) are excluded; the
    remaining arrays are the plotted values, byte-for-byte as read from
    the CSV inputs.
    """
    out = {}
    for ax in fig.get_axes():
        for line in ax.get_lines():
            label = line.get_label()
            if label.startswith("ref:") or label.startswith("_"):
                continue
            out[label] = (np.asarray(line.get_xdata()),
                          np.asarray(line.get_ydata()))
    return out


def render(spec: FigureSpec) -> list:
    """Write <output>.png and <output>.svg; return the paths written."""
    plt.rcParams["svg.hashsalt"] = "oldroyd-plots"
    fig = build_figure(spec)
    stem = Path(spec.output)
    stem.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix, metadata in ((".png", None), (".svg", {"Date": None})):
        path = stem.with_suffix(suffix)
        fig.savefig(path, dpi=150, metadata=metadata)
        written.append(path)
    plt.close(fig)
    return written
