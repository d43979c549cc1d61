"""Build and render figures from records CSV files.

Three kinds:

- ``dt_boxplot``: discovery-time boxes per theta, one panel per b row.
- ``mean_median_lines``: mean and median discovery time vs theta, one pair
  of lines per b row.
- ``emd_boxplot``: distance boxes per theta, paired by embedding kind.

``build`` returns the matplotlib Figure plus the plotted-values dict;
``render`` writes the image and the ``<out>.values.json`` sidecar. All
validation happens before any file is touched, so a failed render leaves
nothing behind.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from matplotlib.figure import Figure

KINDS = ("dt_boxplot", "mean_median_lines", "emd_boxplot")

# columns each kind reads: grouping keys first, then the value column
_COLUMNS = {
    "dt_boxplot": (("b", "theta"), "discovery_time"),
    "mean_median_lines": (("b", "theta"), "discovery_time"),
    "emd_boxplot": (("theta", "kind"), "emd"),
}


class FigureError(ValueError):
    """Unusable figure request: bad kind, missing columns, nothing to plot."""


@dataclass(frozen=True)
class FigureSpec:
    """What to plot and where to put it.

    records may name several CSV files; their rows are concatenated. The
    grouping keys default per kind and every referenced column must exist
    in each input file.
    """

    records: tuple
    kind: str
    out: str
    group_by: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
        paths = (self.records,) if isinstance(self.records, str) \
            else tuple(self.records)
        if not paths:
            raise FigureError("at least one records file is required")
        object.__setattr__(self, "records", paths)
        if not self.group_by:
            object.__setattr__(self, "group_by", _COLUMNS[self.kind][0])

    @property
    def value_column(self) -> str:
        return _COLUMNS[self.kind][1]


def _num(s: str) -> str:
    """Canonical group label: '0.30' and '0.3' collapse to '0.3'."""
    return repr(float(s))


def _read_rows(spec: FigureSpec) -> list:
    needed = set(spec.group_by) | {spec.value_column}
    if spec.kind in ("dt_boxplot", "mean_median_lines"):
        needed.add("censored")
    rows = []
    for path in spec.records:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            cols = set(reader.fieldnames or ())
            missing = sorted(needed - cols)
            if missing:
                raise FigureError(
                    f"{path}: missing required column(s) {', '.join(missing)}")
            rows.extend(reader)
    if not rows:
        raise FigureError("no rows to plot")
    return rows


def _group_dts(rows, spec):
    """(b, theta) -> non-censored discovery times, keeping censored counts."""
    b_key, t_key = spec.group_by
    groups: dict = {}
    for r in rows:
        key = (_num(r[b_key]), _num(r[t_key]))
        cell = groups.setdefault(key, {"values": [], "censored": 0})
        if r[spec.value_column] != "":
            cell["values"].append(float(r[spec.value_column]))
        if int(r.get("censored", 0) or 0):
            cell["censored"] += 1
    for (b, t), cell in groups.items():
        if not cell["values"]:
            raise FigureError(f"empty group after filtering: "
                              f"{b_key}={b}, {t_key}={t} has no "
                              f"uncensored values")
    return groups


def _sorted_levels(keys, idx):
    return sorted({k[idx] for k in keys}, key=float)


def _build_dt_boxplot(rows, spec):
    groups = _group_dts(rows, spec)
    bs = _sorted_levels(groups, 0)
    thetas = _sorted_levels(groups, 1)
    panels = []
    fig = Figure(figsize=(7.0, 2.2 * len(bs)))
    axes = fig.subplots(len(bs), 1, sharex=True, squeeze=False)[:, 0]
    for ax, b in zip(axes, bs):
        boxes = []
        for t in thetas:
            cell = groups.get((b, t))
            if cell is None:
                continue
            boxes.append({"theta": t, "values": cell["values"],
                          "censored": cell["censored"]})
        ax.boxplot([box["values"] for box in boxes],
                   tick_labels=[box["theta"] for box in boxes])
        ax.set_ylabel("discovery time")
        ax.set_title(f"b = {b}", fontsize=9, loc="left")
        panels.append({"b": b, "boxes": boxes})
    axes[-1].set_xlabel("theta")
    fig.suptitle("Discovery time by theta")
    fig.tight_layout()
    values = {"kind": spec.kind, "panels": panels}
    return fig, values


def _build_mean_median_lines(rows, spec):
    groups = _group_dts(rows, spec)
    bs = _sorted_levels(groups, 0)
    lines = []
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    for b in bs:
        thetas = sorted((t for bb, t in groups if bb == b), key=float)
        means = []
        medians = []
        counts = []
        for t in thetas:
            vals = sorted(groups[(b, t)]["values"])
            n = len(vals)
            means.append(sum(vals) / n)
            mid = n // 2
            medians.append(vals[mid] if n % 2 else
                           (vals[mid - 1] + vals[mid]) / 2.0)
            counts.append(n)
        x = [float(t) for t in thetas]
        ax.plot(x, means, marker="o", label=f"b={b} mean")
        ax.plot(x, medians, marker="s", linestyle="--", label=f"b={b} median")
        lines.append({"b": b, "thetas": thetas, "mean": means,
                      "median": medians, "count": counts})
    ax.set_xlabel("theta")
    ax.set_ylabel("discovery time")
    ax.legend(fontsize=8)
    fig.suptitle("Mean and median discovery time vs theta")
    fig.tight_layout()
    return fig, {"kind": spec.kind, "lines": lines}


def _build_emd_boxplot(rows, spec):
    t_key, k_key = spec.group_by
    groups: dict = {}
    for r in rows:
        key = (_num(r[t_key]), r[k_key])
        groups.setdefault(key, []).append(float(r[spec.value_column]))
    thetas = _sorted_levels(groups, 0)
    kinds = sorted({k for _, k in groups})
    entries = []
    data = []
    positions = []
    labels = []
    width = 0.8 / max(1, len(kinds))
    for i, t in enumerate(thetas):
        for j, k in enumerate(kinds):
            vals = groups.get((t, k))
            if vals is None:
                raise FigureError(f"empty group after filtering: "
                                  f"theta={t} has no {k} rows")
            entries.append({"theta": t, "kind": k, "values": vals})
            data.append(vals)
            positions.append(i + (j - (len(kinds) - 1) / 2.0) * width)
            labels.append(k)
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    bplot = ax.boxplot(data, positions=positions, widths=width * 0.9,
                       patch_artist=True)
    palette = ("#7fb3d5", "#f5b041", "#82e0aa", "#d98880")
    for patch, label in zip(bplot["boxes"], labels):
        patch.set_facecolor(palette[kinds.index(label) % len(palette)])
    ax.set_xticks(range(len(thetas)))
    ax.set_xticklabels(thetas)
    ax.set_xlabel("theta")
    ax.set_ylabel("earth mover's distance")
    handles = [bplot["boxes"][j] for j in range(len(kinds))]
    ax.legend(handles, kinds, fontsize=8)
    fig.suptitle("Base vs resampled discovery-time distance")
    fig.tight_layout()
    return fig, {"kind": spec.kind, "groups": entries}


_BUILDERS = {
    "dt_boxplot": _build_dt_boxplot,
    "mean_median_lines": _build_mean_median_lines,
    "emd_boxplot": _build_emd_boxplot,
}


def build(spec: FigureSpec):
    """Figure plus the exact plotted values, nothing written."""
    rows = _read_rows(spec)
    return _BUILDERS[spec.kind](rows, spec)


def sidecar_path(out: str) -> str:
    return f"{out}.values.json"


def render(spec: FigureSpec) -> dict:
    """Write the image and its plotted-values sidecar; return the values."""
    fig, values = build(spec)
    out_dir = os.path.dirname(os.path.abspath(spec.out))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(spec.out)
    with open(sidecar_path(spec.out), "w") as fh:
        json.dump(values, fh, indent=2)
        fh.write("\n")
    return values
