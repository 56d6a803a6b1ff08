"""SVG line charts of result CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import ConfigError  # noqa: E402
from .csvio import read_csv  # noqa: E402

plt.rcParams["svg.hashsalt"] = "alphavi"

DEFAULT_SPEC = {
    "x": "step",
    "y": "sigma_q2",
    "group": "K",
    "filter": {},
    "logx": False,
    "logy": False,
    "baselines": [],      # [{"value": float, "label": str}]
    "marker": "",
    "title": "",
}


def render_plot(csv_path, spec: dict, out_path):
    """Render one line per ``group`` value plus dashed horizontal baselines.

    Each series is written under an SVG group id ``series-<value>`` and each
    baseline under ``baseline-<i>``.
    """
    spec = {**DEFAULT_SPEC, **spec}
    rows = read_csv(csv_path)
    if not rows:
        raise ConfigError(f"{csv_path} has no rows")
    columns = set(rows[0])
    needed = [spec["x"], spec["y"]] + ([spec["group"]] if spec["group"] else []) + list(spec["filter"])
    missing = [c for c in needed if c not in columns]
    if missing:
        raise ConfigError(f"unknown column(s) {missing}; available: {sorted(columns)}")
    rows = [r for r in rows if all(str(r[k]) == str(v) for k, v in spec["filter"].items())]
    if not rows:
        raise ConfigError("filter selects no rows")

    groups = {}
    for r in rows:
        groups.setdefault(r[spec["group"]] if spec["group"] else "all", []).append(r)

    fig, ax = plt.subplots(figsize=(6, 4))
    for key in sorted(groups, key=lambda k: (isinstance(k, str), k)):
        pts = sorted(groups[key], key=lambda r: r[spec["x"]])
        (line,) = ax.plot([r[spec["x"]] for r in pts], [r[spec["y"]] for r in pts],
                          marker=spec["marker"] or None, label=f"{spec['group']}={key}")
        line.set_gid(f"series-{key}")
    for i, b in enumerate(spec["baselines"]):
        line = ax.axhline(b["value"], linestyle="--", color="k", linewidth=1,
                          label=b.get("label", f"baseline {i}"))
        line.set_gid(f"baseline-{i}")
    if spec["logx"]:
        ax.set_xscale("log")
    if spec["logy"]:
        ax.set_yscale("log")
    ax.set_xlabel(spec["x"])
    ax.set_ylabel(spec["y"])
    if spec["title"]:
        ax.set_title(spec["title"])
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
