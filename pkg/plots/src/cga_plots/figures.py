"""Figure rendering for the cga-lab CSV formats.

Four figure kinds:

* ``variance``: one curve per K label (mean final variance vs n) plus the
  1 - 1/n minimum-variance floor line.
* ``variance_normalized``: the same curves divided by sqrt(K), no floor line.
* ``runtime_box``: per-K box plots of evaluations on a logarithmic y axis,
  one panel per n, with reference lines (3/2)^n, 2^n and n^(n/3); censored
  rows are excluded from the quartiles and drawn as distinct markers at the
  budget height.
* ``drift_scatter``: Monte-Carlo drift against predicted drift with +-2
  standard-error bars and the identity line; prints the sign agreement.

Every renderer returns an ordered summary (the same statistics the CLI
prints), so identical inputs yield identical reported numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("variance", "variance_normalized", "runtime_box", "drift_scatter")

CSV_KIND_FOR_FIGURE = {
    "variance": "variance",
    "variance_normalized": "variance",
    "runtime_box": "runtime",
    "drift_scatter": "drift",
}

EXPECTED_COLUMNS = {
    "variance": ["n", "k_label", "k_value", "run", "iterations_executed",
                 "variance_final", "variance_over_sqrtK", "potential_final"],
    "runtime": ["n", "k_exponent", "k_value", "run", "evaluations", "censored", "seed"],
    "drift": ["n", "k_value", "snapshot_id", "potential", "variance", "p_right_exact",
              "drift_empirical", "drift_stderr", "drift_predicted", "prob_M_empirical"],
}


class SchemaError(ValueError):
    """The input file does not carry the declared CSV schema."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    output_image: str
    figure_kind: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None


def read_table(path: str, csv_kind: str) -> list[dict]:
    """Read and validate a cga-lab CSV of the given kind."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if len(lines) < 2 or not lines[0].startswith("# cga-lab v1,"):
        raise SchemaError(f"{path}: missing 'cga-lab v1' header line")
    if f"kind={csv_kind}" not in lines[0].replace(" ", ""):
        raise SchemaError(f"{path}: header does not declare kind={csv_kind}")
    columns = lines[1].split(",")
    if columns != EXPECTED_COLUMNS[csv_kind]:
        raise SchemaError(f"{path}: column header mismatch for kind={csv_kind}: "
                          f"{lines[1]!r}")
    rows = []
    for line in lines[2:]:
        if line:
            rows.append(dict(zip(columns, line.split(","))))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_runtime_reference(csv_path: str) -> dict[int, tuple[float, float, float]]:
    """Reference values per n from the companion .meta file, if present."""
    meta = Path(str(csv_path) + ".meta")
    refs: dict[int, tuple[float, float, float]] = {}
    if meta.exists():
        lines = meta.read_text(encoding="utf-8").splitlines()
        for line in lines[2:]:
            if line:
                n_str, a, b, c = line.split(",")
                refs[int(n_str)] = (float(a), float(b), float(c))
    return refs


def reference_values(n: int) -> tuple[float, float, float]:
    return 1.5 ** n, float(2 ** n), float(n) ** (n / 3.0)


def _finish(fig, spec: FigureSpec):
    if spec.title:
        fig.suptitle(spec.title)
    fig.savefig(spec.output_image, dpi=120)
    plt.close(fig)


def plot_variance(spec: FigureSpec) -> dict:
    rows = read_table(spec.input_csv, "variance")
    normalized = spec.figure_kind == "variance_normalized"
    value_col = "variance_over_sqrtK" if normalized else "variance_final"
    curves: dict[str, dict[int, list[float]]] = {}
    for r in rows:
        curves.setdefault(r["k_label"], {}).setdefault(int(r["n"]), []).append(
            float(r[value_col]))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    summary = {"figure": spec.figure_kind, "curves": len(curves)}
    for label in sorted(curves):
        ns = sorted(curves[label])
        means = [sum(curves[label][n]) / len(curves[label][n]) for n in ns]
        ax.plot(ns, means, marker="o", label=f"K = {label}")
        summary[f"mean[{label}]"] = " ".join(f"{n}:{m:.6g}" for n, m in zip(ns, means))
    all_n = sorted({int(r["n"]) for r in rows})
    if not normalized:
        floor = [1 - 1 / n for n in all_n]
        ax.plot(all_n, floor, color="black", linestyle="--",
                label="minimum variance 1 - 1/n")
        summary["floor"] = " ".join(f"{n}:{v:.6g}" for n, v in zip(all_n, floor))
    ax.set_xlabel(spec.xlabel or "n")
    ax.set_ylabel(spec.ylabel or
                  ("final variance / sqrt(K)" if normalized else "final variance"))
    ax.legend(fontsize=8)
    _finish(fig, spec)
    return summary


def plot_runtime_box(spec: FigureSpec) -> dict:
    rows = read_table(spec.input_csv, "runtime")
    refs = read_runtime_reference(spec.input_csv)
    by_n: dict[int, dict[float, dict[str, list[int]]]] = {}
    for r in rows:
        cell = by_n.setdefault(int(r["n"]), {}).setdefault(float(r["k_exponent"]),
                                                           {"done": [], "censored": []})
        cell["censored" if r["censored"] == "1" else "done"].append(int(r["evaluations"]))

    n_values = sorted(by_n)
    fig, axes = plt.subplots(1, len(n_values), figsize=(6 * len(n_values), 4.5),
                             squeeze=False)
    summary = {"figure": "runtime_box", "panels": len(n_values)}
    for ax, n in zip(axes[0], n_values):
        exponents = sorted(by_n[n])
        data = [by_n[n][e]["done"] for e in exponents]
        positions = list(exponents)
        filled = [(p, d) for p, d in zip(positions, data) if d]
        if filled:
            ax.boxplot([d for _, d in filled], positions=[p for p, _ in filled],
                       widths=0.6, manage_ticks=False)
        censored_points = [(p, v) for p, e in zip(positions, exponents)
                           for v in by_n[n][e]["censored"]]
        if censored_points:
            ax.plot([p for p, _ in censored_points], [v for _, v in censored_points],
                    linestyle="none", marker="x", color="red", label="censored at budget")
        three_halves, two_n, n_poly = refs.get(n, reference_values(n))
        for value, label, style in ((three_halves, "(3/2)^n", ":"),
                                    (two_n, "2^n", "--"),
                                    (n_poly, "n^(n/3)", "-.")):
            ax.axhline(value, linestyle=style, color="gray", linewidth=1, label=label)
        ax.set_yscale("log")
        ax.set_xlabel(spec.xlabel or "log2(K)")
        ax.set_ylabel(spec.ylabel or "evaluations")
        ax.set_title(f"n = {n}")
        ax.legend(fontsize=7)
        medians = {e: float(np.median(by_n[n][e]["done"])) for e in exponents
                   if by_n[n][e]["done"]}
        summary[f"references_n{n}"] = (f"{three_halves:.6g} {two_n:.6g} {n_poly:.6g}")
        summary[f"medians_n{n}"] = " ".join(
            f"2^{e:g}:{medians[e]:.6g}" for e in sorted(medians))
        summary[f"censored_n{n}"] = sum(len(by_n[n][e]["censored"]) for e in exponents)
    _finish(fig, spec)
    return summary


def plot_drift(spec: FigureSpec) -> dict:
    rows = read_table(spec.input_csv, "drift")
    pred = np.array([float(r["drift_predicted"]) for r in rows])
    emp = np.array([float(r["drift_empirical"]) for r in rows])
    err = 2.0 * np.array([float(r["drift_stderr"]) for r in rows])

    fig, ax = plt.subplots(figsize=(5.5, 5))
    with_bars = err > 0
    if with_bars.any():
        ax.errorbar(pred[with_bars], emp[with_bars], yerr=err[with_bars],
                    linestyle="none", marker="o", markersize=4, capsize=2)
    if (~with_bars).any():
        ax.plot(pred[~with_bars], emp[~with_bars], linestyle="none", marker="o",
                markersize=4)
    lo = min(pred.min(), emp.min())
    hi = max(pred.max(), emp.max())
    pad = 0.05 * (hi - lo or 1.0)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="gray",
            linestyle="--", linewidth=1, label="identity")
    ax.set_xlabel(spec.xlabel or "predicted drift")
    ax.set_ylabel(spec.ylabel or "empirical drift")
    ax.legend(fontsize=8)
    _finish(fig, spec)

    agreement = float(np.mean(np.sign(emp) == np.sign(pred)))
    return {"figure": "drift_scatter", "points": len(rows),
            "sign_agreement": f"{agreement:.6g}",
            "error_bars": int(with_bars.sum())}


def render(spec: FigureSpec) -> dict:
    if spec.figure_kind not in FIGURE_KINDS:
        raise SchemaError(f"unknown figure kind {spec.figure_kind!r}")
    if spec.figure_kind in ("variance", "variance_normalized"):
        return plot_variance(spec)
    if spec.figure_kind == "runtime_box":
        return plot_runtime_box(spec)
    return plot_drift(spec)
