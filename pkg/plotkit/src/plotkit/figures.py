"""Curve selection and rendering for cfo-lab sweep CSVs.

Input files follow the cfo-lab results schema:

    snr_db,mode,k_symbols,m_antennas,lambda,iter,trials,mse,crb_mean

Plotted points are the CSV values verbatim: no smoothing, no resampling,
no interpolation. Rendering is deterministic (fixed style, fixed SVG hash
salt, no timestamps), so regenerated figures diff cleanly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_COLUMNS = (
    "snr_db",
    "mode",
    "k_symbols",
    "m_antennas",
    "lambda",
    "iter",
    "trials",
    "mse",
    "crb_mean",
)

STYLE_FILE = Path(__file__).parent / "styles" / "cfolab.mplstyle"
SVG_HASH_SALT = "plotkit"


class SchemaError(Exception):
    """CSV header or field does not match the results schema."""


class EmptySelectionError(Exception):
    """A selector matched no rows; refusing to draw a silently-empty plot."""


@dataclass(frozen=True)
class CurveSelector:
    """Picks the rows of one curve: a mode within one (K, M) cell.

    ``None`` for k_symbols or m_antennas matches any value (useful when a
    CSV holds a single cell).
    """

    mode: str
    k_symbols: int | None = None
    m_antennas: int | None = None

    def matches(self, row: dict) -> bool:
        if row["mode"] != self.mode:
            return False
        if self.k_symbols is not None and row["k_symbols"] != self.k_symbols:
            return False
        if self.m_antennas is not None and row["m_antennas"] != self.m_antennas:
            return False
        return True


@dataclass(frozen=True)
class FigureSpec:
    """Inputs, curve selectors, and presentation options for one figure."""

    csv_paths: tuple[str, ...]
    selectors: tuple[CurveSelector, ...]
    out_path: str
    title: str = ""
    x_label: str = "SNR (dB)"
    y_label: str = "MSE"
    log_y: bool = True
    show_crb: bool = True
    annotate_cells: bool = field(default=False)  # append (K,M) to legend labels


def _parse_row(record: dict, path, line_num: int) -> dict:
    try:
        return {
            "snr_db": float(record["snr_db"]),
            "mode": record["mode"],
            "k_symbols": int(record["k_symbols"]),
            "m_antennas": int(record["m_antennas"]),
            "subset_size": int(record["lambda"]) if record["lambda"] else None,
            "iterations": int(record["iter"]) if record["iter"] else None,
            "mse": float(record["mse"]) if record["mse"] else None,
            "crb_mean": float(record["crb_mean"]) if record["crb_mean"] else None,
        }
    except (ValueError, KeyError) as exc:
        raise SchemaError(f"{path}:{line_num}: bad field value ({exc})") from None


def load_rows(csv_paths) -> list[dict]:
    """Read rows from every CSV, enforcing the exact schema."""
    rows = []
    for path in csv_paths:
        path = Path(path)
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            for column in EXPECTED_COLUMNS:
                if column not in header:
                    raise SchemaError(f"{path}: missing column {column!r}")
            if tuple(header) != EXPECTED_COLUMNS:
                raise SchemaError(f"{path}: unexpected header {header!r}")
            for line_num, record in enumerate(reader, start=2):
                rows.append(_parse_row(dict(zip(header, record)), path, line_num))
    return rows


def _curve_label(selector: CurveSelector, rows: list[dict], annotate: bool) -> str:
    row = rows[0]
    if selector.mode == "fixed_fine":
        label = f"f-fine({row['subset_size']})"
    elif selector.mode == "adaptive_fine":
        label = f"a-fine({row['iterations']})"
    else:
        label = selector.mode
    if annotate:
        label += f" (K={row['k_symbols']},M={row['m_antennas']})"
    return label


def select_curves(rows: list[dict], spec: FigureSpec):
    """Resolve selectors into (label, snr[], mse[]) curves plus CRB overlays."""
    curves = []
    crb_cells: dict[tuple[int, int], dict[float, float]] = {}
    for selector in spec.selectors:
        matched = sorted((r for r in rows if selector.matches(r)), key=lambda r: r["snr_db"])
        if not matched:
            raise EmptySelectionError(f"selector {selector} matched no rows")
        xs = [r["snr_db"] for r in matched]
        ys = [r["mse"] for r in matched]
        curves.append((_curve_label(selector, matched, spec.annotate_cells), xs, ys))
        if spec.show_crb:
            for r in matched:
                if r["crb_mean"] is not None:
                    crb_cells.setdefault((r["k_symbols"], r["m_antennas"]), {})[r["snr_db"]] = r[
                        "crb_mean"
                    ]
    crb_curves = []
    for (k, m), points in sorted(crb_cells.items()):
        label = "CRB" if len(crb_cells) == 1 else f"CRB (K={k},M={m})"
        xs = sorted(points)
        crb_curves.append((label, xs, [points[x] for x in xs]))
    return curves, crb_curves


def build_figure(spec: FigureSpec):
    """Render the selected curves; returns the matplotlib figure."""
    rows = load_rows(spec.csv_paths)
    curves, crb_curves = select_curves(rows, spec)
    plt.style.use(STYLE_FILE)
    plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    fig, ax = plt.subplots()
    for label, xs, ys in curves:
        ax.plot(xs, ys, marker="o", label=label)
    for label, xs, ys in crb_curves:
        ax.plot(xs, ys, linestyle="--", color="black", alpha=0.7, label=label)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return fig


def _save(fig, out_path) -> Path:
    out_path = Path(out_path)
    fig.savefig(out_path, metadata={"Date": None} if out_path.suffix == ".svg" else None)
    plt.close(fig)
    return out_path


def plot_mse_vs_snr(spec: FigureSpec) -> Path:
    """Draw one sweep's MSE-vs-SNR curves with the CRB overlay."""
    return _save(build_figure(spec), spec.out_path)


def plot_comparison(*specs: FigureSpec) -> Path:
    """Overlay the selections of several sweeps on one axis.

    Output path, labels, and toggles come from the first spec; cells are
    annotated in the legend so overlapping sweeps stay distinguishable.
    Curves keep their own SNR grids, so mismatched sweeps simply leave
    gaps instead of being resampled.
    """
    if not specs:
        raise EmptySelectionError("no figure specs given")
    lead = specs[0]
    merged = FigureSpec(
        csv_paths=tuple(p for s in specs for p in s.csv_paths),
        selectors=tuple(sel for s in specs for sel in s.selectors),
        out_path=lead.out_path,
        title=lead.title,
        x_label=lead.x_label,
        y_label=lead.y_label,
        log_y=lead.log_y,
        show_crb=lead.show_crb,
        annotate_cells=True,
    )
    return _save(build_figure(merged), merged.out_path)
