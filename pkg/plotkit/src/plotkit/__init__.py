"""Figure regeneration for cfo-lab sweep results."""

from .figures import (
    CurveSelector,
    EmptySelectionError,
    FigureSpec,
    SchemaError,
    build_figure,
    load_rows,
    plot_comparison,
    plot_mse_vs_snr,
    select_curves,
)

__all__ = [
    "CurveSelector",
    "EmptySelectionError",
    "FigureSpec",
    "SchemaError",
    "build_figure",
    "load_rows",
    "plot_comparison",
    "plot_mse_vs_snr",
    "select_curves",
]
