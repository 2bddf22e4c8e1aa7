"""plot_results: regenerate the experiment figures from sweep CSVs.

Usage: plot_results <csv>... --fig {1a,1b,2,3a,3b,4a,4b} --out <path>

Each figure id maps to a fixed layout of (mode, K, M) curve selectors;
the given CSVs must contain every selected cell or the run fails without
writing anything.
"""

from __future__ import annotations

import argparse
import sys

from .figures import (
    CurveSelector,
    EmptySelectionError,
    FigureSpec,
    SchemaError,
    plot_comparison,
    plot_mse_vs_snr,
)

ALL_MODES = ("coarse", "fixed_fine", "adaptive_fine")

FIGURE_LAYOUTS = {
    "1a": {
        "title": "Coarse vs fine estimation, K=16 symbols, M=1 antenna",
        "cells": [(16, 1, ALL_MODES)],
        "single": True,
    },
    "1b": {
        "title": "Coarse vs fine estimation, K=1 symbol, M=16 antennas",
        "cells": [(1, 16, ALL_MODES)],
        "single": True,
    },
    "2": {
        "title": "Time vs antenna diversity, K*M=64",
        "cells": [(64, 1, ALL_MODES), (1, 64, ALL_MODES)],
        "single": False,
    },
    "3a": {
        "title": "Impact of symbol count K at M=1, coarse estimation",
        "cells": [(k, 1, ("coarse",)) for k in (8, 16, 32, 64)],
        "single": False,
    },
    "3b": {
        "title": "Impact of antenna count M at K=1, coarse estimation",
        "cells": [(1, m, ("coarse",)) for m in (8, 16, 32, 64)],
        "single": False,
    },
    "4a": {
        "title": "Combined time and antenna diversity, M=16",
        "cells": [(k, 16, ("coarse", "adaptive_fine")) for k in (1, 16, 64)],
        "single": False,
    },
    "4b": {
        "title": "Combined time and antenna diversity, M=64",
        "cells": [(k, 64, ("coarse", "adaptive_fine")) for k in (1, 16, 64)],
        "single": False,
    },
}


def specs_for_figure(fig_id: str, csv_paths, out_path: str):
    layout = FIGURE_LAYOUTS[fig_id]
    specs = []
    for k, m, modes in layout["cells"]:
        selectors = tuple(CurveSelector(mode=mode, k_symbols=k, m_antennas=m) for mode in modes)
        specs.append(
            FigureSpec(
                csv_paths=tuple(str(p) for p in csv_paths),
                selectors=selectors,
                out_path=str(out_path),
                title=layout["title"],
            )
        )
    return layout, specs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot_results", description=__doc__)
    parser.add_argument("csv", nargs="+", help="sweep result CSVs")
    parser.add_argument("--fig", required=True, choices=sorted(FIGURE_LAYOUTS))
    parser.add_argument("--out", required=True, help="output image path (.svg preferred)")
    args = parser.parse_args(argv)
    layout, specs = specs_for_figure(args.fig, args.csv, args.out)
    try:
        if layout["single"]:
            path = plot_mse_vs_snr(specs[0])
        else:
            path = plot_comparison(*specs)
    except (SchemaError, EmptySelectionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
