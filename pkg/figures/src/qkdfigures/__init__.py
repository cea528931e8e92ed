"""qkd-figures: renders qkdlink sweep CSVs into the transmittance and
per-protocol QBER/keyrate figure families.

Pure CSV-to-image transform: nothing here recomputes link physics.
"""

__version__ = "0.1.0"

from .render import FIGURES, FigureError, FigureSpec, load_sweep_csv, render

__all__ = ["FIGURES", "FigureError", "FigureSpec", "load_sweep_csv", "render", "__version__"]
