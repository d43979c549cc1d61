"""Figure rendering over records CSV files.

This package consumes the records produced by the simulation laboratory
purely through its CSV interface: rows are grouped, raw values are lifted
out, and nothing beyond per-group aggregates is recomputed. Every render
also writes a `<out>.values.json` sidecar holding exactly the numbers that
were plotted, so figures can be diffed and regression-tested without
comparing image bytes.
"""

from .figures import FigureError, FigureSpec, KINDS, build, render

__version__ = "0.1.0"

__all__ = ["FigureError", "FigureSpec", "KINDS", "build", "render",
           "__version__"]
