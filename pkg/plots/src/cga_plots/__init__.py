"""Offline figure scripts for cga-lab experiment CSVs.

Pure readers: these tools consume the CSV files written by the cga-lab
harness (and the runtime ``.meta`` companion) and render the three standard
figure styles; they never import the harness or modify its outputs.
"""

from .figures import FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render"]
__version__ = "0.1.0"
