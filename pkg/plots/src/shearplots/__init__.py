"""Figure regeneration for shearfront CSV outputs."""

from .figures import FIGURE_IDS, FigureSpec, SchemaError, render

__version__ = "0.1.0"

__all__ = ["FIGURE_IDS", "FigureSpec", "SchemaError", "render", "__version__"]
