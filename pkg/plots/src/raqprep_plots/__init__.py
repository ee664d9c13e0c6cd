"""Figure rendering for raqprep CSV aggregates."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureSpec, RenderError, extract_series, render
