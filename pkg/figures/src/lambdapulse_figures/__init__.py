"""Figure rendering for lambdapulse CSV exports."""

from .render import FIGURES, FigureSpec, RenderError, load_columns, render, render_all

__version__ = "0.1.0"
