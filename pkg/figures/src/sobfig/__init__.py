"""Figure regeneration for simulation outputs (read-only over the data)."""

from .core import FigureSpec, SchemaError, read_csv, read_json, save_figure

__version__ = "0.1.0"
