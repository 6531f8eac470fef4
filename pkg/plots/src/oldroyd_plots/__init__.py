"""Publication-style figures from oldroyd-lab CSV outputs."""

from .errors import EmptySeries, MissingColumn, PlotError, SpecError
from .figures import (
    DECAY_COLUMNS,
    TARGET_SLOPES,
    FigureSpec,
    build_figure,
    extract_points,
    read_csv_columns,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "PlotError",
    "SpecError",
    "MissingColumn",
    "EmptySeries",
    "DECAY_COLUMNS",
    "TARGET_SLOPES",
    "FigureSpec",
    "read_csv_columns",
    "build_figure",
    "extract_points",
    "render",
]
