"""Exception hierarchy for the figure generator."""

__all__ = ["PlotError", "SpecError", "MissingColumn", "EmptySeries"]


class PlotError(Exception):
    """Base class for all figure-generation failures."""


class SpecError(PlotError):
    """Malformed or incomplete figure specification."""


class MissingColumn(PlotError):
    """An input file lacks a column the figure needs."""


class EmptySeries(PlotError):
    """An input file parses but contains no data rows."""
