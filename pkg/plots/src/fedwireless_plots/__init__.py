"""Figure rendering for fedwireless CSV outputs."""

from .render import KINDS, PlotSpec, render

__version__ = "0.1.0"
