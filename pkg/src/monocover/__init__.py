"""Covering edge-colored random graphs by few monochromatic cycles."""

from .graph_core import ColoredGraph, Cover, CoverReport, Cycle, Graph, VertexSet, verify_cover

__all__ = ["ColoredGraph", "Cover", "CoverReport", "Cycle", "Graph", "VertexSet", "verify_cover"]
__version__ = "0.1.0"
