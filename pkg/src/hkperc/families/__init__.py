"""Concrete graph families: hypercubes, Cartesian products, middle layer, odd and folded cubes."""

from .cube import Folded, Hypercube
from .explicit import Explicit, edge_list_spec, read_edge_list
from .kneser import MiddleLayer, Odd
from .localiso import local_iso_check
from .product import BaseGraph, Product, parse_base

# after the submodule imports, so the function shadows the ``explicit`` submodule
from .core import (KINDS, FamilySpec, ProjectionHandle, explicit, folded, grid, hamming,
                   hypercube, make_family, middle_layer, odd, product, single_vertex, torus)

__all__ = [
    "KINDS", "FamilySpec", "ProjectionHandle", "make_family", "single_vertex",
    "hypercube", "folded", "middle_layer", "odd", "product", "hamming", "torus", "grid",
    "explicit", "Hypercube", "Folded", "MiddleLayer", "Odd", "Product", "Explicit",
    "BaseGraph", "parse_base", "read_edge_list", "edge_list_spec", "local_iso_check",
]
