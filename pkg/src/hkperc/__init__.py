"""Bootstrap percolation on high-dimensional geometric graphs."""

from .errors import (BudgetExceededError, HKPercError, InvalidFamilyError, InvalidVertexError,
                     NotEvaluated, OrderGuardError, RadiusRangeError, RoundLimitError,
                     UnsupportedFamilyError)
from .families import FamilySpec, make_family
from .graph_core import GraphFamily, Traversal, ball, distance_within, sphere

__version__ = "0.1.0"
