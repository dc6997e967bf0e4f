"""Finite workbench for boolean algebras with operators built from graphs."""

__version__ = "0.1.0"

from .graph import Graph, VertexMap  # noqa: F401
from .atoms import Atom, AtomStructure, enumerate_atoms  # noqa: F401
from .bao import FiniteBao, RelStructure, complex_algebra  # noqa: F401
from .ags import AgsModel, build_model, theta  # noqa: F401
