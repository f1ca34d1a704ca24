"""Competition interfaces in last-passage percolation on random sectors."""

from ._backend import BACKEND
from .model import InterfaceProfile, Params, Regime, TasepConfig, WeightField

__version__ = "0.1.0"

__all__ = ["BACKEND", "InterfaceProfile", "Params", "Regime", "TasepConfig", "WeightField", "__version__"]
