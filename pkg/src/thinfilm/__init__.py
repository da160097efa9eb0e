"""Stationary periodic solutions, branch tracing and stability of the
thermocapillary thin-film equation

    h_t + (h^3 (h_xxx - g h_x) + M h^2/(1+h)^2 h_x)_x = 0.
"""

from .model import K0, HamiltonianParams, ModelParams, PeriodicProfile

__all__ = ["K0", "HamiltonianParams", "ModelParams", "PeriodicProfile"]
__version__ = "0.1.0"
