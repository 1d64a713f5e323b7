"""trapkit: simulation and statistical verification of heavy-tailed trap models on Z^d."""

from .dynamics import ClockPath, DynamicsSpec, PathSample, edge_conductance, jump_rate
from .env import EnvParams, Environment, EnvWindow, ExactParetoTail, InverseCdfTable
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "ClockPath",
    "DynamicsSpec",
    "EnvParams",
    "Environment",
    "EnvWindow",
    "ExactParetoTail",
    "InverseCdfTable",
    "KERNEL_BACKEND",
    "PathSample",
    "edge_conductance",
    "jump_rate",
    "__version__",
]
