"""maxwellgas - kinetic-theory transport, Dufour-extended Navier-Stokes and a lattice-gas chain."""

__version__ = "0.1.0"

from .thermostatics import KineticConstants, FieldPoint, LteParams, lte_from_fields, fields_from_lte
from .transport import TransportTable, collision_F, lambda_moments, mean_free_time
from .fields import Grid, FieldState, conserved_totals
from .fluid import step, run, boost, unboost
from .kinetic import fundamental_relation, free_time_moments, delta_moments
from .latticesim import LatticeGasState, build_hop_kernel, chain_step, thermalise

__all__ = [
    "__version__",
    "KineticConstants",
    "FieldPoint",
    "LteParams",
    "lte_from_fields",
    "fields_from_lte",
    "TransportTable",
    "collision_F",
    "lambda_moments",
    "mean_free_time",
    "Grid",
    "FieldState",
    "conserved_totals",
    "step",
    "run",
    "boost",
    "unboost",
    "fundamental_relation",
    "free_time_moments",
    "delta_moments",
    "LatticeGasState",
    "build_hop_kernel",
    "chain_step",
    "thermalise",
]
