"""Darboux-transformed pseudospin-1 Dirac models and Lieb tight-binding bands."""
from . import algebra, cases, darboux, free_model, kernels, lattice, scattering, spectral
from .cases import CaseModel, case_model, oracle_crosscheck
from .darboux import TransformedModel, darboux_transform, seed_matrix
from .errors import DarbouxError
from .free_model import DiracModel, SpinorFunction, free_hamiltonian
from .kernels import BACKEND
from .lattice import TBParams, band_scan
from .scattering import reflection_coefficient, scatter_scan
from .spectral import case_spectrum, shoot_bound_states

__version__ = "0.1.0"

__all__ = [
    "algebra", "cases", "darboux", "free_model", "kernels", "lattice", "scattering", "spectral",
    "BACKEND", "CaseModel", "DarbouxError", "DiracModel", "SpinorFunction", "TBParams",
    "TransformedModel", "band_scan", "case_model", "case_spectrum", "darboux_transform",
    "free_hamiltonian", "oracle_crosscheck", "reflection_coefficient", "scatter_scan",
    "seed_matrix", "shoot_bound_states",
]
