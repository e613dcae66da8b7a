"""Measurement-based quantum computation simulator.

Graph states on arbitrary graphs, a bit-packed stabilizer tableau
backend, a dense statevector backend, adaptive measurement patterns with
Pauli-frame tracking, a circuit-to-cluster compiler, spin-model partition
functions via graph-state overlaps, and surface-code slice projection.
"""

__version__ = "0.1.0"

from .errors import (CapacityError, ContradictionError, MbqcError,
                     ValidationError, VerificationError)
from .graphs import DefectMask, Graph, LatticeSpec, apply_site_defects, build_lattice, has_spanning_cluster
from .pauli import PauliString
from .statevector import ProductState, StateVector, fidelity_up_to_phase, graph_state_vector, measure_angle, overlap
from .tableau import Tableau, graph_state_tableau, measure_pauli, tableau_to_statevector

__all__ = [
    "CapacityError", "ContradictionError", "MbqcError", "ValidationError",
    "VerificationError", "DefectMask", "Graph", "LatticeSpec",
    "apply_site_defects", "build_lattice", "has_spanning_cluster",
    "PauliString", "ProductState", "StateVector", "fidelity_up_to_phase",
    "graph_state_vector", "measure_angle", "overlap", "Tableau",
    "graph_state_tableau", "measure_pauli", "tableau_to_statevector",
    "__version__",
]
