"""One-sided positive decompositions (OPDs) of bipartite states and their dynamics."""
from .frames import (
    OperatorFrame,
    NotAFrameError,
    basis_induced_family,
    canonical_dual,
    frame_bounds,
    frame_map_apply,
    gellmann_basis,
    hermitian_basis,
    pauli_frame,
    verify_duality,
)
from .hs import BipartiteOperator, hs_inner, partial_trace_e, partial_trace_s, tensor
from .opd import OPD, OPDTerm, ReductionCertificate, cost, decompose, reconstruct, reduce, reduced_state
from .schmidt import SchmidtDecomposition, schmidt_decompose

__version__ = "0.1.0"
