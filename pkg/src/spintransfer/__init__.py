"""Information transfer along open spin-1/2 XY chains.

Builds the sender-to-receiver transfer map of a chain, reduces it to the
real 3x3 system acting on the sender's Bloch parameters, classifies when the
sender state is recoverable, and reconstructs it from simulated polarization
measurements at the receiver.
"""

__version__ = "0.1.0"

from .chain import ChainSpec, build_rest_hamiltonian, build_xy_hamiltonian, site_operator
from .errors import (
    BlochBallError,
    InvariantError,
    NonHermitianError,
    NumericalError,
    SpecError,
    SpinTransferError,
)
from .evolution import Propagator, chain_propagator, diagonalize, evolve, receiver_state, unitary_at
from .initial import RestStateKind, assemble_initial, rest_state
from .measurement import (
    DirectionSet,
    PolarizationReadout,
    ReconstructionReport,
    add_noise,
    compute_B,
    measure_polarizations,
    polarization,
    reconstruct_from_polarizations,
    reconstruct_from_receiver,
)
from .scan import ScanResult, scan_time
from .states import (
    BlochVector,
    DensityMatrix,
    bloch_to_density,
    density_to_bloch,
    partial_trace,
    tensor_product,
)
from .transfer import (
    InfoSystem,
    TransferClass,
    TransferKernel,
    TransferMatrix,
    classify,
    closed_form_r,
    closed_form_transfer,
    compute_info_system,
    compute_transfer_matrix,
    pst_check,
)

__all__ = [
    "BlochBallError",
    "BlochVector",
    "ChainSpec",
    "DensityMatrix",
    "DirectionSet",
    "InfoSystem",
    "InvariantError",
    "NonHermitianError",
    "NumericalError",
    "PolarizationReadout",
    "Propagator",
    "ReconstructionReport",
    "RestStateKind",
    "ScanResult",
    "SpecError",
    "SpinTransferError",
    "TransferClass",
    "TransferKernel",
    "TransferMatrix",
    "add_noise",
    "assemble_initial",
    "bloch_to_density",
    "build_rest_hamiltonian",
    "build_xy_hamiltonian",
    "chain_propagator",
    "classify",
    "closed_form_r",
    "closed_form_transfer",
    "compute_B",
    "compute_info_system",
    "compute_transfer_matrix",
    "density_to_bloch",
    "diagonalize",
    "evolve",
    "measure_polarizations",
    "partial_trace",
    "polarization",
    "pst_check",
    "receiver_state",
    "reconstruct_from_polarizations",
    "reconstruct_from_receiver",
    "rest_state",
    "scan_time",
    "site_operator",
    "tensor_product",
    "unitary_at",
]
