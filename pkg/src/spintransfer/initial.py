"""Initial states of the rest of the chain and full product initial states."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import ChainSpec, rest_hamiltonian_reduced
from .errors import SpecError, SpinTransferError
from .states import (
    PHYSICAL,
    DensityMatrix,
    as_array,
    bloch_to_density,
    check_physical,
    permute_sites,
)

GROUND = "ground"
THERMAL = "thermal"


@dataclass(frozen=True)
class RestStateKind:
    """``ground`` (all rest spins in |0>) or ``thermal`` at inverse temperature ``beta``.

    A thermal kind without ``beta`` takes it from the :class:`ChainSpec`.
    """

    kind: str = GROUND
    beta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (GROUND, THERMAL):
            raise SpecError(f"unknown rest state kind {self.kind!r}", "kind")
        if self.beta is not None:
            if not np.isfinite(self.beta) or self.beta < 0:
                raise SpecError(f"beta must be finite and >= 0, got {self.beta}", "beta")
            object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def ground(cls) -> "RestStateKind":
        return cls(GROUND)

    @classmethod
    def thermal(cls, beta: Optional[float] = None) -> "RestStateKind":
        return cls(THERMAL, beta)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.beta is not None:
            out["beta"] = self.beta
        return out


def gibbs_state(h: np.ndarray, beta: float) -> np.ndarray:
    """``exp(-beta H) / Tr exp(-beta H)`` through the eigendecomposition of ``H``."""
    energies, vectors = np.linalg.eigh(h)
    # shifting by the ground energy keeps the weights in range for large beta
    weights = np.exp(-beta * (energies - energies[0]))
    weights /= weights.sum()
    rho = (vectors * weights) @ vectors.conj().T
    return (rho + rho.conj().T) / 2


def rest_state(spec: ChainSpec, kind: RestStateKind = RestStateKind()) -> DensityMatrix:
    """Initial density matrix of the non-sender sites, in ascending site order."""
    d = 2 ** (spec.n_sites - 1)
    if kind.kind == GROUND:
        data = np.zeros((d, d), dtype=complex)
        data[0, 0] = 1.0
        return DensityMatrix(data)
    beta = kind.beta if kind.beta is not None else spec.beta
    if beta is None:
        raise SpecError("thermal rest state needs beta", "beta")
    if beta < 0:
        raise SpecError(f"beta must be >= 0, got {beta}", "beta")
    return DensityMatrix(gibbs_state(rest_hamiltonian_reduced(spec), beta))


def assemble_initial(x, rest, spec: Optional[ChainSpec] = None) -> DensityMatrix:
    """Product state of the sender (Bloch parameters ``x``) and the rest.

    Without ``spec`` the sender is site 1.  ``rest`` may be a probe-mode matrix,
    in which case ``x`` may be any 2x2 matrix as well (used for linear probes).
    """
    rest_data = as_array(rest)
    n = rest_data.shape[0].bit_length()  # log2(d_rest) + 1
    if 2 ** (n - 1) != rest_data.shape[0]:
        raise SpinTransferError(f"rest dimension {rest_data.shape[0]} is not a power of two")
    sender = 1
    if spec is not None:
        if spec.n_sites != n:
            raise SpinTransferError(
                f"rest state acts on {n - 1} sites but the chain has {spec.n_sites - 1} rest sites"
            )
        sender = spec.sender
    matrix_sender = isinstance(x, np.ndarray) and x.shape == (2, 2)
    if matrix_sender:
        sender_data = x
    else:
        sender_data = bloch_to_density(x).data
    data = np.kron(sender_data, rest_data)
    if sender != 1:
        order = [sender] + [s for s in range(1, n + 1) if s != sender]
        data = permute_sites(data, order)
    if matrix_sender or (isinstance(rest, DensityMatrix) and not rest.is_physical):
        return DensityMatrix.probe(data)
    if not isinstance(rest, DensityMatrix):
        check_physical(np.asarray(rest_data, dtype=complex))
    return DensityMatrix._trusted(data, PHYSICAL)
