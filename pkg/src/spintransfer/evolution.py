"""Exact evolution under a constant Hamiltonian via its eigendecomposition."""

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import ChainSpec, build_xy_hamiltonian
from .errors import NonHermitianError, SpinTransferError
from .initial import RestStateKind, assemble_initial, rest_state
from .states import DensityMatrix, as_array, partial_trace_array

HERMITIAN_TOL = 1e-12


def fingerprint(h: np.ndarray) -> str:
    h = np.ascontiguousarray(h)
    return hashlib.sha1(str(h.dtype).encode() + str(h.shape).encode() + h.tobytes()).hexdigest()


@dataclass(frozen=True, eq=False)
class Propagator:
    """Spectral data ``H = V diag(E) V^+`` of a time-independent Hamiltonian."""

    energies: np.ndarray
    vectors: np.ndarray
    hamiltonian_fingerprint: str = ""

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def phases(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.energies * t)

    def reconstruction_error(self, h: np.ndarray) -> float:
        v = self.vectors
        return float(np.max(np.abs((v * self.energies) @ v.conj().T - h)))

    def unitarity_error(self) -> float:
        v = self.vectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))


def diagonalize(h: np.ndarray) -> Propagator:
    """Hermitian eigendecomposition of ``h``.

    Real symmetric input keeps real eigenvectors, which halves the cost of
    every later product.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SpinTransferError(f"Hamiltonian must be square, got shape {h.shape}")
    deviation = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if deviation > HERMITIAN_TOL:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (max deviation {deviation:.3e})", deviation)
    energies, vectors = np.linalg.eigh(h)
    for a in (energies, vectors):
        a.setflags(write=False)
    return Propagator(energies, vectors, fingerprint(h))


def unitary_at(p: Propagator, t: float) -> np.ndarray:
    """``U(t) = exp(-i H t) = V diag(exp(-i E t)) V^+``."""
    if not np.isfinite(t):
        raise SpinTransferError(f"time must be finite, got {t}")
    v = p.vectors
    return (v * p.phases(t)) @ v.conj().T


def evolve_array(rho: np.ndarray, p: Propagator, t: float) -> np.ndarray:
    u = unitary_at(p, t)
    return u @ rho @ u.conj().T


def evolve(rho0, p: Propagator, t: float) -> DensityMatrix:
    """``U(t) rho0 U(t)^+``; the mode of ``rho0`` is kept."""
    data = as_array(rho0)
    if data.shape != (p.dim, p.dim):
        raise SpinTransferError(
            f"state of dimension {data.shape[0]} does not match propagator of dimension {p.dim}"
        )
    mode = rho0.mode if isinstance(rho0, DensityMatrix) else "probe"
    out = evolve_array(data, p, t)
    if mode == "physical":
        out = (out + out.conj().T) / 2
    return DensityMatrix._trusted(out, mode)


def chain_propagator(spec: ChainSpec) -> Propagator:
    return diagonalize(build_xy_hamiltonian(spec))


def receiver_state(
    spec: ChainSpec,
    x,
    rest=None,
    t: float = 0.0,
    propagator: Optional[Propagator] = None,
) -> DensityMatrix:
    """Receiver density matrix at time ``t`` for sender Bloch parameters ``x``.

    ``rest`` defaults to the ground rest state; ``propagator`` to the chain's
    XY propagator.
    """
    if rest is None:
        rest = rest_state(spec, RestStateKind.ground())
    if propagator is None:
        propagator = chain_propagator(spec)
    rho0 = assemble_initial(x, rest, spec)
    rho_t = evolve(rho0, propagator, t)
    reduced = partial_trace_array(rho_t.data, [spec.receiver], spec.n_sites)
    return DensityMatrix._trusted(reduced, rho_t.mode)
