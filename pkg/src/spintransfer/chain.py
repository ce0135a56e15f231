"""XY chain Hamiltonians and embedded single-site operators.

All energies are in units of the coupling ``D`` (times in ``1/D``).  Matrices
are dense; ``MAX_SITES`` caps the register at 4096 basis states.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import SpecError
from .states import SPIN_OPERATORS

MIN_SITES = 2
MAX_SITES = 12


@dataclass(frozen=True)
class ChainSpec:
    """Open chain of ``n_sites`` spins with sender and receiver sites.

    ``beta`` is the inverse temperature of the thermal rest state in units of
    ``1/D`` (the physical product is ``beta * D``).
    """

    n_sites: int
    coupling: float = 1.0
    omegas: Tuple[float, ...] = field(default=None)
    beta: Optional[float] = None
    sender: int = 1
    receiver: Optional[int] = None

    def __post_init__(self):
        n = self.n_sites
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise SpecError(f"n_sites must be an integer, got {n!r}", "n_sites")
        if not MIN_SITES <= n <= MAX_SITES:
            raise SpecError(
                f"n_sites={n} outside supported range {MIN_SITES}..{MAX_SITES}", "n_sites"
            )
        object.__setattr__(self, "n_sites", int(n))
        object.__setattr__(self, "coupling", float(self.coupling))
        omegas = (0.0,) * n if self.omegas is None else tuple(float(w) for w in self.omegas)
        if len(omegas) != n:
            raise SpecError(f"omegas has {len(omegas)} entries, expected {n}", "omegas")
        object.__setattr__(self, "omegas", omegas)
        if self.beta is not None:
            if not np.isfinite(self.beta) or self.beta < 0:
                raise SpecError(f"beta must be finite and >= 0, got {self.beta}", "beta")
            object.__setattr__(self, "beta", float(self.beta))
        receiver = n if self.receiver is None else self.receiver
        object.__setattr__(self, "receiver", int(receiver))
        if not 1 <= self.sender <= n:
            raise SpecError(f"sender site {self.sender} outside 1..{n}", "sender")
        if not 1 <= receiver <= n:
            raise SpecError(f"receiver site {receiver} outside 1..{n}", "receiver")
        if receiver == self.sender:
            raise SpecError(f"receiver must differ from sender (both are site {receiver})", "receiver")
        if omegas[self.sender - 1] != 0:
            warnings.warn(
                "Larmor frequency on the sender site does not enter the rest Hamiltonian",
                stacklevel=3,
            )

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def rest_sites(self) -> Tuple[int, ...]:
        return tuple(s for s in range(1, self.n_sites + 1) if s != self.sender)


def _bit_masks(n_qubits: int) -> np.ndarray:
    # mask of site s (1-based) is 2**(n - s)
    return np.array([1 << (n_qubits - s) for s in range(1, n_qubits + 1)], dtype=np.int64)


def xy_matrix(n_qubits: int, bonds: Sequence[Tuple[int, int]], coupling: float = 1.0) -> np.ndarray:
    """``-(D/2) sum (I+_i I-_j + I-_i I+_j)`` over the given bonds.

    The flip-flop term swaps the two bits when they differ, with amplitude 1,
    so the matrix is real symmetric.
    """
    d = 2**n_qubits
    h = np.zeros((d, d))
    states = np.arange(d, dtype=np.int64)
    masks = _bit_masks(n_qubits)
    for i, j in bonds:
        both = masks[i - 1] | masks[j - 1]
        bi = (states & masks[i - 1]) != 0
        bj = (states & masks[j - 1]) != 0
        src = states[bi != bj]
        h[src ^ both, src] += -coupling / 2
    return h


def zeeman_diagonal(n_qubits: int, sites: Sequence[int], omegas: Sequence[float]) -> np.ndarray:
    """Diagonal of ``sum_i omega_i I_z,i`` (bit 0 contributes +1/2)."""
    d = 2**n_qubits
    states = np.arange(d, dtype=np.int64)
    masks = _bit_masks(n_qubits)
    diag = np.zeros(d)
    for s, w in zip(sites, omegas):
        if w:
            diag += w * np.where(states & masks[s - 1], -0.5, 0.5)
    return diag


def build_xy_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Nearest-neighbour XY Hamiltonian of the whole chain (real symmetric)."""
    n = spec.n_sites
    return xy_matrix(n, [(i, i + 1) for i in range(1, n)], spec.coupling)


def rest_bonds(spec: ChainSpec):
    return [(i, i + 1) for i in range(1, spec.n_sites) if spec.sender not in (i, i + 1)]


def build_rest_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Rest Hamiltonian on the full register, acting trivially on the sender.

    XY bonds among the non-sender sites plus the Zeeman terms of every
    non-sender site.
    """
    n = spec.n_sites
    rest = spec.rest_sites
    h = xy_matrix(n, rest_bonds(spec), spec.coupling)
    h[np.diag_indices_from(h)] += zeeman_diagonal(n, rest, [spec.omegas[s - 1] for s in rest])
    return h


def rest_hamiltonian_reduced(spec: ChainSpec) -> np.ndarray:
    """Rest Hamiltonian on the ``n_sites - 1`` rest qubits alone (ascending sites)."""
    rest = spec.rest_sites
    local = {s: k + 1 for k, s in enumerate(rest)}
    bonds = [(local[i], local[j]) for i, j in rest_bonds(spec)]
    m = len(rest)
    h = xy_matrix(m, bonds, spec.coupling)
    h[np.diag_indices_from(h)] += zeeman_diagonal(
        m, range(1, m + 1), [spec.omegas[s - 1] for s in rest]
    )
    return h


def site_operator(spec: Union[ChainSpec, int], site: int, kind: str) -> np.ndarray:
    """Single-site spin operator ``kind`` on ``site``, identity elsewhere."""
    n = spec.n_sites if isinstance(spec, ChainSpec) else int(spec)
    if n < 1:
        raise SpecError(f"register needs at least one site, got {n}", "n_sites")
    if not 1 <= site <= n:
        raise SpecError(f"site {site} outside 1..{n}", "site")
    try:
        op = SPIN_OPERATORS[kind]
    except KeyError:
        raise SpecError(f"unknown operator kind {kind!r}", "kind") from None
    left = np.eye(2 ** (site - 1))
    right = np.eye(2 ** (n - site))
    return np.kron(np.kron(left, op), right)


def total_magnetization(n_qubits: int) -> np.ndarray:
    """Diagonal matrix ``sum_i I_z,i``."""
    return np.diag(zeeman_diagonal(n_qubits, range(1, n_qubits + 1), [1.0] * n_qubits))
