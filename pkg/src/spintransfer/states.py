"""Multi-qubit basis conventions and density-matrix utilities.

Basis label of a register state |a_1 ... a_N> is ``sum_i a_i * 2**(N - i)``,
so site 1 is the most significant bit and the left factor of a Kronecker
product owns the high bits.  Sites are numbered from 1 throughout the public
API.  Single-qubit |0> = (1, 0) is spin up: I_z = diag(1/2, -1/2).
"""

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BlochBallError, InvariantError, SpinTransferError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
BALL_TOL = 1e-12

# single-site spin operators
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I_X = SIGMA_X / 2
I_Y = SIGMA_Y / 2
I_Z = SIGMA_Z / 2
I_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
I_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|

SPIN_OPERATORS = {"x": I_X, "y": I_Y, "z": I_Z, "plus": I_PLUS, "minus": I_MINUS}

PHYSICAL = "physical"
PROBE = "probe"


def basis_index(bits: Sequence[int]) -> int:
    """Integer label of the multi-index ``(a_1, ..., a_N)``."""
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"basis bits must be 0 or 1, got {b!r}")
        index = (index << 1) | int(b)
    return index


def basis_bits(index: int, n_qubits: int) -> tuple:
    """Inverse of :func:`basis_index`."""
    if not 0 <= index < 2**n_qubits:
        raise ValueError(f"index {index} outside register of {n_qubits} qubits")
    return tuple((index >> (n_qubits - i)) & 1 for i in range(1, n_qubits + 1))


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 0 or 2**n != dim:
        raise SpinTransferError(f"dimension {dim} is not a power of two")
    return n


def check_physical(data: np.ndarray) -> None:
    """Raise :class:`InvariantError` unless ``data`` is a valid density matrix."""
    herm = float(np.max(np.abs(data - data.conj().T))) if data.size else 0.0
    if herm > HERMITIAN_TOL:
        raise InvariantError(f"matrix is not Hermitian (max deviation {herm:.3e})", herm)
    tr = np.trace(data)
    if abs(tr - 1) > TRACE_TOL:
        raise InvariantError(f"trace {tr.real:.15g} differs from 1", abs(tr - 1))
    low = float(np.linalg.eigvalsh((data + data.conj().T) / 2)[0])
    if low < POSITIVITY_TOL:
        raise InvariantError(f"matrix is not positive semidefinite (eigenvalue {low:.3e})", low)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable square matrix on a qubit register.

    In ``"physical"`` mode the matrix is validated as a density matrix on
    construction.  ``"probe"`` mode only checks the shape; it carries matrix
    units and other non-Hermitian operators through the linear evolution.
    """

    data: np.ndarray
    mode: str = PHYSICAL

    def __post_init__(self):
        if self.mode not in (PHYSICAL, PROBE):
            raise ValueError(f"unknown mode {self.mode!r}")
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise SpinTransferError(f"density matrix must be square, got shape {data.shape}")
        n_qubits_of(data.shape[0])
        if self.mode == PHYSICAL:
            check_physical(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def probe(cls, data) -> "DensityMatrix":
        return cls(data, PROBE)

    @classmethod
    def _trusted(cls, data: np.ndarray, mode: str) -> "DensityMatrix":
        # skips validation; callers guarantee the invariants
        obj = object.__new__(cls)
        data = np.asarray(data, dtype=complex)
        data.setflags(write=False)
        object.__setattr__(obj, "data", data)
        object.__setattr__(obj, "mode", mode)
        return obj

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.dim)

    @property
    def is_physical(self) -> bool:
        return self.mode == PHYSICAL

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, mode={self.mode!r})"


MatrixLike = Union[DensityMatrix, np.ndarray]


def as_array(rho: MatrixLike) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _mode_of(*mats) -> str:
    if all(isinstance(m, DensityMatrix) and m.is_physical for m in mats):
        return PHYSICAL
    return PROBE


@dataclass(frozen=True)
class BlochVector:
    """Real parameters of a single-qubit density matrix.

    ``rho_00 = x1``, ``rho_01 = x2 + i x3``, ``rho_11 = 1 - x1``.
    """

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            object.__setattr__(self, name, float(getattr(self, name)))
        excess = self.ball_excess()
        if excess > BALL_TOL:
            raise BlochBallError(
                f"Bloch parameters {self.as_array().tolist()} violate the ball constraint by {excess:.3e}",
                excess,
            )

    @classmethod
    def from_cartesian(cls, r) -> "BlochVector":
        """Build from the usual Bloch vector ``rho = (I + r . sigma) / 2``."""
        rx, ry, rz = (float(v) for v in r)
        return cls((1 + rz) / 2, rx / 2, -ry / 2)

    def ball_excess(self) -> float:
        return ball_excess(self.as_array())

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def cartesian(self) -> np.ndarray:
        return np.array([2 * self.x2, -2 * self.x3, 2 * self.x1 - 1])

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))


def ball_excess(x) -> float:
    """``(1 - 2 x1)^2 + (2 x2)^2 + (2 x3)^2 - 1``; positive outside the ball."""
    x1, x2, x3 = (float(v) for v in x)
    return (1 - 2 * x1) ** 2 + (2 * x2) ** 2 + (2 * x3) ** 2 - 1


def as_bloch(x) -> BlochVector:
    return x if isinstance(x, BlochVector) else BlochVector(*x)


def random_bloch(rng: np.random.Generator, radius: float = 1.0) -> BlochVector:
    """Uniform sample from the Bloch ball of the given radius."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return BlochVector.from_cartesian(direction * radius * rng.uniform() ** (1 / 3))


def random_density(n_qubits: int, rng: np.random.Generator, rank: int = None) -> DensityMatrix:
    """Random full-rank (or given-rank) density matrix via a Ginibre draw."""
    d = 2**n_qubits
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def tensor_product(a: MatrixLike, b: MatrixLike):
    """Kronecker product; the left factor occupies the lower-numbered sites.

    Returns a :class:`DensityMatrix` when either input is one, otherwise a
    plain array.
    """
    out = np.kron(as_array(a), as_array(b))
    if isinstance(a, DensityMatrix) or isinstance(b, DensityMatrix):
        # product of physical states is physical; no need to re-diagonalize
        return DensityMatrix._trusted(out, _mode_of(a, b))
    return out


def _normalize_sites(sites: Iterable[int], n_qubits: int) -> list:
    sites = sorted(set(int(s) for s in sites))
    for s in sites:
        if not 1 <= s <= n_qubits:
            raise SpinTransferError(f"site {s} outside 1..{n_qubits}")
    return sites


def partial_trace_array(data: np.ndarray, keep: Sequence[int], n_qubits: int) -> np.ndarray:
    keep = _normalize_sites(keep, n_qubits)
    if not keep:
        raise SpinTransferError("nothing to keep")
    traced = [s for s in range(1, n_qubits + 1) if s not in keep]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    order = [s - 1 for s in keep] + [s - 1 for s in traced]
    t = data.reshape((2,) * (2 * n_qubits))
    t = t.transpose(order + [n_qubits + i for i in order]).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def partial_trace(rho: MatrixLike, keep: Iterable[int]) -> DensityMatrix:
    """Reduce ``rho`` onto the sites in ``keep`` (ascending site order kept)."""
    data = as_array(rho)
    out = partial_trace_array(data, list(keep), n_qubits_of(data.shape[0]))
    return DensityMatrix._trusted(out, _mode_of(rho))


def permute_sites(data: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder a register operator whose i-th tensor factor sits on site ``order[i]``.

    The result has its factors in ascending site order.
    """
    n = len(order)
    if sorted(order) != list(range(1, n + 1)):
        raise SpinTransferError(f"order {order!r} is not a permutation of 1..{n}")
    # axis i currently holds site order[i]; we want axis k to hold site k+1
    perm = [list(order).index(k + 1) for k in range(n)]
    t = np.asarray(data).reshape((2,) * (2 * n))
    return t.transpose(perm + [n + p for p in perm]).reshape(2**n, 2**n)


def bloch_to_density(x) -> DensityMatrix:
    """2x2 density matrix with ``rho_00 = x1`` and ``rho_01 = x2 + i x3``."""
    x = as_bloch(x)
    data = np.array(
        [[x.x1, x.x2 + 1j * x.x3], [x.x2 - 1j * x.x3, 1 - x.x1]], dtype=complex
    )
    return DensityMatrix._trusted(data, PHYSICAL)


def density_to_bloch(rho: MatrixLike) -> BlochVector:
    data = as_array(rho)
    if data.shape != (2, 2):
        raise SpinTransferError(f"expected a 2x2 matrix, got shape {data.shape}")
    if not isinstance(rho, DensityMatrix) or rho.is_physical:
        check_physical(np.asarray(data, dtype=complex))
    return BlochVector(data[0, 0].real, data[0, 1].real, data[0, 1].imag)
