"""Sender-to-receiver transfer map, the Bloch-parameter system and its diagnostics.

Index conventions: a transfer matrix ``T`` is stored as a 4x4 array whose row
``2*g + d`` holds the receiver element ``(g, d)`` and whose column
``2*a + b`` multiplies the sender element ``(a, b)``, so that
``rho_R[g, d] = sum_ab T[2g+d, 2a+b] * rho_S[a, b]``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chain import ChainSpec
from .errors import SpecError, SpinTransferError
from .evolution import Propagator, chain_propagator, evolve_array
from .initial import assemble_initial
from .states import as_array, partial_trace_array, permute_sites

DET_TOL = 1e-8
RANK_TOL = 1e-8
PST_TOL = 1e-8
# singular values below this are rounding noise whatever the largest one is
SINGULAR_FLOOR = 1e-12

COMPLETE = "complete"
PARTIAL = "partial"
NONE = "none"

PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


def pair_index(a: int, b: int) -> int:
    return 2 * a + b


def matrix_unit(a: int, b: int) -> np.ndarray:
    e = np.zeros((2, 2), dtype=complex)
    e[a, b] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    data: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.shape != (4, 4):
            raise SpinTransferError(f"transfer matrix must be 4x4, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "time", float(self.time))

    def entry(self, g: int, d: int, a: int, b: int) -> complex:
        return complex(self.data[pair_index(g, d), pair_index(a, b)])

    def apply(self, rho_s) -> np.ndarray:
        """Receiver matrix for the 2x2 sender matrix ``rho_s``."""
        return (self.data @ as_array(rho_s).reshape(4)).reshape(2, 2)

    def trace_residual(self) -> float:
        # receiver trace equals sender trace
        target = np.array([1, 0, 0, 1])
        return float(np.max(np.abs(self.data[0] + self.data[3] - target)))

    def hermiticity_residual(self) -> float:
        t = self.data
        worst = 0.0
        for a, b in PAIRS:
            dev = abs(t[pair_index(1, 0), pair_index(b, a)] - np.conj(t[pair_index(0, 1), pair_index(a, b)]))
            worst = max(worst, dev)
        return float(worst)


@dataclass(frozen=True, eq=False)
class InfoSystem:
    """Affine map ``x -> matrix @ x + offset`` onto ``(Re rho_R01, Im rho_R01, rho_R00)``."""

    matrix: np.ndarray
    offset: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        o = np.array(self.offset, dtype=float)
        if m.shape != (3, 3) or o.shape != (3,):
            raise SpinTransferError("info system needs a 3x3 matrix and a length-3 offset")
        m.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", o)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(list(x), dtype=float) + self.offset

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class TransferClass:
    rank: int
    det: float
    classification: str
    condition_number: float
    singular_values: tuple = field(default=())
    near_singular: bool = False


@dataclass(frozen=True)
class PSTResult:
    is_pst_exact: bool
    is_pst_up_to_local_unitary: bool
    witness: Optional[np.ndarray]
    exact_residual: float
    local_residual: float
    phase: float


def receiver_observables(rho_r) -> np.ndarray:
    r = as_array(rho_r)
    return np.array([r[0, 1].real, r[0, 1].imag, r[0, 0].real])


# -- transfer matrix -------------------------------------------------------


def _probe_column(spec, rest, p, t, a, b):
    probe = assemble_initial(matrix_unit(a, b), as_array(rest), spec).data
    evolved = evolve_array(probe, p, t)
    return partial_trace_array(evolved, [spec.receiver], spec.n_sites).reshape(4)


def compute_transfer_matrix(
    spec: ChainSpec,
    rest,
    p: Optional[Propagator] = None,
    t: float = 0.0,
    method: str = "probe",
) -> TransferMatrix:
    """Transfer map at time ``t``.

    ``method="probe"`` evolves each sender matrix unit times the rest state
    and reads one column per probe.  ``method="spectral"`` evaluates the
    precomputed :class:`TransferKernel` (cheaper per point, costlier to set up).
    """
    if p is None:
        p = chain_propagator(spec)
    if method == "probe":
        cols = [_probe_column(spec, rest, p, t, a, b) for a, b in PAIRS]
        return TransferMatrix(np.stack(cols, axis=1), t)
    if method == "spectral":
        return TransferMatrix(TransferKernel(spec, rest, p).evaluate([t])[0], t)
    raise ValueError(f"unknown method {method!r}")


class TransferKernel:
    """Time-independent factorization of the transfer map.

    With ``U = V diag(phi) V^+`` and ``phi_j = exp(-i E_j t)``::

        T[gd, ab](t) = sum_jk phi_j W_jk conj(phi_k),
        W_jk = (V^+ P_ab V)_jk (V^+ Q_dg V)_kj

    where ``P_ab`` is the sender unit ``|a><b|`` times the rest state and
    ``Q_dg = |d><g|`` on the receiver.  Only the rows ``gd = 00, 01`` are
    stored for Hermitian rest states; the others follow from the trace and
    Hermiticity relations.
    """

    def __init__(self, spec: ChainSpec, rest, p: Optional[Propagator] = None):
        self.spec = spec
        self.propagator = p if p is not None else chain_propagator(spec)
        rest_data = np.asarray(as_array(rest))
        self.hermitian_rest = bool(np.max(np.abs(rest_data - rest_data.conj().T)) <= 1e-12)
        self.rest_trace = complex(np.trace(rest_data))
        v = self.propagator.vectors
        real = np.isrealobj(v) and np.allclose(rest_data.imag, 0, atol=0)
        if real:
            rest_data = rest_data.real
        self.rows = ((0, 0), (0, 1)) if self.hermitian_rest else PAIRS
        n, receiver = spec.n_sites, spec.receiver
        p_primes = {}
        for a, b in PAIRS:
            unit = np.zeros((2, 2))
            unit[a, b] = 1.0
            full = np.kron(unit, rest_data)
            if spec.sender != 1:
                order = [spec.sender] + [s for s in range(1, n + 1) if s != spec.sender]
                full = permute_sites(full, order)
            p_primes[a, b] = v.conj().T @ full @ v
        q_primes = {}
        for g, d in self.rows:
            q = np.zeros((2, 2))
            q[d, g] = 1.0
            full = np.kron(np.kron(np.eye(2 ** (receiver - 1)), q), np.eye(2 ** (n - receiver)))
            q_primes[g, d] = v.conj().T @ full @ v
        blocks = []
        for gd in self.rows:
            for ab in PAIRS:
                blocks.append(p_primes[ab] * q_primes[gd].T)
        self._w = np.concatenate(blocks, axis=0)
        self._w.setflags(write=False)
        self.is_real = np.isrealobj(self._w)

    def evaluate(self, times) -> np.ndarray:
        """Transfer matrices at each time, shape ``(len(times), 4, 4)``."""
        times = np.asarray(times, dtype=float).reshape(-1)
        e = self.propagator.energies
        m, d = times.shape[0], e.shape[0]
        arg = np.outer(e, times)
        cos, sin = np.cos(arg), np.sin(arg)
        # phi = cos - i sin, conj(phi) = cos + i sin
        if self.is_real:
            y = self._w @ np.concatenate([cos, sin], axis=1)
            x = y[:, :m] + 1j * y[:, m:]
        else:
            x = self._w @ (cos + 1j * sin)
        x = x.reshape(len(self.rows) * 4, d, m)
        vals = np.einsum("jm,kjm->km", cos - 1j * sin, x)
        out = np.zeros((m, 4, 4), dtype=complex)
        for r, (g, d_) in enumerate(self.rows):
            out[:, pair_index(g, d_), :] = vals[4 * r : 4 * r + 4].T
        if self.hermitian_rest:
            delta = np.array([1, 0, 0, 1]) * self.rest_trace
            out[:, 3, :] = delta - out[:, 0, :]
            for a, b in PAIRS:
                out[:, pair_index(1, 0), pair_index(b, a)] = np.conj(out[:, 1, pair_index(a, b)])
        return out


# -- information system ------------------------------------------------------


def info_arrays(t: np.ndarray):
    """Vectorized Bloch-parameter system for transfer arrays of shape ``(..., 4, 4)``.

    Substituting ``rho_S = [[x1, x2 + i x3], [x2 - i x3, 1 - x1]]`` into
    ``rho_R[g, d] = sum T[gd, ab] rho_S[a, b]`` gives
    ``rho_R[g, d] = x1 (T[gd,00] - T[gd,11]) + x2 (T[gd,01] + T[gd,10])
    + i x3 (T[gd,01] - T[gd,10]) + T[gd,11]``.
    """
    t = np.asarray(t)

    def coeffs(row):
        c1 = t[..., row, 0] - t[..., row, 3]
        c2 = t[..., row, 1] + t[..., row, 2]
        c3 = 1j * (t[..., row, 1] - t[..., row, 2])
        return np.stack([c1, c2, c3], axis=-1), t[..., row, 3]

    coh, coh0 = coeffs(1)
    pop, pop0 = coeffs(0)
    matrix = np.stack([coh.real, coh.imag, pop.real], axis=-2)
    offset = np.stack([coh0.real, coh0.imag, pop0.real], axis=-1)
    return matrix, offset


def compute_info_system(tm: TransferMatrix) -> InfoSystem:
    matrix, offset = info_arrays(tm.data)
    return InfoSystem(matrix, offset, tm.time)


def rank_from_singular_values(s, rank_tol: float = RANK_TOL):
    s = np.asarray(s)
    cutoff = np.maximum(rank_tol * s[..., :1], SINGULAR_FLOOR)
    return np.sum(s >= cutoff, axis=-1)


def classification_of(rank: int) -> str:
    if rank == 3:
        return COMPLETE
    if rank == 0:
        return NONE
    return PARTIAL


def condition_numbers(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(s[..., -1] > 0, s[..., 0] / s[..., -1], np.inf)
    return cond


def classify(a, det_tol: float = DET_TOL, rank_tol: float = RANK_TOL) -> TransferClass:
    """Rank of the Bloch-parameter system from singular values relative to the largest."""
    if det_tol <= 0 or rank_tol <= 0:
        raise SpecError("tolerances must be positive", "tolerance")
    m = a.matrix if isinstance(a, InfoSystem) else np.asarray(a, dtype=float)
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(rank_from_singular_values(s, rank_tol))
    det = float(np.linalg.det(m))
    return TransferClass(
        rank=rank,
        det=det,
        classification=classification_of(rank),
        condition_number=float(condition_numbers(s)),
        singular_values=tuple(float(v) for v in s),
        near_singular=abs(det) < det_tol,
    )


# -- perfect state transfer ----------------------------------------------------


def local_unitary_map(phase: float) -> np.ndarray:
    """Transfer matrix of ``rho -> U rho U^+`` with ``U = diag(e^{i phase}, e^{-i phase})``."""
    return np.diag([1.0, np.exp(2j * phase), np.exp(-2j * phase), 1.0])


def pst_residuals(t: np.ndarray):
    """Exact and local-unitary residuals for transfer arrays ``(..., 4, 4)``."""
    t = np.asarray(t)
    eye = np.eye(4)
    exact = np.max(np.abs(t - eye), axis=(-2, -1))
    phase = np.angle(t[..., 1, 1]) / 2
    target = np.zeros(t.shape, dtype=complex)
    target[..., 0, 0] = 1
    target[..., 3, 3] = 1
    target[..., 1, 1] = np.exp(2j * phase)
    target[..., 2, 2] = np.exp(-2j * phase)
    local = np.max(np.abs(t - target), axis=(-2, -1))
    return exact, local, phase


def pst_check(tm, tol: float = PST_TOL) -> PSTResult:
    """Perfect-transfer test, exact and up to a diagonal local unitary on the receiver.

    The witness ``U`` satisfies ``rho_R = U rho_S U^+``; the phase is the one
    that aligns the coherence entry ``T[01, 01]`` with ``e^{2 i phase}``.
    """
    if tol <= 0:
        raise SpecError("tolerance must be positive", "tolerance")
    data = tm.data if isinstance(tm, TransferMatrix) else np.asarray(tm)
    exact, local, phase = pst_residuals(data)
    exact, local, phase = float(exact), float(local), float(phase)
    ok_local = local < tol
    witness = np.diag([np.exp(1j * phase), np.exp(-1j * phase)]) if ok_local else None
    return PSTResult(exact < tol, ok_local, witness, exact, local, phase)


# -- closed forms for the homogeneous chain with ground rest state --------------


def closed_form_r(n: int, t):
    """Transfer amplitude of the 3- and 4-site chains (``D = 1``).

    n = 3: ``-sin^2(t / (2 sqrt 2))``;
    n = 4: ``(2 sin((1+sqrt5) t/4) + (3+sqrt5) sin((1-sqrt5) t/4)) / (5+sqrt5)``.
    """
    t = np.asarray(t, dtype=float)
    if n == 3:
        out = -np.sin(t / (2 * np.sqrt(2))) ** 2
    elif n == 4:
        s5 = np.sqrt(5.0)
        out = (2 * np.sin((1 + s5) * t / 4) + (3 + s5) * np.sin((1 - s5) * t / 4)) / (5 + s5)
    else:
        raise SpecError(f"closed form available for n in (3, 4), got {n}", "n")
    return float(out) if out.ndim == 0 else out


def closed_form_transfer(n: int, t: float) -> TransferMatrix:
    """Reference closed-form transfer entries for ground rest; for n = 4 the coherences are i r and -i r."""
    r = closed_form_r(n, t)
    data = np.zeros((4, 4), dtype=complex)
    data[0, 0] = 1
    data[3, 3] = r**2
    data[0, 3] = 1 - r**2
    if n == 3:
        data[1, 1] = data[2, 2] = r
    else:
        data[1, 1] = 1j * r
        data[2, 2] = -1j * r
    return TransferMatrix(data, t)
