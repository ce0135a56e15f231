"""Three-channel polarization readout at the receiver and linear reconstruction.

Channel ``n`` measures the receiver spin projection on direction ``a_n``::

    J_n = a_n1 Re rho_01 - a_n2 Im rho_01 + a_n3 (rho_00 - 1/2)

and, through the Bloch-parameter system, ``J = B x + B0``.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chain import ChainSpec
from .errors import SpecError
from .evolution import Propagator, chain_propagator, receiver_state
from .states import I_X, I_Y, I_Z, as_array, ball_excess
from .transfer import (
    COMPLETE,
    RANK_TOL,
    InfoSystem,
    classification_of,
    rank_from_singular_values,
    receiver_observables,
)

DIRECTION_DET_TOL = 1e-10
RESIDUAL_TOL = 1e-9
# unprojected solutions within this ball excess are pulled back onto the ball
PROJECTION_SLACK = 1e-6

# sign pattern of the readout rows: (Re rho01, Im rho01, rho00) enter as (+, -, +)
_SIGNS = np.array([1.0, -1.0, 1.0])


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Rows are the measurement directions of the three channels."""

    matrix: np.ndarray
    warn_normalization: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise SpecError(f"direction matrix must be 3x3, got {m.shape}", "directions")
        det = float(np.linalg.det(m))
        if abs(det) <= DIRECTION_DET_TOL:
            raise SpecError(f"measurement directions are linearly dependent (det {det:.3e})", "directions")
        if self.warn_normalization and (
            np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-12)
        ):
            warnings.warn("direction rows are not non-negative with unit sum", stacklevel=2)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "DirectionSet":
        return cls(np.eye(3))


@dataclass(frozen=True)
class PolarizationReadout:
    values: tuple
    time: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != 3:
            raise SpecError(f"expected three polarizations, got {len(vals)}", "polarizations")
        object.__setattr__(self, "values", vals)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass
class ReconstructionReport:
    x: Optional[np.ndarray]
    rank: int
    classification: str
    residual: float
    condition_number: float
    nullspace: np.ndarray
    singular_values: np.ndarray
    functionals: np.ndarray = field(default=None)
    functional_values: np.ndarray = field(default=None)
    consistent: bool = True
    ball_excess: float = 0.0
    projected: bool = False
    ball_violation: bool = False

    @property
    def is_complete(self) -> bool:
        return self.classification == COMPLETE

    def to_dict(self) -> dict:
        def num(v):
            return v if math.isfinite(v) else "inf"

        return {
            "x": None if self.x is None else [float(v) for v in self.x],
            "rank": int(self.rank),
            "classification": self.classification,
            "residual": float(self.residual),
            "condition_number": num(float(self.condition_number)),
            "nullspace": [[float(v) for v in row] for row in self.nullspace],
            "singular_values": [float(v) for v in self.singular_values],
            "functionals": [[float(v) for v in row] for row in self.functionals],
            "functional_values": [float(v) for v in self.functional_values],
            "consistent": bool(self.consistent),
            "ball_excess": float(self.ball_excess),
            "projected": bool(self.projected),
            "ball_violation": bool(self.ball_violation),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def polarization(rho_r, a) -> float:
    """Mean receiver spin projection on direction ``a``."""
    r = as_array(rho_r)
    a1, a2, a3 = (float(v) for v in a)
    return a1 * r[0, 1].real - a2 * r[0, 1].imag + a3 * (r[0, 0].real - 0.5)


def polarization_trace(rho_r, a) -> float:
    """Same quantity as :func:`polarization`, computed as ``Tr(rho a.I)``."""
    op = a[0] * I_X + a[1] * I_Y + a[2] * I_Z
    return float(np.trace(as_array(rho_r) @ op).real)


def compute_B(a: InfoSystem, dirs: DirectionSet):
    """Readout system ``J = B x + B0`` for the given directions."""
    signed = dirs.matrix * _SIGNS
    b = signed @ a.matrix
    b0 = signed @ a.offset - dirs.matrix[:, 2] / 2
    return b, b0


def measure_polarizations(
    spec: ChainSpec,
    x,
    rest,
    t: float,
    dirs: DirectionSet,
    propagator: Optional[Propagator] = None,
) -> PolarizationReadout:
    """Simulate the three identical channels and read one polarization from each."""
    if propagator is None:
        propagator = chain_propagator(spec)
    values = []
    for row in dirs.matrix:
        rho_r = receiver_state(spec, x, rest, t, propagator)
        values.append(polarization(rho_r, row))
    return PolarizationReadout(tuple(values), t)


def add_noise(j: PolarizationReadout, sigma: float, seed=None) -> PolarizationReadout:
    """Gaussian perturbation of each polarization; reproducible for a fixed seed."""
    if sigma < 0:
        raise SpecError(f"sigma must be >= 0, got {sigma}", "sigma")
    if sigma == 0:
        return PolarizationReadout(j.values, j.time, 0.0)
    rng = np.random.default_rng(seed)
    noisy = j.as_array() + rng.normal(0.0, sigma, size=3)
    return PolarizationReadout(tuple(noisy), j.time, sigma)


def _project_to_ball(x: np.ndarray) -> np.ndarray:
    r = np.array([2 * x[1], -2 * x[2], 2 * x[0] - 1])
    r /= max(np.linalg.norm(r), 1.0)
    return np.array([(1 + r[2]) / 2, r[0] / 2, -r[1] / 2])


def solve_affine(m, offset, y, rank_tol: float = RANK_TOL, residual_tol: float = RESIDUAL_TOL) -> ReconstructionReport:
    """Least-norm solution of ``m x + offset = y`` with rank and null-space diagnostics."""
    m = np.asarray(m, dtype=float)
    rhs = np.asarray(y, dtype=float) - np.asarray(offset, dtype=float)
    u, s, vt = np.linalg.svd(m)
    rank = int(rank_from_singular_values(s, rank_tol))
    coeffs = (u[:, :rank].T @ rhs) / s[:rank]
    x = vt[:rank].T @ coeffs
    residual = float(np.linalg.norm(m @ x - rhs))
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    report = ReconstructionReport(
        x=x if rank > 0 else None,
        rank=rank,
        classification=classification_of(rank),
        residual=residual,
        condition_number=cond,
        nullspace=vt[rank:].copy(),
        singular_values=s,
        functionals=vt[:rank].copy(),
        functional_values=coeffs,
        consistent=residual <= residual_tol,
    )
    if rank == 3:
        excess = ball_excess(x)
        report.ball_excess = excess
        if excess > PROJECTION_SLACK:
            report.ball_violation = True
        elif excess > 0:
            report.x = _project_to_ball(x)
            report.projected = True
    return report


def reconstruct_from_polarizations(j, b, b0, tol: float = RANK_TOL) -> ReconstructionReport:
    """Recover the sender's Bloch parameters from the three polarizations.

    Rank-deficient systems return the least-norm solution together with the
    determined linear functionals of ``x`` and the unresolved null space.
    """
    values = j.as_array() if isinstance(j, PolarizationReadout) else np.asarray(j, dtype=float)
    return solve_affine(b, b0, values, tol)


def reconstruct_from_receiver(rho_r, a: InfoSystem, tol: float = RANK_TOL) -> ReconstructionReport:
    return solve_affine(a.matrix, a.offset, receiver_observables(rho_r), tol)
