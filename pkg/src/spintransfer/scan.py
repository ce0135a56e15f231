"""Time scans of the transfer diagnostics.

Grid points are evaluated in fixed-size chunks so that the arithmetic of each
point does not depend on how many workers share the job.
"""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .chain import ChainSpec
from .errors import SpecError
from .evolution import Propagator
from .transfer import (
    DET_TOL,
    PST_TOL,
    RANK_TOL,
    TransferKernel,
    condition_numbers,
    info_arrays,
    pst_residuals,
    rank_from_singular_values,
)

CSV_COLUMNS = ("t", "detA", "rank", "cond", "pst_exact", "pst_local")
TIME_UNIT = "1/D"
CHUNK_SIZE = 32
# grid minima of the local-unitary residual below this are refined
PST_CANDIDATE = 0.25
# grid minima of |det A| below DET_REFINE_FACTOR * det_tol are refined
DET_REFINE_FACTOR = 1e4

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ScanPoint:
    t: float
    det: float
    rank: int
    cond: float
    pst_exact: bool
    pst_local: bool


@dataclass
class ScanResult:
    times: np.ndarray
    det: np.ndarray
    rank: np.ndarray
    cond: np.ndarray
    pst_exact: np.ndarray
    pst_local: np.ndarray
    singular_instants: List[float] = field(default_factory=list)
    pst_instants: List[float] = field(default_factory=list)
    near_zero_intervals: List[Tuple[float, float]] = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def points(self) -> List[ScanPoint]:
        return [
            ScanPoint(float(t), float(d), int(r), float(c), bool(e), bool(loc))
            for t, d, r, c, e, loc in zip(
                self.times, self.det, self.rank, self.cond, self.pst_exact, self.pst_local
            )
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# time_unit={TIME_UNIT}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in self.points:
            writer.writerow(
                [_fmt(p.t), _fmt(p.det), p.rank, _fmt(p.cond), int(p.pst_exact), int(p.pst_local)]
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "time_unit": TIME_UNIT,
            "columns": list(CSV_COLUMNS),
            "rows": [
                [p.t, p.det, p.rank, _json_float(p.cond), p.pst_exact, p.pst_local]
                for p in self.points
            ],
            "singular_instants": self.singular_instants,
            "pst_instants": self.pst_instants,
            "near_zero_intervals": [list(iv) for iv in self.near_zero_intervals],
            "settings": self.settings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


def _json_float(v: float):
    return v if math.isfinite(v) else "inf"


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12, max_iter: int = 200):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    # endpoints are candidates too: the minimum may sit on the boundary
    best = min(((c, fc), (d, fd), (a, f(a)), (b, f(b))), key=lambda p: p[1])
    return best


def _local_minima(values: np.ndarray) -> List[int]:
    n = len(values)
    out = []
    for i in range(n):
        left = values[i - 1] if i > 0 else np.inf
        right = values[i + 1] if i < n - 1 else np.inf
        if values[i] <= left and values[i] <= right and not (values[i] == left and i > 0):
            out.append(i)
    return out


def _bracket(times, i):
    return times[max(i - 1, 0)], times[min(i + 1, len(times) - 1)]


def _dedupe(instants, spacing):
    out = []
    for t in sorted(instants):
        if not out or t - out[-1] > spacing:
            out.append(t)
    return out


def _validate_grid(t_grid) -> np.ndarray:
    times = np.asarray(t_grid, dtype=float).reshape(-1)
    if times.size == 0:
        raise SpecError("time grid is empty", "t_grid")
    if not np.all(np.isfinite(times)):
        raise SpecError("time grid contains non-finite values", "t_grid")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise SpecError("time grid must be strictly increasing", "t_grid")
    return times


def evaluate_transfer(kernel: TransferKernel, times: np.ndarray, workers: int = 1, chunk_size: int = CHUNK_SIZE) -> np.ndarray:
    chunks = [times[i : i + chunk_size] for i in range(0, len(times), chunk_size)]
    if workers <= 1 or len(chunks) == 1:
        parts = [kernel.evaluate(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(kernel.evaluate, chunks))
    return np.concatenate(parts, axis=0)


def scan_time(
    spec: ChainSpec,
    rest,
    t_grid,
    *,
    det_tol: float = DET_TOL,
    rank_tol: float = RANK_TOL,
    pst_tol: float = PST_TOL,
    workers: int = 1,
    refine: bool = True,
    propagator: Optional[Propagator] = None,
    kernel: Optional[TransferKernel] = None,
) -> ScanResult:
    """Transfer diagnostics on a strictly increasing time grid.

    Besides the per-point determinant, rank, condition number and transfer
    flags, instants where ``det A`` vanishes and instants of perfect transfer
    are located between grid points: grid minima are refined by golden-section
    search and sign changes of ``det A`` by Brent's method.
    """
    times = _validate_grid(t_grid)
    if kernel is None:
        kernel = TransferKernel(spec, rest, propagator)
    tms = evaluate_transfer(kernel, times, workers)
    matrix, _ = info_arrays(tms)
    det = np.linalg.det(matrix)
    s = np.linalg.svd(matrix, compute_uv=False)
    rank = rank_from_singular_values(s, rank_tol)
    cond = condition_numbers(s)
    exact_res, local_res, _ = pst_residuals(tms)
    result = ScanResult(
        times=times,
        det=det,
        rank=rank.astype(int),
        cond=cond,
        pst_exact=exact_res < pst_tol,
        pst_local=local_res < pst_tol,
        settings={
            "n_sites": spec.n_sites,
            "det_tol": det_tol,
            "rank_tol": rank_tol,
            "pst_tol": pst_tol,
        },
    )
    result.near_zero_intervals = _flagged_intervals(times, np.abs(det) < det_tol)
    if refine:
        result.singular_instants = _refine_zeros(kernel, times, det, det_tol)
        result.pst_instants = _refine_pst(kernel, times, local_res, pst_tol)
    return result


def _flagged_intervals(times, mask):
    out = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        if start is not None and (not flag or i == len(mask) - 1):
            end = i if flag else i - 1
            out.append((float(times[start]), float(times[end])))
            start = None
    return out


def _det_at(kernel, t):
    matrix, _ = info_arrays(kernel.evaluate([t])[0])
    return float(np.linalg.det(matrix))


def _refine_zeros(kernel, times, det, det_tol):
    found = []
    absdet = np.abs(det)
    for i in _local_minima(absdet):
        if absdet[i] >= DET_REFINE_FACTOR * det_tol:
            continue
        a, b = _bracket(times, i)
        if a == b:
            t_star, f_star = float(a), float(absdet[i])
        else:
            t_star, f_star = golden_section(lambda t: abs(_det_at(kernel, t)), a, b)
        if f_star < det_tol:
            found.append(float(t_star))
    for i in range(len(times) - 1):
        if det[i] * det[i + 1] < 0:
            root = brentq(lambda t: _det_at(kernel, t), times[i], times[i + 1], xtol=1e-14)
            found.append(float(root))
    spacing = float(np.min(np.diff(times))) if len(times) > 1 else 0.0
    return _dedupe(found, spacing)


def _refine_pst(kernel, times, local_res, pst_tol):
    def residual(t):
        return float(pst_residuals(kernel.evaluate([t])[0])[1])

    found = []
    for i in _local_minima(local_res):
        if local_res[i] >= PST_CANDIDATE:
            continue
        a, b = _bracket(times, i)
        if a == b:
            t_star, f_star = float(a), float(local_res[i])
        else:
            t_star, f_star = golden_section(residual, a, b)
        if f_star < pst_tol:
            found.append(float(t_star))
    spacing = float(np.min(np.diff(times))) if len(times) > 1 else 0.0
    return _dedupe(found, spacing)
