"""Run configuration for the command-line tools.

A config is a YAML document; every section is optional::

    chain:
      n_sites: 3
      coupling: 1.0
      omegas: [0, 0, 0]
      sender: 1
      receiver: 3
    rest:
      kind: thermal        # or ground
      beta: 1.0
    grid:
      t_min: 0.0
      t_max: 10.0
      points: 1001
    measurement:
      time: 2.221441469
      sender: [0.3, 0.1, -0.2]
      directions: [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
      sigma: 0.0
      seed: 0
      expect: complete     # optional: complete, partial or none
    tolerances:
      det: 1.0e-8
      rank: 1.0e-8
      pst: 1.0e-8
    output:
      dir: out
      format: csv
    workers: 1
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .chain import ChainSpec
from .errors import SpecError
from .initial import RestStateKind
from .measurement import DirectionSet
from .states import BlochVector
from .transfer import DET_TOL, PST_TOL, RANK_TOL

SECTIONS = ("chain", "rest", "grid", "measurement", "tolerances", "output", "workers")
FORMATS = ("csv", "json")
CLASSIFICATIONS = ("complete", "partial", "none")


@dataclass
class RunConfig:
    spec: ChainSpec
    rest: RestStateKind = field(default_factory=RestStateKind)
    t_min: float = 0.0
    t_max: float = 10.0
    points: int = 1001
    directions: DirectionSet = field(default_factory=DirectionSet.identity)
    sender: Optional[BlochVector] = None
    time: Optional[float] = None
    sigma: float = 0.0
    seed: int = 0
    expect: Optional[str] = None
    det_tol: float = DET_TOL
    rank_tol: float = RANK_TOL
    pst_tol: float = PST_TOL
    output_dir: Path = Path(".")
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)) or self.t_min >= self.t_max:
            raise SpecError(f"grid needs t_min < t_max, got {self.t_min} and {self.t_max}", "grid.t_min")
        if self.points < 2:
            raise SpecError(f"grid needs at least 2 points, got {self.points}", "grid.points")
        if self.sigma < 0:
            raise SpecError(f"sigma must be >= 0, got {self.sigma}", "measurement.sigma")
        if self.expect is not None and self.expect not in CLASSIFICATIONS:
            raise SpecError(f"expect must be one of {CLASSIFICATIONS}, got {self.expect!r}", "measurement.expect")
        for name in ("det_tol", "rank_tol", "pst_tol"):
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive", f"tolerances.{name[:-4]}")
        if self.format not in FORMATS:
            raise SpecError(f"format must be one of {FORMATS}, got {self.format!r}", "output.format")
        if self.workers < 1:
            raise SpecError(f"workers must be >= 1, got {self.workers}", "workers")

    def grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.points)


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        raise SpecError(f"section {name!r} must be a mapping", name)
    return value


def _number(section: dict, key: str, where: str, cast=float, default=None):
    if key not in section or section[key] is None:
        return default
    try:
        return cast(section[key])
    except (TypeError, ValueError):
        raise SpecError(f"{where}.{key} must be a number, got {section[key]!r}", f"{where}.{key}") from None


def _workers(raw: dict) -> int:
    value = raw.get("workers", 1)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"workers must be an integer, got {value!r}", "workers")
    return value


def config_from_dict(raw: Optional[dict]) -> RunConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise SpecError("config must be a mapping", "config")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise SpecError(f"unknown config section(s): {', '.join(unknown)}", unknown[0])

    chain = _section(raw, "chain")
    try:
        spec = ChainSpec(
            n_sites=_number(chain, "n_sites", "chain", int, 3),
            coupling=_number(chain, "coupling", "chain", float, 1.0),
            omegas=chain.get("omegas"),
            beta=_number(chain, "beta", "chain"),
            sender=_number(chain, "sender", "chain", int, 1),
            receiver=_number(chain, "receiver", "chain", int),
        )
    except SpecError as exc:
        field_name = exc.field if exc.field.startswith("chain.") else f"chain.{exc.field}"
        raise SpecError(str(exc), field_name) from None
    except (TypeError, ValueError) as exc:
        raise SpecError(f"chain.omegas: {exc}", "chain.omegas") from None

    rest_raw = _section(raw, "rest")
    try:
        rest = RestStateKind(rest_raw.get("kind", "ground"), _number(rest_raw, "beta", "rest"))
    except SpecError as exc:
        raise SpecError(str(exc), f"rest.{exc.field}") from None
    if rest.kind == "thermal" and rest.beta is None and spec.beta is None:
        raise SpecError("thermal rest state needs rest.beta", "rest.beta")

    grid = _section(raw, "grid")
    meas = _section(raw, "measurement")
    tols = _section(raw, "tolerances")
    out = _section(raw, "output")

    try:
        dirs = DirectionSet(meas["directions"]) if meas.get("directions") is not None else DirectionSet.identity()
    except (SpecError, ValueError) as exc:
        raise SpecError(str(exc), "measurement.directions") from None
    sender = None
    if meas.get("sender") is not None:
        try:
            sender = BlochVector(*meas["sender"])
        except (TypeError, ValueError) as exc:
            raise SpecError(f"measurement.sender: {exc}", "measurement.sender") from None

    out_dir = Path(out.get("dir", "."))

    return RunConfig(
        spec=spec,
        rest=rest,
        t_min=_number(grid, "t_min", "grid", float, 0.0),
        t_max=_number(grid, "t_max", "grid", float, 10.0),
        points=_number(grid, "points", "grid", int, 1001),
        directions=dirs,
        sender=sender,
        time=_number(meas, "time", "measurement"),
        sigma=_number(meas, "sigma", "measurement", float, 0.0),
        seed=_number(meas, "seed", "measurement", int, 0),
        expect=meas.get("expect"),
        det_tol=_number(tols, "det", "tolerances", float, DET_TOL),
        rank_tol=_number(tols, "rank", "tolerances", float, RANK_TOL),
        pst_tol=_number(tols, "pst", "tolerances", float, PST_TOL),
        output_dir=out_dir,
        format=out.get("format", "csv"),
        workers=_workers(raw),
    )


def load_raw(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read config {path}: {exc.strerror}", "config") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecError(f"config {path} is not valid YAML: {exc}", "config") from None
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise SpecError(f"config {path} must be a YAML mapping", "config")
    return raw


def load_config(path) -> RunConfig:
    """Parse a YAML config; relative output directories resolve against the working directory."""
    return config_from_dict(load_raw(path))
