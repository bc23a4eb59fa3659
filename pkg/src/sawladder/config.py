"""
Project configuration: JSON documents describing targets, technology, apodization
and the simulation grid.  Relative paths resolve against the config file.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import SawLadderError
from .ladder import DesignTargets
from .layout import ApodizationWindow, CapacitanceModel, DispersionTable
from .netcore import FrequencyGrid, make_grid

DEMO_CONFIG = Path(__file__).parent / "data" / "demo_config.json"


@dataclass(frozen=True)
class SpurSpec:
    """Extra motional branch attached to every resonator of one role."""

    role: str
    f_ratio: float  # spur resonance / main series resonance
    k2: float
    q: float
    label: str = ""


@dataclass(frozen=True)
class Technology:
    k2: float
    q_shunt: float
    q_series: float
    c0_shunt: float
    c0_series: float
    c0_bounds: tuple[float, float]
    capacitance: CapacitanceModel
    aperture_bounds: tuple[float, float]
    dispersion: DispersionTable
    spurs: tuple[SpurSpec, ...] = ()


@dataclass(frozen=True)
class GridSpec:
    f_start: float
    f_stop: float
    n: int

    def build(self) -> FrequencyGrid:
        return make_grid(self.f_start, self.f_stop, self.n)

    def to_dict(self):
        return {"f_start": self.f_start, "f_stop": self.f_stop, "n": self.n}


@dataclass(frozen=True)
class ProjectConfig:
    targets: DesignTargets
    technology: Technology
    window: ApodizationWindow
    calibration: Optional[float]
    grid: GridSpec
    output_dir: Path
    config_hash: str = field(default="")


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _pair(v, name):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise SawLadderError(f"config: {name} must be a [low, high] pair")
    lo, hi = float(v[0]), float(v[1])
    if not 0 < lo <= hi:
        raise SawLadderError(f"config: {name} must satisfy 0 < low <= high")
    return lo, hi


def parse_config(raw: dict, base_dir: Path) -> ProjectConfig:
    try:
        targets = DesignTargets.from_dict(raw["targets"])
        tech = raw["technology"]
        table_path = base_dir / tech["dispersion_table"]
        try:
            table = DispersionTable.from_csv(table_path.read_text())
        except OSError as exc:
            raise SawLadderError(f"config: cannot read dispersion table {table_path}: {exc.strerror}") from None
        spurs = tuple(SpurSpec(**s) for s in tech.get("spurs", ()))
        for s in spurs:
            if s.role not in ("shunt", "series"):
                raise SawLadderError(f"config: spur role must be shunt or series, got {s.role!r}")
        technology = Technology(
            k2=float(tech["k2"]),
            q_shunt=float(tech["q_shunt"]),
            q_series=float(tech["q_series"]),
            c0_shunt=float(tech["c0_shunt"]),
            c0_series=float(tech["c0_series"]),
            c0_bounds=_pair(tech["c0_bounds"], "c0_bounds"),
            capacitance=CapacitanceModel(float(tech["c_per_pair_per_length"])),
            aperture_bounds=_pair(tech["aperture_bounds_um"], "aperture_bounds_um"),
            dispersion=table,
            spurs=spurs,
        )
        apo = raw.get("apodization", {})
        window = ApodizationWindow(apo.get("kind", "uniform"), float(apo.get("a", 0.5)))
        calibration = apo.get("calibration")
        g = raw["grid"]
        grid = GridSpec(float(g["f_start"]), float(g["f_stop"]), int(g["n"]))
        grid.build()
    except KeyError as exc:
        raise SawLadderError(f"config: missing key {exc.args[0]!r}") from None
    except TypeError as exc:
        raise SawLadderError(f"config: {exc}") from None
    return ProjectConfig(
        targets=targets,
        technology=technology,
        window=window,
        calibration=None if calibration is None else float(calibration),
        grid=grid,
        output_dir=base_dir / raw.get("output_dir", "."),
        config_hash=config_hash(raw),
    )


def load_config(path) -> ProjectConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise SawLadderError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SawLadderError(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    return parse_config(raw, path.parent)
