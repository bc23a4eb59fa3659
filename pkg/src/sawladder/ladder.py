"""
Ladder filter construction, simulation, metrics and matching optimization.

The canonical filter is third order with five resonators, starting and ending
on a shunt resonator: shunt, series, shunt, series, shunt.  All shunt stages
share one mBVD model and both series stages share another.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import BandNotBracketedError, SawLadderError
from .mbvd import (K2_FACTOR, MbvdModel, admittance, resonator_figures, scale_c0,
                   scale_to_frequency, with_quality)
from .netcore import (FrequencyGrid, TwoPortResponse, abcd_of_series_admittance,
                      abcd_of_shunt_admittance, abcd_to_s, cascade)

logger = logging.getLogger(__name__)

Role = Literal["shunt", "series"]


@dataclass(frozen=True)
class Stage:
    role: Role
    model: MbvdModel

    def __post_init__(self):
        if self.role not in ("shunt", "series"):
            raise SawLadderError(f"unknown stage role {self.role!r}")


@dataclass(frozen=True)
class LadderTopology:
    stages: tuple[Stage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise SawLadderError("a ladder needs at least one stage")

    @property
    def roles(self) -> list[str]:
        return [s.role for s in self.stages]

    def model_for(self, role: Role) -> MbvdModel:
        """The (first) model used for ``role``; canonical ladders share one per role."""
        for s in self.stages:
            if s.role == role:
                return s.model
        raise SawLadderError(f"topology has no {role} stage")

    def replace_models(self, shunt: MbvdModel | None = None,
                       series: MbvdModel | None = None) -> LadderTopology:
        new = {"shunt": shunt, "series": series}
        return LadderTopology(tuple(
            Stage(s.role, new[s.role] if new[s.role] is not None else s.model)
            for s in self.stages))

    def to_dict(self) -> dict:
        return {"stages": [{"role": s.role, "model": s.model.to_dict()} for s in self.stages]}

    @classmethod
    def from_dict(cls, d: dict) -> LadderTopology:
        return cls(tuple(Stage(s["role"], MbvdModel.from_dict(s["model"])) for s in d["stages"]))


@dataclass(frozen=True)
class DesignTargets:
    f_center: float
    fbw_3db: float
    z_ref: float = 50.0
    stopbands: tuple[tuple[float, float], ...] = ()
    min_rejection_db: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "stopbands",
                           tuple((float(lo), float(hi)) for lo, hi in self.stopbands))
        if not self.f_center > 0:
            raise SawLadderError("f_center must be positive")
        if not 0 < self.fbw_3db < 0.2:
            raise SawLadderError("fbw_3db must lie in (0, 0.2)")
        if not self.z_ref > 0:
            raise SawLadderError("z_ref must be positive")
        lo_pb = self.f_center * (1 - self.fbw_3db)
        hi_pb = self.f_center * (1 + self.fbw_3db)
        for lo, hi in self.stopbands:
            if not 0 < lo < hi:
                raise SawLadderError(f"invalid stopband ({lo}, {hi})")
            if lo < hi_pb and hi > lo_pb:
                raise SawLadderError(f"stopband ({lo:.6g}, {hi:.6g}) overlaps the passband")

    def to_dict(self) -> dict:
        return {"f_center": self.f_center, "fbw_3db": self.fbw_3db, "z_ref": self.z_ref,
                "stopbands": [list(b) for b in self.stopbands],
                "min_rejection_db": self.min_rejection_db}

    @classmethod
    def from_dict(cls, d: dict) -> DesignTargets:
        return cls(f_center=d["f_center"], fbw_3db=d["fbw_3db"], z_ref=d.get("z_ref", 50.0),
                   stopbands=tuple(tuple(b) for b in d.get("stopbands", ())),
                   min_rejection_db=d.get("min_rejection_db", 0.0))


@dataclass(frozen=True)
class FilterMetrics:
    il_db: float
    f_center: float
    fbw_3db: float
    oob_rejection_db: Optional[float]  # None when no stopbands are declared
    max_inband_s11_db: float
    band_edges: tuple[float, float] = field(default=(0.0, 0.0))

    def to_dict(self) -> dict:
        return {"il_db": self.il_db, "f_center": self.f_center, "fbw_3db": self.fbw_3db,
                "oob_rejection_db": self.oob_rejection_db,
                "max_inband_s11_db": self.max_inband_s11_db,
                "band_edges": list(self.band_edges)}

    @classmethod
    def from_dict(cls, d: dict) -> FilterMetrics:
        return cls(d["il_db"], d["f_center"], d["fbw_3db"], d["oob_rejection_db"],
                   d["max_inband_s11_db"], tuple(d.get("band_edges", (0.0, 0.0))))


def canonical_ladder(shunt_model: MbvdModel, series_model: MbvdModel) -> LadderTopology:
    return LadderTopology(tuple(
        Stage(role, shunt_model if role == "shunt" else series_model)
        for role in ("shunt", "series", "shunt", "series", "shunt")))


def simulate(t: LadderTopology, grid: FrequencyGrid, z_ref: float = 50.0) -> TwoPortResponse:
    cache = {}
    chain = []
    for stage in t.stages:
        if stage.model not in cache:
            cache[stage.model] = admittance(stage.model, grid, z_ref)
        y = cache[stage.model]
        embed = abcd_of_shunt_admittance if stage.role == "shunt" else abcd_of_series_admittance
        chain.append(embed(y))
    return abcd_to_s(cascade(*chain), z_ref)


def _db(x):
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.abs(x))


def _crossing(f, db, i_in, i_out, level):
    """Frequency where dB falls to ``level`` between points i_in (above) and i_out (below)."""
    f0, f1 = f[i_in], f[i_out]
    d0, d1 = db[i_in], db[i_out]
    if not np.isfinite(d1):
        return float(f1)
    return float(f0 + (level - d0) * (f1 - f0) / (d1 - d0))


def metrics(r: TwoPortResponse, targets: DesignTargets) -> FilterMetrics:
    f = r.grid.f
    s21 = _db(r.s21)
    s11 = _db(r.s11)
    i_pk = int(np.argmax(s21))
    peak = s21[i_pk]
    level = peak - 3
    lo = i_pk
    while lo > 0 and s21[lo - 1] >= level:
        lo -= 1
    hi = i_pk
    while hi < f.size - 1 and s21[hi + 1] >= level:
        hi += 1
    if lo == 0 or hi == f.size - 1:
        raise BandNotBracketedError("band not bracketed: 3-dB band reaches the grid edge")
    f_lo = _crossing(f, s21, lo, lo - 1, level)
    f_hi = _crossing(f, s21, hi, hi + 1, level)
    f_c = (f_lo + f_hi) / 2

    rejection = None
    if targets.stopbands:
        vals = []
        for a, b in targets.stopbands:
            sel = (f >= a) & (f <= b)
            if not sel.any():
                raise SawLadderError(f"grid has no points in stopband ({a:.6g}, {b:.6g})")
            vals.append(float(np.min(-s21[sel])))
        rejection = min(vals)

    inband = (f >= f_lo) & (f <= f_hi)
    return FilterMetrics(
        il_db=float(max(-peak, 0.0)),
        f_center=f_c,
        fbw_3db=(f_hi - f_lo) / f_c,
        oob_rejection_db=rejection,
        max_inband_s11_db=float(np.max(s11[inband])),
        band_edges=(f_lo, f_hi),
    )


def init_design(targets: DesignTargets, k2: float, q_shunt: float, q_series: float,
                c0_shunt: float, c0_series: float) -> LadderTopology:
    """Seed ladder with the shunt anti-resonance placed on the series resonance."""
    for name, v in (("k2", k2), ("q_shunt", q_shunt), ("q_series", q_series),
                    ("c0_shunt", c0_shunt), ("c0_series", c0_series)):
        if not v > 0:
            raise SawLadderError(f"{name} must be positive")
    if not k2 < 0.2:
        raise SawLadderError("k2 must be below 0.2")
    ratio = k2 / K2_FACTOR
    series = MbvdModel.from_figures(targets.f_center, k2, q_series, c0_series)
    shunt = MbvdModel.from_figures(targets.f_center / math.sqrt(1 + ratio), k2, q_shunt, c0_shunt)
    assert series.c_0 == c0_series and shunt.c_0 == c0_shunt
    return canonical_ladder(shunt, series)


def requalify(t: LadderTopology, q_shunt: float, q_series: float) -> LadderTopology:
    """Same geometry (c_0, f_s, k2) with new main-branch quality factors."""
    q = {"shunt": q_shunt, "series": q_series}
    cache = {}
    stages = []
    for s in t.stages:
        key = (s.role, s.model)
        if key not in cache:
            cache[key] = with_quality(s.model, q[s.role])
        stages.append(Stage(s.role, cache[key]))
    return LadderTopology(tuple(stages))


@dataclass(frozen=True)
class CostWeights:
    match: float = 1.0
    il: float = 1.0
    rejection: float = 1.0
    fbw: float = 2.0


# cost assigned to candidates with no measurable passband
INFEASIBLE = 1e6


def design_cost(m: FilterMetrics, targets: DesignTargets,
                weights: CostWeights = CostWeights()) -> float:
    match = max(m.max_inband_s11_db + 10.0, 0.0)
    shortfall = 0.0
    if m.oob_rejection_db is not None:
        shortfall = max(targets.min_rejection_db - m.oob_rejection_db, 0.0)
    fbw = abs(m.fbw_3db - targets.fbw_3db) / targets.fbw_3db
    return (weights.match * match + weights.il * m.il_db
            + weights.rejection * shortfall + weights.fbw * fbw)


def evaluate(t: LadderTopology, targets: DesignTargets, grid: FrequencyGrid,
             weights: CostWeights = CostWeights()) -> tuple[float, FilterMetrics]:
    m = metrics(simulate(t, grid, targets.z_ref), targets)
    return design_cost(m, targets, weights), m


@dataclass(frozen=True)
class OptimizeResult:
    topology: LadderTopology
    metrics: FilterMetrics
    cost: float
    initial_cost: float
    n_evaluations: int


# simplex steps: log(c_0) moves by ~15 %, log(f_s) by ~0.3 %
_C0_STEP = 0.15
_FS_STEP = 3e-3


def optimize(t0: LadderTopology, targets: DesignTargets, grid: FrequencyGrid, *,
             weights: CostWeights = CostWeights(),
             c0_bounds: tuple[float, float] | None = None,
             max_evaluations: int = 1500) -> OptimizeResult:
    """Tune shunt/series c_0 and resonance detuning for a matched response.

    Four variables (log c_0 and log f_s for each role) are searched with
    Nelder-Mead, restarted once from the best point; Q and k2 stay fixed.
    Never returns a design costlier than ``t0``.
    """
    try:
        cost0, m0 = evaluate(t0, targets, grid, weights)
    except BandNotBracketedError as exc:
        raise SawLadderError(f"initial design has no passband: {exc}") from None
    sh0 = t0.model_for("shunt")
    se0 = t0.model_for("series")
    lo_c, hi_c = c0_bounds if c0_bounds else (0.0, math.inf)
    scale = np.array([_C0_STEP, _C0_STEP, _FS_STEP, _FS_STEP])

    def build(z):
        d = z * scale
        c_sh = sh0.c_0 * math.exp(d[0])
        c_se = se0.c_0 * math.exp(d[1])
        if not (lo_c <= c_sh <= hi_c and lo_c <= c_se <= hi_c):
            return None
        sh = scale_to_frequency(scale_c0(sh0, c_sh), sh0.main.f_s * math.exp(d[2]))
        se = scale_to_frequency(scale_c0(se0, c_se), se0.main.f_s * math.exp(d[3]))
        return t0.replace_models(shunt=sh, series=se)

    n_eval = 0
    memo = {}

    def cost(z):
        nonlocal n_eval
        key = tuple(np.round(z, 12))
        if key in memo:
            return memo[key]
        n_eval += 1
        t = build(z)
        if t is None:
            c = INFEASIBLE
        else:
            try:
                c = evaluate(t, targets, grid, weights)[0]
            except SawLadderError:
                c = INFEASIBLE
        memo[key] = c
        return c

    z = np.zeros(4)
    for attempt in range(2):
        res = minimize(cost, z, method="Nelder-Mead",
                       options={"maxfev": max_evaluations // 2, "xatol": 1e-4, "fatol": 1e-6,
                                "initial_simplex": np.vstack([z, z + np.eye(4)])})
        if res.fun <= cost(z):
            z = res.x
    best = build(z)
    best_cost, best_m = evaluate(best, targets, grid, weights) if best is not None else (math.inf, None)
    if best_cost > cost0:
        best, best_cost, best_m = t0, cost0, m0
    logger.info("optimize: cost %.4g -> %.4g in %d evaluations", cost0, best_cost, n_eval)
    return OptimizeResult(best, best_m, best_cost, cost0, n_eval)


def resonator_summary(t: LadderTopology) -> dict:
    """Figures of merit for the shunt and series models of a ladder."""
    out = {}
    for role in ("shunt", "series"):
        fig = resonator_figures(t.model_for(role))
        out[role] = {"f_s": fig.f_s, "f_p": fig.f_p, "q": fig.q, "k2": fig.k2, "c_0": fig.c_0}
    return out
