"""
End-to-end design flow: seed, optimize, and dimension a ladder from a config.
"""
from __future__ import annotations

import math
from dataclasses import replace

from . import __version__
from .config import ProjectConfig
from .ladder import LadderTopology, init_design, optimize, resonator_summary
from .layout import (UNIFORM, ResonatorLayout, dimension_from_c0, layout_c0,
                     scale_fingers, select_period)
from .mbvd import K2_FACTOR, MbvdModel, MotionalBranch

TOOL = f"sawladder {__version__}"


def attach_spurs(t: LadderTopology, cfg: ProjectConfig) -> LadderTopology:
    """Add the configured spurious branches, placed relative to each main tone."""
    if not cfg.technology.spurs:
        return t
    new = {}
    for role in ("shunt", "series"):
        m = t.model_for(role)
        extra = []
        for s in cfg.technology.spurs:
            if s.role == role:
                c_m = m.c_0 * s.k2 / K2_FACTOR
                extra.append(MotionalBranch.from_figures(m.main.f_s * s.f_ratio, s.q, c_m))
        new[role] = replace(m, branches=m.branches + tuple(extra))
    return t.replace_models(**new)


def resonator_layouts(model: MbvdModel, cfg: ProjectConfig) -> dict:
    """Conventional and apodized layouts for one resonator.

    The apodized design keeps the conventional aperture and only rescales the
    electrode count.
    """
    tech = cfg.technology
    lam, k2_table = select_period(tech.dispersion, model.main.f_s)
    conv = dimension_from_c0(model.c_0, lam, tech.capacitance, UNIFORM, tech.aperture_bounds)
    n_apo = scale_fingers(conv.n_e, cfg.window, cfg.calibration)
    apo = ResonatorLayout(lam, conv.aperture_l, n_apo, cfg.window,
                          layout_c0(n_apo, conv.aperture_l, tech.capacitance, cfg.window))
    return {"table_k2": k2_table, "conventional": conv.to_dict(), "apodized": apo.to_dict()}


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def run_design(cfg: ProjectConfig) -> dict:
    tech = cfg.technology
    t0 = init_design(cfg.targets, tech.k2, tech.q_shunt, tech.q_series,
                     tech.c0_shunt, tech.c0_series)
    t0 = attach_spurs(t0, cfg)
    grid = cfg.grid.build()
    res = optimize(t0, cfg.targets, grid, c0_bounds=tech.c0_bounds)
    best = res.topology
    doc = {
        "tool": TOOL,
        "config_hash": cfg.config_hash,
        "targets": cfg.targets.to_dict(),
        "grid": cfg.grid.to_dict(),
        "topology": best.to_dict(),
        "metrics": res.metrics.to_dict(),
        "cost": {"initial": res.initial_cost, "final": res.cost,
                 "evaluations": res.n_evaluations},
        "resonators": resonator_summary(best),
        "layout": {role: resonator_layouts(best.model_for(role), cfg)
                   for role in ("shunt", "series")},
        "spurs": [{"role": s.role, "f_ratio": s.f_ratio, "k2": s.k2, "q": s.q, "label": s.label}
                  for s in tech.spurs],
    }
    return _finite(doc)

