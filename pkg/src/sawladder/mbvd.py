"""
Multi-branch modified Butterworth-Van Dyke (mBVD) resonator model.

Topology: ``r_s`` in series with the parallel combination of the static branch
(``r_0`` + ``c_0``) and every motional branch (``r_m`` + ``l_m`` + ``c_m``).
The first motional branch is the main tone; the others model spurious modes
and only enter admittance evaluation, never the figures of merit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import SawLadderError
from .netcore import FrequencyGrid, OnePortResponse

# k^2 = K2_FACTOR * c_m / c_0
K2_FACTOR = math.pi ** 2 / 8


@dataclass(frozen=True)
class MotionalBranch:
    r_m: float
    l_m: float
    c_m: float

    def __post_init__(self):
        if not (self.l_m > 0 and self.c_m > 0):
            raise SawLadderError("motional l_m and c_m must be positive")
        if not self.r_m >= 0:
            raise SawLadderError("motional r_m must be non-negative")

    @property
    def f_s(self) -> float:
        return 1 / (2 * math.pi * math.sqrt(self.l_m * self.c_m))

    @property
    def q(self) -> float:
        """Unloaded quality factor; ``math.inf`` for a lossless branch."""
        if self.r_m == 0:
            return math.inf
        return math.sqrt(self.l_m / self.c_m) / self.r_m

    @classmethod
    def from_figures(cls, f_s: float, q: float, c_m: float) -> MotionalBranch:
        l_m = 1 / ((2 * math.pi * f_s) ** 2 * c_m)
        r_m = 0.0 if math.isinf(q) else math.sqrt(l_m / c_m) / q
        return cls(r_m, l_m, c_m)


@dataclass(frozen=True)
class MbvdModel:
    c_0: float
    branches: tuple[MotionalBranch, ...]
    r_s: float = 0.0
    r_0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.c_0 > 0:
            raise SawLadderError("static capacitance c_0 must be positive")
        if not (self.r_s >= 0 and self.r_0 >= 0):
            raise SawLadderError("r_s and r_0 must be non-negative")
        if not self.branches:
            raise SawLadderError("an mBVD model needs at least one motional branch")
        fs = sorted(b.f_s for b in self.branches)
        for lo, hi in zip(fs, fs[1:]):
            if (hi - lo) / hi <= 1e-6:
                raise SawLadderError("motional branches must have distinct resonance frequencies")

    @property
    def main(self) -> MotionalBranch:
        return self.branches[0]

    @classmethod
    def from_figures(cls, f_s: float, k2: float, q: float, c_0: float,
                     r_s: float = 0.0, r_0: float = 0.0) -> MbvdModel:
        """Single-branch model hitting the given series resonance, coupling and Q."""
        c_m = c_0 * k2 / K2_FACTOR
        return cls(c_0, (MotionalBranch.from_figures(f_s, q, c_m),), r_s, r_0)

    def lossless(self) -> MbvdModel:
        return replace(self, r_s=0.0, r_0=0.0,
                       branches=tuple(replace(b, r_m=0.0) for b in self.branches))

    def to_dict(self) -> dict:
        return {
            "r_s": self.r_s, "r_0": self.r_0, "c_0": self.c_0,
            "branches": [{"r_m": b.r_m, "l_m": b.l_m, "c_m": b.c_m} for b in self.branches],
        }

    @classmethod
    def from_dict(cls, d: dict) -> MbvdModel:
        return cls(c_0=d["c_0"], r_s=d.get("r_s", 0.0), r_0=d.get("r_0", 0.0),
                   branches=tuple(MotionalBranch(**b) for b in d["branches"]))


@dataclass(frozen=True)
class ResonatorFigures:
    f_s: float
    f_p: float
    q: float
    k2: float
    c_0: float


def branch_admittance(b: MotionalBranch, omega: np.ndarray) -> np.ndarray:
    """Admittance of one motional branch; exact lossless resonance gives ``inf``."""
    z = b.r_m + 1j * (omega * b.l_m - 1 / (omega * b.c_m))
    out = np.full(omega.shape, np.inf + 0j)
    # relative cancellation test: the reactances cancel to rounding level
    ok = np.abs(z) > 4 * np.finfo(float).eps * omega * b.l_m
    out[ok] = 1 / z[ok]
    return out


def static_admittance(m: MbvdModel, omega: np.ndarray) -> np.ndarray:
    return 1 / (m.r_0 + 1 / (1j * omega * m.c_0))


def admittance_from_parts(m: MbvdModel, omega: np.ndarray) -> np.ndarray:
    y_par = static_admittance(m, omega)
    for b in m.branches:
        y_par = y_par + branch_admittance(b, omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = 1 / (m.r_s + 1 / y_par)
    # an infinite shunt path leaves only r_s (or a short when r_s = 0)
    return np.where(np.isinf(y_par), (1 / m.r_s if m.r_s > 0 else np.inf) + 0j, y)


def admittance(m: MbvdModel, grid: FrequencyGrid, z_ref: float = 50.0) -> OnePortResponse:
    """Terminal admittance on ``grid``; lossless singular points are flagged, not raised."""
    return OnePortResponse(grid, admittance_from_parts(m, grid.omega), z_ref)


def _lossless_susceptance(m: MbvdModel, omega: float) -> float:
    b = omega * m.c_0
    for br in m.branches:
        b += 1 / (1 / (omega * br.c_m) - omega * br.l_m)
    return b


def parallel_resonance(m: MbvdModel) -> float:
    """Anti-resonance of the main branch on the lossless multi-branch model."""
    main = m.main
    f_s = main.f_s
    poles = sorted(b.f_s for b in m.branches if b.f_s > f_s)
    # between consecutive series resonances the susceptance runs from -inf to +inf
    # exactly once; searching up to the next pole brackets the root
    single = f_s * math.sqrt(1 + main.c_m / m.c_0)
    f_hi = poles[0] if poles else single * 2
    lo = f_s * (1 + 1e-12)
    hi = f_hi * (1 - 1e-12)
    g = lambda f: _lossless_susceptance(m, 2 * math.pi * f)
    while g(lo) > 0 and lo < hi:
        lo = lo + (hi - lo) * 1e-6
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def resonator_figures(m: MbvdModel) -> ResonatorFigures:
    main = m.main
    return ResonatorFigures(
        f_s=main.f_s,
        f_p=parallel_resonance(m),
        q=main.q,
        k2=K2_FACTOR * main.c_m / m.c_0,
        c_0=m.c_0,
    )


def scale_to_frequency(m: MbvdModel, f_target: float) -> MbvdModel:
    """Move every branch by the same ratio so the main tone lands on ``f_target``.

    Only ``l_m`` is touched; Q changes with sqrt(l_m), so ``r_m`` is rescaled
    alongside to keep every branch's Q fixed.
    """
    if not f_target > 0:
        raise SawLadderError("target frequency must be positive")
    ratio2 = (m.main.f_s / f_target) ** 2
    if ratio2 == 1:
        return m
    r = math.sqrt(ratio2)
    return replace(m, branches=tuple(
        MotionalBranch(b.r_m * r, b.l_m * ratio2, b.c_m) for b in m.branches))


def scale_c0(m: MbvdModel, c0_target: float) -> MbvdModel:
    """Impedance-scale the whole model so that ``c_0 == c0_target``."""
    if not c0_target > 0:
        raise SawLadderError("target c_0 must be positive")
    rho = c0_target / m.c_0
    if rho == 1:
        return m
    return MbvdModel(
        c_0=c0_target,
        r_s=m.r_s / rho,
        r_0=m.r_0 / rho,
        branches=tuple(MotionalBranch(b.r_m / rho, b.l_m / rho, b.c_m * rho)
                       for b in m.branches),
    )


def with_quality(m: MbvdModel, q: float) -> MbvdModel:
    """Same model with the main branch's ``r_m`` set for quality factor ``q``."""
    main = m.main
    r_m = 0.0 if math.isinf(q) else math.sqrt(main.l_m / main.c_m) / q
    return replace(m, branches=(replace(main, r_m=r_m),) + m.branches[1:])
