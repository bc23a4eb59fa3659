"""
Physical dimensioning of IDT resonators.

Lengths are in micrometres, capacitances in farads.  The static capacitance
model is linear: ``c0 = (n_e - 1) * c_per_pair_per_length * L * mean_overlap``,
one electrode pair per adjacent-finger gap.  ``n_e`` counts electrodes, not
pairs.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Literal

import numpy as np
from scipy.integrate import quad

from .errors import SawLadderError

# relative C0 tolerance accepted by dimension_from_c0
C0_TOLERANCE = 0.02


@dataclass(frozen=True)
class ApodizationWindow:
    kind: Literal["uniform", "bartlett"] = "uniform"
    a: float = 0.5

    def __post_init__(self):
        if self.kind not in ("uniform", "bartlett"):
            raise SawLadderError(f"unknown apodization window {self.kind!r}")
        if not self.a > 0:
            raise SawLadderError("window half-width a must be positive")

    def to_dict(self):
        return {"kind": self.kind, "a": self.a}


UNIFORM = ApodizationWindow("uniform")


def window_value(w: ApodizationWindow, x):
    """Normalized finger overlap at longitudinal position ``x`` (centre at 0)."""
    x = np.asarray(x, dtype=float)
    if w.kind == "uniform":
        y = np.ones_like(x)
    else:
        if np.any(np.abs(x) > w.a):
            raise SawLadderError(f"position outside the electrode extent [-{w.a}, {w.a}]")
        y = np.clip(1 - np.abs(x / w.a), 0.0, 1.0)
    return float(y) if y.ndim == 0 else y


def mean_overlap(w: ApodizationWindow) -> float:
    if w.kind == "uniform":
        return 1.0
    val, _ = quad(lambda x: window_value(w, x), -w.a, w.a, points=[0.0],
                  epsabs=1e-12, epsrel=1e-12)
    return val / (2 * w.a)


def _round_half_away(x: float) -> int:
    return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def scale_fingers(n_e_conv: int, w: ApodizationWindow, calibration: float | None = None) -> int:
    """Electrode count that keeps C0 when the overlap is shaped by ``w``.

    Without ``calibration`` the factor is the analytic 1/mean_overlap (2 for a
    Bartlett window).  Measured layouts need about 2.37; pass it explicitly.
    """
    if n_e_conv < 2:
        raise SawLadderError("need at least 2 electrodes")
    if calibration is not None and not calibration > 0:
        raise SawLadderError("calibration factor must be positive")
    factor = calibration if calibration is not None else 1 / mean_overlap(w)
    return _round_half_away(n_e_conv * factor)


@dataclass(frozen=True)
class DispersionTable:
    """IDT period (um) against series resonance (Hz) and coupling."""

    lam: tuple[float, ...]
    f_s: tuple[float, ...]
    k2: tuple[float, ...]

    def __post_init__(self):
        lam, f_s, k2 = (tuple(float(v) for v in col) for col in (self.lam, self.f_s, self.k2))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "f_s", f_s)
        object.__setattr__(self, "k2", k2)
        if not (len(lam) == len(f_s) == len(k2)) or len(lam) < 2:
            raise SawLadderError("dispersion table needs at least 2 complete rows")
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise SawLadderError("dispersion table periods must be strictly increasing")
        if any(b >= a for a, b in zip(f_s, f_s[1:])):
            raise SawLadderError("dispersion table f_s must decrease with period")

    @classmethod
    def from_csv(cls, text: str) -> DispersionTable:
        """Parse ``lambda_um,f_s_hz,k2`` rows; '#' lines and a header are skipped."""
        lam, f_s, k2 = [], [], []
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        for lineno, row in enumerate(csv.reader(lines), 1):
            try:
                vals = [float(v) for v in row]
            except ValueError:
                if lineno == 1:
                    continue
                raise SawLadderError(f"dispersion table row {lineno}: non-numeric value") from None
            if len(vals) != 3:
                raise SawLadderError(f"dispersion table row {lineno}: expected 3 columns")
            lam.append(vals[0])
            f_s.append(vals[1])
            k2.append(vals[2])
        return cls(tuple(lam), tuple(f_s), tuple(k2))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["lambda_um", "f_s_hz", "k2"])
        for row in zip(self.lam, self.f_s, self.k2):
            wr.writerow([repr(v) for v in row])
        return buf.getvalue()


def select_period(d: DispersionTable, f_target: float) -> tuple[float, float]:
    """Interpolate the IDT period for ``f_target``, then the coupling at that period."""
    f_s = np.array(d.f_s)
    if not f_s[-1] <= f_target <= f_s[0]:
        raise SawLadderError(
            f"target {f_target:.6g} Hz outside dispersion table range "
            f"[{f_s[-1]:.6g}, {f_s[0]:.6g}] Hz")
    # np.interp needs increasing abscissae; f_s decreases with period
    lam = float(np.interp(f_target, f_s[::-1], np.array(d.lam)[::-1]))
    k2 = float(np.interp(lam, d.lam, d.k2))
    return lam, k2


@dataclass(frozen=True)
class CapacitanceModel:
    c_per_pair_per_length: float  # F per um of overlap, per electrode pair

    def __post_init__(self):
        if not self.c_per_pair_per_length > 0:
            raise SawLadderError("capacitance per pair per length must be positive")


@dataclass(frozen=True)
class ResonatorLayout:
    lam: float
    aperture_l: float
    n_e: int
    window: ApodizationWindow
    c0: float

    def __post_init__(self):
        if self.n_e < 2:
            raise SawLadderError("a resonator needs at least 2 electrodes")
        if not (self.aperture_l > 0 and self.c0 > 0):
            raise SawLadderError("aperture and c0 must be positive")

    def to_dict(self):
        return {"lambda_um": self.lam, "aperture_um": self.aperture_l, "n_e": self.n_e,
                "window": self.window.to_dict(), "c0": self.c0}


def layout_c0(n_e: int, aperture_l: float, cm: CapacitanceModel, w: ApodizationWindow) -> float:
    return (n_e - 1) * cm.c_per_pair_per_length * aperture_l * mean_overlap(w)


def dimension_from_c0(c0_target: float, lam: float, cm: CapacitanceModel,
                      w: ApodizationWindow, l_bounds: tuple[float, float],
                      l_step: float = 1.0) -> ResonatorLayout:
    """Aperture and electrode count realizing ``c0_target``.

    The aperture starts at the midpoint of ``l_bounds`` and moves outward in
    ``l_step`` increments until the rounded electrode count lands within 2 %
    of the target.
    """
    lo, hi = l_bounds
    if not (c0_target > 0 and 0 < lo <= hi and lam > 0):
        raise SawLadderError("need c0_target > 0, lam > 0 and 0 < L_min <= L_max")
    mid = (lo + hi) / 2
    candidates = [mid]
    k = 1
    while mid - k * l_step >= lo or mid + k * l_step <= hi:
        for cand in (mid - k * l_step, mid + k * l_step):
            if lo <= cand <= hi:
                candidates.append(cand)
        k += 1
    for bound in (lo, hi):
        if bound not in candidates:
            candidates.append(bound)

    per_pair = cm.c_per_pair_per_length * mean_overlap(w)
    nearest = None
    for length in candidates:
        n_e = max(_round_half_away(c0_target / (per_pair * length)) + 1, 2)
        c0 = layout_c0(n_e, length, cm, w)
        err = abs(c0 - c0_target) / c0_target
        if nearest is None or err < nearest[0]:
            nearest = (err, c0)
        if err <= C0_TOLERANCE:
            return ResonatorLayout(lam, length, n_e, w, c0)
    raise SawLadderError(
        f"no integer electrode count within {C0_TOLERANCE:.0%} of c0 = {c0_target:.4g} F; "
        f"nearest achievable {nearest[1]:.4g} F")
