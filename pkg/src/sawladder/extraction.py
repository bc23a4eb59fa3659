"""
Parameter extraction from one-port data: Bode Q, resonance markers, mBVD fitting.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import find_peaks

from .errors import NoResonanceError, SawLadderError, SpanTooNarrowError
from .mbvd import MbvdModel, MotionalBranch, admittance_from_parts
from .netcore import FrequencyGrid, OnePortResponse

logger = logging.getLogger(__name__)

# |S11| at or above this is treated as lossless/active and Q is not defined
S11_LIMIT = 1 - 1e-12


@dataclass(frozen=True, eq=False)
class BodeQCurve:
    grid: FrequencyGrid
    q: np.ndarray  # nan marks invalid points

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.q)

    def peak(self, band: tuple[float, float] | None = None) -> tuple[float, float]:
        """Return ``(f, q)`` at the largest valid Q inside ``band`` (whole grid if None)."""
        f = self.grid.f
        sel = self.valid.copy()
        if band is not None:
            sel &= (f >= band[0]) & (f <= band[1])
        if not sel.any():
            raise SawLadderError("no valid Bode Q points in the requested band")
        idx = np.flatnonzero(sel)
        i = idx[np.argmax(self.q[idx])]
        return float(f[i]), float(self.q[i])


def bode_q(r: OnePortResponse) -> BodeQCurve:
    """Q_Bode = w |dS11/dw| / (1 - |S11|^2) from admittance data.

    The derivative is the modulus of the complex derivative of S11, with
    central differences inside the grid and second-order one-sided stencils at
    both ends (``numpy.gradient`` with ``edge_order=2``, non-uniform aware).
    """
    if len(r.grid) < 3:
        raise SawLadderError("Bode Q needs at least 3 frequency points")
    w = r.grid.omega
    s11 = r.s11
    mag = np.abs(s11)
    bad = ~np.isfinite(s11) | (mag >= S11_LIMIT)
    ds = np.gradient(np.where(np.isfinite(s11), s11, 0), w, edge_order=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = w * np.abs(ds) / (1 - mag ** 2)
    q[bad] = np.nan
    return BodeQCurve(r.grid, q)


def _parabolic_vertex(x, y, i):
    """Vertex abscissa of the parabola through points i-1, i, i+1."""
    u0, u2 = x[i - 1] - x[i], x[i + 1] - x[i]
    d0, d2 = y[i - 1] - y[i], y[i + 1] - y[i]
    s0, s2 = d0 / u0, d2 / u2
    a = (s0 - s2) / (u0 - u2)
    if a == 0:
        return float(x[i])
    b = s0 - a * u0
    return float(x[i] + np.clip(-b / (2 * a), u0, u2))


def resonance_markers(data: OnePortResponse) -> tuple[float, float]:
    """Series (max |Y|) and parallel (min |Y| above f_s) resonance frequencies."""
    f = data.grid.f
    if f.size < 50:
        raise SawLadderError("resonance markers need at least 50 points")
    logy = np.log(np.abs(data.y))
    i_s = int(np.nanargmax(np.where(np.isfinite(logy), logy, -np.inf)))
    if np.isinf(logy[i_s]):
        # exact lossless resonance on the grid
        f_s = float(f[i_s])
    elif i_s in (0, f.size - 1):
        raise SpanTooNarrowError("span too narrow: |Y| maximum at grid boundary")
    else:
        f_s = _parabolic_vertex(f, logy, i_s)
    above = logy[i_s + 1:]
    if above.size < 2:
        raise SpanTooNarrowError("span too narrow: no data above the series resonance")
    i_p = i_s + 1 + int(np.argmin(above))
    if i_p == f.size - 1:
        raise SpanTooNarrowError("span too narrow: |Y| minimum at grid boundary")
    f_p = _parabolic_vertex(f, logy, i_p) if np.isfinite(logy[i_p]) else float(f[i_p])
    return f_s, f_p


@dataclass(frozen=True)
class FitReport:
    model: MbvdModel
    residual: float
    n_iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "residual": self.residual,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
        }


def relative_residual(model: MbvdModel, data: OnePortResponse) -> float:
    """RMS of |Y_model - Y_data| / |Y_data| over the grid."""
    y = admittance_from_parts(model, data.grid.omega)
    return float(np.sqrt(np.mean(np.abs((y - data.y) / data.y) ** 2)))


# Parameter vector layout (all natural logs):
#   [r_s, c_0, (f_s, q, c_m) * n_branches, (r_0)]
# This is log(R, L, C) up to a fixed linear map, so positivity holds by
# construction while the coordinates stay decoupled around a resonance.

def _unpack(x, n_branches, r_0_fixed):
    v = np.exp(x)
    branches = []
    for i in range(n_branches):
        f_s, q, c_m = v[2 + 3 * i: 5 + 3 * i]
        branches.append(MotionalBranch.from_figures(f_s, q, c_m))
    r_0 = v[-1] if r_0_fixed is None else r_0_fixed
    return v[1], v[0], r_0, branches


def _model_from_x(x, n_branches, r_0_fixed):
    c_0, r_s, r_0, branches = _unpack(x, n_branches, r_0_fixed)
    return MbvdModel(c_0=c_0, branches=tuple(branches), r_s=r_s, r_0=r_0)


def _initial_guess(data: OnePortResponse, n_branches: int, fit_r0: bool):
    f = data.grid.f
    w = data.grid.omega
    y = data.y
    g = y.real
    n = f.size
    # conductance ripple below this is round-off, not a resonance
    floor = 1e-6 * float(np.max(np.abs(y)))
    peaks, props = find_peaks(g, prominence=floor)
    if peaks.size == 0:
        raise NoResonanceError("no resonance found")
    # strongest n_branches conductance maxima, main tone first
    order = np.argsort(props["prominences"])[::-1]
    peaks = peaks[order[:n_branches]]
    if peaks.size < n_branches:
        raise NoResonanceError(
            f"no resonance found for all {n_branches} branches "
            f"(only {peaks.size} conductance peaks)")

    tail = max(3, n // 10)
    r_s = float(np.median((1 / y[-tail:]).real))
    r_s = max(r_s, 1e-3)

    branch_params = []
    for p in peaks:
        half = g[p] / 2
        lo = p
        while lo > 0 and g[lo] > half:
            lo -= 1
        hi = p
        while hi < n - 1 and g[hi] > half:
            hi += 1
        fwhm = max(f[hi] - f[lo], f[min(p + 1, n - 1)] - f[max(p - 1, 0)])
        z_peak = 1 / g[p]
        r_m = max(z_peak - r_s, 0.05 * z_peak)
        # the conductance width reflects r_m + r_s; undo that loading
        q = f[p] / fwhm * z_peak / r_m
        l_m = q * r_m / w[p]
        c_m = 1 / (w[p] ** 2 * l_m)
        branch_params.append([f[p], q, c_m])

    # low-frequency capacitance, corrected for the main branch's quasi-static share;
    # the main branch's c_m/c_0 comes from the marker spacing when available
    f_main = branch_params[0][0]
    sel = slice(0, tail)
    c_eff = (y[sel] / (1j * w[sel])).real
    try:
        f_s_mk, f_p_mk = resonance_markers(data)
        ratio = (f_p_mk / f_s_mk) ** 2 - 1
    except SawLadderError:
        ratio = None
    if ratio is not None and ratio > 0:
        c_0 = float(np.median(c_eff / (1 + ratio / (1 - (f[sel] / f_main) ** 2))))
        if c_0 > 0:
            branch_params[0][2] = ratio * c_0
    else:
        c_0 = float(np.median(c_eff))
    if not c_0 > 0:
        c_0 = float(np.median(np.abs(c_eff)))

    x = [math.log(r_s), math.log(c_0)]
    for f_s, q, c_m in branch_params:
        x += [math.log(f_s), math.log(q), math.log(c_m)]
    if fit_r0:
        x.append(math.log(r_s))
    return np.array(x)


def fit_mbvd(data: OnePortResponse, n_branches: int = 1, seed: int = 0, *,
             fit_r0: bool = False, max_iterations: int = 2000,
             ftol: float = 1e-10) -> FitReport:
    """Least-squares fit of an mBVD model to admittance data.

    Minimizes sum |Y_model - Y_data|^2 / |Y_data|^2 with Nelder-Mead in log
    parameter space: one pass per parameter block (global, then each branch),
    a joint pass, and a single restart from the best point with a jittered
    simplex drawn from ``seed``. ``r_0`` is held at zero unless ``fit_r0``.
    """
    if n_branches < 1:
        raise SawLadderError("n_branches must be >= 1")
    if len(data.grid) < 50:
        raise SawLadderError("fitting needs at least 50 frequency points")
    if not np.all(np.isfinite(data.y)) or np.any(data.y == 0):
        raise SawLadderError("admittance data must be finite and nonzero")

    w = data.grid.omega
    y_data = data.y
    r_0_fixed = None if fit_r0 else 0.0

    def cost(x):
        try:
            m = _model_from_x(x, n_branches, r_0_fixed)
        except (SawLadderError, OverflowError, ValueError):
            return np.inf
        with np.errstate(all="ignore"):
            ym = admittance_from_parts(m, w)
            c = float(np.sum(np.abs((ym - y_data) / y_data) ** 2))
        return c if np.isfinite(c) else np.inf

    x = _initial_guess(data, n_branches, fit_r0)
    n_par = x.size
    blocks = [[0, 1]] + [[2 + 3 * i, 3 + 3 * i, 4 + 3 * i] for i in range(n_branches)]
    if fit_r0:
        blocks[0].append(n_par - 1)

    # simplex edge per coordinate (log units): frequencies need much finer steps
    step = np.full(n_par, 0.1)
    for i in range(n_branches):
        step[2 + 3 * i] = 0.25 / math.exp(x[3 + 3 * i])

    rng = np.random.default_rng(seed)
    budget = max_iterations
    iters = 0

    def run(x0, idx, maxiter, jitter=None):
        nonlocal iters, budget
        idx = np.asarray(idx)
        sub_step = step[idx] if jitter is None else step[idx] * jitter
        simplex = np.vstack([x0[idx]] + [x0[idx] + np.eye(idx.size)[k] * sub_step[k]
                                         for k in range(idx.size)])

        def sub_cost(z):
            xx = x0.copy()
            xx[idx] = z
            return cost(xx)

        f0 = sub_cost(x0[idx])
        res = minimize(sub_cost, x0[idx], method="Nelder-Mead",
                       options={"initial_simplex": simplex, "maxiter": max(min(maxiter, budget), 1),
                                "xatol": 1e-12, "fatol": ftol * f0,
                                "adaptive": idx.size > 4})
        iters += res.nit
        budget -= res.nit
        out = x0.copy()
        if res.fun <= f0:
            out[idx] = res.x
        return out, res.success

    everything = np.arange(n_par)
    # rms relative misfit of 1e-10 is an exact fit for all practical purposes
    exact_floor = len(data.grid) * 1e-20
    # coarse block passes settle each resonance before the joint search
    for idx in blocks:
        x, _ = run(x, idx, 100 * len(idx))

    converged = False
    prev = cost(x)
    while budget > 0:
        x, ok = run(x, everything, budget)
        cur = cost(x)
        if cur <= exact_floor or ok and prev - cur <= ftol * prev:
            converged = True
            break
        prev = cur

    if budget > 0:
        # single restart from the best point with a freshly oriented simplex
        jitter = rng.uniform(0.5, 1.5, size=n_par) * rng.choice([-1.0, 1.0], size=n_par)
        before = cost(x)
        x, ok = run(x, everything, budget, jitter=jitter)
        if before > exact_floor and before - cost(x) > 1e-6 * before:
            converged = False

    model = _model_from_x(x, n_branches, r_0_fixed)
    report = FitReport(model, relative_residual(model, data), iters, bool(converged))
    logger.debug("fit_mbvd: residual %.3g after %d iterations", report.residual, iters)
    return report
