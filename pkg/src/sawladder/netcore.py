"""
Frequency grids and two-port network algebra.

Everything is vectorized over the frequency axis: chain (ABCD) and scattering
matrices are stored as ``(n, 2, 2)`` complex arrays, one matrix per grid point.
ABCD is the composition representation; S is a view at a real reference
impedance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import SawLadderError, SingularNetworkError


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing, positive frequency points in Hz."""

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float).reshape(-1)
        if f.size < 2:
            raise SawLadderError("frequency grid needs at least 2 points")
        if not np.all(np.isfinite(f)):
            raise SawLadderError("frequency grid contains non-finite values")
        if f[0] <= 0:
            raise SawLadderError("frequencies must be positive")
        if np.any(np.diff(f) <= 0):
            raise SawLadderError("frequencies must be strictly increasing")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def omega(self) -> np.ndarray:
        return 2 * np.pi * self.f

    def __len__(self):
        return self.f.size

    def __eq__(self, other):
        return isinstance(other, FrequencyGrid) and np.array_equal(self.f, other.f)

    __hash__ = None


def make_grid(f_start: float, f_stop: float, n: int,
              spacing: Literal["linear", "log"] = "linear") -> FrequencyGrid:
    if not (0 < f_start < f_stop):
        raise SawLadderError(f"need 0 < f_start < f_stop, got {f_start!r}, {f_stop!r}")
    if int(n) != n or n < 2:
        raise SawLadderError(f"need an integer n >= 2, got {n!r}")
    n = int(n)
    if spacing == "linear":
        f = np.linspace(f_start, f_stop, n)
    elif spacing == "log":
        f = np.geomspace(f_start, f_stop, n)
    else:
        raise SawLadderError(f"unknown spacing {spacing!r}")
    f[0], f[-1] = f_start, f_stop
    return FrequencyGrid(f)


def _checked_complex(values, grid: FrequencyGrid, shape=()) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.shape == shape:
        arr = np.broadcast_to(arr, (len(grid),) + shape).copy()
    if arr.shape != (len(grid),) + shape:
        raise SawLadderError(f"expected shape {(len(grid),) + shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OnePortResponse:
    """Complex admittance (S) sampled on a grid.

    Points where the admittance is non-finite (a lossless series resonance hit
    exactly) are kept and reported through :attr:`singular`.
    """

    grid: FrequencyGrid
    y: np.ndarray
    z_ref: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "y", _checked_complex(self.y, self.grid))
        if not self.z_ref > 0:
            raise SawLadderError("reference impedance must be positive")

    @property
    def singular(self) -> np.ndarray:
        return ~np.isfinite(self.y)

    @property
    def s11(self) -> np.ndarray:
        zy = self.z_ref * self.y
        with np.errstate(invalid="ignore", divide="ignore"):
            s = (1 - zy) / (1 + zy)
        # |Y| -> inf is a short circuit
        return np.where(np.isinf(self.y), -1.0 + 0j, s)

    @classmethod
    def from_s11(cls, grid, s11, z_ref=50.0):
        s11 = np.asarray(s11, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = (1 - s11) / (z_ref * (1 + s11))
        return cls(grid, y, z_ref)

    @classmethod
    def from_z(cls, grid, z, z_ref=50.0):
        with np.errstate(divide="ignore", invalid="ignore"):
            return cls(grid, 1 / np.asarray(z, dtype=complex), z_ref)


@dataclass(frozen=True, eq=False)
class AbcdResponse:
    """Per-frequency chain matrices ``[[A, B], [C, D]]`` (B in ohm, C in S)."""

    grid: FrequencyGrid
    matrices: np.ndarray

    def __post_init__(self):
        m = _checked_complex(self.matrices, self.grid, (2, 2))
        if not np.all(np.isfinite(m)):
            bad = self.grid.f[~np.all(np.isfinite(m), axis=(1, 2))][0]
            raise SingularNetworkError(f"non-finite chain matrix at {bad:.9g} Hz")
        object.__setattr__(self, "matrices", m)

    @classmethod
    def identity(cls, grid: FrequencyGrid) -> AbcdResponse:
        return cls(grid, np.eye(2, dtype=complex))

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.matrices)


@dataclass(frozen=True, eq=False)
class TwoPortResponse:
    """Scattering matrices on a grid at a real reference impedance."""

    grid: FrequencyGrid
    s: np.ndarray
    z_ref: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "s", _checked_complex(self.s, self.grid, (2, 2)))
        if not self.z_ref > 0:
            raise SawLadderError("reference impedance must be positive")

    @property
    def s11(self):
        return self.s[:, 0, 0]

    @property
    def s21(self):
        return self.s[:, 1, 0]

    @property
    def s12(self):
        return self.s[:, 0, 1]

    @property
    def s22(self):
        return self.s[:, 1, 1]


def abcd_of_series_admittance(y: OnePortResponse) -> AbcdResponse:
    """Embed a one-port as a series element: ``[[1, 1/Y], [0, 1]]``."""
    yv = y.y
    if np.any(yv == 0):
        bad = y.grid.f[yv == 0][0]
        raise SingularNetworkError(f"zero series admittance (open circuit) at {bad:.9g} Hz")
    m = np.zeros((len(y.grid), 2, 2), dtype=complex)
    m[:, 0, 0] = m[:, 1, 1] = 1
    with np.errstate(divide="ignore", invalid="ignore"):
        m[:, 0, 1] = np.where(np.isinf(yv), 0, 1 / yv)
    return AbcdResponse(y.grid, m)


def abcd_of_shunt_admittance(y: OnePortResponse) -> AbcdResponse:
    """Embed a one-port as a shunt element: ``[[1, 0], [Y, 1]]``."""
    m = np.zeros((len(y.grid), 2, 2), dtype=complex)
    m[:, 0, 0] = m[:, 1, 1] = 1
    m[:, 1, 0] = y.y
    return AbcdResponse(y.grid, m)


def cascade(a: AbcdResponse, *rest: AbcdResponse) -> AbcdResponse:
    """Chain networks from port 1 to port 2 (left-to-right matrix product)."""
    m = a.matrices
    for b in rest:
        if b.grid != a.grid:
            raise SawLadderError("cannot cascade networks on different frequency grids")
        m = m @ b.matrices
    return AbcdResponse(a.grid, m)


def abcd_to_s(a: AbcdResponse, z_ref: float = 50.0) -> TwoPortResponse:
    if not z_ref > 0:
        raise SawLadderError("reference impedance must be positive")
    A, B, C, D = (a.matrices[:, i, j] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    bz = B / z_ref
    cz = C * z_ref
    den = A + bz + cz + D
    if np.any(den == 0):
        bad = a.grid.f[den == 0][0]
        raise SingularNetworkError(f"singular ABCD to S conversion at {bad:.9g} Hz")
    s = np.empty_like(a.matrices)
    s[:, 0, 0] = (A + bz - cz - D) / den
    s[:, 0, 1] = 2 * (A * D - B * C) / den
    s[:, 1, 0] = 2 / den
    s[:, 1, 1] = (-A + bz - cz + D) / den
    return TwoPortResponse(a.grid, s, z_ref)


def s_to_abcd(t: TwoPortResponse) -> AbcdResponse:
    s11, s12, s21, s22 = t.s11, t.s12, t.s21, t.s22
    if np.any(s21 == 0):
        bad = t.grid.f[s21 == 0][0]
        raise SingularNetworkError(f"S21 = 0 (no transmission) at {bad:.9g} Hz")
    z0 = t.z_ref
    p = s12 * s21
    den = 2 * s21
    m = np.empty_like(t.s)
    m[:, 0, 0] = ((1 + s11) * (1 - s22) + p) / den
    m[:, 0, 1] = z0 * ((1 + s11) * (1 + s22) - p) / den
    m[:, 1, 0] = ((1 - s11) * (1 - s22) - p) / (den * z0)
    m[:, 1, 1] = ((1 - s11) * (1 + s22) + p) / den
    return AbcdResponse(t.grid, m)
