"""
Touchstone version 1 reader and writer (.s1p / .s2p).

Two-port rows are ``f S11 S21 S12 S22``.  As in the version 1 format, Y and Z
data are stored normalized to the reference resistance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SawLadderError, TouchstoneError
from .netcore import FrequencyGrid, OnePortResponse, TwoPortResponse

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
PARAM_TYPES = ("S", "Y", "Z")
FORMATS = ("RI", "MA", "DB")
# file order of the 2x2 matrix entries
_ORDER_2PORT = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True, eq=False)
class TouchstoneData:
    n_ports: int
    grid: FrequencyGrid
    parameters: np.ndarray  # (n, p, p) complex, de-normalized
    param_type: str = "S"
    z_ref: float = 50.0
    freq_unit: str = "HZ"
    data_format: str = "RI"
    comments: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n_ports not in (1, 2):
            raise SawLadderError("only 1- and 2-port Touchstone data is supported")
        p = np.asarray(self.parameters, dtype=complex)
        if p.shape != (len(self.grid), self.n_ports, self.n_ports):
            raise SawLadderError(f"parameter array has shape {p.shape}")
        object.__setattr__(self, "parameters", p)
        if not self.z_ref > 0:
            raise SawLadderError("reference resistance must be positive")
        if self.param_type not in PARAM_TYPES:
            raise SawLadderError(f"unknown parameter type {self.param_type!r}")

    @classmethod
    def from_two_port(cls, r: TwoPortResponse, comments=()) -> TouchstoneData:
        return cls(2, r.grid, r.s, "S", r.z_ref, comments=tuple(comments))

    @classmethod
    def from_one_port(cls, r: OnePortResponse, comments=()) -> TouchstoneData:
        return cls(1, r.grid, r.s11.reshape(-1, 1, 1), "S", r.z_ref, comments=tuple(comments))

    def to_two_port(self) -> TwoPortResponse:
        if self.n_ports != 2 or self.param_type != "S":
            raise SawLadderError("expected 2-port S-parameter data")
        return TwoPortResponse(self.grid, self.parameters, self.z_ref)

    def to_one_port(self) -> OnePortResponse:
        """One-port data as admittance, whatever parameter type was stored."""
        if self.n_ports != 1:
            raise SawLadderError("expected 1-port data")
        v = self.parameters[:, 0, 0]
        if self.param_type == "S":
            return OnePortResponse.from_s11(self.grid, v, self.z_ref)
        if self.param_type == "Y":
            return OnePortResponse(self.grid, v, self.z_ref)
        return OnePortResponse.from_z(self.grid, v, self.z_ref)


def _parse_option_line(line: str, lineno: int):
    tokens = line[1:].split()
    unit, ptype, fmt, z_ref = "GHZ", "S", "MA", 50.0
    it = iter(tokens)
    for tok in it:
        t = tok.upper()
        if t in FREQ_UNITS:
            unit = t
        elif t in PARAM_TYPES:
            ptype = t
        elif t in FORMATS:
            fmt = t
        elif t == "R":
            try:
                z_ref = float(next(it))
            except (StopIteration, ValueError):
                raise TouchstoneError("option line: R must be followed by a number", lineno) from None
        else:
            raise TouchstoneError(f"malformed option line: unexpected token {tok!r}", lineno)
    if not z_ref > 0:
        raise TouchstoneError("reference resistance must be positive", lineno)
    return unit, ptype, fmt, z_ref


def _to_complex(a: np.ndarray, b: np.ndarray, fmt: str) -> np.ndarray:
    if fmt == "RI":
        return a + 1j * b
    mag = a if fmt == "MA" else 10 ** (a / 20)
    return mag * np.exp(1j * np.deg2rad(b))


def read_touchstone(text: str, n_ports: int | None = None) -> TouchstoneData:
    """Parse a Touchstone v1 document.

    The port count is inferred from the row width unless given.  Missing option
    lines fall back to the version 1 default ``# GHZ S MA R 50``.
    """
    option = None
    comments = []
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("!")
        if raw.lstrip().startswith("!"):
            comments.append(comment.strip())
            continue
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if option is not None:
                raise TouchstoneError("second option line", lineno)
            if rows:
                raise TouchstoneError("option line after data", lineno)
            option = _parse_option_line(line, lineno)
            continue
        try:
            vals = [float(t) for t in line.split()]
        except ValueError:
            raise TouchstoneError("non-numeric data", lineno) from None
        rows.append((lineno, vals))

    unit, ptype, fmt, z_ref = option or ("GHZ", "S", "MA", 50.0)
    if not rows:
        raise TouchstoneError("no data rows")
    if n_ports is None:
        width = len(rows[0][1])
        n_ports = {3: 1, 9: 2}.get(width)
        if n_ports is None:
            raise TouchstoneError(f"wrong column count {width} (expected 3 or 9)", rows[0][0])
    expected = 1 + 2 * n_ports ** 2
    prev_f = -math.inf
    for lineno, vals in rows:
        if len(vals) != expected:
            raise TouchstoneError(f"wrong column count {len(vals)} (expected {expected})", lineno)
        f = vals[0] * FREQ_UNITS[unit]
        if not f > prev_f:
            raise TouchstoneError("frequency not strictly increasing", lineno)
        prev_f = f

    data = np.array([vals for _, vals in rows])
    f = data[:, 0] * FREQ_UNITS[unit]
    if f[0] <= 0:
        raise TouchstoneError("frequencies must be positive", rows[0][0])
    values = _to_complex(data[:, 1::2], data[:, 2::2], fmt)
    params = np.empty((len(rows), n_ports, n_ports), dtype=complex)
    if n_ports == 1:
        params[:, 0, 0] = values[:, 0]
    else:
        for k, (i, j) in enumerate(_ORDER_2PORT):
            params[:, i, j] = values[:, k]
    if ptype == "Z":
        params = params * z_ref
    elif ptype == "Y":
        params = params / z_ref
    return TouchstoneData(n_ports, FrequencyGrid(f), params, ptype, z_ref, unit, fmt, tuple(comments))


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_touchstone(d: TouchstoneData, data_format: str = "RI", provenance: str | None = None) -> str:
    """Render ``d`` as a Touchstone v1 document with frequencies in Hz."""
    fmt = data_format.upper()
    if fmt not in FORMATS:
        raise SawLadderError(f"unknown data format {data_format!r}")
    params = d.parameters
    if d.param_type == "Z":
        params = params / d.z_ref
    elif d.param_type == "Y":
        params = params * d.z_ref
    lines = []
    if provenance:
        lines.append(f"! {provenance}")
    lines += [f"! {c}" if c else "!" for c in d.comments]
    lines.append(f"# HZ {d.param_type} {fmt} R {_fmt(d.z_ref)}")
    order = ((0, 0),) if d.n_ports == 1 else _ORDER_2PORT
    for k, f in enumerate(d.grid.f):
        cols = [_fmt(f)]
        for i, j in order:
            v = params[k, i, j]
            if fmt == "RI":
                a, b = v.real, v.imag
            else:
                mag = abs(v)
                with np.errstate(divide="ignore"):
                    a = mag if fmt == "MA" else 20 * math.log10(mag) if mag > 0 else -math.inf
                b = math.degrees(math.atan2(v.imag, v.real))
            cols += [_fmt(a), _fmt(b)]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"
