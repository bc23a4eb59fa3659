"""
Command line interface.

    sawladder fit data.s1p [--branches 1] [--seed 0] [--max-iterations 2000] -o fit.json
    sawladder bodeq data.s1p -o curve.csv
    sawladder design config.json -o design.json
    sawladder simulate design.json [--grid f0:f1:n] -o out.s2p
    sawladder report out.s2p config.json -o metrics.json

Module errors exit with status 1 and a one-line message on stderr; outputs are
written to a temporary file and renamed into place, so a failed run never
leaves a partial file behind.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .errors import SawLadderError
from .extraction import bode_q, fit_mbvd
from .ladder import LadderTopology, metrics, simulate
from .netcore import FrequencyGrid, OnePortResponse, make_grid
from .touchstone import TouchstoneData, read_touchstone, write_touchstone
from .workflow import TOOL, run_design

log = logging.getLogger("sawladder")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def write_atomic(files: dict[Path, str]) -> None:
    """Write every file to a sibling temp file first, then rename all of them."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(float(v)) for v in row])
    return buf.getvalue()


def read_one_port(path: Path) -> OnePortResponse:
    """Admittance data from a .s1p file or a ``frequency_hz,re_y,im_y`` CSV."""
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
        try:
            float(rows[0][0])
        except (ValueError, IndexError):
            rows = rows[1:]
        try:
            data = np.array([[float(v) for v in r] for r in rows])
        except ValueError:
            raise SawLadderError(f"{path}: non-numeric admittance data") from None
        if data.ndim != 2 or data.shape[1] != 3:
            raise SawLadderError(f"{path}: expected columns frequency_hz,re_y,im_y")
        return OnePortResponse(FrequencyGrid(data[:, 0]), data[:, 1] + 1j * data[:, 2])
    return read_touchstone(text, n_ports=1).to_one_port()


def parse_grid(spec: str) -> FrequencyGrid:
    try:
        f0, f1, n = spec.split(":")
        return make_grid(float(f0), float(f1), int(n))
    except ValueError:
        raise SawLadderError(f"grid must look like f0:f1:n, got {spec!r}") from None


def cmd_fit(args) -> int:
    data = read_one_port(Path(args.input))
    rep = fit_mbvd(data, args.branches, args.seed, fit_r0=args.fit_r0,
                   max_iterations=args.max_iterations)
    doc = {"tool": TOOL, "source": Path(args.input).name, "branches": args.branches,
           "seed": args.seed, **rep.to_dict()}
    write_atomic({Path(args.output): dump_json(doc)})
    if not rep.converged:
        print(f"warning: fit did not converge (residual {rep.residual:.3g})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_bodeq(args) -> int:
    data = read_one_port(Path(args.input))
    curve = bode_q(data)
    rows = ((f, q if np.isfinite(q) else None) for f, q in zip(curve.grid.f, curve.q))
    write_atomic({Path(args.output): _csv(["frequency_hz", "q"], rows)})
    return EXIT_OK


def cmd_design(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.output) if args.output else cfg.output_dir / "design.json"
    write_atomic({out: dump_json(run_design(cfg))})
    return EXIT_OK


def _load_design(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SawLadderError(f"{path} is not valid JSON: {exc.msg}") from None


def cmd_simulate(args) -> int:
    design = _load_design(Path(args.design))
    try:
        topo = LadderTopology.from_dict(design["topology"])
        z_ref = float(design["targets"]["z_ref"])
        g = design["grid"]
        grid = parse_grid(args.grid) if args.grid else make_grid(g["f_start"], g["f_stop"], g["n"])
    except KeyError as exc:
        raise SawLadderError(f"design file missing key {exc.args[0]!r}") from None
    resp = simulate(topo, grid, z_ref)
    text = write_touchstone(TouchstoneData.from_two_port(resp), "RI",
                            provenance=f"{TOOL} config {design.get('config_hash', 'unknown')}")
    write_atomic({Path(args.output): text})
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    resp = read_touchstone(Path(args.input).read_text(), n_ports=2).to_two_port()
    m = metrics(resp, cfg.targets)
    out = Path(args.output)
    stem = out.with_suffix("")
    f = resp.grid.f
    with np.errstate(divide="ignore"):
        s21 = 20 * np.log10(np.abs(resp.s21))
        s11 = 20 * np.log10(np.abs(resp.s11))
    doc = {"tool": TOOL, "config_hash": cfg.config_hash, "source": Path(args.input).name,
           "metrics": m.to_dict()}
    write_atomic({
        out: dump_json(doc),
        Path(f"{stem}_s21_db.csv"): _csv(["frequency_hz", "s21_db"], zip(f, s21)),
        Path(f"{stem}_s11_db.csv"): _csv(["frequency_hz", "s11_db"], zip(f, s11)),
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sawladder",
        description="mBVD resonator extraction and SAW ladder filter design.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", help="fit an mBVD model to one-port data")
    s.add_argument("input", help=".s1p file or frequency_hz,re_y,im_y CSV")
    s.add_argument("--branches", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--fit-r0", action="store_true", help="also fit the static-branch resistance")
    s.add_argument("--max-iterations", type=int, default=2000)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("bodeq", help="Bode Q curve from one-port data")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_bodeq)

    s = sub.add_parser("design", help="seed, optimize and dimension a ladder filter")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="simulate a design file to Touchstone")
    s.add_argument("design")
    s.add_argument("--grid", help="f_start:f_stop:n in Hz (default: the design grid)")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("report", help="filter metrics and plot-ready CSVs from a .s2p")
    s.add_argument("input")
    s.add_argument("config")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SawLadderError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
