"""``ym`` command-line interface.

Exit codes: 0 success, 1 parse error, 2 validation or precondition
failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import measure, oracle, oscillation
from .expr import ExprError, as_expr
from .piecewise import (
    PiecewiseError,
    SchemaError,
    ValidationError,
    from_json,
    to_json,
    validate,
)

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    example: Optional[str] = None
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    grid: int = 1001
    samples: int = 10**6
    tol: float = 1e-8
    betas: tuple = measure.DEFAULT_BETAS
    c: int = 1
    perturb: float = 0.0

    def __post_init__(self):
        if self.grid < 2:
            raise CliError("--grid must be at least 2", EXIT_INVALID)
        if self.samples < 1:
            raise CliError("--samples must be at least 1", EXIT_INVALID)
        if not self.tol > 0:
            raise CliError("--tol must be positive", EXIT_INVALID)


def _parse_param(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected K=V, got {text!r}")
    return key.strip(), value.strip()


def _split_betas(text):
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ym", description="Young measures of piecewise monotone functions")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True):
        if source:
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--input", help="piecewise function JSON file, or '-' for stdin")
            src.add_argument("--example", choices=sorted(oscillation.EXAMPLE_DEFAULTS))
        p.add_argument("--param", action="append", type=_parse_param, default=[], metavar="K=V")
        p.add_argument("--output", help="output file (directory for compute and oscillate)")

    p = sub.add_parser("compute", help="atom and density/CDF tables")
    common(p)
    p.add_argument("--grid", type=int, default=1001)

    p = sub.add_parser("verify", help="check the defining identity and the oracle distance")
    common(p)
    p.add_argument("--betas", type=_split_betas, default=measure.DEFAULT_BETAS)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("oscillate", help="dilate a generator on ]0,1[ and compare measures")
    common(p)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("example", help="emit an example function as JSON")
    p.add_argument("tag", nargs="?", choices=sorted(oscillation.EXAMPLE_DEFAULTS))
    p.add_argument("--example", dest="example_flag", choices=sorted(oscillation.EXAMPLE_DEFAULTS))
    common(p, source=False)

    p = sub.add_parser("oracle", help="empirical pushforward and Kolmogorov distance")
    common(p)
    p.add_argument("--samples", type=int, default=10**6)
    return parser


def _config(ns) -> RunConfig:
    kwargs = {"command": ns.command, "params": dict(ns.param), "output": ns.output}
    if ns.command == "example":
        kwargs["example"] = ns.tag or ns.example_flag
        if kwargs["example"] is None:
            raise CliError("example: give a tag a, b, c, d or e", EXIT_INVALID)
    else:
        kwargs["input"] = ns.input
        kwargs["example"] = ns.example
    for name in ("grid", "samples", "tol", "betas", "c", "perturb"):
        if hasattr(ns, name):
            kwargs[name] = getattr(ns, name)
    return RunConfig(**kwargs)


def load_function(cfg: RunConfig):
    """The function named by --input or --example, validated."""
    if cfg.example is not None:
        try:
            return oscillation.build_example(cfg.example, **cfg.params)
        except oscillation.ParameterError as exc:
            raise CliError(f"example {cfg.example}: {exc}", EXIT_INVALID) from exc
    if cfg.params:
        raise CliError("--param only applies to --example", EXIT_INVALID)
    try:
        text = sys.stdin.read() if cfg.input == "-" else Path(cfg.input).read_text()
    except OSError as exc:
        raise CliError(f"{cfg.input}: {exc.strerror}", EXIT_PARSE) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{cfg.input}: invalid JSON at offset {exc.pos}: {exc.msg}", EXIT_PARSE) from exc
    try:
        pf = from_json(doc)
    except (SchemaError, ExprError) as exc:
        raise CliError(f"{cfg.input}: {exc}", EXIT_PARSE) from exc
    except ValidationError as exc:
        raise CliError(f"{cfg.input}: {exc}", EXIT_INVALID) from exc
    try:
        return validate(pf)
    except (PiecewiseError, ExprError) as exc:
        raise CliError(f"{cfg.input}: {exc}", EXIT_INVALID) from exc


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(cfg, text, default_name=None, out=None):
    out = out or sys.stdout
    if cfg.output is None:
        out.write(text)
        return
    path = Path(cfg.output)
    if default_name is not None:
        path.mkdir(parents=True, exist_ok=True)
        path = path / default_name
    path.write_text(text)


def cmd_compute(cfg: RunConfig, out=None) -> int:
    pf = load_function(cfg)
    ym = measure.compute(pf, check=False)
    atoms = measure.atoms_csv(ym)
    table = measure.density_csv(ym, cfg.grid)
    if cfg.output is None:
        (out or sys.stdout).write(atoms + "\n" + table)
    else:
        _emit(cfg, atoms, "atoms.csv")
        _emit(cfg, table, "density.csv")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out=None) -> int:
    pf = load_function(cfg)
    try:
        betas = [as_expr(b) for b in cfg.betas]
    except ExprError as exc:
        raise CliError(f"--betas: {exc}", EXIT_PARSE) from exc
    ym = measure.compute(pf, check=False)
    if cfg.perturb:
        ym = measure.perturbed(ym, cfg.perturb)
    report = measure.verify_identity(pf, betas, cfg.tol, ym=ym)
    ks = oracle.oracle_report(pf, cfg.samples, ym=ym)
    report = measure.VerificationReport(
        report.entries, report.tolerance, ks["ks_distance"], ks["bound"], cfg.samples
    )
    _emit(cfg, _dump(report.to_dict()), out=out)
    return EXIT_OK if report.passed else EXIT_VERIFY


def compare_measures(a: measure.YoungMeasure, b: measure.YoungMeasure, grid: int) -> dict:
    """Largest density gap on an interior grid of K and largest atom gap."""
    klo, khi = a.k_range
    ys = klo + (khi - klo) * (np.arange(grid) + 0.5) / grid if khi > klo else np.array([klo])
    density_dev = float(np.max(np.abs(measure.density(a, ys) - measure.density(b, ys))))
    if len(a.atoms) != len(b.atoms):
        atom_dev = float("inf")
    else:
        atom_dev = max(
            (max(abs(p.location - q.location), abs(p.weight - q.weight)) for p, q in zip(a.atoms, b.atoms)),
            default=0.0,
        )
    return {"density_deviation": density_dev, "atom_deviation": atom_dev}


def cmd_oscillate(cfg: RunConfig, out=None) -> int:
    pf = load_function(cfg)
    try:
        spec = oscillation.OscillationSpec(pf, cfg.c)
    except (ValidationError, oscillation.ParameterError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    dilated = oscillation.dilate(spec)
    cmp = compare_measures(measure.compute(pf, check=False), measure.compute(dilated, check=False), cfg.grid)
    cmp.update({"c": cfg.c, "grid": cfg.grid, "tolerance": cfg.tol})
    cmp["pass"] = cmp["density_deviation"] <= cfg.tol and cmp["atom_deviation"] <= cfg.tol
    if cfg.output is None:
        _emit(cfg, _dump({"function": to_json(dilated), "report": cmp}), out=out)
    else:
        _emit(cfg, _dump(to_json(dilated)), "dilated.json")
        _emit(cfg, _dump(cmp), "report.json")
    return EXIT_OK if cmp["pass"] else EXIT_VERIFY


def cmd_example(cfg: RunConfig, out=None) -> int:
    pf = load_function(cfg)
    _emit(cfg, _dump(to_json(pf)), out=out)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out=None) -> int:
    pf = load_function(cfg)
    report = oracle.oracle_report(pf, cfg.samples)
    _emit(cfg, _dump(report), out=out)
    return EXIT_OK if report["pass"] else EXIT_VERIFY


COMMANDS = {
    "compute": cmd_compute,
    "verify": cmd_verify,
    "oscillate": cmd_oscillate,
    "example": cmd_example,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = _config(ns)
        return COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"ym {ns.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
