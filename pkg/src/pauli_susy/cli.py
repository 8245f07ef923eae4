"""Command-line entry point: ``pauli-susy {analyze,verify,spectrum,catalog,dump}``.

Exit codes: 0 pass, 1 a certified check failed, 2 usage or construction error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import catalog, fielddsl, spectral, susy
from .lattice import DEFAULT_POINTS, DEFAULT_SPACING, Grid, dump_triplets

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    builtin: str | None = None
    field: str | None = None
    params: dict[str, float] = dataclasses.field(default_factory=dict)
    grid: tuple[int, int, int] = DEFAULT_POINTS
    spacing: tuple[float, float, float] = DEFAULT_SPACING
    bc: str = "dirichlet"
    tol_adm: float = susy.DEFAULT_ADMISSIBILITY_TOL
    tol_algebra: float = susy.DEFAULT_ALGEBRA_TOL
    cluster_tol: float = spectral.DEFAULT_CLUSTER_TOL
    zero_tol: float = spectral.DEFAULT_ZERO_TOL
    seed: int = fielddsl.DEFAULT_SEED
    samples: int = fielddsl.DEFAULT_SAMPLES
    box: float = fielddsl.DEFAULT_BOX
    parity_tol: float = fielddsl.DEFAULT_PARITY_TOL
    format: str = "json"
    out: str | None = None

    def validate(self) -> None:
        if (self.builtin is None) == (self.field is None):
            raise UsageError("give exactly one of --builtin NAME or --field PATH")
        for name in ("tol_adm", "tol_algebra", "cluster_tol", "zero_tol", "parity_tol", "box"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.format not in ("json", "text"):
            raise UsageError("format must be json or text")

    def make_grid(self) -> Grid:
        return Grid(tuple(self.grid), tuple(self.spacing), self.bc)

    def make_sampler(self) -> fielddsl.Sampler:
        return fielddsl.Sampler(self.samples, self.box, self.seed)

    def load_field(self) -> fielddsl.VectorPotentialSpec:
        if self.builtin is not None:
            return catalog.builtin(self.builtin, self.params).spec
        spec = fielddsl.load_field(self.field)
        if self.params:
            unknown = set(self.params) - set(spec.params)
            if unknown:
                raise UsageError(f"field file has no parameters {sorted(unknown)}")
            spec = fielddsl.VectorPotentialSpec.from_strings(
                spec.name, spec.strings(), {**spec.params, **self.params}
            )
        return spec

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("out")
        out.pop("format")
        out["grid"] = list(self.grid)
        out["spacing"] = list(self.spacing)
        return out


# ------------------------------------------------------------------ JSON output


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = f"{x:.17g}"
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ------------------------------------------------------------------ commands


def cmd_analyze(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.load_field()
    pred = fielddsl.predict_supercharges(spec, cfg.make_sampler(), cfg.parity_tol)
    payload = {
        "field": spec.to_json(),
        "sampler": {"count": cfg.samples, "box": cfg.box, "seed": cfg.seed, "tol": cfg.parity_tol},
    }
    payload.update(pred.to_json())
    return payload, EXIT_PASS


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.load_field()
    grid = cfg.make_grid()
    if grid.dim > spectral.DENSE_EIG_LIMIT:
        raise UsageError(f"grid dimension {grid.dim} exceeds {spectral.DENSE_EIG_LIMIT}")
    pred = fielddsl.predict_supercharges(spec, cfg.make_sampler(), cfg.parity_tol)
    cert = susy.certify(spec, grid, cfg.tol_adm, cfg.tol_algebra)
    payload = cert.to_json()
    payload["predicted"] = {"axes": list(pred.axes), "N": pred.n_supercharges, "seed": cfg.seed}
    return payload, EXIT_PASS if cert.report.passed else EXIT_FAIL


def cmd_spectrum(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.load_field()
    grid = cfg.make_grid()
    if grid.dim > spectral.DENSE_EIG_LIMIT:
        raise UsageError(f"grid dimension {grid.dim} exceeds {spectral.DENSE_EIG_LIMIT}")
    cert = susy.certify(spec, grid, cfg.tol_adm, cfg.tol_algebra)
    report = spectral.analyze_spectrum(
        cert.supercharges.hamiltonian, cert.n_supercharges, cfg.cluster_tol, cfg.zero_tol
    )
    payload = {"field": spec.to_json(), "grid": grid.to_json()}
    payload.update(report.to_json())
    return payload, EXIT_PASS if report.law_satisfied else EXIT_FAIL


def _text_summary(command: str, payload: dict) -> str:
    lines = []
    if "field" in payload:
        lines.append(f"field: {payload['field']['name']}")
    if command == "analyze":
        lines.append(f"predicted axes: {payload['axes']}  N = {payload['N']}")
        for comp, row in payload["parity"].items():
            lines.append(f"  {comp}: " + ", ".join(f"{k} {v}" for k, v in row.items()))
    elif command == "verify":
        ts = ", ".join(f"(sigma_{t['spin']}, {t['orbital']})" for t in payload["ts"])
        lines.append(f"certified N = {payload['N']}  T = [{ts}]")
        lines.append(f"max residual {payload['max_residual']:.3e} (tol {payload['tol']:.1e})")
        lines.append("PASS" if payload["pass"] else "FAIL")
    elif command == "spectrum":
        lines.append(
            f"N = {payload['N']}  divisor {payload['divisor']}  zero modes {payload['zero_modes']}"
            f"  levels {len(payload['clusters'])}"
        )
        bad = [c for c in payload["clusters"] if not c["divisible"]]
        lines.append("PASS" if payload["pass"] else f"FAIL ({len(bad)} levels not divisible)")
    return "\n".join(lines)


# ------------------------------------------------------------------ argparse


def _triple(kind):
    def parse(text: str):
        parts = [p for p in text.split(",") if p.strip()]
        if len(parts) == 1:
            parts = parts * 3
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
        try:
            return tuple(kind(p) for p in parts)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return parse


def _param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), float(value)


def _add_run_flags(p: argparse.ArgumentParser, lattice: bool = True) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=catalog.names())
    src.add_argument("--field", metavar="PATH", help="field definition JSON file")
    p.add_argument("--param", action="append", type=_param, metavar="NAME=VALUE")
    p.add_argument("--config", metavar="PATH", help="RunConfig JSON; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--box", type=float)
    p.add_argument("--parity-tol", type=float)
    p.add_argument("--format", choices=["json", "text"])
    p.add_argument("--out", metavar="PATH")
    if lattice:
        p.add_argument("--grid", type=_triple(int), metavar="Mx,My,Mz")
        p.add_argument("--spacing", type=_triple(float), metavar="hx,hy,hz")
        p.add_argument("--bc", choices=["dirichlet", "periodic"])
        p.add_argument("--tol-adm", type=float)
        p.add_argument("--tol-algebra", type=float)
        p.add_argument("--cluster-tol", type=float)
        p.add_argument("--zero-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pauli-susy", description="Extended supersymmetry of the lattice Pauli Hamiltonian"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("analyze", help="predict supercharges from field parities"), lattice=False)
    _add_run_flags(sub.add_parser("verify", help="certify the superalgebra on a lattice"))
    _add_run_flags(sub.add_parser("spectrum", help="check the degeneracy law on the spectrum"))
    cat = sub.add_parser("catalog", help="built-in fields")
    cat.add_argument("action", choices=["list"])
    dump = sub.add_parser("dump", help="write an operator as sparse triplets")
    _add_run_flags(dump)
    dump.add_argument("--op", choices=["q0", "h"], default="q0")
    return parser


_FLAG_KEYS = (
    "builtin", "field", "seed", "samples", "box", "parity_tol", "format", "out", "grid",
    "spacing", "bc", "tol_adm", "tol_algebra", "cluster_tol", "zero_tol",
)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        for key, value in raw.items():
            setattr(cfg, key, tuple(value) if key in ("grid", "spacing") else value)
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "builtin", None) is not None:
        cfg.field = None
    elif getattr(args, "field", None) is not None:
        cfg.builtin = None
    if getattr(args, "param", None):
        cfg.params = {**cfg.params, **dict(args.param)}
    cfg.validate()
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "spectrum": cmd_spectrum}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS

    if args.command == "catalog":
        for nf in catalog.all_builtins():
            sys.stdout.write(json.dumps(nf.to_json(), sort_keys=False) + "\n")
        return EXIT_PASS

    try:
        cfg = config_from_args(args)
        if args.command == "dump":
            spec = cfg.load_field()
            q0 = susy.build_q0(cfg.make_grid(), spec)
            op = q0 if args.op == "q0" else susy.build_hamiltonian(q0)
            if cfg.out:
                with open(cfg.out, "w", encoding="utf-8") as fh:
                    dump_triplets(op, fh)
            else:
                dump_triplets(op, sys.stdout)
            return EXIT_PASS
        payload, code = COMMANDS[args.command](cfg)
        payload["config"] = cfg.to_json()
    except (UsageError, fielddsl.ExprError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = dumps(payload) if cfg.format == "json" else _text_summary(args.command, payload)
    _emit(text, cfg.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
