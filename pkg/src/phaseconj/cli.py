"""Command-line experiment runner.

Exit codes: 0 success, 2 invalid configuration, 3 unphysical parameters.
Reports go to standard output (or ``--out``); diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import channels as ch
from . import constraints as cons
from . import protocols as proto
from .errors import InvalidModeError, InvalidParameter, UnphysicalChannel

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNPHYSICAL = 3

COMMANDS = ("conjugate", "estimate", "epr-bound", "solve", "fidelity")
STRATEGY_CHOICES = tuple(s.value.replace("_", "-") for s in proto.Strategy) + ("all",)


class ConfigError(Exception):
    pass


# -- serialization ------------------------------------------------------------


def _format_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize non-finite value {v!r}")
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _to_builtin(obj: Any) -> Any:
    if hasattr(obj, "as_dict"):
        return _to_builtin(obj.as_dict())
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_builtin(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dump_json(obj: Any, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump_json(v) for v in obj) + "]"
        items = [pad + _dump_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    return json.dumps(obj)


def _flatten(prefix: str, obj: Any, out: dict) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out[prefix] = obj


def _csv_cell(v: Any) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return _format_float(v)
    return str(v)


def serialize(report: Any, fmt: str = "json") -> bytes:
    """Render a report (or list of reports) as JSON or CSV bytes.

    JSON keeps the report's field names and order; floats carry 17
    significant digits. CSV has one header row, one row per report, nested
    fields flattened with dotted names. Lines end in ``\\n``.
    """
    data = _to_builtin(report)
    if fmt == "json":
        return (_dump_json(data) + "\n").encode()
    if fmt == "csv":
        rows = data if isinstance(data, list) else [data]
        flat = []
        for row in rows:
            d: dict = {}
            _flatten("", row, d)
            flat.append(d)
        header = list(flat[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for d in flat:
            w.writerow([_csv_cell(d.get(k)) for k in header])
        return buf.getvalue().encode()
    raise ConfigError(f"unknown format {fmt!r}")


# -- configuration -------------------------------------------------------------


@dataclass
class ExperimentConfig:
    command: str
    alpha_x: float = 0.0
    alpha_p: float = 0.0
    sigma2: float = 1.0
    shots: int = proto.DEFAULT_SHOTS
    seed: int = proto.DEFAULT_SEED
    strategy: str = "all"
    r_grid: tuple[float, float, float] = (0.0, 5.0, 0.5)
    format: str | None = None
    out: str | None = None
    threads: int = 1
    allow_unphysical: bool = False
    monte_carlo: bool = False
    samples: int = 100_000

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        start, stop, step = self.r_grid
        if not step > 0:
            raise ConfigError("r-grid step must be positive")
        if stop < start:
            raise ConfigError("r-grid stop must be >= start")
        if start < 0:
            raise ConfigError("r-grid values must be nonnegative")
        sampling = self.command == "estimate" or (self.command == "fidelity" and self.monte_carlo)
        if sampling and self.shots < proto.MIN_SHOTS:
            raise ConfigError(f"shots must be >= {proto.MIN_SHOTS}")
        if self.command == "solve" and self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.format not in (None, "json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")

    @property
    def output_format(self) -> str:
        if self.format:
            return self.format
        return "csv" if self.command == "epr-bound" else "json"


def parse_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be numeric, got {text!r}") from None
    return start, stop, step


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phaseconj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, sampling=False):
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out", help="write the report here instead of standard output")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sampling; never changes the output")
        if sampling:
            p.add_argument("--shots", type=int, default=proto.DEFAULT_SHOTS)
            p.add_argument("--seed", type=_seed, default=proto.DEFAULT_SEED)

    def alpha(p):
        p.add_argument("--alpha-x", type=float, default=0.0)
        p.add_argument("--alpha-p", type=float, default=0.0)

    p = sub.add_parser("conjugate", help="phase-conjugate a coherent state")
    alpha(p)
    p.add_argument("--sigma2", type=float, default=1.0)
    common(p)

    p = sub.add_parser("estimate", help="Monte Carlo estimation of (x, p) per encoding strategy")
    alpha(p)
    p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="all")
    common(p, sampling=True)

    p = sub.add_parser("epr-bound", help="EPR noise-bound experiment over a squeezing grid")
    p.add_argument("--r-grid", type=parse_grid, default=(0.0, 5.0, 0.5))
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--allow-unphysical", action="store_true")
    common(p)

    p = sub.add_parser("solve", help="conjugator coefficient derivation and uniqueness search")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=_seed, default=proto.DEFAULT_SEED)
    common(p)

    p = sub.add_parser("fidelity", help="conjugation fidelity against the conjugate coherent state")
    alpha(p)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--monte-carlo", action="store_true",
                   help="also estimate the fidelity by sampling the measure-and-prepare conjugator")
    common(p, sampling=True)
    return parser


def config_from_args(argv: Sequence[str]) -> ExperimentConfig:
    ns = build_parser().parse_args(list(argv))
    kw = {k: v for k, v in vars(ns).items() if v is not None}
    cfg = ExperimentConfig(**kw)
    cfg.validate()
    return cfg


# -- commands ------------------------------------------------------------------


def _conjugate(cfg: ExperimentConfig):
    out = proto.conjugation_output(cfg.alpha_x, cfg.alpha_p, cfg.sigma2)
    return {
        "alpha_x": cfg.alpha_x,
        "alpha_p": cfg.alpha_p,
        "sigma2": cfg.sigma2,
        "mean": out.mean,
        "cov": out.cov,
        "added_noise": ch.added_noise(ch.conjugation_channel(cfg.sigma2)),
        "fidelity": ch.fidelity_coherent(out, cfg.alpha_x, -cfg.alpha_p),
    }


def _estimate(cfg: ExperimentConfig):
    names = list(proto.Strategy) if cfg.strategy == "all" else [proto.Strategy.parse(cfg.strategy)]
    reports = [
        proto.run_estimation(s, cfg.alpha_x, cfg.alpha_p, cfg.shots, cfg.seed, cfg.threads)
        for s in names
    ]
    return reports[0] if len(reports) == 1 else reports


def _epr(cfg: ExperimentConfig):
    start, stop, step = cfg.r_grid
    return proto.epr_bound_grid(start, stop, step, cfg.sigma2, cfg.allow_unphysical)


def _solve(cfg: ExperimentConfig):
    m12, l12 = cons.solve_row1()
    M, L = cons.family_matrices(0.0, 0.0)
    report = cons.check_constraints(M, L)
    grid = cons.grid_scan_row1()
    summary = cons.random_search_uniqueness(cfg.samples, cfg.seed)
    m21, m22, l21, l22 = cons.ancilla_row_family(0.0, 0.0)
    return {
        "row1": {"M11": 0.0, "M12": m12, "L11": 1.0, "L12": l12},
        "branch_M12_zero_roots": cons.row1_branch_roots("M12=0"),
        "grid_feasible_cells": grid,
        "ancilla_base": {"M21": m21.real, "M22": m22.real, "L21": l21.real, "L22": l22.real},
        "residuals": report.residuals,
        "all_satisfied": report.all_satisfied,
        "uniqueness": summary,
    }


def _fidelity(cfg: ExperimentConfig):
    result = {
        "alpha_x": cfg.alpha_x,
        "alpha_p": cfg.alpha_p,
        "sigma2": cfg.sigma2,
        "fidelity": proto.conjugation_fidelity_experiment(cfg.alpha_x, cfg.alpha_p, cfg.sigma2),
    }
    if cfg.monte_carlo:
        if cfg.sigma2 != 1.0:
            raise ConfigError("--monte-carlo samples the optimal conjugator; use --sigma2 1")
        est = proto.monte_carlo_conjugation_fidelity(cfg.alpha_x, cfg.alpha_p, cfg.shots, cfg.seed)
        result.update(
            shots=est.shots,
            seed=cfg.seed,
            mc_overlap_mean=est.overlap_mean,
            mc_overlap_stderr=est.overlap_stderr,
            mc_from_moments=est.from_moments,
        )
    return result


_HANDLERS = {
    "conjugate": _conjugate,
    "estimate": _estimate,
    "epr-bound": _epr,
    "solve": _solve,
    "fidelity": _fidelity,
}


def run(cfg: ExperimentConfig) -> tuple[int, bytes, str]:
    """Execute ``cfg``; returns ``(exit_code, report_bytes, diagnostic)``."""
    try:
        cfg.validate()
        report = _HANDLERS[cfg.command](cfg)
        return EXIT_OK, serialize(report, cfg.output_format), ""
    except UnphysicalChannel as exc:
        return EXIT_UNPHYSICAL, b"", f"unphysical: {exc}"
    except (ConfigError, InvalidParameter, InvalidModeError) as exc:
        return EXIT_INVALID, b"", f"invalid configuration: {exc}"


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"phaseconj: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    code, payload, diag = run(cfg)
    if code != EXIT_OK:
        print(f"phaseconj: {diag}", file=sys.stderr)
        return code
    if cfg.out:
        with open(cfg.out, "wb") as f:
            f.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
