"""Command-line front end.

Subcommands::

    cogmac region    --mu 0.1 --rho 0 --out figs/region      # three frontier CSVs + manifest.json
    cogmac sweep     --var mu --start 0 --stop 1 --steps 21 --out sweep.csv
    cogmac allocate  --mu 0.5 --rho 0                          # JSON to stdout or --out
    cogmac estimate  --mu 0 --n-samples 100000 --seed 7

Any flag may also come from a JSON file given with ``--config``; flags win.
Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .bounds import (
    DEFAULT_RESOLUTION,
    inner_region,
    max_sum_rate,
    optimal_allocation,
    oracle_max_sum_rate,
    outer1_region,
    outer2_region,
    sum_rate_objective,
)
from .errors import DomainError
from .estimator import DEFAULT_SEED, MIN_SAMPLES, GaussianStrategy, sandwich_check
from .fading import FadingParams, fading_sum_rate
from .geometry import RateRegion, contains, hausdorff, support
from .prob_model import ModelParams, TableMode

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CHECK = 4

ALLOCATION_TOL = 1e-6
CONTAINMENT_TOL = 1e-9

COMMANDS = ("region", "sweep", "allocate", "estimate")


class UsageError(Exception):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigReadError(OSError):
    pass


@dataclass(frozen=True)
class JobConfig:
    command: str
    mu: float = 0.5
    rho: float = 0.0
    p1: float = 1.0
    p2: float = 1.0
    dwell_n: float = 100.0
    i_sq: float = 10.0
    table_mode: str = TableMode.CONSISTENT.value
    resolution: int = DEFAULT_RESOLUTION
    var: str = "mu"
    start: float = 0.0
    stop: float = 1.0
    steps: int = 21
    seed: int = DEFAULT_SEED
    n_samples: int = 100_000
    out: str | None = None

    def params(self, **override) -> ModelParams:
        values = dict(
            mu=self.mu,
            rho=self.rho,
            p1_avg=self.p1,
            p2_avg=self.p2,
            dwell_n=self.dwell_n,
            i_sq=self.i_sq,
            table_mode=self.table_mode,
        )
        values.update(override)
        return ModelParams(**values)

    def manifest(self) -> dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.pop("out")
        return data


_FIELD_TYPES = {f.name: f.type for f in fields(JobConfig)}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    S = argparse.SUPPRESS
    g.add_argument("--config", metavar="FILE", default=S, help="JSON file with any of the flag values (flags override it)")
    g.add_argument("--mu", type=float, default=S, help="primary-user occupation probability of every switch, in [0, 1] (default 0.5)")
    g.add_argument("--rho", type=float, default=S, help="common pairwise correlation of the three switch states, in [0, 1] (default 0)")
    g.add_argument("--p1", type=float, default=S, help="average power budget of transmitter 1, linear SNR (default 1)")
    g.add_argument("--p2", type=float, default=S, help="average power budget of transmitter 2, linear SNR (default 1)")
    g.add_argument("--dwell-n", dest="dwell_n", type=float, default=S, help="mean slots between primary-user state changes; caps the genie rate at 1/N per link (default 100)")
    g.add_argument("--i-sq", dest="i_sq", type=float, default=S, help="noise power I^2 >= 1 of the bad receiver state in the fading model (default 10, i.e. -10 dB)")
    g.add_argument("--table-mode", dest="table_mode", choices=[m.value for m in TableMode], default=S, help="joint switch table: 'verbatim' keeps the raw closed-form cells (they may not sum to 1), 'consistent' re-derives two cells so the law normalizes (default)")
    g.add_argument("--resolution", type=int, default=S, help="power-split samples per transmitter in region sweeps (default 201)")
    g.add_argument("--out", default=S, help="output path (directory for region, CSV file for sweep, JSON file otherwise; stdout if omitted)")

    parser = argparse.ArgumentParser(prog="cogmac", description="Rate-region bounds and power allocation for the three-switch cognitive MAC.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("region", parents=[common], help="write outer bound 1, outer bound 2 and inner bound frontiers as CSV")
    sw = sub.add_parser("sweep", parents=[common], help="closed-form and fading sum rates along mu or rho")
    sw.add_argument("--var", choices=["mu", "rho"], default=S, help="swept parameter (default mu)")
    sw.add_argument("--start", type=float, default=S, help="first sweep value (default 0)")
    sw.add_argument("--stop", type=float, default=S, help="last sweep value (default 1)")
    sw.add_argument("--steps", type=int, default=S, help="number of sweep points, >= 2 (default 21)")
    sub.add_parser("allocate", parents=[common], help="sum-rate-optimal per-event powers with a brute-force cross-check")
    est = sub.add_parser("estimate", parents=[common], help="Monte-Carlo Gaussian-input sum rate checked against the outer bounds")
    est.add_argument("--seed", type=int, default=S, help=f"random seed (default {DEFAULT_SEED})")
    est.add_argument("--n-samples", dest="n_samples", type=int, default=S, help=f"Monte-Carlo samples, >= {MIN_SAMPLES} (default 100000)")
    return parser


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    try:
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        return value if value is None else str(value)
    except (TypeError, ValueError):
        raise UsageError(name, f"invalid value {value!r}") from None


def _validate(cfg: JobConfig) -> None:
    for name in ("mu", "rho", "p1", "p2", "dwell_n", "i_sq", "start", "stop"):
        if not math.isfinite(getattr(cfg, name)):
            raise UsageError(name, "must be finite")
    try:
        cfg.params()
    except DomainError as exc:
        name = {"p1_avg": "p1", "p2_avg": "p2"}.get(exc.field, exc.field)
        raise UsageError(name, str(exc).split(": ", 1)[-1]) from None
    if cfg.table_mode not in {m.value for m in TableMode}:
        raise UsageError("table_mode", f"must be one of {[m.value for m in TableMode]}")
    if cfg.resolution < 2:
        raise UsageError("resolution", "must be >= 2")
    if cfg.command == "sweep":
        if cfg.var not in ("mu", "rho"):
            raise UsageError("var", "must be 'mu' or 'rho'")
        if cfg.steps < 2:
            raise UsageError("steps", "must be >= 2")
        for name in ("start", "stop"):
            if not 0.0 <= getattr(cfg, name) <= 1.0:
                raise UsageError(name, f"{cfg.var} values must lie in [0, 1]")
        if cfg.stop <= cfg.start:
            raise UsageError("stop", "must exceed start")
    if cfg.command == "estimate" and cfg.n_samples < MIN_SAMPLES:
        raise UsageError("n_samples", f"must be >= {MIN_SAMPLES}")
    if cfg.command in ("region", "sweep") and not cfg.out:
        raise UsageError("out", f"an output path is required for {cfg.command}")


def parse_config(argv: Sequence[str] | None = None) -> JobConfig:
    """Parse flags (and an optional JSON config file) into a validated job.

    Raises ``SystemExit(2)`` for malformed flags, :class:`UsageError` for
    invalid values and :class:`ConfigReadError` if the config file is unreadable.
    """
    ns = vars(_build_parser().parse_args(argv))
    command = ns.pop("command")
    values: dict[str, Any] = {}
    config_path = ns.pop("config", None)
    if config_path is not None:
        try:
            text = Path(config_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigReadError(f"cannot read config {config_path}: {exc.strerror}") from None
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError("config", f"invalid JSON: {exc.msg}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config", "top level must be an object")
        for key, value in loaded.items():
            name = key.replace("-", "_")
            if name not in _FIELD_TYPES or name == "command":
                raise UsageError(key, "unknown configuration key")
            values[name] = value
    values.update(ns)
    cfg = JobConfig(command, **{k: _coerce(k, v) for k, v in values.items()})
    _validate(cfg)
    return cfg


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_json(cfg: JobConfig, data: dict[str, Any]) -> None:
    text = _json_text(data)
    if cfg.out:
        _write(Path(cfg.out), text)
    else:
        sys.stdout.write(text)


def _region_rows(region: RateRegion):
    return [(v.r1, v.r2) for v in region.vertices]


def cmd_region(cfg: JobConfig) -> int:
    params = cfg.params()
    joint = params.joint()
    regions = {
        "outer1": outer1_region(params, cfg.resolution),
        "outer2": outer2_region(params, cfg.resolution),
        "inner": inner_region(params),
    }
    chain12 = contains(regions["outer1"], regions["outer2"], CONTAINMENT_TOL)
    chain2i = contains(regions["outer2"], regions["inner"], CONTAINMENT_TOL)
    out = Path(cfg.out)
    for name, region in regions.items():
        _write(out / f"{name}.csv", _csv_text(("r1_bits", "r2_bits"), _region_rows(region)))
    manifest = {
        "config": cfg.manifest(),
        "table_mode": params.table_mode.value,
        "normalization_defect": joint.normalization_defect,
        "resolution": cfg.resolution,
        "files": {name: f"{name}.csv" for name in regions},
        "sum_rate_bits": {name: support(r, (1.0, 1.0)) for name, r in regions.items()},
        "max_sum_rate_bits": max_sum_rate(params),
        "hausdorff_outer1_outer2": hausdorff(regions["outer1"], regions["outer2"]),
        "hausdorff_outer2_inner": hausdorff(regions["outer2"], regions["inner"]),
        "outer2_in_outer1": {"holds": chain12.holds, "max_violation": chain12.max_violation},
        "inner_in_outer2": {"holds": chain2i.holds, "max_violation": chain2i.max_violation},
    }
    _write(out / "manifest.json", _json_text(manifest))
    if not (chain12.holds and chain2i.holds):
        print("numerical check failed: bound containment chain violated", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_sweep(cfg: JobConfig) -> int:
    xs = np.linspace(cfg.start, cfg.stop, cfg.steps)
    rows = []
    for x in xs:
        params = cfg.params(**{cfg.var: float(x)})
        rows.append((x, max_sum_rate(params), fading_sum_rate(FadingParams.from_params(params)).rate))
    out = Path(cfg.out)
    _write(out, _csv_text(("x", "sum_rate_bits", "fading_sum_rate_bits"), rows))
    manifest = {"config": cfg.manifest(), "file": out.name, "columns": ["x", "sum_rate_bits", "fading_sum_rate_bits"]}
    _write(out.with_suffix(".manifest.json"), _json_text(manifest))
    return EXIT_OK


def cmd_allocate(cfg: JobConfig) -> int:
    params = cfg.params()
    ev = params.events()
    base = {"config": cfg.manifest(), "table_mode": params.table_mode.value}
    if ev.effective <= 0:
        zeros = dict.fromkeys(("p1a", "p2b", "p1c", "p2c", "sum_rate_bits", "oracle_sum_rate_bits", "agreement_abs"), 0.0)
        _emit_json(cfg, {**base, **zeros, "fallback": False, "status": "no-transmission: no event with receiver and a transmitter on"})
        return EXIT_OK
    alloc = optimal_allocation(params)
    value = sum_rate_objective(ev, alloc)
    oracle = oracle_max_sum_rate(params)
    agreement = abs(value - oracle.value)
    data = {
        **base,
        "p1a": alloc.p1a,
        "p2b": alloc.p2b,
        "p1c": alloc.p1c,
        "p2c": alloc.p2c,
        "sum_rate_bits": value,
        "closed_form_sum_rate_bits": max_sum_rate(params),
        "oracle_sum_rate_bits": oracle.value,
        "agreement_abs": agreement,
        "fallback": alloc.fallback,
        "status": "boundary-fallback" if alloc.fallback else "interior",
    }
    _emit_json(cfg, data)
    if agreement > ALLOCATION_TOL:
        print(f"numerical check failed: oracle disagrees by {agreement:.3g} bits", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _estimate_dict(est) -> dict[str, Any]:
    return {"value_bits": est.value, "std_err_bits": est.std_err, "n_samples": est.n_samples, "seed": est.seed}


def cmd_estimate(cfg: JobConfig) -> int:
    params = cfg.params()
    strategy = GaussianStrategy.full_power(params.joint(), params.p1_avg, params.p2_avg)
    report = sandwich_check(params, strategy, cfg.n_samples, cfg.seed, cfg.resolution)
    data = {
        "config": cfg.manifest(),
        "table_mode": params.table_mode.value,
        "variances": [list(v) for v in strategy.variances],
        "r1": _estimate_dict(report.rates.r1),
        "r2": _estimate_dict(report.rates.r2),
        "sum": _estimate_dict(report.rates.sum),
        "outer1_sum_bits": report.outer1_sum,
        "outer2_sum_bits": report.outer2_sum,
        "margin_outer1_bits": report.margin_outer1,
        "margin_outer2_bits": report.margin_outer2,
        "independence_violation": report.rates.independence_violation,
        "passed": report.passed,
        "messages": list(report.messages),
        "seed": report.seed,
    }
    _emit_json(cfg, data)
    if not report.passed:
        print("numerical check failed: " + "; ".join(report.messages), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


HANDLERS = {"region": cmd_region, "sweep": cmd_sweep, "allocate": cmd_allocate, "estimate": cmd_estimate}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"cogmac: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigReadError as exc:
        print(f"cogmac: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return HANDLERS[cfg.command](cfg)
    except OSError as exc:
        print(f"cogmac: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
