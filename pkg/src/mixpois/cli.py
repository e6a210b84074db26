"""``mixpois`` command line.

    mixpois <command> [--config PATH] [--seed U64] [--out PATH]
                      [--format json|csv] [--workers N] [--order S]

The config file is one JSON object; flags override single fields.
Recognised top-level fields::

    command           must match the positional command if given
    model             {"mixing": {...}, "rho": r}  or
                      {"joint_mixing": {...}, "rhos": [r1, r2, ...]}
    rho_schedule      increasing list of rho values (experiments)
    N                 sample size (default 200000)
    seed              master seed, unsigned 64-bit (default 20250206)
    thresholds        Chebyshev thresholds a (default [0.5, 1])
    max_moment_order  highest moment order compared (default 4)
    max_l             last l of a pmf table (default 10)
    order             polynomial / moment order (default 6)
    workers           sampling threads (default: number of processors)
    format            "json" or "csv" (default json)
    out               output path (default: standard output)

Mixing records: {"kind": "degenerate", "value": c},
{"kind": "gamma", "shape": a, "rate": b},
{"kind": "discrete", "atoms": [[v, p], ...]},
{"kind": "zero_inflated", "p": p, "base": {...}},
{"kind": "lognormal", "location": m, "scale": s}.
Joint mixing records: {"kind": "independent", "components": [...]},
{"kind": "comonotone", "mixing": {...}, "dim": m},
{"kind": "table", "atoms": [[[x1, x2, ...], p], ...]}.

Exit status: 0 when every verdict passes, 2 when any fails, 1 on a config
or numerical error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any

from . import kernels
from .combinatorics import (
    centered_poisson_moment_closed,
    centered_poisson_moment_recurrence,
    centered_poisson_moment_touchard,
)
from .limit_lab import (
    ExperimentConfig,
    run_clt_experiment,
    run_multivariate_experiment,
    run_point_mass_experiment,
    run_scaling_experiment,
    run_simulation_experiment,
    run_wrong_centering_experiment,
)
from .mixed_poisson import MixedPoissonModel, MultiMixedPoissonModel, model_from_config
from .mixing import ConfigError
from .quadrature import NumericalError
from .report import SCHEMA_VERSION, check, dumps, format_float

__all__ = ["COMMANDS", "DEFAULT_SEED", "RunConfig", "parse_config", "run", "main"]

COMMANDS = ("pmf", "moments", "centered-poly", "simulate", "clt", "scaling",
            "wrong-centering", "point-mass", "multivariate")
DEFAULT_SEED = 20250206
FORMATS = ("json", "csv")

_FIELDS = ("command", "model", "rho_schedule", "N", "seed", "thresholds",
           "max_moment_order", "max_l", "order", "workers", "format", "out")


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: dict[str, Any] | None = None
    rho_schedule: tuple[float, ...] = ()
    N: int = 200_000
    seed: int = DEFAULT_SEED
    thresholds: tuple[float, ...] = (0.5, 1.0)
    max_moment_order: int = 4
    max_l: int = 10
    order: int = 6
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    format: str = "json"
    out: str | None = None

    def echo(self) -> dict[str, Any]:
        """Record that parses back to an equivalent config (``out`` excluded)."""
        rec: dict[str, Any] = {"command": self.command}
        if self.model is not None:
            rec["model"] = self.model
        if self.rho_schedule:
            rec["rho_schedule"] = list(self.rho_schedule)
        rec.update({"N": self.N, "seed": self.seed, "thresholds": list(self.thresholds),
                    "max_moment_order": self.max_moment_order, "max_l": self.max_l,
                    "order": self.order, "workers": self.workers, "format": self.format})
        return rec


def _int_field(rec, key, lo=None, hi=None):
    val = rec[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(key, f"expected an integer, got {val!r}")
    if (lo is not None and val < lo) or (hi is not None and val > hi):
        raise ConfigError(key, f"value {val} out of range")
    return val


def _number_list(rec, key):
    val = rec[key]
    if not isinstance(val, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in val
    ):
        raise ConfigError(key, "expected a list of numbers")
    return tuple(float(v) for v in val)


def parse_config(record: Any, command: str | None = None) -> RunConfig:
    """Strictly parse a config record; unknown fields are errors."""
    if not isinstance(record, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in record:
        if key not in _FIELDS:
            raise ConfigError(key, "unknown field")
    cmd = record.get("command", command)
    if command is not None and cmd != command:
        raise ConfigError("command", f"config says {cmd!r} but {command!r} was requested")
    if cmd not in COMMANDS:
        raise ConfigError("command", f"unknown command {cmd!r}")
    kw: dict[str, Any] = {"command": cmd}
    if "model" in record:
        model_from_config(record["model"])  # validate now, keep the record
        kw["model"] = record["model"]
    if "rho_schedule" in record:
        kw["rho_schedule"] = _number_list(record, "rho_schedule")
    if "thresholds" in record:
        kw["thresholds"] = _number_list(record, "thresholds")
    if "N" in record:
        kw["N"] = _int_field(record, "N", lo=1)
    if "seed" in record:
        kw["seed"] = _int_field(record, "seed", lo=0, hi=2 ** 64 - 1)
    for key in ("max_moment_order", "max_l", "order", "workers"):
        if key in record:
            kw[key] = _int_field(record, key, lo=0 if key == "max_l" else 1)
    if "format" in record:
        if record["format"] not in FORMATS:
            raise ConfigError("format", f"expected one of {FORMATS}")
        kw["format"] = record["format"]
    if "out" in record:
        if not isinstance(record["out"], str):
            raise ConfigError("out", "expected a path string")
        kw["out"] = record["out"]
    return RunConfig(**kw)


def _need_model(cfg: RunConfig):
    if cfg.model is None:
        raise ConfigError("model", "missing field")
    return model_from_config(cfg.model)


def _need_univariate(cfg: RunConfig) -> MixedPoissonModel:
    model = _need_model(cfg)
    if not isinstance(model, MixedPoissonModel):
        raise ConfigError("model", f"{cfg.command} needs a univariate model")
    return model


def _schedule(cfg: RunConfig, model: MixedPoissonModel) -> tuple[float, ...]:
    if cfg.rho_schedule:
        return cfg.rho_schedule
    if "rho" in (cfg.model or {}):
        return (model.rho,)
    raise ConfigError("rho_schedule", "missing field (or give model.rho)")


def _experiment_config(cfg: RunConfig, model) -> ExperimentConfig:
    schedule = () if isinstance(model, MultiMixedPoissonModel) else _schedule(cfg, model)
    try:
        return ExperimentConfig(model=model, rho_schedule=schedule, sample_size=cfg.N,
                                master_seed=cfg.seed, thresholds=cfg.thresholds,
                                max_moment_order=cfg.max_moment_order,
                                workers=cfg.workers)
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None


def _table_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_float(v) if isinstance(v, float) else str(v)
                           for v in row) + "\n")
    return buf.getvalue()


@dataclass
class Outcome:
    text: str
    passed: int = 0
    failed: int = 0
    label: str = ""
    stdout_extra: str | None = None


def _table_outcome(cfg: RunConfig, name: str, columns, rows, label: str,
                   verdicts=()) -> Outcome:
    if cfg.format == "csv":
        text = _table_csv(columns, rows)
    else:
        doc = {"schema_version": SCHEMA_VERSION, "command": name, "config": cfg.echo(),
               "columns": list(columns), "rows": [list(r) for r in rows],
               "verdicts": [v.as_dict() for v in verdicts],
               "summary": {"passed": sum(v.passed for v in verdicts),
                           "failed": sum(not v.passed for v in verdicts)}}
        text = dumps(doc) + "\n"
    return Outcome(text, sum(v.passed for v in verdicts),
                   sum(not v.passed for v in verdicts), label)


def _cmd_pmf(cfg: RunConfig) -> Outcome:
    model = _need_univariate(cfg)
    rows, cum = [], 0.0
    for l in range(cfg.max_l + 1):
        p = model.pmf(l)
        cum += p
        rows.append((l, p, cum))
    return _table_outcome(cfg, "pmf", ("l", "pmf", "cumulative"), rows, model.describe())


def _cmd_moments(cfg: RunConfig) -> Outcome:
    model = _need_univariate(cfg)
    rows = [(s, model.factorial_moment(s), model.raw_moment(s), model.centered_moment(s))
            for s in range(1, cfg.order + 1)]
    return _table_outcome(cfg, "moments", ("s", "factorial", "raw", "centered"), rows,
                          model.describe())


def _cmd_centered_poly(cfg: RunConfig) -> Outcome:
    s = cfg.order
    rec = centered_poisson_moment_recurrence(s)
    closed = centered_poisson_moment_closed(s)
    touch = centered_poisson_moment_touchard(s)
    verdicts = [check(f"order={s}/closed==recurrence", int(closed != rec), "==", 0),
                check(f"order={s}/touchard==recurrence", int(touch != rec), "==", 0)]
    rows = [(k, str(c)) for k, c in enumerate(rec.coefficients)]
    out = _table_outcome(cfg, "centered-poly", ("k", "coefficient"), rows,
                         f"m_{s}(x) = {rec}", verdicts)
    out.stdout_extra = str(rec)
    return out


def _report_outcome(cfg: RunConfig, report, label: str) -> Outcome:
    report.config = cfg.echo()
    report.notes.append(f"kernel backend: {kernels.BACKEND}")
    text = report.to_csv() if cfg.format == "csv" else report.to_json()
    return Outcome(text, report.n_passed, report.n_failed, label)


def _cmd_experiment(cfg: RunConfig) -> Outcome:
    model = _need_model(cfg)
    runners = {"simulate": run_simulation_experiment, "clt": run_clt_experiment,
               "scaling": run_scaling_experiment}
    if cfg.command == "multivariate":
        if not isinstance(model, MultiMixedPoissonModel):
            raise ConfigError("model", "multivariate needs joint_mixing and rhos")
        report = run_multivariate_experiment(_experiment_config(cfg, model))
        return _report_outcome(cfg, report, model.describe())
    if not isinstance(model, MixedPoissonModel):
        raise ConfigError("model", f"{cfg.command} needs a univariate model")
    if cfg.command == "wrong-centering":
        if "rho" not in cfg.model:
            raise ConfigError("model.rho", "missing field")
        report = run_wrong_centering_experiment(model, cfg.N, cfg.seed,
                                                workers=cfg.workers)
    elif cfg.command == "point-mass":
        report = run_point_mass_experiment(model, _schedule(cfg, model), cfg.N,
                                           cfg.seed, workers=cfg.workers)
    else:
        report = runners[cfg.command](_experiment_config(cfg, model))
    return _report_outcome(cfg, report, model.mixing.describe())


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute ``cfg``; returns the exit status."""
    stdout = stdout or sys.stdout
    if cfg.command == "pmf":
        outcome = _cmd_pmf(cfg)
    elif cfg.command == "moments":
        outcome = _cmd_moments(cfg)
    elif cfg.command == "centered-poly":
        outcome = _cmd_centered_poly(cfg)
    else:
        outcome = _cmd_experiment(cfg)

    if cfg.out is not None:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(outcome.text)
    elif outcome.stdout_extra is None:
        stdout.write(outcome.text)
    if outcome.stdout_extra is not None:
        stdout.write(outcome.stdout_extra + "\n")
    stdout.write(f"{cfg.command} {outcome.label}: {outcome.passed} passed, "
                 f"{outcome.failed} failed\n")
    return 0 if outcome.failed == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixpois",
                                description="Mixed Poisson distributions and limit experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--workers", type=int, help="sampling threads")
    p.add_argument("--order", type=int, help="polynomial or moment order")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        record: dict[str, Any] = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                try:
                    record = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        overrides = {"seed": args.seed, "out": args.out, "format": args.format,
                     "workers": args.workers, "order": args.order}
        record = {**record, **{k: v for k, v in overrides.items() if v is not None}}
        cfg = parse_config(record, args.command)
        return run(cfg)
    except ConfigError as exc:
        print(f"mixpois: config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"mixpois: numerical error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"mixpois: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
