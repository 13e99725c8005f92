"""Command-line front end.

Subcommands: ``estimate``, ``simulate-limit``, ``experiment``, ``zeta`` and
``check-conditions``.  Any subcommand reads defaults from an INI file given by
``--config`` (section named after the subcommand, plus an optional
``[model]`` section); flags override file values.

Exit codes: 0 success, 2 unparsable input or config, 3 domain error,
4 more than half of a campaign's replications excluded.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import __version__
from . import estimators as est
from . import experiments as ex
from . import limitlaw, models
from .exceptions import DomainError, GenHillError, RangeError
from .series import zeta

log = logging.getLogger("genhill")

SEED_ENV = "GENHILL_SEED"
EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_EXCLUDED = 0, 2, 3, 4
DEFAULT_K_EXPONENTS = (0.6, 0.75, 0.9)


class ParseFailure(Exception):
    """Unparsable input file or config value (exit code 2)."""


# ---------------------------------------------------------------- value conversion


def _floats(v) -> list[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).replace(",", " ").split()]


def _ints(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    return [int(x) for x in str(v).replace(",", " ").split()]


def _strs(v) -> list[str]:
    if isinstance(v, (list, tuple)):
        return [str(x) for x in v]
    return [x for x in str(v).replace(",", " ").split()]


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


@dataclass(frozen=True)
class Param:
    convert: Callable[[Any], Any]
    default: Any = None
    section: str = ""


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParseFailure(f"{SEED_ENV}={raw!r} is not an integer") from None


MODEL_PARAMS = {
    "model": Param(str, "pareto", "model"),
    "gamma": Param(float, None, "model"),
    "eta": Param(float, None, "model"),
    "c4": Param(float, None, "model"),
    "beta": Param(float, None, "model"),
}

COMMAND_PARAMS: dict[str, dict[str, Param]] = {
    "estimate": {
        "input": Param(str),
        "tau": Param(_floats, [0.5]),
        "k": Param(_ints),
        "gamma": Param(float),
        "out": Param(str),
    },
    "simulate-limit": {
        "tau": Param(_floats, list(ex.TABLE1_TAUS)),
        "mixture": Param(_bool, True),
        "B": Param(int, 10_000),
        "N": Param(int, limitlaw.DEFAULT_N),
        "points": Param(_floats, [-1.96, 0.0, 1.96]),
        "seed": Param(int),
        "out": Param(str),
    },
    "experiment": {
        "kind": Param(str, "table2"),
        **MODEL_PARAMS,
        "n": Param(int, 300),
        "k": Param(str, "ceil(n^0.75)"),
        "tau": Param(_floats, [0.5]),
        "estimators": Param(_strs, list(ex.TABLE2_ESTIMATORS)),
        "half_family_a": Param(float, 0.5),
        "reps": Param(int, 500),
        "N": Param(int, limitlaw.DEFAULT_N),
        "sampler": Param(str, "upper"),
        "jobs": Param(int, 1),
        "seed": Param(int),
        "out": Param(str),
    },
    "zeta": {
        "s": Param(_floats),
        "tol": Param(float, 1e-12),
    },
    "check-conditions": {
        **MODEL_PARAMS,
        "tau": Param(float, 0.5),
        "lambda": Param(float, 2.0),
        "n": Param(_ints, [10**2, 10**3, 10**4, 10**5, 10**6]),
        "k": Param(_strs, ["ceil(n^0.6)"]),
        "out": Param(str),
    },
}


def _read_config(path: Optional[str]) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if path is None:
        return cp
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ParseFailure(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ParseFailure(f"malformed config {path}: {exc}") from None
    return cp


def resolve(command: str, args: argparse.Namespace) -> dict[str, Any]:
    """Merge built-in defaults, config file values and flags (flags win)."""
    params = COMMAND_PARAMS[command]
    cp = _read_config(getattr(args, "config", None))
    known = set(params)
    for section in cp.sections():
        if section not in (command, "model"):
            raise ParseFailure(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in known:
                raise ParseFailure(f"unknown key {key!r} in config section [{section}]")
    resolved: dict[str, Any] = {}
    for name, p in params.items():
        value = getattr(args, name.replace("-", "_"), None)
        if value is None:
            section = p.section or command
            raw = cp.get(section, name, fallback=None)
            if raw is None and section != command:
                raw = cp.get(command, name, fallback=None)
            if raw is not None:
                try:
                    value = p.convert(raw)
                except ValueError as exc:
                    raise ParseFailure(f"config key {name!r}: {exc}") from None
        if value is None:
            value = p.default
        resolved[name] = value
    if "seed" in params and resolved["seed"] is None:
        resolved["seed"] = _default_seed()
    return resolved


# ---------------------------------------------------------------- output


def _emit(text: str, out: Optional[str], suffix: str = "") -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(str(out) + suffix).write_text(text, newline="")


def _log_config(command: str, resolved: dict[str, Any], out: Optional[str]) -> None:
    payload = json.dumps({"command": command, **resolved}, sort_keys=True, default=str)
    if out is None:
        log.info("resolved config: %s", payload)
    else:
        Path(str(out) + ".config.json").write_text(payload + "\n", newline="")


def _model(cfg: dict[str, Any]) -> models.TailModel:
    kw = {key: cfg[key] for key in ("gamma", "eta", "beta") if cfg.get(key) is not None}
    if cfg.get("c4") is not None:
        kw["C4"] = cfg["c4"]
    return models.model_from_spec(cfg["model"], **kw)


# ---------------------------------------------------------------- commands


def read_sample_file(path: str) -> est.Sample:
    """One number per line; blank lines and ``#`` comments are skipped."""
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise ParseFailure(f"cannot read {path}: {exc}") from None
    values, lines = [], []
    bad = []
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
                lines.append(lineno)
            except ValueError:
                bad.append(f"line {lineno}: {text!r}")
    if bad:
        raise ParseFailure(f"{path}: unparsable lines: " + "; ".join(bad))
    for v, lineno in zip(values, lines):
        if not (math.isfinite(v) and v > 0):
            raise DomainError(f"{path}: line {lineno} holds {v!r}; observations must be positive and finite")
    if len(values) < 2:
        raise RangeError(f"{path}: need at least 2 observations, got {len(values)}")
    return est.Sample(values)


def cmd_estimate(cfg: dict[str, Any]) -> int:
    if cfg["input"] is None:
        raise ParseFailure("estimate needs an input file")
    sample = read_sample_file(cfg["input"])
    ks = cfg["k"] or sorted({est.default_k(sample.n, e) for e in DEFAULT_K_EXPONENTS})
    report = est.sweep(sample, cfg["tau"], ks, cfg["gamma"])
    header = ["tau", "k", "t_n", "a_n", "normalized", "studentized", "error"]
    rows = [[r[h] for h in header] for r in report.rows()]
    _emit(ex.write_csv(None, header, rows), cfg["out"])
    _log_config("estimate", {**cfg, "k": ks, "n": sample.n}, cfg["out"])
    return EXIT_OK


def cmd_simulate_limit(cfg: dict[str, Any]) -> int:
    table = ex.run_table1(cfg["tau"], cfg["B"], cfg["N"], cfg["points"], cfg["seed"], cfg["mixture"])
    rows = table.csv_rows()
    _emit(ex.write_csv(None, rows[0], rows[1:]), cfg["out"])
    _log_config("simulate-limit", cfg, cfg["out"])
    return EXIT_OK


def _experiment_outputs(result: ex.ExperimentResult, out: Optional[str]) -> None:
    tables = ex.result_tables(result)
    if out is None:
        header, rows = tables["aggregates"] if result.aggregates else tables["tests"]
        _emit(ex.write_csv(None, header, rows), None)
        return
    for name, (header, rows) in tables.items():
        if rows:
            _emit(ex.write_csv(None, header, rows), out, f".{name}.csv")


def cmd_experiment(cfg: dict[str, Any]) -> int:
    kind = cfg["kind"]
    model = _model(cfg)
    n, R, seed = cfg["n"], cfg["reps"], cfg["seed"]
    if kind == "table2":
        config = ex.ExperimentConfig(
            model=model,
            n=n,
            k_rule=cfg["k"],
            taus=cfg["tau"],
            estimators=cfg["estimators"],
            replications=R,
            master_seed=seed,
            half_family_a=cfg["half_family_a"],
            sampler=cfg["sampler"],
            n_jobs=cfg["jobs"],
        )
        result = ex.run_table2(config)
    else:
        if kind == "normality":
            rec = ex.run_normality_check(model, n, cfg["k"], R, seed, cfg["sampler"])
        elif kind == "limit":
            rec = ex.run_limit_agreement(model, cfg["tau"][0], n, cfg["k"], R, cfg["N"], seed, cfg["sampler"])
        elif kind == "gumbel":
            rec = ex.run_gumbel_check(model, n, cfg["tau"][0], cfg["k"], R, seed, cfg["N"], cfg["sampler"])
        else:
            raise ParseFailure(f"unknown experiment kind {kind!r}")
        records = [(r, ex.replication_seed(seed, r), rec.name, float(v), "") for r, v in enumerate(rec.values)]
        result = ex.ExperimentResult(gamma=model.gamma, replications=R, records=records, tests={rec.name: rec})
    _experiment_outputs(result, cfg["out"])
    _log_config("experiment", cfg, cfg["out"])
    frac = result.excluded_fraction()
    if frac > 0.5:
        print(f"genhill: {100 * frac:.1f}% of replications excluded for at least one estimator", file=sys.stderr)
        return EXIT_EXCLUDED
    return EXIT_OK


def cmd_zeta(cfg: dict[str, Any]) -> int:
    if not cfg["s"]:
        raise ParseFailure("zeta needs at least one argument s")
    rows = []
    for s in cfg["s"]:
        z = zeta(s, cfg["tol"])
        rows.append([s, z.value, z.abs_error_bound])
    sys.stdout.write(ex.write_csv(None, ["s", "zeta", "abs_error_bound"], rows))
    return EXIT_OK


def cmd_check_conditions(cfg: dict[str, Any]) -> int:
    model = _model(cfg)
    ns, ks = cfg["n"], cfg["k"]
    if len(ks) == 1:
        rule = ex.KRule.parse(ks[0])
        schedule = [(n, rule(n)) for n in ns]
    elif len(ks) == len(ns):
        schedule = [(n, ex.KRule.parse(k)(n)) for n, k in zip(ns, ks)]
    else:
        raise ParseFailure("--k takes one rule or one value per --n")
    report = models.check_conditions(model, cfg["tau"], cfg["lambda"], schedule)
    header = ["n", "k", "g1", "g2", "d", "c1_lhs", "c2_lhs", "c3_lhs"]
    rows = [[getattr(r, h) for h in header] for r in report.rows]
    _emit(ex.write_csv(None, header, rows), cfg["out"])
    _log_config("check-conditions", cfg, cfg["out"])
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate-limit": cmd_simulate_limit,
    "experiment": cmd_experiment,
    "zeta": cmd_zeta,
    "check-conditions": cmd_check_conditions,
}


# ---------------------------------------------------------------- parser


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="pareto, hall or gumbel_weibull")
    p.add_argument("--gamma", type=float, help="extreme value index of the model")
    p.add_argument("--eta", type=float, help="hall model: second-order exponent")
    p.add_argument("--c4", type=float, help="hall model: perturbation coefficient")
    p.add_argument("--beta", type=float, help="gumbel_weibull model: Weibull exponent (not 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genhill",
        description="Generalized Hill tail-index statistics, limit-law tables and Monte Carlo campaigns.",
        epilog=f"The default seed comes from ${SEED_ENV} when set, else 0.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log the resolved config to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("estimate", help="T_n(tau) sweep over a data file")
    p.add_argument("input", nargs="?", help="one positive number per line, '#' comments; '-' for stdin")
    p.add_argument("--tau", type=float, nargs="+", help="tau values in (0, 1] (default 0.5)")
    p.add_argument("--k", type=int, nargs="+", help="k values (default ceil(n^0.6), ceil(n^0.75), ceil(n^0.9))")
    p.add_argument("--gamma", type=float, help="reference gamma; adds a studentized column")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--config", help="INI config file")

    p = sub.add_parser("simulate-limit", help="empirical df of the limit law at evaluation points")
    p.add_argument("--tau", type=float, nargs="+", help="tau values in (0, 1/2)")
    mx = p.add_mutually_exclusive_group()
    mx.add_argument("--mixture", dest="mixture", action="store_const", const=True, help="add the uniform-tau mixture row (default)")
    mx.add_argument("--no-mixture", dest="mixture", action="store_const", const=False, help="omit the mixture row")
    p.add_argument("--B", type=int, help="draws per row (default 10000)")
    p.add_argument("--N", type=int, help="series truncation (default 10000)")
    p.add_argument("--points", type=float, nargs="+", help="evaluation points (default -1.96 0 1.96)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--config", help="INI config file")

    p = sub.add_parser("experiment", help="seeded Monte Carlo campaign")
    p.add_argument("--kind", choices=["table2", "normality", "limit", "gumbel"], help="campaign type (default table2)")
    _model_flags(p)
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--k", help="k rule, e.g. 'ceil(n^0.75)', or a fixed integer")
    p.add_argument("--tau", type=float, nargs="+", help="tau values")
    p.add_argument("--estimators", nargs="+", help=f"subset of {', '.join(ex.ESTIMATORS)}")
    p.add_argument("--half-family-a", dest="half_family_a", type=float, help="blend weight a in (0, 1)")
    p.add_argument("--reps", type=int, help="replications")
    p.add_argument("--N", type=int, help="limit-law truncation for 'limit' and 'gumbel'")
    p.add_argument("--sampler", choices=["upper", "full"], help="exact top order statistics or full samples")
    p.add_argument("--jobs", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output prefix for .records.csv, .aggregates.csv, .tests.csv, .config.json")
    p.add_argument("--config", help="INI config file")

    p = sub.add_parser("zeta", help="Riemann zeta with an error bound")
    p.add_argument("s", type=float, nargs="*", help="arguments s > 1")
    p.add_argument("--tol", type=float, help="target absolute error (default 1e-12)")
    p.add_argument("--config", help="INI config file")

    p = sub.add_parser("check-conditions", help="left-hand sides of the rate conditions along a schedule")
    _model_flags(p)
    p.add_argument("--tau", type=float, help="tau in (0, 1/2]")
    p.add_argument("--lambda", dest="lambda", type=float, help="sup range multiplier lambda > 1")
    p.add_argument("--n", type=int, nargs="+", help="sample sizes")
    p.add_argument("--k", nargs="+", help="one k rule, or one k per --n")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--config", help="INI config file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="genhill: %(message)s")
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except ParseFailure as exc:
        print(f"genhill: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (GenHillError, ValueError) as exc:
        print(f"genhill: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
