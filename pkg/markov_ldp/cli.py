"""Command-line interface for the Markov LDP toolkit.

Every subcommand writes its result to ``--out`` (or stdout) and its logs to
stderr. Floats are written with 17 significant digits so repeated runs
with the same arguments produce byte-identical files.

Exit codes: 0 success, 1 input error, 2 verification failure.
"""

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from markov_ldp.config import settings
from markov_ldp.core.contraction import contract
from markov_ldp.core.empirical import cyclic_empirical, doublet_empirical_raw, singleton_empirical
from markov_ldp.core.exceptions import BudgetExceededError, DomainError, HypothesisError, LDPError
from markov_ldp.core.information import smb_monte_carlo
from markov_ldp.core.ldp import (
    census_rate_check,
    census_total_probability,
    ldp_event_check,
    load_event,
    sandwich_check,
)
from markov_ldp.core.markov_core import (
    KTupleDistribution,
    MarkovModel,
    format_paths,
    load_model,
    load_paths,
    sample_path,
)
from markov_ldp.core.types_method import all_paths, census_bounds_check, enumerate_census, required_path_steps
from markov_ldp.schemas.converters import (
    bounds_response,
    census_file,
    census_from_file,
    contraction_response,
    entropy_response,
    rate_response,
    rate_rows,
)
from markov_ldp.schemas.models import CensusFile, EstimateResponse, RunConfig, SandwichResponse, SMBResponse, ext
from markov_ldp.utils.logger import RunLogger, logger

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2

LDP_CSV_COLUMNS = ("l", "exact", "rate_proxy", "envelope", "pass")


class _Parser(argparse.ArgumentParser):
    """Turns usage errors into input errors (exit 1) instead of argparse's exit 2."""

    def error(self, message: str):
        raise DomainError(f"{self.prog}: {message}")


# ============== Serialization ==============

def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def to_json(value: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats and a fixed key order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return json.dumps(ext(value)) if not math.isnan(value) else "null"
        return format_float(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in value):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in value) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _emit(config: RunConfig, text: str) -> None:
    if config.output_path:
        Path(config.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(config: RunConfig, payload: Any) -> None:
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump()
    _emit(config, to_json(payload) + "\n")


def _summary(text: str) -> None:
    sys.stderr.write(text + "\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise DomainError(f"cannot parse a list of numbers from {text!r}")


def _model(config: RunConfig) -> MarkovModel:
    if not config.model_path:
        raise DomainError("--model is required")
    return load_model(config.model_path)


def _status_code(status: str) -> int:
    return EXIT_FAILED if status == "FAIL" else EXIT_OK


# ============== Subcommands ==============

def _simulate(config: RunConfig) -> int:
    model = _model(config)
    opts = config.options
    paths = [sample_path(model, opts["l"], config.seed + i) for i in range(opts["count"])]
    _emit(config, format_paths(paths))
    return EXIT_OK


def _estimate(config: RunConfig) -> int:
    opts = config.options
    s, estimator = opts["s"], opts["estimator"]
    results = []
    for x in load_paths(opts["paths"], opts["n"]):
        if estimator == "singleton":
            results.append(EstimateResponse(l=x.l, s=0, counts=singleton_empirical(x).key))
            continue
        if estimator == "raw":
            results.append(EstimateResponse(l=x.l, s=1, counts=doublet_empirical_raw(x).key))
            continue
        if s >= x.l:
            logger.warning(f"Memory s={s} is not shorter than the path (l={x.l}); ghost windows wrap more than once")
        results.append(EstimateResponse(l=x.l, s=s, counts=cyclic_empirical(x, s).key))
    _emit_json(config, [r.model_dump() for r in results])
    return EXIT_OK


def _entropy(config: RunConfig) -> int:
    _emit_json(config, entropy_response(_model(config)))
    return EXIT_OK


def _rate(config: RunConfig) -> int:
    _emit_json(config, rate_response(_model(config), _floats(config.options["nu"])))
    return EXIT_OK


def _types_census(config: RunConfig) -> int:
    opts = config.options
    census = enumerate_census(opts["l"], opts["n"], opts["s"], budget=config.budget, workers=config.workers)
    _emit_json(config, census_file(census))
    return EXIT_OK


def _types_verify(config: RunConfig) -> int:
    with open(config.options["census"], "r", encoding="utf-8") as fh:
        census = census_from_file(CensusFile(**json.load(fh)))
    report = census_bounds_check(census)
    _emit_json(config, bounds_response(report))
    _summary(f"{report.status} n={census.n} l={census.l} s={census.s} classes={len(census)} failures={report.failures}")
    return _status_code(report.status)


def _verify_bounds(config: RunConfig) -> int:
    opts = config.options
    model = load_model(config.model_path) if config.model_path else None
    census = enumerate_census(
        opts["l"], opts["n"], opts["s"], model=model, budget=config.budget, workers=config.workers
    )
    report = census_bounds_check(census)
    status = report.status
    extra: Dict[str, Any] = {}
    if model is not None:
        total = census_total_probability(census)
        extra["total_probability"] = total
        if abs(total - 1.0) > 1e-9:
            status = "FAIL"
        try:
            rates = census_rate_check(model, census)
            extra["rate_failures"] = rates.failures
            if rates.failures and status != "UNVERIFIED":
                status = "FAIL"
        except HypothesisError as e:
            logger.warning(f"Rate envelope check skipped: {e.message}")
            if status == "PASS":
                status = "UNVERIFIED"
    _emit_json(config, bounds_response(report, status=status, **extra))
    _summary(f"{status} n={census.n} l={census.l} s={census.s} classes={len(census)} failures={report.failures}")
    return _status_code(status)


def _verify_ldp(config: RunConfig) -> int:
    opts = config.options
    model = _model(config)
    if opts["lmin"] < 1 or opts["lmax"] < opts["lmin"]:
        raise DomainError("need 1 <= --lmin <= --lmax")
    event = load_event(opts["event"])
    try:
        report = ldp_event_check(
            model, event, range(opts["lmin"], opts["lmax"] + 1), budget=config.budget, workers=config.workers
        )
    except HypothesisError as e:
        logger.warning(f"Event check hypotheses unmet: {e.message}")
        rows, failures, status = [], 0, "UNVERIFIED"
    else:
        rows, failures = rate_rows(report), report.failures
        status = "PASS" if report.passed else "FAIL"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(LDP_CSV_COLUMNS)
    for row in rows:
        writer.writerow([_csv_cell(value) for value in row.model_dump().values()])
    _emit(config, buffer.getvalue())
    _summary(f"{status} rows={len(rows)} failures={failures}")
    return _status_code(status)


def _verify_sandwich(config: RunConfig) -> int:
    opts = config.options
    model = _model(config)
    l = opts["l"]
    if opts.get("random"):
        paths = np.asarray([sample_path(model, l, config.seed + i).symbols for i in range(opts["random"])])
    else:
        required = required_path_steps(l, model.n)
        if required > config.budget:
            raise BudgetExceededError(required, config.budget)
        paths = all_paths(model.n, l)
    try:
        report = sandwich_check(model, paths)
    except HypothesisError as e:
        logger.warning(f"Sandwich hypotheses unmet: {e.message}")
        response = SandwichResponse(
            l=l, checked=0, failures=0, worst_lower_gap=0.0, worst_upper_gap=0.0, status="UNVERIFIED"
        )
    else:
        response = SandwichResponse(
            l=report.l,
            checked=report.checked,
            failures=report.failures,
            worst_lower_gap=report.worst_lower_gap,
            worst_upper_gap=report.worst_upper_gap,
            status="PASS" if report.passed else "FAIL",
        )
    _emit_json(config, response)
    _summary(f"{response.status} l={l} checked={response.checked} failures={response.failures}")
    return _status_code(response.status)


def _verify_smb(config: RunConfig) -> int:
    opts = config.options
    model = _model(config)
    seeds = range(config.seed, config.seed + opts["seeds"])
    summary = smb_monte_carlo(model, opts["l"], seeds)
    passed = abs(summary.bias) <= opts["max_bias"] and summary.std < opts["max_std"]
    response = SMBResponse(
        l=summary.l,
        paths=len(summary.samples),
        mean=summary.mean,
        std=summary.std,
        process_entropy=summary.process_entropy,
        bias=summary.bias,
        status="PASS" if passed else "FAIL",
    )
    _emit_json(config, response)
    _summary(f"{response.status} l={response.l} paths={response.paths} bias={response.bias:.3g} std={response.std:.3g}")
    return _status_code(response.status)


def _contract(config: RunConfig) -> int:
    model = _model(config)
    phi = KTupleDistribution(model.n, 1, _floats(config.options["phi"]))
    _emit_json(config, contraction_response(contract(phi, model)))
    return EXIT_OK


def _serve(config: RunConfig) -> int:
    import uvicorn

    uvicorn.run(
        "markov_ldp.main:app",
        host=config.options["host"],
        port=config.options["port"],
        log_level=settings.log_level.lower(),
    )
    return EXIT_OK


HANDLERS: Dict[tuple, Callable[[RunConfig], int]] = {
    ("simulate", None): _simulate,
    ("estimate", None): _estimate,
    ("entropy", None): _entropy,
    ("rate", None): _rate,
    ("types", "census"): _types_census,
    ("types", "verify"): _types_verify,
    ("verify", "bounds"): _verify_bounds,
    ("verify", "ldp"): _verify_ldp,
    ("verify", "sandwich"): _verify_sandwich,
    ("verify", "smb"): _verify_smb,
    ("contract", None): _contract,
    ("serve", None): _serve,
}


# ============== Parsing ==============

def _common(parser: argparse.ArgumentParser, model: bool = False, model_required: bool = False) -> None:
    if model:
        parser.add_argument("--model", dest="model_path", required=model_required, help="Model JSON file")
    parser.add_argument("--out", dest="output_path", help="Output file (stdout when omitted)")
    parser.add_argument("--seed", type=int, help="64-bit RNG seed")
    parser.add_argument("--budget", type=int, help="Max path-steps for enumeration (env LDP_BUDGET)")
    parser.add_argument("--workers", type=int, help="Census worker processes")
    parser.add_argument(
        "--tol",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Tolerance override, e.g. stationary_tol=1e-10",
    )


def _census_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="Alphabet size")
    parser.add_argument("--l", type=int, required=True, help="Path length")
    parser.add_argument("--s", type=int, default=1, help="Memory length")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="markov-ldp", description="Method-of-types large deviations for Markov chains.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Sample paths from a model")
    _common(p, model=True, model_required=True)
    p.add_argument("--l", type=int, required=True, help="Path length")
    p.add_argument("--count", type=int, default=1, help="Number of paths; path i uses seed+i")

    p = sub.add_parser("estimate", help="Empirical tuple counts of each path in a path file")
    _common(p)
    p.add_argument("--paths", required=True, help="Path file, one path per line")
    p.add_argument("--n", type=int, required=True, help="Alphabet size")
    p.add_argument("--s", type=int, default=1, help="Memory length")
    p.add_argument("--estimator", choices=("cyclic", "raw", "singleton"), default="cyclic")

    p = sub.add_parser("entropy", help="Process entropy of a model")
    _common(p, model=True, model_required=True)

    p = sub.add_parser("rate", help="Conditional relative entropy of nu under a model")
    _common(p, model=True, model_required=True)
    p.add_argument("--nu", required=True, help="Comma-separated distribution on A^(s+1)")

    p = sub.add_parser("types", help="Type-class census and its verification")
    types_sub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = types_sub.add_parser("census", help="Exact census of E(l, n, s+1)")
    _common(q)
    _census_args(q)
    q = types_sub.add_parser("verify", help="Check a census file against the type-class bounds")
    _common(q)
    q.add_argument("--census", required=True, help="Census JSON written by 'types census'")

    p = sub.add_parser("verify", help="Numerical verification sweeps")
    verify_sub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = verify_sub.add_parser("bounds", help="Census + type-class bounds (+ rate envelope with --model)")
    _common(q, model=True)
    _census_args(q)
    q = verify_sub.add_parser(
        "ldp",
        help="Exact event probabilities per length",
        description="Writes CSV with columns: l, exact, rate_proxy, envelope, pass.",
    )
    _common(q, model=True, model_required=True)
    q.add_argument("--event", required=True, help="Event JSON (ball, halfspace or classes)")
    q.add_argument("--lmin", type=int, required=True)
    q.add_argument("--lmax", type=int, required=True)
    q = verify_sub.add_parser("sandwich", help="Likelihood sandwich on all (or --random C) paths")
    _common(q, model=True, model_required=True)
    q.add_argument("--l", type=int, required=True, help="Path length")
    q.add_argument("--random", type=int, default=0, help="Check C seeded random paths instead of all")
    q = verify_sub.add_parser("smb", help="Monte Carlo of the per-symbol log-likelihood")
    _common(q, model=True, model_required=True)
    q.add_argument("--l", type=int, required=True, help="Path length")
    q.add_argument("--seeds", type=int, default=200, help="Number of seeded paths")
    q.add_argument("--max-bias", dest="max_bias", type=float, default=0.02)
    q.add_argument("--max-std", dest="max_std", type=float, default=0.05)

    p = sub.add_parser("contract", help="Singleton-frequency rate J(phi)")
    _common(p, model=True, model_required=True)
    p.add_argument("--phi", required=True, help="Comma-separated singleton frequencies")

    p = sub.add_parser("serve", help="Start the HTTP API")
    _common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _tolerances(items: Sequence[str]) -> Dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not hasattr(settings, name):
            raise DomainError(f"bad tolerance override {item!r}")
        out[name] = float(value)
    return out


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    base = {key: args.pop(key, None) for key in ("subcommand", "action", "model_path", "seed", "output_path")}
    budget = args.pop("budget", None)
    workers = args.pop("workers", None)
    return RunConfig(
        **base,
        budget=settings.budget if budget is None else budget,
        workers=settings.workers if workers is None else workers,
        tolerance_overrides=_tolerances(args.pop("tol", [])),
        options=args,
    )


@contextmanager
def _overrides(values: Dict[str, float]):
    saved = {name: getattr(settings, name) for name in values}
    try:
        for name, value in values.items():
            setattr(settings, name, value)
        yield
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)


def _fail(error: Dict[str, Any]) -> int:
    sys.stderr.write(json.dumps(error) + "\n")
    return EXIT_INPUT


# ============== Entry points ==============

def run(config: RunConfig) -> int:
    """Execute one resolved invocation and return its exit code."""
    RunLogger.log_command(" ".join(filter(None, [config.subcommand, config.action])), config.options)
    handler = HANDLERS[(config.subcommand, config.action)]
    try:
        with _overrides(config.tolerance_overrides):
            return handler(config)
    except LDPError as e:
        RunLogger.log_error(type(e).__name__, e.message, e.context)
        return _fail(e.to_dict())
    except ValidationError as e:
        RunLogger.log_error("ValidationError", str(e))
        return _fail({"error": "ValidationError", "message": str(e)})
    except (OSError, json.JSONDecodeError) as e:
        RunLogger.log_error(type(e).__name__, str(e))
        return _fail({"error": type(e).__name__, "message": str(e)})


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except LDPError as e:
        return _fail(e.to_dict())
    except ValidationError as e:
        return _fail({"error": "ValidationError", "message": str(e)})
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
