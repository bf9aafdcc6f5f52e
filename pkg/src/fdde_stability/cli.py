"""Command-line front end.

Options can come from flags or from a flat ``key = value`` file passed with
``--config``; flags win. Exit status is 2 for configuration errors, 3 for
domain errors (a critical value evaluated outside its domain, for example)
and 0 otherwise. Fixture mismatches are reported as data and still exit 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import FDDEError
from .fixtures import run_all
from .io import (
    ConfigError,
    fmt_short,
    read_config,
    region_csv,
    roots_csv,
    svg_from_csv,
    trajectory_csv,
)
from .model import LinearSingleDelay, ModelParams, Nonlinearity
from .roots import CharFn, find_imaginary_crossing, find_positive_real_root, verdict_from_roots
from .solver import CORRECTORS, SolverConfig, aligned_step, solve, solve_linear_single
from .sweep import DEFAULT_H_MAX, Case, Source, SweepSpec, sweep
from .theorems import classify, classify_single_delay, k_star, tau1_star, tau2_star, tau_cr

OUTPUT_DIR_ENV = "FDDE_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN = 0, 2, 3

CASES = {"1": Case.CASE1, "2": Case.CASE2, "single": Case.SINGLE_DELAY}
CRITICAL = ("tau_cr", "tau1_star", "tau2_star", "k_star")


class Options:
    """Flag values layered over config-file values over built-in defaults."""

    def __init__(self, ns: argparse.Namespace, file_values: dict[str, str]):
        self._ns = ns
        self._file = file_values

    def get(self, key: str, convert: Callable[[str], Any] = str, default: Any = None, required: bool = False):
        value = getattr(self._ns, key, None)
        if value is not None:
            return value
        if key in self._file:
            try:
                return convert(self._file[key])
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
        if required:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        return default


def _grid_range(text: str) -> tuple[float, float, int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValueError(f"expected 'lo, hi, n', got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _sources(text: str) -> tuple[Source, ...]:
    try:
        return tuple(Source(s.strip()) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _case(opts: Options) -> Case:
    raw = str(opts.get("case", str, "1"))
    if raw not in CASES:
        raise ConfigError(f"--case must be one of {sorted(CASES)}, got {raw!r}")
    return CASES[raw]


def _model(opts: Options, case: Case) -> ModelParams:
    tau = opts.get("tau", float, 0.0)
    tau1 = 0.0 if case is Case.CASE1 else 1.0
    tau1 = opts.get("tau1", float, tau1)
    try:
        nonlin = Nonlinearity(opts.get("nonlinearity", str, "linear"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if nonlin is Nonlinearity.CUSTOM:
        raise ConfigError("custom nonlinearities are only available from the Python API")
    return ModelParams(
        alpha=opts.get("alpha", float, required=True),
        gamma=opts.get("gamma", float, required=True),
        k=opts.get("k", float, required=True),
        tau1=tau1,
        tau2=opts.get("tau2", float, tau),
        nonlinearity=nonlin,
    )


def _single(opts: Options) -> LinearSingleDelay:
    return LinearSingleDelay(
        alpha=opts.get("alpha", float, required=True),
        a=opts.get("a", float, required=True),
        b=opts.get("b", float, required=True),
        tau=opts.get("tau", float, 0.0),
    )


def _output_path(opts: Options, default_name: str) -> Path | None:
    out = opts.get("out", str)
    if out is not None:
        return Path(out)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        Path(env_dir).mkdir(parents=True, exist_ok=True)
        return Path(env_dir) / default_name
    return None


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    print(f"wrote {path}")


def _verdict_line(v, as_json: bool) -> str:
    crit = dict(v.critical_values)
    if as_json:
        return json.dumps({
            "status": v.status.value,
            "clause": v.clause,
            "delay_independent": v.delay_independent,
            "critical_values": crit,
            "note": v.note,
        })
    extra = " ".join(f"{name}={fmt_short(val)}" for name, val in crit.items())
    return f"{v.status.value} clause={v.clause}" + (f" {extra}" if extra else "")


def cmd_simulate(opts: Options) -> int:
    case = _case(opts)
    history = opts.get("history", float, 0.1)
    t_end = opts.get("t_end", float)
    h_max = opts.get("h", float, DEFAULT_H_MAX)
    corrector = opts.get("corrector", str, "pece")
    if case is Case.SINGLE_DELAY:
        sys_ = _single(opts)
        h = aligned_step(h_max, sys_.tau)
        t_end = t_end if t_end is not None else 50.0 * (sys_.tau + 1.0)
        traj = solve_linear_single(sys_, SolverConfig(h, t_end, history, corrector=corrector))
    else:
        params = _model(opts, case)
        h = aligned_step(h_max, params.tau1, params.tau2)
        t_end = t_end if t_end is not None else 50.0 * (params.tau1 + params.tau2 + 1.0)
        traj = solve(params, SolverConfig(h, t_end, history, corrector=corrector))
    _emit(trajectory_csv(traj), _output_path(opts, "trajectory.csv"))
    return EXIT_OK


def cmd_classify(opts: Options) -> int:
    case = _case(opts)
    verdict = classify_single_delay(_single(opts)) if case is Case.SINGLE_DELAY else classify(_model(opts, case))
    print(_verdict_line(verdict, opts.get("format", str, "text") == "jsonl"))
    return EXIT_OK


def cmd_critical(opts: Options) -> int:
    what = opts.get("what", str, required=True)
    if what not in CRITICAL:
        raise ConfigError(f"--what must be one of {CRITICAL}, got {what!r}")
    if what == "tau_cr":
        s = _single(opts)
        print(fmt_short(tau_cr(s.a, s.b, s.alpha)))
    elif what == "tau2_star":
        print(fmt_short(tau2_star(opts.get("k", float, required=True), opts.get("gamma", float, required=True))))
    elif what == "tau1_star":
        params = _model(opts, Case.CASE1)
        print(fmt_short(tau1_star(params, params.tau2)))
    else:
        ks = k_star(
            opts.get("alpha", float, required=True),
            opts.get("gamma", float, required=True),
            opts.get("tau", float, required=True),
        )
        print(f"{fmt_short(ks.value)} lambda_star={fmt_short(ks.lambda_star)}")
    return EXIT_OK


def cmd_roots(opts: Options) -> int:
    case = _case(opts)
    cf = CharFn.single_delay(_single(opts)) if case is Case.SINGLE_DELAY else CharFn.from_params(_model(opts, case))
    v_max = opts.get("v_max", float, 100.0)
    text = roots_csv(find_positive_real_root(cf), find_imaginary_crossing(cf, v_max))
    _emit(text, _output_path(opts, "roots.csv"))
    print(_verdict_line(verdict_from_roots(cf, v_max), False), file=sys.stderr)
    return EXIT_OK


def cmd_sweep(opts: Options) -> int:
    case = _case(opts)
    spec = SweepSpec(
        k_range=opts.get("k_range", _grid_range, required=True),
        gamma_range=opts.get("gamma_range", _grid_range, required=True),
        alpha=opts.get("alpha", float, required=True),
        tau=opts.get("tau", float, 0.0),
        case=case,
        verdict_sources=opts.get("sources", _sources, (Source.THEOREM, Source.ROOTS, Source.SIMULATION)),
    )
    region = sweep(spec, workers=opts.get("workers", int, 1))
    text = region_csv(region)
    fmt = opts.get("format", str, "csv")
    path = _output_path(opts, "region.csv")
    if fmt == "svg":
        svg = svg_from_csv(text, column=opts.get("svg_column", str, "verdict_theorem"))
        if path is None:
            sys.stdout.write(svg)
            return EXIT_OK
        _emit(text, path.with_suffix(".csv"))
        _emit(svg, path.with_suffix(".svg"))
        return EXIT_OK
    _emit(text, path)
    return EXIT_OK


def fixtures_table(records: Sequence[dict]) -> str:
    cols = ("id", "expected", "theorem", "clause", "roots", "simulation", "pass")
    rows = [[str(r[c]) if c != "pass" else ("PASS" if r[c] else "FAIL") for c in cols] for r in records]
    widths = [max(len(c), *(len(row[i]) for row in rows)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_fixtures(opts: Options) -> int:
    results = run_all(
        include_variants=bool(opts.get("variants", _bool, False)),
        simulate=not opts.get("no_simulate", _bool, False),
    )
    records = [r.as_record() for r in results]
    table = fixtures_table(records)
    jsonl = "".join(
        json.dumps({key: rec[key] for key in ("id", "expected", "theorem", "roots", "simulation", "pass")}) + "\n"
        for rec in records
    )
    sys.stdout.write(table)
    sys.stdout.write(f"{sum(r.passed for r in results)}/{len(results)} fixtures pass\n")
    path = _output_path(opts, "fixtures.jsonl")
    if path is None:
        sys.stdout.write(jsonl)
    else:
        _emit(jsonl, path)
    return EXIT_OK


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


COMMANDS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "critical": cmd_critical,
    "roots": cmd_roots,
    "sweep": cmd_sweep,
    "fixtures": cmd_fixtures,
}


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", choices=sorted(CASES), help="1: tau1 = 0, 2: tau1 = 1, single: single-delay (a, b) form")
    p.add_argument("--alpha", type=float, help="fractional order in (0, 1]")
    p.add_argument("--k", type=float, help="gain g'(0)")
    p.add_argument("--gamma", type=float, help="decay rate")
    p.add_argument("--tau", type=float, help="second delay tau2 (or tau for --case single)")
    p.add_argument("--tau1", type=float, help="override the first delay")
    p.add_argument("--tau2", type=float, help="alias of --tau")
    p.add_argument("--a", type=float, help="single-delay coefficient a")
    p.add_argument("--b", type=float, help="single-delay coefficient b")
    p.add_argument("--nonlinearity", choices=[n.value for n in Nonlinearity if n is not Nonlinearity.CUSTOM])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="flat 'key = value' file; flags override it")
        p.add_argument("--out", help=f"output file (default: ${OUTPUT_DIR_ENV}/<name> or stdout)")
        return p

    p = add("simulate", "integrate the model and write a t,x CSV")
    _add_model_args(p)
    p.add_argument("--h", type=float, help="largest step; reduced to align with the delays")
    p.add_argument("--t-end", dest="t_end", type=float, help="final time (default 50 (tau1 + tau2 + 1))")
    p.add_argument("--history", type=float, help="constant initial history (default 0.1)")
    p.add_argument("--corrector", choices=CORRECTORS)

    p = add("classify", "closed-form verdict with its clause")
    _add_model_args(p)
    p.add_argument("--format", choices=("text", "jsonl"))

    p = add("critical", "print a critical value")
    _add_model_args(p)
    p.add_argument("--what", choices=CRITICAL)

    p = add("roots", "positive real roots and imaginary-axis crossings as CSV")
    _add_model_args(p)
    p.add_argument("--v-max", dest="v_max", type=float, help="upper end of the crossing scan")

    p = add("sweep", "stability map over a (k, gamma) grid")
    _add_model_args(p)
    p.add_argument("--k-range", dest="k_range", type=_grid_range, help="'lo,hi,n' (a for --case single)")
    p.add_argument("--gamma-range", dest="gamma_range", type=_grid_range, help="'lo,hi,n' (b for --case single)")
    p.add_argument("--sources", type=_sources, help="comma list of theorem,roots,simulation")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "svg"))
    p.add_argument("--svg-column", dest="svg_column",
                   choices=("verdict_theorem", "verdict_roots", "verdict_sim"))

    p = add("fixtures", "run the built-in worked examples")
    p.add_argument("--variants", action="store_const", const=True, help="include the second parameter points")
    p.add_argument("--no-simulate", dest="no_simulate", action="store_const", const=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        file_values = read_config(ns.config) if ns.config else {}
        return COMMANDS[ns.command](Options(ns, file_values))
    except FDDEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # downstream reader closed early, e.g. piping into head
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
