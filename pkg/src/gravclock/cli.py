"""Batch front end: scenario runs, parameter sweeps, scaling fits.

Subcommands (exit codes: 0 ok, 2 config error, 3 numerical error):

    gravclock run   --config cfg [--out dir] [--methods closed,oracle] [--ablate-time-dilation]
    gravclock sweep --config cfg --var dt --from 1 --to 100 --points 20 --log [...]
    gravclock fit   --table sweep.csv --column qfi_closed [--tail]

Sweep CSV columns are fixed (swept_value, qfi_closed, qfi_parametric,
qfi_oracle, qfi_reduced, fi_closed, fi_numeric, regime_ok) so scaling
plots are reproducible by any external tool; unrequested methods leave
their cells empty, and every row carries its regime flag.  Identical
configs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bouncer as bouncer_mod
from . import estimation as est
from . import oracle as oracle_mod
from .core import (
    ConfigError,
    PhysicalParams,
    check_regime,
    load_config,
    params_from_config,
)

CSV_COLUMNS = ("swept_value", "qfi_closed", "qfi_parametric", "qfi_oracle",
               "qfi_reduced", "fi_closed", "fi_numeric", "regime_ok")

_ALL_METHODS = ("closed", "parametric", "oracle", "reduced", "fi")
_SCENARIOS = ("free_fall", "mach_zehnder", "bouncer")
_SWEEP_VARS = {"dt": "dt", "sigma": "sigma", "g": "g"}


class NumericalFailure(RuntimeError):
    """Wraps a numerical error with the failing method's name."""

    def __init__(self, method: str, cause: Exception) -> None:
        super().__init__(f"method {method!r} failed: {cause}")
        self.method = method


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    log: bool

    def values(self) -> np.ndarray:
        if self.points < 2:
            raise ConfigError("sweep needs at least 2 points")
        if not self.start < self.stop:
            raise ConfigError("sweep needs start < stop")
        if self.log:
            if self.start <= 0:
                raise ConfigError("log sweep needs a positive start")
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    target: str
    params: PhysicalParams
    methods: tuple[str, ...]
    sweep: SweepSpec | None = None
    out_dir: Path | None = None
    ablate: bool = False
    n_max: int | None = None

    def __post_init__(self) -> None:
        if self.scenario not in _SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r} (use: {', '.join(_SCENARIOS)})")
        if self.scenario == "mach_zehnder":
            if self.target not in ("delta_g", "bar_g"):
                raise ConfigError("mach_zehnder estimates delta_g or bar_g")
        elif self.target != "g":
            raise ConfigError(f"{self.scenario} estimates g only")
        for m in self.methods:
            if m not in _ALL_METHODS:
                raise ConfigError(f"unknown method {m!r} (use: {', '.join(_ALL_METHODS)})")
        if self.scenario == "bouncer":
            bad = set(self.methods) - {"closed", "oracle"}
            if bad:
                raise ConfigError(f"bouncer supports methods closed, oracle (got {sorted(bad)})")


# ---------------------------------------------------------------------------
# Method evaluation
# ---------------------------------------------------------------------------

def _evaluate_methods(cfg: ScenarioConfig, params: PhysicalParams) -> dict[str, float | None]:
    out: dict[str, float | None] = {name: None for name in CSV_COLUMNS[1:-1]}
    if cfg.scenario == "bouncer":
        if "closed" in cfg.methods:
            _run_method(out, "qfi_closed", "closed",
                        lambda: bouncer_mod.bouncer_qfi_longtime(params, cfg.n_max))
        if "oracle" in cfg.methods:
            _run_method(out, "qfi_oracle", "oracle",
                        lambda: bouncer_mod.bouncer_qfi_numeric(params, n_max=cfg.n_max))
        return out
    scenario = est.Scenario(cfg.scenario, params, cfg.target)
    if "closed" in cfg.methods:
        _run_method(out, "qfi_closed", "closed", lambda: est.closed_qfi(scenario))
    if "parametric" in cfg.methods:
        _run_method(out, "qfi_parametric", "parametric",
                    lambda: est.qfi_pure_parametric(scenario))
    if "oracle" in cfg.methods:
        _run_method(out, "qfi_oracle", "oracle", lambda: oracle_mod.qfi_numeric(scenario))
    if "reduced" in cfg.methods:
        _run_method(out, "qfi_reduced", "reduced", lambda: est.closed_reduced_qfi(scenario))
    if "fi" in cfg.methods:
        _run_method(out, "fi_closed", "fi", lambda: est.closed_fi(scenario))
        _run_method(out, "fi_numeric", "fi", lambda: est.fi_numeric(scenario))
    return out


def _run_method(out: dict, column: str, method: str, thunk) -> None:
    try:
        out[column] = thunk()
    except Exception as exc:
        raise NumericalFailure(method, exc) from exc


def run_single(cfg: ScenarioConfig) -> est.EstimationReport:
    values = _evaluate_methods(cfg, cfg.params)
    report = est.EstimationReport(
        parameter_name=cfg.target,
        qfi_closed=values["qfi_closed"],
        qfi_parametric=values["qfi_parametric"],
        qfi_oracle=values["qfi_oracle"],
        qfi_reduced=values["qfi_reduced"],
        fi_closed=values["fi_closed"],
        fi_numeric=values["fi_numeric"],
        method_metadata={
            "scenario": cfg.scenario,
            "methods": list(cfg.methods),
            "ablate_time_dilation": cfg.ablate,
            "fd_rel_step": 1e-5,
            "bouncer_n_max": cfg.n_max if cfg.scenario == "bouncer" else None,
            "regime_ok": check_regime(cfg.params).satisfied,
            "regime_failing": list(check_regime(cfg.params).failing()),
        },
    ).finalize()
    return report


@dataclass(frozen=True)
class SweepRow:
    swept_value: float
    values: dict
    regime_ok: bool


def run_sweep(cfg: ScenarioConfig) -> list[SweepRow]:
    assert cfg.sweep is not None
    field = _SWEEP_VARS[cfg.sweep.variable]
    points = [float(v) for v in cfg.sweep.values()]

    def one(value: float) -> SweepRow:
        params = cfg.params.replace(**{field: value})
        return SweepRow(value, _evaluate_methods(cfg, params),
                        check_regime(params).satisfied)

    with ThreadPoolExecutor(max_workers=min(8, len(points))) as pool:
        rows = list(pool.map(one, points))
    rows.sort(key=lambda r: r.swept_value)
    return rows


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(value, ".17g")


def write_sweep_csv(rows: list[SweepRow], path: Path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            cells = [_fmt(row.swept_value)]
            cells += [_fmt(row.values[name]) for name in CSV_COLUMNS[1:-1]]
            cells.append("true" if row.regime_ok else "false")
            fh.write(",".join(cells) + "\n")


def read_table(path: Path) -> dict[str, list]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ConfigError(f"empty table {path}")
    header = lines[0].split(",")
    columns: dict[str, list] = {name: [] for name in header}
    for line in lines[1:]:
        for name, cell in zip(header, line.split(",")):
            if name == "regime_ok":
                columns[name].append(cell == "true")
            else:
                columns[name].append(float(cell) if cell else None)
    return columns


# ---------------------------------------------------------------------------
# Scaling fits
# ---------------------------------------------------------------------------

def fit_scaling(xs, ys) -> tuple[float, float]:
    """Least-squares slope of log(y) vs log(x) with its standard error."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2:
        raise ValueError("scaling fit needs at least 2 rows")
    bad = [i for i, y in enumerate(ys) if not (y > 0 and math.isfinite(y))]
    if bad:
        raise ValueError(f"scaling fit needs positive values; offending rows: {bad}")
    lx, ly = np.log(xs), np.log(ys)
    dx = lx - lx.mean()
    slope = float(np.dot(dx, ly - ly.mean()) / np.dot(dx, dx))
    resid = ly - ly.mean() - slope * dx
    dof = max(len(xs) - 2, 1)
    stderr = float(math.sqrt(max(np.dot(resid, resid), 0.0) / dof / np.dot(dx, dx)))
    return slope, stderr


def tail_window_fit(xs, ys, var_tol: float = 0.05) -> tuple[float, float, int]:
    """Fit over the largest trailing sub-window with stable local slope.

    Returns (slope, stderr, start_index).  Local slopes between adjacent
    rows must vary by less than ``var_tol`` across the chosen window.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = len(xs)
    if n < 5:
        raise ValueError("tail-window fit needs at least 5 rows")
    local = np.diff(np.log(ys)) / np.diff(np.log(xs))
    for start in range(0, n - 4):
        window = local[start:]
        if window.max() - window.min() < var_tol:
            slope, stderr = fit_scaling(xs[start:], ys[start:])
            return slope, stderr, start
    raise ValueError(f"no trailing window with slope variation < {var_tol}")


def asymptotic_dt_slope(params: PhysicalParams, quantity,
                        t_lo: float = 10.0, t_hi: float = 100.0,
                        points: int = 20, var_tol: float = 0.05,
                        converge_tol: float = 1e-3,
                        max_expansions: int = 40) -> tuple[float, float, tuple[float, float]]:
    """Slope of log(quantity) vs log(dt) in the self-detected asymptotic window.

    Starting from [t_lo, t_hi], the trailing decade is pushed to larger
    dt until the local slope is flat (variation < var_tol) and stops
    drifting between expansions (change < converge_tol).  Values far
    outside the validated regime are used knowingly; this probes the
    closed form's terminal power law, and callers see the regime flags
    through the sweep interface.
    """
    hi = t_hi
    prev_slope = None
    for _ in range(max_expansions):
        ts = np.geomspace(hi / (t_hi / t_lo), hi, points)
        ys = [quantity(params.replace(dt=float(t))) for t in ts]
        slope, stderr = fit_scaling(ts, ys)
        local = np.diff(np.log(ys)) / np.diff(np.log(ts))
        stable = local.max() - local.min() < var_tol
        if stable and prev_slope is not None and abs(slope - prev_slope) < converge_tol:
            return slope, stderr, (float(ts[0]), float(ts[-1]))
        prev_slope = slope
        hi *= 10.0
    raise ValueError("asymptotic window did not converge; quantity has no terminal power law")


# ---------------------------------------------------------------------------
# Command-line interface
# ---------------------------------------------------------------------------

def _build_scenario_config(args) -> ScenarioConfig:
    cfg_map = load_config(args.config)
    params = params_from_config(cfg_map, ablate_time_dilation=args.ablate_time_dilation)
    scenario = cfg_map.get("scenario.name", "free_fall")
    default_target = "delta_g" if scenario == "mach_zehnder" else "g"
    target = cfg_map.get("scenario.target", default_target)
    methods = tuple(m.strip() for m in args.methods.split(",")) if args.methods else ("closed",)
    sweep = None
    if getattr(args, "var", None) is not None:
        if args.var not in _SWEEP_VARS:
            raise ConfigError(f"unknown sweep variable {args.var!r} (use: {', '.join(_SWEEP_VARS)})")
        sweep = SweepSpec(args.var, args.start, args.stop, args.points, args.log)
    n_max = int(float(cfg_map["bouncer.n_max"])) if "bouncer.n_max" in cfg_map else None
    return ScenarioConfig(
        scenario=scenario, target=target, params=params, methods=methods,
        sweep=sweep, out_dir=Path(args.out) if args.out else None,
        ablate=args.ablate_time_dilation, n_max=n_max,
    )


def _cmd_run(args) -> int:
    cfg = _build_scenario_config(args)
    report = run_single(cfg)
    text = report.to_json()
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / "report.json").write_text(text + "\n")
    print(text)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_scenario_config(args)
    if cfg.sweep is None:
        raise ConfigError("sweep requires --var/--from/--to/--points")
    rows = run_sweep(cfg)
    out_dir = cfg.out_dir if cfg.out_dir is not None else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sweep.csv"
    write_sweep_csv(rows, path)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_fit(args) -> int:
    table = read_table(Path(args.table))
    if args.column not in table:
        raise ConfigError(f"column {args.column!r} not in table "
                          f"(have: {', '.join(table)})")
    xs, ys = [], []
    for x, y in zip(table["swept_value"], table[args.column]):
        if y is None:
            raise ConfigError(f"column {args.column!r} has empty cells")
        xs.append(x)
        ys.append(y)
    try:
        if args.tail:
            slope, stderr, start = tail_window_fit(xs, ys)
            print(f"slope = {slope:.6f} +/- {stderr:.2e} "
                  f"(tail window from row {start})")
        else:
            slope, stderr = fit_scaling(xs, ys)
            print(f"slope = {slope:.6f} +/- {stderr:.2e}")
    except ValueError as exc:
        raise NumericalFailure("fit_scaling", exc) from exc
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gravclock",
        description="Clock-interferometer Fisher-information calculations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--methods", default="closed",
                       help="comma list of closed,parametric,oracle,reduced,fi")
        p.add_argument("--ablate-time-dilation", action="store_true",
                       help="zero the clock-gravity coupling (counterfactual)")

    p_run = sub.add_parser("run", help="single-point estimation report (JSON)")
    common(p_run)

    p_sweep = sub.add_parser("sweep", help="parameter sweep to CSV")
    common(p_sweep)
    p_sweep.add_argument("--var", required=True, help="swept variable: dt, sigma, g")
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--points", type=int, required=True)
    p_sweep.add_argument("--log", action="store_true", help="logarithmic spacing")

    p_fit = sub.add_parser("fit", help="log-log scaling fit on a sweep table")
    p_fit.add_argument("--table", required=True)
    p_fit.add_argument("--column", required=True)
    p_fit.add_argument("--tail", action="store_true",
                       help="fit the largest stable trailing window")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_fit(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (est.StepUnderflowError, est.NotIdentifiableError,
            oracle_mod.OracleError, bouncer_mod.AiryConvergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
