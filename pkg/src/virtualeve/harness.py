"""Experiment configuration, parameter sweeps and CSV / plot-data output."""
from __future__ import annotations

import configparser
import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channel import SystemParams, TransmitArray, planar_grid, uniform_beamformer
from .errors import ConfigurationError
from .expectation import d_max, expected_delta
from .montecarlo import Scenario, TrialConfig, build_scenario, empirical_expectations
from .optimizer import AoConfig, initial_positions, jo_edap_ao, optimize_positions, project_distance

__all__ = [
    "VARIABLES",
    "STRATEGIES",
    "DEFAULT_VALUES",
    "CSV_COLUMNS",
    "TABLE2_ROWS",
    "ExperimentConfig",
    "SweepSpec",
    "ResultRow",
    "Table2Row",
    "parse_config",
    "load_config",
    "percentage_error",
    "solve_strategy",
    "run_point",
    "run_sweep",
    "run_table2",
    "run_convergence",
    "emit_csv",
    "load_csv",
    "write_plot_data",
]

VARIABLES = ("num_eves", "path_loss_exponent", "noise_power", "move_range", "num_virtual_mas", "eve_distance_offset")
STRATEGIES = ("joint", "distance_only", "positions_only_avg_distance")

DEFAULT_VALUES = {
    "num_eves": (2, 3, 4, 5, 6, 7, 8),
    "path_loss_exponent": (2.0, 2.5, 3.0, 3.5, 4.0),
    "noise_power": (0.1, 0.25, 0.5, 1.0, 1.5, 2.0),
    "move_range": (4.0, 5.0, 6.0, 7.0, 8.0),
    "num_virtual_mas": (1, 2, 3, 4, 5, 6, 7, 8, 9),
    "eve_distance_offset": (0.0, 5.0, 10.0, 15.0, 20.0),
}

CSV_COLUMNS = ("sweep_var", "sweep_value", "strategy", "num_mas", "d_m", "expected_delta",
               "pct_error", "runtime_s", "seed", "delta_r_sec", "error")

TABLE2_ROWS = ((50.0, 50.5, 53.0), (58.0, 58.5, 61.0), (68.0, 68.5, 71.0))


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description; keys match the text config file."""

    wavelength_m: float = 0.0107
    n_bs_antennas: int = 8
    n_eves: int = 4
    n_virtual_mas: int = 4
    d_bob_bs_m: float = 20.0
    tx_power_mw: float = 10.0
    noise_power_mw: float = 0.5
    n_paths: int = 4
    g0_db: float = 30.0
    alpha: float = 4.0
    move_range_wavelengths: float = 4.0
    d_min_wavelengths: float = 0.5
    max_iters: int = 25
    eve_dist_mean_m: float = 40.0
    eve_dist_std_m: float = 5.0
    trials: int = 5000
    seed: int = 0

    def system_params(self) -> SystemParams:
        return SystemParams(
            wavelength_m=self.wavelength_m, g0_db=self.g0_db, alpha=self.alpha,
            noise_power_mw=self.noise_power_mw, tx_power_mw=self.tx_power_mw, num_paths=self.n_paths,
            d_min_wavelengths=self.d_min_wavelengths, move_range_wavelengths=self.move_range_wavelengths,
            max_iters=self.max_iters, rng_seed=self.seed,
        )

    def trial_config(self, **kw) -> TrialConfig:
        return TrialConfig(num_trials=self.trials, seed=self.seed, eve_distance_mean_m=self.eve_dist_mean_m,
                           eve_distance_std_m=self.eve_dist_std_m, **kw)

    def array(self) -> TransmitArray:
        """Planar BS array at half-wavelength pitch, as square as ``n_bs_antennas`` allows."""
        n = self.n_bs_antennas
        rows = max(r for r in range(1, int(math.isqrt(n)) + 1) if n % r == 0)
        return TransmitArray(planar_grid(rows, n // rows, self.wavelength_m / 2),
                             uniform_beamformer(n, self.tx_power_mw))


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` comments allowed) over ``base``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    base = base or ExperimentConfig()
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    updates = {}
    for key, raw in cp["experiment"].items():
        if key not in types:
            raise ConfigurationError(f"unknown config key {key!r}")
        try:
            updates[key] = int(raw) if types[key] in (int, "int") else float(raw)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc
    return replace(base, **updates)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    baselines: tuple = STRATEGIES
    ma_counts: tuple = (4,)

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ConfigurationError(f"unknown sweep variable {self.variable!r}")
        if len(self.values) == 0:
            raise ConfigurationError("sweep needs at least one value")
        bad = set(self.baselines) - set(STRATEGIES)
        if bad or not self.baselines:
            raise ConfigurationError(f"unknown strategies {sorted(bad)}")
        if not self.ma_counts:
            raise ConfigurationError("need at least one MA count")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "baselines", tuple(self.baselines))
        object.__setattr__(self, "ma_counts", tuple(int(m) for m in self.ma_counts))


@dataclass(frozen=True)
class ResultRow:
    sweep_var: str
    sweep_value: float
    strategy: str
    num_mas: int
    d_m: float
    expected_delta: float
    pct_error: float
    runtime_s: float
    seed: int
    delta_r_sec: float = math.nan
    error: str = ""


def percentage_error(e_col: float, e_veve: float) -> float:
    """``100 (E_col - E_veve) / E_col``."""
    return 100.0 * (e_col - e_veve) / e_col


def solve_strategy(strategy: str, scenario: Scenario, ao_config: AoConfig | None = None):
    """Equivalent distance and MA positions chosen by ``strategy``."""
    ao_config = ao_config or AoConfig(max_iters=scenario.params.max_iters)
    inputs = scenario.expectation_inputs()
    r0 = initial_positions(inputs.num_mas, scenario.params)
    inputs = inputs.with_positions(r0)
    if strategy == "joint":
        st = jo_edap_ao(ao_config, inputs)
        return st.d, st.positions
    if strategy == "distance_only":
        return project_distance(inputs, d_max(inputs)), r0
    if strategy == "positions_only_avg_distance":
        d = float(np.mean(scenario.eve_distances))
        step = optimize_positions(d, r0, inputs, tol=ao_config.inner_tol, max_inner=ao_config.max_inner,
                                  seed_resolution_wavelengths=ao_config.seed_resolution_wavelengths,
                                  trust_radius_wavelengths=ao_config.trust_radius_wavelengths)
        return d, step.positions
    raise ConfigurationError(f"unknown strategy {strategy!r}")


def _apply(variable, value, params: SystemParams, trial: TrialConfig, num_eves: int, num_mas: int):
    if variable == "num_eves":
        num_eves = int(value)
    elif variable == "path_loss_exponent":
        params = replace(params, alpha=float(value))
    elif variable == "noise_power":
        params = replace(params, noise_power_mw=float(value))
    elif variable == "move_range":
        params = replace(params, move_range_wavelengths=float(value))
    elif variable == "num_virtual_mas":
        num_mas = int(value)
    elif variable == "eve_distance_offset":
        trial = replace(trial, eve_distance_mean_m=trial.eve_distance_mean_m + float(value))
        if trial.fixed_eve_distances is not None:
            trial = replace(trial, fixed_eve_distances=tuple(x + float(value) for x in trial.fixed_eve_distances))
    return params, trial, num_eves, num_mas


def run_point(variable, value, strategy, num_mas, params: SystemParams, trial: TrialConfig, num_eves=4,
              bob_distance=20.0, array=None, ao_config=None, timing=False) -> ResultRow:
    """One sweep point for one strategy; failures become a row with ``error`` set."""
    t0 = time.perf_counter()
    try:
        p, tr, ne, nm = _apply(variable, value, params, trial, num_eves, num_mas)
        sc = build_scenario(p, tr, ne, nm, bob_distance=bob_distance, array=array)
        d, r = solve_strategy(strategy, sc, ao_config)
        sc = sc.with_virtual_eve(d, r)
        obj = expected_delta(sc.expectation_inputs())
        emp = empirical_expectations(tr, sc)
        pct = percentage_error(emp.e_snr_col, emp.e_snr_veve)
        gap = float(np.mean(emp.delta_r_sec))
        err = ""
    except (ValueError, ArithmeticError) as exc:
        nm = num_mas if variable != "num_virtual_mas" else int(value)
        d = obj = pct = gap = math.nan
        err = f"{type(exc).__name__}: {exc}"
    runtime = time.perf_counter() - t0 if timing else 0.0
    return ResultRow(variable, value, strategy, nm, float(d), float(obj), float(pct), runtime, trial.seed, gap, err)


def _run_task(task):
    return run_point(*task[0], **task[1])


def run_sweep(spec: SweepSpec, params: SystemParams, trial: TrialConfig, num_eves: int = 4,
              bob_distance: float = 20.0, array: TransmitArray | None = None,
              ao_config: AoConfig | None = None, timing: bool = False, workers: int = 1) -> list:
    """Rows ordered by (sweep value, strategy, MA count) whatever ``workers`` is."""
    tasks = []
    ma_counts = spec.ma_counts if spec.variable != "num_virtual_mas" else (None,)
    for value in spec.values:
        for strategy in spec.baselines:
            for m in ma_counts:
                kw = dict(num_eves=num_eves, bob_distance=bob_distance, array=array, ao_config=ao_config, timing=timing)
                tasks.append(((spec.variable, value, strategy, m if m is not None else int(value), params, trial), kw))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


@dataclass(frozen=True)
class Table2Row:
    eve_distances: tuple
    r_col: float
    r_veve: float
    error_pct: float
    d_m: float
    positions: np.ndarray = field(repr=False, compare=False, default=None)


def run_table2(params: SystemParams, trial: TrialConfig, bob_distance: float = 30.0, rows=TABLE2_ROWS,
               array: TransmitArray | None = None, ao_config: AoConfig | None = None) -> list:
    """Mean secrecy rates of the real Eves and of the fitted virtual Eve for fixed Eve layouts."""
    out = []
    for eves in rows:
        tr = replace(trial, fixed_eve_distances=tuple(eves))
        sc = build_scenario(params, tr, len(eves), len(eves), bob_distance=bob_distance, array=array)
        d, r = solve_strategy("joint", sc, ao_config)
        sc = sc.with_virtual_eve(d, r)
        emp = empirical_expectations(tr, sc)
        r_col = float(np.mean(emp.r_col))
        r_veve = float(np.mean(emp.r_veve))
        out.append(Table2Row(tuple(eves), r_col, r_veve, 100.0 * (r_col - r_veve) / r_col, d, r))
    return out


def run_convergence(params: SystemParams, trial: TrialConfig, num_eves: int = 4, num_mas: int = 4,
                    array: TransmitArray | None = None, ao_config: AoConfig | None = None):
    """AO history on one scenario: list of ``(iter, d, objective)``."""
    sc = build_scenario(params, trial, num_eves, num_mas, array=array)
    st = jo_edap_ao(ao_config or AoConfig(max_iters=params.max_iters), sc.expectation_inputs())
    return [(k, d, obj) for k, d, obj, _ in st.history], st


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(rows, path, plot_data: bool = True) -> None:
    """Write rows (fixed column order) and, optionally, plot-data files next to the CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    if plot_data and rows:
        write_plot_data(rows, path.with_suffix(""))


def _num(s):
    f = float(s)
    return int(f) if f.is_integer() and "." not in s and "e" not in s.lower() and "n" not in s.lower() else f


def load_csv(path) -> list:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError("unexpected CSV header")
        out = []
        for rec in rd:
            v = dict(zip(header, rec))
            out.append(ResultRow(
                sweep_var=v["sweep_var"], sweep_value=_num(v["sweep_value"]), strategy=v["strategy"],
                num_mas=int(v["num_mas"]), d_m=float(v["d_m"]), expected_delta=float(v["expected_delta"]),
                pct_error=float(v["pct_error"]), runtime_s=float(v["runtime_s"]), seed=int(v["seed"]),
                delta_r_sec=float(v["delta_r_sec"]), error=v["error"],
            ))
    return out


def write_plot_data(rows, stem) -> list:
    """One whitespace table per metric: x column then one column per strategy/MA-count series."""
    stem = Path(stem)
    xs = sorted({r.sweep_value for r in rows})
    var = rows[0].sweep_var
    series = []
    for r in rows:
        key = r.strategy if var == "num_virtual_mas" else f"{r.strategy}_M{r.num_mas}"
        if key not in series:
            series.append(key)
    written = []
    for metric in ("d_m", "expected_delta", "pct_error", "delta_r_sec"):
        table = {(x, s): math.nan for x in xs for s in series}
        for r in rows:
            key = r.strategy if var == "num_virtual_mas" else f"{r.strategy}_M{r.num_mas}"
            table[(r.sweep_value, key)] = getattr(r, metric)
        p = stem.parent / f"{stem.name}_{metric}.dat"
        with p.open("w", encoding="utf-8") as fh:
            fh.write("# " + " ".join([var] + series) + "\n")
            for x in xs:
                fh.write(" ".join([_fmt(x)] + [repr(float(table[(x, s)])) for s in series]) + "\n")
        written.append(p)
    return written
