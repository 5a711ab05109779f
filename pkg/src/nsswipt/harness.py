"""
Seeded Monte Carlo runner with named scenarios.

Every trial draws its channel from ``child_seed(seed, trial)``, so the same
realization is reused across all sweep points and methods (common random
numbers) and a trial's result does not depend on which worker ran it. CSI
errors and harvester symbols use further sub-keys of the same stream.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .beamformers import Method, evaluate, solve
from .energy_harvest import WaveformKind
from .errors import ConfigurationError
from .system_model import CsiErrorSpec, SystemConfig, child_seed, corrupt_csi, generate_channels

# sweepable names that are not SystemConfig fields
EXTRA_AXES = ("K", "csi_rho")
METRICS = ("worst_capacity", "total_rf_power", "total_dc_power", "power_ratio_dB", "qos_met")
WATT_METRICS = ("total_rf_power", "total_dc_power")
QOS_TOL = 1e-6
N_SYMBOLS = 4000
NEG_INF = "-inf"

_CONFIG_FIELDS = {f.name for f in fields(SystemConfig)}

# stream sub-keys under child_seed(seed, trial, ...)
_KEY_CSI, _KEY_SYMBOLS = 1, 2


@dataclass(frozen=True)
class MethodSpec:
    method: str
    waveform: str | None = None

    @property
    def label(self) -> str:
        return self.method if self.waveform is None else f"{self.method}-{self.waveform}"


@dataclass(frozen=True)
class Scenario:
    """A named Monte Carlo experiment.

    ``sweep`` is a tuple of ``(parameter, values)`` pairs expanded as a
    Cartesian product, first axis outermost. Parameters are SystemConfig
    fields, ``K`` (sets ``K_I`` and ``K_E`` together) or ``csi_rho``.
    """

    name: str
    base: SystemConfig
    sweep: tuple
    methods: tuple
    n_trials: int = 200
    metrics: tuple = ("worst_capacity", "total_rf_power")
    seed: int = 0
    description: str = ""
    x_axis: str | None = None

    def validate(self) -> None:
        if self.n_trials < 1:
            raise ConfigurationError("n_trials must be >= 1")
        if not self.methods:
            raise ConfigurationError("scenario needs at least one method")
        for ms in self.methods:
            Method(ms.method)
            if ms.waveform is not None:
                WaveformKind(ms.waveform)
        for m in self.metrics:
            if m not in METRICS:
                raise ConfigurationError(f"unknown metric {m!r}; known: {', '.join(METRICS)}")
        names = [name for name, _ in self.sweep]
        for name, values in self.sweep:
            if name not in _CONFIG_FIELDS and name not in EXTRA_AXES:
                raise ConfigurationError(f"cannot sweep {name!r}")
            if len(values) == 0:
                raise ConfigurationError(f"empty sweep for {name!r}")
        if self.x_axis is not None and self.x_axis not in names:
            raise ConfigurationError(f"x_axis {self.x_axis!r} is not a sweep axis")
        for point in self.points():
            config_for(self.base, point)
            CsiErrorSpec(dict(point).get("csi_rho", 0.0))

    def points(self) -> list[tuple]:
        names = [n for n, _ in self.sweep]
        return [tuple(zip(names, combo)) for combo in itertools.product(*(v for _, v in self.sweep))]


def config_for(base: SystemConfig, point) -> SystemConfig:
    changes = {}
    for name, value in point:
        if name == "K":
            changes["K_I"] = changes["K_E"] = int(value)
        elif name != "csi_rho":
            changes[name] = value
    try:
        return base.with_(**changes)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid sweep point {dict(point)}: {exc}") from exc


def point_label(point) -> str:
    return ";".join(f"{n}={_fmt_value(v)}" for n, v in point)


def _fmt_value(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v).removesuffix(".0") if v.is_integer() else repr(v)
    return str(v)


def _trial_metrics(cfg: SystemConfig, sol, rep) -> dict:
    out = {"worst_capacity": rep.worst_capacity, "total_rf_power": rep.total_rf_power,
           "qos_met": float(rep.worst_capacity >= cfg.C_thre - QOS_TOL)}
    if rep.dc_power is not None:
        out["total_dc_power"] = rep.total_dc_power
    p_e = float(np.sum(sol.P_E))
    p_i = float(np.sum(sol.P_I))
    if sol.V.shape[1] and p_i > 0:
        out["power_ratio_dB"] = 10 * math.log10(p_e / p_i) if p_e > 0 else -math.inf
    return out


def run_trial(sc: Scenario, trial: int) -> list:
    """All sweep points and methods for one channel seed.

    Returns ``(point_index, method_index, metrics_or_None)`` tuples; ``None``
    marks an infeasible solve.
    """
    out = []
    for p_idx, point in enumerate(sc.points()):
        cfg = config_for(sc.base, point)
        ch = generate_channels(cfg, child_seed(sc.seed, trial))
        rho = dict(point).get("csi_rho", 0.0)
        design = ch
        if rho > 0:
            # beams are designed on the estimate, performance is measured on the truth
            design = corrupt_csi(ch, CsiErrorSpec(rho), child_seed(sc.seed, trial, _KEY_CSI))
        for m_idx, ms in enumerate(sc.methods):
            sol = solve(ms.method, design, cfg)
            if not sol.feasible:
                out.append((p_idx, m_idx, None))
                continue
            rep = evaluate(ch, sol, cfg, waveform=ms.waveform, n_symbols=N_SYMBOLS,
                           seed=child_seed(sc.seed, trial, _KEY_SYMBOLS))
            out.append((p_idx, m_idx, _trial_metrics(cfg, sol, rep)))
    return out


@dataclass
class ResultRow:
    scenario: str
    sweep: str
    method: str
    metric: str
    mean: float
    stderr: float
    n_trials: int
    seed: int
    feasible: int
    infeasible: int


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    x_axis: str | None = None

    def get(self, sweep: str, method: str, metric: str) -> ResultRow:
        for r in self.rows:
            if r.sweep == sweep and r.method == method and r.metric == metric:
                return r
        raise KeyError((sweep, method, metric))

    def __len__(self):
        return len(self.rows)


def _mean_se(values: list) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    a = np.asarray(values, dtype=float)
    if np.isneginf(a).any():
        return -math.inf, math.nan
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
    return float(a.mean()), se


def run_scenario(sc: Scenario, workers: int | None = None) -> ResultTable:
    """Run every trial and aggregate per (sweep point, method, metric).

    Statistics are taken over feasible trials only; the feasible and
    infeasible counts of each cell always add up to ``n_trials``.
    """
    sc.validate()
    trials = range(sc.n_trials)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(run_trial, itertools.repeat(sc), trials))
    else:
        per_trial = [run_trial(sc, t) for t in trials]

    points = sc.points()
    cells = {}
    for results in per_trial:  # trial order, whatever the execution order was
        for p_idx, m_idx, metrics in results:
            cells.setdefault((p_idx, m_idx), []).append(metrics)
    table = ResultTable(x_axis=sc.x_axis or (sc.sweep[0][0] if sc.sweep else None))
    for p_idx, point in enumerate(points):
        for m_idx, ms in enumerate(sc.methods):
            trial_out = cells.get((p_idx, m_idx), [])
            ok = [t for t in trial_out if t is not None]
            n_bad = len(trial_out) - len(ok)
            for metric in sc.metrics:
                vals = [t[metric] for t in ok if metric in t]
                mean, se = _mean_se(vals)
                table.rows.append(ResultRow(sc.name, point_label(point), ms.label, metric, mean,
                                            se, sc.n_trials, sc.seed, len(ok), n_bad))
    return table


def to_dBm(watts: float) -> float:
    return 10.0 * math.log10(watts / 1e-3) if watts > 0 else -math.inf


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return NEG_INF if x < 0 else "inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def summarize(rt: ResultTable, to_dB: bool = False) -> list[dict]:
    """Formatted rows, optionally with watt metrics converted to dBm.

    Rows keep the table's (scenario, sweep, method) order. Zero power is
    reported as the string ``-inf``.
    """
    out = []
    for r in rt.rows:
        mean, se, metric = r.mean, r.stderr, r.metric
        if to_dB and metric in WATT_METRICS:
            metric = metric + "_dBm"
            if mean > 0:
                se = 10.0 / math.log(10.0) * se / mean
                mean = to_dBm(mean)
            elif mean == 0:
                mean, se = -math.inf, math.nan
        out.append({"scenario": r.scenario, "sweep": r.sweep, "method": r.method,
                    "metric": metric, "mean": _fmt(mean), "stderr": _fmt(se),
                    "n_trials": r.n_trials, "seed": r.seed, "feasible": r.feasible,
                    "infeasible": r.infeasible})
    return out


CSV_HEADER = ("scenario", "sweep", "method", "metric", "mean", "stderr", "n_trials", "seed",
              "feasible", "infeasible")


def to_csv(rt: ResultTable, to_dB: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in summarize(rt, to_dB):
        w.writerow([row[k] for k in CSV_HEADER])
    return buf.getvalue()


def to_plot_data(rt: ResultTable, to_dB: bool = True) -> str:
    """Long-format ``x, series, y, y_stderr`` rows.

    ``x`` is the value on the table's x axis; the series name joins the
    metric, method and the remaining sweep coordinates.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "series", "y", "y_stderr"))
    for row in summarize(rt, to_dB):
        coords = [kv.split("=", 1) for kv in row["sweep"].split(";") if kv]
        x = next((v for k, v in coords if k == rt.x_axis), "")
        rest = ";".join(f"{k}={v}" for k, v in coords if k != rt.x_axis)
        series = "|".join(s for s in (row["metric"], row["method"], rest) if s)
        w.writerow((x, series, row["mean"], row["stderr"]))
    return buf.getvalue()


def _ms(*pairs) -> tuple:
    return tuple(MethodSpec(*p) if isinstance(p, tuple) else MethodSpec(p) for p in pairs)


def builtin_scenarios() -> dict:
    """Named desk-scale reproductions of the published experiments."""
    base = SystemConfig()
    inf = math.inf
    scs = [
        Scenario("fig4_fig5_rank_sweep", base.with_(M=16, K_I=4, K_E=4),
                 (("r_I", (1, 2, 3, 4, 5, 6)), ("r_E", (1, 2, 3, 4, 5, 6, 7, 8)),
                  ("P_max", (2.0, 4.0, 8.0))),
                 _ms("p22"), metrics=("worst_capacity", "total_rf_power", "qos_met"),
                 description="joint program with eta=1 over a grid of retained ranks; "
                             "qos_met < 1 flags cells whose QoS is unmet", x_axis="r_E"),
        Scenario("fig_qos_rician", base,
                 (("kappa_I", (0.0, inf)), ("P_max", (2.0, 8.0)),
                  ("C_thre", (2.0, 4.0, 6.0, 8.0, 10.0, 12.0))),
                 _ms("alg1"), description="received RF power versus capacity target, "
                                          "Rayleigh versus pure LoS", x_axis="C_thre"),
        Scenario("fig_user_count", base,
                 (("kappa_I", (0.0, 5.0)), ("P_max", (2.0, 4.0, 8.0)), ("K", (1, 2, 3, 4, 5, 6))),
                 _ms("alg1", "benchmark"), metrics=("total_rf_power",),
                 description="received RF power versus number of IUs/EUs", x_axis="K"),
        Scenario("fig7_benchmark_parity", base,
                 (("M", (8, 16, 32)), ("P_max", (1.0, 2.0, 4.0, 8.0))),
                 _ms("alg1", "p24", "alg2", "benchmark"), metrics=("total_rf_power",),
                 description="null-space designs against the direct SDR", x_axis="P_max"),
        Scenario("fig_csi", base,
                 (("P_max", (2.0, 8.0)), ("csi_rho", (0.0, 0.05, 0.1, 0.2))),
                 _ms("alg1"), metrics=("worst_capacity", "total_rf_power"),
                 description="design on an estimate corrupted at level rho, "
                             "evaluate on the true channel", x_axis="csi_rho"),
        Scenario("tab4_power_ratio", base,
                 (("P_max", tuple(float(p) for p in range(1, 11))), ("M", (16, 32)),
                  ("K", (2, 4))),
                 _ms("alg2"), n_trials=500, metrics=("power_ratio_dB",),
                 description="WET-to-WIT power allocation of the closed-form design (dB)",
                 x_axis="P_max"),
        Scenario("fig9_waveform", base,
                 (("M", (16, 32)),
                  ("P_max", (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0))),
                 _ms(("alg1", "gaussian"), ("alg2", "dsw"), ("p24", "dsw")),
                 metrics=("total_dc_power",),
                 description="harvested DC through the nonlinear harvester, Gaussian "
                             "signaling versus a dedicated sinusoid", x_axis="P_max"),
    ]
    return {s.name: s for s in scs}


def get_scenario(name: str, *, seed: int | None = None, n_trials: int | None = None) -> Scenario:
    known = builtin_scenarios()
    if name not in known:
        raise ConfigurationError(f"unknown scenario {name!r}; known: {', '.join(sorted(known))}")
    sc = known[name]
    if seed is not None:
        sc = replace(sc, seed=seed)
    if n_trials is not None:
        sc = replace(sc, n_trials=n_trials)
    return sc
