import math
from dataclasses import replace

import numpy as np
import pytest

from nsswipt import harness
from nsswipt.errors import ConfigurationError
from nsswipt.harness import MethodSpec, Scenario, run_scenario, summarize
from nsswipt.system_model import SystemConfig


def small(**kw):
    base = dict(name="t", base=SystemConfig(M=8), sweep=(("P_max", (1.0, 2.0)),),
                methods=(MethodSpec("alg2"), MethodSpec("alg1")), n_trials=6,
                metrics=("worst_capacity", "total_rf_power", "power_ratio_dB"), seed=3)
    base.update(kw)
    return Scenario(**base)


def test_rows_and_accounting():
    rt = run_scenario(small())
    assert len(rt) == 2 * 2 * 3
    for r in rt.rows:
        assert r.feasible + r.infeasible == r.n_trials == 6
    # alg1 has no energy beam, so no power ratio
    assert math.isnan(rt.get("P_max=1", "alg1", "power_ratio_dB").mean)


def test_matches_manual_loop():
    from nsswipt.beamformers import evaluate, solve
    from nsswipt.system_model import child_seed, generate_channels

    sc = small()
    rt = run_scenario(sc)
    cfg = sc.base.with_(P_max=2.0)
    vals = []
    for t in range(sc.n_trials):
        ch = generate_channels(cfg, child_seed(sc.seed, t))
        vals.append(evaluate(ch, solve("alg2", ch, cfg), cfg).total_rf_power)
    row = rt.get("P_max=2", "alg2", "total_rf_power")
    assert row.mean == pytest.approx(np.mean(vals), rel=1e-12)
    assert row.stderr == pytest.approx(np.std(vals, ddof=1) / math.sqrt(len(vals)), rel=1e-9)


def test_deterministic_regardless_of_workers():
    sc = small(n_trials=4)
    a = harness.to_csv(run_scenario(sc))
    b = harness.to_csv(run_scenario(sc, workers=2))
    assert a == b


def test_infeasible_trials_are_counted():
    sc = small(sweep=(("P_max", (1e-4,)),), methods=(MethodSpec("alg2"),))
    rt = run_scenario(sc)
    r = rt.rows[0]
    assert (r.feasible, r.infeasible) == (0, 6) and math.isnan(r.mean)


def test_stderr_shrinks_with_trials():
    def se(n):
        sc = small(n_trials=n, methods=(MethodSpec("alg2"),), sweep=(("P_max", (2.0,)),))
        return run_scenario(sc).get("P_max=2", "alg2", "total_rf_power").stderr
    ratio = se(30) / se(120)
    assert 1.4 < ratio < 2.8  # about sqrt(4)


def test_summarize_dBm_and_sentinel():
    rt = harness.ResultTable([
        harness.ResultRow("s", "x=1", "m", "total_rf_power", 1e-3, 1e-4, 5, 0, 5, 0),
        harness.ResultRow("s", "x=2", "m", "total_rf_power", 2.0, 0.0, 5, 0, 5, 0),
        harness.ResultRow("s", "x=3", "m", "total_rf_power", 0.0, 0.0, 5, 0, 5, 0),
        harness.ResultRow("s", "x=3", "m", "worst_capacity", 8.0, 0.0, 5, 0, 5, 0)])
    rows = summarize(rt, to_dB=True)
    assert float(rows[0]["mean"]) == pytest.approx(0.0)
    assert float(rows[1]["mean"]) == pytest.approx(33.0103, abs=1e-4)
    assert rows[2]["mean"] == "-inf"
    assert rows[3]["metric"] == "worst_capacity" and float(rows[3]["mean"]) == 8.0
    assert summarize(harness.ResultTable(), True) == []


def test_csv_and_plot_data_format():
    rt = run_scenario(small(n_trials=3))
    lines = harness.to_csv(rt).splitlines()
    assert lines[0] == ",".join(harness.CSV_HEADER)
    assert len(lines) == 1 + len(rt)
    plot = harness.to_plot_data(rt).splitlines()
    assert plot[0] == "x,series,y,y_stderr"
    assert plot[1].startswith("1,worst_capacity|alg2")


def test_validation():
    with pytest.raises(ConfigurationError):
        small(sweep=(("bogus", (1,)),)).validate()
    with pytest.raises(ConfigurationError):
        small(sweep=(("M", (2,)),)).validate()
    with pytest.raises(ConfigurationError):
        small(metrics=("nope",)).validate()
    with pytest.raises(ConfigurationError):
        harness.get_scenario("nope")


def test_builtin_scenarios_valid():
    scs = harness.builtin_scenarios()
    assert {"fig4_fig5_rank_sweep", "tab4_power_ratio", "fig9_waveform"} <= set(scs)
    for sc in scs.values():
        sc.validate()
    assert len(scs["tab4_power_ratio"].points()) == 40
    assert scs["tab4_power_ratio"].n_trials == 500


def test_rank_sweep_flags_unmet_qos():
    sc = replace(harness.get_scenario("fig4_fig5_rank_sweep", n_trials=2),
                 sweep=(("r_I", (1, 3)), ("r_E", (4,)), ("P_max", (2.0,))))
    rt = run_scenario(sc)
    assert rt.get("r_I=1;r_E=4;P_max=2", "p22", "qos_met").mean < 1
    assert rt.get("r_I=3;r_E=4;P_max=2", "p22", "qos_met").mean == 1
