import math

import pytest

from nsswipt.config import dump_system_config, load_scenario, load_system_config
from nsswipt.errors import ConfigurationError
from nsswipt.system_model import SystemConfig, noise_power_from_dBm

TEXT = """
[system]
M = 8
P_max = 0.5
sigma0_dBm = -90

[channel]
kappa_I = 0, inf
d_E = 4

[eh]
a = 100
"""


def test_parse_and_round_trip(tmp_path):
    cfg = load_system_config(TEXT)
    assert cfg.M == 8 and cfg.P_max == 0.5 and cfg.kappa_I == (0.0, math.inf)
    assert cfg.sigma0_sq == pytest.approx(noise_power_from_dBm(-90))
    assert cfg.eh.a == 100 and cfg.eh.b == 0.024
    p = tmp_path / "c.cfg"
    p.write_text(dump_system_config(cfg))
    assert load_system_config(p) == cfg
    assert load_system_config(dump_system_config(SystemConfig())) == SystemConfig()


@pytest.mark.parametrize("text", [
    "[system]\nbogus = 1\n", "[system]\nM = eight\n", "[system]\nM = 3\n",
    "[eh]\nzz = 1\n", "no section here", "[system]\nP_max = -1\n"])
def test_errors(text):
    with pytest.raises(ConfigurationError):
        load_system_config(text)


def test_missing_file():
    with pytest.raises(ConfigurationError):
        load_system_config("/nonexistent/x.cfg")


def test_scenario_file():
    sc = load_scenario("""
[scenario]
name = demo
methods = alg1, alg2:dsw
n_trials = 3
metrics = total_rf_power, total_dc_power
x_axis = P_max

[system]
M = 8

[sweep]
P_max = 1, 2
K = 2
""")
    assert sc.name == "demo" and sc.n_trials == 3 and sc.base.M == 8
    assert [m.label for m in sc.methods] == ["alg1", "alg2-dsw"]
    assert sc.sweep == (("P_max", (1.0, 2.0)), ("K", (2,)))
    with pytest.raises(ConfigurationError):
        load_scenario("[scenario]\nmethods = nope\n")
    with pytest.raises(ConfigurationError):
        load_scenario("[system]\nM = 8\n")
