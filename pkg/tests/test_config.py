import json

import numpy as np
import pytest

from rivercomp.config import parse_config
from rivercomp.errors import ConfigError, GridResolutionError

WEAK = dict(d1=0.08, d2=0.07, alpha1=0.05, alpha2=0.04)


def test_minimal_config_fills_documented_defaults():
    cfg = parse_config(overrides=dict(WEAK))
    assert cfg.mode == "simulate"
    assert cfg.reaction_form == "folded"
    assert cfg.n == 256
    assert cfg.t_end == 100.0
    assert cfg.dt == 0.1
    assert cfg.samples == 100
    assert cfg.workers == 1
    assert cfg.out_dir == "out"
    assert cfg.params.mu1 == 0.0 and cfg.params.mu2 == 0.0
    for key in ("mu1", "mu2", "K", "dt", "tolerances.steady", "tolerances.extinct"):
        assert key in cfg.defaulted


def test_default_initial_density_is_half_the_capacity_floor():
    cfg = parse_config(overrides=dict(WEAK, mu=0.2))
    grid = cfg.grid()
    eff = cfg.effective(grid)
    u0, v0 = cfg.initial_fields(grid)
    expected = 0.5 * float(np.min(eff.K1.values))
    np.testing.assert_array_equal(u0, expected)
    np.testing.assert_array_equal(v0, expected)


def test_expression_initial_density():
    cfg = parse_config(overrides=dict(WEAK, u0="0.4 + 0.1*cos(pi*x)", n=32))
    u0, v0 = cfg.initial_fields(cfg.grid())
    assert u0.shape == (32,)
    assert u0.max() <= 0.5
    assert float(np.ptp(v0)) == 0.0


def test_unknown_key_reports_first_alphabetically():
    with pytest.raises(ConfigError, match="unknown config key 'aardvark'"):
        parse_config(overrides=dict(WEAK, zebra=1, aardvark=2))


def test_mu_shorthand_conflicts_with_pair():
    with pytest.raises(ConfigError, match="not both"):
        parse_config(overrides=dict(WEAK, mu=0.1, mu1=0.1, mu2=0.1))


def test_mu_pair_must_be_complete():
    with pytest.raises(ConfigError, match="given together"):
        parse_config(overrides=dict(WEAK, mu1=0.1))


def test_harvest_fraction_at_or_above_one_rejected():
    with pytest.raises(ConfigError):
        parse_config(overrides=dict(WEAK, mu=1.2))


def test_folded_form_requires_equal_harvest():
    with pytest.raises(ConfigError, match="equal harvest"):
        parse_config(overrides=dict(WEAK, mu1=0.1, mu2=0.2))
    cfg = parse_config(overrides=dict(WEAK, mu1=0.1, mu2=0.2, reaction_form="raw"))
    assert cfg.reaction_form == "raw"


def test_peclet_guard_names_the_required_resolution():
    with pytest.raises(GridResolutionError, match="n = 126"):
        parse_config(overrides=dict(d1=0.002, d2=0.001, alpha1=0.5, alpha2=0.0, n=16))


def test_dt_outside_positivity_cap_rejected():
    with pytest.raises(ConfigError, match="positivity-safe"):
        parse_config(overrides=dict(WEAK, dt=5.0))
    with pytest.raises(ConfigError, match="positivity-safe"):
        parse_config(overrides=dict(WEAK, dt=0.0))


def test_t_end_must_be_positive():
    with pytest.raises(ConfigError, match="t_end must be positive"):
        parse_config(overrides=dict(WEAK, t_end=0.0))


def test_unknown_tolerance_key_rejected():
    with pytest.raises(ConfigError, match="unknown tolerances key 'slack'"):
        parse_config(overrides=dict(WEAK, tolerances={"slack": 1e-3}))


def test_explicit_tolerance_not_marked_defaulted():
    cfg = parse_config(overrides=dict(WEAK, tolerances={"steady": 1e-9}))
    assert cfg.tolerances.steady == 1e-9
    assert "tolerances.steady" not in cfg.defaulted
    assert "tolerances.eigen" in cfg.defaulted


def test_negative_initial_density_rejected():
    with pytest.raises(ConfigError, match="u0 must be nonnegative"):
        parse_config(overrides=dict(WEAK, u0=-0.5))
    with pytest.raises(ConfigError, match="v0 must be nonnegative"):
        parse_config(overrides=dict(WEAK, v0="-1 + cos(pi*x)", n=32))


def test_snapshot_times_validation():
    with pytest.raises(ConfigError, match="snapshot_times"):
        parse_config(overrides=dict(WEAK, snapshot_times=7.0))
    with pytest.raises(ConfigError, match="nonnegative"):
        parse_config(overrides=dict(WEAK, snapshot_times=[-1.0]))
    cfg = parse_config(overrides=dict(WEAK, snapshot_times=[5.0, 1.0]))
    assert cfg.snapshot_times == (1.0, 5.0)


def test_mode_must_be_known():
    with pytest.raises(ConfigError, match="mode must be one of"):
        parse_config(overrides=dict(WEAK, mode="dance"))


def test_echo_is_stable_under_reparse(tmp_path):
    cfg = parse_config(overrides=dict(WEAK, mu=0.3, n=64, t_end=12.5))
    echo = cfg.echo_json()
    assert echo.endswith("\n")
    path = tmp_path / "config.echo.json"
    path.write_text(echo)
    again = parse_config(path)
    assert again.echo_json() == echo
    # The shorthand is normalized away in the echo.
    data = json.loads(echo)
    assert "mu" not in data
    assert data["mu1"] == 0.3 and data["mu2"] == 0.3
    assert "dt" in data["_defaulted"]
