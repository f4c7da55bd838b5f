"""Preset catalog, drift-rate sweep, and the aggregated report builders.

Sweeps here run at coarse resolution so the file stays fast; the frozen
habitat (slow movement, moderate harvest) has no coexistence window, so
every interior point must classify as a second-species win.
"""

import pytest

from rivercomp.config import parse_config
from rivercomp.errors import ConfigError
from rivercomp.experiments import (
    PRESETS,
    SweepPoint,
    SweepResult,
    eigen_report,
    point_outcome,
    preset_config,
    run_verification,
    steady_report,
    sweep_alpha2,
    sweep_transitions,
)
from rivercomp.stepping import Verdict

SLOW = dict(d1=0.002, d2=0.001, alpha1=0.001, mu=0.3, n=64, points=8)


def test_unknown_preset_error_lists_catalog():
    with pytest.raises(ConfigError, match="known presets") as err:
        preset_config("fig99")
    assert "fig8" in str(err.value)


def test_preset_merges_overrides():
    cfg = preset_config("fig1", {"n": 64, "t_end": None})
    assert cfg.n == 64
    assert cfg.out_dir == "fig1"
    assert cfg.params.d1 == 0.08
    # A None override keeps the preset value.
    assert cfg.t_end == PRESETS["fig1"].overrides["t_end"]


def test_preset_tolerance_overrides_merge_not_replace():
    base = preset_config("fig17")
    cfg = preset_config("fig17", {"tolerances": {"steady": 1e-9}})
    assert cfg.tolerances.steady == 1e-9
    assert cfg.tolerances.settle == base.tolerances.settle


@pytest.mark.parametrize(
    "kappa,tau,found,verdict,anomaly",
    [
        (-1e-3, 1e-3, False, Verdict.V_WINS, False),
        (1e-3, -1e-3, False, Verdict.U_WINS, False),
        (-1e-3, -1e-3, True, Verdict.COEXISTENCE, False),
        (1e-3, 1e-3, True, Verdict.UNDECIDED, True),
        (-1e-3, -1e-3, False, Verdict.UNDECIDED, False),
        (1e-3, 1e-3, False, Verdict.UNDECIDED, False),
        (0.0, 1e-3, False, Verdict.UNDECIDED, False),
        (-1e-3, 0.0, True, Verdict.UNDECIDED, False),
    ],
)
def test_point_outcome_decision_table(kappa, tau, found, verdict, anomaly):
    assert point_outcome(kappa, tau, found, 1e-7) == (verdict, anomaly)


def test_sweep_without_window_classifies_every_point_v_wins():
    cfg = parse_config(overrides=dict(SLOW, mode="sweep"))
    result = sweep_alpha2(cfg)
    assert result.omega1 == 0.5
    assert result.lo == pytest.approx(0.0005)
    assert result.hi == pytest.approx(0.001)
    assert len(result.points) == 8
    assert result.verdict_pattern() == ["VWins"] * 8
    assert result.window is None
    assert result.anomalies == []
    assert sweep_transitions(result) == []


def test_sweep_results_do_not_depend_on_worker_count():
    one = sweep_alpha2(parse_config(overrides=dict(SLOW, mode="sweep", workers=1)))
    two = sweep_alpha2(parse_config(overrides=dict(SLOW, mode="sweep", workers=2)))
    assert [p.alpha2 for p in one.points] == [p.alpha2 for p in two.points]
    assert [p.verdict for p in one.points] == [p.verdict for p in two.points]
    # kappa reuses the shared resident profile, so it is bitwise stable;
    # tau depends on per-block warm starts and may move at solver-tol level.
    assert [p.kappa for p in one.points] == [p.kappa for p in two.points]
    for a, b in zip(one.points, two.points):
        assert a.tau == pytest.approx(b.tau, abs=1e-8)


def test_sweep_parameter_validation():
    with pytest.raises(ConfigError, match="d1 > d2"):
        sweep_alpha2(parse_config(overrides=dict(SLOW, d1=0.001, d2=0.002)))
    with pytest.raises(ConfigError, match="alpha1 > 0"):
        sweep_alpha2(parse_config(overrides=dict(SLOW, alpha1=0.0)))
    with pytest.raises(ConfigError, match="at least 8"):
        sweep_alpha2(parse_config(overrides=dict(SLOW, points=4)))


def test_sweep_transitions_on_synthetic_pattern():
    def pt(alpha2, verdict):
        return SweepPoint(
            alpha2=alpha2, kappa=0.0, tau=0.0, coexistence_found=False,
            verdict=verdict, anomaly=False,
        )

    result = SweepResult(
        omega1=0.5, lo=0.0, hi=1.0,
        points=[
            pt(0.1, Verdict.V_WINS),
            pt(0.2, Verdict.V_WINS),
            pt(0.3, Verdict.COEXISTENCE),
            pt(0.4, Verdict.COEXISTENCE),
            pt(0.5, Verdict.U_WINS),
        ],
        edge_points=[], window=(0.25, 0.45), epsilon1=None, epsilon2=None,
    )
    assert sweep_transitions(result) == [
        ("VWins", "Coexistence"),
        ("Coexistence", "UWins"),
    ]


def test_verification_suite_passes_on_weak_harvest_habitat():
    cfg = preset_config("fig1", {"n": 128})
    report = run_verification(cfg)
    assert report["all_pass"] is True
    checks = report["checks"]
    assert set(checks) == {
        "capacity_gap",
        "log_slope_band",
        "eigen_difference",
        "invasion_indices",
        "drift_band",
        "coexistence_identities",
    }
    assert checks["capacity_gap"]["pass"] is True
    assert checks["coexistence_identities"]["skipped"] is True


def test_eigen_report_weak_harvest_verdicts():
    cfg = preset_config("fig1", {"n": 128})
    report = eigen_report(cfg)
    assert report["u_state"]["verdict"] == "unstable"
    assert report["v_state"]["verdict"] == "stable"
    assert report["u_state"]["stability_index"] < 0.0
    assert report["v_state"]["stability_index"] > 0.0
    assert report["faster_disperser_higher_ratio"] is True


def test_steady_report_finds_no_pair_in_weak_harvest_habitat():
    cfg = preset_config("fig1", {"n": 128})
    report = steady_report(cfg)
    assert report["coexistence"]["found"] is False
    assert report["u_state"]["capacity_gap"] > 0.0
    assert report["v_state"]["residual"] < cfg.tolerances.steady
