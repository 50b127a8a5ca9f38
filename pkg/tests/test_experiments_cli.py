import csv
import json
import math
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourier_relax import cli
from fourier_relax.experiments import (
    BENCH_CASES,
    COLUMNS,
    SCENARIOS,
    IntegrationFailure,
    Scenario,
    clean_json,
    error_growth_study,
    fit_slope,
    get_scenario,
    hyperbolization_study,
    order_study,
    perf_bench,
    run_scenario,
)

# generous wall-clock ceilings for the ci spans, several times the typical runtime
BUDGET_S = {"gray2": 90.0, "fig4-kdv2": 40.0, "fig4-nls3": 40.0, "s5-bbm": 20.0}


def test_registry_is_consistent():
    for name, sc in SCENARIOS.items():
        assert sc.name == name
        assert sc.steps_for(sc.span("ci")) >= 1
        assert sc.steps_for(sc.span("full")) >= sc.steps_for(sc.span("ci")) or sc.span("full")[0] < 0
    with pytest.raises(KeyError, match="unknown scenario"):
        get_scenario("nope")


@pytest.mark.parametrize(
    "changes,match",
    [
        (dict(equation="heat"), "unknown equation"),
        (dict(conserve="some"), "conservation mode"),
        (dict(initial="bump"), "initial data"),
        (dict(reference="oracle"), "reference"),
        (dict(initial="kdv-two-soliton", reference="closed-form"), None),
        (dict(initial="nls-two-soliton", reference="closed-form", equation="nls"), "no closed form"),
        (dict(dt=0.3), "does not divide"),
        (dict(dt=-1.0), "dt > 0"),
        (dict(domain=(1.0, 1.0)), "empty domain"),
    ],
)
def test_scenario_validation(changes, match):
    base = get_scenario("fig1-kdv")
    if match is None:
        base.replace(**changes)
        return
    with pytest.raises((ValueError, KeyError), match=match):
        base.replace(**changes)


def test_span_and_digest():
    sc = get_scenario("fig2-bbm")
    assert sc.span("ci") == (0.0, 500.0) and sc.span("full") == (0.0, 5000.0)
    with pytest.raises(ValueError):
        sc.span("long")
    assert sc.digest() == get_scenario("fig2-bbm").digest() != sc.replace(dt=0.25).digest()
    assert json.loads(json.dumps(sc.to_dict()))["n_nodes"] == 256


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_every_scenario_runs_in_budget(name):
    sc = get_scenario(name)
    start = time.perf_counter()
    res = run_scenario(sc)
    assert time.perf_counter() - start < BUDGET_S.get(name, 20.0)
    assert res.rows.shape[1] == len(COLUMNS)
    assert np.all(np.isfinite(res.rows[:, :4]))
    # relaxed runs end at t0 + sum(gamma) dt, close to but not exactly t1
    assert res.summary["t_final"] == pytest.approx(sc.t_span[1], rel=1e-3, abs=1e-6)
    assert np.isfinite(res.summary["final_l2_error"]) == (sc.reference != "none")
    # every scenario keeps the invariants its policy targets
    s = res.summary
    assert s["max_mass_drift"] < 1e-12
    if sc.conserve != "none":
        assert s["max_energy_drift"] < 1e-12
    if sc.conserve == "full":
        assert s["max_momentum_drift"] < 1e-12


def test_csv_and_json_outputs_are_deterministic(tmp_path):
    sc = get_scenario("fig3-nls")
    a = run_scenario(sc, out_dir=tmp_path / "a")
    run_scenario(sc, out_dir=tmp_path / "b")
    run_scenario(sc, out_dir=tmp_path / "c", fmt="json")
    text_a = (tmp_path / "a" / "fig3-nls.csv").read_text()
    assert text_a == (tmp_path / "b" / "fig3-nls.csv").read_text()
    rows = list(csv.reader(text_a.splitlines()))
    assert tuple(rows[0]) == COLUMNS
    back = np.array(rows[1:], dtype=float)
    assert np.array_equal(back, a.rows)
    meta = json.loads((tmp_path / "a" / "fig3-nls.json").read_text())
    assert meta["scenario_hash"] == sc.digest()
    assert meta["tableau"] == "ARK4(3)6L[2]SA"
    assert meta["policy"]["mode"] == "mass-energy"
    assert meta["columns"] == list(COLUMNS)
    doc = json.loads((tmp_path / "c" / "fig3-nls.json").read_text())
    assert np.array_equal(np.array(doc["rows"]), a.rows)


def test_json_has_no_nan(tmp_path):
    run_scenario("fig1-kdv", out_dir=tmp_path, fmt="json")
    text = (tmp_path / "fig1-kdv.json").read_text()
    assert "NaN" not in text
    assert json.loads(text)["summary"]["final_l2_error"] is None


def test_failure_reports_step_and_snapshot(tmp_path):
    sc = get_scenario("fig2-bbm").replace(dt=10.0, conserve="none")
    with pytest.raises(IntegrationFailure) as info:
        run_scenario(sc, out_dir=tmp_path)
    err = info.value
    assert err.step >= 1 and err.t == pytest.approx((err.step - 1) * 10.0)
    saved = np.load(err.snapshot)
    assert saved.shape == (1, 129) and np.all(np.isfinite(saved))
    assert "step" in str(err)


@given(st.floats(0.5, 3.0), st.floats(1e-8, 1e2))
def test_fit_slope_recovers_power(p, c):
    t = np.linspace(1.0, 50.0, 40)
    slope, ok = fit_slope(t, c * t**p)
    assert ok and slope == pytest.approx(p, abs=1e-9)


def test_fit_slope_flags_degenerate_windows():
    t = np.linspace(0.0, 10.0, 11)
    assert fit_slope(t, t + 1, (20.0, 30.0))[1] is False
    assert fit_slope(t, np.zeros_like(t))[1] is False
    slope, ok = fit_slope(t, t + 1, (5.0, 10.0))
    assert ok and 0 < slope < 1


def test_clean_json():
    assert clean_json({"a": [1.0, math.nan], "b": math.inf}) == {"a": [1.0, None], "b": None}


def test_error_growth_study_flags():
    study = error_growth_study("fig3-bbm", ("none", "mass-energy"), window=(1e6, 2e6))
    assert study.flags == {"none": False, "mass-energy": False}
    study = error_growth_study("fig3-bbm", ("none", "mass-energy"))
    assert all(study.flags.values())
    # relaxation slows error growth of a single solitary wave
    assert study.slopes["mass-energy"] < study.slopes["none"]


def test_order_study_on_registered_case():
    st_ = order_study("order-kdv", [0.1, 0.05, 0.025])
    assert np.all(st_.orders > 4.5)
    assert st_.t_final[0] == pytest.approx(0.4, abs=1e-3)


def test_perf_bench_reports_median():
    rep = perf_bench("nls-s5", repeats=1)
    assert rep.steps == 512 and rep.median == rep.times[0] > 0
    assert rep.final_error < 1e-10
    assert rep.metadata["reference_runtime_s"] == BENCH_CASES["nls-s5"][1]["reference_runtime_s"]
    with pytest.raises(KeyError):
        perf_bench("kdv-s5")


def test_hyperbolization_study_shrinks_with_tau():
    reps = hyperbolization_study((1e-5, 1e-7), span="ci")
    assert reps[1].deviation < 0.05 * reps[0].deviation
    for r in reps:
        assert r.mass_drift < 1e-12 and r.energy_drift < 1e-12


# CLI ---------------------------------------------------------------------------------


def test_cli_solve_writes_outputs(tmp_path, capsys):
    code = cli.main(["solve", "--equation", "kdv", "--scenario", "fig1-kdv", "--t-final", "1", "--out", str(tmp_path)])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["scenario"] == "fig1-kdv" and out["steps"] == 100
    assert (tmp_path / "fig1-kdv.csv").exists() and (tmp_path / "fig1-kdv.json").exists()


def test_cli_overrides(tmp_path, capsys):
    args = ["solve", "--equation", "nls", "--scenario", "fig3-nls", "--n", "128", "--dt", "0.02", "--tableau", "ark5",
            "--conserve", "full", "--beta", "2", "--format", "json", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    meta = json.loads((tmp_path / "fig3-nls.json").read_text())
    assert meta["scenario"]["n_nodes"] == 128 and meta["tableau"] == "ARK5(4)8L[2]SA"
    assert meta["policy"]["mode"] == "full"


def test_cli_hypnls_on_nls_data(capsys):
    assert cli.main(["solve", "--equation", "hypnls", "--scenario", "fig3-nls", "--t-final", "0.1"]) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--equation", "kdv", "--scenario", "fig1-nls"],
        ["solve", "--equation", "bbm", "--scenario", "missing"],
        ["solve", "--equation", "kdv", "--scenario", "fig1-kdv", "--dt", "0.3"],
        ["solve", "--equation", "kdv"],
        ["solve", "--equation", "wave", "--scenario", "fig1-kdv"],
        ["bench", "--case", "other"],
        [],
    ],
)
def test_cli_usage_errors(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == cli.USAGE_ERROR


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--equation", "kdv", "--scenario", "fig2-kdv", "--dt", "2"],
        ["solve", "--equation", "bbm", "--scenario", "fig2-bbm", "--dt", "10", "--conserve", "none"],
    ],
)
def test_cli_numerical_failure(argv, tmp_path, capsys):
    assert cli.main(argv + ["--out", str(tmp_path)]) == cli.NUMERICAL_FAILURE
    assert "numerical failure" in capsys.readouterr().err
    assert list(tmp_path.glob("*-failure-state.npy"))


def test_cli_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines] == list(SCENARIOS)


def test_cli_bench(capsys):
    assert cli.main(["bench", "--case", "nls-s5", "--repeats", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["case"] == "nls-s5" and out["median_s"] > 0


def test_scenario_is_frozen():
    sc = get_scenario("fig1-bbm")
    with pytest.raises(Exception):
        sc.dt = 1.0  # type: ignore[misc]
    assert isinstance(sc.replace(), Scenario)
