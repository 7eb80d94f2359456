import json
import math

import pytest

import rexp


def test_builtin_registry():
    names = rexp.list_builtins()
    assert names == [
        "example1_random_shift",
        "example2_isometry",
        "example3_expanding",
        "example4_continuum_mix",
    ]
    for name in names:
        cfg = rexp.builtin(name)
        assert cfg["name"] == name
        assert rexp.validate_config(json.dumps(cfg)) == []


def test_validation_reports_errors():
    errors = rexp.validate_config(json.dumps({"name": "x", "surprise": 1}))
    assert any("surprise" in e for e in errors)
    assert any("environment" in e for e in errors)
    assert rexp.validate_config("not json") != []


def test_base_symbols_shift_consistently():
    s = rexp.Scenario("example1_random_shift")
    window = s.base_symbols(seed=42, offset=0, lo=-5, hi=10)
    shifted = s.base_symbols(seed=42, offset=2, lo=-7, hi=8)
    assert window == shifted
    assert set(window) <= {0, 1}


def test_delta_matches_symbol_table():
    s = rexp.Scenario("example1_random_shift")
    sym = s.base_symbols(seed=7, offset=0, lo=0, hi=0)[0]
    expected = 1 / 9 if sym == 1 else 1 / 4
    assert s.eval_delta(seed=7) == pytest.approx(expected)


def test_cylinder_mass_is_an_exact_fraction():
    s = rexp.Scenario("example1_random_shift")
    # depth-3 mass is the product of the reciprocals of the orbit alphabets
    syms = s.base_symbols(seed=11, offset=0, lo=0, hi=2)
    denom = 1
    for v in syms:
        denom *= 3 if v == 1 else 2
    assert s.cylinder_mass(seed=11, word=[1, 1, 1]) == f"1/{denom}"


def test_cocycle_doubling():
    s = rexp.Scenario("example3_expanding")
    # a seed whose first three degrees are all 2 makes 0.3 -> 0.4 after 3 steps
    for seed in range(200):
        degs = s.base_symbols(seed=seed, offset=0, lo=0, hi=2)
        if degs == [0, 0, 0]:
            assert s.cocycle_coord(seed=seed, x=0.3, n=3) == pytest.approx(0.4)
            break
    else:
        pytest.fail("no all-doubling prefix found among 200 seeds")


def test_cocycle_word_shift():
    s = rexp.Scenario("example1_random_shift")
    out = s.cocycle_word(seed=3, word=[2, 1, 2, 1], n=1, out_len=4)
    assert out == [1, 2, 1, 1]  # trailing 1s come from the tail rule


def test_gamma_bracket_shrinks():
    s = rexp.Scenario("example1_random_shift")
    lo4, up4 = s.gamma_mass_bracket(seed=5, x=[1, 1, 2, 1, 2, 2, 1, 1], depth=4)
    lo8, up8 = s.gamma_mass_bracket(seed=5, x=[1, 1, 2, 1, 2, 2, 1, 1], depth=8)
    assert 0 <= lo4 <= up4 <= 1
    assert up8 <= up4
    assert up8 <= 2 ** -8


def test_expansive_report_verdicts():
    shift = rexp.Scenario("example1_random_shift")
    rep = json.loads(shift.expansive(depth=10, base_samples=10, fiber_samples=1, seed=3))
    assert rep["verdict"] == "evidence-for"

    iso = rexp.Scenario("example2_isometry")
    rep = json.loads(iso.expansive(depth=30, base_samples=8, fiber_samples=1, seed=4))
    assert rep["verdict"] == "refuted"
    assert 0.09 <= rep["witness_mass"] <= 0.11


def test_continuum_escape():
    s = rexp.Scenario("example4_continuum_mix")
    n = s.continuum_escape(seed=6, segment_lo=0.3, segment_len=0.2, max_n=50)
    assert n == 0  # diameter already above delta = 0.1

    iso = rexp.Scenario("example2_isometry")
    assert iso.continuum_escape(seed=6, segment_lo=0.3, segment_len=1e-3, max_n=100) is None


def test_entropy_oracle_agreement():
    s = rexp.Scenario("example3_expanding")
    rep = json.loads(s.entropy(n_max=12, samples=60, seed=8))
    oracle = (math.log(2) + math.log(3)) / 2
    assert rep["analytic_oracle"] == pytest.approx(oracle)
    assert abs(rep["estimate"] - oracle) / oracle < 0.1


def test_run_scenario_deterministic():
    a = rexp.run("example1_random_shift")
    b = rexp.run("example1_random_shift")
    a.pop("timing")
    b.pop("timing")
    assert a == b
    assert a["schema"] == "rexp-report/1"


def test_pullback_identity_on_shift():
    s = rexp.Scenario("example1_random_shift")
    rep = json.loads(s.pullback_identity(seed=13, x=[1, 2, 1, 1, 2, 1, 2, 1, 1, 1], depth=5))
    assert rep["pass"] is True
    assert rep["mismatch"] == 0
