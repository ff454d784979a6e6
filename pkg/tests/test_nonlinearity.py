import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracnehari.nonlinearity import (
    FAMILIES,
    PrimitiveTable,
    audit,
    classify_growth,
    hfun,
    log_sample,
    make_builtin,
    min_Cq,
)

mpmath.mp.dps = 40

BUILTINS = [
    ("pure_power", {"p": 2}),
    ("pure_power", {"p": 3.5}),
    ("paper_critical", {"lam": 40, "q": 4, "alpha0": math.pi / 4}),
    ("paper_critical", {"lam": 5, "q": 3, "alpha0": 0.5}),
    ("exp_power", {"alpha0": 1.0, "nu": 2.0}),
    ("exp_power", {"alpha0": 1.0, "nu": 1.0}),
]


def _mp_f(family, params):
    if family == "pure_power":
        p = params["p"]
        return lambda s: abs(s) ** (p - 1) * s
    if family == "paper_critical":
        lam, q, a0 = params["lam"], params["q"], mpmath.mpf(params["alpha0"])
        return lambda s: lam * s * abs(s) ** (q - 2) + abs(s) ** (q - 2) * s * mpmath.exp(a0 * s * s)
    a0, nu = mpmath.mpf(params["alpha0"]), params["nu"]
    return lambda s: s**3 * mpmath.exp(a0 * abs(s) ** nu)


@pytest.fixture(scope="module", params=BUILTINS, ids=lambda b: f"{b[0]}-{'-'.join(map(str, b[1].values()))}")
def builtin(request):
    family, params = request.param
    return family, params, make_builtin(family, **params)


# --- examples -------------------------------------------------------------


def test_pure_power_values():
    nl = make_builtin("pure_power", p=2)
    assert nl.f(0.5) == 0.25
    assert nl.F(0.5) == pytest.approx(1 / 24, rel=1e-15)
    assert nl.fprime(0.5) == 1.0


def test_paper_critical_value_against_high_precision():
    nl = make_builtin("paper_critical", lam=1, q=4, alpha0=math.pi / 4)
    exact = 1 + mpmath.exp(mpmath.pi / 4)
    assert float(nl.f(1.0)) == pytest.approx(float(exact), rel=1e-14)
    assert float(nl.f(1.0)) == pytest.approx(3.19328, abs=1e-5)


def test_hfun_examples():
    assert float(hfun(make_builtin("pure_power", p=2), 2.0)) == pytest.approx(8 / 3, rel=1e-15)
    assert float(hfun(make_builtin("pure_power", p=3), 1.0)) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize(
    "family, params, hypothesis_tag",
    [
        ("pure_power", {"p": 1.0}, "f1"),
        ("paper_critical", {"lam": 1, "q": 2, "alpha0": 1}, "f3"),
        ("paper_critical", {"lam": -1, "q": 4, "alpha0": 1}, "f2"),
        ("paper_critical", {"lam": 1, "q": 4, "alpha0": 0}, "critical"),
        ("exp_power", {"alpha0": 1, "nu": 3}, "critical"),
        ("exp_power", {"alpha0": -1, "nu": 2}, "alpha0"),
    ],
)
def test_out_of_range_parameters_name_the_hypothesis(family, params, hypothesis_tag):
    with pytest.raises(ValueError, match=hypothesis_tag):
        make_builtin(family, **params)


def test_unknown_family_and_extra_parameters():
    with pytest.raises(ValueError, match="unknown family"):
        make_builtin("cubic")
    with pytest.raises(ValueError, match="unexpected"):
        make_builtin("pure_power", p=2, q=3)
    assert set(FAMILIES) == {"pure_power", "paper_critical", "exp_power"}


def test_lambda_alias():
    nl = make_builtin("paper_critical", **{"lambda": 7.0})
    assert nl.params["lambda"] == 7.0


def test_parameters_are_read_only():
    nl = make_builtin("pure_power", p=2)
    with pytest.raises(TypeError):
        nl.params["p"] = 3


# --- primitives against independent quadrature -------------------------------


@pytest.mark.parametrize("s", [1e-4, 0.01, 0.3, 1.0, 2.2, 3.7, 6.0, 9.0])
def test_primitive_matches_mpmath(builtin, s):
    family, params, nl = builtin
    f = _mp_f(family, params)
    exact = mpmath.quad(f, [0, s])
    got = float(nl.F(s))
    assert got == pytest.approx(float(exact), rel=1e-10)
    assert float(nl.F(-s)) == got


def test_primitive_vanishes_at_zero(builtin):
    _, _, nl = builtin
    assert float(nl.F(0.0)) == 0.0


def test_even_q_closed_form_matches_table():
    lam, q, a0 = 40.0, 4.0, math.pi / 4
    nl = make_builtin("paper_critical", lam=lam, q=q, alpha0=a0)
    table = PrimitiveTable(nl.f, nl.fprime)
    s = np.linspace(0.01, 7.5, 200)
    np.testing.assert_allclose(table(s), nl.F(s), rtol=1e-10)


def test_fd_consistency(builtin):
    _, _, nl = builtin
    s = np.concatenate([np.linspace(0.05, 3.0, 40), -np.linspace(0.05, 3.0, 40)])
    eps = 1e-5
    dF = (nl.F(s + eps) - nl.F(s - eps)) / (2 * eps)
    np.testing.assert_allclose(dF, nl.f(s), rtol=1e-7, atol=1e-12)
    df = (nl.f(s + eps) - nl.f(s - eps)) / (2 * eps)
    np.testing.assert_allclose(df, nl.fprime(s), rtol=1e-7, atol=1e-12)


def test_parity_is_exact(builtin):
    _, _, nl = builtin
    s = log_sample(1e-6, 5.0, 200)
    pos, neg = s[200:], s[:200][::-1]
    np.testing.assert_array_equal(nl.f(neg), -nl.f(pos))
    np.testing.assert_array_equal(nl.F(neg), nl.F(pos))
    np.testing.assert_array_equal(hfun(nl, neg), hfun(nl, pos))


# --- audit ------------------------------------------------------------------


def test_audit_pure_power_equality_case():
    rep = audit(make_builtin("pure_power", p=2), theta=3, C_q=1 / 3, q=3)
    assert rep.passed, list(rep.lines())
    assert rep.f1_pass and rep.f2_pass and rep.f3_pass and rep.ar_pass
    assert rep.witness_points == []


def test_audit_paper_critical_large_lambda():
    rep = audit(make_builtin("paper_critical", lam=40, q=4, alpha0=math.pi / 4), theta=4, C_q=10, q=4)
    assert rep.passed, list(rep.lines())
    assert rep.growth_class.startswith("critical")


def test_audit_f3_failure_has_witness():
    rep = audit(make_builtin("pure_power", p=2), theta=3, C_q=1, q=3)
    assert not rep.f3_pass
    assert rep.f1_pass and rep.f2_pass and rep.ar_pass
    wit = [w for w in rep.witness_points if w[1] == "f3_lower_bound"]
    assert wit
    s, _, gap = wit[0]
    assert gap == pytest.approx(abs(s) ** 3 / 3 - abs(s) ** 3, rel=1e-9)


def test_audit_every_failure_has_witness():
    rep = audit(make_builtin("paper_critical", lam=0, q=4, alpha0=1.0), theta=4.5, C_q=10, q=4)
    failed = [k for k, ok in rep.checks.items() if not ok]
    assert failed
    for name in failed:
        assert any(w[1] == name for w in rep.witness_points)
    assert rep.sample_description


def test_min_cq():
    nl = make_builtin("pure_power", p=2)
    assert min_Cq(nl, 3) == pytest.approx(1 / 3, rel=1e-12)
    crit = make_builtin("paper_critical", lam=40, q=4, alpha0=math.pi / 4)
    assert min_Cq(crit, 4) == pytest.approx(10.25, rel=1e-4)


@pytest.mark.parametrize("family, params", BUILTINS)
def test_h_positive_and_increasing(family, params):
    nl = make_builtin(family, **params)
    s = np.geomspace(1e-4, 4.0, 300)
    H = hfun(nl, s)
    assert np.all(H > 0)
    assert np.all(np.diff(H) > 0)


@given(
    idx=st.integers(0, len(BUILTINS) - 1),
    s=st.floats(1e-3, 4.0),
    lam=st.floats(0.01, 0.99),
    sign=st.sampled_from([-1.0, 1.0]),
)
def test_h_decreases_under_shrinking(idx, s, lam, sign):
    family, params = BUILTINS[idx]
    nl = make_builtin(family, **params)
    assert float(hfun(nl, sign * s)) > float(hfun(nl, sign * lam * s))


# --- growth classification ----------------------------------------------------


def test_classify_subcritical_exp_power():
    est = classify_growth(make_builtin("exp_power", alpha0=1.0, nu=1.0))
    assert est.growth_class == "subcritical"
    assert all(t == "decaying" for t in est.trends)


def test_classify_brackets_alpha0():
    est = classify_growth(make_builtin("exp_power", alpha0=1.0, nu=2.0))
    lo, hi = est.alpha0_bracket
    assert est.growth_class == "critical"
    assert 0.9 <= lo < 1.0 + 1e-9 <= hi <= 1.1 + 1e-9


def test_classify_dfs_quantity_agrees():
    est = classify_growth(make_builtin("exp_power", alpha0=1.0, nu=2.0), quantity="dfs")
    lo, hi = est.alpha0_bracket
    assert 0.9 <= lo and hi <= 1.1 + 1e-9


def test_classify_paper_critical():
    est = classify_growth(make_builtin("paper_critical", lam=40, q=4, alpha0=math.pi / 4))
    lo, hi = est.alpha0_bracket
    assert lo < math.pi / 4 < hi


def test_classify_polynomial():
    est = classify_growth(make_builtin("pure_power", p=2))
    assert est.growth_class == "subcritical"


def test_classify_rejects_short_tail():
    with pytest.raises(ValueError):
        classify_growth(make_builtin("pure_power", p=2), s_max=10)


def test_exp_power_ratio_vanishes_above_alpha0():
    # f(s) / (e^{alpha s^2} - 1) -> 0 for alpha > alpha0 = 1, in log space
    nl = make_builtin("exp_power", alpha0=1.0, nu=2.0)
    s = np.array([10.0, 20.0, 40.0])
    for alpha in (1.05, 1.5, 3.0):
        log_ratio = nl.log_f(s) - alpha * s * s
        assert np.all(np.diff(log_ratio) < 0) and log_ratio[-1] < -40
