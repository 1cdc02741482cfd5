from fractions import Fraction

import pytest

from entangled_t1.counterexample import (
    CounterexampleConfig, band_products, build_functions, corrected_closed_form, dense_form, divergence_table,
    increments_positive, log_growth_fit, norm_power, paraproduct_form, report_csv, run, stated_closed_form,
    structured_bmo_squared, structured_form, structured_size_constant, structured_wbp, table_csv,
)
from entangled_t1.radical import RadicalValue


def test_functions_r1_r2():
    (f,) = build_functions(CounterexampleConfig(1, 2))[:1]
    assert [b.as_rational() for b in f.bands] == [1]
    f = build_functions(CounterexampleConfig(2, 2))[0]
    assert f.bands[1] == RadicalValue(Fraction(2, 3), Fraction(1, 2))


@pytest.mark.parametrize("r", range(1, 9))
def test_norm_power(r):
    assert norm_power(build_functions(CounterexampleConfig(r, 2))[0], 2) == 1 - Fraction(1, r + 1)
    assert norm_power(build_functions(CounterexampleConfig(r, 3))[0], 3) == 1 - Fraction(1, r + 1)


def test_band_products_are_rational():
    for n in (2, 3, 4):
        fs = build_functions(CounterexampleConfig(6, n))
        assert all(isinstance(v, Fraction) for v in band_products(fs))


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("n", [2, 3])
def test_structured_matches_dense(r, n):
    cfg = CounterexampleConfig(r, n)
    lam = structured_form(cfg)
    assert lam == dense_form(cfg) == paraproduct_form(cfg)


def test_small_values():
    assert [structured_form(CounterexampleConfig(r, 2)) for r in (1, 2, 3)] == \
        [Fraction(-1, 2), Fraction(-1, 2), Fraction(-5, 12)]
    assert structured_form(CounterexampleConfig(8, 2)) == Fraction(43, 840) > 0


@pytest.mark.parametrize("r", range(1, 13))
def test_closed_forms(r):
    lam = structured_form(CounterexampleConfig(r, 2))
    assert lam == corrected_closed_form(r)
    # the printed closed form carries an extra 1/(r+2)
    assert stated_closed_form(r) - lam == Fraction(1, r + 2)


def test_form_independent_of_n():
    for r in (2, 5, 9):
        assert structured_form(CounterexampleConfig(r, 2)) == structured_form(CounterexampleConfig(r, 4))


def test_structured_norms():
    for r in range(1, 10):
        assert structured_bmo_squared(r) == 2 - Fraction(2) ** (1 - r)
        for n in (2, 3):
            w, _ = structured_wbp(r, n)
            assert 0 < w <= 1
            assert structured_size_constant(r, n) <= 1 / (1 - Fraction(2) ** (1 - n))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_run_generic_checks(r):
    rep = run(CounterexampleConfig(r, 2))
    assert rep.hypotheses_hold and rep.dense_ok and rep.matches_corrected
    assert all(rep.checks.values())
    assert "form," in report_csv(rep)


def test_divergence_table():
    rows = divergence_table(12)
    assert increments_positive(rows)
    assert all(row.hypotheses_hold and row.wbp_ratio <= 1 for row in rows)
    assert [row.form > 0 for row in rows] == [False] * 7 + [True] * 5
    slope, _ = log_growth_fit(rows)
    assert slope > 0
    text = table_csv(rows[:3], decimal=4)
    assert text.splitlines()[0].startswith("r,form")
    assert text.splitlines()[1].startswith("1,-1/2")
    with pytest.raises(ValueError):
        divergence_table(25)
