import math

import numpy as np
import pytest

from tridiag_edge.laws import FrechetLaw, PotentialLaw, survival
from tridiag_edge.models import SpikeProfile
from tridiag_edge.theory import (
    Regime,
    RegimeLabel,
    arcsine_left_gap,
    check_spike_assumptions,
    classify_regime,
    critical_G_cdf,
    critical_H_cdf,
    f_of_lambda,
    poisson_intensity_integral,
    predict_G_top,
    predict_H_top,
    rate_G,
    rate_H,
    secular_determinant_H,
    secular_roots_H,
    subcritical_prefactor_G,
    subcritical_prefactor_H,
)
from tridiag_edge.tridiag import TridiagonalMatrix, top_k_eigenvalues

GRID = np.linspace(2.01, 10, 200)


def test_predict_H_top():
    assert predict_H_top(1.5) == 2.5
    assert predict_H_top(1e-9) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        predict_H_top(0.0)


def test_predict_H_top_matches_planted_spike():
    d = np.zeros(2000)
    d[1000] = 1.5
    top = top_k_eigenvalues(TridiagonalMatrix(d, np.ones(1999)), 1)[0]
    assert abs(top - predict_H_top(1.5)) <= 1e-2


def test_predict_G_top_branches():
    assert predict_G_top(2.0) == 2.5
    assert predict_G_top(0.5) == 2.0
    assert predict_G_top(1.0) == 2.0
    with pytest.raises(ValueError):
        predict_G_top(-0.1)


def test_predict_G_top_monotone_continuous():
    m = np.linspace(0, 6, 6001)
    v = np.array([predict_G_top(x) for x in m])
    assert np.all(np.diff(v) >= 0)
    assert np.all(v[m <= 1] == 2.0)
    assert np.max(np.abs(np.diff(v))) < 1e-2


def test_f_of_lambda():
    assert f_of_lambda(2.5) == 2.0
    assert f_of_lambda(2.0) == 1.0
    for lam in (2.1, 3.0, 10.0):
        f = f_of_lambda(lam)
        assert f >= 1 and f + 1 / f == pytest.approx(lam, abs=1e-12)
        assert predict_G_top(f) == pytest.approx(lam, abs=1e-12)
    with pytest.raises(ValueError):
        f_of_lambda(1.99)


def test_rates():
    assert rate_H(2.5, 1, 1) == pytest.approx(1.5)
    assert rate_H(2.5, 2, 2) == pytest.approx(4.5)
    assert rate_G(2.5, 1, 1) == pytest.approx(2.0)
    assert rate_G(2.5, 1, 3) == pytest.approx(8.0)
    for lam in (2.2, 3.0, 7.0):
        w = PotentialLaw.weibull(1.3, 1.7)
        assert rate_H(lam, 1.3, 1.7) == pytest.approx(-math.log(survival(w, math.sqrt(lam * lam - 4))), rel=1e-12)
    with pytest.raises(ValueError):
        rate_H(2.0, 1, 1)
    with pytest.raises(ValueError):
        rate_G(1.0, 1, 1)


def test_rates_ordered_and_increasing():
    for beta in (0.5, 1.0, 2.0):
        h = np.array([rate_H(x, 1, beta) for x in GRID])
        g = np.array([rate_G(x, 1, beta) for x in GRID])
        assert np.all(g > h)
        assert np.all(np.diff(h) > 0) and np.all(np.diff(g) > 0)


def test_subcritical_prefactors():
    assert subcritical_prefactor_H(2.5, 2) == pytest.approx(1 / 2.25)
    assert subcritical_prefactor_G(2.5, 2) == pytest.approx(0.25)
    big = np.array([[subcritical_prefactor_H(x, 2), subcritical_prefactor_G(x, 2)] for x in GRID])
    assert np.all(np.diff(big, axis=0) < 0)
    assert subcritical_prefactor_H(1e6, 2) < 1e-11
    with pytest.raises(ValueError):
        subcritical_prefactor_G(2.0, 1)


def test_critical_cdfs():
    f = FrechetLaw(1, 2)
    assert critical_H_cdf(2.0, f) == 0.0 and critical_H_cdf(-5.0, f) == 0.0
    assert critical_H_cdf(math.sqrt(8), f) == pytest.approx(math.exp(-0.25))
    assert critical_G_cdf(1.99, f) == 0.0
    assert critical_G_cdf(2.0, f) == pytest.approx(math.exp(-1))
    assert critical_G_cdf(2.5, f) == pytest.approx(math.exp(-0.25))


@pytest.mark.parametrize("cdf", [critical_H_cdf, critical_G_cdf])
def test_critical_cdfs_are_cdfs(cdf):
    f = FrechetLaw(0.7, 1.5)
    x = np.linspace(-1, 1e4, 100_001)
    v = cdf(x, f)
    assert np.all(np.diff(v) >= 0)
    assert v[0] == 0.0 and v[-1] > 0.9999
    assert cdf(1e12, f) == pytest.approx(1.0)


# -- secular product ----------------------------------------------------------------------


def test_secular_determinant_empty_product():
    assert secular_determinant_H(2.5, SpikeProfile(np.zeros(100))) == 1.0
    with pytest.raises(ValueError):
        secular_determinant_H(2.0, SpikeProfile(np.zeros(100)))


def test_secular_single_spike_root():
    prof = SpikeProfile.planted(2000, [1.5])
    roots = secular_roots_H(prof)
    assert roots.size == 1
    assert abs(roots[0] - 2.5) <= 1e-6
    assert secular_determinant_H(roots[0] - 1e-4, prof) < 0 < secular_determinant_H(roots[0] + 1e-4, prof)


def test_secular_two_spikes():
    prof = SpikeProfile.planted(2000, [1.5, 1.0], [600, 1400])
    np.testing.assert_allclose(secular_roots_H(prof), [2.5, math.sqrt(5)], atol=1e-6)


def test_secular_root_grid_matches_prediction():
    for m in np.linspace(0.5, 5, 20):
        r = secular_roots_H(SpikeProfile.planted(2000, [m]))
        assert abs(r[0] - predict_H_top(m)) <= 5e-3


def test_secular_cutoff_drops_small_sites():
    vals = np.zeros(1000)
    vals[500] = 1.0
    vals[100] = 0.5 * 1000**-0.25
    prof = SpikeProfile(vals)
    only = SpikeProfile.planted(1000, [1.0], [500])
    assert secular_determinant_H(2.3, prof) == secular_determinant_H(2.3, only)


# -- assumption checker ------------------------------------------------------------------------


def test_assumptions_single_spike_pass():
    rep = check_spike_assumptions(SpikeProfile.planted(1000, [2.0]))
    assert rep.passed and rep.violations == () and rep.argmax_in_bulk


def test_assumptions_adjacent_spikes_fail_clause_ii():
    rep = check_spike_assumptions(SpikeProfile.planted(1000, [1.0, 0.9], [500, 501]))
    assert not rep.passed and "ii" in rep.violations


@pytest.mark.parametrize("n", [100, 400, 2000])
def test_assumptions_many_spikes_fail_clause_iii(n):
    k = math.ceil(n**0.9)
    vals = np.zeros(n)
    vals[np.linspace(0, n - 1, k).astype(int)] = 1.0
    rep = check_spike_assumptions(SpikeProfile(vals, cutoff_c=0.3))
    assert "iii" in rep.violations


def test_assumptions_tied_max_fails_clause_i():
    rep = check_spike_assumptions(SpikeProfile.planted(1000, [1.0, 1.0], [100, 800]))
    assert "i" in rep.violations


# -- arcsine gap -----------------------------------------------------------------------------------


def _arcsine_gap_oracle(l1):
    # Closed form of the integral after x = 2 sin(theta).
    def prim(t):
        return 2 * t - math.sin(2 * t) + 4 * l1 * math.cos(t) + l1 * l1 * t

    return (prim(math.pi / 2) - prim(math.asin(l1 / 2))) / math.pi


def test_arcsine_gap_examples():
    assert arcsine_left_gap(2 - 1e-12) == pytest.approx(0.0, abs=1e-12)
    assert arcsine_left_gap(-2.0) == pytest.approx(6.0, abs=1e-10)
    assert arcsine_left_gap(0.0) == pytest.approx(1.0, abs=1e-10)
    assert arcsine_left_gap(-3.0) == 1.0


def test_arcsine_gap_matches_closed_form_and_decreases():
    x = np.linspace(-1.999, 1.999, 400)
    v = np.array([arcsine_left_gap(t) for t in x])
    ref = np.array([_arcsine_gap_oracle(t) for t in x])
    assert np.max(np.abs(v - ref)) <= 1e-10
    assert np.all(np.diff(v) < 0)


def test_arcsine_gap_matches_sampling():
    # Inverse-CDF stratified samples of the arcsine law.
    p = (np.arange(2_000_000) + 0.5) / 2_000_000
    x = -2 * np.cos(np.pi * p)
    l1 = 0.3
    mc = np.mean(np.where(x > l1, (x - l1) ** 2, 0.0))
    assert arcsine_left_gap(l1) == pytest.approx(mc, abs=1e-8)


# -- regimes and intensities ---------------------------------------------------------------------------


def test_classify_regime():
    assert classify_regime(PotentialLaw.weibull(1, 2), 0.5).kind is Regime.WEIBULL_LD
    assert classify_regime(PotentialLaw.pareto(1, 2), 0.6).kind is Regime.SUBCRITICAL
    assert classify_regime(PotentialLaw.pareto(1, 2), 0.5).kind is Regime.CRITICAL
    assert classify_regime(PotentialLaw.pareto(1, 0.5), 1.0).kind is Regime.RANDOMNESS_DOMINATING
    assert classify_regime(PotentialLaw.constant(0), 1.0).kind is Regime.DETERMINISTIC
    lab = classify_regime(PotentialLaw.signed(PotentialLaw.pareto(1, 2)), 0.5)
    assert lab.C == 0.5 and lab.kind is Regime.CRITICAL


def test_regime_label_invariants():
    with pytest.raises(ValueError):
        RegimeLabel(Regime.SUBCRITICAL, 1, 1, 0.5)
    with pytest.raises(ValueError):
        RegimeLabel(Regime.CRITICAL, 1, 1, 0.5)
    with pytest.raises(ValueError):
        RegimeLabel(Regime.RANDOMNESS_DOMINATING, 1, 3, 0.5)


def test_poisson_intensity_examples():
    crit = RegimeLabel(Regime.CRITICAL, 1.0, 2.0, 0.5)
    dom = RegimeLabel(Regime.RANDOMNESS_DOMINATING, 1.0, 2.0, 0.25)
    assert poisson_intensity_integral(crit, 1, math.inf) == pytest.approx(1.0)
    assert poisson_intensity_integral(dom, 1, 2) == pytest.approx(0.75)
    for reg in (crit, dom):
        a, b, c = 0.5, 1.7, 4.0
        assert poisson_intensity_integral(reg, a, b) + poisson_intensity_integral(reg, b, c) == pytest.approx(
            poisson_intensity_integral(reg, a, c), rel=1e-14
        )
    with pytest.raises(ValueError):
        poisson_intensity_integral(crit, 0.0, 1.0)
    with pytest.raises(ValueError):
        poisson_intensity_integral(crit, 2.0, 1.0)
    with pytest.raises(ValueError):
        poisson_intensity_integral(RegimeLabel(Regime.WEIBULL_LD, 1, 2, 0.5), 1.0, 2.0)
