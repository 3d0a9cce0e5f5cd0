import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fllr.errors import DomainError, EmptyNeighborhood, FitError
from fllr.hilbert import FunctionalSample
from fllr.kernels import linear_downweight, naive
from fllr.small_ball import (LOG_SQUARED, POLY_EXP, EmpiricalF, SbpFamily, check_gamma_limit,
                             empirical_F, estimate_v, family_F, fit_family, read_norms_csv,
                             rho, sample_from_family, write_norms_csv)
from fllr.synthetic import KLSpec, sample_kl


def test_empirical_examples():
    e = EmpiricalF.from_norms([3.0, 1.0, 2.0])
    assert empirical_F(e, 2.0) == pytest.approx(2 / 3)
    assert empirical_F(e, 3.0) == 1.0 and empirical_F(e, 10.0) == 1.0
    assert empirical_F(e, 0.5) == 0.0
    with pytest.raises(DomainError):
        e(-1.0)


@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=40))
def test_empirical_monotone_and_order_stats(norms):
    e = EmpiricalF.from_norms(norms)
    grid = np.linspace(0, 101, 60)
    vals = e(grid)
    assert np.all(np.diff(vals) >= 0) and vals.min() >= 0 and vals.max() <= 1
    distinct = np.unique(e.sorted_norms)
    for v in distinct:
        j = np.searchsorted(e.sorted_norms, v, side="right")
        assert e(v) == j / e.n


def test_family_examples():
    f = SbpFamily(POLY_EXP, 1.0, 1.0, 0.0, 1.0)
    assert family_F(f, 1.0) == pytest.approx(np.exp(-1))
    vals = [family_F(f, h) for h in (0.1, 0.05, 0.01)]
    assert vals[0] > vals[1] > vals[2] > 0
    g = SbpFamily(LOG_SQUARED, 1.0, 1.0)
    assert family_F(g, np.exp(-1)) == pytest.approx(np.exp(-1))
    with pytest.raises(DomainError):
        family_F(g, 1.0)
    with pytest.raises(DomainError):
        family_F(f, 0.0)


def test_rho_examples():
    f = SbpFamily(POLY_EXP, 1.0, 1.0, 0.0, 1.0)
    assert rho(f, 0.1, C=1.0) == pytest.approx(0.01)
    g = SbpFamily(LOG_SQUARED, 1.0, 1.0)
    assert rho(g, np.exp(-1), C=1.0) == pytest.approx(np.exp(-1))
    for fam in (f, g):
        r = [rho(fam, s, C=1.0) / s for s in (0.1, 0.01, 0.001)]
        assert r[0] > r[1] > r[2] > 0
    with pytest.raises(DomainError):
        rho(f, 1.0)


def test_gamma_limit_closed_form():
    rep = check_gamma_limit(lambda s: -1.0 / s, lambda s: s * s, [1e-3], [-1.0, 0.0, 1.0],
                            log_scale=True)
    by_x = {r["x"]: r for r in rep["rows"]}
    assert by_x[0.0]["ratio"] == 1.0
    for x in (-1.0, 1.0):
        assert by_x[x]["ratio"] == pytest.approx(np.exp(x / (1 + x * 1e-3)), rel=1e-10)
        assert by_x[x]["rel_dev"] <= 0.002
    assert rep["max_rel_dev"] <= 0.002


@pytest.mark.parametrize("fam", [SbpFamily(POLY_EXP, 2.0, 0.5, 1.0, 1.5),
                                 SbpFamily(LOG_SQUARED, 1.0, 0.7)], ids=lambda f: f.kind)
def test_natural_rho_limit_improves(fam):
    devs = []
    for s in (0.05, 0.01, 0.002):
        rep = check_gamma_limit(fam.log_F, lambda v: rho(fam, v), [s], [-1.0, 0.0, 1.0],
                                log_scale=True)
        devs.append(rep["max_rel_dev"])
        assert [r for r in rep["rows"] if r["x"] == 0][0]["ratio"] == 1.0
    assert devs[0] > devs[1] > devs[2]


def test_fit_power_law_from_uniform_norms():
    rng = np.random.default_rng(5)
    e = EmpiricalF.from_norms(np.sqrt(rng.uniform(size=5000)))
    fit = fit_family(e, POLY_EXP, freeze={"C2": 0.0})
    assert fit.family.alpha_exp == pytest.approx(2.0, abs=0.3)


@pytest.mark.parametrize("seed", range(4))
def test_fit_beta_round_trip(seed):
    f = SbpFamily(POLY_EXP, 1.0, 1.0, 0.0, 1.0)
    e = EmpiricalF.from_norms(sample_from_family(f, 10_000, np.random.default_rng(seed)))
    fit = fit_family(e, POLY_EXP, freeze={"alpha_exp": 0.0})
    assert fit.family.beta == pytest.approx(1.0, rel=0.25)


def test_fit_log_squared_round_trip():
    f = SbpFamily(LOG_SQUARED, 1.0, 0.5)
    e = EmpiricalF.from_norms(sample_from_family(f, 10_000, np.random.default_rng(2), 0.9))
    fit = fit_family(e, LOG_SQUARED)
    assert fit.family.C2 == pytest.approx(0.5, rel=0.25)


def test_fit_preconditions():
    with pytest.raises(FitError):
        fit_family(EmpiricalF.from_norms(np.linspace(0.1, 0.9, 49)), LOG_SQUARED)
    with pytest.raises(FitError):
        fit_family(EmpiricalF.from_norms(np.full(100, 0.5)), POLY_EXP)


def test_estimate_v():
    rng = np.random.default_rng(0)
    s = FunctionalSample(0.5 * rng.standard_normal((200, 3)), np.zeros(200))
    x0 = np.zeros(3)
    assert estimate_v(s, x0, naive(), 0.6, lambda t: 0 * t) == 0.0
    h = 0.6
    d = np.linalg.norm(s.inputs, axis=1)
    v = estimate_v(s, x0, naive(), h, lambda t: t)
    assert v == pytest.approx(np.mean(np.where(d <= h, d ** 2, 0.0)), rel=1e-12)
    assert v <= h * h * EmpiricalF.from_norms(d)(h)
    k = linear_downweight()
    loop = sum(k(di / h) * di * di ** 3 for di in d if di <= h) / len(d)
    assert estimate_v(s, x0, k, h, lambda t: t ** 3) == pytest.approx(loop, rel=1e-12)
    with pytest.raises(EmptyNeighborhood):
        estimate_v(s, np.full(3, 50.0), naive(), h, lambda t: t)


def test_v_bounded_by_h_rho_F():
    kl = KLSpec("exponential", 1.0, d=20)
    X = sample_kl(kl, 20_000, seed=3)
    s = FunctionalSample(X, np.zeros(len(X)))
    e = EmpiricalF.from_sample(s, np.zeros(20))
    fam = SbpFamily(LOG_SQUARED, 1.0, 1.0)
    for k in (naive(), linear_downweight()):
        for h in (0.1, 0.2, 0.3):
            v = estimate_v(s, np.zeros(20), k, h, lambda t: rho(fam, t, C=1.0))
            assert v <= k.sup * h * rho(fam, h, C=1.0) * e(h) * (1 + 1e-12)


def test_norms_csv_round_trip(tmp_path):
    e = EmpiricalF.from_norms([0.3, 0.1, 0.2])
    write_norms_csv(tmp_path / "n.csv", e)
    assert np.array_equal(read_norms_csv(tmp_path / "n.csv").sorted_norms, e.sorted_norms)


def test_ratio_trend_small():
    # ratio E[K ||Z||^2] / (K(1) F(h) h^2) rises toward 1 as h shrinks
    kl = KLSpec("exponential", 1.0, d=20)
    X = sample_kl(kl, 50_000, seed=1)
    d = np.linalg.norm(X, axis=1)
    scale = np.median(d)
    e = EmpiricalF.from_norms(d)
    ratios = []
    for m in (0.5, 0.3, 0.2):
        h = m * scale
        ratios.append(np.mean(np.where(d <= h, d * d, 0.0)) / (e(h) * h * h))
    assert ratios[0] < ratios[1] < ratios[2] <= 1.0
