import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fllr.errors import ConfigError, NoRoot, SelectionFailed
from fllr.hilbert import FunctionalSample
from fllr.kernels import naive
from fllr.local_operator import build_factorization
from fllr.regularization import RegScheme
from fllr.harness import (ExperimentConfig, SchemePolicy, bound_table, config_comment,
                          cv_select, load_config, make_x0, rate_slopes, rows_to_csv,
                          run_mse, solve_hstar, theorem_bound)
from fllr.synthetic import KLSpec, RegressionSpec, true_rho


def config(**kw):
    base = dict(
        kl=KLSpec("exponential", 1.0, d=5),
        reg=RegressionSpec(1.0, [1.0, -0.5], [0.5], 0.2),
        n_grid=(200,),
        h_grid=(0.4, 0.8),
        schemes=(SchemePolicy("penalization", alpha=1e-3), SchemePolicy("nadaraya_watson")),
        replicates=6,
        seed=3,
        holdout=5000,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_constant_mse_is_zero():
    cfg = config(reg=RegressionSpec(2.5), schemes=(
        SchemePolicy("penalization", alpha=1e-6), SchemePolicy("truncation", N=2),
        SchemePolicy("tikhonov", alpha=1e-8), SchemePolicy("nadaraya_watson")))
    for row in run_mse(cfg):
        assert row.valid and row.mse <= 1e-20


def test_affine_mse_at_regularization_floor():
    cfg = config(reg=RegressionSpec(1.0, [1.0, -2.0, 0.5, 0.3, 0.1]),
                 schemes=(SchemePolicy("penalization", alpha=1e-10),))
    for row in run_mse(cfg):
        if row.mean_active >= cfg.kl.d + 2:
            assert row.mse <= 1e-12


def test_decomposition_and_columns():
    rows = run_mse(config())
    assert len(rows) == 4
    for r in rows:
        assert r.mse >= 0 and r.failures == 0
        assert r.mse == pytest.approx(r.bias2 + r.variance, rel=1e-12, abs=1e-300)
    nw = [r for r in rows if r.scheme == "nadaraya_watson"]
    assert all(r.mean_weight_sum == pytest.approx(r.mean_active) for r in nw)


def test_bit_reproducible():
    a = rows_to_csv(run_mse(config()), "x")
    b = rows_to_csv(run_mse(config()), "x")
    assert a == b


def test_parallel_matches_serial():
    cfg = config(replicates=3)
    assert rows_to_csv(run_mse(cfg, workers=2)) == rows_to_csv(run_mse(cfg))


def test_invalid_cell_keeps_running():
    cfg = config(h_grid=(1e-6, 0.8))
    rows = run_mse(cfg)
    bad = [r for r in rows if r.h == 1e-6]
    assert all(not r.valid and r.failures == cfg.replicates for r in bad)
    assert all(math.isnan(r.mse) for r in bad)
    assert all(r.valid for r in rows if r.h == 0.8)


def test_config_round_trip_and_errors(tmp_path):
    cfg = config(schemes=(SchemePolicy("penalization", policy="rn_h", rn_scale=0.01),
                          SchemePolicy("truncation", N=3)))
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    back = load_config(p)
    assert back.digest() == cfg.digest()
    assert config_comment(back) == f"seed=3 config_sha256={cfg.digest()}"
    with pytest.raises(ConfigError):
        config(replicates=0)
    with pytest.raises(ConfigError):
        config(h_grid=())
    with pytest.raises(ConfigError):
        config(x0_rule="bumpy")
    with pytest.raises(ConfigError):
        SchemePolicy("truncation", policy="rho")
    with pytest.raises(ConfigError):
        SchemePolicy("penalization", alpha=-1.0)
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text(json.dumps({"kl": {}}))
    with pytest.raises(ConfigError):
        load_config(p)


def test_policies_resolve():
    rng = np.random.default_rng(0)
    s = FunctionalSample(rng.standard_normal((30, 4)), np.zeros(30))
    f = build_factorization(s, np.zeros(4), naive(), 3.0)
    h = 0.5
    assert SchemePolicy("penalization", policy="rn_h").resolve(f, h).alpha == h * f.mu1
    assert SchemePolicy("tikhonov", policy="rn_h").resolve(f, h).alpha == h * f.mu1 ** 2
    N = SchemePolicy("truncation", policy="rn_h").resolve(f, h).N
    assert f.eigenvalues[N - 1] >= h * f.mu1 and (N == f.rank or f.eigenvalues[N] < h * f.mu1)
    assert SchemePolicy("penalization", policy="rho").resolve(f, h, 0.2).alpha == 0.1
    assert SchemePolicy("nadaraya_watson").resolve(f, h) is None


def test_make_x0():
    kl = KLSpec("exponential", 1.0, d=4)
    assert np.array_equal(make_x0(kl), np.zeros(4))
    assert np.allclose(make_x0(kl, "rough", 2.0), 2 * np.sqrt(kl.eigenvalues))


def test_theorem_bound_examples():
    t = theorem_bound(1, 1, 1, 1, 1, 1)
    assert (t.total, t.bias_line, t.variance_line) == (7, 4, 3)
    assert not t.nF_large
    assert theorem_bound(0.5, 2000, 0.3, 0.01, 0.5, 1).variance_line < \
        theorem_bound(0.5, 1000, 0.3, 0.01, 0.5, 1).variance_line
    with pytest.raises(ValueError):
        theorem_bound(0, 1, 1, 1, 1)


@given(st.floats(0.01, 0.5), st.floats(1e2, 1e6))
@settings(max_examples=50)
def test_bound_collapses_with_rn_h(h, n):
    # with r_n = h and v = h rho(h) F the bound is of order h^4 + (1 + h/(n v)) / (nF)
    F = h ** 2
    v = h * (h * h) * F
    t = theorem_bound(h, n, F, v, h)
    simple = h ** 4 + (1 + h / (n * v)) / (n * F)
    assert 0.2 <= t.total / simple <= 10


@pytest.mark.parametrize("F,n", [(lambda h: h, 32), (lambda h: h * h, 64)])
def test_solve_hstar_examples(F, n):
    h = solve_hstar(n, F)
    assert h == pytest.approx(0.5, abs=1e-9)
    assert abs(h ** 4 * F(h) * n - 1) <= 1e-5


def test_solve_hstar_monotone_and_noroot():
    hs = [solve_hstar(n, lambda h: h) for n in (1e2, 1e3, 1e4)]
    assert hs[0] > hs[1] > hs[2]
    with pytest.raises(NoRoot) as err:
        solve_hstar(0.5, lambda h: h)
    assert err.value.values[1] < 0 and err.value.bracket[1] == 1.0


def test_cv_examples():
    rng = np.random.default_rng(4)
    X = 0.3 * rng.standard_normal((25, 3))
    s = FunctionalSample(X, 1.0 + X @ np.array([1.0, -1.0, 0.5]))
    grid = [RegScheme.penalization(a) for a in (1e-2, 1e-8)]
    res = cv_select(s, naive(), [2.0, 3.0], grid)
    assert res.score <= 1e-10 and res.h == 2.0 and res.scheme.alpha == 1e-8
    one = cv_select(s, naive(), [2.0], [RegScheme.truncation(2)])
    assert one.h == 2.0 and one.scheme == RegScheme.truncation(2) and len(one.table) == 1
    with pytest.raises(SelectionFailed):
        cv_select(s, naive(), [1e-9], grid)
    with pytest.raises(ValueError):
        cv_select(FunctionalSample(X[:5], np.zeros(5)), naive(), [1.0], grid)


@given(st.integers(0, 2**31))
@settings(max_examples=10, deadline=None)
def test_cv_choice_is_minimal(seed):
    rng = np.random.default_rng(seed)
    X = 0.4 * rng.standard_normal((12, 3))
    s = FunctionalSample(X, np.sin(X[:, 0]) + 0.1 * rng.standard_normal(12))
    res = cv_select(s, naive(), [0.8, 1.2, 2.0],
                    [RegScheme.penalization(1e-1), RegScheme.truncation(1)])
    assert all(res.score <= sc for _, _, sc in res.table)


def test_cv_tie_break_prefers_small_h_then_small_alpha():
    rng = np.random.default_rng(1)
    s = FunctionalSample(rng.standard_normal((12, 2)), np.full(12, 3.0))
    res = cv_select(s, naive(), [10.0, 20.0],
                    [RegScheme.penalization(1e-1), RegScheme.penalization(1e-3)])
    assert res.h == 10.0 and res.scheme.alpha == 1e-3


def test_rate_slopes():
    h = np.array([0.1, 0.2, 0.4, 0.8])
    rep = rate_slopes(h, 3 * h ** 2, 0.5 * h)
    assert rep.slope_bias2_ll == pytest.approx(4) and rep.slope_bias2_nw == pytest.approx(2)
    assert rep.difference == pytest.approx(1)
    scaled = rate_slopes(h, 7 * 3 * h ** 2, 7 * 0.5 * h)
    assert scaled.difference == pytest.approx(rep.difference)
    filt = rate_slopes(np.append(h, 1.0), np.append(h ** 2, 0.0), np.append(h, 1.0))
    assert filt.filtered == 1
    with pytest.raises(ValueError):
        rate_slopes([0.1, 0.2], [1, 2], [1, 2])


def test_bound_table_ratio_and_fitted_constant():
    cfg = config(reg=RegressionSpec(1.0, [1.0], [1.0], 0.3), h_grid=(0.5, 0.8))
    rows, C = bound_table(cfg, run_mse(cfg))
    assert len(rows) == 2
    for r in rows:
        assert r.r_n == r.h and r.bound == pytest.approx(r.bias_line + r.variance_line)
        assert r.ratio == pytest.approx(r.mse / r.bound)
    assert C == max(r.ratio for r in rows)
    rows, C = bound_table(cfg)
    assert math.isnan(C)
