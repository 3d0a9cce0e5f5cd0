import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fllr.errors import DimensionMismatch
from fllr.hilbert import (FunctionalSample, as_curve, axpy, distances, inner, norm,
                          read_curve_csv, read_dataset_csv, write_dataset_csv)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def pair(d):
    return st.tuples(arrays(float, d, elements=finite), arrays(float, d, elements=finite))


@pytest.mark.parametrize("a,b,expected", [
    ((1, 0), (0, 1), 0.0),
    ((3, 4), (3, 4), 25.0),
    ((0.5, -0.5), (0.25, 0.25), 0.0),
])
def test_inner_examples(a, b, expected):
    assert inner(a, b) == expected


@pytest.mark.parametrize("a,expected", [((0, 0, 0), 0.0), ((3, 4), 5.0), ((1, 1, 1, 1), 2.0)])
def test_norm_examples(a, expected):
    assert norm(a) == expected


def test_axpy_examples():
    x = np.array([1.5, -2.0, 0.25])
    assert np.array_equal(axpy(1, x, np.zeros(3)), x)
    assert np.array_equal(axpy(-1, x, x), np.zeros(3))
    assert np.array_equal(axpy(2, (1, 2), (3, 4)), [5, 8])


def test_dimension_mismatch_reports_both():
    with pytest.raises(DimensionMismatch) as err:
        inner((1, 2), (1, 2, 3))
    assert "2" in str(err.value) and "3" in str(err.value)
    with pytest.raises(DimensionMismatch):
        axpy(1.0, (1, 2), (1,))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        as_curve([1.0, np.nan])
    with pytest.raises(ValueError):
        as_curve([np.inf])


@given(st.integers(1, 8).flatmap(pair))
def test_cauchy_schwarz(ab):
    a, b = ab
    assert abs(inner(a, b)) <= norm(a) * norm(b) * (1 + 1e-12) + 1e-12


@given(st.integers(1, 8).flatmap(pair))
def test_parallelogram(ab):
    a, b = ab
    lhs = norm(a + b) ** 2 + norm(a - b) ** 2
    rhs = 2 * norm(a) ** 2 + 2 * norm(b) ** 2
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)


@given(st.integers(1, 6).flatmap(lambda d: st.tuples(pair(d), arrays(float, d, elements=finite))))
@settings(max_examples=50)
def test_shift_invariance(data):
    (x, x0), mu = data
    assert norm(x - x0) == pytest.approx(norm((x + mu) - (x0 + mu)), rel=1e-9, abs=1e-9)


def test_sample_validation():
    with pytest.raises(ValueError):
        FunctionalSample(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        FunctionalSample(np.zeros((0, 2)), np.zeros(0))
    s = FunctionalSample(np.arange(6.0).reshape(3, 2), [1, 2, 3])
    assert (s.n, s.d) == (3, 2)
    with pytest.raises(ValueError):
        s.inputs[0, 0] = 9.0


def test_drop_and_distances():
    s = FunctionalSample([[0.0, 0.0], [3.0, 4.0], [1.0, 0.0]], [1, 2, 3])
    assert np.allclose(distances(s, [0, 0]), [0, 5, 1])
    t = s.drop(1)
    assert t.n == 2 and list(t.outputs) == [1.0, 3.0]


def test_csv_round_trip(tmp_path, rng):
    s = FunctionalSample(rng.standard_normal((7, 4)), rng.standard_normal(7))
    for header in (True, False):
        p = tmp_path / f"d{header}.csv"
        write_dataset_csv(p, s, header=header, comment="seed=1")
        back = read_dataset_csv(p)
        assert np.array_equal(back.inputs, s.inputs)
        assert np.array_equal(back.outputs, s.outputs)


def test_curve_csv(tmp_path):
    p = tmp_path / "x0.csv"
    p.write_text("0.5\n-1.25\n2\n")
    assert np.array_equal(read_curve_csv(p), [0.5, -1.25, 2.0])
