import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from hinreg.errors import EmptySubset, ShapeMismatch, Singular, Underdetermined
from hinreg.pcrw import PcrwResult
from hinreg.regress import (
    DesignMatrix,
    aggregate_features,
    assemble_design,
    forward_select,
    ols,
    select_from_design,
    t_sf,
)

from oracles import ols_normal_equations, t_two_sided_quad
from strategies import seeds


def design(X, y, names=None, intercept=True):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = names or [f"x{i}" for i in range(X.shape[1])]
    return DesignMatrix(np.asarray(y, dtype=float), X, names, intercept, np.zeros((len(y), 2), dtype=int))


def table(rows, label=""):
    return PcrwResult(None, sp.csr_matrix(np.asarray(rows, dtype=float)), label=label)


# ---- t distribution

@pytest.mark.parametrize("dof", [1, 2, 5, 10, 100, 10000])
def test_t_sf_matches_quadrature(dof):
    for t in np.linspace(0, 6, 25):
        assert t_sf(t, dof) == pytest.approx(t_two_sided_quad(t, dof), abs=1e-8)


def test_t_sf_special_values():
    assert t_sf(0.0, 3) == 1.0
    assert t_sf(math.inf, 3) == 0.0
    assert t_sf(-2.0, 10) == t_sf(2.0, 10)
    assert t_sf(2.0, 10) == pytest.approx(t_two_sided_quad(2.0, 10), abs=1e-10)
    assert abs(t_sf(1.96, 10**6) - 0.05) <= 5e-4
    with pytest.raises(ValueError):
        t_sf(1.0, 0)


@given(st.floats(0, 20), st.floats(0, 20), st.integers(1, 1000))
def test_t_sf_monotone_in_t(a, b, dof):
    lo, hi = sorted((a, b))
    assert t_sf(hi, dof) <= t_sf(lo, dof) + 1e-15


@given(st.floats(0.1, 8), st.integers(1, 500), st.integers(1, 500))
def test_t_sf_monotone_in_dof(t, d1, d2):
    lo, hi = sorted((d1, d2))
    assert t_sf(t, hi) <= t_sf(t, lo) + 1e-12


# ---- OLS

def test_exact_fit():
    x = np.arange(10.0)
    fit = ols(design(x, 2 * x))
    np.testing.assert_allclose(fit.beta, [0, 2], atol=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.rss == pytest.approx(0.0, abs=1e-20)


def test_intercept_only_constant_response():
    fit = ols(design(np.empty((5, 0)), [3.0] * 5))
    assert fit.beta[0] == pytest.approx(3.0)
    assert fit.r2 == 0.0
    assert fit.p_values.size == 0


def test_planted_coefficients():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(1000, 2))
    y = 0.5 + X @ [1.5, -0.3] + rng.normal(0, 0.01, 1000)
    fit = ols(design(X, y))
    assert np.all(np.abs(fit.beta - [0.5, 1.5, -0.3]) <= 3 * fit.se)
    assert np.all(fit.p_values < 1e-3)


def test_matches_normal_equations_oracle():
    rng = np.random.default_rng(5)
    X = rng.random((200, 3))
    y = X @ [0.2, 0.0, -1.0] + rng.normal(0, 0.1, 200)
    fit = ols(design(X, y))
    beta, se, r2 = ols_normal_equations(X, y)
    np.testing.assert_allclose(fit.beta, beta, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(fit.se, se, rtol=1e-9)
    assert fit.r2 == pytest.approx(r2, abs=1e-12)


def test_singular_and_underdetermined():
    x = np.arange(6.0)
    with pytest.raises(Singular) as err:
        ols(design(np.column_stack([x, 2 * x]), x + 1, names=["a", "b"]))
    assert err.value.column in ("a", "b", "(intercept)")
    with pytest.raises(Singular):
        ols(design(np.column_stack([x, np.zeros(6)]), x))
    with pytest.raises(Underdetermined):
        ols(design(np.ones((2, 1)), [1.0, 2.0]))


@given(seeds, st.integers(1, 4), st.booleans())
def test_fit_invariants(seed, k, intercept):
    rng = np.random.default_rng(seed)
    X = rng.random((40, k))
    y = X @ rng.normal(size=k) + rng.normal(0, 0.3, 40)
    fit = ols(design(X, y, intercept=intercept))
    A = np.column_stack([np.ones(40), X]) if intercept else X
    resid = y - A @ fit.beta
    assert np.linalg.norm(A.T @ resid) <= 1e-8 * np.linalg.norm(y)
    if intercept:
        assert fit.r2 == pytest.approx(1 - fit.rss / fit.tss, abs=1e-12)
    assert np.all((0 <= fit.p_values) & (fit.p_values <= 1))


@given(seeds, st.floats(0.01, 100).flatmap(lambda c: st.sampled_from([c, -c])))
def test_scale_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    X = rng.random((30, 2))
    y = X @ [1.0, 2.0] + rng.normal(0, 0.2, 30)
    a = ols(design(X, y))
    X2 = X.copy()
    X2[:, 1] *= c
    b = ols(design(X2, y))
    assert b.coefficients[1] == pytest.approx(a.coefficients[1] / c, rel=1e-9)
    assert b.r2 == pytest.approx(a.r2, abs=1e-9)
    np.testing.assert_allclose(b.p_values, a.p_values, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(b.predict(X2), a.predict(X), atol=1e-9)


# ---- design assembly

def test_assemble_shapes():
    rng = np.random.default_rng(0)
    t = table(rng.random((4, 5)))
    regs = [table(rng.random((4, 5))), table(rng.random((4, 5)))]
    d = assemble_design(t, regs, drop_holes=False)
    assert d.full_matrix().shape == (4 * 5 - 5, 3)      # hole source row dropped
    d = assemble_design(t, regs)
    assert d.full_matrix().shape == (12, 3)
    assert d.X.shape == (12, 2)


def test_row_index_roundtrip():
    rng = np.random.default_rng(1)
    dense = rng.random((5, 4))
    d = assemble_design(table(dense), [table(dense)], source_subset=[3, 1, 4])
    pairs = {tuple(p) for p in d.row_index}
    assert len(pairs) == d.n_rows == 2 * 3
    for (s, t), v in zip(d.row_index, d.y):
        assert dense[s, t] == v


def test_assemble_errors():
    with pytest.raises(ShapeMismatch):
        assemble_design(table(np.eye(3)), [table(np.eye(4))])
    with pytest.raises(EmptySubset):
        assemble_design(table(np.eye(3)), [], source_subset=[2])


# ---- selection

def test_alpha_one_selects_all_orthogonal():
    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(rng.normal(size=(50, 4)))
    X = Q[:, 1:] - Q[:, 1:].mean(axis=0)
    y = X @ [3.0, 2.0, 1.0] + rng.normal(0, 0.5, 50)
    trace = select_from_design(design(X, y), alpha=1.0)
    assert sorted(trace.selected) == [0, 1, 2]
    assert np.all(np.diff(trace.r2_path()) >= 0)
    assert trace.stop_reason == "no-candidate"


def test_identical_candidates_one_selected():
    rng = np.random.default_rng(3)
    x = rng.random(40)
    y = 2 * x + rng.normal(0, 0.1, 40)
    trace = select_from_design(design(np.column_stack([x, x, x]), y, names=["a", "b", "c"]), 0.05)
    assert trace.selected_names == ["a"]          # tie goes to the first


def test_no_signal_selects_nothing():
    trace = select_from_design(design(np.arange(20.0) % 2, np.ones(20)), 0.05)
    assert trace.selected == []
    assert trace.final.r2 == 0.0


def test_significance_violation_stop():
    rng = np.random.default_rng(4)
    x = rng.random(60)
    y = x + rng.normal(0, 0.05, 60)
    noise = rng.random((60, 2))
    trace = select_from_design(design(np.column_stack([x, noise]), y), 0.001)
    assert trace.selected == [0]
    assert trace.stop_reason in ("significance-violation", "no-improvement")


@given(seeds)
def test_order_invariance_with_strict_gaps(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((80, 4))
    y = X @ [2.0, 1.0, 0.0, 0.0] + rng.normal(0, 0.2, 80)
    a = select_from_design(design(X, y, names=list("abcd")), 0.05)
    perm = rng.permutation(4)
    b = select_from_design(design(X[:, perm], y, names=[list("abcd")[i] for i in perm]), 0.05)
    assert set(a.selected_names) == set(b.selected_names)
    assert np.all(np.diff(a.r2_path()) >= 0)


def test_trace_serialisation(tmp_path):
    rng = np.random.default_rng(6)
    X = rng.random((30, 2))
    y = X[:, 0] + rng.normal(0, 0.01, 30)
    trace = select_from_design(design(X, y, names=["P1", "P2"]), 0.05)
    trace.write_csv(tmp_path / "t.csv")
    trace.write_json(tmp_path / "t.json")
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "step,metapath,coefficient,p_value,r2"
    data = json.loads((tmp_path / "t.json").read_text())
    assert data["selected"] == trace.selected_names
    assert data["steps"][0]["added"] is None


def test_forward_select_on_tables():
    rng = np.random.default_rng(7)
    a, b = rng.random((6, 5)), rng.random((6, 5))
    y = 0.7 * a + 0.1 * rng.random((6, 5))
    trace = forward_select(table(y), [table(a, "A"), table(b, "B")], alpha=0.05)
    assert trace.selected_names[0] == "A"


# ---- features

def test_aggregate_mean_preserves_distributions():
    a = np.array([[0.5, 0.5], [0, 1.0]])
    b = np.array([[1.0, 0], [0, 1.0]])
    (f,) = aggregate_features({"f": [table(a), table(b)]})
    np.testing.assert_allclose(f.table.toarray(), (a + b) / 2)
    np.testing.assert_allclose(f.row_sums(), 1.0)
    assert f.name == "f"
    (s,) = aggregate_features({"f": [table(a), table(b)]}, how="sum")
    np.testing.assert_allclose(s.table.toarray(), a + b)
    (one,) = aggregate_features({"g": [table(a)]})
    np.testing.assert_array_equal(one.table.toarray(), a)
    with pytest.raises(ShapeMismatch):
        aggregate_features({"f": [table(a), table(np.eye(3))]})
