import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrit_rg.universality import (
    ClosureIncompleteError,
    bracket,
    chi,
    circulant_coefficients,
    counterexample_residual,
    express,
    fourier,
    is_skew_hermitian,
    lambda_x,
    lambda_z,
    lie_closure_dim,
    paper_counterexample,
    random_unitary,
    residual_lower_bound,
    run_universality,
    sigma_basis,
    sigma_x,
    sigma_y,
    sigma_z,
    subalgebra_h,
    subalgebra_h_prime,
    verify_bracket_tables,
    zd_sum_obstruction,
)

dims = st.integers(2, 6)


def test_lambda_z():
    assert np.allclose(lambda_z([np.pi]), np.diag([1, -1]))


def test_fourier_is_unitary():
    v = fourier(5)
    assert np.allclose(v @ v.conj().T, np.eye(5))


@settings(max_examples=40, deadline=None)
@given(dims, st.integers(0, 2**31 - 1))
def test_lambda_x_constructions_agree(d, seed):
    a = np.random.default_rng(seed).uniform(0, 2 * np.pi, d - 1)
    m = lambda_x(a)
    assert np.allclose(m @ m.conj().T, np.eye(d))
    assert abs(circulant_coefficients(a).sum() - d) < 1e-12


def test_lambda_x_of_zero_is_identity():
    assert np.allclose(lambda_x([0.0, 0.0]), np.eye(3))


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_counterexample_obstructed(d):
    b = paper_counterexample(d)
    v = zd_sum_obstruction(b)
    assert v.obstructed and abs(v.abs_sum - np.sqrt(2)) < 1e-12
    r = counterexample_residual(b, samples=2000)
    assert r >= residual_lower_bound(b) - 1e-12
    assert r > 0.1


def test_obstruction_not_triggered_by_basis_vector():
    b = np.zeros(4)
    b[3] = 1
    assert not zd_sum_obstruction(b).obstructed
    # the identity gate already sends |3> to |3>
    assert counterexample_residual(b, samples=10) < 1e-12


def test_non_unit_vector_rejected():
    with pytest.raises(ValueError):
        zd_sum_obstruction([1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        paper_counterexample(2)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_chi(d):
    expected = sum(sigma_x(d, j, k) for j in range(d) for k in range(j + 1, d))
    assert np.max(np.abs(chi(d) - expected)) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_sigma_basis(d):
    basis = sigma_basis(d)
    assert len(basis) == d * d
    assert all(is_skew_hermitian(m) for m in basis)
    assert lie_closure_dim(basis) == (d * d, 0)


def test_express():
    assert express(2 * sigma_y(3, 0, 2)) == "+2*sy(0,2)"
    assert express(sigma_y(3, 2, 1)) == "-1*sy(1,2)"
    assert express(np.zeros((3, 3))) == "0"


def test_bracket_shape_check():
    with pytest.raises(ValueError):
        bracket(np.eye(2), np.eye(3))


def test_bracket_sign_convention():
    d = 3
    assert np.allclose(bracket(sigma_x(d, 0, 1), sigma_z(d, 0, 1)), 2 * sigma_y(d, 0, 1))


@pytest.mark.parametrize("d", [3, 4, 5])
def test_bracket_table_findings(d):
    lines = {bl.key: bl for bl in verify_bracket_tables(d)}
    assert all(lines[k].passed for k in (1, 2, 3, 5))
    assert lines[4].flagged and "sy(jt)" in lines[4].note and "also fails" not in lines[4].note
    # these printed forms disagree with the computed brackets
    for k in (6, 7, 8):
        assert not lines[k].passed and lines[k].oracle


def test_diagonal_algebra_is_closed():
    assert lie_closure_dim(subalgebra_h(4)) == (4, 0)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_closure_is_full(d):
    start = time.perf_counter()
    dim, iters = lie_closure_dim(subalgebra_h(d) + subalgebra_h_prime(d))
    assert dim == d * d and iters <= 5
    assert time.perf_counter() - start < 30


@pytest.mark.parametrize("d", [3, 4])
def test_closure_invariant_under_conjugation(d):
    u = random_unitary(d, np.random.default_rng(d))
    gens = [u @ g @ u.conj().T for g in subalgebra_h(d) + subalgebra_h_prime(d)]
    assert lie_closure_dim(gens)[0] == d * d


def test_max_iter_exhausted():
    with pytest.raises(ClosureIncompleteError) as info:
        lie_closure_dim(subalgebra_h(4) + subalgebra_h_prime(4), max_iter=0)
    assert info.value.dim < 16


def test_report_lines():
    rep = run_universality(4, samples=500)
    lines = rep.lines()
    assert lines[0] == "CLOSURE d=4 dim=16 expected=16 PASS"
    assert lines[1].startswith("COUNTEREXAMPLE d=4 abs_sum=1.414213562") and lines[1].endswith("OBSTRUCTED")
    assert sum(line.startswith("BRACKET_TABLE") for line in lines) == 8
