import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrit_rg.diagram import (
    ONE,
    TWO,
    Diagram,
    Hadamard,
    compose,
    compose_all,
    dagger_diagram,
    generator,
    tensor_product,
    x_spider,
    z_spider,
)
from qutrit_rg.sampling import random_diagram
from qutrit_rg.semantics import (
    H_MAT,
    KET_OMEGA,
    KET_OMEGA_BAR,
    KET_PLUS,
    OMEGA,
    RG,
    ZERO,
    check_functor_laws,
    evaluate,
    generator_matrix,
)
from qutrit_rg.tensor import dagger, kron, projective_residual, proportional

seeds = st.integers(0, 2**31 - 1)
ket = np.eye(3)


def test_hadamard_columns():
    assert np.allclose(H_MAT @ ket[0], KET_PLUS)
    assert np.allclose(H_MAT @ ket[1], KET_OMEGA)
    assert np.allclose(H_MAT @ ket[2], KET_OMEGA_BAR)
    # unnormalized: H H-dagger is 3 I
    assert np.allclose(H_MAT @ H_MAT.conj().T, 3 * np.eye(3))


def test_z_phase_gate():
    m = generator_matrix(z_spider(1, 1, ONE, TWO))
    assert np.allclose(m, np.diag([1, OMEGA, OMEGA**2]))


def test_z_copy_and_delete():
    d = generator_matrix(z_spider(1, 2))
    assert d.shape == (9, 3)
    for j in range(3):
        assert np.allclose(d @ ket[j], np.kron(ket[j], ket[j]))
    assert np.allclose(generator_matrix(z_spider(0, 1)), KET_PLUS.reshape(3, 1))


def test_x_spider_copies_x_basis():
    d = generator_matrix(x_spider(1, 2))
    for v in (KET_PLUS, KET_OMEGA, KET_OMEGA_BAR):
        assert proportional(d @ v, np.kron(v, v))


def test_x_unit_is_proportional_to_ket_zero():
    assert proportional(generator_matrix(x_spider(0, 1)).ravel(), ket[0])


def test_x_phase_gates_shift_the_basis():
    up = generator_matrix(x_spider(1, 1, TWO, ONE))
    down = generator_matrix(x_spider(1, 1, ONE, TWO))
    for a in range(3):
        assert proportional(up @ ket[a], ket[(a + 1) % 3])
        assert proportional(down @ ket[a], ket[(a - 1) % 3])


def test_dualizer_is_transposition():
    hh = evaluate(compose(generator("h"), generator("h")))
    assert np.allclose(hh, 3 * np.eye(3)[[0, 2, 1]])


def test_zero_functor_erases_phases_only():
    assert np.allclose(generator_matrix(z_spider(1, 1, ONE, TWO), ZERO), np.eye(3))
    assert np.allclose(generator_matrix(Hadamard(), ZERO), H_MAT)


def test_identity_and_swap():
    assert np.allclose(evaluate(Diagram.identity(2)), np.eye(9))
    sw = evaluate(Diagram.swap())
    for a in range(3):
        for b in range(3):
            assert np.allclose(sw @ np.kron(ket[a], ket[b]), np.kron(ket[b], ket[a]))


def test_symbolic_angle_cannot_be_evaluated():
    from qutrit_rg.diagram import Sym

    with pytest.raises(ValueError):
        evaluate(Diagram.single(z_spider(1, 1, Sym.var("a"), 0.0)))


def test_closed_components_dropped_unless_kept():
    loop = compose(generator("eps_x_dag"), generator("eps_z"))
    d = tensor_product(loop, generator("p_z", ONE, 0.0))
    assert proportional(evaluate(d), generator_matrix(z_spider(1, 1, ONE, 0.0)))
    assert evaluate(loop, keep_scalars=True).shape == (1, 1)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_contraction_order_does_not_matter(seed):
    rng = np.random.default_rng(seed)
    f = random_diagram(rng, int(rng.integers(0, 3)), int(rng.integers(0, 3)), max_nodes=6)
    ref = evaluate(f, keep_scalars=True)
    for order in ("sequential", "reverse"):
        assert np.allclose(evaluate(f, keep_scalars=True, order=order), ref)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_functor_respects_structure(seed):
    rng = np.random.default_rng(seed)
    f = random_diagram(rng, 1, 1, max_nodes=4)
    g = random_diagram(rng, 1, 2, max_nodes=4)
    fm, gm = evaluate(f, keep_scalars=True), evaluate(g, keep_scalars=True)
    assert projective_residual(evaluate(compose(f, g), keep_scalars=True), gm @ fm) < 1e-9
    assert projective_residual(evaluate(tensor_product(f, g), keep_scalars=True), kron(fm, gm)) < 1e-9
    assert np.allclose(evaluate(dagger_diagram(f), keep_scalars=True), dagger(fm))


@pytest.mark.parametrize("choice", [RG, ZERO])
def test_functor_law_report(choice):
    report = check_functor_laws(choice, samples=40)
    assert report.passed
    assert all(line.endswith("PASS") for line in report.lines())


def test_euler_composite_by_diagram():
    d = compose_all(*[generator(n, TWO, TWO) for n in ("p_x", "p_z", "p_x")])
    assert projective_residual(evaluate(d), H_MAT) < 1e-12
