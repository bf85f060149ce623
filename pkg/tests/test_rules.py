import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrit_rg.diagram import (
    ONE,
    TWO,
    Diagram,
    compose,
    compose_all,
    generator,
    is_isomorphic,
    tensor_product,
    validate,
    z_spider,
)
from qutrit_rg.rules import (
    RULE_NAMES,
    ApplicationError,
    angle_samples,
    apply,
    closure,
    find_matches,
    flipped,
    get_rule,
    rewrite_once,
    rule_set,
    simplify,
    soundness_check,
    sweep,
)
from qutrit_rg.sampling import random_circuit, random_diagram
from qutrit_rg.semantics import RG, ZERO, evaluate, generator_matrix
from qutrit_rg.tensor import projective_residual, proportional

seeds = st.integers(0, 2**31 - 1)


def same_map(a: Diagram, b: Diagram) -> bool:
    return projective_residual(evaluate(a, keep_scalars=True), evaluate(b, keep_scalars=True)) < 1e-9


def test_library_names():
    assert tuple(r.name for r in rule_set()) == RULE_NAMES


def test_angle_samples_cover_grid():
    samples = list(angle_samples(("a", "b"), n_random=25))
    assert len(samples) == 9 + 25
    assert {"a": 0.0, "b": 0.0} in samples


@pytest.mark.parametrize("choice", [RG, ZERO])
def test_every_variant_sound(choice):
    reports = sweep(choice)
    assert reports and all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


@pytest.mark.parametrize("name", ["K2", "H2"])
def test_non_flippable_rules_fail_when_flipped(name):
    rule = get_rule(name)
    assert not rule.color_flippable
    assert not soundness_check(flipped(rule), RG).passed


def test_closure_variants():
    variants = {v.variant for v in closure(get_rule("K2"))}
    assert variants <= {"orig", "dagger"}
    # variants isomorphic to earlier ones are dropped
    for rule in rule_set():
        vs = closure(rule)
        assert vs[0].variant == "orig"
        for i, a in enumerate(vs):
            for b in vs[i + 1:]:
                assert not (is_isomorphic(a.lhs, b.lhs) and is_isomorphic(a.rhs, b.rhs))


def test_get_rule_errors():
    with pytest.raises(KeyError):
        get_rule("Q7")


def test_spider_fusion_matches_and_applies():
    p, q = generator("p_z", ONE, TWO), generator("p_z", TWO, 0.0)
    host = tensor_product(compose(p, q), compose(q, p))
    sites = find_matches(host, get_rule("S1"))
    assert len(sites) == 2
    out = apply(host, sites[0])
    assert len(out.nodes) == 3
    assert same_map(host, out)


def test_match_binds_angles():
    host = compose(generator("p_z", ONE, 0.0), generator("p_z", ONE, ONE))
    (site,) = find_matches(host, get_rule("S1"))
    out = apply(host, site)
    (kind,) = out.nodes.values()
    assert kind.phase.alpha == pytest.approx(TWO)
    assert kind.phase.beta == pytest.approx(ONE)


def test_stale_site_rejected():
    host = compose(generator("p_z", ONE, 0.0), generator("p_z", ONE, ONE))
    (site,) = find_matches(host, get_rule("S1"))
    changed = compose(host, generator("h"))
    with pytest.raises(ApplicationError):
        apply(changed, site)


def test_no_match_in_wrong_colour():
    host = compose(generator("p_x", ONE, 0.0), generator("p_x", ONE, ONE))
    assert find_matches(host, get_rule("S1")) == []
    assert find_matches(host, get_rule("S1", "flip"))


def test_matches_are_in_host_order():
    p = generator("p_z", ONE, 0.0)
    host = compose_all(p, p, p)
    sites = find_matches(host, get_rule("S1"))
    firsts = [min(s.host_nodes) for s in sites]
    assert firsts == sorted(firsts)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_rewriting_preserves_semantics(seed):
    rng = np.random.default_rng(seed)
    host = random_circuit(rng, width=int(rng.integers(1, 3)), max_nodes=6)
    for rule in rule_set():
        for variant in closure(rule):
            for site in find_matches(host, variant)[:2]:
                out = apply(host, site)
                validate(out)
                assert same_map(host, out), variant.label


def test_rewrite_once():
    host = compose_all(generator("h"), generator("h"), generator("h"))
    out = rewrite_once(host)
    assert out is not None and same_map(host, out)
    assert rewrite_once(Diagram.identity(1)) is None


def test_simplify_fuses_and_cancels():
    d = compose_all(generator("p_z", ONE, 0.0), generator("p_z", ONE, ONE), generator("h"), generator("h_dag"))
    out, steps = simplify(d, return_steps=True)
    assert len(out.nodes) == 1 and steps <= len(d.nodes)
    (kind,) = out.nodes.values()
    assert proportional(generator_matrix(kind), evaluate(d))


def test_simplify_removes_phaseless_wire():
    d = Diagram.single(z_spider(1, 1))
    assert is_isomorphic(simplify(d), Diagram.identity(1))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_simplify_terminates_and_preserves(seed):
    rng = np.random.default_rng(seed)
    d = random_diagram(rng, int(rng.integers(0, 3)), int(rng.integers(0, 3)), max_nodes=6)
    out, steps = simplify(d, return_steps=True)
    assert steps <= len(d.nodes)
    validate(out)
    assert projective_residual(evaluate(d), evaluate(out)) < 1e-9
    # a fixpoint: simplifying again does nothing
    assert simplify(out, return_steps=True)[1] == 0
