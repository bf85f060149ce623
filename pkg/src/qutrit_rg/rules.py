"""Rewrite rules of the red/green calculus and a small rewrite engine.

The rule diagrams are concrete reconstructions (the source presents them only
as pictures). Each one is checked numerically before the library loads:
``evaluate(lhs)`` must be proportional to ``evaluate(rhs)`` under both
interpretations, for every variant in its meta-closure, over a grid of
angles plus random samples.
"""

from __future__ import annotations

import functools
import itertools
import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np

from qutrit_rg.diagram import (
    IN,
    ONE,
    OUT,
    TWO_PI,
    Diagram,
    Hadamard,
    PhasePair,
    Port,
    Spider,
    Sym,
    color_flip,
    compose_all,
    dagger_diagram,
    drop_closed_components,
    generator,
    glue,
    is_isomorphic,
    ordered_ids,
    reduce_angle,
    tensor_all,
    validate,
)
from qutrit_rg.semantics import RG, ZERO, Functor, evaluate
from qutrit_rg.tensor import DEFAULT_TOL, projective_residual

log = logging.getLogger(__name__)

RULE_NAMES = ("S1", "S2", "B1", "B2", "K1", "K2", "H1", "H2", "P1", "P2", "D1", "D2", "D3", "D4")


class RuleSoundnessError(RuntimeError):
    pass


class ApplicationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: Diagram
    rhs: Diagram
    color_flippable: bool = True
    variant: str = "orig"
    description: str = ""
    provenance: str = "reconstructed"

    def __post_init__(self):
        if (self.lhs.n_in, self.lhs.n_out) != (self.rhs.n_in, self.rhs.n_out):
            raise ValueError(f"rule {self.name}: sides have different boundaries")

    @property
    def params(self) -> tuple[str, ...]:
        return tuple(sorted(self.lhs.params() | self.rhs.params()))

    @property
    def label(self) -> str:
        return f"{self.name}/{self.variant}"

    def instantiate(self, bindings: Mapping[str, float]) -> tuple[Diagram, Diagram]:
        return self.lhs.substitute(bindings), self.rhs.substitute(bindings)


# --------------------------------------------------------------------------
# The library

_A, _B, _C, _D = (Sym.var(n) for n in ("a", "b", "c", "d"))


def _g(name: str, alpha=0.0, beta=0.0) -> Diagram:
    return generator(name, alpha, beta)


def _id(n: int = 1) -> Diagram:
    return Diagram.identity(n)


def _z_cup() -> Diagram:
    return compose_all(_g("eps_z_dag"), _g("delta_z"))


def _x_cup() -> Diagram:
    return compose_all(_g("eps_x_dag"), _g("delta_x"))


def _z_cap() -> Diagram:
    return compose_all(_g("delta_z_dag"), _g("eps_z"))


def _hh() -> Diagram:
    return compose_all(_g("h"), _g("h"))


def base_rules() -> list[RewriteRule]:
    """The rule library before closure, Z-coloured where a colour is involved."""
    shift = (ONE, 2 * ONE)  # P_X(2pi/3, 4pi/3) maps |k> to |k-1>
    return [
        RewriteRule(
            "S1",
            compose_all(_g("p_z", _A, _B), _g("p_z", _C, _D)),
            _g("p_z", _A + _C, _B + _D),
            description="spider fusion: phases add componentwise",
        ),
        RewriteRule(
            "S2",
            Diagram.single(Spider("Z", 1, 1)),
            _id(),
            description="a phaseless (1,1) spider is the identity wire",
        ),
        RewriteRule(
            "B1",
            compose_all(_g("eps_x_dag"), _g("delta_z")),
            tensor_all(_g("eps_x_dag"), _g("eps_x_dag")),
            description="the X unit is copied by the Z comultiplication",
        ),
        RewriteRule(
            "B2",
            compose_all(_g("delta_x_dag"), _g("delta_z")),
            compose_all(
                tensor_all(_g("delta_z"), _g("delta_z")),
                tensor_all(_id(), Diagram.swap(), _id()),
                tensor_all(_g("delta_x_dag"), _g("delta_x_dag")),
            ),
            description="bialgebra law between Z copy and X merge",
        ),
        RewriteRule(
            "K1",
            compose_all(_g("p_x", *shift), _g("delta_z")),
            compose_all(_g("delta_z"), tensor_all(_g("p_x", *shift), _g("p_x", *shift))),
            description="a basis shift (X phase) is copied through the Z comultiplication",
        ),
        RewriteRule(
            "K2",
            compose_all(_g("p_x", *shift), _g("p_z", _A, _B)),
            compose_all(_g("p_z", -_B, _A - _B), _g("p_x", *shift)),
            color_flippable=False,
            description="Z phases commute past the basis shift with permuted angles",
        ),
        RewriteRule(
            "H1",
            compose_all(_g("h_dag"), _g("delta_z"), tensor_all(_g("h"), _g("h"))),
            _g("delta_x"),
            description="Hadamard conjugation turns the Z comultiplication into the X one",
        ),
        RewriteRule(
            "H2",
            compose_all(_g("h_dag"), _g("p_z", _A, _B), _g("h")),
            _g("p_x", _A, _B),
            color_flippable=False,
            description="Hadamard conjugation turns a Z phase into the X phase with the same angles",
        ),
        RewriteRule(
            "P1",
            _hh(),
            compose_all(tensor_all(_id(), _x_cup()), tensor_all(_z_cap(), _id())),
            description="the dualizer H;H equals the Z cap bent against the X cup",
        ),
        RewriteRule(
            "P2",
            compose_all(_g("h"), _g("h"), _g("p_z", _A, _B), _g("h"), _g("h")),
            _g("p_z", _B, _A),
            description="conjugating by the dualizer swaps the two phase angles",
        ),
        RewriteRule(
            "D1",
            compose_all(_g("h"), _g("h"), _g("h")),
            _g("h_dag"),
            description="three Hadamards make a Hadamard dagger",
        ),
        RewriteRule(
            "D2",
            _z_cup(),
            compose_all(_x_cup(), tensor_all(_id(), _hh())),
            description="the X cup followed by one dualizer is the Z cup",
        ),
        RewriteRule(
            "D3",
            compose_all(_g("h"), _g("h"), _g("h"), _g("h")),
            _id(),
            description="the dualizer is an involution",
        ),
        RewriteRule(
            "D4",
            compose_all(_g("delta_z"), tensor_all(_g("eps_z"), _id())),
            _id(),
            description="counit law",
        ),
    ]


def closure(rule: RewriteRule) -> list[RewriteRule]:
    """Variants of ``rule`` under dagger and, where allowed, colour flip.

    The dagger turns the diagrams upside down, negates the angles and swaps
    H with H-dagger. Variants isomorphic to an earlier one are dropped.
    """
    return list(_closure(rule))


@functools.lru_cache(maxsize=256)
def _closure(rule: RewriteRule) -> tuple[RewriteRule, ...]:
    variants = [("orig", rule.lhs, rule.rhs), ("dagger", dagger_diagram(rule.lhs), dagger_diagram(rule.rhs))]
    if rule.color_flippable:
        fl, fr = color_flip(rule.lhs), color_flip(rule.rhs)
        variants += [("flip", fl, fr), ("flip+dagger", dagger_diagram(fl), dagger_diagram(fr))]
    out: list[RewriteRule] = []
    for variant, lhs, rhs in variants:
        if any(is_isomorphic(lhs, r.lhs) and is_isomorphic(rhs, r.rhs) for r in out):
            continue
        out.append(RewriteRule(rule.name, lhs, rhs, rule.color_flippable, variant, rule.description, rule.provenance))
    return tuple(out)


def flipped(rule: RewriteRule) -> RewriteRule:
    """The colour-flipped rule, regardless of whether the flip is allowed."""
    return RewriteRule(rule.name, color_flip(rule.lhs), color_flip(rule.rhs), rule.color_flippable, "flip",
                       rule.description, rule.provenance)


# --------------------------------------------------------------------------
# Soundness


@dataclass
class SoundnessReport:
    rule: str
    variant: str
    functor: Functor
    residual: float
    samples: int
    tol: float
    provenance: str = "reconstructed"

    @property
    def passed(self) -> bool:
        return self.residual < self.tol

    def line(self) -> str:
        return (f"RULE {self.rule} {self.variant} {self.functor.value} residual={self.residual:.3e} "
                f"{'PASS' if self.passed else 'FAIL'}")


GRID = (0.0, ONE, 2 * ONE)


def angle_samples(params: tuple[str, ...], n_random: int = 25, seed: int = 0) -> Iterator[dict[str, float]]:
    """The full shorthand grid over all parameters, then ``n_random`` uniform draws."""
    if not params:
        yield {}
        return
    for combo in itertools.product(GRID, repeat=len(params)):
        yield dict(zip(params, combo))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        yield dict(zip(params, rng.uniform(0, TWO_PI, size=len(params)).tolist()))


def soundness_check(rule: RewriteRule, choice: Functor = RG, tol: float = DEFAULT_TOL, n_random: int = 25,
                    seed: int = 0) -> SoundnessReport:
    worst = 0.0
    count = 0
    for bindings in angle_samples(rule.params, n_random, seed):
        lhs, rhs = rule.instantiate(bindings)
        worst = max(worst, projective_residual(evaluate(lhs, choice), evaluate(rhs, choice)))
        count += 1
    return SoundnessReport(rule.name, rule.variant, choice, worst, count, tol, rule.provenance)


@functools.lru_cache(maxsize=1)
def _library() -> tuple[RewriteRule, ...]:
    rules = base_rules()
    for rule in rules:
        for variant in closure(rule):
            report = soundness_check(variant, RG)
            if not report.passed:
                raise RuleSoundnessError(f"rule {variant.label} is unsound: residual {report.residual:.3e}")
    log.debug("rule library loaded: %d rules", len(rules))
    return tuple(rules)


def rule_set() -> list[RewriteRule]:
    """The gated rule library; raises :class:`RuleSoundnessError` if any rule fails."""
    return list(_library())


def get_rule(name: str, variant: str = "orig") -> RewriteRule:
    for rule in rule_set():
        if rule.name == name:
            for v in closure(rule):
                if v.variant == variant:
                    return v
            raise KeyError(f"rule {name} has no variant {variant!r}")
    raise KeyError(f"unknown rule {name!r}")


def sweep(choice: Functor = RG, names: list[str] | None = None, tol: float = DEFAULT_TOL, n_random: int = 25,
          seed: int = 0) -> list[SoundnessReport]:
    """Soundness reports for every closure variant of the selected rules."""
    reports = []
    for rule in rule_set():
        if names and rule.name not in names:
            continue
        for variant in closure(rule):
            reports.append(soundness_check(variant, choice, tol, n_random, seed))
    return reports


# --------------------------------------------------------------------------
# Matching


@dataclass(frozen=True)
class MatchSite:
    rule: RewriteRule
    node_map: tuple[tuple[str, str], ...]  # pattern node -> host node
    boundary: tuple[tuple[Port, Port], ...]  # pattern terminal -> host endpoint outside the image
    bindings: tuple[tuple[str, float], ...]
    host_fingerprint: int

    @property
    def host_nodes(self) -> list[str]:
        return [h for _, h in self.node_map]


def _angle_close(x: float, y: float, tol: float = 1e-9) -> bool:
    d = abs(reduce_angle(x) - reduce_angle(y))
    return min(d, TWO_PI - d) <= tol


def _bind_phase(pattern: PhasePair, host: PhasePair, bindings: dict[str, float]) -> dict[str, float] | None:
    out = dict(bindings)
    pending = []
    for p, h in ((pattern.alpha, host.alpha), (pattern.beta, host.beta)):
        if isinstance(p, Sym):
            if len(p.terms) == 1 and abs(p.terms[0][1]) == 1.0:
                name, coeff = p.terms[0]
                value = reduce_angle(coeff * (h - p.const))
                if name in out and not _angle_close(out[name], value):
                    return None
                out.setdefault(name, value)
            else:
                pending.append((p, h))
        elif not _angle_close(p, h):
            return None
    for p, h in pending:
        if not p.params() <= set(out) or not _angle_close(p.substitute(out), h):
            return None
    return out


def _kind_match(p, h, bindings):
    if isinstance(p, Hadamard):
        return bindings if isinstance(h, Hadamard) and h.dagger == p.dagger else None
    if not isinstance(h, Spider) or (p.color, p.n_in, p.n_out) != (h.color, h.n_in, h.n_out):
        return None
    return _bind_phase(p.phase, h.phase, bindings)


def _port_perms(kind) -> list[tuple[int, ...]]:
    """Port relabellings that leave the node's tensor unchanged."""
    if isinstance(kind, Hadamard) or kind.color == "Z":
        return list(itertools.permutations(range(kind.arity)))
    ins = list(itertools.permutations(range(kind.n_in)))
    outs = list(itertools.permutations(range(kind.n_in, kind.arity)))
    return [a + b for a in ins for b in outs]


def _wire_counts(d: Diagram) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = {}
    for w in d.wires:
        a, b = tuple(w)
        if a[0] in (IN, OUT) or b[0] in (IN, OUT):
            continue
        key = tuple(sorted((a[0], b[0])))
        counts[key] = counts.get(key, 0) + 1
    return counts


def find_matches(host: Diagram, rule: RewriteRule) -> list[MatchSite]:
    """All embeddings of ``rule.lhs`` into ``host``, in canonical host-node order."""
    pattern = rule.lhs
    if not pattern.nodes:
        return []
    p_ids = _search_order(pattern)
    h_ids = ordered_ids(host.nodes)
    p_counts = _wire_counts(pattern)
    h_counts = _wire_counts(host)
    p_partner = pattern.partner_map()
    h_partner = host.partner_map()
    fingerprint = host.fingerprint()
    seen = set()
    sites: list[MatchSite] = []

    def node_search(i, mapping, bindings):
        if i == len(p_ids):
            yield from port_search(dict(mapping), bindings)
            return
        u = p_ids[i]
        for h in h_ids:
            if h in mapping.values():
                continue
            b = _kind_match(pattern.nodes[u], host.nodes[h], bindings)
            if b is None:
                continue
            ok = True
            for v, hv in mapping.items():
                if p_counts.get(tuple(sorted((u, v))), 0) != h_counts.get(tuple(sorted((h, hv))), 0):
                    ok = False
                    break
            if ok and p_counts.get((u, u), 0) != h_counts.get((h, h), 0):
                ok = False
            if ok:
                mapping[u] = h
                yield from node_search(i + 1, mapping, b)
                del mapping[u]

    def port_search(mapping, bindings):
        image = set(mapping.values())
        perms = [_port_perms(pattern.nodes[u]) for u in p_ids]
        for choice in itertools.product(*perms):
            pmap = {u: perm for u, perm in zip(p_ids, choice)}

            def img(port):
                return (mapping[port[0]], pmap[port[0]][port[1]])

            boundary = {}
            ok = True
            for u in p_ids:
                for q in range(pattern.nodes[u].arity):
                    other = p_partner[(u, q)]
                    hp = img((u, q))
                    target = h_partner[hp]
                    if other[0] in (IN, OUT):
                        if target[0] in image:
                            ok = False
                            break
                        boundary[other] = target
                    elif target != img(other):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            key = (tuple(sorted(mapping.items())), tuple(sorted(boundary.items())))
            if key in seen:
                continue
            seen.add(key)
            yield MatchSite(rule, tuple((u, mapping[u]) for u in p_ids), tuple(sorted(boundary.items())),
                            tuple(sorted(bindings.items())), fingerprint)

    sites.extend(_distinct_up_to_symmetry(host, node_search(0, {}, {})))
    sites.sort(key=lambda s: [(_idx(h_ids, h)) for h in sorted(s.host_nodes, key=lambda x: _idx(h_ids, x))])
    return sites


def _distinct_up_to_symmetry(host: Diagram, sites) -> list[MatchSite]:
    """Drop sites that differ only by an automorphism of the pattern.

    Two sites on the same host nodes are redundant when rewriting at either
    gives isomorphic results.
    """
    groups: dict[frozenset, list[MatchSite]] = {}
    for site in sites:
        groups.setdefault(frozenset(site.host_nodes), []).append(site)
    kept: list[MatchSite] = []
    for group in groups.values():
        if len(group) == 1:
            kept.extend(group)
            continue
        results: list[Diagram] = []
        for site in group:
            out = apply(host, site)
            if any(is_isomorphic(out, r, drop_scalars=False) for r in results):
                continue
            results.append(out)
            kept.append(site)
    return kept


def _idx(ids: list[str], nid: str) -> int:
    return ids.index(nid)


def _search_order(pattern: Diagram) -> list[str]:
    """Breadth-first order so that later nodes are adjacent to earlier ones."""
    ids = ordered_ids(pattern.nodes)
    adj = {nid: set() for nid in ids}
    for w in pattern.wires:
        a, b = tuple(w)
        if a[0] in adj and b[0] in adj:
            adj[a[0]].add(b[0])
            adj[b[0]].add(a[0])
    order: list[str] = []
    for start in ids:
        if start in order:
            continue
        queue = [start]
        while queue:
            n = queue.pop(0)
            if n in order:
                continue
            order.append(n)
            queue.extend(sorted(adj[n] - set(order), key=ids.index))
    return order


# --------------------------------------------------------------------------
# Application


def _fresh_ids(taken: set[str], count: int, prefix: str = "r") -> list[str]:
    out = []
    i = 0
    while len(out) < count:
        nid = f"{prefix}{i}"
        if nid not in taken:
            out.append(nid)
            taken.add(nid)
        i += 1
    return out


def apply(host: Diagram, site: MatchSite) -> Diagram:
    """Replace the matched left-hand side by the instantiated right-hand side."""
    if site.host_fingerprint != host.fingerprint():
        raise ApplicationError("match site is stale: the host diagram has changed")
    removed = set(site.host_nodes)
    if not removed <= set(host.nodes):
        raise ApplicationError("match site refers to nodes missing from the host")
    rhs = site.rule.rhs.substitute(dict(site.bindings))
    new_ids = _fresh_ids(set(host.nodes) - removed | set(host.nodes), len(rhs.nodes))
    rename = dict(zip(ordered_ids(rhs.nodes), new_ids))
    nodes = {nid: k for nid, k in host.nodes.items() if nid not in removed}
    nodes.update({rename[nid]: k for nid, k in rhs.nodes.items()})

    def rhs_port(port):
        owner, idx = port
        if owner in (IN, OUT):
            return ("@R" + owner, idx)
        return (rename[owner], idx)

    wires = [w for w in host.wires if not any(p[0] in removed for p in w)]
    wires += [frozenset(rhs_port(p) for p in w) for w in rhs.wires]
    links = []
    for (owner, idx), target in site.boundary:
        wires.append(frozenset({target, ("@L" + owner, idx)}))
        links.append((("@L" + owner, idx), ("@R" + owner, idx)))
    result = Diagram(nodes, glue(wires, links), host.n_in, host.n_out)
    validate(result)
    return result


# --------------------------------------------------------------------------
# Simplification


def _spider_legs_ok_for_identity(k: Spider) -> bool:
    if not k.phase.is_zero(1e-9) or k.arity != 2:
        return False
    return k.color == "Z" or (k.n_in == 1 and k.n_out == 1)


def _remove_pass_through(d: Diagram, node_ids: list[str]) -> Diagram:
    """Delete two-port nodes, joining the wires on either side of each."""
    links = [((nid, 0), (nid, 1)) for nid in node_ids]
    nodes = {nid: k for nid, k in d.nodes.items() if nid not in node_ids}
    return Diagram(nodes, glue(d.wires, links), d.n_in, d.n_out)


def _fuse(d: Diagram, u: str, v: str, pu: int, pv: int) -> Diagram:
    """Fuse spider ``v`` into ``u`` along the wire joining ports ``pu`` and ``pv``."""
    ku, kv = d.nodes[u], d.nodes[v]
    sides = []  # (origin node, origin port, is_input)
    for node, kind, skip in ((u, ku, pu), (v, kv, pv)):
        for p in range(kind.arity):
            if p != skip:
                sides.append((node, p, p < kind.n_in))
    ins = [s for s in sides if s[2]]
    outs = [s for s in sides if not s[2]]
    new_port = {(n, p): i for i, (n, p, _) in enumerate(ins + outs)}
    fused = Spider(ku.color, len(ins), len(outs), ku.phase + kv.phase) if ins or outs else None
    partner = d.partner_map()
    wires = set()
    for w in d.wires:
        if any(p[0] in (u, v) for p in w):
            continue
        wires.add(w)
    loops = []
    for (n, p), i in new_port.items():
        other = partner[(n, p)]
        if other[0] in (u, v):
            if (other[0], other[1]) in ((u, pu), (v, pv)):
                continue
            j = new_port[other]
            if i < j:
                loops.append((i, j))
            continue
        wires.add(frozenset({(u, i), other}))
    nodes = {nid: k for nid, k in d.nodes.items() if nid not in (u, v)}
    if fused is None:
        return Diagram(nodes, wires, d.n_in, d.n_out)
    # remove self-loops that are plain traces of the spider tensor
    removable = [(i, j) for i, j in loops if fused.color == "Z" or (i < len(ins)) != (j < len(ins))]
    keep_loops = [lp for lp in loops if lp not in removable]
    dead = {i for lp in removable for i in lp}
    survivors = [i for i in range(fused.arity) if i not in dead]
    n_in = sum(1 for i in survivors if i < len(ins))
    n_out = len(survivors) - n_in
    renumber = {old: new for new, old in enumerate(survivors)}
    for i, j in keep_loops:
        wires.add(frozenset({(u, i), (u, j)}))
    wires = {frozenset((o, renumber[i]) if o == u else (o, i) for o, i in w) for w in wires}
    if n_in + n_out == 0:
        return Diagram(nodes, wires, d.n_in, d.n_out)
    nodes[u] = Spider(fused.color, n_in, n_out, fused.phase)
    return Diagram(nodes, wires, d.n_in, d.n_out)


def simplify_step(d: Diagram) -> Diagram | None:
    """One simplification step, or ``None`` at a fixpoint. Removes at least one node."""
    pruned = drop_closed_components(d)
    if len(pruned.nodes) < len(d.nodes):
        return pruned
    partner = d.partner_map()
    for nid in ordered_ids(d.nodes):
        k = d.nodes[nid]
        if isinstance(k, Spider) and _spider_legs_ok_for_identity(k):
            return _remove_pass_through(d, [nid])
        if isinstance(k, Hadamard):
            for p in (0, 1):
                other = partner[(nid, p)]
                ok = other[0] not in (IN, OUT, nid)
                if ok and isinstance(d.nodes[other[0]], Hadamard) and d.nodes[other[0]].dagger != k.dagger:
                    return _remove_pass_through(d, [nid, other[0]])
        if isinstance(k, Spider):
            candidates = []
            for p in range(k.arity):
                other = partner[(nid, p)]
                if other[0] in (IN, OUT, nid):
                    continue
                ko = d.nodes[other[0]]
                if not isinstance(ko, Spider) or ko.color != k.color:
                    continue
                if k.color == "X" and (p < k.n_in) == (other[1] < ko.n_in):
                    continue  # X legs fuse only output-to-input
                candidates.append((ordered_ids(d.nodes).index(other[0]), p, other))
            if candidates:
                _, p, other = min(candidates)
                return _fuse(d, nid, other[0], p, other[1])
    return None


def simplify(d: Diagram, *, return_steps: bool = False):
    """Rewrite to a fixpoint of fusion, identity removal, H/H-dagger cancellation
    and closed-component deletion. Each step strictly lowers the node count."""
    validate(d)
    steps = 0
    while True:
        nxt = simplify_step(d)
        if nxt is None:
            break
        assert len(nxt.nodes) < len(d.nodes)
        d = nxt
        steps += 1
    return (d, steps) if return_steps else d


def rewrite_once(host: Diagram, names: list[str] | None = None) -> Diagram | None:
    """Apply the first match (canonical order) of the first applicable rule."""
    for rule in rule_set():
        if names and rule.name not in names:
            continue
        for variant in closure(rule):
            sites = find_matches(host, variant)
            if sites:
                return apply(host, sites[0])
    return None

