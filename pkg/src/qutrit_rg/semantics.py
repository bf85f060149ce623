"""Interpretation of diagrams as matrices by tensor-network contraction.

Two interpretations are provided: ``RG``, the standard one, and ``ZERO``, which
agrees with ``RG`` except that every spider phase is erased. Results are
matrices of shape ``(3**n_out, 3**n_in)``; closed components are scalars and
are dropped unless ``keep_scalars`` is set.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from qutrit_rg.diagram import (
    IN,
    OUT,
    Diagram,
    Hadamard,
    NodeKind,
    Spider,
    compose,
    dagger_diagram,
    drop_closed_components,
    tensor_product,
    validate,
)
from qutrit_rg.tensor import DEFAULT_TOL, dagger, kron, projective_residual

OMEGA = np.exp(2j * np.pi / 3)
OMEGA_BAR = OMEGA.conjugate()

KET_PLUS = np.array([1, 1, 1], dtype=complex)
KET_OMEGA = np.array([1, OMEGA, OMEGA_BAR], dtype=complex)
KET_OMEGA_BAR = np.array([1, OMEGA_BAR, OMEGA], dtype=complex)

# H = |+><0| + |w><1| + |w̄><2|, unnormalized
H_MAT = np.column_stack([KET_PLUS, KET_OMEGA, KET_OMEGA_BAR])
H_DAG_MAT = H_MAT.conj().T


class Functor(enum.Enum):
    RG = "rg"
    ZERO = "zero"


RG = Functor.RG
ZERO = Functor.ZERO


def _spider_tensor(arity: int, phases: tuple[complex, complex, complex]) -> np.ndarray:
    t = np.zeros((3,) * arity, dtype=complex)
    for j in range(3):
        t[(j,) * arity] = phases[j]
    return t


@functools.lru_cache(maxsize=512)
def node_tensor(kind: NodeKind, choice: Functor = RG) -> np.ndarray:
    """Tensor of a node with one axis per port, in port order."""
    if isinstance(kind, Hadamard):
        # H is symmetric, so axis order (in, out) needs no transpose
        t = H_DAG_MAT if kind.dagger else H_MAT
        return t.copy()
    if kind.phase.symbolic:
        raise ValueError("cannot evaluate a spider with an unbound symbolic angle")
    if choice is ZERO:
        phases = (1.0, 1.0, 1.0)
    else:
        phases = (1.0, np.exp(1j * kind.phase.alpha), np.exp(1j * kind.phase.beta))
    t = _spider_tensor(kind.arity, phases)
    if kind.color == "X":
        for axis in range(kind.arity):
            # outputs get H, inputs get H-dagger (whose index form is conj(H))
            m = H_MAT if axis >= kind.n_in else H_MAT.conj()
            t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    t.setflags(write=False)
    return t


def generator_matrix(kind: NodeKind, choice: Functor = RG) -> np.ndarray:
    """Matrix of a single node: rows index outputs, columns inputs."""
    t = node_tensor(kind, choice)
    perm = list(range(kind.n_in, kind.arity)) + list(range(kind.n_in))
    return np.transpose(t, perm).reshape(3**kind.n_out, 3**kind.n_in)


# --------------------------------------------------------------------------
# Contraction


@dataclass
class _Term:
    tensor: np.ndarray
    labels: list[int]


def _einsum(terms: list[_Term], keep: list[int]) -> _Term:
    """Contract several terms, keeping ``keep`` labels open (in that order)."""
    local: dict[int, int] = {}

    def loc(label):
        if label not in local:
            local[label] = len(local)
        return local[label]

    args = []
    for t in terms:
        args += [t.tensor, [loc(x) for x in t.labels]]
    out = [loc(x) for x in keep]
    return _Term(np.einsum(*args, out), list(keep))


def _contract(terms: list[_Term], boundary: list[int], order: str) -> np.ndarray:
    boundary_set = set(boundary)
    # traces first: labels repeated within one term
    fixed = []
    for t in terms:
        if len(set(t.labels)) != len(t.labels):
            counts: dict[int, int] = {}
            for x in t.labels:
                counts[x] = counts.get(x, 0) + 1
            keep = [x for x in dict.fromkeys(t.labels) if counts[x] == 1]
            t = _einsum([t], keep)
        fixed.append(t)
    terms = fixed
    if not terms:
        return np.ones(())
    while len(terms) > 1:
        i, j = _pick_pair(terms, boundary_set, order)
        a, b = terms[i], terms[j]
        rest = [t.labels for k, t in enumerate(terms) if k not in (i, j)]
        external = set(boundary_set)
        for labels in rest:
            external.update(labels)
        keep = [x for x in dict.fromkeys(a.labels + b.labels) if x in external]
        merged = _einsum([a, b], keep)
        terms = [t for k, t in enumerate(terms) if k not in (i, j)] + [merged]
    last = terms[0]
    return _einsum([last], boundary).tensor if boundary else _einsum([last], []).tensor


def _pick_pair(terms: list[_Term], boundary: set[int], order: str) -> tuple[int, int]:
    if order == "sequential":
        return 0, 1
    if order == "reverse":
        return len(terms) - 2, len(terms) - 1
    best = None
    for i in range(len(terms)):
        li = set(terms[i].labels)
        for j in range(i + 1, len(terms)):
            lj = set(terms[j].labels)
            shared = li & lj
            # greedy: smallest intermediate, preferring pairs that share an index
            size = len(li ^ lj)
            key = (0 if shared else 1, size, i, j)
            if best is None or key < best:
                best = key
    return best[2], best[3]


def evaluate(f: Diagram, choice: Functor = RG, *, keep_scalars: bool = False, order: str = "greedy") -> np.ndarray:
    """Matrix of ``f`` under the chosen interpretation.

    ``order`` selects the pairwise contraction schedule: ``"greedy"`` (smallest
    intermediate first), ``"sequential"`` or ``"reverse"``; all agree.
    """
    validate(f)
    if not keep_scalars:
        f = drop_closed_components(f)
    labels: dict[frozenset, int] = {}
    terms: list[_Term] = []
    terminal_label: dict[tuple[str, int], int] = {}
    next_label = 0
    for w in sorted(f.wires, key=lambda w: sorted(map(str, w))):
        a, b = tuple(w)
        if a[0] in (IN, OUT) and b[0] in (IN, OUT):
            la, lb = next_label, next_label + 1
            next_label += 2
            terminal_label[a] = la
            terminal_label[b] = lb
            terms.append(_Term(np.eye(3, dtype=complex), [la, lb]))
            continue
        labels[w] = next_label
        for p in (a, b):
            if p[0] in (IN, OUT):
                terminal_label[p] = next_label
        next_label += 1
    partner_wire = {}
    for w in f.wires:
        for p in w:
            partner_wire[p] = w
    for nid in f.node_ids():
        kind = f.nodes[nid]
        t = node_tensor(kind, choice)
        terms.append(_Term(t, [labels[partner_wire[(nid, p)]] for p in range(kind.arity)]))
    boundary = [terminal_label[(OUT, k)] for k in range(f.n_out)] + [terminal_label[(IN, k)] for k in range(f.n_in)]
    result = _contract(terms, boundary, order)
    return np.asarray(result, dtype=complex).reshape(3**f.n_out, 3**f.n_in)


# --------------------------------------------------------------------------
# Functor laws


@dataclass
class LawResult:
    name: str
    worst_residual: float
    trials: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.worst_residual < self.tol


@dataclass
class FunctorLawReport:
    choice: Functor
    laws: list[LawResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(law.passed for law in self.laws)

    def lines(self) -> list[str]:
        return [
            f"LAW {law.name} {self.choice.value} trials={law.trials} residual={law.worst_residual:.3e} "
            f"{'PASS' if law.passed else 'FAIL'}"
            for law in self.laws
        ]


def check_functor_laws(choice: Functor = RG, samples: int = 100, seed: int = 0, tol: float = DEFAULT_TOL,
                       max_nodes: int = 5) -> FunctorLawReport:
    """Check composition, tensor and dagger compatibility on random diagrams."""
    from qutrit_rg.sampling import random_diagram

    rng = np.random.default_rng(seed)
    worst = {"compose": 0.0, "tensor": 0.0, "dagger": 0.0}
    for _ in range(samples):
        m, k, n = (int(x) for x in rng.integers(0, 3, size=3))
        f = random_diagram(rng, m, k, max_nodes=max_nodes)
        g = random_diagram(rng, k, n, max_nodes=max_nodes)
        fm = evaluate(f, choice, keep_scalars=True)
        gm = evaluate(g, choice, keep_scalars=True)
        worst["compose"] = max(worst["compose"],
                               projective_residual(evaluate(compose(f, g), choice, keep_scalars=True), gm @ fm))
        worst["tensor"] = max(worst["tensor"],
                              projective_residual(evaluate(tensor_product(f, g), choice, keep_scalars=True), kron(fm, gm)))
        # the dagger law holds exactly, not just projectively
        dm = evaluate(dagger_diagram(f), choice, keep_scalars=True)
        scale = max(1.0, float(np.max(np.abs(fm))))
        worst["dagger"] = max(worst["dagger"], float(np.max(np.abs(dm - dagger(fm)), initial=0.0)) / scale)
    report = FunctorLawReport(choice)
    for name in ("compose", "tensor", "dagger"):
        report.laws.append(LawResult(name, worst[name], samples, tol))
    return report
