"""Open-graph diagrams built from the red/green qutrit generators.

A diagram is a set of nodes (spiders and Hadamard boxes), each with numbered
ports, plus wires pairing up ports. Boundary wires end on *terminals*:
``(IN, k)`` is the k-th input and ``(OUT, k)`` the k-th output. Every node port
and every terminal lies on exactly one wire, so a bare identity wire is simply
the wire ``{(IN, 0), (OUT, 0)}``.

Port numbering: a node with ``n_in`` inputs and ``n_out`` outputs has ports
``0 .. n_in-1`` (inputs) followed by ``n_in .. n_in+n_out-1`` (outputs).
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path

import networkx as nx

TWO_PI = 2 * math.pi
ONE = 2 * math.pi / 3
TWO = 4 * math.pi / 3

IN = "@in"
OUT = "@out"

Port = tuple[str, int]
Wire = frozenset  # frozenset of two Ports


class DiagramError(ValueError):
    """A diagram violates a structural invariant."""


class CompositionError(DiagramError):
    pass


class DiagramParseError(DiagramError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# --------------------------------------------------------------------------
# Angles


@dataclass(frozen=True)
class Sym:
    """A linear angle expression ``const + sum(coeff * param)``.

    Only rule templates carry symbolic angles; concrete diagrams hold floats.
    """

    terms: tuple[tuple[str, float], ...] = ()
    const: float = 0.0

    @classmethod
    def var(cls, name: str) -> Sym:
        return cls(((name, 1.0),))

    def _merge(self, other: Sym | float, sign: float) -> Sym:
        if not isinstance(other, Sym):
            return Sym(self.terms, self.const + sign * float(other))
        coeffs = dict(self.terms)
        for name, c in other.terms:
            coeffs[name] = coeffs.get(name, 0.0) + sign * c
        terms = tuple(sorted((n, c) for n, c in coeffs.items() if c != 0.0))
        return Sym(terms, self.const + sign * other.const)

    def __add__(self, other):
        return self._merge(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._merge(other, -1.0)

    def __rsub__(self, other):
        return (-self)._merge(other, 1.0)

    def __neg__(self):
        return Sym(tuple((n, -c) for n, c in self.terms), -self.const)

    def params(self) -> set[str]:
        return {n for n, _ in self.terms}

    def substitute(self, bindings: Mapping[str, float]) -> float:
        return reduce_angle(self.const + sum(c * bindings[n] for n, c in self.terms))

    def __str__(self):
        parts = [f"{'-' if c < 0 else '+'}{'' if abs(c) == 1 else abs(c)}{n}" for n, c in self.terms]
        if self.const:
            parts.append(f"+{self.const:.6g}")
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text


Angle = float | Sym


def reduce_angle(x: float) -> float:
    """Reduce an angle to ``[0, 2pi)``, snapping values within 1e-12 of 2pi to 0."""
    r = math.fmod(float(x), TWO_PI)
    if r < 0:
        r += TWO_PI
    if TWO_PI - r < 1e-12:
        r = 0.0
    return r


_PI_RE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?)?\*?pi(?:/(\d+(?:\.\d*)?))?$")


def parse_angle(token: str | float) -> float:
    """Parse radians, multiples of pi such as ``4pi/3``, or the shorthand
    ``@1`` (2pi/3) and ``@2`` (4pi/3)."""
    if isinstance(token, (int, float)):
        return reduce_angle(token)
    token = token.strip()
    if token.startswith("@"):
        try:
            k = int(token[1:])
        except ValueError:
            raise ValueError(f"bad shorthand angle {token!r}") from None
        return reduce_angle(k * ONE)
    m = _PI_RE.match(token)
    if m:
        sign, num, den = m.groups()
        value = (float(num) if num else 1.0) * math.pi / (float(den) if den else 1.0)
        return reduce_angle(-value if sign == "-" else value)
    return reduce_angle(float(token))


def format_angle(x: float) -> str:
    """Grid angles print as ``0``, ``@1`` and ``@2``; anything else as a float."""
    r = reduce_angle(x)
    for value, text in ((0.0, "0"), (ONE, "@1"), (TWO, "@2"), (TWO_PI, "0")):
        if abs(r - value) <= 1e-12:
            return text
    return repr(x)


def _norm(a: Angle) -> Angle:
    return a if isinstance(a, Sym) else reduce_angle(a)


@dataclass(frozen=True)
class PhasePair:
    """The two angles decorating a qutrit spider, stored reduced mod 2pi."""

    alpha: Angle = 0.0
    beta: Angle = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _norm(self.alpha))
        object.__setattr__(self, "beta", _norm(self.beta))

    @classmethod
    def shorthand(cls, a: int, b: int) -> PhasePair:
        """``PhasePair.shorthand(1, 2)`` is ``(2pi/3, 4pi/3)``."""
        return cls(a * ONE, b * ONE)

    def __add__(self, other: PhasePair) -> PhasePair:
        return PhasePair(self.alpha + other.alpha, self.beta + other.beta)

    def __neg__(self) -> PhasePair:
        return PhasePair(-self.alpha, -self.beta)

    @property
    def symbolic(self) -> bool:
        return isinstance(self.alpha, Sym) or isinstance(self.beta, Sym)

    def is_zero(self, tol: float = 1e-12) -> bool:
        if self.symbolic:
            return False
        return all(min(a, TWO_PI - a) <= tol for a in (self.alpha, self.beta))

    def substitute(self, bindings: Mapping[str, float]) -> PhasePair:
        if not self.symbolic:
            return self
        return PhasePair(*(a.substitute(bindings) if isinstance(a, Sym) else a for a in (self.alpha, self.beta)))

    def params(self) -> set[str]:
        return {n for a in (self.alpha, self.beta) if isinstance(a, Sym) for n in a.params()}

    def label(self) -> tuple:
        return tuple(str(a) if isinstance(a, Sym) else round(reduce_angle(round(a, 9)), 9) for a in (self.alpha, self.beta))


# --------------------------------------------------------------------------
# Node kinds


@dataclass(frozen=True)
class Spider:
    color: str  # "Z" (green) or "X" (red)
    n_in: int
    n_out: int
    phase: PhasePair = field(default_factory=PhasePair)

    def __post_init__(self):
        if self.color not in ("Z", "X"):
            raise DiagramError(f"spider color must be 'Z' or 'X', got {self.color!r}")
        if self.n_in < 0 or self.n_out < 0 or self.n_in + self.n_out < 1:
            raise DiagramError(f"bad spider arity ({self.n_in}, {self.n_out})")

    @property
    def arity(self) -> int:
        return self.n_in + self.n_out

    def port_class(self, port: int) -> str:
        # Z legs are interchangeable; X legs only within one side.
        if self.color == "Z":
            return "leg"
        return "in" if port < self.n_in else "out"

    def label(self) -> tuple:
        return (self.color, self.n_in, self.n_out, self.phase.label())


@dataclass(frozen=True)
class Hadamard:
    dagger: bool = False

    n_in = 1
    n_out = 1
    arity = 2

    def port_class(self, port: int) -> str:
        return "leg"  # the Hadamard matrix is symmetric

    def label(self) -> tuple:
        return ("Hdag" if self.dagger else "H",)


NodeKind = Spider | Hadamard


def z_spider(n_in: int, n_out: int, alpha: Angle = 0.0, beta: Angle = 0.0) -> Spider:
    return Spider("Z", n_in, n_out, PhasePair(alpha, beta))


def x_spider(n_in: int, n_out: int, alpha: Angle = 0.0, beta: Angle = 0.0) -> Spider:
    return Spider("X", n_in, n_out, PhasePair(alpha, beta))


# --------------------------------------------------------------------------
# Diagrams


def _natural_key(node_id: str):
    return [(0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.split(r"(\d+)", node_id) if t]


def ordered_ids(ids: Iterable[str]) -> list[str]:
    """Canonical node order: natural sort of the identifiers."""
    return sorted(ids, key=_natural_key)


@dataclass(frozen=True, eq=True)
class Diagram:
    nodes: Mapping[str, NodeKind]
    wires: frozenset
    n_in: int
    n_out: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "wires", frozenset(frozenset(w) for w in self.wires))

    def __hash__(self):
        return hash((tuple(sorted(self.nodes.items(), key=lambda kv: kv[0])), self.wires, self.n_in, self.n_out))

    # construction -------------------------------------------------------

    @classmethod
    def identity(cls, n: int = 1) -> Diagram:
        return cls({}, {frozenset({(IN, k), (OUT, k)}) for k in range(n)}, n, n)

    @classmethod
    def empty(cls) -> Diagram:
        return cls({}, frozenset(), 0, 0)

    @classmethod
    def single(cls, kind: NodeKind, node_id: str = "n0") -> Diagram:
        """One node with its inputs and outputs on the boundary in port order."""
        wires = [frozenset({(IN, i), (node_id, i)}) for i in range(kind.n_in)]
        wires += [frozenset({(node_id, kind.n_in + j), (OUT, j)}) for j in range(kind.n_out)]
        return cls({node_id: kind}, wires, kind.n_in, kind.n_out)

    @classmethod
    def swap(cls) -> Diagram:
        return cls({}, {frozenset({(IN, 0), (OUT, 1)}), frozenset({(IN, 1), (OUT, 0)})}, 2, 2)

    @classmethod
    def cup(cls) -> Diagram:
        return cls({}, {frozenset({(OUT, 0), (OUT, 1)})}, 0, 2)

    @classmethod
    def cap(cls) -> Diagram:
        return cls({}, {frozenset({(IN, 0), (IN, 1)})}, 2, 0)

    # queries ------------------------------------------------------------

    def ports(self) -> Iterator[Port]:
        """Every port that must be wired: node ports, then terminals."""
        for nid in ordered_ids(self.nodes):
            for p in range(self.nodes[nid].arity):
                yield (nid, p)
        for k in range(self.n_in):
            yield (IN, k)
        for k in range(self.n_out):
            yield (OUT, k)

    def partner_map(self) -> dict[Port, Port]:
        partner = {}
        for w in self.wires:
            a, b = tuple(w)
            partner[a] = b
            partner[b] = a
        return partner

    def node_ids(self) -> list[str]:
        return ordered_ids(self.nodes)

    def fingerprint(self) -> int:
        return hash(self)

    def substitute(self, bindings: Mapping[str, float]) -> Diagram:
        nodes = {
            nid: replace(k, phase=k.phase.substitute(bindings)) if isinstance(k, Spider) else k
            for nid, k in self.nodes.items()
        }
        return Diagram(nodes, self.wires, self.n_in, self.n_out)

    def params(self) -> set[str]:
        return {p for k in self.nodes.values() if isinstance(k, Spider) for p in k.phase.params()}

    def __repr__(self):
        return f"Diagram({self.n_in}->{self.n_out}, nodes={len(self.nodes)}, wires={len(self.wires)})"


def generator(name: str, alpha: Angle = 0.0, beta: Angle = 0.0) -> Diagram:
    """One of the twelve named generators, e.g. ``delta_z``, ``eps_x_dag``, ``p_x``, ``h``."""
    table = {
        "delta_z": z_spider(1, 2),
        "delta_z_dag": z_spider(2, 1),
        "eps_z": z_spider(1, 0),
        "eps_z_dag": z_spider(0, 1),
        "p_z": z_spider(1, 1, alpha, beta),
        "delta_x": x_spider(1, 2),
        "delta_x_dag": x_spider(2, 1),
        "eps_x": x_spider(1, 0),
        "eps_x_dag": x_spider(0, 1),
        "p_x": x_spider(1, 1, alpha, beta),
        "h": Hadamard(False),
        "h_dag": Hadamard(True),
    }
    try:
        kind = table[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}") from None
    return Diagram.single(kind)


GENERATOR_NAMES = (
    "delta_z", "delta_z_dag", "eps_z", "eps_z_dag", "p_z", "h",
    "delta_x", "delta_x_dag", "eps_x", "eps_x_dag", "p_x", "h_dag",
)


# --------------------------------------------------------------------------
# Well-formedness


def validate(f: Diagram) -> None:
    """Raise :class:`DiagramError` describing the first violated invariant."""
    for nid, kind in f.nodes.items():
        if nid.startswith("@") or not nid:
            raise DiagramError(f"invalid node id {nid!r}")
        if not isinstance(kind, (Spider, Hadamard)):
            raise DiagramError(f"node {nid} has unknown kind {kind!r}")
    seen: dict[Port, frozenset] = {}
    for w in f.wires:
        if len(w) != 2:
            raise DiagramError(f"wire {sorted(w)} connects a port to itself")
        for port in w:
            owner, idx = port
            if owner in (IN, OUT):
                limit = f.n_in if owner == IN else f.n_out
            elif owner in f.nodes:
                limit = f.nodes[owner].arity
            else:
                raise DiagramError(f"wire {_fmt_wire(w)} references unknown node {owner!r}")
            if not 0 <= idx < limit:
                raise DiagramError(f"port {_fmt_port(port)} is out of range")
            if port in seen:
                raise DiagramError(f"port {_fmt_port(port)} appears on more than one wire")
            seen[port] = w
    for port in f.ports():
        if port not in seen:
            raise DiagramError(f"port {_fmt_port(port)} is dangling")


def is_well_formed(f: Diagram) -> bool:
    try:
        validate(f)
    except DiagramError:
        return False
    return True


def _fmt_port(port: Port) -> str:
    owner, idx = port
    if owner == IN:
        return f"in.{idx}"
    if owner == OUT:
        return f"out.{idx}"
    return f"{owner}.{idx}"


def _fmt_wire(w) -> str:
    return " -- ".join(sorted(_fmt_port(p) for p in w))


# --------------------------------------------------------------------------
# Splicing


def glue(wires: Iterable[frozenset], identify: Iterable[tuple[Port, Port]]) -> set[frozenset]:
    """Join wires through identified port pairs.

    Each pair ``(p, q)`` says that ``p`` and ``q`` are the same point; both
    disappear and the wires ending on them are joined. Loops made only of
    glued points vanish.
    """
    partner: dict[Port, Port] = {}
    for w in wires:
        a, b = tuple(w)
        partner[a] = b
        partner[b] = a
    glued: dict[Port, Port] = {}
    for p, q in identify:
        glued[p] = q
        glued[q] = p
    out: set[frozenset] = set()
    done: set[Port] = set()
    for start in partner:
        if start in glued or start in done:
            continue
        cur = partner[start]
        while cur in glued:
            cur = partner[glued[cur]]
        done.add(start)
        done.add(cur)
        out.add(frozenset({start, cur}))
    return out


def _rename(f: Diagram, mapping: Mapping[str, str]) -> Diagram:
    def mp(port):
        owner, idx = port
        return (mapping.get(owner, owner), idx)

    nodes = {mapping.get(nid, nid): k for nid, k in f.nodes.items()}
    wires = {frozenset(mp(p) for p in w) for w in f.wires}
    return Diagram(nodes, wires, f.n_in, f.n_out)


def _disjoin(f: Diagram, g: Diagram) -> Diagram:
    """Rename the nodes of ``g`` that clash with those of ``f``."""
    taken = set(f.nodes)
    mapping = {}
    for nid in g.node_ids():
        new = nid
        while new in taken or (new != nid and new in g.nodes):
            new += "'"
        mapping[nid] = new
        taken.add(new)
    return _rename(g, mapping)


def compose(f: Diagram, g: Diagram) -> Diagram:
    """Plug the outputs of ``f`` into the inputs of ``g`` (``f`` first)."""
    if f.n_out != g.n_in:
        raise CompositionError(f"cannot compose {f.n_in}->{f.n_out} with {g.n_in}->{g.n_out}")
    g = _disjoin(f, g)
    mid = "@mid"
    f_wires = [frozenset((mid, p[1]) if p[0] == OUT else p for p in w) for w in f.wires]
    g_wires = [frozenset((mid + "'", p[1]) if p[0] == IN else p for p in w) for w in g.wires]
    wires = glue(f_wires + g_wires, [((mid, k), (mid + "'", k)) for k in range(f.n_out)])
    return Diagram({**f.nodes, **g.nodes}, wires, f.n_in, g.n_out)


def compose_all(*diagrams: Diagram) -> Diagram:
    out = diagrams[0]
    for d in diagrams[1:]:
        out = compose(out, d)
    return out


def tensor_product(f: Diagram, g: Diagram) -> Diagram:
    """Place ``f`` and ``g`` side by side; ``f`` takes the first boundary slots."""
    g = _disjoin(f, g)

    def shift(port):
        owner, idx = port
        if owner == IN:
            return (IN, idx + f.n_in)
        if owner == OUT:
            return (OUT, idx + f.n_out)
        return port

    wires = set(f.wires) | {frozenset(shift(p) for p in w) for w in g.wires}
    return Diagram({**f.nodes, **g.nodes}, wires, f.n_in + g.n_in, f.n_out + g.n_out)


def tensor_all(*diagrams: Diagram) -> Diagram:
    out = diagrams[0]
    for d in diagrams[1:]:
        out = tensor_product(out, d)
    return out


def dagger_diagram(f: Diagram) -> Diagram:
    """Turn the diagram upside down, negate every angle and swap H with H-dagger."""
    nodes = {}
    for nid, k in f.nodes.items():
        if isinstance(k, Spider):
            nodes[nid] = Spider(k.color, k.n_out, k.n_in, -k.phase)
        else:
            nodes[nid] = Hadamard(not k.dagger)

    def mp(port):
        owner, idx = port
        if owner == IN:
            return (OUT, idx)
        if owner == OUT:
            return (IN, idx)
        k = f.nodes[owner]
        if idx < k.n_in:
            return (owner, k.n_out + idx)
        return (owner, idx - k.n_in)

    wires = {frozenset(mp(p) for p in w) for w in f.wires}
    return Diagram(nodes, wires, f.n_out, f.n_in)


def color_flip(f: Diagram) -> Diagram:
    nodes = {
        nid: replace(k, color="X" if k.color == "Z" else "Z") if isinstance(k, Spider) else k
        for nid, k in f.nodes.items()
    }
    return Diagram(nodes, f.wires, f.n_in, f.n_out)


def components(f: Diagram) -> list[set[str]]:
    """Connected components as sets of owners (node ids and terminal markers)."""
    graph = nx.Graph()
    for nid in f.nodes:
        graph.add_node(nid)
    for w in f.wires:
        a, b = (_owner_key(p) for p in w)
        graph.add_edge(a, b)
    return [set(c) for c in nx.connected_components(graph)]


def _owner_key(port: Port) -> str:
    owner, idx = port
    return f"{owner}{idx}" if owner in (IN, OUT) else owner


def drop_closed_components(f: Diagram) -> Diagram:
    """Delete components touching neither an input nor an output (scalars)."""
    keep = set()
    for comp in components(f):
        if any(o.startswith("@") for o in comp):
            keep |= comp
    nodes = {nid: k for nid, k in f.nodes.items() if nid in keep}
    wires = {w for w in f.wires if all(p[0] in (IN, OUT) or p[0] in nodes for p in w)}
    return Diagram(nodes, wires, f.n_in, f.n_out)


# --------------------------------------------------------------------------
# Isomorphism


def _port_graph(f: Diagram) -> nx.Graph:
    graph = nx.Graph()
    for nid, kind in f.nodes.items():
        graph.add_node(("node", nid), label=("node",) + kind.label())
        for p in range(kind.arity):
            graph.add_node(("port", nid, p), label=("port", kind.port_class(p)))
            graph.add_edge(("node", nid), ("port", nid, p))

    def vertex(port):
        owner, idx = port
        if owner in (IN, OUT):
            graph.add_node(("term", owner, idx), label=("term", owner, idx))
            return ("term", owner, idx)
        return ("port", owner, idx)

    for w in f.wires:
        a, b = tuple(w)
        va, vb = vertex(a), vertex(b)
        if va[0] == "term" and vb[0] == "term":
            # keep bare wires visible as a labelled midpoint
            graph.add_node(("bare", va, vb), label=("bare",))
            graph.add_edge(va, ("bare", va, vb))
            graph.add_edge(("bare", va, vb), vb)
        else:
            graph.add_edge(va, vb)
    return graph


def is_isomorphic(f: Diagram, g: Diagram, drop_scalars: bool = True) -> bool:
    """Equality up to renaming nodes and permuting interchangeable legs."""
    if (f.n_in, f.n_out) != (g.n_in, g.n_out):
        return False
    if drop_scalars:
        f, g = drop_closed_components(f), drop_closed_components(g)
    if len(f.nodes) != len(g.nodes) or len(f.wires) != len(g.wires):
        return False
    return nx.is_isomorphic(_port_graph(f), _port_graph(g), node_match=lambda a, b: a["label"] == b["label"])


# --------------------------------------------------------------------------
# Text and JSON formats

HEADER = "qutrit-rg v1"
_ID_RE = re.compile(r"^[A-Za-z_][\w:'\-]*$")


def _boundary_tokens(f: Diagram) -> tuple[list[str], list[str]]:
    partner = f.partner_map()
    ins = [_fmt_port(partner[(IN, k)]) for k in range(f.n_in)]
    outs = [_fmt_port(partner[(OUT, k)]) for k in range(f.n_out)]
    return ins, outs


def to_text(f: Diagram) -> str:
    validate(f)
    lines = [HEADER]
    for nid in f.node_ids():
        k = f.nodes[nid]
        if isinstance(k, Hadamard):
            lines.append(f"node {nid} {'hdag' if k.dagger else 'h'}")
        else:
            if k.phase.symbolic:
                raise DiagramError(f"node {nid} carries a symbolic angle")
            kind = "zspider" if k.color == "Z" else "xspider"
            lines.append(
                f"node {nid} {kind} {k.n_in} {k.n_out} {format_angle(k.phase.alpha)} {format_angle(k.phase.beta)}"
            )
    internal = [w for w in f.wires if not any(p[0] in (IN, OUT) for p in w)]
    for w in sorted(internal, key=lambda w: sorted(_sort_port(p) for p in w)):
        a, b = sorted(w, key=_sort_port)
        lines.append(f"wire {_fmt_port(a)} {_fmt_port(b)}")
    ins, outs = _boundary_tokens(f)
    lines.append(" ".join(["input", *ins]))
    lines.append(" ".join(["output", *outs]))
    return "\n".join(lines) + "\n"


def _sort_port(port: Port):
    return (_natural_key(port[0]), port[1])


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def from_text(text: str) -> Diagram:
    nodes: dict[str, NodeKind] = {}
    node_lines: dict[str, tuple[int, int]] = {}
    wires: list[tuple[tuple[Port, Port], int, int]] = []
    inputs: list[tuple[str, int, int]] | None = None
    outputs: list[tuple[str, int, int]] | None = None
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        if not header_seen:
            if line.strip() != HEADER:
                raise DiagramParseError(f"expected header {HEADER!r}", lineno, toks[0][1])
            header_seen = True
            continue
        word, col = toks[0]
        if word == "node":
            nid, kind = _parse_node(toks, lineno)
            if nid in nodes:
                raise DiagramParseError(f"duplicate node id {nid!r}", lineno, toks[1][1])
            nodes[nid] = kind
            node_lines[nid] = (lineno, toks[1][1])
        elif word == "wire":
            if len(toks) != 3:
                raise DiagramParseError("wire needs exactly two ports", lineno, col)
            a = _parse_port(*toks[1], lineno)
            b = _parse_port(*toks[2], lineno)
            wires.append(((a, b), lineno, toks[1][1]))
        elif word in ("input", "output"):
            entries = [(t, lineno, c) for t, c in toks[1:]]
            if word == "input":
                if inputs is not None:
                    raise DiagramParseError("duplicate input line", lineno, col)
                inputs = entries
            else:
                if outputs is not None:
                    raise DiagramParseError("duplicate output line", lineno, col)
                outputs = entries
        else:
            raise DiagramParseError(f"unknown declaration {word!r}", lineno, col)
    if not header_seen:
        raise DiagramParseError(f"missing header {HEADER!r}", 1, 1)
    inputs = inputs or []
    outputs = outputs or []
    return _assemble(nodes, wires, inputs, outputs, node_lines)


def _assemble(nodes, wires, inputs, outputs, node_lines=None) -> Diagram:
    node_lines = node_lines or {}
    wire_set: set[frozenset] = set()
    used: dict[Port, tuple[int, int]] = {}

    def claim(port, lineno, col):
        owner, idx = port
        if owner not in nodes:
            raise DiagramParseError(f"unknown node {owner!r}", lineno, col)
        if idx >= nodes[owner].arity:
            raise DiagramParseError(f"port {_fmt_port(port)} is out of range", lineno, col)
        if port in used:
            raise DiagramParseError(f"port {_fmt_port(port)} is used twice", lineno, col)
        used[port] = (lineno, col)

    for (a, b), lineno, col in wires:
        if a == b:
            raise DiagramParseError(f"wire connects {_fmt_port(a)} to itself", lineno, col)
        for p in (a, b):
            if p[0] in (IN, OUT):
                raise DiagramParseError("wire lines must join node ports; use input/output lines", lineno, col)
        claim(a, lineno, col)
        claim(b, lineno, col)
        wire_set.add(frozenset({a, b}))
    boundary: dict[Port, Port] = {}
    for side, entries in ((IN, inputs), (OUT, outputs)):
        for k, (tok, lineno, col) in enumerate(entries):
            target = _parse_port(tok, col, lineno)
            here = (side, k)
            if target[0] in (IN, OUT):
                if target == here:
                    raise DiagramParseError("boundary slot refers to itself", lineno, col)
                boundary[here] = target
                continue
            claim(target, lineno, col)
            wire_set.add(frozenset({here, target}))
    n_in, n_out = len(inputs), len(outputs)
    for here, target in boundary.items():
        owner, idx = target
        if idx >= (n_in if owner == IN else n_out) or boundary.get(target) != here:
            tok, lineno, col = (inputs if here[0] == IN else outputs)[here[1]]
            raise DiagramParseError(f"boundary slot {tok} is not matched by a reciprocal slot", lineno, col)
        wire_set.add(frozenset({here, target}))
    for nid, kind in nodes.items():
        for idx in range(kind.arity):
            if (nid, idx) not in used:
                lineno, col = node_lines.get(nid, (0, 0))
                raise DiagramParseError(f"port {_fmt_port((nid, idx))} is dangling", lineno, col)
    f = Diagram(nodes, wire_set, n_in, n_out)
    try:
        validate(f)
    except DiagramError as exc:
        raise DiagramParseError(str(exc), 0, 0) from exc
    return f


def _parse_node(toks, lineno) -> tuple[str, NodeKind]:
    if len(toks) < 3:
        raise DiagramParseError("node needs an id and a kind", lineno, toks[0][1])
    nid, col = toks[1]
    if not _ID_RE.match(nid) or nid in ("in", "out"):
        raise DiagramParseError(f"invalid node id {nid!r}", lineno, col)
    kind, kcol = toks[2]
    if kind in ("h", "hdag"):
        if len(toks) != 3:
            raise DiagramParseError(f"{kind} takes no arguments", lineno, toks[3][1])
        return nid, Hadamard(kind == "hdag")
    if kind in ("zspider", "xspider"):
        if len(toks) != 7:
            raise DiagramParseError(f"{kind} needs <in> <out> <alpha> <beta>", lineno, kcol)
        try:
            n_in, n_out = int(toks[3][0]), int(toks[4][0])
        except ValueError:
            raise DiagramParseError("arity must be an integer", lineno, toks[3][1]) from None
        angles = []
        for tok, c in toks[5:7]:
            try:
                angles.append(parse_angle(tok))
            except ValueError:
                raise DiagramParseError(f"bad angle {tok!r}", lineno, c) from None
        try:
            return nid, Spider("Z" if kind == "zspider" else "X", n_in, n_out, PhasePair(*angles))
        except DiagramError as exc:
            raise DiagramParseError(str(exc), lineno, toks[3][1]) from None
    raise DiagramParseError(f"unknown node kind {kind!r}", lineno, kcol)


def _parse_port(tok: str, col: int, lineno: int) -> Port:
    owner, dot, idx = tok.rpartition(".")
    if not dot or not idx.isdigit() or not owner:
        raise DiagramParseError(f"bad port {tok!r}, expected <id>.<port>", lineno, col)
    if owner == "in":
        return (IN, int(idx))
    if owner == "out":
        return (OUT, int(idx))
    return (owner, int(idx))


def to_json(f: Diagram) -> str:
    validate(f)
    nodes = []
    for nid in f.node_ids():
        k = f.nodes[nid]
        if isinstance(k, Hadamard):
            nodes.append({"id": nid, "kind": "hdag" if k.dagger else "h"})
        else:
            nodes.append({
                "id": nid,
                "kind": "zspider" if k.color == "Z" else "xspider",
                "in": k.n_in,
                "out": k.n_out,
                "alpha": k.phase.alpha,
                "beta": k.phase.beta,
            })
    internal = [w for w in f.wires if not any(p[0] in (IN, OUT) for p in w)]
    wires = [[_fmt_port(p) for p in sorted(w, key=_sort_port)] for w in internal]
    wires.sort()
    ins, outs = _boundary_tokens(f)
    doc = {"format": "qutrit-rg", "version": 1, "nodes": nodes, "wires": wires, "inputs": ins, "outputs": outs}
    return json.dumps(doc, indent=2)


def from_json(text: str) -> Diagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramParseError(exc.msg, exc.lineno, exc.colno) from None
    if doc.get("format") != "qutrit-rg" or doc.get("version") != 1:
        raise DiagramParseError("not a qutrit-rg v1 document", 1, 1)
    lines = [HEADER]
    for n in doc.get("nodes", []):
        if n["kind"] in ("h", "hdag"):
            lines.append(f"node {n['id']} {n['kind']}")
        else:
            alpha = n.get("alpha", 0.0)
            beta = n.get("beta", 0.0)
            a = alpha if isinstance(alpha, str) else repr(float(alpha))
            b = beta if isinstance(beta, str) else repr(float(beta))
            lines.append(f"node {n['id']} {n['kind']} {n['in']} {n['out']} {a} {b}")
    for a, b in doc.get("wires", []):
        lines.append(f"wire {a} {b}")
    lines.append(" ".join(["input", *doc.get("inputs", [])]))
    lines.append(" ".join(["output", *doc.get("outputs", [])]))
    return from_text("\n".join(lines))


def load(path: str | Path) -> Diagram:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.name.endswith(".rg.json"):
        return from_json(text)
    return from_text(text)


def save(f: Diagram, path: str | Path) -> None:
    path = Path(path)
    path.write_text(to_json(f) if path.name.endswith(".rg.json") else to_text(f), encoding="utf-8")
