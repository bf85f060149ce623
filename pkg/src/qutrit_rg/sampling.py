"""Random diagrams for property tests and randomized law checks."""

from __future__ import annotations

import numpy as np

from qutrit_rg.diagram import (
    IN,
    OUT,
    ONE,
    Diagram,
    Hadamard,
    Spider,
    compose,
    generator,
    tensor_all,
)


def random_angle(rng: np.random.Generator, shorthand_bias: float = 0.3) -> float:
    if rng.random() < shorthand_bias:
        return float(rng.integers(0, 3)) * ONE
    return float(rng.uniform(0, 2 * np.pi))


def random_node(rng: np.random.Generator, max_arity: int = 3):
    if rng.random() < 0.25:
        return Hadamard(bool(rng.integers(0, 2)))
    arity = int(rng.integers(1, max_arity + 1))
    n_in = int(rng.integers(0, arity + 1))
    color = "Z" if rng.random() < 0.5 else "X"
    phased = rng.random() < 0.6
    a, b = (random_angle(rng), random_angle(rng)) if phased else (0.0, 0.0)
    from qutrit_rg.diagram import PhasePair

    return Spider(color, n_in, arity - n_in, PhasePair(a, b))


def random_diagram(rng: np.random.Generator, n_in: int, n_out: int, max_nodes: int = 6) -> Diagram:
    """A random open graph: random nodes, then a random perfect matching of all ports."""
    n_nodes = int(rng.integers(1, max_nodes + 1)) if max_nodes > 0 else 0
    nodes = {f"v{i}": random_node(rng) for i in range(n_nodes)}
    ports = [(nid, p) for nid, k in nodes.items() for p in range(k.arity)]
    ports += [(IN, k) for k in range(n_in)] + [(OUT, k) for k in range(n_out)]
    if len(ports) % 2:
        # fix parity with a one-legged spider
        nid = f"v{n_nodes}"
        nodes[nid] = Spider("Z" if rng.random() < 0.5 else "X", 0, 1)
        ports.append((nid, 0))
    order = rng.permutation(len(ports))
    wires = {frozenset({ports[order[i]], ports[order[i + 1]]}) for i in range(0, len(order), 2)}
    return Diagram(nodes, wires, n_in, n_out)


_ONE_WIRE = ("p_z", "p_x", "h", "h_dag")


def random_circuit(rng: np.random.Generator, width: int = 1, max_nodes: int = 6) -> Diagram:
    """A layered composite of generators on ``width`` wires with at most ``max_nodes`` nodes."""
    d = Diagram.identity(width)
    budget = max_nodes
    while budget > 0:
        pos = int(rng.integers(0, width))
        choice = rng.random()
        if width >= 2 and pos < width - 1 and choice < 0.2 and budget >= 2:
            # copy then merge across two adjacent wires
            c1, c2 = ("Z", "X") if rng.random() < 0.5 else ("X", "Z")
            gate = compose(generator(f"delta_{c1.lower()}_dag"), generator(f"delta_{c2.lower()}"))
            cost = 2
            span = 2
        else:
            name = _ONE_WIRE[int(rng.integers(0, len(_ONE_WIRE)))]
            if name in ("p_z", "p_x"):
                gate = generator(name, random_angle(rng, 0.6), random_angle(rng, 0.6))
            else:
                gate = generator(name)
            cost = 1
            span = 1
        layer = [Diagram.identity(pos)] if pos else []
        layer.append(gate)
        rest = width - pos - span
        if rest > 0:
            layer.append(Diagram.identity(rest))
        d = compose(d, tensor_all(*layer))
        budget -= cost
    return d
