"""Single-qutrit parity algorithm for permutations of {0, 1, 2}.

``U_f`` permutes the computational basis. Applied once to the X eigenstate
``|w> = (1, w, w^2)`` it returns ``|w>`` up to a phase for even permutations
and ``|w_bar>`` for odd ones.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from qutrit_rg.diagram import ONE, TWO, Diagram, compose_all, generator
from qutrit_rg.semantics import KET_OMEGA, KET_OMEGA_BAR, evaluate
from qutrit_rg.tensor import default_tol, projective_residual


class ClassificationError(RuntimeError):
    """The output state matched neither |w> nor |w_bar>."""


@dataclass(frozen=True)
class Permutation3:
    image: tuple[int, int, int]

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if sorted(image) != [0, 1, 2]:
            raise ValueError(f"{self.image!r} is not a permutation of (0, 1, 2)")
        object.__setattr__(self, "image", image)

    @classmethod
    def parse(cls, text: str) -> Permutation3:
        """Read the image string, e.g. ``"021"`` for the transposition (1 2)."""
        text = text.strip()
        if len(text) != 3 or not text.isdigit():
            raise ValueError(f"permutation must be three digits such as 021, got {text!r}")
        return cls(tuple(int(c) for c in text))

    def __call__(self, m: int) -> int:
        return self.image[m]

    def __str__(self) -> str:
        return "".join(map(str, self.image))

    @property
    def sign(self) -> int:
        """Sign by inversion count."""
        a = self.image
        inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if a[i] > a[j])
        return -1 if inversions % 2 else 1

    @property
    def cycles(self) -> str:
        seen: set[int] = set()
        parts = []
        for start in range(3):
            if start in seen or self.image[start] == start:
                seen.add(start)
                continue
            cyc = [start]
            seen.add(start)
            nxt = self.image[start]
            while nxt != start:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = self.image[nxt]
            parts.append("(" + " ".join(map(str, cyc)) + ")")
        return "".join(parts) or "(0)"


# Table order, labelled by the cycle products used as column headers.
TABLE: tuple[tuple[str, Permutation3], ...] = (
    ("(0)", Permutation3((0, 1, 2))),
    ("(1 2)(0 1)", Permutation3((2, 0, 1))),
    ("(1 2)(0 2)", Permutation3((1, 2, 0))),
    ("(1 2)", Permutation3((0, 2, 1))),
    ("(0 1)", Permutation3((1, 0, 2))),
    ("(0 2)", Permutation3((2, 1, 0))),
)


def uf_matrix(p: Permutation3) -> np.ndarray:
    """``sum_m |f(m)><m|``."""
    m = np.zeros((3, 3), dtype=complex)
    for col, row in enumerate(p.image):
        m[row, col] = 1
    return m


def _shift(k: int) -> Diagram:
    # P_X(4pi/3, 2pi/3) is |a> -> |a+1>, P_X(2pi/3, 4pi/3) is |a> -> |a-1>
    if k % 3 == 0:
        return Diagram.identity(1)
    return generator("p_x", TWO, ONE) if k % 3 == 1 else generator("p_x", ONE, TWO)


def uf_diagram(p: Permutation3) -> Diagram:
    """A diagram for ``U_f``: a cyclic shift, followed by H;H for odd ``p``.

    Even permutations are shifts ``x -> x + c``. Odd ones are ``x -> c - x``,
    realised as the shift by ``-c`` followed by the dualizer ``x -> -x``.
    """
    c = p.image[0]
    if p.sign == 1:
        return _shift(c)
    h = generator("h")
    return compose_all(_shift(-c), h, h)


@dataclass
class ParityReport:
    permutation: Permutation3
    matrix: np.ndarray
    output_label: str
    parity: str
    residual: float

    def line(self) -> str:
        return (f"{self.permutation.cycles:<10} {self.permutation}  U_f|w> ~ |{self.output_label}>  "
                f"{self.parity:<4} residual={self.residual:.3e}")


def run_parity(p: Permutation3, tol: float | None = None,
               oracle: Callable[[np.ndarray], np.ndarray] | None = None) -> ParityReport:
    """Classify ``p`` from a single application of ``U_f`` to ``|w>``.

    ``oracle`` maps a state to ``U_f`` applied to it; by default it evaluates
    :func:`uf_diagram`. It is called exactly once.
    """
    tol = default_tol() if tol is None else tol
    matrix = evaluate(uf_diagram(p))
    if oracle is None:
        def oracle(state):
            return matrix @ state
    out = np.asarray(oracle(KET_OMEGA.copy()), dtype=complex)
    r_even = projective_residual(out, KET_OMEGA)
    r_odd = projective_residual(out, KET_OMEGA_BAR)
    if r_even < tol <= r_odd:
        return ParityReport(p, matrix, "w", "Even", r_even)
    if r_odd < tol <= r_even:
        return ParityReport(p, matrix, "w_bar", "Odd", r_odd)
    raise ClassificationError(
        f"U_f|w> for {p} is neither |w> (residual {r_even:.3e}) nor |w_bar> (residual {r_odd:.3e})")


def parity_table(tol: float | None = None) -> list[tuple[str, ParityReport]]:
    return [(label, run_parity(p, tol)) for label, p in TABLE]
