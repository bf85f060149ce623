"""Euler decompositions of the qutrit Hadamard and why RG cannot derive them.

A triple of phase gates ``P_X(outer) P_Z(middle) P_X(inner)`` can equal H up
to scale. The decomposition is not unique. It is also not derivable from the
rules: the ZERO interpretation satisfies every rule, yet sends the composite
to the identity while H stays H.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from qutrit_rg.diagram import ONE, TWO, Diagram, Hadamard, PhasePair, compose_all, format_angle, generator, x_spider, z_spider
from qutrit_rg.rules import SoundnessReport, sweep
from qutrit_rg.semantics import H_DAG_MAT, H_MAT, RG, ZERO, Functor, generator_matrix
from qutrit_rg.tensor import default_tol, projective_residual

GRID_ANGLES = (0.0, ONE, TWO)


@dataclass(frozen=True)
class EulerTriple:
    outer: PhasePair
    middle: PhasePair
    inner: PhasePair

    @classmethod
    def from_angles(cls, *angles: float) -> EulerTriple:
        if len(angles) != 6:
            raise ValueError("an Euler triple needs six angles")
        a = angles
        return cls(PhasePair(a[0], a[1]), PhasePair(a[2], a[3]), PhasePair(a[4], a[5]))

    def angles(self) -> tuple[float, ...]:
        return (self.outer.alpha, self.outer.beta, self.middle.alpha, self.middle.beta,
                self.inner.alpha, self.inner.beta)

    def dagger_negated(self) -> EulerTriple:
        """Triple of the daggered composite: order reversed, angles negated."""
        return EulerTriple(-self.inner, -self.middle, -self.outer)

    def grid_index(self) -> tuple[int, ...] | None:
        """Angles as multiples of 2pi/3, or None when off the grid."""
        out = []
        for a in self.angles():
            k = a / ONE
            if abs(k - round(k)) > 1e-9:
                return None
            out.append(int(round(k)) % 3)
        return tuple(out)

    def label(self) -> str:
        return " ".join(f"({format_angle(p.alpha)},{format_angle(p.beta)})"
                        for p in (self.outer, self.middle, self.inner))


PAPER_TRIPLE = EulerTriple.from_angles(TWO, TWO, TWO, TWO, TWO, TWO)


def _phase_matrix(color: str, phase: PhasePair, choice: Functor) -> np.ndarray:
    kind = z_spider(1, 1, phase.alpha, phase.beta) if color == "Z" else x_spider(1, 1, phase.alpha, phase.beta)
    return generator_matrix(kind, choice)


def euler_composite(t: EulerTriple, choice: Functor = RG, pattern: str = "XZX") -> np.ndarray:
    """``P(outer) @ P(middle) @ P(inner)`` with colours from ``pattern``."""
    if pattern not in ("XZX", "ZXZ"):
        raise ValueError(f"pattern must be XZX or ZXZ, got {pattern!r}")
    outer, middle, inner = pattern
    return (_phase_matrix(outer, t.outer, choice) @ _phase_matrix(middle, t.middle, choice)
            @ _phase_matrix(inner, t.inner, choice))


def euler_diagram(t: EulerTriple, pattern: str = "XZX") -> Diagram:
    """The composite as a diagram; the inner gate acts first."""
    names = {"X": "p_x", "Z": "p_z"}
    outer, middle, inner = pattern
    return compose_all(generator(names[inner], t.inner.alpha, t.inner.beta),
                       generator(names[middle], t.middle.alpha, t.middle.beta),
                       generator(names[outer], t.outer.alpha, t.outer.beta))


def grid_search(target: np.ndarray, pattern: str = "XZX", tol: float | None = None) -> list[EulerTriple]:
    """Every triple over {0, 2pi/3, 4pi/3}^6 whose composite is proportional to ``target``."""
    tol = default_tol() if tol is None else tol
    found = []
    for angles in itertools.product(GRID_ANGLES, repeat=6):
        t = EulerTriple.from_angles(*angles)
        if projective_residual(euler_composite(t, RG, pattern), target) < tol:
            found.append(t)
    return found


@dataclass
class NonUniquenessReport:
    solutions: dict[str, list[EulerTriple]]
    dagger_solutions: dict[str, list[EulerTriple]]
    paper_residual: float
    seconds: float
    tol: float

    @property
    def paper_found(self) -> bool:
        return PAPER_TRIPLE.grid_index() in {t.grid_index() for t in self.solutions["XZX"]}

    @property
    def symmetric(self) -> bool:
        """Dagger with negation maps the H solutions exactly onto the H-dagger solutions."""
        return all({t.dagger_negated().grid_index() for t in self.solutions[p]}
                   == {t.grid_index() for t in self.dagger_solutions[p]}
                   for p in self.solutions)

    @property
    def passed(self) -> bool:
        return (self.paper_residual < self.tol and self.paper_found and len(self.solutions["XZX"]) >= 2
                and self.symmetric)

    def lines(self) -> list[str]:
        out = [f"EULER paper triple residual={self.paper_residual:.3e} "
               f"{'PASS' if self.paper_residual < self.tol else 'FAIL'}"]
        for p, sols in self.solutions.items():
            out.append(f"EULER pattern={p} solutions={len(sols)}")
            out += [f"  {t.label()}" for t in sols]
        out.append(f"EULER dagger-negation symmetry {'PASS' if self.symmetric else 'FAIL'}")
        return out


def check_nonuniqueness(tol: float | None = None) -> NonUniquenessReport:
    tol = default_tol() if tol is None else tol
    start = time.perf_counter()
    solutions = {p: grid_search(H_MAT, p, tol) for p in ("XZX", "ZXZ")}
    dagger_solutions = {p: grid_search(H_DAG_MAT, p, tol) for p in ("XZX", "ZXZ")}
    residual = projective_residual(euler_composite(PAPER_TRIPLE, RG), H_MAT)
    return NonUniquenessReport(solutions, dagger_solutions, residual, time.perf_counter() - start, tol)


@dataclass
class NonDerivabilityReport:
    zero_sweep: list[SoundnessReport] = field(default_factory=list)
    separation_residual: float = 0.0
    control_residual: float = 1.0
    tol: float = 1e-9

    @property
    def rules_sound(self) -> bool:
        return all(r.passed for r in self.zero_sweep)

    @property
    def separated(self) -> bool:
        return self.separation_residual > 0.5

    @property
    def passed(self) -> bool:
        return self.rules_sound and self.separated and self.control_residual < self.tol

    def lines(self) -> list[str]:
        worst = max((r.residual for r in self.zero_sweep), default=0.0)
        return [
            f"ZERO rules sound: {len(self.zero_sweep)} variants worst residual={worst:.3e} "
            f"{'PASS' if self.rules_sound else 'FAIL'}",
            f"ZERO euler composite vs H residual={self.separation_residual:.3e} "
            f"{'SEPARATED' if self.separated else 'NOT SEPARATED'}",
            f"RG control euler composite vs H residual={self.control_residual:.3e} "
            f"{'PASS' if self.control_residual < self.tol else 'FAIL'}",
            f"NONDERIVABLE {'PASS' if self.passed else 'FAIL'}",
        ]


def check_nonderivability(tol: float | None = None) -> NonDerivabilityReport:
    """Sound under ZERO and separated by ZERO, so the Euler equation is not derivable."""
    tol = default_tol() if tol is None else tol
    h_kind = Hadamard(False)
    return NonDerivabilityReport(
        zero_sweep=sweep(ZERO, tol=tol),
        separation_residual=projective_residual(euler_composite(PAPER_TRIPLE, ZERO), generator_matrix(h_kind, ZERO)),
        control_residual=projective_residual(euler_composite(PAPER_TRIPLE, RG), generator_matrix(h_kind, RG)),
        tol=tol,
    )
