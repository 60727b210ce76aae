"""Support sets, inverses, conditionals and factorization checks.

Probability potentials with equal support on a frame form a group under
combination: the support indicator is the unit and the off-support-zero
reciprocal is the inverse. Conditionals are built from these, so no
division by zero ever happens.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .frames import Frame, FrameError, cond_independent, join, refines
from .potentials import (
    ContradictionError,
    ProbPotential,
    SetPotential,
    close,
    lift,
    likelihood,
    pp_combine,
    pp_normalize,
    pp_transport,
    sp_combine,
)


def support_indicator(p: ProbPotential) -> ProbPotential:
    return ProbPotential(p.frame, (p.values > 0).astype(float))


def inverse(p: ProbPotential) -> ProbPotential:
    out = np.zeros_like(p.values)
    pos = p.values > 0
    out[pos] = 1.0 / p.values[pos]
    return ProbPotential(p.frame, out)


def project(p: ProbPotential, frame: Frame) -> ProbPotential:
    """Marginal of ``p`` on a coarser ``frame``."""
    if not refines(frame, p.frame):
        raise FrameError("projection target must be coarser than the potential's frame")
    return pp_transport(p, frame)


def conditional(p: ProbPotential, target: Frame, given: Frame) -> ProbPotential:
    """``p_{target|given}``: marginal on ``target v given`` times the inverse given-marginal.

    Requires ``join(target, given) <= d(p)``. Elements whose projection onto
    ``given`` carries no mass get value 0.
    """
    top = join(target, given)
    if not refines(top, p.frame):
        raise FrameError("conditional needs target and given frames coarser than d(p)")
    return pp_combine(project(p, top), inverse(project(p, given)))


def condition_on_event(p: ProbPotential, m: SetPotential) -> ProbPotential:
    """Combine ``p`` with evidence ``m`` and normalize; classical conditioning for a
    deterministic ``m``. The result lives on ``join(d(p), d(m))``.
    """
    combined = likelihood(sp_combine(lift(p), m))
    try:
        return pp_normalize(combined)
    except ContradictionError:
        raise ContradictionError("contradictory evidence: conditioning event has zero probability") from None


def check_cond_independent_potentials(
    q1: ProbPotential, q2: ProbPotential, given: Frame
) -> bool:
    """Whether ``q1 _|_ q2 | given`` as potentials.

    Witness frames exist iff ``given`` is coarser than both labels and the
    labels themselves are conditionally independent given it.
    """
    if not (refines(given, q1.frame) and refines(given, q2.frame)):
        return False
    return cond_independent([q1.frame, q2.frame], given)


@dataclass
class EquivalenceReport:
    """Truth values of the eight equivalent factorization statements."""

    statements: dict[int, bool]
    deviations: dict[int, float] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return len(set(self.statements.values())) == 1

    def lines(self) -> list[str]:
        return [
            f"({k}) {str(v).lower()} max_dev={self.deviations.get(k, 0.0):.12g}"
            for k, v in sorted(self.statements.items())
        ]


def _dev(a: ProbPotential, b: ProbPotential) -> float:
    if a.frame != b.frame:
        return float("inf")
    return float(np.max(np.abs(a.values - b.values), initial=0.0))


def factorization_equivalences(
    p: ProbPotential,
    t1: Frame,
    t2: Frame,
    given: Frame,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> EquivalenceReport:
    """Evaluate the eight equivalent conditions for ``p`` to factor over ``t1, t2`` given ``given``.

    Existence statements are decided by their canonical witnesses
    (conditionals of ``p``), which succeed whenever any witness does.
    """
    if not cond_independent([t1, t2], given):
        raise FrameError("frames are not conditionally independent given the conditioning frame")
    if join(t1, t2, given) != p.frame:
        raise FrameError("potential must live on the join of the three frames")

    t1g, t2g = join(t1, given), join(t2, given)
    c1 = conditional(p, t1, given)
    c2 = conditional(p, t2, given)
    c12 = conditional(p, join(t1, t2), given)
    pg = project(p, given)
    p1g, p2g = project(p, t1g), project(p, t2g)
    c1_given_2 = conditional(p, t1, t2g)
    f2 = support_indicator(p2g)

    pairs = {
        1: (p, pp_combine(c1, p2g)),
        2: (p, pp_combine(pp_combine(c1, c2), pg)),
        3: (c12, pp_combine(c1, c2)),
        4: (c12, pp_combine(c1, c2)),
        5: (pp_combine(p, pg), pp_combine(p1g, p2g)),
        6: (p, pp_combine(c1, p2g)),
        7: (c1_given_2, pp_combine(c1, f2)),
        8: (c1_given_2, pp_combine(c1, f2)),
    }
    statements = {k: close(a, b, rtol, atol) for k, (a, b) in pairs.items()}
    deviations = {k: _dev(a, b) for k, (a, b) in pairs.items()}
    return EquivalenceReport(statements, deviations)


def nary_projection_identities(
    factors: Sequence[ProbPotential], given: Frame
) -> tuple[list[tuple[ProbPotential, ProbPotential]], ProbPotential, ProbPotential]:
    """Both sides of the projection laws for ``_|_{q_1..q_n} | given``.

    Returns ``(per_factor_pairs, lhs_given, rhs_given)`` where each pair compares
    the marginal of the product on ``d(q_i)`` with ``q_i`` times the other
    factors' ``given``-marginals.
    """
    prod = factors[0]
    for q in factors[1:]:
        prod = pp_combine(prod, q)
    pairs = []
    for i, qi in enumerate(factors):
        rhs = qi
        for j, qj in enumerate(factors):
            if j != i:
                rhs = pp_combine(rhs, project(qj, given))
        pairs.append((project(prod, qi.frame), rhs))
    lhs_g = project(prod, given)
    rhs_g = project(factors[0], given)
    for q in factors[1:]:
        rhs_g = pp_combine(rhs_g, project(q, given))
    return pairs, lhs_g, rhs_g
