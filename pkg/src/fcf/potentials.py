"""Set potentials and probability potentials on frames.

Set potentials assign nonnegative mass to subsets of a frame (the empty set
included); combination intersects transported focal sets without
normalization. Probability potentials assign a nonnegative value per frame
element; their transport is the likelihood of the transported lifted set
potential, which for a coarser target is ordinary marginalization.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Mapping

import numpy as np

from .frames import (
    Frame,
    FrameError,
    compat_pairs,
    is_commutative_pair,
    join,
    meet,
    transport_set,
)

RTOL = 1e-9
ATOL = 1e-12


class ContradictionError(ValueError):
    """Normalization of a null potential, or combination of contradictory evidence."""


class NotCommutativeError(FrameError):
    """An operation needs a commutative frame pair and did not get one."""


class SetPotential:
    """Sparse mass assignment on subsets of ``frame``.

    Keys are frozensets of element indices; zero masses are dropped.
    """

    __slots__ = ("frame", "masses")

    def __init__(self, frame: Frame, masses: Mapping[Iterable[int], float] = ()):
        clean: dict[frozenset, float] = {}
        for s, v in dict(masses).items():
            s = frozenset(int(i) for i in s)
            if any(i < 0 or i >= frame.size for i in s):
                raise FrameError(f"focal set {sorted(s)} outside frame of size {frame.size}")
            v = float(v)
            if v < 0 or not np.isfinite(v):
                raise ValueError(f"mass must be finite and nonnegative, got {v}")
            if v > 0:
                clean[s] = clean.get(s, 0.0) + v
        self.frame = frame
        self.masses = clean

    def __getitem__(self, subset: Iterable[int]) -> float:
        return self.masses.get(frozenset(subset), 0.0)

    def is_null(self) -> bool:
        return not self.masses

    def total(self) -> float:
        return float(sum(self.masses.values()))

    def items_sorted(self) -> list[tuple[tuple[int, ...], float]]:
        """Focal sets as sorted index tuples, in a canonical order."""
        rows = [(tuple(sorted(s)), v) for s, v in self.masses.items()]
        return sorted(rows, key=lambda r: (len(r[0]), r[0]))

    def __eq__(self, other):
        if not isinstance(other, SetPotential):
            return NotImplemented
        return self.frame == other.frame and self.masses == other.masses

    def __repr__(self):
        body = ", ".join(f"{list(s)}: {v:.6g}" for s, v in self.items_sorted())
        return f"SetPotential({self.frame.size} elements; {{{body}}})"


class ProbPotential:
    """Nonnegative value per element of ``frame``."""

    __slots__ = ("frame", "values")

    def __init__(self, frame: Frame, values):
        values = np.array(values, dtype=float)
        if values.shape != (frame.size,):
            raise FrameError(f"expected {frame.size} values, got shape {values.shape}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("potential values must be finite and nonnegative")
        values.setflags(write=False)
        self.frame = frame
        self.values = values

    def __getitem__(self, element: int) -> float:
        return float(self.values[element])

    def __len__(self) -> int:
        return self.frame.size

    def total(self) -> float:
        return float(self.values.sum())

    def is_null(self) -> bool:
        return not np.any(self.values)

    def __eq__(self, other):
        if not isinstance(other, ProbPotential):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"ProbPotential({np.array2string(self.values, precision=6)})"


def unit_set(frame: Frame) -> SetPotential:
    """``1_frame``: mass one on the whole frame."""
    return SetPotential(frame, {frozenset(range(frame.size)): 1.0})


def null_set(frame: Frame) -> SetPotential:
    return SetPotential(frame)


def unit(frame: Frame) -> ProbPotential:
    """All-ones probability potential (neutral for combination on ``frame``)."""
    return ProbPotential(frame, np.ones(frame.size))


def zero(frame: Frame) -> ProbPotential:
    return ProbPotential(frame, np.zeros(frame.size))


def close(a, b, rtol: float = RTOL, atol: float = ATOL) -> bool:
    """Tolerant equality for potentials on the same frame."""
    if isinstance(a, ProbPotential) and isinstance(b, ProbPotential):
        return a.frame == b.frame and np.allclose(a.values, b.values, rtol=rtol, atol=atol)
    if isinstance(a, SetPotential) and isinstance(b, SetPotential):
        if a.frame != b.frame:
            return False
        keys = set(a.masses) | set(b.masses)
        return all(np.isclose(a[k], b[k], rtol=rtol, atol=atol) for k in keys)
    raise TypeError(f"cannot compare {type(a).__name__} with {type(b).__name__}")


# -- set potentials ---------------------------------------------------------


def sp_combine(m1: SetPotential, m2: SetPotential) -> SetPotential:
    f1, f2 = m1.frame, m2.frame
    j = join(f1, f2)
    t1 = {s: transport_set(s, f1, j) for s in m1.masses}
    t2 = {s: transport_set(s, f2, j) for s in m2.masses}
    out: dict[frozenset, float] = defaultdict(float)
    for s1, v1 in m1.masses.items():
        for s2, v2 in m2.masses.items():
            out[t1[s1] & t2[s2]] += v1 * v2
    return SetPotential(j, out)


def sp_transport(m: SetPotential, frame: Frame) -> SetPotential:
    if m.frame == frame:
        return m
    out: dict[frozenset, float] = defaultdict(float)
    for s, v in m.masses.items():
        out[transport_set(s, m.frame, frame)] += v
    return SetPotential(frame, out)


def sp_normalize(m: SetPotential) -> SetPotential:
    """Drop the empty-set mass and rescale the rest to sum to one."""
    k = sum(v for s, v in m.masses.items() if s)
    if k <= 0:
        raise ContradictionError("contradictory (null) set potential cannot be normalized")
    return SetPotential(m.frame, {s: v / k for s, v in m.masses.items() if s})


def sp_support(m: SetPotential, subset: Iterable[int]) -> float:
    s = frozenset(subset)
    return float(sum(v for t, v in m.masses.items() if t and t <= s))


def sp_plausibility(m: SetPotential, subset: Iterable[int]) -> float:
    s = frozenset(subset)
    return float(sum(v for t, v in m.masses.items() if t & s))


def likelihood(m: SetPotential) -> ProbPotential:
    """``pl_m(theta)``: total mass of the focal sets containing ``theta``."""
    out = np.zeros(m.frame.size)
    for s, v in m.masses.items():
        for i in s:
            out[i] += v
    return ProbPotential(m.frame, out)


def lift(p: ProbPotential) -> SetPotential:
    """The set potential with mass ``p(theta)`` on each singleton."""
    return SetPotential(p.frame, {frozenset((i,)): v for i, v in enumerate(p.values.tolist())})


def is_bpa(m: SetPotential, tol: float = 1e-12) -> bool:
    return frozenset() not in m.masses and abs(m.total() - 1.0) <= tol


# -- probability potentials -------------------------------------------------


def pp_combine(p1: ProbPotential, p2: ProbPotential) -> ProbPotential:
    f1, f2 = p1.frame, p2.frame
    if f1 == f2:
        return ProbPotential(f1, p1.values * p2.values)
    j = join(f1, f2)
    reps = j.reps
    return ProbPotential(j, p1.values[f1.labels[reps]] * p2.values[f2.labels[reps]])


def combine_all(potentials: Iterable[ProbPotential]) -> ProbPotential:
    it = iter(potentials)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("combine_all needs at least one potential") from None
    for p in it:
        acc = pp_combine(acc, p)
    return acc


def pp_transport(p: ProbPotential, frame: Frame) -> ProbPotential:
    """Sum of ``p`` over the elements compatible with each target element.

    For a coarser target this is marginalization and preserves total mass;
    for other targets the result may exceed it (no renormalization).
    """
    if p.frame == frame:
        return p
    pairs = compat_pairs(p.frame, frame)
    out = np.zeros(frame.size)
    np.add.at(out, pairs[:, 1], p.values[pairs[:, 0]])
    return ProbPotential(frame, out)


def pp_normalize(p: ProbPotential) -> ProbPotential:
    k = p.total()
    if k <= 0:
        raise ContradictionError("null probability potential cannot be normalized")
    return ProbPotential(p.frame, p.values / k)


def extend(p: ProbPotential, frame: Frame) -> ProbPotential:
    """Vacuous extension ``p . 1_frame`` onto ``join(d(p), frame)``."""
    return pp_combine(p, unit(frame))


def pp_project_commutative(p: ProbPotential, frame: Frame) -> ProbPotential:
    """Transport through the meet, then vacuous extension.

    Equal to :func:`pp_transport` whenever ``d(p)`` and ``frame`` commute.
    """
    if p.frame == frame:
        return p
    if not is_commutative_pair(p.frame, frame):
        raise NotCommutativeError("frames are not conditionally independent given their meet")
    m = meet(p.frame, frame)
    down = pp_transport(p, m)
    return pp_combine(unit(frame), down)
