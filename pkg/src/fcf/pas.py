"""Probabilistic argumentation structures (precise and generalized)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .frames import Frame, FrameError, join, transport_set
from .potentials import ContradictionError, SetPotential

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Pas:
    """Weighted assumptions, each implying a nonempty subset of ``frame``.

    ``images[k]`` is what assumption ``assumptions[k]`` implies. The structure
    is precise when every image is a singleton.
    """

    frame: Frame
    assumptions: tuple[Hashable, ...]
    weights: tuple[float, ...]
    images: tuple[frozenset, ...]

    def __post_init__(self):
        n = len(self.assumptions)
        if n == 0:
            raise ValueError("a PAS needs at least one assumption")
        if len(self.weights) != n or len(self.images) != n:
            raise ValueError("assumptions, weights and images must have equal length")
        if len(set(self.assumptions)) != n:
            raise ValueError("assumption identifiers must be unique")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL * max(1, n):
            raise ValueError("weights must be nonnegative and sum to one")
        for a, img in zip(self.assumptions, self.images):
            if not img:
                raise ValueError(f"assumption {a!r} implies the empty set")
            if any(i < 0 or i >= self.frame.size for i in img):
                raise FrameError(f"image of {a!r} lies outside the frame")

    @classmethod
    def build(
        cls,
        frame: Frame,
        assumptions: Sequence[Hashable],
        weights: Sequence[float],
        images: Sequence[Iterable[int] | int],
    ) -> "Pas":
        imgs = tuple(
            frozenset((int(x),)) if isinstance(x, (int, np.integer)) else frozenset(map(int, x))
            for x in images
        )
        return cls(frame, tuple(assumptions), tuple(float(w) for w in weights), imgs)

    @property
    def precise(self) -> bool:
        return all(len(i) == 1 for i in self.images)


def pas_support_set(h: Pas, subset: Iterable[int]) -> frozenset:
    """Assumptions whose image is contained in ``subset``."""
    s = frozenset(subset)
    return frozenset(a for a, img in zip(h.assumptions, h.images) if img <= s)


def pas_degree_of_support(h: Pas, subset: Iterable[int]) -> float:
    s = frozenset(subset)
    return float(sum(w for w, img in zip(h.weights, h.images) if img <= s))


def pas_bpa(h: Pas) -> SetPotential:
    masses: dict[frozenset, float] = {}
    for w, img in zip(h.weights, h.images):
        masses[img] = masses.get(img, 0.0) + w
    return SetPotential(h.frame, masses)


def pas_combine(h1: Pas, h2: Pas) -> Pas:
    """Combine independent structures, discarding contradictory assumption pairs.

    Combined assumptions are the pairs ``(a1, a2)`` whose transported images
    intersect; weights are renormalized by the total surviving weight.
    """
    j = join(h1.frame, h2.frame)
    t1 = [transport_set(img, h1.frame, j) for img in h1.images]
    t2 = [transport_set(img, h2.frame, j) for img in h2.images]
    assumptions, weights, images = [], [], []
    for a1, w1, s1 in zip(h1.assumptions, h1.weights, t1):
        for a2, w2, s2 in zip(h2.assumptions, h2.weights, t2):
            both = s1 & s2
            if both:
                assumptions.append((a1, a2))
                weights.append(w1 * w2)
                images.append(both)
    k = sum(weights)
    if k <= 0:
        raise ContradictionError("contradictory PAS: no consistent pair of assumptions")
    return Pas(j, tuple(assumptions), tuple(w / k for w in weights), tuple(images))


def pas_transport(h: Pas, frame: Frame) -> Pas:
    """Same assumptions and weights, images transported to ``frame``."""
    if frame == h.frame:
        return h
    images = tuple(transport_set(img, h.frame, frame) for img in h.images)
    return Pas(frame, h.assumptions, h.weights, images)
