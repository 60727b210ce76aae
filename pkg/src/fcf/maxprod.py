"""Max/product potentials and most probable configurations on Markov trees."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np

from .frames import Frame, compat_pairs, join
from .markov import MarkovTree, MessageStore, _check_markov, run_collect
from .potentials import ProbPotential

# values this close (relatively) to the maximum count as ties
TIE_RTOL = 1e-12


def is_max(values: np.ndarray, best) -> np.ndarray:
    return values >= best * (1.0 - TIE_RTOL)


def max_transport(p: ProbPotential, frame: Frame) -> ProbPotential:
    """Maximum of ``p`` over the elements compatible with each target element."""
    if p.frame == frame:
        return p
    pairs = compat_pairs(p.frame, frame)
    out = np.full(frame.size, -np.inf)
    np.maximum.at(out, pairs[:, 1], p.values[pairs[:, 0]])
    return ProbPotential(frame, out)


@dataclass(frozen=True)
class SolutionMap:
    """For each target element, the compatible source elements attaining the max."""

    source: Frame
    target: Frame
    sets: Mapping[int, frozenset]

    def __getitem__(self, element: int) -> frozenset:
        return self.sets[element]


def solution_sets(p: ProbPotential, frame: Frame) -> SolutionMap:
    best = max_transport(p, frame).values
    pairs = compat_pairs(p.frame, frame)
    hits = pairs[is_max(p.values[pairs[:, 0]], best[pairs[:, 1]])]
    sets: dict[int, set] = {j: set() for j in range(frame.size)}
    for i, j in hits.tolist():
        sets[j].add(i)
    return SolutionMap(p.frame, frame, {j: frozenset(s) for j, s in sets.items()})


@dataclass(frozen=True)
class MpeResult:
    value: float
    frame: Frame
    configurations: frozenset

    def sorted(self) -> list[int]:
        return sorted(self.configurations)


def mpe(
    tree: MarkovTree,
    root: Hashable | None = None,
    *,
    trust_tree: bool = False,
    store: MessageStore | None = None,
) -> MpeResult:
    """Maximum of the factor product and every element of the join frame attaining it.

    Collect runs with max-transport and records a solution map per message.
    The backward pass walks the tree from the root, picking for each node a
    maximizer given its parent's choice, and glues the node choices by
    intersecting their atom blocks.
    """
    _check_markov(tree, trust_tree)
    root = tree.default_root() if root is None else root
    store = MessageStore() if store is None else store
    maps: dict[Hashable, SolutionMap] = {}
    parents: dict[Hashable, Hashable] = {}

    def remember(w, v, eta, msg):
        maps[w] = solution_sets(eta, tree.labels[v])
        parents[w] = v

    etas = run_collect(tree, root, store, transport=max_transport, on_send=remember)
    top_eta = etas[root]
    value = float(top_eta.values.max())
    starts = np.flatnonzero(is_max(top_eta.values, value)).tolist()

    order = [root]
    k = 0
    while k < len(order):
        v = order[k]
        order.extend(w for w in tree.neighbors(v) if parents.get(w) == v)
        k += 1

    jf = join(*(tree.labels[v] for v in tree.nodes))
    found: set[int] = set()
    full = np.ones(len(jf.universe), dtype=bool)
    choice: dict[Hashable, int] = {}

    def extend(pos: int, mask: np.ndarray) -> None:
        if pos == len(order):
            found.add(int(jf.labels[np.flatnonzero(mask)[0]]))
            return
        v = order[pos]
        labels = tree.labels[v].labels
        options = starts if pos == 0 else sorted(maps[v][choice[parents[v]]])
        for theta in options:
            m = mask & (labels == theta)
            if m.any():
                choice[v] = theta
                extend(pos + 1, m)

    extend(0, full)
    return MpeResult(value, jf, frozenset(found))
