"""Random frames, potentials and Markov trees for tests and experiments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Frame, MultivariateModel, Universe, mv_frame
from .markov import MarkovTree, build_join_tree_multivariate, verify_markov
from .pas import Pas
from .potentials import ProbPotential, SetPotential


def random_frame(universe: Universe, rng: np.random.Generator, max_blocks: int | None = None) -> Frame:
    n = len(universe)
    k = int(rng.integers(1, (max_blocks or n) + 1))
    return Frame.from_codes(universe, rng.integers(0, k, n))


def random_prob(frame: Frame, rng: np.random.Generator, zero_prob: float = 0.0) -> ProbPotential:
    v = rng.uniform(0.1, 2.0, frame.size)
    if zero_prob:
        v[rng.random(frame.size) < zero_prob] = 0.0
    return ProbPotential(frame, v)


def random_set_potential(
    frame: Frame, rng: np.random.Generator, n_focal: int = 3, allow_empty: bool = False
) -> SetPotential:
    masses = {}
    for _ in range(n_focal):
        mask = rng.random(frame.size) < 0.5
        if not mask.any() and not allow_empty:
            mask[rng.integers(frame.size)] = True
        masses[frozenset(np.flatnonzero(mask).tolist())] = float(rng.uniform(0.1, 1.0))
    return SetPotential(frame, masses)


def random_bpa(frame: Frame, rng: np.random.Generator, n_focal: int = 3) -> SetPotential:
    m = random_set_potential(frame, rng, n_focal)
    t = m.total()
    return SetPotential(frame, {s: v / t for s, v in m.masses.items()})


def random_pas(frame: Frame, rng: np.random.Generator, n: int = 3, precise: bool = False) -> Pas:
    w = rng.uniform(0.1, 1.0, n)
    w = w / w.sum()
    images = []
    for _ in range(n):
        if precise:
            images.append([int(rng.integers(frame.size))])
        else:
            mask = rng.random(frame.size) < 0.5
            if not mask.any():
                mask[rng.integers(frame.size)] = True
            images.append(np.flatnonzero(mask).tolist())
    return Pas.build(frame, [f"a{i}" for i in range(n)], w, images)


def binary_model(n: int) -> MultivariateModel:
    return MultivariateModel(tuple((f"x{i}", (0, 1)) for i in range(n)))


def random_mv_frame(model: MultivariateModel, rng: np.random.Generator) -> Frame:
    keep = [n for n in model.names if rng.random() < 0.5]
    return mv_frame(model, keep)


@dataclass
class TreeCase:
    tree: MarkovTree
    kind: str
    factors: list[ProbPotential] | None = None


def random_mv_tree(rng: np.random.Generator, n_vars: int = 6, n_factors: int = 5) -> TreeCase:
    """Join tree of random factors over binary variables (commutative frames)."""
    model = binary_model(n_vars)
    factors = []
    for _ in range(n_factors):
        k = int(rng.integers(1, 4))
        scope = rng.choice(model.names, size=k, replace=False).tolist()
        factors.append(random_prob(mv_frame(model, scope), rng))
    order = rng.permutation(model.names).tolist()
    return TreeCase(build_join_tree_multivariate(model, factors, order), "multivariate", factors)


def random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    return [(int(rng.integers(i)), i) for i in range(1, n)]


def random_partition_tree(
    rng: np.random.Generator, n_atoms: int = 8, n_nodes: int = 4, max_blocks: int = 4, tries: int = 10_000
) -> TreeCase:
    """Random frame-labeled tree on a plain universe, kept once it verifies."""
    universe = Universe(range(n_atoms))
    for _ in range(tries):
        labels = {f"n{i}": random_frame(universe, rng, max_blocks) for i in range(n_nodes)}
        edges = [(f"n{a}", f"n{b}") for a, b in random_tree_edges(n_nodes, rng)]
        tree = MarkovTree.build(labels, edges, {v: random_prob(f, rng) for v, f in labels.items()})
        if verify_markov(tree):
            return TreeCase(tree, "partition")
    raise RuntimeError("no Markov tree found")
