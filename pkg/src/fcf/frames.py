"""Frames as partitions of a finite universe.

A frame is a partition of an explicit finite universe. Its elements are the
blocks, numbered in canonical order (by smallest contained atom), so two frames
are equal exactly when they induce the same partition. Refinement, join, meet,
compatibility and the transport of subsets all reduce to operations on the
per-atom block labels.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class FrameError(ValueError):
    """Invalid frame construction or incompatible frames."""


class Universe:
    """Ordered finite set of atoms."""

    def __init__(self, atoms: Iterable[Hashable]):
        atoms = tuple(atoms)
        if not atoms:
            raise FrameError("universe must be nonempty")
        index = {}
        for i, a in enumerate(atoms):
            if a in index:
                raise FrameError(f"duplicate atom {a!r} in universe")
            index[a] = i
        self.atoms = atoms
        self.index = index

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Universe) and self.atoms == other.atoms

    def __hash__(self):
        return hash(self.atoms)

    def __repr__(self):
        if len(self.atoms) <= 8:
            return f"Universe({list(self.atoms)!r})"
        return f"Universe(<{len(self.atoms)} atoms>)"


def _canonical_labels(codes: np.ndarray) -> np.ndarray:
    """Relabel integer codes so blocks are numbered by first occurrence."""
    _, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[inverse.reshape(-1)].astype(np.int64)


class Frame:
    """A partition of ``universe``; element ``i`` is the ``i``-th block.

    ``labels[u]`` is the block index of atom ``u`` (by atom position).
    Construct through :func:`make_frame` or :meth:`from_codes`.
    """

    __slots__ = ("universe", "labels", "size", "__dict__")

    def __init__(self, universe: Universe, labels: np.ndarray):
        labels = np.asarray(labels, dtype=np.int64)
        labels.setflags(write=False)
        self.universe = universe
        self.labels = labels
        self.size = int(labels.max()) + 1

    @classmethod
    def from_codes(cls, universe: Universe, codes) -> "Frame":
        codes = np.asarray(codes)
        if codes.shape != (len(universe),):
            raise FrameError("one code per atom required")
        return cls(universe, _canonical_labels(codes))

    @cached_property
    def _key(self) -> bytes:
        return self.labels.tobytes()

    @cached_property
    def _hash(self) -> int:
        return hash((len(self.universe), self._key))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Frame):
            return NotImplemented
        return self.universe == other.universe and self._key == other._key

    def __hash__(self):
        return self._hash

    def __len__(self) -> int:
        return self.size

    @cached_property
    def reps(self) -> np.ndarray:
        """Position of the smallest atom of every block, in element order."""
        _, first = np.unique(self.labels, return_index=True)
        return first

    @cached_property
    def blocks(self) -> tuple[frozenset, ...]:
        members: list[list] = [[] for _ in range(self.size)]
        for atom, lab in zip(self.universe.atoms, self.labels.tolist()):
            members[lab].append(atom)
        return tuple(frozenset(m) for m in members)

    def block(self, element: int) -> frozenset:
        return self.blocks[element]

    def element_of(self, atom: Hashable) -> int:
        """The element (block index) containing ``atom``."""
        return int(self.labels[self.universe.index[atom]])

    def __repr__(self):
        if self.size <= 6 and len(self.universe) <= 12:
            inner = ", ".join(
                "{" + ",".join(map(repr, sorted(b, key=self.universe.index.get))) + "}"
                for b in self.blocks
            )
            return f"Frame[{inner}]"
        return f"Frame(<{self.size} elements over {len(self.universe)} atoms>)"


def make_frame(universe: Universe, blocks: Sequence[Iterable[Hashable]]) -> Frame:
    """Build the canonical frame whose elements are ``blocks``.

    Raises :class:`FrameError` on an empty block, an unknown atom, an atom in
    two blocks, or atoms left uncovered.
    """
    codes = np.full(len(universe), -1, dtype=np.int64)
    for b, block in enumerate(blocks):
        block = list(block)
        if not block:
            raise FrameError(f"block {b} is empty")
        for atom in block:
            if atom not in universe.index:
                raise FrameError(f"block {b} contains unknown atom {atom!r}")
            u = universe.index[atom]
            if codes[u] != -1:
                raise FrameError(
                    f"block {b} overlaps block {int(codes[u])} on atom {atom!r}"
                )
            codes[u] = b
    missing = [universe.atoms[u] for u in np.flatnonzero(codes < 0)]
    if missing:
        raise FrameError(f"blocks do not cover atoms {missing!r}")
    return Frame.from_codes(universe, codes)


def top(universe: Universe) -> Frame:
    """The finest frame: one element per atom."""
    return Frame(universe, np.arange(len(universe)))


def bottom(universe: Universe) -> Frame:
    """The coarsest frame ``{U}`` with a single element."""
    return Frame(universe, np.zeros(len(universe), dtype=np.int64))


def _check_same(*frames: Frame) -> Universe:
    u = frames[0].universe
    for f in frames[1:]:
        if f.universe != u:
            raise FrameError("frames live on different universes")
    return u


@lru_cache(maxsize=4096)
def compat_pairs(f1: Frame, f2: Frame) -> np.ndarray:
    """All compatible element pairs ``(i, j)`` as a ``(k, 2)`` array, sorted."""
    _check_same(f1, f2)
    codes = f1.labels * f2.size + f2.labels
    u = np.unique(codes)
    return np.stack([u // f2.size, u % f2.size], axis=1)


@lru_cache(maxsize=4096)
def _compat_sets(src: Frame, dst: Frame) -> tuple[frozenset, ...]:
    sets: list[set] = [set() for _ in range(src.size)]
    for i, j in compat_pairs(src, dst).tolist():
        sets[i].add(j)
    return tuple(frozenset(s) for s in sets)


def refines(coarse: Frame, fine: Frame) -> bool:
    """True iff every block of ``fine`` lies inside a block of ``coarse``."""
    return len(compat_pairs(fine, coarse)) == fine.size


def _require_refines(coarse: Frame, fine: Frame) -> None:
    if not refines(coarse, fine):
        raise FrameError("frame is not a refinement of the coarser frame")


def refining_map(coarse: Frame, fine: Frame) -> dict[int, frozenset]:
    """The refining ``coarse -> 2^fine``: element to the fine elements inside it."""
    _require_refines(coarse, fine)
    return dict(enumerate(_compat_sets(coarse, fine)))


def projection_index(fine: Frame, coarse: Frame) -> np.ndarray:
    """For ``coarse <= fine``: the coarse element containing each fine element."""
    _require_refines(coarse, fine)
    return coarse.labels[fine.reps]


def transport_set(subset: Iterable[int], src: Frame, dst: Frame) -> frozenset:
    """Elements of ``dst`` compatible with some element of ``subset`` of ``src``."""
    sets = _compat_sets(src, dst)
    out: set = set()
    for i in subset:
        out |= sets[i]
    return frozenset(out)


def saturation(subset: Iterable[int], fine: Frame, coarse: Frame) -> frozenset:
    """Coarse elements whose refinement meets ``subset`` (requires coarse <= fine)."""
    _require_refines(coarse, fine)
    return transport_set(subset, fine, coarse)


def compatible(f1: Frame, i: int, f2: Frame, j: int) -> bool:
    """Whether element ``i`` of ``f1`` and element ``j`` of ``f2`` share an atom."""
    return j in _compat_sets(f1, f2)[i]


def compatible_set(element: int, src: Frame, dst: Frame) -> frozenset:
    """``R_element(dst)``: the elements of ``dst`` compatible with ``element``."""
    return _compat_sets(src, dst)[element]


def join(*frames: Frame) -> Frame:
    """Minimal common refinement: blocks are the nonempty block intersections."""
    if len(frames) == 1 and not isinstance(frames[0], Frame):
        frames = tuple(frames[0])
    if not frames:
        raise FrameError("join of an empty family")
    u = _check_same(*frames)
    if len(frames) == 1:
        return frames[0]
    stacked = np.stack([f.labels for f in frames], axis=1)
    _, inverse = np.unique(stacked, axis=0, return_inverse=True)
    return Frame.from_codes(u, inverse.reshape(-1))


def meet(f1: Frame, f2: Frame) -> Frame:
    """Finest common coarsening: connected components of the block-overlap graph."""
    _check_same(f1, f2)
    pairs = compat_pairs(f1, f2)
    n = f1.size + f2.size
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], f1.size + pairs[:, 1])), shape=(n, n)
    )
    _, comp = connected_components(graph, directed=False)
    return Frame.from_codes(f1.universe, comp[f1.labels])


def decompose(element: int, joined: Frame, parts: Sequence[Frame]) -> tuple[int, ...]:
    """The unique generating elements of a join element (one per part)."""
    rep = joined.reps[element]
    return tuple(int(f.labels[rep]) for f in parts)


def cond_independent(frames: Sequence[Frame], given: Frame) -> bool:
    """Whether ``frames`` are conditionally independent given ``given``.

    For each element of ``given``, the jointly compatible tuples must be the
    full product of the per-frame compatible sets. The jointly compatible
    tuples are exactly those realized by some atom of the conditioning block,
    so the test runs in O(|U| * n) rather than enumerating the product.
    """
    frames = list(frames)
    if not frames:
        raise FrameError("need at least one frame")
    _check_same(given, *frames)
    order = np.argsort(given.labels, kind="stable")
    bounds = np.flatnonzero(np.diff(given.labels[order])) + 1
    stacked = np.stack([f.labels for f in frames], axis=1)[order]
    for chunk in np.split(stacked, bounds):
        per_frame = 1
        for col in range(chunk.shape[1]):
            per_frame *= len(np.unique(chunk[:, col]))
        realized = len(np.unique(chunk, axis=0))
        if realized != per_frame:
            return False
    return True


def is_commutative_pair(f1: Frame, f2: Frame) -> bool:
    """Whether ``f1`` and ``f2`` are conditionally independent given their meet."""
    return cond_independent([f1, f2], meet(f1, f2))


@dataclass(frozen=True)
class MultivariateModel:
    """Finite variables with finite domains; frames are variable subsets.

    The universe is the product of the domains in declaration order.
    """

    variables: tuple[tuple[str, tuple], ...]

    def __post_init__(self):
        names = [n for n, _ in self.variables]
        if len(set(names)) != len(names):
            raise FrameError("duplicate variable names")
        for n, dom in self.variables:
            if len(dom) == 0:
                raise FrameError(f"variable {n!r} has an empty domain")

    @classmethod
    def from_dict(cls, domains: dict[str, Sequence]) -> "MultivariateModel":
        return cls(tuple((n, tuple(d)) for n, d in domains.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    @cached_property
    def universe(self) -> Universe:
        return Universe(itertools.product(*(d for _, d in self.variables)))

    @cached_property
    def _coords(self) -> np.ndarray:
        shape = tuple(len(d) for _, d in self.variables)
        return np.indices(shape).reshape(len(shape), -1).T

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise FrameError(f"unknown variable {name!r}") from None

    def frame(self, subset: Iterable[str]) -> Frame:
        return mv_frame(self, subset)

    def variables_of(self, frame: Frame) -> tuple[str, ...]:
        """Variables constant on every block of ``frame`` (model order)."""
        return tuple(
            name
            for k, name in enumerate(self.names)
            if refines(_variable_frame(self, k), frame)
        )

    def assignment(self, frame: Frame, element: int) -> dict[str, object]:
        """The values an element of ``frame`` fixes, keyed by variable."""
        atom = self.universe.atoms[frame.reps[element]]
        names = self.variables_of(frame)
        return {n: atom[self.position(n)] for n in names}


@lru_cache(maxsize=1024)
def _variable_frame(model: MultivariateModel, k: int) -> Frame:
    return Frame.from_codes(model.universe, model._coords[:, k])


def mv_frame(model: MultivariateModel, subset: Iterable[str]) -> Frame:
    """The frame of the variables in ``subset``: one element per tuple."""
    ks = sorted({model.position(n) for n in subset})
    if not ks:
        return bottom(model.universe)
    coords = model._coords[:, ks]
    sizes = [len(model.variables[k][1]) for k in ks]
    codes = np.ravel_multi_index(coords.T, sizes)
    return Frame.from_codes(model.universe, codes)


class FrameRegistry:
    """Named frames on one universe with memoized joins and meets.

    The bottom frame is always present under ``bottom_id``. Joins and meets
    of registered frames are computed on demand; with ``closure=True`` they are
    registered under generated ids.
    """

    bottom_id = "E"

    def __init__(self, universe: Universe, closure: bool = True):
        self.universe = universe
        self.closure = closure
        self.frames: dict[str, Frame] = {self.bottom_id: bottom(universe)}
        self._ids: dict[Frame, str] = {self.frames[self.bottom_id]: self.bottom_id}
        self._lock = threading.Lock()

    def register(self, frame_id: str, frame: Frame) -> Frame:
        if frame.universe != self.universe:
            raise FrameError(f"frame {frame_id!r} is on a different universe")
        with self._lock:
            if frame_id in self.frames and self.frames[frame_id] != frame:
                raise FrameError(f"frame id {frame_id!r} already registered")
            self.frames[frame_id] = frame
            self._ids.setdefault(frame, frame_id)
        return frame

    def __getitem__(self, frame_id: str) -> Frame:
        try:
            return self.frames[frame_id]
        except KeyError:
            raise FrameError(f"unknown frame {frame_id!r}") from None

    def __contains__(self, frame_id: str) -> bool:
        return frame_id in self.frames

    def id_of(self, frame: Frame) -> str | None:
        return self._ids.get(frame)

    def _derived(self, prefix: str, ids: Sequence[str], frame: Frame) -> Frame:
        if self.closure:
            with self._lock:
                if frame not in self._ids:
                    name = f"{prefix}({','.join(ids)})"
                    self.frames[name] = frame
                    self._ids[frame] = name
        return frame

    def join(self, *ids: str) -> Frame:
        return self._derived("join", ids, join(*(self[i] for i in ids)))

    def meet(self, a: str, b: str) -> Frame:
        return self._derived("meet", (a, b), meet(self[a], self[b]))
