"""Independent brute-force references used by the tests."""
import itertools

import numpy as np
from hypothesis import strategies as st

from fcf.frames import Frame, Universe


def set_partitions(n: int):
    """All partitions of range(n) as restricted growth strings."""
    def grow(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))
    yield from grow([0], 0) if n else iter([()])


def all_frames(universe: Universe) -> list[Frame]:
    return [Frame.from_codes(universe, np.array(c)) for c in set_partitions(len(universe))]


def blocks_of(f: Frame) -> list[set]:
    return [set(np.flatnonzero(f.labels == i).tolist()) for i in range(f.size)]


def brute_cond_independent(frames, given) -> bool:
    """Enumerate every tuple of blocks and test joint intersection literally."""
    fb = [blocks_of(f) for f in frames]
    for g in blocks_of(given):
        per = [[b for b in bs if b & g] for bs in fb]
        for combo in itertools.product(*per):
            inter = set(g)
            for b in combo:
                inter &= b
            if not inter:
                return False
    return True


def brute_join(frames) -> Frame:
    u = frames[0].universe
    n = len(u)
    codes = np.zeros(n, dtype=np.int64)
    seen = {}
    for a in range(n):
        key = tuple(int(f.labels[a]) for f in frames)
        codes[a] = seen.setdefault(key, len(seen))
    return Frame.from_codes(u, codes)


def brute_refines(coarse: Frame, fine: Frame) -> bool:
    return all(any(b <= c for c in blocks_of(coarse)) for b in blocks_of(fine))


def brute_meet(f1: Frame, f2: Frame) -> Frame:
    """Finest common coarsening by searching all partitions of the universe."""
    cands = [f for f in all_frames(f1.universe) if brute_refines(f, f1) and brute_refines(f, f2)]
    return max(cands, key=lambda f: f.size)


@st.composite
def frames_on(draw, universe: Universe, max_blocks: int | None = None):
    n = len(universe)
    k = max_blocks or n
    codes = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    return Frame.from_codes(universe, np.array(codes))


def coarsen(frame: Frame, rng: np.random.Generator, k: int | None = None) -> Frame:
    """Random frame coarser than ``frame``: merge its blocks at random."""
    k = k or int(rng.integers(1, frame.size + 1))
    merge = rng.integers(0, k, frame.size)
    return Frame.from_codes(frame.universe, merge[frame.labels])
