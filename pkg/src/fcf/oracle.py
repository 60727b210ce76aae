"""Brute-force reference computations on the join frame of all factors.

Only potentials primitives are used here, never the tree engine.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .frames import Frame, join
from .potentials import ProbPotential, pp_combine, pp_transport

DEFAULT_CAP = 10**6


class OracleCapError(RuntimeError):
    pass


def oracle_cap() -> int:
    raw = os.environ.get("FCF_ORACLE_CAP")
    return int(raw) if raw else DEFAULT_CAP


@dataclass(frozen=True)
class GlobalProduct:
    frame: Frame
    values: np.ndarray

    @property
    def potential(self) -> ProbPotential:
        return ProbPotential(self.frame, self.values)


def global_combine(factors: Sequence[ProbPotential], cap: int | None = None) -> GlobalProduct:
    if not factors:
        raise ValueError("global_combine needs at least one factor")
    cap = oracle_cap() if cap is None else cap
    jf = join(*(f.frame for f in factors))
    if jf.size > cap:
        raise OracleCapError(f"join frame has {jf.size} elements, above the oracle cap {cap}")
    acc = factors[0]
    for f in factors[1:]:
        acc = pp_combine(acc, f)
    return GlobalProduct(acc.frame, acc.values)


def oracle_marginal(g: GlobalProduct, frame: Frame) -> ProbPotential:
    return pp_transport(g.potential, frame)


def oracle_mpe(g: GlobalProduct) -> tuple[float, frozenset]:
    """Maximum and every element within a relative ``1e-12`` of it."""
    best = float(g.values.max())
    return best, frozenset(np.flatnonzero(g.values >= best * (1.0 - 1e-12)).tolist())
