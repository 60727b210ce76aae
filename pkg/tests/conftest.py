from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from fcf.frames import Frame, MultivariateModel, Universe, bottom, make_frame, mv_frame, top
from fcf.potentials import ProbPotential

DATA = Path(__file__).parent / "data"


@dataclass
class E1:
    U: Universe
    A: Frame
    B: Frame
    C: Frame
    TOP: Frame
    E: Frame
    pA: ProbPotential
    pB: ProbPotential


@pytest.fixture
def e1() -> E1:
    U = Universe([1, 2, 3, 4])
    A = make_frame(U, [[1, 2], [3, 4]])
    B = make_frame(U, [[1, 3], [2, 4]])
    return E1(
        U, A, B, make_frame(U, [[1], [2], [3, 4]]), top(U), bottom(U),
        ProbPotential(A, [2, 3]), ProbPotential(B, [5, 7]),
    )


@dataclass
class T1:
    model: MultivariateModel
    XY: Frame
    YZ: Frame
    q1: ProbPotential
    q2: ProbPotential


@pytest.fixture
def t1() -> T1:
    m = MultivariateModel.from_dict({"x": [0, 1], "y": [0, 1], "z": [0, 1]})
    XY, YZ = mv_frame(m, ["x", "y"]), mv_frame(m, ["y", "z"])
    return T1(m, XY, YZ, ProbPotential(XY, [1, 2, 3, 4]), ProbPotential(YZ, [1, 1, 2, 2]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
