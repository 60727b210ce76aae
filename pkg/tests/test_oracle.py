import pytest

from fcf.oracle import OracleCapError, global_combine, oracle_marginal, oracle_mpe
from fcf.potentials import ProbPotential, unit


def test_global_combine_examples(e1):
    g = global_combine([e1.pA, e1.pB])
    assert g.frame == e1.TOP and g.values.tolist() == [10, 14, 15, 21]
    assert global_combine([e1.pA]).values.tolist() == [2, 3]
    assert global_combine([e1.pA, unit(e1.A)]).values.tolist() == [2, 3]


def test_oracle_marginal(e1):
    g = global_combine([e1.pA, e1.pB])
    assert oracle_marginal(g, e1.A).values.tolist() == [24, 36]
    assert oracle_marginal(g, e1.TOP).values.tolist() == [10, 14, 15, 21]
    assert oracle_marginal(g, e1.E).values.tolist() == [60]


def test_oracle_mpe(e1):
    assert oracle_mpe(global_combine([e1.pA, e1.pB])) == (21, {3})
    assert oracle_mpe(global_combine([unit(e1.A)])) == (1, {0, 1})
    assert oracle_mpe(global_combine([ProbPotential(e1.E, [4])])) == (4, {0})


def test_cap(e1, monkeypatch):
    with pytest.raises(OracleCapError):
        global_combine([e1.pA, e1.pB], cap=3)
    monkeypatch.setenv("FCF_ORACLE_CAP", "2")
    with pytest.raises(OracleCapError):
        global_combine([e1.pA, e1.pB])
    monkeypatch.setenv("FCF_ORACLE_CAP", "4")
    global_combine([e1.pA, e1.pB])


def test_empty():
    with pytest.raises(ValueError):
        global_combine([])
