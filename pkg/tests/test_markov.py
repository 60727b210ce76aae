import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fcf.frames import FrameError, MultivariateModel, Universe, cond_independent, is_commutative_pair, meet, mv_frame
from fcf.generators import random_mv_tree, random_partition_tree, random_prob
from fcf.markov import (
    MarkovError,
    MarkovTree,
    MessageStore,
    build_join_tree_multivariate,
    collect,
    hugin,
    lauritzen_spiegelhalter,
    schedule,
    shenoy_shafer,
    verify_markov,
)
from fcf.oracle import global_combine, oracle_marginal
from fcf.potentials import NotCommutativeError, ProbPotential, close, unit

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def chain(t1):
    return MarkovTree.build({"v1": t1.XY, "v2": t1.YZ}, [("v1", "v2")], {"v1": t1.q1, "v2": t1.q2})


def star(e1, center):
    return MarkovTree.build(
        {"c": center, "a": e1.A, "b": e1.B}, [("c", "a"), ("c", "b")], {"a": e1.pA, "b": e1.pB}
    )


def test_verify_examples(chain, e1):
    assert verify_markov(chain)
    assert verify_markov(MarkovTree.build({"only": e1.C}, []))
    assert verify_markov(star(e1, e1.E))
    bad = MarkovTree.build({"a": e1.A, "b": e1.B, "c": e1.C}, [("a", "b"), ("b", "c")])
    assert not verify_markov(bad)


def test_structure_validation(e1):
    with pytest.raises(FrameError, match="tree"):
        MarkovTree.build({"a": e1.A, "b": e1.B}, [])
    with pytest.raises(FrameError, match="tree"):
        MarkovTree.build({"a": e1.A, "b": e1.B, "c": e1.C}, [("a", "b"), ("b", "a")])
    with pytest.raises(FrameError, match="unknown"):
        MarkovTree.build({"a": e1.A}, [("a", "z")])
    with pytest.raises(FrameError, match="factor"):
        MarkovTree.build({"a": e1.A}, [], {"a": e1.pB})


def test_collect_examples(chain, e1):
    store = MessageStore()
    assert collect(chain, "v1", store=store).values.tolist() == [2, 8, 6, 16]
    assert len(store) == 1
    single = MarkovTree.build({"n": e1.A}, [], {"n": e1.pA})
    assert collect(single) == e1.pA
    units = MarkovTree.build({"a": e1.A, "b": e1.B, "c": e1.E}, [("c", "a"), ("c", "b")])
    # units do not stay units under transport: each value counts compatible join elements
    assert collect(units, "a").values.tolist() == [2, 2]
    assert collect(units, "c").values.tolist() == [4]


def test_collect_of_units_on_multivariate(t1):
    tree = MarkovTree.build({"v1": t1.XY, "v2": t1.YZ}, [("v1", "v2")])
    assert collect(tree, "v1").values.tolist() == [2, 2, 2, 2]


def test_collect_refuses_non_markov(e1):
    bad = MarkovTree.build({"a": e1.A, "b": e1.B, "c": e1.C}, [("a", "b"), ("b", "c")])
    with pytest.raises(MarkovError):
        collect(bad)
    collect(bad, trust_tree=True)


@pytest.mark.parametrize("arch", [shenoy_shafer, lauritzen_spiegelhalter, lambda t, **k: hugin(t, **k).nodes])
def test_architectures_on_chain(chain, arch):
    res = arch(chain)
    assert res["v1"].values.tolist() == [2, 8, 6, 16]
    assert res["v2"].values.tolist() == [4, 4, 12, 12]


def test_shenoy_shafer_message_count(chain):
    store = MessageStore()
    shenoy_shafer(chain, store=store)
    assert len(store) == 2


def test_single_edge_with_vacuous_factor(t1):
    tree = MarkovTree.build({"v1": t1.XY, "v2": t1.YZ}, [("v1", "v2")], {"v1": t1.q1})
    res = shenoy_shafer(tree)
    g = global_combine([t1.q1, unit(t1.YZ)])
    for v in ("v1", "v2"):
        assert close(res[v], oracle_marginal(g, tree.labels[v]))


def test_single_node_architectures(e1):
    tree = MarkovTree.build({"n": e1.C}, [], {"n": ProbPotential(e1.C, [1, 2, 3])})
    for arch in (shenoy_shafer, lauritzen_spiegelhalter):
        assert arch(tree)["n"].values.tolist() == [1, 2, 3]


def test_star_top_center(e1):
    tree = star(e1, e1.TOP)
    g = global_combine([e1.pA, e1.pB])
    ss = shenoy_shafer(tree)
    for res in (lauritzen_spiegelhalter(tree), hugin(tree).nodes):
        for v in tree.nodes:
            assert close(res[v], ss[v])
            assert close(res[v], oracle_marginal(g, tree.labels[v]))
    h = hugin(tree)
    for edge, sep in h.separators.items():
        assert close(sep, oracle_marginal(g, sep.frame))


def test_division_architectures_need_commutative_frames():
    u = Universe([1, 2, 3])
    from fcf.frames import make_frame
    th, la = make_frame(u, [[1], [2, 3]]), make_frame(u, [[1, 2], [3]])
    tree = MarkovTree.build({"a": th, "b": la}, [("a", "b")])
    assert verify_markov(tree)
    with pytest.raises(NotCommutativeError, match="commutative"):
        lauritzen_spiegelhalter(tree)
    with pytest.raises(NotCommutativeError):
        hugin(tree)
    shenoy_shafer(tree)


def test_schedule_is_deterministic(e1):
    tree = star(e1, e1.E)
    assert schedule(tree, "a") == [("b", "c"), ("c", "a"), ("a", None)]
    assert tree.default_root() == "a"


def test_message_store_single_writer(e1):
    store = MessageStore()
    store.put("a", "b", e1.pA)
    with pytest.raises(RuntimeError):
        store.put("a", "b", e1.pA)


def test_join_tree_examples(t1):
    tree = build_join_tree_multivariate(t1.model, [t1.q1, t1.q2], ["z", "x", "y"])
    assert len(tree.nodes) == 2 and verify_markov(tree)
    assert {tree.labels[v] for v in tree.nodes} == {t1.XY, t1.YZ}
    single = build_join_tree_multivariate(t1.model, [t1.q1], ["x", "y", "z"])
    assert len(single.nodes) == 1 and single.factors[single.nodes[0]] == t1.q1
    m = t1.model
    px, pz = ProbPotential(mv_frame(m, ["x"]), [1, 2]), ProbPotential(mv_frame(m, ["z"]), [3, 4])
    glued = build_join_tree_multivariate(m, [px, pz], ["x", "y", "z"])
    assert "glue" in glued.nodes and glued.labels["glue"].size == 1 and verify_markov(glued)
    with pytest.raises(FrameError, match="unknown variable"):
        build_join_tree_multivariate(m, [px], ["w"])
    with pytest.raises(FrameError, match="misses"):
        build_join_tree_multivariate(m, [t1.q1], ["x"])


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_join_tree_preserves_product(seed):
    rng = np.random.default_rng(seed)
    case = random_mv_tree(rng, n_vars=5, n_factors=4)
    tree = case.tree
    assert verify_markov(tree)
    assert len(tree.nodes) <= 6
    built = global_combine([tree.factors[v] for v in tree.nodes])
    given_ = global_combine(case.factors)
    assert close(built.potential, given_.potential)


def _subtrees(tree):
    nodes = list(tree.nodes)
    for v in nodes:
        for w in tree.neighbors(v):
            yield tree.subtree(tree.subtree_nodes(v, w))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_subtree_and_neighbor_theorems(seed):
    rng = np.random.default_rng(seed)
    tree = random_partition_tree(rng, n_atoms=6, n_nodes=4).tree
    for sub in _subtrees(tree):
        assert verify_markov(sub)
    for v in tree.nodes:
        for w in tree.neighbors(v):
            # the label of v is independent of everything beyond w, given w
            assert cond_independent([tree.labels[v], tree.subtree_label(v, w)], tree.labels[w])


@settings(max_examples=40, deadline=None)
@given(seeds, st.booleans())
def test_soundness_against_oracle(seed, mv):
    rng = np.random.default_rng(seed)
    tree = (random_mv_tree(rng) if mv else random_partition_tree(rng, n_nodes=5)).tree
    g = global_combine([tree.factors[v] for v in tree.nodes])
    store = MessageStore()
    ss = shenoy_shafer(tree, store=store)
    assert len(store) == 2 * (len(tree.nodes) - 1)
    for v in tree.nodes:
        assert close(ss[v], oracle_marginal(g, tree.labels[v]))
    if all(is_commutative_pair(tree.labels[a], tree.labels[b]) for a, b in tree.edges):
        ls, hg = lauritzen_spiegelhalter(tree), hugin(tree)
        for v in tree.nodes:
            assert close(ls[v], ss[v]) and close(hg.nodes[v], ss[v])
            assert np.array_equal(ls[v].values > 0, ss[v].values > 0)
        for sep in hg.separators.values():
            assert close(sep, oracle_marginal(g, sep.frame))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_root_choice_does_not_matter(seed):
    rng = np.random.default_rng(seed)
    tree = random_mv_tree(rng).tree
    ref = shenoy_shafer(tree)
    for root in tree.nodes:
        res = shenoy_shafer(tree, root)
        assert all(close(res[v], ref[v]) for v in tree.nodes)
