"""Markov trees and local computation of marginals.

Three architectures share one collect phase:

* Shenoy-Shafer keeps messages on directed edges and recombines them.
* Lauritzen-Spiegelhalter divides each outgoing collect message out of the
  sender's store.
* HUGIN keeps the inverse of the collect message on the edge instead.

The division architectures pass messages on edge meets and therefore need
every adjacent pair of node frames to commute.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .frames import (
    Frame,
    FrameError,
    MultivariateModel,
    bottom,
    cond_independent,
    is_commutative_pair,
    join,
    meet,
    mv_frame,
)
from .potentials import (
    NotCommutativeError,
    ProbPotential,
    pp_combine,
    pp_transport,
    unit,
)
from .conditioning import inverse

Node = Hashable


class MarkovError(FrameError):
    """The labeled tree does not have the Markov property."""


@dataclass(frozen=True)
class MarkovTree:
    nodes: tuple[Node, ...]
    edges: tuple[tuple[Node, Node], ...]
    labels: Mapping[Node, Frame]
    factors: Mapping[Node, ProbPotential]

    def __post_init__(self):
        nodes = set(self.nodes)
        if not nodes:
            raise FrameError("a Markov tree needs at least one node")
        if len(nodes) != len(self.nodes):
            raise FrameError("duplicate node ids")
        for a, b in self.edges:
            if a not in nodes or b not in nodes:
                raise FrameError(f"edge ({a!r}, {b!r}) references an unknown node")
            if a == b:
                raise FrameError(f"self loop on {a!r}")
        if len(self.edges) != len(nodes) - 1 or len(_reach(self._adj, self.nodes[0])) != len(nodes):
            raise FrameError("edges do not form a tree on the nodes")
        for v in self.nodes:
            if v not in self.labels:
                raise FrameError(f"node {v!r} has no frame")
            f = self.factors.get(v)
            if f is not None and f.frame != self.labels[v]:
                raise FrameError(f"factor of node {v!r} is not on the node's frame")

    @classmethod
    def build(
        cls,
        labels: Mapping[Node, Frame],
        edges: Iterable[tuple[Node, Node]],
        factors: Mapping[Node, ProbPotential] | None = None,
    ) -> "MarkovTree":
        """Nodes without a factor get the unit potential on their frame."""
        factors = dict(factors or {})
        full = {v: factors.get(v, unit(f)) for v, f in labels.items()}
        return cls(tuple(labels), tuple(tuple(e) for e in edges), dict(labels), full)

    @property
    def _adj(self) -> dict[Node, list[Node]]:
        adj: dict[Node, list[Node]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {v: sorted(ns) for v, ns in adj.items()}

    def neighbors(self, v: Node) -> list[Node]:
        return self._adj[v]

    def subtree_nodes(self, v: Node, w: Node) -> set[Node]:
        """Nodes of the component containing ``w`` once ``v`` is removed."""
        return _reach(self._adj, w, blocked=v)

    def subtree_label(self, v: Node, w: Node) -> Frame:
        return join(*(self.labels[u] for u in sorted(self.subtree_nodes(v, w))))

    def subtree(self, keep: Iterable[Node]) -> "MarkovTree":
        keep = set(keep)
        nodes = tuple(v for v in self.nodes if v in keep)
        edges = tuple(e for e in self.edges if e[0] in keep and e[1] in keep)
        return MarkovTree(
            nodes, edges, {v: self.labels[v] for v in nodes}, {v: self.factors[v] for v in nodes}
        )

    def default_root(self) -> Node:
        return min(self.nodes)


def _reach(adj, start, blocked=None) -> set:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w != blocked and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def verify_markov(tree: MarkovTree) -> bool:
    """Whether the subtree labels hanging off every node are independent given it."""
    for v in tree.nodes:
        ns = tree.neighbors(v)
        if len(ns) < 2:
            continue
        if not cond_independent([tree.subtree_label(v, w) for w in ns], tree.labels[v]):
            return False
    return True


@dataclass
class MessageStore:
    """Messages per directed edge ``(sender, receiver)``, written once each."""

    messages: dict[tuple[Node, Node], ProbPotential] = field(default_factory=dict)
    log: list[tuple[Node, Node, ProbPotential]] = field(default_factory=list)

    def put(self, sender: Node, receiver: Node, msg: ProbPotential) -> None:
        key = (sender, receiver)
        if key in self.messages:
            raise RuntimeError(f"message {sender!r}->{receiver!r} written twice")
        self.messages[key] = msg
        self.log.append((sender, receiver, msg))

    def __getitem__(self, key: tuple[Node, Node]) -> ProbPotential:
        return self.messages[key]

    def __len__(self) -> int:
        return len(self.messages)


def schedule(tree: MarkovTree, root: Node) -> list[tuple[Node, Node | None]]:
    """Nodes in collect order (children before parents) with their parent."""
    if root not in tree.labels:
        raise FrameError(f"unknown root {root!r}")
    order: list[tuple[Node, Node | None]] = []

    def visit(v, parent):
        for w in tree.neighbors(v):
            if w != parent:
                visit(w, v)
        order.append((v, parent))

    visit(root, None)
    return order


def _check_markov(tree: MarkovTree, trust_tree: bool) -> None:
    if not trust_tree and not verify_markov(tree):
        raise MarkovError("labeled tree is not a Markov tree; local computation would be unsound")


def _check_commutative(tree: MarkovTree) -> dict[tuple[Node, Node], Frame]:
    seps = {}
    for a, b in tree.edges:
        fa, fb = tree.labels[a], tree.labels[b]
        if not is_commutative_pair(fa, fb):
            raise NotCommutativeError(
                f"architecture requires commutative frames; edge ({a!r}, {b!r}) does not commute"
            )
        m = meet(fa, fb)
        seps[(a, b)] = seps[(b, a)] = m
    return seps


Transport = Callable[[ProbPotential, Frame], ProbPotential]


def run_collect(
    tree: MarkovTree,
    root: Node,
    store: MessageStore,
    transport: Transport = pp_transport,
    target: Callable[[Node, Node], Frame] | None = None,
    on_send: Callable[[Node, Node, ProbPotential, ProbPotential], None] | None = None,
) -> dict[Node, ProbPotential]:
    """Inward pass towards ``root``.

    Returns each node's store at the moment it sends (the root's final store
    under key ``root``). ``target(w, v)`` is the message frame, by default the
    receiver's frame; ``on_send(w, v, store_w, message)`` fires per message.
    """
    if target is None:
        target = lambda w, v: tree.labels[v]  # noqa: E731
    etas: dict[Node, ProbPotential] = {}
    for w, parent in schedule(tree, root):
        eta = tree.factors[w]
        for u in tree.neighbors(w):
            if u != parent:
                eta = pp_combine(eta, store[(u, w)])
        etas[w] = eta
        if parent is not None:
            msg = transport(eta, target(w, parent))
            store.put(w, parent, msg)
            if on_send is not None:
                on_send(w, parent, eta, msg)
    return etas


def collect(
    tree: MarkovTree,
    root: Node | None = None,
    *,
    trust_tree: bool = False,
    store: MessageStore | None = None,
) -> ProbPotential:
    """Marginal of the factor product on the root's frame."""
    _check_markov(tree, trust_tree)
    root = tree.default_root() if root is None else root
    store = MessageStore() if store is None else store
    return run_collect(tree, root, store)[root]


def shenoy_shafer(
    tree: MarkovTree,
    root: Node | None = None,
    *,
    trust_tree: bool = False,
    store: MessageStore | None = None,
) -> dict[Node, ProbPotential]:
    """All node marginals: collect to ``root``, then distribute back out."""
    _check_markov(tree, trust_tree)
    root = tree.default_root() if root is None else root
    store = MessageStore() if store is None else store
    order = schedule(tree, root)
    run_collect(tree, root, store)
    result: dict[Node, ProbPotential] = {}
    for v, parent in reversed(order):
        ns = tree.neighbors(v)
        eta = tree.factors[v]
        for u in ns:
            eta = pp_combine(eta, store[(u, v)])
        result[v] = eta
        for w in ns:
            if w == parent:
                continue
            out = tree.factors[v]
            for u in ns:
                if u != w:
                    out = pp_combine(out, store[(u, v)])
            store.put(v, w, pp_transport(out, tree.labels[w]))
    return {v: result[v] for v in tree.nodes}


def lauritzen_spiegelhalter(
    tree: MarkovTree,
    root: Node | None = None,
    *,
    trust_tree: bool = False,
    store: MessageStore | None = None,
) -> dict[Node, ProbPotential]:
    """All node marginals; collect messages are divided out at the sender."""
    _check_markov(tree, trust_tree)
    seps = _check_commutative(tree)
    root = tree.default_root() if root is None else root
    store = MessageStore() if store is None else store
    order = schedule(tree, root)
    nodes: dict[Node, ProbPotential] = {}

    def divide_out(w, v, eta, msg):
        nodes[w] = pp_combine(eta, inverse(msg))

    etas = run_collect(tree, root, store, target=lambda w, v: seps[(w, v)], on_send=divide_out)
    nodes[root] = etas[root]
    for v, parent in reversed(order):
        if parent is not None:
            nodes[v] = pp_combine(nodes[v], store[(parent, v)])
        for w in tree.neighbors(v):
            if w != parent:
                store.put(v, w, pp_transport(nodes[v], seps[(v, w)]))
    return {v: nodes[v] for v in tree.nodes}


@dataclass
class HuginResult:
    nodes: dict[Node, ProbPotential]
    separators: dict[frozenset, ProbPotential]
    collect_inverses: dict[frozenset, ProbPotential]


def hugin(
    tree: MarkovTree,
    root: Node | None = None,
    *,
    trust_tree: bool = False,
    store: MessageStore | None = None,
) -> HuginResult:
    """All node marginals; inverse collect messages are kept on the edges.

    After distribute, ``separators`` holds each edge's marginal on the meet
    of its endpoint frames.
    """
    _check_markov(tree, trust_tree)
    seps = _check_commutative(tree)
    root = tree.default_root() if root is None else root
    store = MessageStore() if store is None else store
    order = schedule(tree, root)
    inverses: dict[frozenset, ProbPotential] = {}

    def keep_inverse(w, v, eta, msg):
        inverses[frozenset((w, v))] = inverse(msg)

    etas = run_collect(tree, root, store, target=lambda w, v: seps[(w, v)], on_send=keep_inverse)
    nodes = dict(etas)
    separators: dict[frozenset, ProbPotential] = {}
    for v, parent in reversed(order):
        for w in tree.neighbors(v):
            if w == parent:
                continue
            msg = pp_transport(nodes[v], seps[(v, w)])
            store.put(v, w, msg)
            edge = frozenset((v, w))
            nodes[w] = pp_combine(nodes[w], pp_combine(msg, inverses[edge]))
            separators[edge] = msg
    return HuginResult({v: nodes[v] for v in tree.nodes}, separators, inverses)


ARCHITECTURES = {
    "ss": shenoy_shafer,
    "ls": lauritzen_spiegelhalter,
    "hugin": lambda tree, root=None, **kw: hugin(tree, root, **kw).nodes,
}


def build_join_tree_multivariate(
    model: MultivariateModel,
    factors: Sequence[ProbPotential],
    order: Sequence[str],
) -> MarkovTree:
    """Join tree from variable elimination.

    Eliminating a variable creates a clique from the scopes that mention it;
    the clique links to whichever later clique consumes its separator.
    Cliques contained in a neighbor are merged into it, and separate
    components are joined through a bottom-frame node with a unit factor.
    """
    for x in order:
        model.position(x)
    if len(set(order)) != len(order):
        raise FrameError("elimination order repeats a variable")
    scopes = [frozenset(model.variables_of(f.frame)) for f in factors]
    for f, s in zip(factors, scopes):
        if mv_frame(model, s) != f.frame:
            raise FrameError("factor is not on a variable-subset frame of the model")
    missing = set().union(*scopes) - set(order) if scopes else set()
    if missing:
        raise FrameError(f"elimination order misses variables {sorted(missing)}")

    cliques: list[frozenset] = []
    links: list[tuple[int, int]] = []
    active: list[tuple[frozenset, int | None]] = [(s, None) for s in scopes if s]
    for x in order:
        involved = [a for a in active if x in a[0]]
        if not involved:
            continue
        c = len(cliques)
        cliques.append(frozenset().union(*(s for s, _ in involved)))
        links.extend((src, c) for _, src in involved if src is not None)
        active = [a for a in active if x not in a[0]]
        active.append((cliques[c] - {x}, c))

    if not cliques:
        e = bottom(model.universe)
        prod = unit(e)
        for f in factors:
            prod = pp_combine(prod, f)
        return MarkovTree.build({"c0": e}, [], {"c0": prod})

    # merge cliques contained in a neighbor
    parent = list(range(len(cliques)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    changed = True
    while changed:
        changed = False
        for a, b in links:
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            if cliques[ra] <= cliques[rb]:
                parent[ra] = rb
                changed = True
            elif cliques[rb] <= cliques[ra]:
                parent[rb] = ra
                changed = True

    reps = sorted({find(i) for i in range(len(cliques))})
    name = {r: f"c{k}" for k, r in enumerate(reps)}
    labels = {name[r]: mv_frame(model, cliques[r]) for r in reps}
    edges = sorted({tuple(sorted((name[find(a)], name[find(b)]))) for a, b in links if find(a) != find(b)})

    # components are glued through a bottom-frame node
    adj: dict[str, list[str]] = {n: [] for n in labels}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    comps, seen = [], set()
    for n in labels:
        if n not in seen:
            comp = _reach(adj, n)
            seen |= comp
            comps.append(min(comp))
    if len(comps) > 1:
        labels["glue"] = bottom(model.universe)
        edges.extend(("glue", c) for c in comps)

    assigned = {n: unit(f) for n, f in labels.items()}
    first = next(iter(labels))
    for f, s in zip(factors, scopes):
        if s:
            # the clique created when the first variable of s is eliminated holds s
            c = next(i for i, cl in enumerate(cliques) if s <= cl)
            target = name[find(c)]
        else:
            target = first
        assigned[target] = pp_combine(assigned[target], f)
    return MarkovTree.build(labels, edges, assigned)
