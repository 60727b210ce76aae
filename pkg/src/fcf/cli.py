"""Command line queries against a JSON model file.

    fcf MODEL VERB [ARGS] [FLAGS]

Exit status is 0 on success, 2 when evidence is contradictory (a null
potential would have to be normalized) and 1 for any other error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import conditioning as cond
from . import markov, maxprod, oracle, pas as pas_mod, potentials as pot
from .frames import Frame, FrameError, cond_independent, mv_frame
from .model import ModelError, ModelFile, dumps, load

EXIT_OK, EXIT_ERROR, EXIT_CONTRADICTION = 0, 1, 2


def fmt(x: float) -> str:
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


class Renderer:
    """Stable names for frames and their elements."""

    def __init__(self, model: ModelFile):
        self.model = model
        self._lookup: dict[Frame, dict[str, int]] = {}

    def frame(self, f: Frame) -> str:
        fid = self.model.registry.id_of(f)
        if fid is not None:
            return fid
        vs = self._vars(f)
        if vs is not None:
            return "{" + ",".join(vs) + "}"
        return "[" + ",".join(self._atoms(b) for b in f.blocks) + "]"

    def _vars(self, f: Frame):
        mv = self.model.variables
        if mv is None:
            return None
        vs = mv.variables_of(f)
        return vs if mv_frame(mv, vs) == f else None

    def _atoms(self, block) -> str:
        idx = self.model.universe.index
        return "{" + ",".join(_atom_str(a) for a in sorted(block, key=idx.get)) + "}"

    def element(self, f: Frame, i: int) -> str:
        names = self.model.element_names(f)
        if names:
            return names[i]
        vs = self._vars(f)
        if vs is not None:
            a = self.model.variables.assignment(f, i)
            return ",".join(f"{n}={_atom_str(a[n])}" for n in vs) or "*"
        return self._atoms(f.block(i))

    def subset(self, f: Frame, s) -> str:
        return "{" + "; ".join(self.element(f, i) for i in sorted(s)) + "}"

    def parse_element(self, f: Frame, token: str) -> int:
        table = self._lookup.get(f)
        if table is None:
            table = {}
            for i in range(f.size):
                table.setdefault(self.element(f, i), i)
            self._lookup[f] = table
        if token in table:
            return table[token]
        if token.isdigit() and int(token) < f.size:
            return int(token)
        raise FrameError(f"unknown element {token!r} of frame {self.frame(f)}")

    def potential(self, p: pot.ProbPotential) -> list[str]:
        lines = [f"frame {self.frame(p.frame)}"]
        lines += [f"{self.element(p.frame, i)} {fmt(v)}" for i, v in enumerate(p.values.tolist())]
        return lines

    def set_potential(self, m: pot.SetPotential) -> list[str]:
        lines = [f"frame {self.frame(m.frame)}"]
        lines += [f"{self.subset(m.frame, s)} {fmt(v)}" for s, v in m.items_sorted()]
        return lines


def _atom_str(a) -> str:
    if isinstance(a, tuple):
        return "(" + ",".join(map(_atom_str, a)) + ")"
    return str(a)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--arch", choices=("ss", "ls", "hugin"), default="ss")
    common.add_argument("--root")
    common.add_argument("--oracle", action="store_true", help="also compute by brute force and report the deviation")
    common.add_argument("--trace", action="store_true", help="print every message as it is sent")
    common.add_argument("--one", action="store_true", help="print only the first configuration")
    common.add_argument("--trust-tree", action="store_true", help="skip Markov verification (unsound if the tree is wrong)")
    common.add_argument("--normalize", action="store_true")
    common.add_argument("--tree")
    common.add_argument("--node")
    common.add_argument("--given")

    p = _Parser(prog="fcf", description="Local computation on families of compatible frames.")
    p.add_argument("model")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, args, help_ in [
        ("marginal", [], "node marginals of a Markov tree"),
        ("marginals", [], "alias of marginal"),
        ("combine", ["ids+"], "combine potentials, set potentials or PAS"),
        ("transport", ["id", "frame"], "transport to another frame"),
        ("normalize", ["id"], "normalize a potential"),
        ("support", ["id", "elements*"], "degree of support of a subset"),
        ("plausibility", ["id", "elements*"], "plausibility of a subset"),
        ("conditional", ["id", "target", "given_frame"], "conditional potential"),
        ("condition", ["id", "evidence"], "condition a potential on set-potential evidence"),
        ("mpe", [], "most probable configurations of a Markov tree"),
        ("check-ci", ["frames+"], "conditional independence of frames given --given"),
        ("verify-tree", [], "check the Markov property of --tree"),
        ("equiv-report", ["id", "t1", "t2", "given_frame"], "factorization equivalence report"),
        ("dump", [], "print the model in canonical form"),
    ]:
        sp = sub.add_parser(verb, parents=[common], help=help_)
        for a in args:
            name, nargs = (a[:-1], a[-1]) if a[-1] in "+*" else (a, None)
            sp.add_argument(name, nargs=nargs)
    return p


class Runner:
    def __init__(self, model: ModelFile, args: argparse.Namespace):
        self.m = model
        self.a = args
        self.r = Renderer(model)
        self.out: list[str] = []

    # lookups
    def frame(self, fid: str) -> Frame:
        if fid == self.m.registry.bottom_id:
            return self.m.registry[fid]
        if fid not in self.m.frame_specs:
            raise ModelError(f"unknown frame {fid!r}")
        return self.m.frame(fid)

    def item(self, key: str):
        for table in (self.m.potentials, self.m.set_potentials, self.m.pas):
            if key in table:
                return table[key]
        raise ModelError(f"unknown potential, set potential or PAS {key!r}")

    def prob(self, key: str) -> pot.ProbPotential:
        if key not in self.m.potentials:
            raise ModelError(f"unknown probability potential {key!r}")
        return self.m.potentials[key]

    def tree(self) -> markov.MarkovTree:
        if not self.a.tree:
            raise UsageError("--tree is required")
        return self.m.tree(self.a.tree)

    def emit_any(self, x) -> None:
        if isinstance(x, pot.ProbPotential):
            if self.a.normalize:
                x = pot.pp_normalize(x)
            self.out += self.r.potential(x)
        elif isinstance(x, pot.SetPotential):
            if self.a.normalize:
                x = pot.sp_normalize(x)
            self.out += self.r.set_potential(x)
        else:
            self.out += self.r.set_potential(pas_mod.pas_bpa(x))

    def subset(self, frame: Frame, tokens: Sequence[str]) -> frozenset:
        return frozenset(self.r.parse_element(frame, t) for t in tokens)

    def trace(self, store: markov.MessageStore) -> None:
        if self.a.trace:
            for w, v, msg in store.log:
                vals = ",".join(fmt(x) for x in msg.values.tolist())
                self.out.append(f"MSG {w}->{v} label={self.r.frame(msg.frame)} values=[{vals}]")

    # verbs
    def marginal(self):
        tree = self.tree()
        store = markov.MessageStore()
        root = self.a.root
        if root is not None and root not in tree.labels:
            raise ModelError(f"unknown root node {root!r}")
        if self.a.node is not None and self.a.node not in tree.labels:
            raise ModelError(f"unknown node {self.a.node!r}")
        kw = dict(trust_tree=self.a.trust_tree, store=store)
        if self.a.arch == "ss":
            res = markov.shenoy_shafer(tree, root, **kw)
        elif self.a.arch == "ls":
            res = markov.lauritzen_spiegelhalter(tree, root, **kw)
        else:
            res = markov.hugin(tree, root, **kw).nodes
        self.trace(store)
        nodes = [self.a.node] if self.a.node is not None else sorted(tree.nodes)
        dev = 0.0
        g = oracle.global_combine([tree.factors[v] for v in tree.nodes]) if self.a.oracle else None
        for v in nodes:
            self.out.append(f"node {v}")
            self.emit_any(res[v])
            if g is not None:
                ref = oracle.oracle_marginal(g, tree.labels[v])
                dev = max(dev, float(np.max(np.abs(ref.values - res[v].values))))
        self.out.append(f"messages={len(store)}")
        if g is not None:
            self.out.append(f"oracle_max_abs_dev={fmt(dev)}")

    marginals = marginal

    def combine(self):
        items = [self.item(k) for k in self.a.ids]
        kinds = {type(x) for x in items}
        if len(kinds) != 1:
            raise ModelError("combine needs operands of one kind")
        if isinstance(items[0], pot.ProbPotential):
            res = pot.combine_all(items)
        elif isinstance(items[0], pot.SetPotential):
            res = items[0]
            for m in items[1:]:
                res = pot.sp_combine(res, m)
        else:
            res = items[0]
            for h in items[1:]:
                res = pas_mod.pas_combine(res, h)
        self.emit_any(res)

    def transport(self):
        x, f = self.item(self.a.id), self.frame(self.a.frame)
        if isinstance(x, pot.ProbPotential):
            self.emit_any(pot.pp_transport(x, f))
        elif isinstance(x, pot.SetPotential):
            self.emit_any(pot.sp_transport(x, f))
        else:
            self.emit_any(pas_mod.pas_transport(x, f))

    def normalize(self):
        self.a.normalize = True
        self.emit_any(self.item(self.a.id))

    def _bpa(self, x) -> pot.SetPotential:
        if isinstance(x, pot.ProbPotential):
            raise ModelError("support and plausibility need a set potential or PAS")
        return pas_mod.pas_bpa(x) if isinstance(x, pas_mod.Pas) else x

    def support(self):
        x = self.item(self.a.id)
        m = self._bpa(x)
        s = self.subset(m.frame, self.a.elements)
        v = pas_mod.pas_degree_of_support(x, s) if isinstance(x, pas_mod.Pas) else pot.sp_support(m, s)
        self.out.append(f"support={fmt(v)}")

    def plausibility(self):
        m = self._bpa(self.item(self.a.id))
        self.out.append(f"plausibility={fmt(pot.sp_plausibility(m, self.subset(m.frame, self.a.elements)))}")

    def conditional(self):
        p = self.prob(self.a.id)
        self.emit_any(cond.conditional(p, self.frame(self.a.target), self.frame(self.a.given_frame)))

    def condition(self):
        p = self.prob(self.a.id)
        ev = self.item(self.a.evidence)
        if isinstance(ev, pas_mod.Pas):
            ev = pas_mod.pas_bpa(ev)
        if not isinstance(ev, pot.SetPotential):
            raise ModelError("evidence must be a set potential or PAS")
        self.out += self.r.potential(cond.condition_on_event(p, ev))

    def mpe(self):
        if self.a.arch != "ss":
            raise UsageError("mpe supports only --arch ss")
        tree = self.tree()
        store = markov.MessageStore()
        res = maxprod.mpe(tree, self.a.root, trust_tree=self.a.trust_tree, store=store)
        self.trace(store)
        self.out.append(f"value={fmt(res.value)}")
        configs = res.sorted()[:1] if self.a.one else res.sorted()
        self.out += [self.r.element(res.frame, e) for e in configs]
        if self.a.oracle:
            g = oracle.global_combine([tree.factors[v] for v in tree.nodes])
            val, cfg = oracle.oracle_mpe(g)
            same = g.frame == res.frame and cfg == res.configurations
            self.out.append(f"oracle_value_dev={fmt(abs(val - res.value))}")
            self.out.append(f"oracle_configurations_equal={str(same).lower()}")

    def check_ci(self):
        if not self.a.given:
            raise UsageError("--given is required")
        frames = [self.frame(f) for f in self.a.frames]
        self.out.append(str(cond_independent(frames, self.frame(self.a.given))).lower())

    def verify_tree(self):
        self.out.append(str(markov.verify_markov(self.tree())).lower())

    def equiv_report(self):
        rep = cond.factorization_equivalences(
            self.prob(self.a.id), self.frame(self.a.t1), self.frame(self.a.t2), self.frame(self.a.given_frame)
        )
        self.out += rep.lines()
        self.out.append(f"consistent={str(rep.consistent).lower()}")

    def dump(self):
        self.out.append(dumps(self.m).rstrip("\n"))


def run_query(model: ModelFile, argv: Sequence[str]) -> list[str]:
    """Run one query (verb and arguments, without the model path)."""
    args = _parser().parse_args(["-", *argv])
    return _run(model, args)


def _run(model: ModelFile, args) -> list[str]:
    runner = Runner(model, args)
    getattr(runner, args.verb.replace("-", "_"))()
    return runner.out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parser().parse_args(argv)
        model = load(args.model)
        lines = [f"query: {' '.join(argv[1:])}", *_run(model, args)]
    except pot.ContradictionError as e:
        print(f"contradiction: {e}", file=sys.stderr)
        return EXIT_CONTRADICTION
    except (UsageError, ModelError, FrameError, ValueError, KeyError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
