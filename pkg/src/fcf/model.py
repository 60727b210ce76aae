"""JSON model files: universe or variables, frames, potentials, PAS and trees.

Layout (``"version": 1``)::

    {"version": 1,
     "universe": [1, 2, 3, 4],                       # or "variables": [{"name": "x", "domain": [0, 1]}]
     "frames": {"A": {"blocks": [[1, 2], [3, 4]], "names": ["a1", "a2"]},
                "XY": {"vars": ["x", "y"]},
                "B": [[1, 3], [2, 4]]},
     "potentials": {"pA": {"frame": "A", "values": [2, 3]}},
     "set_potentials": {"m": {"frame": "A", "masses": [{"set": [0], "mass": 0.5}]}},
     "pas": {"H": {"frame": "A", "assumptions": [{"id": "u", "weight": 1, "image": [0]}]}},
     "trees": {"T": {"nodes": {"v1": {"frame": "A", "factor": "pA"}}, "edges": []}}}

Validation errors name the offending JSON path, parse errors the line and column.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .frames import (
    Frame,
    FrameError,
    FrameRegistry,
    MultivariateModel,
    Universe,
    bottom,
    make_frame,
    mv_frame,
)
from .markov import MarkovTree
from .pas import Pas
from .potentials import ProbPotential, SetPotential

VERSION = 1


class ModelError(ValueError):
    def __init__(self, message: str, where: str = "$", source: str | None = None):
        self.where = where
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}{where}: {message}")


@dataclass
class TreeSpec:
    nodes: dict[str, tuple[str, str | None]]
    edges: list[tuple[str, str]]


@dataclass
class ModelFile:
    universe: Universe
    variables: MultivariateModel | None
    registry: FrameRegistry
    frame_specs: dict[str, dict]
    names: dict[str, list[str]]
    potentials: dict[str, ProbPotential] = field(default_factory=dict)
    set_potentials: dict[str, SetPotential] = field(default_factory=dict)
    pas: dict[str, Pas] = field(default_factory=dict)
    tree_specs: dict[str, TreeSpec] = field(default_factory=dict)

    def frame(self, frame_id: str) -> Frame:
        return self.registry[frame_id]

    def element_names(self, frame: Frame) -> list[str] | None:
        fid = self.registry.id_of(frame)
        return self.names.get(fid) if fid else None

    def tree(self, tree_id: str) -> MarkovTree:
        try:
            spec = self.tree_specs[tree_id]
        except KeyError:
            raise ModelError(f"unknown tree {tree_id!r}") from None
        labels = {v: self.frame(f) for v, (f, _) in spec.nodes.items()}
        factors = {v: self.potentials[p] for v, (_, p) in spec.nodes.items() if p is not None}
        return MarkovTree.build(labels, spec.edges, factors)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"version": VERSION}
        if self.variables is not None:
            out["variables"] = [
                {"name": n, "domain": list(d)} for n, d in self.variables.variables
            ]
        else:
            out["universe"] = list(self.universe.atoms)
        frames = {}
        for fid, spec in self.frame_specs.items():
            entry = dict(spec)
            if fid in self.names:
                entry["names"] = list(self.names[fid])
            frames[fid] = entry
        out["frames"] = frames
        ids: dict[Frame, str] = {}
        for fid in self.frame_specs:
            ids.setdefault(self.frame(fid), fid)
        ids.setdefault(bottom(self.universe), self.registry.bottom_id)

        def fid_of(frame):
            return ids[frame]

        out["potentials"] = {
            k: {"frame": fid_of(p.frame), "values": p.values.tolist()}
            for k, p in self.potentials.items()
        }
        out["set_potentials"] = {
            k: {
                "frame": fid_of(m.frame),
                "masses": [{"set": list(s), "mass": v} for s, v in m.items_sorted()],
            }
            for k, m in self.set_potentials.items()
        }
        out["pas"] = {
            k: {
                "frame": fid_of(h.frame),
                "assumptions": [
                    {"id": a, "weight": w, "image": sorted(img)}
                    for a, w, img in zip(h.assumptions, h.weights, h.images)
                ],
            }
            for k, h in self.pas.items()
        }
        out["trees"] = {
            k: {
                "nodes": {
                    v: ({"frame": f, "factor": p} if p is not None else {"frame": f})
                    for v, (f, p) in t.nodes.items()
                },
                "edges": [list(e) for e in t.edges],
            }
            for k, t in self.tree_specs.items()
        }
        return out

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return self.to_dict() == other.to_dict() and all(
            self.frame(f) == other.frame(f) for f in self.frame_specs
        )


def dumps(model: ModelFile) -> str:
    return json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n"


def dump(model: ModelFile, path: str | Path) -> None:
    Path(path).write_text(dumps(model))


def load(path: str | Path) -> ModelFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ModelError(f"cannot read file ({e.strerror})", source=str(path)) from None
    return loads(text, source=str(path))


def loads(text: str, source: str | None = None) -> ModelFile:
    if not text.strip():
        raise ModelError("empty model file", source=source)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(e.msg, f"line {e.lineno} column {e.colno}", source) from None
    try:
        return _build(raw)
    except ModelError as e:
        if source and not e.source:
            raise ModelError(str(e).split(": ", 1)[1], e.where, source) from None
        raise


def _atom(x, where):
    if isinstance(x, list):
        return tuple(_atom(y, where) for y in x)
    if isinstance(x, (dict, float)) or x is None:
        raise ModelError(f"atoms must be integers, strings or lists, got {x!r}", where)
    return x


def _obj(raw, where, kind=dict):
    if not isinstance(raw, kind):
        raise ModelError(f"expected {'an object' if kind is dict else 'an array'}", where)
    return raw


def _number(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ModelError(f"expected a number, got {x!r}", where)
    return float(x)


def _build(raw) -> ModelFile:
    raw = _obj(raw, "$")
    if raw.get("version") != VERSION:
        raise ModelError(f"unsupported or missing version (expected {VERSION})", "$.version")
    known = {"version", "universe", "variables", "frames", "potentials", "set_potentials", "pas", "trees"}
    for k in raw:
        if k not in known:
            raise ModelError(f"unknown key {k!r}", f"$.{k}")

    variables = None
    if "variables" in raw and "universe" in raw:
        raise ModelError("give either universe or variables, not both", "$")
    if "variables" in raw:
        decl = []
        for i, v in enumerate(_obj(raw["variables"], "$.variables", list)):
            w = f"$.variables[{i}]"
            _obj(v, w)
            if not isinstance(v.get("name"), str):
                raise ModelError("variable needs a string name", f"{w}.name")
            dom = _obj(v.get("domain"), f"{w}.domain", list)
            decl.append((v["name"], tuple(_atom(d, f"{w}.domain") for d in dom)))
        try:
            variables = MultivariateModel(tuple(decl))
        except FrameError as e:
            raise ModelError(str(e), "$.variables") from None
        universe = variables.universe
    elif "universe" in raw:
        atoms = [_atom(a, f"$.universe[{i}]") for i, a in enumerate(_obj(raw["universe"], "$.universe", list))]
        try:
            universe = Universe(atoms)
        except (FrameError, ValueError) as e:
            raise ModelError(str(e), "$.universe") from None
    else:
        raise ModelError("model needs a universe or variables", "$")

    registry = FrameRegistry(universe)
    specs: dict[str, dict] = {}
    names: dict[str, list[str]] = {}
    # declaration position -> canonical element index, for frames declared out of order
    perms: dict[str, list[int]] = {}
    for fid, spec in _obj(raw.get("frames", {}), "$.frames").items():
        w = f"$.frames.{fid}"
        if isinstance(spec, list):
            spec = {"blocks": spec}
        _obj(spec, w)
        try:
            if "vars" in spec:
                if variables is None:
                    raise ModelError("variable frames need declared variables", f"{w}.vars")
                vs = _obj(spec["vars"], f"{w}.vars", list)
                frame = mv_frame(variables, vs)
                specs[fid] = {"vars": list(vs)}
            elif "blocks" in spec:
                blocks = [
                    [_atom(a, f"{w}.blocks[{i}]") for a in _obj(b, f"{w}.blocks[{i}]", list)]
                    for i, b in enumerate(_obj(spec["blocks"], f"{w}.blocks", list))
                ]
                frame = make_frame(universe, blocks)
                perm = [frame.element_of(b[0]) for b in blocks]
                if perm != sorted(perm):
                    perms[fid] = perm
                specs[fid] = {"blocks": [[_plain(a) for a in sorted_block] for sorted_block in _canon_blocks(frame)]}
            else:
                raise ModelError("frame needs blocks or vars", w)
        except FrameError as e:
            raise ModelError(str(e), w) from None
        if "names" in spec:
            ns = [str(n) for n in _obj(spec["names"], f"{w}.names", list)]
            if len(ns) != frame.size or len(set(ns)) != len(ns):
                raise ModelError(f"expected {frame.size} distinct element names", f"{w}.names")
            names[fid] = [ns[k] for k in _inverse_perm(perms.get(fid))] if fid in perms else ns
        try:
            registry.register(fid, frame)
        except FrameError as e:
            raise ModelError(str(e), w) from None

    def frame_ref(x, where) -> Frame:
        if x == registry.bottom_id and x not in specs:
            return bottom(universe)
        if not isinstance(x, str) or x not in specs:
            raise ModelError(f"unknown frame {x!r}", where)
        return registry[x]

    def frame_of(obj, w) -> Frame:
        if "frame" not in obj:
            raise ModelError("missing frame reference", f"{w}.frame")
        return frame_ref(obj["frame"], f"{w}.frame")

    def perm_of(obj):
        return perms.get(obj.get("frame"))

    model = ModelFile(universe, variables, registry, specs, names)
    for pid, spec in _obj(raw.get("potentials", {}), "$.potentials").items():
        w = f"$.potentials.{pid}"
        _obj(spec, w)
        f = frame_of(spec, w)
        vals = [_number(x, f"{w}.values[{i}]") for i, x in enumerate(_obj(spec.get("values"), f"{w}.values", list))]
        perm = perm_of(spec)
        if perm and len(vals) == len(perm):
            vals = [vals[k] for k in _inverse_perm(perm)]
        try:
            model.potentials[pid] = ProbPotential(f, vals)
        except (FrameError, ValueError) as e:
            raise ModelError(str(e), f"{w}.values") from None

    for mid, spec in _obj(raw.get("set_potentials", {}), "$.set_potentials").items():
        w = f"$.set_potentials.{mid}"
        _obj(spec, w)
        f = frame_of(spec, w)
        masses: dict[frozenset, float] = {}
        for i, row in enumerate(_obj(spec.get("masses"), f"{w}.masses", list)):
            rw = f"{w}.masses[{i}]"
            _obj(row, rw)
            s = frozenset(_index(x, f, f"{rw}.set", perm_of(spec)) for x in _obj(row.get("set"), f"{rw}.set", list))
            masses[s] = masses.get(s, 0.0) + _number(row.get("mass"), f"{rw}.mass")
        try:
            model.set_potentials[mid] = SetPotential(f, masses)
        except (FrameError, ValueError) as e:
            raise ModelError(str(e), f"{w}.masses") from None

    for hid, spec in _obj(raw.get("pas", {}), "$.pas").items():
        w = f"$.pas.{hid}"
        _obj(spec, w)
        f = frame_of(spec, w)
        ids, weights, images = [], [], []
        for i, row in enumerate(_obj(spec.get("assumptions"), f"{w}.assumptions", list)):
            rw = f"{w}.assumptions[{i}]"
            _obj(row, rw)
            ids.append(str(row.get("id", i)))
            weights.append(_number(row.get("weight"), f"{rw}.weight"))
            images.append([_index(x, f, f"{rw}.image", perm_of(spec)) for x in _obj(row.get("image"), f"{rw}.image", list)])
        try:
            model.pas[hid] = Pas.build(f, ids, weights, images)
        except (FrameError, ValueError) as e:
            raise ModelError(str(e), w) from None

    for tid, spec in _obj(raw.get("trees", {}), "$.trees").items():
        w = f"$.trees.{tid}"
        _obj(spec, w)
        nodes: dict[str, tuple[str, str | None]] = {}
        for v, nspec in _obj(spec.get("nodes"), f"{w}.nodes").items():
            nw = f"{w}.nodes.{v}"
            _obj(nspec, nw)
            f = frame_of(nspec, nw)
            fac = nspec.get("factor")
            if fac is not None:
                if fac not in model.potentials:
                    raise ModelError(f"unknown potential {fac!r}", f"{nw}.factor")
                if model.potentials[fac].frame != f:
                    raise ModelError(f"potential {fac!r} is not on frame {nspec['frame']!r}", f"{nw}.factor")
            nodes[v] = (nspec["frame"], fac)
        edges = []
        for i, e in enumerate(_obj(spec.get("edges", []), f"{w}.edges", list)):
            if not (isinstance(e, list) and len(e) == 2):
                raise ModelError("edge must be a pair of node ids", f"{w}.edges[{i}]")
            for end in e:
                if end not in nodes:
                    raise ModelError(f"unknown node {end!r}", f"{w}.edges[{i}]")
            edges.append((e[0], e[1]))
        model.tree_specs[tid] = TreeSpec(nodes, edges)
        try:
            model.tree(tid)
        except FrameError as e:
            raise ModelError(str(e), w) from None
    return model


def _plain(a):
    return list(a) if isinstance(a, tuple) else a


def _canon_blocks(frame: Frame) -> list[list]:
    atoms = frame.universe.atoms
    return [[atoms[i] for i in sorted(frame.universe.index[a] for a in b)] for b in frame.blocks]


def _inverse_perm(perm: list[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, k in enumerate(perm):
        inv[k] = i
    return inv


def _index(x, frame: Frame, where, perm: list[int] | None = None) -> int:
    """Element index as declared, mapped to canonical order."""
    if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < frame.size:
        raise ModelError(f"element index {x!r} outside frame of size {frame.size}", where)
    return perm[x] if perm else x
