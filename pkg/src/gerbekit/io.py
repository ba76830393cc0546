"""JSON description files (schema version 1), workspaces, and serialization.

Labels are JSON strings, integers or (nested) arrays; arrays are read back
as tuples.  Rationals are written ``"p/q"``.  Cochain values are rows
``[simplex, level, value]`` where ``simplex`` lists vertex labels of level
``level`` in the global vertex order.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import jsonschema

from .cochains import Cochain, CoefficientRing, TotalCochain, format_value, parse_value
from .errors import NotACocycleError, ParseError, ReferenceError_, ValidationError
from .gerbes import BundleCocycle, GerbeCocycle, validate_bundle, validate_gerbe
from .morita import (Bitorsor, MoritaMorphism, cech_to_manifold, identity_bitorsor, identity_morphism,
                     morphism_bitorsor, pullback_groupoid, pullback_morphism, refinement_morphism)
from .spaces import (CoveredComplex, FiniteGroupoid, GroupAction, SemiSimplicialSpace, SimplicialComplex,
                     SimplicialMap, cech_space, check_space, cyclic_group, manifold_space, nerve, pair_groupoid,
                     product_group, transformation_space)

SCHEMA_VERSION = 1

SECTIONS = ("complexes", "covers", "groupoids", "actions", "spaces", "cochains", "bundles", "gerbes",
            "morphisms", "bitorsors")


def freeze(value):
    """JSON arrays become tuples, recursively."""
    if isinstance(value, list):
        return tuple(freeze(v) for v in value)
    return value


def thaw(value):
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    return value


def _schema() -> dict:
    text = resources.files("gerbekit").joinpath("schema/workspace-v1.json").read_text()
    return json.loads(text)


_VALIDATOR = None


def schema_validator():
    global _VALIDATOR
    if _VALIDATOR is None:
        _VALIDATOR = jsonschema.Draft202012Validator(_schema())
    return _VALIDATOR


def parse_document(text: str, source: str = "<string>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    errors = sorted(schema_validator().iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.path) or "<root>"
        raise ParseError(f"{source}: schema violation at {where}: {first.message}")
    return doc


class Workspace:
    """Named entities loaded from description files; built lazily and cached."""

    def __init__(self):
        self.specs: dict[str, dict[str, Any]] = {s: {} for s in SECTIONS}
        self.origin: dict[str, str] = {}
        self._built: dict[tuple, Any] = {}
        self._building: set = set()

    # -- bookkeeping -------------------------------------------------------

    def add_document(self, doc: dict, source: str = "<string>"):
        for section in SECTIONS:
            for name, spec in doc.get(section, {}).items():
                if name in self.origin:
                    raise ValidationError(f"duplicate name {name!r} ({source} and {self.origin[name]})")
                self.origin[name] = source
                self.specs[section][name] = spec

    def names(self, section: str) -> list:
        return sorted(self.specs[section])

    def __len__(self):
        return len(self.origin)

    def kind_of(self, name: str) -> str:
        for section in SECTIONS:
            if name in self.specs[section]:
                return section
        raise ReferenceError_(f"unknown name {name!r}", [name])

    def get(self, section: str, name: str):
        if name not in self.specs[section]:
            raise ReferenceError_(f"unresolved reference: no {section[:-1]} named {name!r}", [name])
        key = (section, name)
        if key in self._built:
            return self._built[key]
        if key in self._building:
            raise ValidationError(f"circular reference through {name!r}")
        self._building.add(key)
        try:
            obj = getattr(self, f"_build_{section}")(name, self.specs[section][name])
        except ValidationError as exc:
            if isinstance(exc, ReferenceError_) or exc.args[0].startswith(f"{name}:"):
                raise
            raise type(exc)(f"{name}: {exc.args[0]}", exc.violations) from None
        finally:
            self._building.discard(key)
        self._built[key] = obj
        return obj

    def build_all(self):
        for section in SECTIONS:
            for name in self.names(section):
                self.get(section, name)
        return self

    # -- builders ------------------------------------------------------------

    def _build_complexes(self, name, spec):
        return complex_from_json(spec)

    def _build_covers(self, name, spec):
        K = self.get("complexes", spec["complex"])
        sets = [[freeze(f) for f in facets] for facets in spec["sets"]]
        for facets in sets:
            for f in facets:
                for v in f:
                    if not K.has_label(v):
                        raise ValidationError(f"cover uses unknown vertex {v!r}")
        C = CoveredComplex.from_facets(K, sets)
        problems = C.violations()
        if problems:
            raise ValidationError("invalid cover", problems)
        return C

    def _build_groupoids(self, name, spec):
        t = spec["type"]
        if t == "cyclic":
            G = cyclic_group(spec["order"])
        elif t == "product":
            G = product_group(*spec["orders"])
        elif t == "pair":
            G = pair_groupoid([freeze(o) for o in spec["objects"]])
        elif t == "explicit":
            arrows = [freeze(a["name"]) for a in spec["arrows"]]
            src = {freeze(a["name"]): freeze(a["source"]) for a in spec["arrows"]}
            tgt = {freeze(a["name"]): freeze(a["target"]) for a in spec["arrows"]}
            comp = {(freeze(x), freeze(y)): freeze(z) for x, y, z in spec["compose"]}
            G = FiniteGroupoid([freeze(o) for o in spec["objects"]], arrows, src, tgt, comp, name=name)
        elif t == "pullback":
            base = self.get("groupoids", spec["groupoid"])
            umap = {freeze(a): freeze(o) for a, o in spec["map"]}
            objects = [freeze(o) for o in spec.get("objects", [a for a, _ in spec["map"]])]
            G = pullback_groupoid(base, objects, umap).groupoid
        elif t == "action":
            G = self.get("actions", spec["action"]).groupoid()
        else:  # pragma: no cover - schema rejects other types
            raise ValidationError(f"unknown groupoid type {t!r}")
        G.name = name
        problems = G.violations()
        if problems:
            raise ValidationError("groupoid axioms violated", problems)
        return G

    def _build_actions(self, name, spec):
        G = self.get("groupoids", spec["group"])
        K = self.get("complexes", spec["complex"])
        act = {freeze(g): {freeze(v): freeze(w) for v, w in pairs} for g, pairs in spec["act"]}
        missing = [g for g in G.arrows if g not in act]
        if missing:
            raise ValidationError("action does not cover every group element", [repr(g) for g in missing])
        A = GroupAction(G, K, act)
        problems = A.violations()
        if problems:
            raise ValidationError("invalid group action", problems)
        return A

    def _build_spaces(self, name, spec):
        t = spec["type"]
        if t == "nerve":
            S = nerve(self.get("groupoids", spec["groupoid"]), spec["truncation"])
        elif t == "cech":
            S = cech_space(self.get("covers", spec["cover"]), spec["truncation"])
        elif t == "transformation":
            S = transformation_space(self.get("actions", spec["action"]), spec["truncation"])
        elif t == "manifold":
            S = manifold_space(self.get("complexes", spec["complex"]), spec["truncation"])
        else:
            S = space_from_json(spec)
        S.name = name
        return check_space(S)

    def _qz(self, spec, cls, validate):
        space = self.get("spaces", spec["space"])
        obj = cls(cochain_from_rows(space, "QmodZ", cls.degree, spec["values"]))
        problems = validate(obj)
        if problems:
            raise NotACocycleError("not a cocycle", problems)
        return obj

    def _build_cochains(self, name, spec):
        space = self.get("spaces", spec["space"])
        return cochain_from_rows(space, spec["ring"], spec["degree"], spec["values"])

    def _build_bundles(self, name, spec):
        return self._qz(spec, BundleCocycle, validate_bundle)

    def _build_gerbes(self, name, spec):
        return self._qz(spec, GerbeCocycle, validate_gerbe)

    def _build_morphisms(self, name, spec):
        t = spec["type"]
        if t == "refinement":
            coarse = self.get("covers", spec["coarse"])
            fine = self.get("covers", spec["fine"])
            m = refinement_morphism(coarse, fine, spec["index_map"], spec["truncation"])
        elif t == "pullback":
            gspec = self.specs["groupoids"].get(spec["groupoid"])
            if gspec is None:
                raise ReferenceError_(f"unresolved reference: no groupoid named {spec['groupoid']!r}", [spec["groupoid"]])
            if gspec["type"] != "pullback":
                raise ValidationError(f"groupoid {spec['groupoid']!r} is not a pullback groupoid")
            base = self.get("groupoids", gspec["groupoid"])
            umap = {freeze(a): freeze(o) for a, o in gspec["map"]}
            objects = [freeze(o) for o in gspec.get("objects", [a for a, _ in gspec["map"]])]
            m = pullback_morphism(pullback_groupoid(base, objects, umap), spec["truncation"])
        elif t == "cech_to_manifold":
            m = cech_to_manifold(self.get("covers", spec["cover"]), spec["truncation"])
        elif t == "identity":
            m = identity_morphism(self.get("spaces", spec["space"]))
        elif t == "collapse":
            src = self.get("spaces", spec["source"])
            tgt = self.get("spaces", spec["target"])
            P = min(src.truncation, tgt.truncation)
            if any(tgt.levels[p].num_vertices != 1 for p in range(P + 1)):
                raise ValidationError("collapse needs a target with one vertex per level")
            maps = [SimplicialMap(src.levels[p], tgt.levels[p], [0] * src.levels[p].num_vertices) for p in range(P + 1)]
            m = MoritaMorphism(src, tgt, maps, "explicit")
        else:
            src = self.get("spaces", spec["source"])
            tgt = self.get("spaces", spec["target"])
            maps = []
            for p, pairs in enumerate(spec["maps"]):
                table = {freeze(a): freeze(b) for a, b in pairs}
                try:
                    maps.append(SimplicialMap.from_labels(src.levels[p], tgt.levels[p], table.__getitem__))
                except (KeyError, IndexError) as exc:
                    raise ValidationError(f"level {p} map is incomplete or refers to unknown labels: {exc}") from None
            m = MoritaMorphism(src, tgt, maps, "explicit")
        problems = m.violations()
        if problems:
            raise ValidationError("not a Morita morphism", problems)
        return m

    def _build_bitorsors(self, name, spec):
        from .morita import verify_bitorsor
        t = spec["type"]
        if t == "identity":
            B = identity_bitorsor(self.get("groupoids", spec["groupoid"]))
        elif t == "morphism":
            B = morphism_bitorsor(self.get("morphisms", spec["morphism"]))
        else:
            X = self.get("groupoids", spec["left"])
            Y = self.get("groupoids", spec["right"])
            B = Bitorsor(X, Y, tuple(freeze(q) for q in spec["carrier"]),
                         {freeze(q): freeze(o) for q, o in spec["f"]},
                         {freeze(q): freeze(o) for q, o in spec["g"]},
                         {(freeze(x), freeze(q)): freeze(r) for x, q, r in spec["left_action"]},
                         {(freeze(q), freeze(y)): freeze(r) for q, y, r in spec.get("right_action", [])})
        problems = verify_bitorsor(B)
        if problems:
            raise ValidationError("bitorsor conditions violated", problems)
        return B


# ---------------------------------------------------------------------------
# loading


def load(paths: Iterable[str | Path] = (), include_corpus: bool = False) -> Workspace:
    """Parse, cross-reference and validate description files."""
    ws = Workspace()
    if include_corpus:
        for name, text in corpus_documents():
            ws.add_document(parse_document(text, f"corpus/{name}"), f"corpus/{name}")
    for path in paths:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
        ws.add_document(parse_document(text, str(path)), str(path))
    return ws.build_all()


def loads(text: str) -> Workspace:
    ws = Workspace()
    ws.add_document(parse_document(text))
    return ws.build_all()


def corpus_documents() -> list:
    root = resources.files("gerbekit").joinpath("corpus")
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out.append((entry.name, entry.read_text()))
    return out


def corpus_path(name: str) -> Path:
    return Path(str(resources.files("gerbekit").joinpath("corpus", name)))


# ---------------------------------------------------------------------------
# (de)serialization of values


def complex_from_json(spec: dict) -> SimplicialComplex:
    facets = [tuple(freeze(v) for v in f) for f in spec["facets"]]
    vertices = [freeze(v) for v in spec["vertices"]] if "vertices" in spec else None
    if vertices is not None:
        known = set(vertices)
        for f in facets:
            for v in f:
                if v not in known:
                    raise ValidationError(f"facet uses undeclared vertex {v!r}")
    return SimplicialComplex.from_facets(facets, vertices)


def complex_to_json(K: SimplicialComplex) -> dict:
    return {"vertices": [thaw(v) for v in K.labels],
            "facets": [[thaw(K.labels[v]) for v in s] for s in K.maximal_simplices()]}


def space_from_json(spec: dict) -> SemiSimplicialSpace:
    levels = [complex_from_json(c) for c in spec["levels"]]
    faces = [[]]
    if len(spec["faces"]) != len(levels) - 1:
        raise ValidationError("need face maps for every positive level")
    for p, fs in enumerate(spec["faces"], start=1):
        row = []
        for pairs in fs:
            table = {freeze(a): freeze(b) for a, b in pairs}
            try:
                row.append(SimplicialMap.from_labels(levels[p], levels[p - 1], table.__getitem__))
            except KeyError as exc:
                raise ValidationError(f"face map on level {p} misses or mislabels vertex {exc}") from None
        faces.append(row)
    return SemiSimplicialSpace(levels, faces, kind=spec.get("kind", "explicit"))


def space_to_json(S: SemiSimplicialSpace) -> dict:
    faces = []
    for p in range(1, S.truncation + 1):
        row = []
        for f in S.faces[p]:
            row.append([[thaw(f.source.labels[i]), thaw(f.target.labels[j])] for i, j in enumerate(f.vertex_map)])
        faces.append(row)
    return {"type": "explicit", "kind": S.kind, "levels": [complex_to_json(K) for K in S.levels], "faces": faces}


def groupoid_to_json(G: FiniteGroupoid) -> dict:
    return {"type": "explicit", "objects": [thaw(o) for o in G.objects],
            "arrows": [{"name": thaw(x), "source": thaw(G.source[x]), "target": thaw(G.target[x])} for x in G.arrows],
            "compose": [[thaw(x), thaw(y), thaw(z)] for (x, y), z in G.compose.items()]}


def cochain_from_rows(space: SemiSimplicialSpace, ring, degree: int, rows) -> TotalCochain:
    ring = CoefficientRing.parse(ring)
    out = TotalCochain(space, degree, ring)
    for simplex, level, value in rows:
        if level not in out.components:
            raise ValidationError(f"level {level} has no component in total degree {degree}")
        K = space.levels[level]
        labels = [freeze(v) for v in simplex]
        if len(labels) != degree - level + 1:
            raise ValidationError(f"simplex {simplex} has the wrong dimension for level {level} in degree {degree}")
        try:
            idx = K.simplex_from_labels(labels)
        except KeyError as exc:
            raise ValidationError(f"unknown vertex {exc} on level {level}") from None
        if len(set(idx)) != len(idx) or idx not in K:
            raise ValidationError(f"{simplex} is not a simplex of level {level}")
        if list(idx) != [K.vertex(v) for v in labels]:
            raise ValidationError(f"simplex {simplex} must list vertices in the global vertex order")
        comp = out.components[level]
        pos = K.simplex_index(degree - level)[idx]
        comp.data[pos] = ring.normalize(parse_value(value))
    return out


def cochain_to_rows(c: TotalCochain | Cochain) -> list:
    if isinstance(c, Cochain):
        c = TotalCochain.from_cochain(c)
    rows = []
    for p in c.levels:
        comp = c.components[p]
        K = c.space.levels[p]
        for s, v in zip(comp.simplices, comp.data):
            if v != 0:
                rows.append([[thaw(K.labels[i]) for i in s], p, format_value(v)])
    return rows


def cochain_to_json(c: TotalCochain, space_name: str) -> dict:
    return {"space": space_name, "ring": str(c.ring), "degree": c.degree, "values": cochain_to_rows(c)}


def workspace_to_json(ws: Workspace) -> dict:
    """Serialize every entity in explicit form (reloads to equal values)."""
    doc = {"schema": SCHEMA_VERSION}
    for name in ws.names("complexes"):
        doc.setdefault("complexes", {})[name] = complex_to_json(ws.get("complexes", name))
    for name in ws.names("covers"):
        spec = ws.specs["covers"][name]
        C = ws.get("covers", name)
        K = C.total
        sets = []
        for U in C.sets:
            maximal = [s for s in U if not any(set(s) < set(t) for t in U)]
            sets.append([[thaw(K.labels[v]) for v in s] for s in sorted(maximal)])
        doc.setdefault("covers", {})[name] = {"complex": spec["complex"], "sets": sets}
    for name in ws.names("groupoids"):
        spec = ws.specs["groupoids"][name]
        # pullback groupoids keep their cover map, which pullback morphisms need
        out = spec if spec["type"] == "pullback" else groupoid_to_json(ws.get("groupoids", name))
        doc.setdefault("groupoids", {})[name] = out
    for name in ws.names("actions"):
        spec = ws.specs["actions"][name]
        A = ws.get("actions", name)
        doc.setdefault("actions", {})[name] = {
            "group": spec["group"], "complex": spec["complex"],
            "act": [[thaw(g), [[thaw(v), thaw(w)] for v, w in A.act[g].items()]] for g in A.group.arrows]}
    for name in ws.names("spaces"):
        # constructed spaces are rebuilt from their (serialized) ingredients
        spec = ws.specs["spaces"][name]
        out = space_to_json(ws.get("spaces", name)) if spec["type"] == "explicit" else spec
        doc.setdefault("spaces", {})[name] = out
    for name in ws.names("cochains"):
        c = ws.get("cochains", name)
        doc.setdefault("cochains", {})[name] = cochain_to_json(c, ws.specs["cochains"][name]["space"])
    for section in ("bundles", "gerbes"):
        for name in ws.names(section):
            obj = ws.get(section, name)
            doc.setdefault(section, {})[name] = {"space": ws.specs[section][name]["space"],
                                                 "values": cochain_to_rows(obj.cocycle)}
    for section in ("morphisms", "bitorsors"):
        for name in ws.names(section):
            doc.setdefault(section, {})[name] = ws.specs[section][name]
    return doc


def dumps(doc: Any) -> str:
    """Deterministic JSON text."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=True) + "\n"
