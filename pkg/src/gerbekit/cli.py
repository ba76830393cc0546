"""Command-line interface: JSON report on stdout, one-line summary on stderr.

Exit codes: 0 success, 1 mathematical failure, 2 parse error, 3 validation
or reference error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cochains import CoefficientRing, TotalCochain, cup, format_value
from .errors import (ExtensionError, GerbekitError, MathematicalObstruction, ParseError, PrequantizationObstruction,
                     TruncationError, ValidationError)
from .gerbes import (associator, build_extension, chern_class, dd_class, holonomy,
                     is_flat, prequantize_bundle, prequantize_gerbe, qz_class, tau_maps)
from .homology import CohomologyGroup, cohomology, is_coboundary, is_cocycle
from .io import SCHEMA_VERSION, Workspace, cochain_to_rows, dumps, load, thaw
from .morita import compare_cohomology
from .spaces import nerve, stack_dimension

COMMANDS = ("validate", "nerve", "cohomology", "cup", "chern", "dd", "extension", "associator", "flat", "holonomy",
            "prequantize-bundle", "prequantize-gerbe", "tau-exactness", "morita-compare", "dimension",
            "corpus-report")


class CommandFailed(MathematicalObstruction):
    """A command ran to completion but its mathematical check failed; the report is still written."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# report fragments


def _value(v):
    return format_value(v) if isinstance(v, Fraction) else int(v)


def group_report(G: CohomologyGroup) -> dict:
    return {"degree": G.degree, "ring": str(G.ring), "free_rank": G.free_rank, "torsion": list(G.torsion),
            "description": G.describe(), "orders": G.orders,
            "generators": [cochain_to_rows(g) for g in G.generators]}


def _components(c: TotalCochain) -> dict:
    out = {}
    for p in c.levels:
        comp = c[p]
        if not comp.is_zero():
            single = TotalCochain(c.space, c.degree, c.ring, {p: comp})
            out[f"({comp.k},{p})"] = cochain_to_rows(single)
    return out


def class_report(cc) -> dict:
    G = cc.group
    out = {"ring": str(G.ring), "degree": G.degree, "group": G.describe(), "free_rank": G.free_rank,
           "torsion": list(G.torsion), "coordinates": [_value(v) for v in cc.coordinates], "zero": cc.is_zero,
           "pseudo_curvature": _components(cc.curvature.cochain)}
    if cc.is_zero:
        _, witness = is_coboundary(cc.curvature.cochain)
        out["coboundary_witness"] = cochain_to_rows(witness)
    return out


def _qz_target(ws: Workspace, args):
    if getattr(args, "gerbe", None):
        return "gerbe", args.gerbe, ws.get("gerbes", args.gerbe)
    if getattr(args, "bundle", None):
        return "bundle", args.bundle, ws.get("bundles", args.bundle)
    raise ValidationError("this command needs --gerbe or --bundle")


def _space(ws: Workspace, args):
    if not args.space:
        raise ValidationError("this command needs --space")
    return ws.get("spaces", args.space)


def _ring(args) -> CoefficientRing:
    try:
        return CoefficientRing.parse(args.ring)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_validate(ws: Workspace, args) -> tuple[dict, str]:
    entities = {s: ws.names(s) for s in ws.specs if ws.names(s)}
    total = sum(len(v) for v in entities.values())
    return {"schema": SCHEMA_VERSION, "valid": True, "entities": entities}, f"{total} entities valid"


def cmd_nerve(ws: Workspace, args):
    if args.groupoid:
        P = args.truncation or 3
        S = nerve(ws.get("groupoids", args.groupoid), P)
        name = args.groupoid
    else:
        S = _space(ws, args)
        name = args.space
    levels = []
    for p, K in enumerate(S.levels):
        levels.append({"level": p, "simplices": [len(K.simplices(k)) for k in range(K.dimension + 1)]})
    report = {"name": name, "kind": S.kind, "truncation": S.truncation, "levels": levels}
    sizes = ", ".join(str(len(K.simplices(0))) for K in S.levels)
    return report, f"{name}: vertices per level {sizes}"


def cmd_cohomology(ws: Workspace, args):
    S = _space(ws, args)
    ring = _ring(args)
    if args.degree is not None:
        G = cohomology(S, ring, args.degree)
        return group_report(G), f"H^{args.degree}({args.space}; {ring}) = {G.describe()}"
    top = args.max_degree if args.max_degree is not None else S.truncation - 1
    groups = [cohomology(S, ring, n) for n in range(top + 1)]
    summary = ", ".join(f"H^{G.degree} = {G.describe()}" for G in groups)
    return {"space": args.space, "ring": str(ring), "groups": [group_report(G) for G in groups]}, summary


def cmd_cup(ws: Workspace, args):
    if not (args.left and args.right):
        raise ValidationError("cup needs --left and --right cochain names")
    a = ws.get("cochains", args.left)
    b = ws.get("cochains", args.right)
    c = cup(a, b)
    report = {"left": args.left, "right": args.right, "degree": c.degree, "ring": str(c.ring),
              "values": cochain_to_rows(c)}
    if c.degree + 1 <= c.space.truncation:
        report["cocycle"] = is_cocycle(c)
    return report, f"cup product of degree {c.degree} over {c.ring}"


def cmd_chern(ws: Workspace, args):
    if not args.bundle:
        raise ValidationError("chern needs --bundle")
    cc = chern_class(ws.get("bundles", args.bundle))
    out = {"bundle": args.bundle, **class_report(cc)}
    return out, f"Chern class of {args.bundle}: {out['coordinates']} in {out['group']}"


def cmd_dd(ws: Workspace, args):
    if not args.gerbe:
        raise ValidationError("dd needs --gerbe")
    cc = dd_class(ws.get("gerbes", args.gerbe))
    out = {"gerbe": args.gerbe, **class_report(cc)}
    return out, f"DD class of {args.gerbe}: {out['coordinates']} in {out['group']}"


def _two_cochain(ws: Workspace, args):
    if args.gerbe:
        return args.gerbe, ws.get("gerbes", args.gerbe)
    if args.cochain:
        c = ws.get("cochains", args.cochain)
        if c.degree != 2 or c.ring.tag != "QmodZ":
            raise ValidationError("expected a degree-2 QmodZ cochain")
        return args.cochain, c[2]
    raise ValidationError("this command needs --gerbe or --cochain")


def cmd_extension(ws: Workspace, args):
    name, obj = _two_cochain(ws, args)
    try:
        R = build_extension(obj)
    except ExtensionError as exc:
        report = {"name": name, "associative": False, "associator": _assoc_rows(exc.associator)}
        raise CommandFailed(str(exc), report) from None
    G = R.groupoid
    report = {"name": name, "associative": True, "m": R.m, "order": R.order, "objects": len(G.objects),
              "abelian": R.is_abelian(), "central": R.central}
    if R.is_group():
        report["cyclic"] = R.is_cyclic()
        report["center_order"] = len(R.center())
        report["element_orders"] = sorted(R.element_order(x) for x in G.arrows)
    kind = "group" if R.is_group() else "groupoid"
    return report, f"extension of {name}: {kind} with {R.order} arrows"


def _assoc_rows(a):
    if a is None:
        return None
    return cochain_to_rows(TotalCochain(a.space, a.k + a.p, a.ring, {a.p: a}))


def cmd_associator(ws: Workspace, args):
    name, obj = _two_cochain(ws, args)
    a = associator(obj)
    report = {"name": name, "zero": a.is_zero(), "values": _assoc_rows(a)}
    return report, f"associator of {name} is {'zero' if a.is_zero() else 'nonzero'}"


def cmd_flat(ws: Workspace, args):
    kind, name, obj = _qz_target(ws, args)
    res = is_flat(obj)
    report = {kind: name, "flat": res.flat}
    if res.flat:
        report["flat_lift"] = cochain_to_rows(res.lift)
    return report, f"{name} is {'flat' if res.flat else 'not flat'}"


def cmd_holonomy(ws: Workspace, args):
    kind, name, obj = _qz_target(ws, args)
    h = holonomy(obj)
    report = {kind: name, "group": h.group.describe(), "coordinates": [_value(v) for v in h.coordinates],
              "zero": h.is_zero, "flat_lift": cochain_to_rows(h.flat_lift)}
    return report, f"holonomy of {name}: {report['coordinates']} in {report['group']}"


def _prequantize(ws: Workspace, args, fn, kind):
    if not args.cochain:
        raise ValidationError(f"prequantize-{kind} needs --cochain")
    w = ws.get("cochains", args.cochain)
    twist = ws.get("cochains", args.twist) if args.twist else None
    try:
        res = fn(w, twist)
    except PrequantizationObstruction as exc:
        raise CommandFailed(str(exc), {"cochain": args.cochain, "obstruction": str(exc),
                                       "component": exc.component}) from None
    char = chern_class(res.cocycle) if kind == "bundle" else dd_class(res.cocycle)
    group = char.group
    report = {"cochain": args.cochain, kind: cochain_to_rows(res.cocycle.cocycle),
              "pseudo_connection": cochain_to_rows(res.connection.lift),
              "pseudo_curvature": _components(res.curvature.cochain),
              "input_class": [_value(v) for v in group.coordinates(res.integral_representative)],
              "output_class": [_value(v) for v in char.coordinates], "group": group.describe()}
    if res.extension_form is not None:
        report["extension_form"] = res.extension_form
    return report, f"{kind} with class {report['output_class']} in {group.describe()}"


def cmd_prequantize_bundle(ws, args):
    return _prequantize(ws, args, prequantize_bundle, "bundle")


def cmd_prequantize_gerbe(ws, args):
    return _prequantize(ws, args, prequantize_gerbe, "gerbe")


def cmd_tau(ws: Workspace, args):
    S = _space(ws, args)
    n = args.n if args.n is not None else 2
    rep = tau_maps(S, n)
    report = {"space": args.space, "n": n, "exact": rep.exact, "extension_classes": rep.extension_classes,
              "groups": {k: g.describe() for k, g in rep.groups.items()},
              "nodes": [{"node": t.name, "image": t.image_size, "kernel": t.kernel_size, "exact": t.exact}
                        for t in rep.nodes]}
    if not rep.exact:
        raise CommandFailed(f"tau sequence on {args.space} is not exact", report)
    return report, f"tau sequence on {args.space} with n={n} is exact"


def cmd_morita(ws: Workspace, args):
    if not args.morphism:
        raise ValidationError("morita-compare needs --morphism")
    m = ws.get("morphisms", args.morphism)
    ring = _ring(args)
    P = min(m.source.truncation, m.target.truncation)
    top = args.max_degree if args.max_degree is not None else min(3, P - 1)
    comps = compare_cohomology(m, ring, top)
    report = {"morphism": args.morphism, "ring": str(ring), "iso": all(c.iso for c in comps),
              "degrees": [{"degree": c.degree, "source": c.source_group, "target": c.target_group,
                           "matrix": [[_value(v) for v in row] for row in c.matrix], "iso": c.iso} for c in comps]}
    if not report["iso"]:
        raise CommandFailed(f"{args.morphism} does not induce isomorphisms", report)
    return report, f"{args.morphism}: isomorphism in degrees 0..{top} over {ring}"


def cmd_dimension(ws: Workspace, args):
    S = _space(ws, args)
    d = stack_dimension(S)
    return {"space": args.space, "dimension": d}, f"dim {args.space} = {d}"


def cmd_corpus_report(ws: Workspace, args):
    """Fixed battery over every entity of the workspace."""
    report = {"spaces": {}, "bundles": {}, "gerbes": {}, "morphisms": {}}
    for name in ws.names("spaces"):
        S = ws.get("spaces", name)
        top = min(S.truncation - 1, 3)
        report["spaces"][name] = {"truncation": S.truncation,
                                  "cohomology_Z": [cohomology(S, "Z", n).describe() for n in range(top + 1)]}
    for section, fn in (("bundles", chern_class), ("gerbes", dd_class)):
        for name in ws.names(section):
            obj = ws.get(section, name)
            cc = fn(obj)
            group, coords = qz_class(obj)
            report[section][name] = {"class": [_value(v) for v in cc.coordinates], "group": cc.group.describe(),
                                     "qz_class": [_value(v) for v in coords], "flat": is_flat(obj).flat}
    for name in ws.names("morphisms"):
        m = ws.get("morphisms", name)
        top = min(3, m.source.truncation - 1, m.target.truncation - 1)
        report["morphisms"][name] = {"iso_Z": all(c.iso for c in compare_cohomology(m, "Z", top)),
                                     "max_degree": top}
    n = len(report["spaces"]) + len(report["bundles"]) + len(report["gerbes"]) + len(report["morphisms"])
    return report, f"corpus report over {n} entities"


HANDLERS = {
    "validate": cmd_validate, "nerve": cmd_nerve, "cohomology": cmd_cohomology, "cup": cmd_cup,
    "chern": cmd_chern, "dd": cmd_dd, "extension": cmd_extension, "associator": cmd_associator,
    "flat": cmd_flat, "holonomy": cmd_holonomy, "prequantize-bundle": cmd_prequantize_bundle,
    "prequantize-gerbe": cmd_prequantize_gerbe, "tau-exactness": cmd_tau, "morita-compare": cmd_morita,
    "dimension": cmd_dimension, "corpus-report": cmd_corpus_report,
}


def run(command: str, ws: Workspace, args) -> tuple[dict, str]:
    """Execute one command against a loaded workspace."""
    return HANDLERS[command](ws, args)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gerbekit", description="Exact cohomology, bundles and gerbes on finite "
                                     "groupoid presentations.")
    parser.add_argument("--version", action="version", version=f"gerbekit {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("-f", "--file", action="append", default=[], type=Path,
                        help="description file to load (repeatable)")
    parser.add_argument("--no-corpus", action="store_true", help="do not preload the bundled corpus")
    parser.add_argument("--space")
    parser.add_argument("--groupoid")
    parser.add_argument("--truncation", type=int)
    parser.add_argument("--ring", default="Z", help="Z, Q, Zmod:n or QmodZ")
    parser.add_argument("--degree", type=int)
    parser.add_argument("--max-degree", type=int)
    parser.add_argument("--gerbe")
    parser.add_argument("--bundle")
    parser.add_argument("--cochain")
    parser.add_argument("--twist", help="rational cocycle added to the prequantization lift")
    parser.add_argument("--left")
    parser.add_argument("--right")
    parser.add_argument("--morphism")
    parser.add_argument("--n", type=int, help="order of the coefficients for tau-exactness")
    parser.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    return parser


def _emit(report, args):
    text = dumps(report)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ws = load(args.file, include_corpus=not args.no_corpus)
        report, summary = run(args.command, ws, args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except CommandFailed as exc:
        _emit(exc.report, args)
        print(f"failed: {exc}", file=sys.stderr)
        return 1
    except MathematicalObstruction as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, args)
        print(f"failed: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, TruncationError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        for v in getattr(exc, "violations", [])[:20]:
            print(f"  - {thaw(v)}", file=sys.stderr)
        return 3
    except GerbekitError as exc:  # pragma: no cover - every subclass is handled above
        print(f"error: {exc}", file=sys.stderr)
        return 3
    _emit(report, args)
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
