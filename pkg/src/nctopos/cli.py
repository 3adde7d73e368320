"""Command-line front end.

Exit codes: 0 = success / verdict true, 1 = verdict false (e.g. not a sheaf,
no terminal object), 2 = input or usage error.  Reports are JSON on stdout
(--pretty for an indented rendering).  The digraph demo site, its topologies
J1..J4, and the noncommutative topologies nclt:<4-bit mask> are built in, so
the worked example runs with zero input files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from .fincat import NCToposError, omega_presheaf
from .classif import classifier_test, build_classifier, fuse_classifier, global_sections_T
from .ncheyt import structure_checks, verify_completeness, verify_nc_heyting
from .topol import (
    derive_nc_grothendieck,
    enumerate_lawvere,
    enumerate_nc_lawvere,
    grothendieck_correspondence,
    lt_to_gt,
    restrict_to_section,
)
from .sheaf import SlicePresheaf, check_sheaf, enumerate_sheaves, terminal_search
from . import digraph as dg
from . import iojson as io


class InputError(Exception):
    pass


def _emit(report: dict, pretty: bool) -> None:
    print(json.dumps(report, indent=2 if pretty else None, sort_keys=True))


def _load_site(args):
    if getattr(args, "site", None):
        return io.category_from_doc(io.load_json(args.site)), False
    return dg.digraph_site(), True


def _demo_bundle(args):
    cat, is_demo = _load_site(args)
    if not is_demo:
        raise InputError("this command currently requires the built-in digraph site")
    hp = dg.demo_classifier(getattr(args, "fuse", "coordinate") or "coordinate")
    return cat, omega_presheaf(cat), hp


def _named_topology(name: str, omega, hp):
    std = dg.standard_topologies(omega)
    if name in std:
        return std[name]
    if name.startswith("nclt:"):
        for t in enumerate_nc_lawvere(hp):
            if dg.nclt_name(hp, t) == name:
                return derive_nc_grothendieck(t)
        raise InputError(f"unknown noncommutative topology {name!r}")
    if os.path.exists(name):
        doc = io.load_json(name)
        if doc.get("type") != "grothendieck":
            raise InputError("topology files must carry a grothendieck cover table")
        covers = {o: frozenset(frozenset(s) for s in lst)
                  for o, lst in doc["covers"].items()}
        from .topol import GrothendieckTopology, verify_grothendieck
        gt = GrothendieckTopology(omega, covers)
        if not verify_grothendieck(omega, covers)["ok"]:
            raise InputError("cover table violates the Grothendieck axioms")
        return gt
    raise InputError(f"unknown topology {name!r}")


def _bounds(args, cat):
    n = getattr(args, "bounds", None) or 3
    return {o: n for o in cat.objects}


def _slice_doc(sp: SlicePresheaf, lab) -> dict:
    inv = {x: name[2:] for x, name in lab["E"].items() if name.startswith("1_")}
    return {
        "vertices": list(sp.f.at["V"]),
        "edges": [{"id": e, "src": sp.f.act["s"][e], "dst": sp.f.act["t"][e],
                   "color": inv[sp.pi["E"][e]]} for e in sp.f.at["E"]],
    }


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> tuple[dict, int]:
    cat, is_demo = _load_site(args)
    report: dict[str, Any] = {"site": {"objects": len(cat.objects),
                                       "arrows": len(cat.arrows), "ok": True}}
    if args.presheaf:
        doc = io.load_json(args.presheaf)
        p = io.presheaf_from_doc(cat, doc)
        report["presheaf"] = {"sizes": {o: len(p.at[o]) for o in cat.objects},
                              "ok": True}
    report["ok"] = True
    return report, 0


def cmd_omega(args) -> tuple[dict, int]:
    cat, _ = _load_site(args)
    omega = omega_presheaf(cat)
    rep = omega.verify()
    report = {
        "sieve_counts": {o: len(omega.algebras[o].carrier) for o in cat.objects},
        "sieves": {o: sorted(sorted(s) for s in omega.algebras[o].carrier)
                   for o in cat.objects},
        "checks": {"ok": rep["ok"]},
        "ok": rep["ok"],
    }
    return report, 0 if rep["ok"] else 1


def cmd_enumerate_lt(args) -> tuple[dict, int]:
    cat, is_demo = _load_site(args)
    omega = omega_presheaf(cat)
    lts = enumerate_lawvere(omega)
    items = []
    std = dg.standard_topologies(omega) if is_demo else {}
    for lt in lts:
        gt = lt_to_gt(lt)
        entry = {"j": io.topology_to_doc(lt)["j"],
                 "covers": io.topology_to_doc(gt)["covers"],
                 "roundtrip_ok": grothendieck_correspondence(lt)["roundtrip_ok"]}
        for name, s in std.items():
            if s.covers == gt.covers:
                entry["name"] = name
        items.append(entry)
    return {"count": len(lts), "topologies": items, "ok": True}, 0


def cmd_build_classifier(args) -> tuple[dict, int]:
    cat, is_demo = _load_site(args)
    if is_demo and not args.presheaf:
        p, d = dg.loops_presheaf(cat), dict(dg.DEFAULT_SECTION)
    else:
        if not args.presheaf or not args.section:
            raise InputError("--presheaf and --section are required off the demo")
        p = io.presheaf_from_doc(cat, io.load_json(args.presheaf))
        d = json.loads(args.section)
    hp = build_classifier(cat, p, d)
    if (args.fuse or "coordinate") == "coordinate":
        hp = fuse_classifier(hp)
    lab = dg.labels(hp) if is_demo else None
    ct = classifier_test(hp)
    axioms = {o: verify_nc_heyting(hp.algebra[o])["ok"] for o in cat.objects}
    complete = {o: verify_completeness(hp.algebra[o])["ok"] for o in cat.objects}
    structure = {o: structure_checks(hp.algebra[o])["ok"] for o in cat.objects}
    ok = (ct["ok"] and all(axioms.values()) and all(complete.values())
          and all(structure.values()))
    report = {
        "sizes": {o: len(hp.algebra[o].carrier) for o in cat.objects},
        "tops": {o: len(hp.tops[o]) for o in cat.objects},
        "axioms_ok": axioms, "complete_ok": complete, "structure_ok": structure,
        "classifier_ok": ct["ok"],
        "classifier": io.classifier_to_doc(hp, lab),
        "ok": ok,
    }
    return report, 0 if ok else 1


def cmd_enumerate_nclt(args) -> tuple[dict, int]:
    cat, omega, hp = _demo_bundle(args)
    lab = dg.labels(hp)
    nclts = enumerate_nc_lawvere(hp)
    items = [{"name": dg.nclt_name(hp, t),
              "j": io.topology_to_doc(t, lab)["j"]} for t in nclts]
    return {"count": len(nclts), "topologies": items, "ok": True}, 0


def cmd_derive_ncgt(args) -> tuple[dict, int]:
    cat, omega, hp = _demo_bundle(args)
    if not args.topology:
        raise InputError("--topology nclt:<mask> is required")
    lab = dg.labels(hp)
    for t in enumerate_nc_lawvere(hp):
        if dg.nclt_name(hp, t) == args.topology:
            ncgt = derive_nc_grothendieck(t)
            return {"name": args.topology,
                    "covers": io.topology_to_doc(ncgt, lab)["covers"],
                    "cover_counts": {o: len(ncgt.covers[o]) for o in cat.objects},
                    "ok": True}, 0
    raise InputError(f"unknown noncommutative topology {args.topology!r}")


def _topology_and_presheaf(args):
    cat, omega, hp = _demo_bundle(args)
    if not args.topology:
        raise InputError("--topology is required")
    top = _named_topology(args.topology, omega, hp)
    f = None
    if args.presheaf:
        doc = io.load_json(args.presheaf)
        if "vertices" in doc:
            f = dg.colored_digraph(hp, doc["vertices"], doc["edges"])
        else:
            f = io.presheaf_from_doc(cat, doc)
    return cat, omega, hp, top, f


def cmd_check_sheaf(args) -> tuple[dict, int]:
    cat, omega, hp, top, f = _topology_and_presheaf(args)
    if f is None:
        raise InputError("--presheaf is required")
    verdict = check_sheaf(f, top)
    witness = verdict["witness"]
    if witness is not None:
        witness = {"object": witness["object"], "extensions": witness["extensions"],
                   "cover": str(witness["cover"]), "family": str(witness["family"])}
    return ({"topology": args.topology, "is_sheaf": verdict["ok"],
             "witness": witness, "ok": verdict["ok"]},
            0 if verdict["ok"] else 1)


def cmd_enumerate_sheaves(args) -> tuple[dict, int]:
    cat, omega, hp, top, _ = _topology_and_presheaf(args)
    sheaves = enumerate_sheaves(top, _bounds(args, cat))
    lab = dg.labels(hp)
    docs = []
    for s in sheaves:
        if isinstance(s, SlicePresheaf):
            docs.append(_slice_doc(s, lab))
        else:
            docs.append(io.presheaf_to_doc(s))
    return {"topology": args.topology, "count": len(sheaves),
            "sheaves": docs, "ok": True}, 0


def cmd_terminal_search(args) -> tuple[dict, int]:
    cat, omega, hp, top, _ = _topology_and_presheaf(args)
    res = terminal_search(top, _bounds(args, cat))
    lab = dg.labels(hp)

    def render(s):
        return _slice_doc(s, lab) if isinstance(s, SlicePresheaf) else io.presheaf_to_doc(s)

    report = {"topology": args.topology, "status": res.status,
              "sheaves_within_bounds": res.sheaf_count,
              "terminal": render(res.terminal) if res.terminal is not None else None,
              "certificate": ([render(s) for s in res.certificate]
                              if res.certificate else None),
              "detail": res.detail, "ok": res.status != "inconclusive"}
    return report, 0 if res.status != "inconclusive" else 1


def cmd_export_dot(args) -> tuple[dict, int]:
    cat, omega, hp = _demo_bundle(args)
    if not args.dot:
        raise InputError("--dot DIR is required")
    os.makedirs(args.dot, exist_ok=True)
    lab = dg.labels(hp)
    written = []

    def write(name, text):
        path = os.path.join(args.dot, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(name)

    for o in cat.objects:
        write(f"omega_{o}.dot", io.omega_hasse_dot(omega, o))
        write(f"H_{o}.dot", io.hasse_dot(hp.algebra[o].lattice, lab[o], f"H_{o}"))
    write("demo_presheaf.dot", io.digraph_presheaf_dot(dg.loops_presheaf(cat)))
    t = dg.top_slice_presheaf(hp)
    color_name = {x: n[2:] for x, n in lab["E"].items() if n.startswith("1_")}
    write("T.dot", io.digraph_presheaf_dot(t.f, t.pi, color_name, "T"))
    return {"written": written, "directory": args.dot, "ok": True}, 0


def cmd_demo(args) -> tuple[dict, int]:
    cat, omega, hp = _demo_bundle(args)
    lab = dg.labels(hp)
    unfused = dg.demo_classifier("none")
    report: dict[str, Any] = {}
    report["omega"] = {o: len(omega.algebras[o].carrier) for o in cat.objects}
    lts = enumerate_lawvere(omega)
    std = dg.standard_topologies(omega)
    report["lawvere_count"] = len(lts)
    report["lawvere_names"] = sorted(
        name for name, s in std.items()
        if any(lt_to_gt(lt).covers == s.covers for lt in lts))
    report["classifier"] = {
        "unfused": {o: len(unfused.algebra[o].carrier) for o in cat.objects},
        "unfused_tops": {o: len(unfused.tops[o]) for o in cat.objects},
        "fused": {o: len(hp.algebra[o].carrier) for o in cat.objects},
        "fused_tops": {o: len(hp.tops[o]) for o in cat.objects},
        "axioms_ok": all(verify_nc_heyting(hp.algebra[o])["ok"] for o in cat.objects),
        "complete_ok": all(verify_completeness(hp.algebra[o])["ok"] for o in cat.objects),
        "structure_ok": all(structure_checks(hp.algebra[o])["ok"] for o in cat.objects),
        "classifier_ok": classifier_test(hp)["ok"],
    }
    nclts = enumerate_nc_lawvere(hp)
    report["nclt_count"] = len(nclts)
    report["nclt_names"] = [dg.nclt_name(hp, t) for t in nclts]
    sections = global_sections_T(hp)
    restrictions = {}
    for t in nclts:
        name = dg.nclt_name(hp, t)
        per = {}
        for g in sections:
            lt = restrict_to_section(t, g, omega)
            gt = lt_to_gt(lt)
            per[lab["E"][g["E"]]] = next(n for n, s in std.items()
                                         if s.covers == gt.covers)
        restrictions[name] = per
    report["restrictions"] = restrictions
    bounds = _bounds(args, cat)
    sheaf_report = {}
    for mask in ("nclt:0000", "nclt:1111"):
        t = next(t for t in nclts if dg.nclt_name(hp, t) == mask)
        ncgt = derive_nc_grothendieck(t)
        sheaves = enumerate_sheaves(ncgt, bounds)
        entry = {"count": len(sheaves),
                 "all_complete": all(dg.is_complete_colored(s) for s in sheaves),
                 "T_is_sheaf": check_sheaf(dg.top_slice_presheaf(hp), ncgt)["ok"]}
        if mask != "nclt:0000":
            res = terminal_search(ncgt, bounds)
            entry["terminal"] = res.status
            entry["certificate"] = ([_slice_doc(s, lab) for s in res.certificate]
                                    if res.certificate else None)
        sheaf_report[mask] = entry
    report["sheaves"] = sheaf_report
    report["ok"] = (
        report["lawvere_count"] == 4 and report["nclt_count"] == 16
        and report["classifier"]["classifier_ok"]
        and sheaf_report["nclt:1111"]["terminal"] == "no_terminal")
    return report, 0 if report["ok"] else 1


# ---------------------------------------------------------------------------


COMMANDS = {
    "validate": cmd_validate,
    "omega": cmd_omega,
    "enumerate-lt": cmd_enumerate_lt,
    "build-classifier": cmd_build_classifier,
    "enumerate-nclt": cmd_enumerate_nclt,
    "derive-ncgt": cmd_derive_ncgt,
    "check-sheaf": cmd_check_sheaf,
    "enumerate-sheaves": cmd_enumerate_sheaves,
    "terminal-search": cmd_terminal_search,
    "export-dot": cmd_export_dot,
    "demo": cmd_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nctopos",
        description="Finite noncommutative topos computations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--site", help="category JSON (default: built-in digraph site)")
        p.add_argument("--presheaf", help="presheaf or colored-digraph JSON")
        p.add_argument("--topology", help="J1..J4, nclt:<4-bit mask>, or a file")
        p.add_argument("--section", help="inline JSON for a global section of P")
        p.add_argument("--bounds", type=int, help="size bound per object (default 3)")
        p.add_argument("--fuse", choices=["coordinate", "none"], default="coordinate")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker cap (results are canonical regardless)")
        p.add_argument("--pretty", action="store_true")
        p.add_argument("--dot", help="directory for DOT exports")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = COMMANDS[args.command](args)
    except (InputError, NCToposError, OSError, json.JSONDecodeError,
            KeyError, ValueError) as e:
        _emit({"ok": False, "error": f"{type(e).__name__}: {e}"}, args.pretty)
        return 2
    _emit(report, args.pretty)
    return code


if __name__ == "__main__":
    sys.exit(main())
