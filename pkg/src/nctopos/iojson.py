"""JSON document formats and DOT exports.

Documents (all UTF-8 JSON):
  category       {objects:[...], arrows:[{id,dom,cod}...], compose:{"g,f":"h"}}
                 (identities implicit, named id_X)
  presheaf       {at:{object:[elem,...]}, act:{arrow:{elem:elem}}}
  skew lattice   {carrier:[...], meet:[[...]], join:[[...]], bottom:"0",
                  top:"t" (optional), imp:[[...]] (optional)}; row-major tables
  colored digraph {vertices:[...], edges:[{id,src,dst,color}...]},
                 color in aa/ab/ba/bb
  topologies     LT/NCLT as per-object value tables, GT/NCGT as cover lists
"""

from __future__ import annotations

import json
from typing import Any, Hashable, Mapping

from .fincat import (
    FiniteCategory,
    NCToposError,
    OmegaPresheaf,
    Presheaf,
    make_presheaf,
    validate_category,
)
from .skewlat import SkewLattice, green_decomposition
from .ncheyt import NCHeytingAlgebra
from .classif import ClassifierPresheaf
from .topol import (
    GrothendieckTopology,
    LawvereTopology,
    NCGrothendieckTopology,
    NCLawvereTopology,
)


def load_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Categories and presheaves


def category_from_doc(doc: Mapping) -> FiniteCategory:
    objects = list(doc["objects"])
    identities = {o: f"id_{o}" for o in objects}
    arrows = [(identities[o], o, o) for o in objects]
    arrows += [(a["id"], a["dom"], a["cod"]) for a in doc.get("arrows", [])]
    compose = {}
    for key, h in doc.get("compose", {}).items():
        g, f = key.split(",")
        compose[(g.strip(), f.strip())] = h
    return validate_category(objects, arrows, identities, compose)


def category_to_doc(cat: FiniteCategory) -> dict:
    return {
        "objects": list(cat.objects),
        "arrows": [{"id": a, "dom": cat.dom[a], "cod": cat.cod[a]}
                   for a in cat.arrows if not cat.is_identity(a)],
        "compose": {
            f"{g},{f}": h for (g, f), h in cat.composition.items()
            if not cat.is_identity(g) and not cat.is_identity(f)
        },
    }


def presheaf_from_doc(cat: FiniteCategory, doc: Mapping) -> Presheaf:
    return make_presheaf(cat, doc["at"], doc.get("act", {}))


def presheaf_to_doc(p: Presheaf) -> dict:
    return {
        "at": {o: list(p.at[o]) for o in p.cat.objects},
        "act": {a: dict(p.act[a]) for a in p.cat.arrows if not p.cat.is_identity(a)},
    }


# ---------------------------------------------------------------------------
# Skew lattices and noncommutative Heyting algebras


def skewlat_to_doc(lat: SkewLattice, imp: Mapping | None = None,
                   t: Hashable | None = None,
                   label: Mapping | None = None) -> dict:
    lab = label or {x: str(x) for x in lat.carrier}
    order = list(lat.carrier)
    doc: dict = {
        "carrier": [lab[x] for x in order],
        "meet": [[lab[lat.meet[(x, y)]] for y in order] for x in order],
        "join": [[lab[lat.join[(x, y)]] for y in order] for x in order],
    }
    if lat.bottom is not None:
        doc["bottom"] = lab[lat.bottom]
    if imp is not None:
        doc["imp"] = [[lab[imp[(x, y)]] for y in order] for x in order]
    if t is not None:
        doc["top"] = lab[t]
    return doc


def ncheyt_to_doc(h: NCHeytingAlgebra, label: Mapping | None = None) -> dict:
    return skewlat_to_doc(h.lattice, imp=h.imp, t=h.t, label=label)


def skewlat_from_doc(doc: Mapping):
    """Returns a SkewLattice, or an NCHeytingAlgebra when the document
    carries "imp" and "top" fields."""
    order = list(doc["carrier"])
    if len(set(order)) != len(order):
        raise NCToposError("carrier has duplicate elements")

    def table(rows):
        return {(order[i], order[k]): rows[i][k]
                for i in range(len(order)) for k in range(len(order))}

    lat = SkewLattice(tuple(order), table(doc["meet"]), table(doc["join"]),
                      doc.get("bottom"))
    if "imp" in doc and "top" in doc:
        return NCHeytingAlgebra(lat, table(doc["imp"]), doc["top"])
    return lat


def classifier_to_doc(hp: ClassifierPresheaf,
                      labels: Mapping[str, Mapping] | None = None) -> dict:
    cat = hp.cat
    lab = labels or {o: {x: str(x) for x in hp.algebra[o].carrier} for o in cat.objects}
    return {
        "algebras": {o: ncheyt_to_doc(hp.algebra[o], lab[o]) for o in cat.objects},
        "act": {
            a: {lab[cat.cod[a]][x]: lab[cat.dom[a]][y] for x, y in hp.act[a].items()}
            for a in cat.arrows if not cat.is_identity(a)
        },
    }


# ---------------------------------------------------------------------------
# Topologies


def _sieve_doc(s: frozenset) -> list:
    return sorted(s)


def topology_to_doc(top, labels: Mapping[str, Mapping] | None = None) -> dict:
    if isinstance(top, LawvereTopology):
        return {"type": "lawvere", "j": {
            o: {json.dumps(_sieve_doc(s)): _sieve_doc(top.j[o][s])
                for s in top.omega.algebras[o].carrier}
            for o in top.omega.cat.objects}}
    if isinstance(top, GrothendieckTopology):
        return {"type": "grothendieck", "covers": {
            o: sorted(_sieve_doc(s) for s in top.covers[o])
            for o in top.omega.cat.objects}}
    if isinstance(top, NCLawvereTopology):
        hp = top.hp
        lab = labels or {o: {x: str(x) for x in hp.algebra[o].carrier}
                         for o in hp.cat.objects}
        return {"type": "nc-lawvere", "j": {
            o: {lab[o][x]: lab[o][top.j[o][x]] for x in hp.algebra[o].carrier}
            for o in hp.cat.objects}}
    if isinstance(top, NCGrothendieckTopology):
        hp = top.hp
        lab = labels or {o: {x: str(x) for x in hp.algebra[o].carrier}
                         for o in hp.cat.objects}
        return {"type": "nc-grothendieck", "covers": {
            o: [[_sieve_doc(s), lab[o][x]] for (s, x) in top.covers[o]]
            for o in hp.cat.objects}}
    raise NCToposError(f"not a topology: {top!r}")


# ---------------------------------------------------------------------------
# DOT exports


def _quote(s: str) -> str:
    return '"' + str(s).replace('"', '\\"') + '"'


def hasse_dot(lat: SkewLattice, label: Mapping | None = None,
              name: str = "hasse") -> str:
    """Hasse diagram of the natural order, with D-classes rendered as
    same-rank clusters."""
    lab = label or {x: str(x) for x in lat.carrier}
    xs = list(lat.carrier)
    le = lat.le
    covers = []
    for x in xs:
        for y in xs:
            if x == y or not le(x, y):
                continue
            if any(z not in (x, y) and le(x, z) and le(z, y) for z in xs):
                continue
            covers.append((x, y))
    lines = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=plaintext];"]
    green = green_decomposition(lat)
    for i, cl in enumerate(green.classes):
        members = "; ".join(_quote(lab[x]) for x in sorted(cl, key=lambda v: lab[v]))
        lines.append(f"  {{ rank=same; {members}; }}  // D-class {i}")
    for x, y in covers:
        lines.append(f"  {_quote(lab[x])} -> {_quote(lab[y])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def digraph_presheaf_dot(p: Presheaf, colors: Mapping | None = None,
                         color_name: Mapping | None = None,
                         name: str = "graph") -> str:
    """Render a presheaf on the digraph site as the directed multigraph it
    encodes; colors (optional) annotate the edges."""
    lines = [f"digraph {name} {{"]
    for v in p.at["V"]:
        lines.append(f"  {_quote(v)};")
    for e in p.at["E"]:
        attrs = [f"label={_quote(e)}"]
        if colors is not None:
            c = colors["E"][e]
            attrs.append(f"color={_quote(color_name[c] if color_name else c)}")
        lines.append(f"  {_quote(p.act['s'][e])} -> {_quote(p.act['t'][e])} "
                     f"[{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def omega_hasse_dot(omega: OmegaPresheaf, o: str) -> str:
    alg = omega.algebras[o]
    xs = list(alg.carrier)
    lab = {s: "{" + ",".join(sorted(s)) + "}" for s in xs}
    lines = [f"digraph omega_{o} {{", "  rankdir=BT;", "  node [shape=plaintext];"]
    for x in xs:
        for y in xs:
            if x == y or not (x <= y):
                continue
            if any(z not in (x, y) and x <= z and z <= y for z in xs):
                continue
            lines.append(f"  {_quote(lab[x])} -> {_quote(lab[y])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
