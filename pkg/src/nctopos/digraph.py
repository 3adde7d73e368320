"""The built-in demo site: directed multigraphs as presheaves.

The site has two objects V and E with two non-identity arrows s, t : V -> E;
presheaves on it are directed multigraphs (E-elements are edges, V-elements
vertices, the actions pick out source and target).  The demo presheaf P has a
single vertex x carrying two loops a and b; edge colours are elements of P(E)
and vertex colours elements of P(V).
"""

from __future__ import annotations

from itertools import permutations
from typing import Hashable, Mapping

from .fincat import (
    FiniteCategory,
    Presheaf,
    make_presheaf,
    omega_presheaf,
    validate_category,
)
from .classif import ClassifierPresheaf, build_classifier, classifier_test, fuse_classifier
from .sheaf import SlicePresheaf
from .topol import GrothendieckTopology


def digraph_site() -> FiniteCategory:
    """Two objects V, E; arrows s, t : V -> E plus identities."""
    return validate_category(
        objects=["V", "E"],
        arrows=[("id_V", "V", "V"), ("id_E", "E", "E"), ("s", "V", "E"), ("t", "V", "E")],
        identities={"V": "id_V", "E": "id_E"},
        compose={},
    )


def loops_presheaf(cat: FiniteCategory | None = None) -> Presheaf:
    """One vertex x with two loops a, b."""
    cat = cat or digraph_site()
    return make_presheaf(
        cat,
        {"V": ["x"], "E": ["a", "b"]},
        {"s": {"a": "x", "b": "x"}, "t": {"a": "x", "b": "x"}},
    )


DEFAULT_SECTION = {"V": "x", "E": "a"}


def demo_classifier(fuse: str = "coordinate") -> ClassifierPresheaf:
    """The classifier H built from the two-loop presheaf; `fuse` is
    "coordinate" (identify tops agreeing on edge colours; 13 elements at E)
    or "none" (17 elements at E)."""
    cat = digraph_site()
    p = loops_presheaf(cat)
    hp = build_classifier(cat, p, DEFAULT_SECTION)
    if fuse == "coordinate":
        hp = fuse_classifier(hp, rule="coordinate")
    elif fuse != "none":
        raise ValueError(f"unknown fuse rule {fuse!r}")
    classifier_test(hp)  # caches the H/D ≅ Ω isomorphism for later transport
    return hp


def element_label(hp: ClassifierPresheaf, o: str, x: Hashable) -> str:
    """Readable names: 0, S_c, T_d, U_cd, 1_cd (fused) / 1_ecd (unfused) at E;
    0, 1 at V."""
    u, coords = x
    cat = hp.cat
    idx = sorted(cat.arrows_into(o))  # matches the coordinate order of H
    named = {idx[i]: coords[i] for i in range(len(idx)) if coords[i] is not None}
    if o == "V":
        return "1" if u else "0"
    c, d = named.get("s"), named.get("t")
    if not u:
        return "0"
    if u == frozenset({"s"}):
        return f"S_{c}"
    if u == frozenset({"t"}):
        return f"T_{d}"
    if u == frozenset({"s", "t"}):
        return f"U_{c}{d}"
    e = named.get("id_E")
    # in a fused classifier the edge colours alone determine the top, so
    # exactly one carrier element shares this (c, d) at the top level
    pos_s, pos_t = idx.index("s"), idx.index("t")
    same_cd = sum(1 for y in hp.algebra[o].carrier
                  if y[0] == u and y[1][pos_s] == c and y[1][pos_t] == d)
    if same_cd == 1:
        return f"1_{c}{d}"
    return f"1_{e}{c}{d}"


def labels(hp: ClassifierPresheaf) -> dict[str, dict[Hashable, str]]:
    out = {}
    for o in hp.cat.objects:
        out[o] = {x: element_label(hp, o, x) for x in hp.algebra[o].carrier}
        if len(set(out[o].values())) != len(out[o]):
            raise ValueError(f"labels collide at {o!r}")
    return out


def _sieves(cat: FiniteCategory):
    id_e, s, t = "id_E", "s", "t"
    maxE = frozenset({id_e, s, t})
    u = frozenset({s, t})
    maxV = frozenset({"id_V"})
    return maxV, maxE, u


def standard_topologies(omega=None) -> dict[str, GrothendieckTopology]:
    """The four Grothendieck topologies on the digraph site, named J1-J4:
    J1 trivial, J2 adds the source-target cover of E, J3 adds the empty cover
    of V, J4 adds every sieve (the discrete topology)."""
    cat = digraph_site()
    omega = omega or omega_presheaf(cat)
    maxV, maxE, u = _sieves(cat)
    empty = frozenset()
    js = {
        "J1": {"V": frozenset({maxV}), "E": frozenset({maxE})},
        "J2": {"V": frozenset({maxV}), "E": frozenset({maxE, u})},
        "J3": {"V": frozenset({maxV, empty}), "E": frozenset({maxE})},
        "J4": {"V": frozenset(omega.algebras["V"].carrier),
               "E": frozenset(omega.algebras["E"].carrier)},
    }
    return {name: GrothendieckTopology(omega, covers) for name, covers in js.items()}


# ---------------------------------------------------------------------------
# Multigraphs as presheaves on the digraph site


def multigraph_presheaf(cat: FiniteCategory, n: int, matrix) -> Presheaf:
    """The presheaf of a multigraph given by a multiplicity matrix:
    matrix[i][j] parallel edges from vertex i to vertex j."""
    vertices = [f"v{i}" for i in range(n)]
    at_e, src, dst = [], {}, {}
    for i in range(n):
        for j in range(n):
            for k in range(matrix[i][j]):
                e = f"e{i}_{j}_{k}"
                at_e.append(e)
                src[e] = f"v{i}"
                dst[e] = f"v{j}"
    return make_presheaf(cat, {"V": vertices, "E": at_e}, {"s": src, "t": dst})


def _matrix_key(n: int, matrix) -> tuple:
    best = None
    for p in permutations(range(n)):
        key = tuple(tuple(matrix[p[i]][p[j]] for j in range(n)) for i in range(n))
        if best is None or key < best:
            best = key
    return (n, best)


def enumerate_multigraphs(max_vertices: int, max_edges: int) -> list[tuple[int, tuple]]:
    """Multiplicity matrices of multigraphs with at most the given vertex and
    edge counts, one representative per isomorphism class, canonical order."""

    def distributions(cells: int, total: int):
        if cells == 0:
            yield ()
            return
        for k in range(total + 1):
            for rest in distributions(cells - 1, total - k):
                yield (k,) + rest

    found: dict = {}
    for n in range(max_vertices + 1):
        for flat in distributions(n * n, max_edges):
            matrix = tuple(flat[i * n:(i + 1) * n] for i in range(n))
            found.setdefault(_matrix_key(n, matrix), (n, matrix))
    return [found[k] for k in sorted(found)]


def is_complete_digraph(n: int, matrix) -> bool:
    """Exactly one edge per ordered vertex pair."""
    return all(matrix[i][j] == 1 for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# Colored digraphs as slice presheaves over T


COLORS = ("aa", "ab", "ba", "bb")


def color_tops(hp: ClassifierPresheaf) -> dict[str, Hashable]:
    """Map color names "cd" to the fused top elements 1_cd."""
    lab = labels(hp)
    out = {}
    for x, name in lab["E"].items():
        if name.startswith("1_") and len(name) == 4:
            out[name[2:]] = x
    if sorted(out) != sorted(COLORS):
        raise ValueError("classifier does not have the four fused tops")
    return out


def colored_digraph(hp: ClassifierPresheaf, vertices, edges) -> SlicePresheaf:
    """Slice presheaf from shorthand data: vertices is a list of ids, edges a
    list of {id, src, dst, color} with color in aa/ab/ba/bb."""
    cat = hp.cat
    tops = color_tops(hp)
    vtop = hp.tops["V"][0]
    at = {"V": list(vertices), "E": [e["id"] for e in edges]}
    act = {"s": {e["id"]: e["src"] for e in edges},
           "t": {e["id"]: e["dst"] for e in edges}}
    p = make_presheaf(cat, at, act)
    pi = {"V": {v: vtop for v in vertices},
          "E": {e["id"]: tops[e["color"]] for e in edges}}
    sp = SlicePresheaf(hp, p, pi)
    sp.validate()
    return sp


def is_complete_colored(sp: SlicePresheaf) -> bool:
    """Exactly one edge (of whatever color) per ordered vertex pair."""
    f = sp.f
    pairs = {}
    for e in f.at["E"]:
        pairs[(f.act["s"][e], f.act["t"][e])] = pairs.get((f.act["s"][e], f.act["t"][e]), 0) + 1
    return all(pairs.get((u, v), 0) == 1 for u in f.at["V"] for v in f.at["V"])


def top_slice_presheaf(hp: ClassifierPresheaf) -> SlicePresheaf:
    """T over itself (identity structure map): the one-vertex digraph with
    one loop of each color."""
    t = hp.top_presheaf()
    pi = {o: {x: x for x in t.at[o]} for o in hp.cat.objects}
    sp = SlicePresheaf(hp, t, pi)
    sp.validate()
    return sp


def nclt_name(hp: ClassifierPresheaf, nclt) -> str:
    """Stable name for a noncommutative topology on the fused demo
    classifier: "nclt:bbbb" where bit k says whether U_cd is covered, pairs
    (c,d) in lexicographic order (aa, ab, ba, bb)."""
    lab = labels(hp)
    covered = {}
    for x in hp.algebra["E"].carrier:
        name = lab["E"][x]
        if name.startswith("U_"):
            covered[name[2:]] = nclt.j["E"][x] in hp.top_of("E")
    bits = "".join("1" if covered[k] else "0" for k in sorted(covered))
    return f"nclt:{bits}"
