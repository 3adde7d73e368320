"""Sheaf checking and bounded sheaf enumeration.

Classical mode checks plain presheaves against a Grothendieck topology;
slice mode checks presheaves over the top presheaf T (for the digraph demo:
edge-colored digraphs) against a noncommutative Grothendieck topology.  The
extension of a matching family is required to be unique among all elements of
F(C) — the triangle over T constrains the family, not the extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Any, Hashable, Mapping

from .fincat import (
    FiniteCategory,
    NCToposError,
    NaturalTransformation,
    Presheaf,
    SiteMismatch,
    canon_key,
    enumerate_nat_trans,
    make_presheaf,
)
from .classif import ClassifierPresheaf
from .topol import GrothendieckTopology, NCGrothendieckTopology


class BoundTooLarge(NCToposError):
    pass


@dataclass
class SlicePresheaf:
    """A presheaf F with a structure map pi : F -> T into the top presheaf."""

    hp: ClassifierPresheaf
    f: Presheaf
    pi: Mapping[str, Mapping[Hashable, Hashable]]

    def validate(self) -> None:
        cat = self.hp.cat
        if self.f.cat != cat:
            raise SiteMismatch("presheaf and classifier live over different sites")
        for o in cat.objects:
            for x in self.f.at[o]:
                if self.pi[o][x] not in self.hp.top_of(o):
                    raise NCToposError(f"pi({o!r})({x!r}) is not a top element")
        for a in cat.arrows:
            c, d = cat.cod[a], cat.dom[a]
            for x in self.f.at[c]:
                if self.hp.act[a][self.pi[c][x]] != self.pi[d][self.f.act[a][x]]:
                    raise NCToposError(f"pi is not natural along {a!r} at {x!r}")


def sieve_presheaf(cat: FiniteCategory, c: str, sieve: frozenset) -> Presheaf:
    """A sieve on C as a subpresheaf of yC (acting by precomposition)."""
    at = {d: tuple(sorted(f for f in sieve if cat.dom[f] == d)) for d in cat.objects}
    act = {
        a: {f: cat.compose(f, a) for f in at[cat.cod[a]]}
        for a in cat.arrows
    }
    return make_presheaf(cat, at, act)


def _families(f: Presheaf, c: str, sieve: frozenset) -> list[dict]:
    """Maps S -> F(dom -), natural for precomposition; i.e. matching
    families for the sieve, with no slice constraint.  Backtracking with
    incremental compatibility so forced values prune immediately."""
    cat = f.cat
    arrows = sorted(sieve)
    out: list[dict] = []
    assign: dict = {}

    def consistent(a) -> bool:
        va = assign[a]
        for g in cat.arrows:
            if cat.cod[g] == cat.dom[a]:
                comp = cat.compose(a, g)
                if comp in assign and assign[comp] != f.act[g][va]:
                    return False
        for b, vb in assign.items():
            if b == a:
                continue
            for g in cat.arrows:
                if (cat.cod[g] == cat.dom[b] and cat.compose(b, g) == a
                        and f.act[g][vb] != va):
                    return False
        return True

    def backtrack(i: int) -> None:
        if i == len(arrows):
            out.append(dict(assign))
            return
        a = arrows[i]
        for v in f.at[cat.dom[a]]:
            assign[a] = v
            if consistent(a):
                backtrack(i + 1)
            del assign[a]

    backtrack(0)
    out.sort(key=lambda fam: canon_key(tuple(fam[a] for a in arrows)))
    return out


def matching_families(f, c: str, cover) -> list[dict]:
    """Matching families for a cover.

    Classical mode: f a Presheaf and cover a sieve.  Slice mode: f a
    SlicePresheaf and cover a pair (S, x) with x in H(C); the family must
    satisfy pi(m_a) = H(a)(x) for every a in S."""
    if isinstance(f, SlicePresheaf):
        sieve, x = cover
        fams = _families(f.f, c, sieve)
        hp = f.hp
        return [
            fam for fam in fams
            if all(f.pi[hp.cat.dom[a]][fam[a]] == hp.act[a][x] for a in sieve)
        ]
    return _families(f, c, cover)


def extensions(f: Presheaf, c: str, sieve: frozenset, family: Mapping) -> list:
    """Elements of F(C) restricting to the family along every arrow of the
    sieve."""
    return [e for e in f.at[c]
            if all(f.act[a][e] == family[a] for a in sieve)]


def check_sheaf(f, topology) -> dict:
    """Verdict: every matching family of every cover has exactly one
    extension.  On failure the witness records (object, cover, family,
    extension count)."""
    if isinstance(topology, GrothendieckTopology):
        if isinstance(f, SlicePresheaf):
            raise NCToposError("classical topologies check plain presheaves")
        covers = {o: [(s, None) for s in sorted(topology.covers[o], key=canon_key)]
                  for o in topology.omega.cat.objects}
        cat = topology.omega.cat
        plain = f
    elif isinstance(topology, NCGrothendieckTopology):
        if not isinstance(f, SlicePresheaf):
            raise NCToposError("noncommutative topologies check slice presheaves")
        f.validate()
        covers = {o: list(topology.covers[o]) for o in topology.hp.cat.objects}
        cat = topology.hp.cat
        plain = f.f
    else:
        raise NCToposError(f"not a topology: {topology!r}")
    for o in cat.objects:
        for (sieve, x) in covers[o]:
            cov = sieve if x is None else (sieve, x)
            for fam in matching_families(f, o, cov):
                exts = extensions(plain, o, sieve, fam)
                if len(exts) != 1:
                    return {"ok": False, "witness": {
                        "object": o, "cover": cov, "family": fam,
                        "extensions": len(exts)}}
    return {"ok": True, "witness": None}


# ---------------------------------------------------------------------------
# Bounded enumeration up to isomorphism


def _functions(dom: tuple, cod: tuple) -> list[dict]:
    if not dom:
        return [{}]
    if not cod:
        return []
    return [dict(zip(dom, values)) for values in product(cod, repeat=len(dom))]


def canonical_key(p: Presheaf, colors: Mapping | None = None,
                  color_order: Mapping | None = None):
    """Isomorphism-invariant key: the minimum over all per-object element
    relabelings of the serialized action tables (and colors, if given).
    Brute-force over permutations; element counts stay tiny at desk scale."""
    cat = p.cat
    objs = list(cat.objects)
    nonid = [a for a in cat.arrows if not cat.is_identity(a)]
    elems = {o: list(p.at[o]) for o in objs}
    sizes = tuple(len(elems[o]) for o in objs)
    best = None
    for perms in product(*(permutations(range(len(elems[o]))) for o in objs)):
        lab = {o: dict(zip(elems[o], perm)) for o, perm in zip(objs, perms)}
        orig = {o: {v: k for k, v in lab[o].items()} for o in objs}
        ser = [sizes]
        for a in nonid:
            c, d = cat.cod[a], cat.dom[a]
            ser.append(tuple(lab[d][p.act[a][orig[c][i]]] for i in range(len(elems[c]))))
        if colors is not None:
            for o in objs:
                ser.append(tuple(color_order[o][colors[o][orig[o][i]]]
                                 for i in range(len(elems[o]))))
        key = tuple(ser)
        if best is None or key < best:
            best = key
    return best


def enumerate_presheaves(cat: FiniteCategory, bounds: Mapping[str, int],
                         budget: int = 10 ** 6) -> list[Presheaf]:
    """All presheaves with |F(C)| <= bounds[C], up to isomorphism, canonical
    order.  Elements are integers 0..n-1."""
    objs = list(cat.objects)
    nonid = [a for a in cat.arrows if not cat.is_identity(a)]
    found: dict = {}
    for sizes in product(*(range(bounds[o] + 1) for o in objs)):
        size = dict(zip(objs, sizes))
        cost = 1
        for a in nonid:
            cost *= max(1, size[cat.dom[a]]) ** size[cat.cod[a]]
        if cost > budget:
            raise BoundTooLarge(f"{cost} candidate tables at sizes {size}")
        at = {o: tuple(range(size[o])) for o in objs}
        for tables in product(*(_functions(at[cat.cod[a]], at[cat.dom[a]]) for a in nonid)):
            act = dict(zip(nonid, (dict(t) for t in tables)))
            try:
                p = make_presheaf(cat, at, act)
            except NCToposError:
                continue
            found.setdefault(canonical_key(p), p)
    return [found[k] for k in sorted(found)]


def enumerate_slice_presheaves(hp: ClassifierPresheaf, bounds: Mapping[str, int],
                               budget: int = 10 ** 6) -> list[SlicePresheaf]:
    """All slice presheaves over T within bounds, up to slice isomorphism
    (an isomorphism of the underlying presheaves commuting with pi)."""
    cat = hp.cat
    objs = list(cat.objects)
    color_order = {o: {t: i for i, t in enumerate(hp.tops[o])} for o in objs}
    found: dict = {}
    for p in enumerate_presheaves(cat, bounds, budget):
        for choice in product(*(
                _functions(p.at[o], tuple(hp.tops[o])) for o in objs)):
            pi = dict(zip(objs, (dict(c) for c in choice)))
            sp = SlicePresheaf(hp, p, pi)
            try:
                sp.validate()
            except NCToposError:
                continue
            found.setdefault(canonical_key(p, pi, color_order), sp)
    return [found[k] for k in sorted(found)]


def enumerate_sheaves(topology, bounds: Mapping[str, int],
                      budget: int = 10 ** 6, candidates: list | None = None) -> list:
    """All sheaves within the bounds, up to (slice-)isomorphism.  A
    precomputed candidate list (from enumerate_presheaves /
    enumerate_slice_presheaves) may be reused across topologies."""
    if candidates is None:
        if isinstance(topology, GrothendieckTopology):
            candidates = enumerate_presheaves(topology.omega.cat, bounds, budget)
        elif isinstance(topology, NCGrothendieckTopology):
            candidates = enumerate_slice_presheaves(topology.hp, bounds, budget)
        else:
            raise NCToposError(f"not a topology: {topology!r}")
    return [f for f in candidates if check_sheaf(f, topology)["ok"]]


def presheaf_morphisms(f: Presheaf, g: Presheaf) -> list[NaturalTransformation]:
    return enumerate_nat_trans(f, g)


def slice_morphisms(a: SlicePresheaf, b: SlicePresheaf) -> list[NaturalTransformation]:
    """Natural transformations of the underlying presheaves commuting with
    the structure maps (so: color-preserving digraph maps in the demo)."""
    cat = a.hp.cat
    return [
        n for n in enumerate_nat_trans(a.f, b.f)
        if all(b.pi[o][n(o, x)] == a.pi[o][x] for o in cat.objects for x in a.f.at[o])
    ]


@dataclass
class TerminalSearchResult:
    status: str  # "terminal" | "no_terminal" | "inconclusive"
    terminal: Any = None
    certificate: tuple | None = None
    sheaf_count: int = 0
    detail: dict = field(default_factory=dict)


def terminal_search(topology, bounds: Mapping[str, int],
                    budget: int = 10 ** 6,
                    candidates: list | None = None) -> TerminalSearchResult:
    """Look for a sheaf receiving exactly one morphism from every sheaf
    within bounds; otherwise look for a two-sheaf certificate: a pair such
    that every candidate fails uniqueness against at least one of the two."""
    sheaves = enumerate_sheaves(topology, bounds, budget, candidates)
    slice_mode = isinstance(topology, NCGrothendieckTopology)
    morph = slice_morphisms if slice_mode else presheaf_morphisms

    counts = [[len(morph(f, z)) for f in sheaves] for z in sheaves]
    for zi, row in enumerate(counts):
        if all(c == 1 for c in row):
            return TerminalSearchResult("terminal", terminal=sheaves[zi],
                                        sheaf_count=len(sheaves))
    n = len(sheaves)
    for i in range(n):
        for k in range(i + 1, n):
            if all(counts[z][i] != 1 or counts[z][k] != 1 for z in range(n)):
                a, b = sheaves[i], sheaves[k]
                detail = {
                    "morphisms_a_to_b": len(morph(a, b)),
                    "morphisms_b_to_a": len(morph(b, a)),
                }
                return TerminalSearchResult("no_terminal", certificate=(a, b),
                                            sheaf_count=n, detail=detail)
    return TerminalSearchResult("inconclusive", sheaf_count=n)
