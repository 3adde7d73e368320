"""Finite categories, presheaves, sieves, and the sieve-based classifier.

Everything here is table-driven and exhaustively validated: categories are
given by explicit composition tables, presheaves by explicit action tables,
and all laws (associativity, functoriality, naturality) are checked when the
objects are constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Callable, Hashable, Iterable, Mapping


class NCToposError(Exception):
    """Base class for all structured errors raised by this package."""


class BadIdentity(NCToposError):
    pass


class MissingComposite(NCToposError):
    pass


class NonAssociative(NCToposError):
    pass


class UnknownObject(NCToposError):
    pass


class CodMismatch(NCToposError):
    pass


class SiteMismatch(NCToposError):
    pass


class SearchBudgetExceeded(NCToposError):
    pass


def canon_key(x: Any):
    """Total ordering key over the heterogeneous element values used here
    (strings, ints, None, tuples, frozensets). Deterministic across runs."""
    if x is None:
        return (0, "")
    if isinstance(x, bool):
        return (1, repr(x))
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, (int, float)):
        return (3, repr(x))
    if isinstance(x, tuple):
        return (4, tuple(canon_key(y) for y in x))
    if isinstance(x, frozenset):
        return (5, tuple(sorted(canon_key(y) for y in x)))
    return (6, repr(x))


def csorted(xs: Iterable) -> list:
    return sorted(xs, key=canon_key)


@dataclass(frozen=True)
class FiniteCategory:
    """A finite category: object ids, arrow ids with dom/cod, and a total
    composition table on composable pairs.  Built via :func:`validate_category`.
    """

    objects: tuple[str, ...]
    arrows: tuple[str, ...]
    dom: Mapping[str, str]
    cod: Mapping[str, str]
    identity: Mapping[str, str]
    composition: Mapping[tuple[str, str], str]

    def compose(self, g: str, f: str) -> str:
        """g after f (cod f = dom g)."""
        return self.composition[(g, f)]

    def is_identity(self, f: str) -> bool:
        return self.identity[self.dom[f]] == f

    def arrows_into(self, c: str) -> tuple[str, ...]:
        if c not in self.identity:
            raise UnknownObject(c)
        return tuple(a for a in self.arrows if self.cod[a] == c)

    def hom(self, d: str, c: str) -> tuple[str, ...]:
        return tuple(a for a in self.arrows if self.dom[a] == d and self.cod[a] == c)


def validate_category(
    objects: Iterable[str],
    arrows: Iterable[tuple[str, str, str]],
    identities: Mapping[str, str],
    compose: Mapping[tuple[str, str], str],
) -> FiniteCategory:
    """Validate a raw category description and intern it.

    `arrows` lists (id, dom, cod) triples; `compose` maps (g, f) -> g∘f for
    composable pairs.  Composites with an identity may be omitted.  Raises
    BadIdentity / MissingComposite / NonAssociative naming the offenders.
    """
    objs = tuple(sorted(objects))
    arr_list = sorted(arrows)
    names = tuple(a for a, _, _ in arr_list)
    if len(set(names)) != len(names):
        raise NCToposError("duplicate arrow ids")
    dom = {a: d for a, d, _ in arr_list}
    cod = {a: c for a, _, c in arr_list}
    for o in objs:
        i = identities.get(o)
        if i is None or i not in dom:
            raise BadIdentity(f"no identity arrow for object {o!r}")
        if dom[i] != o or cod[i] != o:
            raise BadIdentity(f"identity {i!r} of {o!r} is not an endo-arrow")
    comp = dict(compose)
    # identity composites are implied
    for f in names:
        comp.setdefault((identities[cod[f]], f), f)
        comp.setdefault((f, identities[dom[f]]), f)
    for g, f in product(names, names):
        if dom[g] != cod[f]:
            if (g, f) in comp:
                raise NCToposError(f"composite given for non-composable pair ({g!r},{f!r})")
            continue
        h = comp.get((g, f))
        if h is None:
            raise MissingComposite(f"no composite for ({g!r},{f!r})")
        if h not in dom or dom[h] != dom[f] or cod[h] != cod[g]:
            raise MissingComposite(f"composite {h!r} of ({g!r},{f!r}) has wrong type")
    for f in names:
        if comp[(identities[cod[f]], f)] != f or comp[(f, identities[dom[f]])] != f:
            raise BadIdentity(f"identity law fails at {f!r}")
    for h, g in product(names, names):
        if dom[h] != cod[g]:
            continue
        for f in names:
            if dom[g] != cod[f]:
                continue
            if comp[(comp[(h, g)], f)] != comp[(h, comp[(g, f)])]:
                raise NonAssociative(f"associativity fails on ({h!r},{g!r},{f!r})")
    return FiniteCategory(objs, names, dom, cod, dict(identities), comp)


@dataclass(frozen=True)
class Presheaf:
    """Contravariant set-valued functor given by element lists and action
    tables.  Element values may be any hashables (strings, sieves, tuples)."""

    cat: FiniteCategory
    at: Mapping[str, tuple[Hashable, ...]]
    act: Mapping[str, Mapping[Hashable, Hashable]]

    def validate(self) -> None:
        cat = self.cat
        for o in cat.objects:
            if o not in self.at:
                raise UnknownObject(o)
        for f in cat.arrows:
            tbl = self.act[f]
            src, dst = set(self.at[cat.cod[f]]), set(self.at[cat.dom[f]])
            if set(tbl) != src or not set(tbl.values()) <= dst:
                raise NCToposError(f"action of {f!r} is not a map P({cat.cod[f]}) -> P({cat.dom[f]})")
        for o in cat.objects:
            i = cat.identity[o]
            for x in self.at[o]:
                if self.act[i][x] != x:
                    raise NCToposError(f"P({i!r}) not the identity at {x!r}")
        for g, f in product(cat.arrows, cat.arrows):
            if cat.dom[g] != cat.cod[f]:
                continue
            gf = cat.compose(g, f)
            for x in self.at[cat.cod[g]]:
                if self.act[gf][x] != self.act[f][self.act[g][x]]:
                    raise NCToposError(f"contravariance fails on ({g!r},{f!r}) at {x!r}")

    def apply(self, f: str, x: Hashable) -> Hashable:
        return self.act[f][x]


def make_presheaf(cat: FiniteCategory, at, act) -> Presheaf:
    """Build and validate a presheaf, filling in identity actions."""
    at = {o: tuple(csorted(xs)) for o, xs in at.items()}
    act = {f: dict(t) for f, t in act.items()}
    for o in cat.objects:
        act.setdefault(cat.identity[o], {x: x for x in at[o]})
    p = Presheaf(cat, at, act)
    p.validate()
    return p


@dataclass(frozen=True)
class NaturalTransformation:
    source: Presheaf
    target: Presheaf
    component: Mapping[str, Mapping[Hashable, Hashable]]

    def validate(self) -> None:
        if self.source.cat is not self.target.cat and self.source.cat != self.target.cat:
            raise SiteMismatch("source and target live over different categories")
        cat = self.source.cat
        for o in cat.objects:
            comp = self.component[o]
            for x in self.source.at[o]:
                if comp[x] not in self.target.at[o]:
                    raise NCToposError(f"component at {o!r} leaves the target on {x!r}")
        for f in cat.arrows:
            c, d = cat.cod[f], cat.dom[f]
            for x in self.source.at[c]:
                lhs = self.target.act[f][self.component[c][x]]
                rhs = self.component[d][self.source.act[f][x]]
                if lhs != rhs:
                    raise NCToposError(f"naturality fails at {f!r} on {x!r}")

    def __call__(self, o: str, x: Hashable) -> Hashable:
        return self.component[o][x]

    def key(self):
        return tuple(
            (o, tuple((x, self.component[o][x]) for x in self.source.at[o]))
            for o in self.source.cat.objects
        )


def yoneda_presheaf(cat: FiniteCategory, c: str) -> Presheaf:
    """yC(D) = Hom(D, C), acting by precomposition."""
    if c not in cat.identity:
        raise UnknownObject(c)
    at = {d: cat.hom(d, c) for d in cat.objects}
    act = {
        f: {g: cat.compose(g, f) for g in at[cat.cod[f]]}
        for f in cat.arrows
    }
    return make_presheaf(cat, at, act)


# ---------------------------------------------------------------------------
# Sieves

Sieve = frozenset  # a sieve on C is a frozenset of arrow ids with codomain C


def is_sieve(cat: FiniteCategory, c: str, s: frozenset) -> bool:
    if not all(cat.cod[g] == c for g in s):
        return False
    for g in s:
        for h in cat.arrows:
            if cat.cod[h] == cat.dom[g] and cat.compose(g, h) not in s:
                return False
    return True


def sieve_key(s: frozenset):
    return (len(s), tuple(sorted(s)))


def enumerate_sieves(cat: FiniteCategory, c: str) -> list[frozenset]:
    """All sieves on c, in canonical (size, lexicographic) order.

    Filters the full powerset when the hom-set is small; for larger fibers it
    closes the principal sieves under binary union instead.
    """
    into = cat.arrows_into(c)
    if len(into) <= 20:
        out = []
        for r in range(len(into) + 1):
            for sub in combinations(into, r):
                s = frozenset(sub)
                if is_sieve(cat, c, s):
                    out.append(s)
        return sorted(out, key=sieve_key)
    principal = set()
    for f in into:
        gen = {f}
        for h in cat.arrows:
            if cat.cod[h] == cat.dom[f]:
                gen.add(cat.compose(f, h))
        principal.add(frozenset(gen))
    found = {frozenset()} | principal
    frontier = set(found)
    while frontier:
        new = set()
        for a in frontier:
            for b in principal:
                u = a | b
                if u not in found:
                    new.add(u)
        found |= new
        frontier = new
    return sorted(found, key=sieve_key)


def restrict_sieve(cat: FiniteCategory, h: str, s: frozenset) -> frozenset:
    """h*(S) = {g with cod g = dom h : h∘g ∈ S}, a sieve on dom h."""
    c = cat.cod[h]
    if any(cat.cod[g] != c for g in s):
        raise CodMismatch(f"sieve is not on cod {h!r}")
    d = cat.dom[h]
    return frozenset(g for g in cat.arrows_into(d) if cat.compose(h, g) in s)


# ---------------------------------------------------------------------------
# Heyting algebras (commutative); fibers of the classifier


@dataclass(frozen=True)
class HeytingAlgebra:
    """Finite Heyting algebra as explicit operation tables."""

    carrier: tuple[Hashable, ...]
    meet: Mapping[tuple, Hashable]
    join: Mapping[tuple, Hashable]
    imp: Mapping[tuple, Hashable]
    bottom: Hashable
    top: Hashable

    def le(self, x, y) -> bool:
        return self.meet[(x, y)] == x

    def verify(self) -> dict:
        """Check lattice laws, distributivity, H1-H4 and the adjunction HA."""
        cs = self.carrier
        checks: dict[str, Any] = {}

        def law(name, pred, arity):
            for xs in product(cs, repeat=arity):
                if not pred(*xs):
                    checks[name] = {"ok": False, "witness": xs}
                    return
            checks[name] = {"ok": True}

        m, j, i = self.meet, self.join, self.imp
        law("idempotent", lambda x: m[(x, x)] == x and j[(x, x)] == x, 1)
        law("commutative", lambda x, y: m[(x, y)] == m[(y, x)] and j[(x, y)] == j[(y, x)], 2)
        law("associative", lambda x, y, z: m[(m[(x, y)], z)] == m[(x, m[(y, z)])]
            and j[(j[(x, y)], z)] == j[(x, j[(y, z)])], 3)
        law("absorption", lambda x, y: m[(x, j[(y, x)])] == x and j[(m[(x, y)], x)] == x, 2)
        law("bounds", lambda x: m[(self.top, x)] == x and j[(self.bottom, x)] == x, 1)
        law("distributive", lambda x, y, z: m[(x, j[(y, z)])] == j[(m[(x, y)], m[(x, z)])], 3)
        law("H1", lambda x: i[(x, x)] == self.top, 1)
        law("H2", lambda x, y: m[(x, i[(x, y)])] == m[(x, y)], 2)
        law("H3", lambda x, y: m[(y, i[(x, y)])] == y, 2)
        law("H4", lambda x, y, z: i[(x, m[(y, z)])] == m[(i[(x, y)], i[(x, z)])], 3)
        law("HA", lambda x, y, z: (self.le(m[(x, y)], z)) == (self.le(x, i[(y, z)])), 3)
        checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
        return checks

    def join_irreducibles(self) -> list:
        out = []
        for x in self.carrier:
            if x == self.bottom:
                continue
            below = [y for y in self.carrier if self.le(y, x) and y != x]
            sup = self.bottom
            for y in below:
                sup = self.join[(sup, y)]
            if sup != x:
                out.append(x)
        return csorted(out)


def omega_algebra(cat: FiniteCategory, c: str) -> HeytingAlgebra:
    """The Heyting algebra of sieves on c: meet/join are intersection/union,
    S => R collects the arrows along which S restricts inside R."""
    sieves = enumerate_sieves(cat, c)
    into = cat.arrows_into(c)
    meet = {(s, r): s & r for s, r in product(sieves, sieves)}
    join = {(s, r): s | r for s, r in product(sieves, sieves)}
    imp = {}
    for s, r in product(sieves, sieves):
        imp[(s, r)] = frozenset(
            f for f in into
            if restrict_sieve(cat, f, s) <= restrict_sieve(cat, f, r)
        )
    return HeytingAlgebra(tuple(sieves), meet, join, imp, frozenset(), frozenset(into))


@dataclass(frozen=True)
class OmegaPresheaf:
    """The classifier Ω: the presheaf of sieves with its per-object Heyting
    structure and the maximal-sieve global section `true`."""

    cat: FiniteCategory
    presheaf: Presheaf
    algebras: Mapping[str, HeytingAlgebra]
    true: Mapping[str, frozenset]

    def verify(self) -> dict:
        checks: dict[str, Any] = {}
        for o in self.cat.objects:
            rep = self.algebras[o].verify()
            checks[f"heyting[{o}]"] = {"ok": rep["ok"], "detail": {k: v for k, v in rep.items() if k != "ok" and not v["ok"]}}
        # restrictions are Heyting morphisms
        bad = None
        for f in self.cat.arrows:
            c, d = self.cat.cod[f], self.cat.dom[f]
            hc, hd = self.algebras[c], self.algebras[d]
            r = self.presheaf.act[f]
            for s, t in product(hc.carrier, hc.carrier):
                if (r[hc.meet[(s, t)]] != hd.meet[(r[s], r[t])]
                        or r[hc.join[(s, t)]] != hd.join[(r[s], r[t])]
                        or r[hc.imp[(s, t)]] != hd.imp[(r[s], r[t])]):
                    bad = (f, s, t)
                    break
            if bad or r[hc.bottom] != hd.bottom or r[hc.top] != hd.top:
                bad = bad or (f, "bounds", None)
                break
        checks["restriction_morphisms"] = {"ok": bad is None, "witness": bad}
        checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
        return checks


def omega_presheaf(cat: FiniteCategory) -> OmegaPresheaf:
    algebras = {o: omega_algebra(cat, o) for o in cat.objects}
    at = {o: algebras[o].carrier for o in cat.objects}
    act = {
        f: {s: restrict_sieve(cat, f, s) for s in at[cat.cod[f]]}
        for f in cat.arrows
    }
    pre = make_presheaf(cat, at, act)
    omega = OmegaPresheaf(cat, pre, algebras, {o: algebras[o].top for o in cat.objects})
    rep = omega.verify()
    if not rep["ok"]:
        raise NCToposError(f"omega invariants failed: {rep}")
    return omega


# ---------------------------------------------------------------------------
# Natural transformation and subobject enumeration


def _all_functions(src: tuple, dst: tuple):
    """All functions src -> dst as dicts, canonical order."""
    if not src:
        yield {}
        return
    for values in product(dst, repeat=len(src)):
        yield dict(zip(src, values))


def enumerate_nat_trans(p: Presheaf, q: Presheaf, budget: int = 10 ** 7) -> list[NaturalTransformation]:
    """All natural transformations p -> q by exhaustive component search."""
    if p.cat != q.cat:
        raise SiteMismatch("presheaves live over different categories")
    cat = p.cat
    total = 1
    for o in cat.objects:
        if p.at[o]:
            total *= max(1, len(q.at[o])) ** len(p.at[o])
        if total > budget:
            raise SearchBudgetExceeded(f"{total} candidate families exceeds budget {budget}")
        if p.at[o] and not q.at[o]:
            return []
    out = []
    objs = list(cat.objects)
    for comps in product(*(_all_functions(p.at[o], q.at[o]) for o in objs)):
        component = dict(zip(objs, comps))
        nt = NaturalTransformation(p, q, component)
        try:
            nt.validate()
        except NCToposError:
            continue
        out.append(nt)
    out.sort(key=lambda n: canon_key(n.key()))
    return out


def enumerate_subpresheaves(p: Presheaf) -> list[dict[str, frozenset]]:
    """All subpresheaves of p (as per-object element subsets), canonical order."""
    cat = p.cat
    objs = list(cat.objects)
    subsets_per_obj = []
    for o in objs:
        xs = p.at[o]
        subs = [frozenset(c) for r in range(len(xs) + 1) for c in combinations(xs, r)]
        subsets_per_obj.append(subs)
    out = []
    for choice in product(*subsets_per_obj):
        q = dict(zip(objs, choice))
        ok = True
        for f in cat.arrows:
            c, d = cat.cod[f], cat.dom[f]
            if any(p.act[f][x] not in q[d] for x in q[c]):
                ok = False
                break
        if ok:
            out.append(q)
    out.sort(key=lambda q: canon_key(tuple(q[o] for o in objs)))
    return out


def classifying_map(p: Presheaf, omega: OmegaPresheaf, q: Mapping[str, frozenset]) -> NaturalTransformation:
    """The map p -> Ω classifying the subpresheaf q."""
    cat = p.cat
    component = {}
    for o in cat.objects:
        component[o] = {
            x: frozenset(f for f in cat.arrows_into(o) if p.act[f][x] in q[cat.dom[f]])
            for x in p.at[o]
        }
    nt = NaturalTransformation(p, omega.presheaf, component)
    nt.validate()
    return nt


def subobject_lattice(p: Presheaf, omega: OmegaPresheaf | None = None):
    """All subpresheaves of p with their classifying maps into Ω.

    Returns (subs, maps) where pullback of `true` along maps[i] equals subs[i];
    that equation is re-checked here for every subobject.
    """
    if omega is None:
        omega = omega_presheaf(p.cat)
    subs = enumerate_subpresheaves(p)
    maps = []
    for q in subs:
        n = classifying_map(p, omega, q)
        # pullback of `true` along n must recover q
        for o in p.cat.objects:
            back = frozenset(x for x in p.at[o] if n(o, x) == omega.true[o])
            if back != q[o]:
                raise NCToposError(f"classifying map does not recover subobject at {o!r}")
        maps.append(n)
    return subs, maps
