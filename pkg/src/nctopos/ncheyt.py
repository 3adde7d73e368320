"""Noncommutative (complete) Heyting algebras.

An algebra is a strongly distributive skew lattice with bottom, an implication
table and a distinguished element t in the maximum D-class.  The pullback
construction decorates a commutative Heyting algebra h (embedded in a power of
the 2-chain) with nonzero coordinates drawn from a set P, giving a
noncommutative frame whose D-quotient is h.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Mapping

from .fincat import HeytingAlgebra, NCToposError, canon_key, csorted
from .skewlat import (
    EmptyP,
    GreenDecomposition,
    NotACongruence,
    SkewLattice,
    downset,
    green_decomposition,
    verify_skew_lattice,
)


class BadEmbedding(NCToposError):
    pass


@dataclass(frozen=True)
class NCHeytingAlgebra:
    lattice: SkewLattice
    imp: Mapping[tuple, Hashable]
    t: Hashable

    @property
    def carrier(self):
        return self.lattice.carrier

    def m(self, x, y):
        return self.lattice.meet[(x, y)]

    def j(self, x, y):
        return self.lattice.join[(x, y)]

    def i(self, x, y):
        return self.imp[(x, y)]

    def le(self, x, y):
        return self.lattice.le(x, y)

    def green(self) -> GreenDecomposition:
        return green_decomposition(self.lattice)

    def top_class(self) -> frozenset:
        g = self.green()
        if g.top_class is None:
            raise NCToposError("quotient by D has no maximum class")
        return g.top_class


def verify_nc_heyting(h: NCHeytingAlgebra) -> dict:
    """Per-axiom report for NH1-NH5 plus the base-lattice requirements.
    Failures carry a witness tuple."""
    checks: dict[str, Any] = {}
    base = verify_skew_lattice(h.lattice)
    checks["base_skew_lattice"] = {"ok": base["skew_lattice"]["ok"]}
    checks["strongly_distributive"] = base["strongly_distributive"]
    checks["bottom"] = base["bottom"]
    try:
        tc = h.top_class()
        checks["top_class"] = {"ok": h.t in tc,
                               "witness": None if h.t in tc else h.t}
    except (NCToposError, KeyError) as e:
        checks["top_class"] = {"ok": False, "witness": str(e)}
        checks["ok"] = False
        return checks

    cs = h.carrier
    t = h.t

    def law(name, pred, arity):
        for xs in product(cs, repeat=arity):
            if not pred(*xs):
                checks[name] = {"ok": False, "witness": xs}
                return
        checks[name] = {"ok": True}

    law("NH1", lambda x, y: h.i(x, y) == h.i(h.j(h.j(y, h.m(h.m(t, x), t)), y), y), 2)
    law("NH2", lambda x: h.i(x, x) == h.j(h.j(x, t), x), 1)
    law("NH3", lambda x, y: h.m(h.m(x, h.i(x, y)), x) == h.m(h.m(x, y), x), 2)
    law("NH4", lambda x, y: h.m(y, h.i(x, y)) == y and h.m(h.i(x, y), y) == y, 2)
    law("NH5", lambda x, y, z: h.i(x, h.m(h.m(t, h.m(y, z)), t))
        == h.m(h.i(x, h.m(h.m(t, y), t)), h.i(x, h.m(h.m(t, z), t))), 3)
    checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
    return checks


# ---------------------------------------------------------------------------
# Completeness over commuting subsets


def commuting_pairs(h: NCHeytingAlgebra) -> set[tuple]:
    out = set()
    for x, y in product(h.carrier, h.carrier):
        if h.m(x, y) == h.m(y, x) and h.j(x, y) == h.j(y, x):
            out.add((x, y))
    return out


def _least_upper_bound(h: NCHeytingAlgebra, xs: Iterable) -> Hashable | None:
    ub = [u for u in h.carrier if all(h.le(x, u) for x in xs)]
    for u in ub:
        if all(h.le(u, v) for v in ub):
            return u
    return None


def _greatest_lower_bound(h: NCHeytingAlgebra, xs: Iterable) -> Hashable | None:
    lb = [u for u in h.carrier if all(h.le(u, x) for x in xs)]
    for u in lb:
        if all(h.le(v, u) for v in lb):
            return u
    return None


def enumerate_commuting_subsets(h: NCHeytingAlgebra) -> list[tuple]:
    """All nonempty pairwise-commuting subsets, as sorted tuples."""
    pairs = commuting_pairs(h)
    elems = list(h.carrier)
    out: list[tuple] = []

    def extend(current: list, start: int) -> None:
        if current:
            out.append(tuple(current))
        for k in range(start, len(elems)):
            x = elems[k]
            if all((y, x) in pairs for y in current):
                current.append(x)
                extend(current, k + 1)
                current.pop()

    extend([], 0)
    return out


def verify_completeness(h: NCHeytingAlgebra) -> dict:
    """Every commuting subset must have a supremum and infimum, and both
    infinite distributive laws must hold against every element."""
    subsets = enumerate_commuting_subsets(h)
    sup_cache: dict[frozenset, Hashable | None] = {}

    def sup(xs: frozenset):
        if xs not in sup_cache:
            sup_cache[xs] = _least_upper_bound(h, xs)
        return sup_cache[xs]

    for xs in subsets:
        fs = frozenset(xs)
        if sup(fs) is None or _greatest_lower_bound(h, xs) is None:
            return {"ok": False, "witness": ("missing sup/inf", xs),
                    "commuting_subsets": len(subsets)}
    for xs in subsets:
        fs = frozenset(xs)
        s = sup(fs)
        for y in h.carrier:
            sr = sup(frozenset(h.m(x, y) for x in xs))
            sl = sup(frozenset(h.m(y, x) for x in xs))
            if sr is None or h.m(s, y) != sr:
                return {"ok": False, "witness": ("right distributive law", xs, y),
                        "commuting_subsets": len(subsets)}
            if sl is None or h.m(y, s) != sl:
                return {"ok": False, "witness": ("left distributive law", xs, y),
                        "commuting_subsets": len(subsets)}
    return {"ok": True, "commuting_subsets": len(subsets)}


def sup_of_commuting(h: NCHeytingAlgebra, xs: Iterable) -> Hashable:
    s = _least_upper_bound(h, list(xs))
    if s is None:
        raise NCToposError(f"no supremum for {list(xs)!r}")
    return s


# ---------------------------------------------------------------------------
# Structure theorem checks


def downset_heyting(h: NCHeytingAlgebra, top: Hashable) -> HeytingAlgebra:
    """top↓ with the restricted operations, packaged as a Heyting algebra."""
    sub = downset(h.lattice, top)
    elems = sub.carrier
    imp = {}
    for x, y in product(elems, elems):
        v = h.i(x, y)
        if v not in elems:
            raise NCToposError(f"implication leaves {top!r}↓ on ({x!r},{y!r})")
        imp[(x, y)] = v
    if h.lattice.bottom not in elems:
        raise NCToposError(f"bottom missing from {top!r}↓")
    return HeytingAlgebra(elems, sub.meet, sub.join, imp, h.lattice.bottom, top)


def downset_heyting_intrinsic(h: NCHeytingAlgebra, top: Hashable) -> HeytingAlgebra:
    """top↓ with the implication determined by its own lattice structure
    (relative pseudocomplement).  For the distinguished top this coincides
    with the restricted global implication; other top down-sets are not
    closed under the global arrow (0 -> 0 is the distinguished top)."""
    sub = downset(h.lattice, top)
    elems = sub.carrier
    imp = {}
    for x, y in product(elems, elems):
        cands = [z for z in elems if sub.le(sub.meet[(z, x)], y)]
        best = None
        for z in cands:
            if all(sub.le(w, z) for w in cands):
                best = z
                break
        if best is None:
            raise NCToposError(f"no relative pseudocomplement for ({x!r},{y!r}) in {top!r}↓")
        imp[(x, y)] = best
    if h.lattice.bottom not in elems:
        raise NCToposError(f"bottom missing from {top!r}↓")
    return HeytingAlgebra(elems, sub.meet, sub.join, imp, h.lattice.bottom, top)


def quotient_heyting(h: NCHeytingAlgebra) -> tuple[HeytingAlgebra, Mapping]:
    """H/D with the induced operations, including implication."""
    g = h.green()
    if g.top_class is None:
        raise NCToposError("quotient has no maximum class")
    qimp = {}
    for a, b in product(g.classes, g.classes):
        vals = {g.projection[h.i(x, y)] for x in a for y in b}
        if len(vals) != 1:
            raise NotACongruence(f"implication not D-compatible on ({csorted(a)},{csorted(b)})")
        qimp[(a, b)] = next(iter(vals))
    ha = HeytingAlgebra(g.quotient.carrier, g.quotient.meet, g.quotient.join,
                        qimp, g.projection[h.lattice.bottom], g.top_class)
    return ha, g.projection


def _is_heyting_iso(a: HeytingAlgebra, b: HeytingAlgebra, f: Mapping) -> bool:
    if sorted(map(canon_key, f.values())) != sorted(map(canon_key, b.carrier)):
        return False
    if f[a.bottom] != b.bottom or f[a.top] != b.top:
        return False
    for x, y in product(a.carrier, a.carrier):
        if (f[a.meet[(x, y)]] != b.meet[(f[x], f[y])]
                or f[a.join[(x, y)]] != b.join[(f[x], f[y])]
                or f[a.imp[(x, y)]] != b.imp[(f[x], f[y])]):
            return False
    return True


def structure_checks(h: NCHeytingAlgebra) -> dict:
    """The two items of the structure theorem: t↓ is a Heyting algebra
    isomorphic to H/D, and conjugation by any top element t' is a Heyting
    isomorphism t↓ -> t'↓ staying inside D-classes."""
    checks: dict[str, Any] = {}
    t = h.t
    td = downset_heyting(h, t)
    rep = td.verify()
    checks["t_down_heyting"] = {"ok": rep["ok"],
                                "detail": {k: v for k, v in rep.items()
                                           if k != "ok" and not v["ok"]}}
    quo, proj = quotient_heyting(h)
    iso = {x: proj[x] for x in td.carrier}
    checks["t_down_iso_quotient"] = {"ok": _is_heyting_iso(td, quo, iso)}
    # the restricted global arrow on t↓ must agree with the intrinsic one
    td_int = downset_heyting_intrinsic(h, t)
    checks["t_down_imp_intrinsic"] = {"ok": td.imp == td_int.imp}
    tops = csorted(h.top_class())
    conj_ok, witness = True, None
    for tp in tops:
        try:
            tpd = downset_heyting_intrinsic(h, tp)
        except NCToposError as e:
            conj_ok, witness = False, (tp, str(e))
            break
        phi = {x: h.m(h.m(tp, x), tp) for x in td.carrier}
        if not _is_heyting_iso(td_int, tpd, phi):
            conj_ok, witness = False, (tp, "not an isomorphism")
            break
        if any(not h.lattice.d_related(x, phi[x]) for x in td.carrier):
            conj_ok, witness = False, (tp, "conjugate leaves the D-class")
            break
    checks["conjugation_isos"] = {"ok": conj_ok, "witness": witness}
    checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
    return checks


# ---------------------------------------------------------------------------
# Pullback construction


@dataclass(frozen=True)
class IndexScheme:
    """An embedding of a Heyting algebra into a power of the 2-chain:
    an index list I and a support map u -> subset of I."""

    index: tuple[Hashable, ...]
    supp: Mapping[Hashable, frozenset]


def join_irreducible_scheme(h: HeytingAlgebra) -> IndexScheme:
    """Index by join-irreducibles, u -> {j irreducible : j <= u}."""
    irr = tuple(csorted(h.join_irreducibles()))
    supp = {u: frozenset(j for j in irr if h.le(j, u)) for u in h.carrier}
    return IndexScheme(irr, supp)


def sieve_scheme(h: HeytingAlgebra) -> IndexScheme:
    """Characteristic-function embedding for sieve algebras: the index set is
    the full hom fiber and supp is the sieve itself."""
    return IndexScheme(tuple(sorted(h.top)), {u: u for u in h.carrier})


def _check_embedding(h: HeytingAlgebra, scheme: IndexScheme) -> None:
    supp = scheme.supp
    seen = {}
    for u in h.carrier:
        if not supp[u] <= frozenset(scheme.index):
            raise BadEmbedding(f"support of {u!r} leaves the index set")
        if supp[u] in seen:
            raise BadEmbedding(f"embedding not injective: {u!r}, {seen[supp[u]]!r}")
        seen[supp[u]] = u
    for u, v in product(h.carrier, h.carrier):
        if supp[h.meet[(u, v)]] != supp[u] & supp[v]:
            raise BadEmbedding(f"meet not preserved on ({u!r},{v!r})")
        if supp[h.join[(u, v)]] != supp[u] | supp[v]:
            raise BadEmbedding(f"join not preserved on ({u!r},{v!r})")
    if supp[h.bottom]:
        raise BadEmbedding("bottom has nonempty support")


def pullback_construct(
    h: HeytingAlgebra,
    p: Iterable[Hashable],
    scheme: IndexScheme | None = None,
    d: Mapping[Hashable, Hashable] | Hashable | None = None,
) -> NCHeytingAlgebra:
    """Decorate h with P-coordinates.

    Carrier: pairs (u, coords) with coords over the index list, nonzero (non
    None) exactly on supp(u).  Meet is left-biased and join right-biased on
    coordinates; implication takes the target's coordinates where defined and
    the distinguished decoration d on the rest of the shadow implication.
    """
    p = tuple(csorted(set(p)))
    if not p:
        raise EmptyP("P must be nonempty")
    if scheme is None:
        scheme = join_irreducible_scheme(h)
    _check_embedding(h, scheme)
    idx = scheme.index
    pos = {i: k for k, i in enumerate(idx)}
    supp = scheme.supp
    if d is None:
        d = p[0]
    if not isinstance(d, Mapping):
        d = {i: d for i in idx}
    for i in idx:
        if d[i] not in p:
            raise NCToposError(f"distinguished decoration at {i!r} is not in P")

    def elements_over(u):
        s = sorted(supp[u], key=canon_key)
        for values in product(p, repeat=len(s)):
            coords = [None] * len(idx)
            for i, v in zip(s, values):
                coords[pos[i]] = v
            yield (u, tuple(coords))

    carrier = []
    for u in csorted(h.carrier):
        carrier.extend(elements_over(u))
    carrier = tuple(sorted(carrier, key=canon_key))

    def pick(su, x, y, bias_left):
        # coordinatewise flat-skew-lattice operation restricted to support su
        out = []
        for k, i in enumerate(idx):
            if i not in su:
                out.append(None)
            elif x[k] is not None and y[k] is not None:
                out.append(x[k] if bias_left else y[k])
            elif x[k] is not None:
                out.append(x[k])
            else:
                out.append(y[k])
        return tuple(out)

    meet, join, imp = {}, {}, {}
    for (u, x), (v, y) in product(carrier, carrier):
        wm = h.meet[(u, v)]
        meet[((u, x), (v, y))] = (wm, pick(supp[wm], x, y, bias_left=True))
        wj = h.join[(u, v)]
        join[((u, x), (v, y))] = (wj, pick(supp[wj], x, y, bias_left=False))
        wi = h.imp[(u, v)]
        coords = []
        for k, i in enumerate(idx):
            if i in supp[v]:
                coords.append(y[k])
            elif i in supp[wi]:
                coords.append(d[i])
            else:
                coords.append(None)
        imp[((u, x), (v, y))] = (wi, tuple(coords))
    bottom = (h.bottom, tuple(None for _ in idx))
    lattice = SkewLattice(carrier, meet, join, bottom)
    tcoords = tuple(d[i] if i in supp[h.top] else None for i in idx)
    return NCHeytingAlgebra(lattice, imp, (h.top, tcoords))


def shadow(element) -> Hashable:
    """The commutative shadow of a pullback-algebra element."""
    return element[0]


def top_elements(h: NCHeytingAlgebra) -> list:
    return csorted(h.top_class())


# ---------------------------------------------------------------------------
# Fusing top elements


def fuse_tops(h: NCHeytingAlgebra, blocks: Iterable[frozenset]) -> tuple[NCHeytingAlgebra, dict]:
    """Quotient by an equivalence on the top class (identity elsewhere).

    The relation must be a congruence for meet, join and implication; this is
    checked exhaustively and NotACongruence carries a witness.  Returns the
    quotient (carrier = canonical block representatives) and the projection.
    """
    tops = h.top_class()
    blocks = [frozenset(b) for b in blocks]
    covered = frozenset().union(*blocks) if blocks else frozenset()
    if not covered <= tops:
        raise NCToposError("fuse blocks must lie inside the top class")
    for a, b in product(blocks, blocks):
        if a is not b and a & b:
            raise NCToposError("fuse blocks overlap")
    allblocks = blocks + [frozenset([x]) for x in h.carrier if x not in covered]
    cls = {x: b for b in allblocks for x in b}

    ops = {"meet": h.lattice.meet, "join": h.lattice.join, "imp": h.imp}
    for name, table in ops.items():
        for b in blocks:
            xs = csorted(b)
            x0 = xs[0]
            for x in xs[1:]:
                for z in h.carrier:
                    if cls[table[(x0, z)]] != cls[table[(x, z)]]:
                        raise NotACongruence((name, x0, x, z))
                    if cls[table[(z, x0)]] != cls[table[(z, x)]]:
                        raise NotACongruence((name, z, x0, x))

    rep = {x: min(cls[x], key=canon_key) for x in h.carrier}
    carrier = tuple(sorted({rep[x] for x in h.carrier}, key=canon_key))
    meet = {(a, b): rep[h.m(a, b)] for a, b in product(carrier, carrier)}
    join = {(a, b): rep[h.j(a, b)] for a, b in product(carrier, carrier)}
    imp = {(a, b): rep[h.i(a, b)] for a, b in product(carrier, carrier)}
    lattice = SkewLattice(carrier, meet, join, rep[h.lattice.bottom])
    return NCHeytingAlgebra(lattice, imp, rep[h.t]), rep


def coordinate_fuse_blocks(h: NCHeytingAlgebra, keep: Callable[[Hashable], bool]) -> list[frozenset]:
    """Blocks of tops that agree on the coordinates selected by `keep`
    (a predicate on index values).  Elements must be pullback pairs."""
    tops = top_elements(h)
    groups: dict = {}
    for t in tops:
        u, coords = t
        # the index list is not stored on the element; group by the filtered
        # coordinate vector, positions aligned across all tops of the class
        key = tuple(c for k, c in enumerate(coords) if keep(k))
        groups.setdefault(key, []).append(t)
    return [frozenset(g) for g in groups.values()]
