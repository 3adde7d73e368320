"""Table-driven finite skew lattices.

Axiom checks are exhaustive O(n^3) loops over the operation tables; the target
algebras stay well under a hundred elements so nothing cleverer is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Any, Hashable, Mapping

from .fincat import NCToposError, canon_key, csorted


class EmptyP(NCToposError):
    pass


class NotACongruence(NCToposError):
    pass


@dataclass(frozen=True)
class SkewLattice:
    carrier: tuple[Hashable, ...]
    meet: Mapping[tuple, Hashable]
    join: Mapping[tuple, Hashable]
    bottom: Hashable | None = None

    def le(self, x, y) -> bool:
        """Natural partial order: x <= y iff x∧y = x = y∧x."""
        return self.meet[(x, y)] == x and self.meet[(y, x)] == x

    def d_related(self, x, y) -> bool:
        m = self.meet
        return m[(m[(x, y)], x)] == x and m[(m[(y, x)], y)] == y

    def is_commutative(self) -> bool:
        return all(
            self.meet[(x, y)] == self.meet[(y, x)] and self.join[(x, y)] == self.join[(y, x)]
            for x, y in product(self.carrier, self.carrier)
        )


def make_skew_lattice(carrier, meet, join, bottom=None) -> SkewLattice:
    carrier = tuple(csorted(carrier))
    return SkewLattice(carrier, dict(meet), dict(join), bottom)


def verify_skew_lattice(lat: SkewLattice) -> dict:
    """Report which identities hold: skew-lattice axioms, strong
    distributivity (both identities), and the bottom laws if a bottom is set."""
    cs = lat.carrier
    m, j = lat.meet, lat.join
    checks: dict[str, Any] = {}

    def law(name, pred, arity):
        for xs in product(cs, repeat=arity):
            if not pred(*xs):
                checks[name] = {"ok": False, "witness": xs}
                return
        checks[name] = {"ok": True}

    law("meet_idempotent", lambda x: m[(x, x)] == x, 1)
    law("join_idempotent", lambda x: j[(x, x)] == x, 1)
    law("meet_associative", lambda x, y, z: m[(m[(x, y)], z)] == m[(x, m[(y, z)])], 3)
    law("join_associative", lambda x, y, z: j[(j[(x, y)], z)] == j[(x, j[(y, z)])], 3)
    law("absorption_left", lambda x, y: m[(x, j[(x, y)])] == x and j[(x, m[(x, y)])] == x, 2)
    law("absorption_right", lambda x, y: j[(m[(x, y)], y)] == y and m[(j[(x, y)], y)] == y, 2)
    law("strong_dist_right", lambda x, y, z: m[(j[(x, y)], z)] == j[(m[(x, z)], m[(y, z)])], 3)
    law("strong_dist_left", lambda x, y, z: m[(x, j[(y, z)])] == j[(m[(x, y)], m[(x, z)])], 3)
    if lat.bottom is not None:
        b = lat.bottom
        law("bottom", lambda x: j[(b, x)] == x and j[(x, b)] == x
            and m[(b, x)] == b and m[(x, b)] == b, 1)
    else:
        checks["bottom"] = {"ok": False, "witness": "no bottom designated"}
    axioms = ["meet_idempotent", "join_idempotent", "meet_associative",
              "join_associative", "absorption_left", "absorption_right"]
    checks["skew_lattice"] = {"ok": all(checks[a]["ok"] for a in axioms)}
    checks["strongly_distributive"] = {
        "ok": checks["strong_dist_right"]["ok"] and checks["strong_dist_left"]["ok"]
    }
    checks["ok"] = checks["skew_lattice"]["ok"]
    return checks


@dataclass(frozen=True)
class GreenDecomposition:
    classes: tuple[frozenset, ...]
    projection: Mapping[Hashable, frozenset]
    quotient: SkewLattice
    top_class: frozenset | None

    def order_pairs(self) -> list[tuple[frozenset, frozenset]]:
        q = self.quotient
        return [(a, b) for a in q.carrier for b in q.carrier if q.le(a, b)]


def green_decomposition(lat: SkewLattice) -> GreenDecomposition:
    """Partition by Green's relation D and form the quotient lattice.

    Raises NotACongruence when the induced operations depend on the chosen
    representatives (which signals a defective input table)."""
    cs = lat.carrier
    classes: list[set] = []
    for x in cs:
        for cl in classes:
            if lat.d_related(x, next(iter(cl))):
                cl.add(x)
                break
        else:
            classes.append({x})
    # D must be transitive on a skew lattice; confirm the blocks are genuine
    for cl in classes:
        for x, y in product(cl, cl):
            if not lat.d_related(x, y):
                raise NotACongruence(f"D is not transitive: {x!r}, {y!r}")
    blocks = tuple(sorted((frozenset(c) for c in classes), key=canon_key))
    proj = {x: b for b in blocks for x in b}
    qmeet, qjoin = {}, {}
    for a, b in product(blocks, blocks):
        vals_m = {proj[lat.meet[(x, y)]] for x in a for y in b}
        vals_j = {proj[lat.join[(x, y)]] for x in a for y in b}
        if len(vals_m) != 1 or len(vals_j) != 1:
            raise NotACongruence(f"induced operation not well defined on ({csorted(a)}, {csorted(b)})")
        qmeet[(a, b)] = next(iter(vals_m))
        qjoin[(a, b)] = next(iter(vals_j))
    qbottom = proj[lat.bottom] if lat.bottom is not None else None
    quotient = SkewLattice(blocks, qmeet, qjoin, qbottom)
    if not quotient.is_commutative():
        raise NotACongruence("quotient by D is not commutative")
    tops = [b for b in blocks if all(quotient.le(a, b) for a in blocks)]
    return GreenDecomposition(blocks, proj, quotient, tops[0] if tops else None)


def natural_order_pairs(lat: SkewLattice) -> list[tuple[Hashable, Hashable]]:
    return [(x, y) for x in lat.carrier for y in lat.carrier if lat.le(x, y)]


def downset(lat: SkewLattice, x: Hashable) -> SkewLattice:
    """x↓ = {y : y <= x} with the restricted operations.

    On a strongly distributive skew lattice this is a commutative distributive
    sublattice (Leech); callers check that via verify_downset."""
    elems = tuple(y for y in lat.carrier if lat.le(y, x))
    meet = {(a, b): lat.meet[(a, b)] for a, b in product(elems, elems)}
    join = {(a, b): lat.join[(a, b)] for a, b in product(elems, elems)}
    for (a, b), v in list(meet.items()) + list(join.items()):
        if v not in elems:
            raise NCToposError(f"downset of {x!r} not closed at ({a!r},{b!r})")
    bot = lat.bottom if lat.bottom in elems else None
    return SkewLattice(elems, meet, join, bot)


def verify_downset(lat: SkewLattice, x: Hashable) -> dict:
    """Check that x↓ is a commutative distributive lattice."""
    sub = downset(lat, x)
    m, j = sub.meet, sub.join
    checks: dict[str, Any] = {"size": len(sub.carrier)}
    comm = all(m[(a, b)] == m[(b, a)] and j[(a, b)] == j[(b, a)]
               for a, b in product(sub.carrier, sub.carrier))
    dist = all(m[(a, j[(b, c)])] == j[(m[(a, b)], m[(a, c)])]
               for a, b, c in product(sub.carrier, repeat=3))
    checks["commutative"] = {"ok": comm}
    checks["distributive"] = {"ok": dist}
    checks["ok"] = comm and dist
    return checks


def phat_construct(p) -> SkewLattice:
    """The flat skew lattice on {0} ∪ P: meet is left projection, join is
    right projection on P, with 0 absorbing for meet and neutral for join."""
    p = list(csorted(set(p)))
    if not p:
        raise EmptyP("P must be nonempty")
    if "0" in p:
        raise NCToposError('"0" is reserved for the bottom element')
    bot = "0"
    carrier = [bot] + p
    meet, join = {}, {}
    for x, y in product(carrier, carrier):
        if x == bot or y == bot:
            meet[(x, y)] = bot
            join[(x, y)] = y if x == bot else x
        else:
            meet[(x, y)] = x
            join[(x, y)] = y
    return SkewLattice(tuple(carrier), meet, join, bot)


def enumerate_morphisms(src: SkewLattice, dst: SkewLattice, cap: int = 6) -> list[dict]:
    """All skew-lattice morphisms src -> dst (preserving ∧, ∨, and bottom if
    both are bounded), found by backtracking. |dst| is capped to keep the
    quotient universal-property test fast."""
    if len(dst.carrier) > cap:
        raise NCToposError(f"target size {len(dst.carrier)} exceeds cap {cap}")
    xs = list(src.carrier)
    out: list[dict] = []
    assign: dict = {}

    def consistent(x) -> bool:
        for y in assign:
            for (a, b) in ((x, y), (y, x)):
                mv = src.meet[(a, b)]
                jv = src.join[(a, b)]
                if mv in assign and assign[mv] != dst.meet[(assign[a], assign[b])]:
                    return False
                if jv in assign and assign[jv] != dst.join[(assign[a], assign[b])]:
                    return False
        return True

    def backtrack(i: int) -> None:
        if i == len(xs):
            out.append(dict(assign))
            return
        x = xs[i]
        if x in assign:
            backtrack(i + 1)
            return
        choices = dst.carrier
        if src.bottom is not None and dst.bottom is not None and x == src.bottom:
            choices = (dst.bottom,)
        for v in choices:
            assign[x] = v
            if consistent(x):
                backtrack(i + 1)
            del assign[x]

    backtrack(0)
    # keep only full morphisms (consistency above is incremental)
    full = []
    for h in out:
        ok = all(
            h[src.meet[(a, b)]] == dst.meet[(h[a], h[b])]
            and h[src.join[(a, b)]] == dst.join[(h[a], h[b])]
            for a, b in product(xs, xs)
        )
        if ok:
            full.append(h)
    return full


def product_skew(a: SkewLattice, b: SkewLattice) -> SkewLattice:
    """Direct product, used to grow test corpora of skew lattices."""
    carrier = tuple((x, y) for x in a.carrier for y in b.carrier)
    meet = {((x1, y1), (x2, y2)): (a.meet[(x1, x2)], b.meet[(y1, y2)])
            for (x1, y1) in carrier for (x2, y2) in carrier}
    join = {((x1, y1), (x2, y2)): (a.join[(x1, x2)], b.join[(y1, y2)])
            for (x1, y1) in carrier for (x2, y2) in carrier}
    bottom = (a.bottom, b.bottom) if a.bottom is not None or b.bottom is not None else None
    if a.bottom is None or b.bottom is None:
        bottom = None
    return SkewLattice(carrier, meet, join, bottom)
