"""Lawvere-Tierney and Grothendieck topologies, classical and noncommutative.

Classical topologies live on the sieve classifier Ω; noncommutative ones are
natural idempotent self-maps of a classifier H that fix every top element and
preserve meets inside each top down-set.  NLT1 and NLT3 force j(x) <= t for
every x <= t, so enumeration can proceed down-set by down-set.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Any, Hashable, Mapping

from .fincat import (
    NCToposError,
    OmegaPresheaf,
    canon_key,
    restrict_sieve,
)
from .classif import (
    ClassifierPresheaf,
    NotAClassifier,
    SubHAlgebra,
    sub_h_yoneda,
)
from .ncheyt import quotient_heyting


class AxiomFailure(NCToposError):
    pass


class PreconditionViolated(NCToposError):
    pass


class NotStable(NCToposError):
    pass


@dataclass(frozen=True)
class LawvereTopology:
    """Natural family j(C) : Ω(C) -> Ω(C) satisfying LT1-LT3."""

    omega: OmegaPresheaf
    j: Mapping[str, Mapping[frozenset, frozenset]]

    def key(self):
        return tuple(
            (o, tuple((tuple(sorted(s)), tuple(sorted(self.j[o][s])))
                      for s in self.omega.algebras[o].carrier))
            for o in self.omega.cat.objects
        )


def verify_lawvere(omega: OmegaPresheaf, j: Mapping) -> dict:
    checks: dict[str, Any] = {}
    cat = omega.cat
    bad = next((o for o in cat.objects if j[o][omega.true[o]] != omega.true[o]), None)
    checks["LT1"] = {"ok": bad is None, "witness": bad}
    bad = None
    for o in cat.objects:
        for s in omega.algebras[o].carrier:
            if j[o][j[o][s]] != j[o][s]:
                bad = (o, s)
                break
        if bad:
            break
    checks["LT2"] = {"ok": bad is None, "witness": bad}
    bad = None
    for o in cat.objects:
        for s, r in product(omega.algebras[o].carrier, repeat=2):
            if j[o][s & r] != j[o][s] & j[o][r]:
                bad = (o, s, r)
                break
        if bad:
            break
    checks["LT3"] = {"ok": bad is None, "witness": bad}
    bad = None
    for f in cat.arrows:
        c, d = cat.cod[f], cat.dom[f]
        for s in omega.algebras[c].carrier:
            if restrict_sieve(cat, f, j[c][s]) != j[d][restrict_sieve(cat, f, s)]:
                bad = (f, s)
                break
        if bad:
            break
    checks["natural"] = {"ok": bad is None, "witness": bad}
    checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
    return checks


def _local_lt_maps(omega: OmegaPresheaf, o: str) -> list[dict]:
    """Self-maps of Ω(C) fixing the top, idempotent, and meet-preserving."""
    alg = omega.algebras[o]
    carrier = list(alg.carrier)
    others = [s for s in carrier if s != alg.top]
    out = []
    for values in product(carrier, repeat=len(others)):
        m = dict(zip(others, values))
        m[alg.top] = alg.top
        if any(m[m[s]] != m[s] for s in carrier):
            continue
        if any(m[s & r] != m[s] & m[r] for s, r in product(carrier, repeat=2)):
            continue
        out.append(m)
    return out


def enumerate_lawvere(omega: OmegaPresheaf) -> list[LawvereTopology]:
    """All Lawvere-Tierney topologies on the site, canonical order."""
    cat = omega.cat
    objs = list(cat.objects)
    local = {o: _local_lt_maps(omega, o) for o in objs}
    out = []
    for family in product(*(local[o] for o in objs)):
        j = dict(zip(objs, family))
        if verify_lawvere(omega, j)["ok"]:
            out.append(LawvereTopology(omega, j))
    out.sort(key=lambda lt: canon_key(lt.key()))
    return out


@dataclass(frozen=True)
class GrothendieckTopology:
    omega: OmegaPresheaf
    covers: Mapping[str, frozenset]  # object -> frozenset of sieves

    def key(self):
        return tuple(
            (o, tuple(sorted(tuple(sorted(s)) for s in self.covers[o])))
            for o in self.omega.cat.objects
        )


def verify_grothendieck(omega: OmegaPresheaf, covers: Mapping) -> dict:
    cat = omega.cat
    checks: dict[str, Any] = {}
    bad = next((o for o in cat.objects if omega.true[o] not in covers[o]), None)
    checks["GT1"] = {"ok": bad is None, "witness": bad}
    bad = None
    for o in cat.objects:
        for s in covers[o]:
            for h in cat.arrows_into(o):
                if restrict_sieve(cat, h, s) not in covers[cat.dom[h]]:
                    bad = (o, s, h)
                    break
            if bad:
                break
        if bad:
            break
    checks["GT2"] = {"ok": bad is None, "witness": bad}
    bad = None
    for o in cat.objects:
        for r in omega.algebras[o].carrier:
            if r in covers[o]:
                continue
            for s in covers[o]:
                if all(restrict_sieve(cat, h, r) in covers[cat.dom[h]] for h in s):
                    bad = (o, r, s)
                    break
            if bad:
                break
        if bad:
            break
    checks["GT3"] = {"ok": bad is None, "witness": bad}
    checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
    return checks


def lt_to_gt(lt: LawvereTopology) -> GrothendieckTopology:
    """J(C) = sieves sent to the maximal sieve by j."""
    omega = lt.omega
    covers = {
        o: frozenset(s for s in omega.algebras[o].carrier if lt.j[o][s] == omega.true[o])
        for o in omega.cat.objects
    }
    gt = GrothendieckTopology(omega, covers)
    rep = verify_grothendieck(omega, covers)
    if not rep["ok"]:
        raise AxiomFailure(f"derived Grothendieck topology fails: {rep}")
    return gt


def gt_to_lt(gt: GrothendieckTopology) -> LawvereTopology:
    """j(C)(S) = the arrows along which S restricts to a cover."""
    omega = gt.omega
    cat = omega.cat
    j = {}
    for o in cat.objects:
        j[o] = {
            s: frozenset(
                f for f in cat.arrows_into(o)
                if restrict_sieve(cat, f, s) in gt.covers[cat.dom[f]]
            )
            for s in omega.algebras[o].carrier
        }
    lt = LawvereTopology(omega, j)
    rep = verify_lawvere(omega, j)
    if not rep["ok"]:
        raise AxiomFailure(f"derived Lawvere-Tierney topology fails: {rep}")
    return lt


def grothendieck_correspondence(top) -> dict:
    """Convert between the two presentations and confirm both round-trips."""
    if isinstance(top, LawvereTopology):
        gt = lt_to_gt(top)
        back = gt_to_lt(gt)
        return {"other": gt, "roundtrip_ok": back.j == top.j}
    if isinstance(top, GrothendieckTopology):
        lt = gt_to_lt(top)
        back = lt_to_gt(lt)
        return {"other": lt, "roundtrip_ok": back.covers == top.covers}
    raise NCToposError(f"not a topology: {top!r}")


# ---------------------------------------------------------------------------
# Noncommutative Lawvere topologies


@dataclass(frozen=True)
class NCLawvereTopology:
    hp: ClassifierPresheaf
    j: Mapping[str, Mapping[Hashable, Hashable]]

    def key(self):
        return tuple(
            (o, tuple((x, self.j[o][x]) for x in self.hp.algebra[o].carrier))
            for o in self.hp.cat.objects
        )

    def covered_mask(self):
        """Per-object bit vector marking which non-top elements are sent into
        the top class; the primary canonical ordering key."""
        return tuple(
            tuple(int(self.j[o][x] in self.hp.top_of(o))
                  for x in self.hp.algebra[o].carrier if x not in self.hp.top_of(o))
            for o in self.hp.cat.objects
        )


def verify_nc_lawvere(hp: ClassifierPresheaf, j: Mapping) -> dict:
    checks: dict[str, Any] = {}
    cat = hp.cat
    bad = None
    for o in cat.objects:
        for t in hp.tops[o]:
            if j[o][t] != t:
                bad = (o, t)
                break
        if bad:
            break
    checks["NLT1"] = {"ok": bad is None, "witness": bad}
    bad = None
    for o in cat.objects:
        for x in hp.algebra[o].carrier:
            if j[o][j[o][x]] != j[o][x]:
                bad = (o, x)
                break
        if bad:
            break
    checks["NLT2"] = {"ok": bad is None, "witness": bad}
    bad = None
    for o in cat.objects:
        alg = hp.algebra[o]
        for t in hp.tops[o]:
            down = [x for x in alg.carrier if alg.le(x, t)]
            for x, y in product(down, down):
                if j[o][alg.m(x, y)] != alg.m(j[o][x], j[o][y]):
                    bad = (o, t, x, y)
                    break
            if bad:
                break
        if bad:
            break
    checks["NLT3"] = {"ok": bad is None, "witness": bad}
    bad = None
    for f in cat.arrows:
        c, d = cat.cod[f], cat.dom[f]
        for x in hp.algebra[c].carrier:
            if hp.act[f][j[c][x]] != j[d][hp.act[f][x]]:
                bad = (f, x)
                break
        if bad:
            break
    checks["natural"] = {"ok": bad is None, "witness": bad}
    checks["ok"] = all(v["ok"] for k, v in checks.items() if k != "ok")
    return checks


def _local_downset_maps(alg, down: list) -> list[dict]:
    """Maps d -> d on a top down-set, fixing the top and preserving meets.
    NLT1+NLT3 force the image of x <= t back under t, so this is exhaustive."""
    top = next(x for x in down if all(alg.le(y, x) for y in down))
    others = [x for x in down if x != top]
    out = []
    for values in product(down, repeat=len(others)):
        m = dict(zip(others, values))
        m[top] = top
        if any(m[alg.m(x, y)] != alg.m(m[x], m[y]) for x, y in product(down, down)):
            continue
        out.append(m)
    return out


def _object_candidates(hp: ClassifierPresheaf, o: str, budget: int) -> list[dict]:
    """All candidate maps H(C) -> H(C) consistent with NLT1-NLT3 at one
    object, by gluing per-down-set choices."""
    alg = hp.algebra[o]
    tops = list(hp.tops[o])
    downs = {t: [x for x in alg.carrier if alg.le(x, t)] for t in tops}
    uncovered = [x for x in alg.carrier if not any(x in downs[t] for t in tops)]
    if uncovered:
        return _raw_object_candidates(hp, o, budget)
    locals_per_top = {t: _local_downset_maps(alg, downs[t]) for t in tops}
    out: list[dict] = []

    def glue(i: int, acc: dict) -> None:
        if i == len(tops):
            m = dict(acc)
            if all(m[m[x]] == m[x] for x in m):
                out.append(m)
            return
        t = tops[i]
        for loc in locals_per_top[t]:
            conflict = any(k in acc and acc[k] != v for k, v in loc.items())
            if conflict:
                continue
            merged = dict(acc)
            merged.update(loc)
            glue(i + 1, merged)

    glue(0, {})
    # deduplicate (different gluing orders can repeat a map)
    seen = {}
    for m in out:
        seen[tuple(sorted(m.items(), key=canon_key))] = m
    return list(seen.values())


def _raw_object_candidates(hp: ClassifierPresheaf, o: str, budget: int) -> list[dict]:
    """Fallback for classifiers whose carrier is not a union of top down-sets:
    filter all self-maps (budgeted)."""
    alg = hp.algebra[o]
    carrier = list(alg.carrier)
    free = [x for x in carrier if x not in hp.top_of(o)]
    if len(carrier) ** len(free) > budget:
        raise PreconditionViolated(
            f"carrier of H({o}) is not a union of top down-sets and raw "
            f"search exceeds the budget")
    out = []
    for values in product(carrier, repeat=len(free)):
        m = dict(zip(free, values))
        for t in hp.tops[o]:
            m[t] = t
        if any(m[m[x]] != m[x] for x in carrier):
            continue
        ok = True
        for t in hp.tops[o]:
            down = [x for x in carrier if alg.le(x, t)]
            if any(m[alg.m(x, y)] != alg.m(m[x], m[y]) for x, y in product(down, down)):
                ok = False
                break
        if ok:
            out.append(m)
    return out


def enumerate_nc_lawvere(hp: ClassifierPresheaf, budget: int = 10 ** 6) -> list[NCLawvereTopology]:
    """All noncommutative Lawvere topologies on a classifier, canonical order
    (tiebreak: per-object covered non-top elements)."""
    cat = hp.cat
    objs = list(cat.objects)
    local = {o: _object_candidates(hp, o, budget) for o in objs}
    out = []
    for family in product(*(local[o] for o in objs)):
        j = dict(zip(objs, family))
        natural = all(
            hp.act[f][j[cat.cod[f]][x]] == j[cat.dom[f]][hp.act[f][x]]
            for f in cat.arrows for x in hp.algebra[cat.cod[f]].carrier
        )
        if not natural:
            continue
        rep = verify_nc_lawvere(hp, j)
        if rep["ok"]:
            out.append(NCLawvereTopology(hp, j))
    out.sort(key=lambda t: canon_key((t.covered_mask(), t.key())))
    return out


# ---------------------------------------------------------------------------
# Derived noncommutative Grothendieck topologies and closures


@dataclass(frozen=True)
class NCGrothendieckTopology:
    hp: ClassifierPresheaf
    j: Mapping[str, Mapping]
    covers: Mapping[str, tuple]  # object -> tuple of (sieve, x) pairs


def derive_nc_grothendieck(nclt: NCLawvereTopology) -> NCGrothendieckTopology:
    """J_H(C) = the pairs (S, x) of Sub_H(yC) with j(C)(x) in the top class.
    Always contains (yC, t) for every top t."""
    hp = nclt.hp
    covers = {}
    for o in hp.cat.objects:
        pairs = sub_h_yoneda(o, hp).carrier
        sel = tuple(p for p in pairs if nclt.j[o][p[1]] in hp.top_of(o))
        maximal = frozenset(hp.cat.arrows_into(o))
        for t in hp.tops[o]:
            if (maximal, t) not in sel:
                raise AxiomFailure(f"derived topology misses the top cover ({o!r},{t!r})")
        covers[o] = sel
    return NCGrothendieckTopology(hp, nclt.j, covers)


def closure_on_subh(subh: SubHAlgebra, nclt: NCLawvereTopology) -> dict:
    """The closure (Q,N) -> (Q̄, j∘N) on Sub_H(P); verifies extensivity
    (objectwise Q ⊆ Q̄) and idempotence, and returns the closure map."""
    hp = subh.hp
    if nclt.hp is not hp and nclt.hp.act != hp.act:
        raise NCToposError("topology belongs to a different classifier")
    cat = hp.cat
    closure: dict = {}
    for k in subh.algebra.carrier:
        n = subh.nat[k]
        comp = {o: {x: nclt.j[o][n(o, x)] for x in subh.p.at[o]} for o in cat.objects}
        jk = tuple((o, tuple((x, comp[o][x]) for x in subh.p.at[o])) for o in cat.objects)
        if jk not in subh.nat:
            raise NCToposError("closure left the enumerated Sub_H(P)")
        closure[k] = jk
    extensive = all(
        subh.sub[k][o] <= subh.sub[closure[k]][o]
        for k in subh.algebra.carrier for o in cat.objects
    )
    idempotent = all(closure[closure[k]] == closure[k] for k in subh.algebra.carrier)
    return {"ok": extensive and idempotent, "extensive": extensive,
            "idempotent": idempotent, "closure": closure}


def closure_on_yoneda(c: str, hp: ClassifierPresheaf, nclt: NCLawvereTopology) -> dict:
    """Closed form of the closure on Sub_H(yC): (S,x) -> (S̄, j(C)(x)) with
    S̄ read off from the restrictions of j(C)(x)."""
    cat = hp.cat
    pairs = sub_h_yoneda(c, hp).carrier
    by_x = {x: (s, x) for s, x in pairs}
    closure = {}
    for (s, x) in pairs:
        jx = nclt.j[c][x]
        sbar = frozenset(
            f for f in cat.arrows_into(c)
            if hp.act[f][jx] in hp.top_of(cat.dom[f])
        )
        if by_x[jx][0] != sbar:
            raise NCToposError("closed-form sieve disagrees with Sub_H(yC)")
        closure[(s, x)] = (sbar, jx)
    extensive = all(s <= closure[(s, x)][0] for (s, x) in pairs)
    idempotent = all(closure[closure[p]] == closure[p] for p in pairs)
    return {"ok": extensive and idempotent, "extensive": extensive,
            "idempotent": idempotent, "closure": closure}


def restrict_to_section(nclt: NCLawvereTopology, g: Mapping[str, Hashable],
                        omega: OmegaPresheaf) -> LawvereTopology:
    """Transport j along g(C)↓ ≅ Ω(C) for a global section g of T."""
    hp = nclt.hp
    if hp.omega_iso is None:
        from .classif import classifier_test
        rep = classifier_test(hp, omega)
        if not rep["ok"]:
            raise NotAClassifier(str(rep.get("witness")))
    cat = hp.cat
    j = {}
    for o in cat.objects:
        alg = hp.algebra[o]
        _, proj = quotient_heyting(alg)
        down = [x for x in alg.carrier if alg.le(x, g[o])]
        for x in down:
            if nclt.j[o][x] not in down:
                raise NotStable(f"j leaves {g[o]!r}↓ at {x!r}")
        sieve_of = {x: hp.omega_iso[o][proj[x]] for x in down}
        if len(set(sieve_of.values())) != len(down):
            raise NotAClassifier(f"{g[o]!r}↓ is not a copy of Omega({o})")
        elem_of = {s: x for x, s in sieve_of.items()}
        j[o] = {s: sieve_of[nclt.j[o][elem_of[s]]] for s in omega.algebras[o].carrier}
    lt = LawvereTopology(omega, j)
    rep = verify_lawvere(omega, j)
    if not rep["ok"]:
        raise AxiomFailure(f"restricted topology fails LT axioms: {rep}")
    return lt
