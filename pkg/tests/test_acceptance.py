"""End-to-end acceptance suite.

Each test checks one headline result on the digraph demo (or a randomized
batch) and prints a single PASS/FAIL line with its runtime against a fixed
budget.  Expensive enumerations are shared through module-scoped fixtures.
"""

import random
import time
from itertools import product

import pytest

from nctopos.fincat import (
    enumerate_sieves,
    make_presheaf,
    omega_presheaf,
    yoneda_presheaf,
)
from nctopos.skewlat import (
    green_decomposition,
    phat_construct,
    product_skew,
    verify_downset,
    verify_skew_lattice,
)
from nctopos.ncheyt import (
    pullback_construct,
    structure_checks,
    verify_completeness,
    verify_nc_heyting,
)
from nctopos.classif import (
    build_classifier,
    classifier_test,
    fuse_classifier,
    global_sections_T,
    sub_h,
    sub_h_yoneda,
)
from nctopos.topol import (
    closure_on_yoneda,
    derive_nc_grothendieck,
    enumerate_lawvere,
    enumerate_nc_lawvere,
    grothendieck_correspondence,
    gt_to_lt,
    lt_to_gt,
    restrict_to_section,
)
from nctopos.sheaf import (
    check_sheaf,
    enumerate_slice_presheaves,
    slice_morphisms,
    terminal_search,
)
from nctopos.digraph import (
    demo_classifier,
    digraph_site,
    enumerate_multigraphs,
    is_complete_colored,
    is_complete_digraph,
    labels,
    multigraph_presheaf,
    nclt_name,
    standard_topologies,
    top_slice_presheaf,
)

from test_properties import idempotent_monoid_category, random_poset_category

BOUNDS = {"V": 3, "E": 3}


def report(num, desc, ok, elapsed, limit):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    print(f"{status} criterion {num}: {desc} [{elapsed:.2f}s / {limit:.0f}s]")
    assert ok, f"criterion {num} failed: {desc}"
    assert elapsed < limit, f"criterion {num} over time budget: {elapsed:.2f}s"


@pytest.fixture(scope="module")
def slice_candidates(hp):
    """Colored digraphs within BOUNDS up to slice isomorphism, shared by the
    sheaf-census and terminal-search criteria."""
    return enumerate_slice_presheaves(hp, BOUNDS)


def test_criterion_1_omega_reproduction(site):
    start = time.perf_counter()
    at_v = enumerate_sieves(site, "V")
    at_e = enumerate_sieves(site, "E")
    ok = len(at_v) == 2 and len(at_e) == 5
    zero, s, t, u, one = (frozenset(), frozenset({"s"}), frozenset({"t"}),
                          frozenset({"s", "t"}), frozenset({"id_E", "s", "t"}))
    ok = ok and set(at_e) == {zero, s, t, u, one}
    # cover relations of the 5-element sieve lattice: 0<S<U<1, 0<T<U<1
    covers = set()
    for a, b in product(at_e, at_e):
        if a < b and not any(a < c < b for c in at_e):
            covers.add((a, b))
    ok = ok and covers == {(zero, s), (zero, t), (s, u), (t, u), (u, one)}
    ok = ok and set(at_v) == {frozenset(), frozenset({"id_V"})}
    report(1, "5 sieves at E, 2 at V, diamond-over-chain Hasse diagram",
           ok, time.perf_counter() - start, 1.0)


def test_criterion_2_classical_topology_census(site, omega):
    start = time.perf_counter()
    lts = enumerate_lawvere(omega)
    std = standard_topologies(omega)
    ok = len(lts) == 4
    images = sorted(sorted(lt_to_gt(lt).covers.items()) for lt in lts)
    tables = sorted(sorted(gt.covers.items()) for gt in std.values())
    ok = ok and images == tables
    ok = ok and all(grothendieck_correspondence(lt)["roundtrip_ok"] for lt in lts)
    report(2, "exactly 4 topologies, matching the J1-J4 cover tables",
           ok, time.perf_counter() - start, 1.0)


def test_criterion_3_j2_sheaf_characterization(site, omega):
    start = time.perf_counter()
    j2 = standard_topologies(omega)["J2"]
    graphs = enumerate_multigraphs(3, 9)
    ok = len(graphs) > 0
    for n, matrix in graphs:
        f = multigraph_presheaf(site, n, matrix)
        if check_sheaf(f, j2)["ok"] != is_complete_digraph(n, matrix):
            ok = False
            break
    report(3, f"sheaf(J2) <=> complete, all {len(graphs)} digraphs "
              "with <=3 vertices, <=9 edges up to iso",
           ok, time.perf_counter() - start, 30.0)


def test_criterion_4_classifier_construction(omega):
    start = time.perf_counter()
    raw = demo_classifier(fuse="none")
    fused = demo_classifier(fuse="coordinate")
    ok = (len(raw.algebra["E"].carrier) == 17 and len(raw.tops["E"]) == 8
          and len(fused.algebra["E"].carrier) == 13 and len(fused.tops["E"]) == 4)
    # exact cover relations of the fused algebra at E
    lab = labels(fused)["E"]
    alg = fused.algebra["E"]
    xs = list(alg.carrier)
    covers = {(lab[x], lab[y]) for x in xs for y in xs
              if x != y and alg.le(x, y)
              and not any(z not in (x, y) and alg.le(x, z) and alg.le(z, y)
                          for z in xs)}
    expected = {("0", "S_a"), ("0", "S_b"), ("0", "T_a"), ("0", "T_b")}
    for c in "ab":
        for d in "ab":
            expected |= {(f"S_{c}", f"U_{c}{d}"), (f"T_{d}", f"U_{c}{d}"),
                         (f"U_{c}{d}", f"1_{c}{d}")}
    ok = ok and covers == expected
    for hp in (raw, fused):
        for o in hp.cat.objects:
            a = hp.algebra[o]
            ok = ok and verify_nc_heyting(a)["ok"]
            ok = ok and verify_completeness(a)["ok"]
            ok = ok and structure_checks(a)["ok"]
        ok = ok and classifier_test(hp, omega)["ok"]
    report(4, "classifier 17/8 tops raw, 13/4 fused with exact Hasse "
              "diagram; axioms, completeness, structure, H/D = Omega",
           ok, time.perf_counter() - start, 5.0)


def test_criterion_5_nc_topology_census(hp, omega):
    start = time.perf_counter()
    nclts = enumerate_nc_lawvere(hp)
    ok = len(nclts) == 16
    lab = labels(hp)
    names = [nclt_name(hp, t) for t in nclts]
    ok = ok and sorted(names) == sorted(f"nclt:{i:04b}" for i in range(16))
    # every topology is "tops union S" for S a subset of the four U elements:
    # j fixes everything except U_cd, which goes to U_cd or 1_cd
    for t in nclts:
        for o in hp.cat.objects:
            for x in hp.algebra[o].carrier:
                name = lab[o][x]
                if o == "E" and name.startswith("U_"):
                    ok = ok and lab["E"][t.j[o][x]] in (name, "1_" + name[2:])
                else:
                    ok = ok and t.j[o][x] == x
    # restriction to each global section is J2's j when that U is covered,
    # J1's otherwise
    std = standard_topologies(omega)
    j_of = {k: gt_to_lt(std[k]).j for k in ("J1", "J2")}
    for t in nclts:
        mask = nclt_name(hp, t)[5:]
        covered = dict(zip(("aa", "ab", "ba", "bb"), mask))
        for g in global_sections_T(hp):
            lt = restrict_to_section(t, g, omega)
            want = "J2" if covered[lab["E"][g["E"]][2:]] == "1" else "J1"
            ok = ok and lt.j == j_of[want]
    report(5, "16 topologies (tops plus a subset of the U's); restrictions "
              "at the 4 sections give J1/J2 by membership",
           ok, time.perf_counter() - start, 10.0)


def test_criterion_6_sheaf_census(hp, nclts, slice_candidates):
    start = time.perf_counter()
    complete = [is_complete_colored(sp) for sp in slice_candidates]
    t_sp = top_slice_presheaf(hp)
    ok = True
    for t in nclts:
        trivial = nclt_name(hp, t) == "nclt:0000"
        ncgt = derive_nc_grothendieck(t)
        for sp, comp in zip(slice_candidates, complete):
            want = True if trivial else comp
            if check_sheaf(sp, ncgt)["ok"] != want:
                ok = False
                break
        ok = ok and check_sheaf(t_sp, ncgt)["ok"] == trivial
        if not ok:
            break
    report(6, f"on {len(slice_candidates)} colored digraphs within bounds: "
              "sheaves = complete graphs (nontrivial topologies), everything "
              "(trivial); four-loop T rejected when nontrivial",
           ok, time.perf_counter() - start, 60.0)


def test_criterion_7_no_terminal_object(hp, nclts, slice_candidates):
    start = time.perf_counter()
    # the previous criterion pins the sheaves down to the complete graphs,
    # so the terminal search only needs those candidates
    candidates = [sp for sp in slice_candidates if is_complete_colored(sp)]
    ok = True
    for t in nclts:
        if nclt_name(hp, t) == "nclt:0000":
            continue
        res = terminal_search(derive_nc_grothendieck(t), BOUNDS,
                              candidates=candidates)
        ok = ok and res.status == "no_terminal" and res.certificate is not None
        if not ok:
            break
        a, b = res.certificate
        for sp in (a, b):
            ok = ok and len(sp.f.at["V"]) == 1 and len(sp.f.at["E"]) == 1
            ok = ok and is_complete_colored(sp)
        ok = ok and a.pi["E"][a.f.at["E"][0]] != b.pi["E"][b.f.at["E"][0]]
        ok = ok and not slice_morphisms(a, b) and not slice_morphisms(b, a)
        if not ok:
            break
    report(7, "every nontrivial topology: no terminal sheaf, certified by "
              "two one-loop graphs of different colors",
           ok, time.perf_counter() - start, 10.0)


# ---------------------------------------------------------------------------
# Criterion 8: randomized property batch


def _random_presheaf_with_section(site, rng):
    """A presheaf on the digraph site that admits a global section."""
    pv = [f"x{i}" for i in range(rng.randint(1, 2))]
    pe = [f"e{i}" for i in range(rng.randint(1, 2))]
    act = {"s": {e: rng.choice(pv) for e in pe},
           "t": {e: rng.choice(pv) for e in pe}}
    act["t"][pe[0]] = act["s"][pe[0]]  # guarantee at least one loop
    p = make_presheaf(site, {"V": pv, "E": pe}, act)
    return p, {"V": act["s"][pe[0]], "E": pe[0]}


def _check_category_instance(cat):
    omega = omega_presheaf(cat)
    for lt in enumerate_lawvere(omega):
        if not grothendieck_correspondence(lt)["roundtrip_ok"]:
            return False
        if not grothendieck_correspondence(lt_to_gt(lt))["roundtrip_ok"]:
            return False
    return True


def _check_lattice_instance(lat):
    g = green_decomposition(lat)  # raises if D is not a congruence
    if not g.quotient.is_commutative():
        return False
    rep = verify_skew_lattice(g.quotient)
    if not (rep["skew_lattice"]["ok"] and rep["strongly_distributive"]["ok"]):
        return False
    return all(verify_downset(lat, x)["ok"] for x in lat.carrier)


def _check_classifier_instance(site, rng):
    p, d = _random_presheaf_with_section(site, rng)
    hp = fuse_classifier(build_classifier(site, p, d))
    if not classifier_test(hp)["ok"]:
        return False
    # closure operators of every topology are extensive and idempotent
    for t in enumerate_nc_lawvere(hp):
        for o in site.objects:
            if not closure_on_yoneda(o, hp, t)["ok"]:
                return False
    # enumerated Sub_H(yC) matches the closed form
    for c in site.objects:
        subh = sub_h(yoneda_presheaf(site, c), hp)
        closed = sub_h_yoneda(c, hp)
        from_enum = sorted(
            tuple(sorted(subh.sub[k][o]) for o in site.objects)
            for k in subh.algebra.carrier)
        from_closed = sorted(
            tuple(sorted(f for f in s if site.dom[f] == o)
                  for o in site.objects)
            for (s, x) in closed.carrier)
        if from_enum != from_closed:
            return False
    return True


def test_criterion_8_randomized_properties(site):
    start = time.perf_counter()
    rng = random.Random(20260823)
    violations = 0
    total = 0

    for i in range(85):  # categories, <=3 objects (posets are composite-free)
        total += 1
        cat = idempotent_monoid_category() if i % 17 == 0 \
            else random_poset_category(rng, max_objects=3)
        if not _check_category_instance(cat):
            violations += 1

    for i in range(85):  # skew lattices, <=12 elements
        total += 1
        kind = i % 3
        if kind == 0:
            lat = phat_construct([f"a{k}" for k in range(rng.randint(1, 11))])
        elif kind == 1:
            p = [f"a{k}" for k in range(rng.randint(1, 2))]
            q = [f"b{k}" for k in range(rng.randint(1, 2))]
            lat = product_skew(phat_construct(p), phat_construct(q))
        else:
            cat = random_poset_category(rng, max_objects=2)
            from nctopos.fincat import omega_algebra
            h = omega_algebra(cat, rng.choice(cat.objects))
            decorations = ["a", "b"][:rng.randint(1, 2)]
            lat = pullback_construct(h, decorations).lattice
        assert len(lat.carrier) <= 12
        if not _check_lattice_instance(lat):
            violations += 1

    for _ in range(30):  # classifiers over random presheaves on the site
        total += 1
        if not _check_classifier_instance(site, rng):
            violations += 1

    ok = total == 200 and violations == 0
    report(8, f"200 randomized instances, {violations} violations "
              "(round-trips, congruence, distributivity, closures, Sub_H)",
           ok, time.perf_counter() - start, 120.0)
