"""Property-based checks on the algebraic core (hypothesis) plus helpers
shared with the randomized acceptance suite."""

import random
from itertools import product

from hypothesis import given, settings, strategies as st

from nctopos.fincat import (
    canon_key,
    csorted,
    enumerate_sieves,
    is_sieve,
    omega_algebra,
    omega_presheaf,
    restrict_sieve,
    validate_category,
)
from nctopos.skewlat import (
    downset,
    green_decomposition,
    phat_construct,
    product_skew,
    verify_downset,
    verify_skew_lattice,
)
from nctopos.ncheyt import pullback_construct, verify_nc_heyting

names = st.text(alphabet="abcdexyz", min_size=1, max_size=3)


@st.composite
def nonempty_name_lists(draw):
    return draw(st.lists(names, min_size=1, max_size=5, unique=True))


@settings(max_examples=60, deadline=None)
@given(nonempty_name_lists())
def test_phat_always_skew_and_strongly_distributive(p):
    lat = phat_construct(p)
    rep = verify_skew_lattice(lat)
    assert rep["skew_lattice"]["ok"]
    assert rep["strongly_distributive"]["ok"]
    assert rep["bottom"]["ok"]


@settings(max_examples=40, deadline=None)
@given(nonempty_name_lists(), nonempty_name_lists())
def test_product_green_quotient_commutative(p, q):
    lat = product_skew(phat_construct(p), phat_construct(q))
    g = green_decomposition(lat)
    assert g.quotient.is_commutative()
    assert g.top_class is not None


@settings(max_examples=40, deadline=None)
@given(nonempty_name_lists())
def test_downsets_of_phat_are_lattices(p):
    lat = phat_construct(p)
    for x in lat.carrier:
        assert verify_downset(lat, x)["ok"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.one_of(st.none(), st.integers(-5, 5), names,
                          st.tuples(st.integers(0, 3), names)),
                max_size=8))
def test_canon_key_gives_total_order(xs):
    srt = csorted(xs)
    keys = [canon_key(x) for x in srt]
    assert keys == sorted(keys)
    assert sorted(map(canon_key, xs)) == keys


def random_poset_category(rng, max_objects=3):
    """A category from a random partial order: at most one arrow between any
    two objects, so composites are forced."""
    n = rng.randint(1, max_objects)
    objs = [f"O{i}" for i in range(n)]
    le = {(a, a): True for a in objs}
    # random relations on the underlying chain order of indices keeps it a poset
    for i in range(n):
        for j in range(i + 1, n):
            le[(objs[i], objs[j])] = rng.random() < 0.6
            le[(objs[j], objs[i])] = False
    # transitive closure
    for k, a, b in product(objs, objs, objs):
        if le.get((a, k)) and le.get((k, b)):
            le[(a, b)] = True
    identities = {o: f"id_{o}" for o in objs}
    arrows = [(identities[o], o, o) for o in objs]
    name = {}
    for a, b in product(objs, objs):
        if a != b and le.get((a, b)):
            nm = f"f_{a}_{b}"
            name[(a, b)] = nm
            arrows.append((nm, a, b))
    compose = {}
    for (a, b), g1 in name.items():
        for (c, d), g2 in name.items():
            if b == c:
                compose[(g2, g1)] = name[(a, d)]
    return validate_category(objs, arrows, identities, compose)


def idempotent_monoid_category():
    """One object, one idempotent non-identity arrow."""
    return validate_category(
        ["M"], [("id_M", "M", "M"), ("e", "M", "M")],
        {"M": "id_M"}, {("e", "e"): "e"})


def test_sieves_closed_under_meet_join_on_random_posets():
    rng = random.Random(20260823)
    for _ in range(25):
        cat = random_poset_category(rng)
        for o in cat.objects:
            sieves = enumerate_sieves(cat, o)
            assert all(is_sieve(cat, o, s) for s in sieves)
            for s, r in product(sieves, sieves):
                assert (s & r) in sieves and (s | r) in sieves
            for s in sieves:
                for f in cat.arrows_into(o):
                    assert restrict_sieve(cat, f, s) in \
                        enumerate_sieves(cat, cat.dom[f])


def test_omega_heyting_on_assorted_sites(site):
    rng = random.Random(7)
    cats = [site, idempotent_monoid_category()] + \
        [random_poset_category(rng) for _ in range(5)]
    for cat in cats:
        omega = omega_presheaf(cat)
        assert omega.verify()["ok"]
        for o in cat.objects:
            assert omega_algebra(cat, o).verify()["ok"]


def test_pullback_axioms_on_random_sieve_algebras():
    rng = random.Random(99)
    for _ in range(10):
        cat = random_poset_category(rng)
        o = rng.choice(cat.objects)
        h = omega_algebra(cat, o)
        decorations = ["a", "b"][:rng.randint(1, 2)]
        alg = pullback_construct(h, decorations)
        rep = verify_nc_heyting(alg)
        assert rep["ok"], rep
        g = green_decomposition(alg.lattice)
        assert g.quotient.is_commutative()
        assert len(g.classes) == len(h.carrier)
