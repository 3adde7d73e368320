import pytest

from nctopos.fincat import (
    BadIdentity,
    CodMismatch,
    HeytingAlgebra,
    MissingComposite,
    NCToposError,
    NonAssociative,
    canon_key,
    classifying_map,
    csorted,
    enumerate_nat_trans,
    enumerate_sieves,
    enumerate_subpresheaves,
    is_sieve,
    make_presheaf,
    omega_algebra,
    omega_presheaf,
    restrict_sieve,
    subobject_lattice,
    validate_category,
    yoneda_presheaf,
)


def terminal_category():
    return validate_category(["X"], [("id_X", "X", "X")], {"X": "id_X"}, {})


def chain_category():
    # two objects with one non-identity arrow f: A -> B
    return validate_category(
        ["A", "B"],
        [("id_A", "A", "A"), ("id_B", "B", "B"), ("f", "A", "B")],
        {"A": "id_A", "B": "id_B"},
        {},
    )


def test_validate_terminal_category():
    cat = terminal_category()
    assert cat.objects == ("X",)
    assert cat.compose("id_X", "id_X") == "id_X"


def test_validate_rejects_bad_identity():
    with pytest.raises(BadIdentity):
        validate_category(
            ["A", "B"],
            [("id_A", "A", "A"), ("id_B", "B", "B"), ("f", "A", "B"),
             ("g", "A", "B")],
            {"A": "id_A", "B": "id_B"},
            {("f", "id_A"): "g", ("g", "id_A"): "g"},  # f ∘ id_A must be f
        )


def test_validate_rejects_missing_composite():
    with pytest.raises(MissingComposite):
        validate_category(
            ["A"],
            [("id_A", "A", "A"), ("e", "A", "A")],
            {"A": "id_A"},
            {},  # e ∘ e not given
        )


def test_validate_rejects_non_associative():
    # three self-maps with a deliberately broken composition table
    with pytest.raises(NonAssociative):
        validate_category(
            ["A"],
            [("id_A", "A", "A"), ("e", "A", "A"), ("g", "A", "A")],
            {"A": "id_A"},
            {("e", "e"): "g", ("e", "g"): "id_A", ("g", "e"): "e",
             ("g", "g"): "g"},
        )


def test_canon_key_total_order():
    items = [None, "b", 1, ("a",), frozenset({"x"}), frozenset(), (2, "c"), 0]
    srt = csorted(items)
    assert sorted(map(canon_key, items)) == [canon_key(x) for x in srt]
    # deterministic and repeatable
    assert csorted(items) == srt


def test_digraph_sieve_counts(site):
    assert len(enumerate_sieves(site, "E")) == 5
    assert len(enumerate_sieves(site, "V")) == 2


def test_sieve_recognition(site):
    assert is_sieve(site, "E", frozenset({"s", "t"}))
    assert not is_sieve(site, "E", frozenset({"id_E"}))  # misses s = id_E ∘ s


def test_restrict_sieve(site):
    u = frozenset({"s", "t"})
    assert restrict_sieve(site, "s", u) == frozenset({"id_V"})
    assert restrict_sieve(site, "id_E", u) == u
    with pytest.raises(CodMismatch):
        restrict_sieve(site, "s", frozenset({"id_V"}))


def test_omega_algebra_is_heyting(site):
    for o in site.objects:
        assert omega_algebra(site, o).verify()["ok"]


def test_omega_implication_table(site):
    alg = omega_algebra(site, "E")
    s = frozenset({"s"})
    t = frozenset({"t"})
    u = frozenset({"s", "t"})
    top = frozenset({"id_E", "s", "t"})
    assert alg.imp[(s, t)] == t
    assert alg.imp[(t, s)] == s
    assert alg.imp[(u, s)] == s
    assert alg.imp[(s, s)] == top
    assert alg.imp[(frozenset(), s)] == top


def test_omega_presheaf_verifies(omega):
    assert omega.verify()["ok"]


def test_yoneda_digraph(site):
    ye = yoneda_presheaf(site, "E")
    assert set(ye.at["E"]) == {"id_E"}
    assert set(ye.at["V"]) == {"s", "t"}
    yv = yoneda_presheaf(site, "V")
    assert set(yv.at["V"]) == {"id_V"}
    assert yv.at["E"] == ()


def test_terminal_category_omega_is_two_chain():
    cat = terminal_category()
    alg = omega_algebra(cat, "X")
    assert len(alg.carrier) == 2


def test_nat_trans_count_yoneda(site, omega):
    # Yoneda: Nat(yC, Omega) = Omega(C)
    ye = yoneda_presheaf(site, "E")
    assert len(enumerate_nat_trans(ye, omega.presheaf)) == 5
    yv = yoneda_presheaf(site, "V")
    assert len(enumerate_nat_trans(yv, omega.presheaf)) == 2


def test_empty_presheaf_unique_map(site, loops):
    empty = make_presheaf(site, {"V": [], "E": []}, {"s": {}, "t": {}})
    assert len(enumerate_nat_trans(empty, loops)) == 1
    assert enumerate_subpresheaves(empty) == [{"V": frozenset(), "E": frozenset()}]


def test_subobjects_of_terminal_presheaf(site, omega):
    one = make_presheaf(site, {"V": ["*"], "E": ["*"]},
                        {"s": {"*": "*"}, "t": {"*": "*"}})
    subs = enumerate_subpresheaves(one)
    assert len(subs) == 3
    assert len(enumerate_nat_trans(one, omega.presheaf)) == 3


def test_subobject_classification_yE(site, omega):
    ye = yoneda_presheaf(site, "E")
    subs = enumerate_subpresheaves(ye)
    assert len(subs) == 5  # Sub(yC) = Omega(C)
    subs2, maps = subobject_lattice(ye, omega)
    assert len(subs2) == 5 and len(maps) == 5


def test_classifying_map_pullback_roundtrip(site, omega, loops):
    for q in enumerate_subpresheaves(loops):
        chi = classifying_map(loops, omega, q)
        recovered = {
            o: frozenset(x for x in loops.at[o] if chi(o, x) == omega.true[o])
            for o in site.objects
        }
        assert recovered == q


def test_presheaf_validation_catches_broken_action(site):
    with pytest.raises(NCToposError):
        # t maps an edge to a missing vertex
        make_presheaf(site, {"V": ["x"], "E": ["a"]},
                      {"s": {"a": "x"}, "t": {"a": "y"}})
