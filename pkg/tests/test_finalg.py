import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adt.bottomed import builtin_head_type, flat_extension
from adt.errors import (
    AlgebraFormatError,
    BudgetExceeded,
    Diverged,
    IncompleteTable,
    InfiniteConstructorFamily,
    OverlappingSignatures,
)
from adt.finalg import (
    FiniteAlgebra,
    check_homomorphism,
    classify,
    compute_depths,
    dump_algebra,
    find_homomorphisms,
    full_family,
    invariant_closure,
    is_invariant,
    load_algebra,
    sum_algebras,
    verify_grading,
)
from adt.termorder import truncation_algebra
from adt.terms import depth

from _support import (
    all_algebras,
    closure_oracle,
    fixture,
    homomorphisms_oracle,
    load_sig,
    random_algebra,
)

BOOL = load_sig("bool.sig")
NAT = load_sig("nat.sig")
PAIRBOOL = load_sig("pairbool.sig")


def alg(name, sig):
    return load_algebra(fixture(name).read_text(encoding="utf-8"), sig)


def nat_identity():
    return FiniteAlgebra(NAT, {"nat": ("0", "1")},
                         {"Zero": {(): "0"}, "Succ": {("0",): "0", ("1",): "1"}})


def pair_of_bools():
    carriers = {"bool": ("T", "F"), "pair": ("TT", "TF", "FT", "FF")}
    pair = {(a, b): a + b for a in "TF" for b in "TF"}
    return FiniteAlgebra(PAIRBOOL, carriers, {"True": {(): "T"}, "False": {(): "F"}, "Pair": pair})


def test_load_and_dump_round_trip():
    for name, sig in [("bool.alg", BOOL), ("nat_mod2.alg", NAT), ("succ_cycle.alg", NAT)]:
        a = alg(name, sig)
        assert load_algebra(dump_algebra(a), sig) == a


@pytest.mark.parametrize("text, err", [
    ("carrier bool: T\nop True = T", IncompleteTable),
    ("carrier bool: T\nop True = X\nop False = T", AlgebraFormatError),
    ("carrier bool: T T\nop True = T\nop False = T", AlgebraFormatError),
    ("carrier nope: T", AlgebraFormatError),
    ("carrier bool: T\nop Maybe = T", AlgebraFormatError),
    ("carrier bool: T\nwhat is this", AlgebraFormatError),
    ("carrier bool: T\nop True = T\nop True = F\nop False = T", AlgebraFormatError),
])
def test_load_errors(text, err):
    with pytest.raises(err):
        load_algebra(text, BOOL)


def test_unwindowed_numerals_are_rejected():
    with pytest.raises(InfiniteConstructorFamily):
        FiniteAlgebra(load_sig("basic.sig"), {}, {})


def test_closure_examples():
    assert invariant_closure(alg("bool.alg", BOOL)) == {"bool": {"T", "F"}}
    assert invariant_closure(nat_identity()) == {"nat": {"0"}}
    a = alg("nat_mod2.alg", NAT)
    assert invariant_closure(a, full_family(a)) == full_family(a)


def test_classify_examples():
    c = classify(alg("bool.alg", BOOL))
    assert (c.minimal, c.unambiguous, c.regular, c.initial) == (True, True, True, True)
    assert c.witnesses == [] and not c.approximate
    c = classify(alg("nat_ambiguous.alg", NAT))
    assert c.minimal and not c.unambiguous and not c.initial
    c = classify(nat_identity())
    assert not c.minimal
    assert c.witness("minimal") == [["nat", "1"]]


def test_classify_partial_is_approximate():
    c = classify(alg("succ_cycle.alg", NAT))
    assert c.approximate and c.bottomed
    assert c.regular_bottomed
    assert not c.natural_invariant


def test_flat_extension_classification():
    c = classify(flat_extension(alg("bool.alg", BOOL)))
    assert c.bottomed and c.natural_invariant and c.v_minimal and c.regular_bottomed


def test_depth_examples():
    assert compute_depths(alg("bool.alg", BOOL)) == {"bool": {"T": 0, "F": 0}}
    g = compute_depths(pair_of_bools())
    assert g["pair"] == {"TT": 1, "TF": 1, "FT": 1, "FF": 1}
    assert verify_grading(pair_of_bools(), g)
    with pytest.raises(Diverged):
        compute_depths(alg("nat_ambiguous.alg", NAT))


def test_grading_examples():
    a, names = truncation_algebra(NAT, builtin_head_type(NAT, "strict"), 3)
    g = {"nat": {x: depth(t) for x, t in names["nat"].items()}}
    assert verify_grading(a, g, bottomed=True)
    assert verify_grading(alg("bool.alg", BOOL), {"bool": {"T": 0, "F": 0}})
    assert not verify_grading(alg("nat_mod2.alg", NAT), {"nat": {"0": 0, "1": 0}})


def test_homomorphism_examples():
    b = alg("bool.alg", BOOL)
    swap = alg("bool_swap.alg", BOOL)
    ident = {"bool": {"T": "T", "F": "F"}}
    assert check_homomorphism(b, b, ident)
    assert check_homomorphism(b, swap, {"bool": {"T": "F", "F": "T"}})
    assert not check_homomorphism(b, b, {"bool": {"T": "F", "F": "F"}})
    assert find_homomorphisms(b, b) == [ident]
    assert len(find_homomorphisms(b, alg("one_point_bool.alg", BOOL))) == 1
    assert len(find_homomorphisms(nat_identity(), nat_identity())) == 2


def test_homomorphism_budget():
    a = alg("nat_mod2.alg", NAT)
    with pytest.raises(BudgetExceeded):
        find_homomorphisms(a, a, budget=3)


def test_bottomed_homomorphisms_fix_bottoms():
    a = flat_extension(alg("nat_mod2.alg", NAT))
    homs = find_homomorphisms(a, a, bottomed=True)
    assert homs and all(h["nat"]["⊥"] == "⊥" for h in homs)


def test_sum():
    win = load_sig("basic.sig", (0, 1))
    from adt.sig import _restrict
    ints = _restrict(win, ["int"])
    i = FiniteAlgebra(ints, {"int": ("0", "1")}, {"0": {(): "0"}, "1": {(): "1"}})
    s = sum_algebras([alg("bool.alg", BOOL), i])
    assert s.carriers == {"bool": ("T", "F"), "int": ("0", "1")}
    with pytest.raises(OverlappingSignatures):
        sum_algebras([alg("bool.alg", BOOL), alg("bool_swap.alg", BOOL)])


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["bool.sig", "nat.sig", "w.sig", "pairbool.sig", "intro.sig"]),
       st.integers(0, 2**32 - 1))
def test_closure_matches_subset_oracle(name, seed):
    s = load_sig(name)
    rng = random.Random(seed)
    a = random_algebra(s, rng, 6)
    U = {b: {x for x in a.carriers[b] if rng.random() < 0.3} for b in s.types}
    got = invariant_closure(a, U)
    assert got == {b: frozenset(v) for b, v in closure_oracle(a, U).items()}
    assert is_invariant(a, got)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["bool.sig", "nat.sig", "w.sig"]), st.integers(0, 2**32 - 1))
def test_homomorphisms_match_oracle(name, seed):
    s = load_sig(name)
    rng = random.Random(seed)
    a, b = random_algebra(s, rng, 4), random_algebra(s, rng, 4)
    got = find_homomorphisms(a, b)
    assert sorted(map(repr, got)) == sorted(map(repr, homomorphisms_oracle(a, b)))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["bool.sig", "nat.sig", "w.sig", "pairbool.sig"]), st.integers(0, 2**32 - 1))
def test_depths_grade_regular_algebras(name, seed):
    """Minimal regular algebras always converge to a grading; divergence rules them out."""
    s = load_sig(name)
    a = random_algebra(s, random.Random(seed), 5)
    c = classify(a)
    try:
        g = compute_depths(a)
    except Diverged:
        assert not (c.minimal and c.regular)
        return
    if c.minimal and c.regular:
        assert verify_grading(a, g)


def test_initial_bool_algebras_exhaustive():
    algs = [a for n in (1, 2, 3) for a in all_algebras(BOOL, {"bool": n})]
    for a in algs:
        unique = all(len(find_homomorphisms(a, b)) == 1 for b in algs)
        assert classify(a).initial == unique
