import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adt.bottomed import (
    BUILTINS,
    Head,
    HeadType,
    builtin_head_type,
    dump_head_type,
    eval_head,
    flat_extension,
    head_properties,
    is_normal,
    is_product_type,
    is_stable,
    load_head_type,
    normalize,
)
from adt.errors import HeadFormatError, UnknownConstructor
from adt.finalg import classify, load_algebra
from adt.terms import Bottom, Node, enumerate_terms, parse

from _support import fixture, load_sig

LISTS = load_sig("lists.sig", (-1, 1))
BASIC = load_sig("basic.sig", (0, 42))
NAT = load_sig("nat.sig")
B, N = Head.BOT, Head.NAT


def test_product_types():
    assert is_product_type(LISTS, "pair")
    assert not is_product_type(LISTS, "list")
    assert not is_product_type(LISTS, "bool")


def test_builtin_tables():
    flat = builtin_head_type(BASIC, "flat")
    assert flat.table("Cons") == {(B, B): B, (B, N): B, (N, B): B, (N, N): N}
    strict = builtin_head_type(BASIC, "strict")
    for k in BASIC.constructors:
        assert set(strict.table(k).values()) == {N}
    smash = builtin_head_type(LISTS, "smash")
    assert smash.table("Pair") == {(B, B): B, (B, N): N, (N, B): N, (N, N): N}
    assert smash.table("Cons") == {(B, B): N, (B, N): N, (N, B): N, (N, N): N}


def test_builtins_are_stable():
    for name in BUILTINS:
        assert is_stable(builtin_head_type(LISTS, name))


def test_degenerate_is_not_invariant():
    rep = head_properties(builtin_head_type(NAT, "degenerate"))
    assert rep.stable and not rep.natural_invariant


def test_antimonotone_table():
    h = load_head_type(fixture("antimono.head").read_text(), NAT)
    rep = head_properties(h)
    assert not rep.stable
    assert ["stable", [["Succ", "_", "#"]]] in rep.witnesses


def test_head_file_round_trip_and_errors():
    h = load_head_type(fixture("antimono.head").read_text(), NAT)
    assert load_head_type(dump_head_type(h), NAT) == h
    with pytest.raises(HeadFormatError):
        load_head_type("head Succ: _ -> #\n", NAT)  # missing the # pattern
    with pytest.raises(HeadFormatError):
        load_head_type("head Pred: _ -> #\n", NAT)
    with pytest.raises(HeadFormatError):
        load_head_type("base lazy\n", NAT)
    with pytest.raises(HeadFormatError):
        load_head_type("head Succ: __ -> #\nhead Succ: # -> #\n", NAT)
    with pytest.raises(UnknownConstructor):
        HeadType(NAT, "strict", {"Pred": {}})


def test_flat_extension_of_bool():
    a = load_algebra(fixture("bool.alg").read_text(), load_sig("bool.sig"))
    f = flat_extension(a)
    assert f.carriers == {"bool": ("⊥", "T", "F")}
    assert f.tables["True"] == {(): "T"}
    assert classify(f).natural_invariant


def test_flat_extension_is_strict():
    s = load_sig("intro.sig")
    a = load_algebra("carrier nat: 0\ncarrier pair: p\ncarrier list: l\n"
                     "op Zero = 0\nop Succ(0) = 0\nop Pair(0, 0) = p\nop Nil = l\nop Cons(0, l) = l\n", s)
    f = flat_extension(a)
    for k in s.constructors:
        for args, r in f.tables[k].items():
            if "⊥" in args:
                assert r == "⊥"


def test_head_evaluation_examples():
    strict = builtin_head_type(BASIC, "strict")
    flat = builtin_head_type(BASIC, "flat")
    assert eval_head(parse("Cons _ Nil", "list", BASIC), strict) is N
    assert eval_head(Bottom("list"), strict) is B
    assert eval_head(parse("Cons _ Nil", "list", BASIC), flat) is B
    assert eval_head(parse("Cons 42 Nil", "list", BASIC), flat) is N


def test_normalize_examples():
    flat = builtin_head_type(BASIC, "flat")
    strict = builtin_head_type(BASIC, "strict")
    assert normalize(parse("Cons 42 (Cons _ Nil)", "list", BASIC), flat) == Bottom("list")
    t = parse("Cons _ Nil", "list", BASIC)
    assert normalize(t, strict) == t
    smash = builtin_head_type(LISTS, "smash")
    assert normalize(parse("Pair _ _", "pair", LISTS), smash) == Bottom("pair")
    t = parse("Pair ?x _", "pair", LISTS)
    assert normalize(t, smash) == t


HEAD_SIGS = ["nat.sig", "intro.sig", "pairbool.sig", "lists.sig", "w.sig"]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(HEAD_SIGS), st.sampled_from(BUILTINS))
def test_normalize_idempotent_depth3(name, head):
    s = load_sig(name, (0, 1))
    h = builtin_head_type(s, head)
    vs = {a: [a] for a in s.parameters}
    for b in s.types:
        for t in enumerate_terms(s, b, 3, bottoms=True, variables=vs):
            n = normalize(t, h)
            assert normalize(n, h) == n
            assert is_normal(n, h)
            # a normal form heads to ⊥ only if it is the bottom itself
            assert (eval_head(n, h) is B) == isinstance(n, Bottom)


def test_strict_normal_nodes_are_defined():
    s = load_sig("intro.sig")
    h = builtin_head_type(s, "strict")
    for t in enumerate_terms(s, "list", 3, bottoms=True):
        assert normalize(t, h) == t
        if isinstance(t, Node):
            assert eval_head(t, h) is N


def test_degenerate_collapses_everything():
    s = load_sig("intro.sig")
    h = builtin_head_type(s, "degenerate")
    for t in enumerate_terms(s, "pair", 2, bottoms=True):
        assert normalize(t, h) == Bottom("pair")


def test_custom_table_against_pattern_oracle():
    """Normalization agrees with a direct recursive definition on every small term."""
    h = load_head_type(fixture("antimono.head").read_text(), NAT)

    def oracle(t):
        if isinstance(t, Bottom):
            return t
        kids = tuple(oracle(c) for c in t.children)
        pat = tuple(B if isinstance(c, Bottom) else N for c in kids)
        return Bottom(t.type) if h.apply(t.ctor, pat) is B else Node(t.ctor, kids, t.type)

    for t in enumerate_terms(NAT, "nat", 5, bottoms=True):
        assert normalize(t, h) == oracle(t)
