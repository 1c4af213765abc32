"""The less-defined-than order on normalized terms and on finite bottomed algebras."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .bottomed import HeadType, normalize
from .errors import Diverged, NotNormalized, NotRegular, TypeMismatch
from .finalg import FiniteAlgebra, _regular_bottomed
from .poset import FinitePoset
from .sig import Signature
from .terms import Bottom, Node, Term, Variable, depth, enumerate_terms, show

OrderFamily = dict


def _require_normal(t: Term, h: HeadType):
    if normalize(t, h) != t:
        raise NotNormalized(f"{show(t)} is not in normal form")


def _leq(a: Term, b: Term) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if isinstance(x, Bottom):
            continue
        if isinstance(x, Variable):
            if x != y:
                return False
            continue
        if not isinstance(y, Node) or x.ctor != y.ctor:
            return False
        stack.extend(zip(x.children, y.children))
    return True


def term_leq(t1: Term, t2: Term, h: HeadType) -> bool:
    if t1.type != t2.type:
        raise TypeMismatch(f"{t1.type} vs {t2.type}")
    _require_normal(t1, h)
    _require_normal(t2, h)
    return _leq(t1, t2)


def principal_ideal(t: Term, h: HeadType) -> list[Term]:
    """Every normal form below t: bottom plus the constructor over child ideals."""
    _require_normal(t, h)
    memo: dict[Term, list[Term]] = {}

    def down(s: Term) -> list[Term]:
        if s in memo:
            return memo[s]
        out: list[Term] = [Bottom(s.type)]
        if isinstance(s, Variable):
            out.append(s)
        elif isinstance(s, Node):
            for combo in itertools.product(*(down(c) for c in s.children)):
                n = Node(s.ctor, tuple(combo), s.type)
                if normalize(n, h) == n:
                    out.append(n)
        memo[s] = out
        return out

    return down(t)


def is_maximal(t: Term, h: HeadType) -> bool:
    """For natural-invariant head types: maximal exactly when no bottom occurs."""
    _require_normal(t, h)
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Bottom):
            return False
        if isinstance(s, Node):
            stack.extend(s.children)
    return True


def normal_forms(sig: Signature, type_name: str, h: HeadType, max_depth: int,
                 variables: Mapping[str, Sequence[str]] | None = None) -> list[Term]:
    return [t for t in enumerate_terms(sig, type_name, max_depth, bottoms=True, variables=variables)
            if normalize(t, h) == t]


def truncated_poset(sig: Signature, type_name: str, h: HeadType, max_depth: int,
                    variables: Mapping[str, Sequence[str]] | None = None) -> FinitePoset:
    elems = normal_forms(sig, type_name, h, max_depth, variables)
    leq = [(a, b) for a in elems for b in elems if _leq(a, b)]
    return FinitePoset(elems, leq, bottom=Bottom(type_name), names=show)


def truncation_algebra(sig: Signature, h: HeadType, max_depth: int,
                       variables: Mapping[str, Sequence[str]] | None = None):
    """Normal forms of depth <= max_depth with constructor tables cut at that depth.

    Returns the algebra and the element-name -> term map per type.
    """
    terms = {b: normal_forms(sig, b, h, max_depth, variables) for b in sig.types}
    names = {b: {show(t): t for t in ts} for b, ts in terms.items()}
    carriers = {b: tuple(names[b]) for b in sig.types}
    tables = {}
    for k in sig.constructors:
        b = sig.result_of(k)
        slots = [t for _, t in sig.slots_of(k)]
        table = {}
        for args in itertools.product(*(terms[t] for t in slots)):
            r = normalize(Node(k, tuple(args), b), h)
            if depth(r) <= max_depth:
                table[tuple(show(a) for a in args)] = show(r)
        tables[k] = table
    alg = FiniteAlgebra(sig, carriers, tables, {b: "_" for b in sig.types}, partial=True)
    return alg, names


@dataclass
class OrderReport:
    rounds: int
    monotone: bool
    approximate: bool
    witnesses: list = field(default_factory=list)

    def describe(self) -> list[str]:
        return [f"{k} non-monotone at ({','.join(a)}) vs ({','.join(b)})" if len(a) != 1
                else f"{k} non-monotone at ({a[0]},{b[0]})" for k, a, b in self.witnesses]


def _flat(alg: FiniteAlgebra, b: str) -> set:
    bot = alg.bottoms[b]
    return {(x, x) for x in alg.carriers[b]} | {(bot, x) for x in alg.carriers[b]}


def refine_ordering(alg: FiniteAlgebra, base: Mapping[str, set] | None = None):
    """Iterate the first refinement from the flat order to its fixpoint, then check monotonicity.

    Returns (order family, report).  For partial tables the result is the
    fixpoint of refinement on the truncation, not a claim about uniqueness.
    """
    if alg.bottoms is None:
        raise NotRegular("refinement needs a bottomed algebra")
    ok, wit = _regular_bottomed(alg)
    if not ok:
        raise NotRegular(f"element {wit[1]!r} of {wit[0]} lacks a unique decomposition")
    sig = alg.sig
    dec: dict[str, dict[str, tuple]] = {b: {} for b in sig.types}
    for k in sig.constructors:
        b = sig.result_of(k)
        for args, r in alg.tables[k].items():
            if not alg.is_bottom(b, r):
                dec[b][r] = (k, args)
    rel = {}
    for b in sig.types:
        if sig.is_parameter(b) and base and b in base:
            rel[b] = set(base[b]) | _flat(alg, b)
        else:
            rel[b] = _flat(alg, b)
    bound = sum(len(xs) ** 2 for xs in alg.carriers.values()) + 1
    for rounds in range(1, bound + 1):
        nxt = {}
        for b in sig.types:
            if sig.is_parameter(b):
                nxt[b] = rel[b]
                continue
            r = _flat(alg, b)
            for x, y in itertools.product(dec[b], repeat=2):
                (k1, v1), (k2, v2) = dec[b][x], dec[b][y]
                if k1 == k2 and all((a, c) in rel[t] for a, c, t in
                                    zip(v1, v2, (t for _, t in sig.slots_of(k1)))):
                    r.add((x, y))
            nxt[b] = r
        if nxt == rel:
            break
        rel = nxt
    else:
        raise Diverged(f"refinement still changing after {bound} rounds")
    witnesses = []
    for k in sig.constructors:
        b = sig.result_of(k)
        slots = [t for _, t in sig.slots_of(k)]
        table = alg.tables[k]
        defined = [a for a in alg.arg_tuples(k) if a in table]
        for v, w in itertools.product(defined, repeat=2):
            if v != w and all((a, c) in rel[t] for a, c, t in zip(v, w, slots)):
                if (table[v], table[w]) not in rel[b]:
                    witnesses.append([k, list(v), list(w)])
    order = {b: frozenset(rel[b]) for b in sig.types}
    return order, OrderReport(rounds, not witnesses, alg.partial, witnesses)


def order_poset(alg: FiniteAlgebra, order: OrderFamily, b: str) -> FinitePoset:
    return FinitePoset(alg.carriers[b], order[b], bottom=alg.bottoms[b])
