"""Finite posets with a least element.

Text format (element names may be quoted, shell style)::

    elem ⊥ a b
    le ⊥ a
    le ⊥ b
"""
from __future__ import annotations

import itertools
import shlex
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .config import budget as default_budget
from .errors import BudgetExceeded, NoBottom, NotAPartialOrder, PosetFormatError, UnknownElement
from .report import Verdict


class FinitePoset:
    """Elements in a fixed order, the closed order relation and the bottom."""

    def __init__(self, elements: Sequence[Hashable], leq: Iterable[tuple], bottom=None, names=None):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise PosetFormatError("repeated element")
        self.leq = frozenset(leq)
        self._names = names
        self._up = {e: set() for e in self.elements}
        self._down = {e: set() for e in self.elements}
        for a, b in self.leq:
            self._up[a].add(b)
            self._down[b].add(a)
        if bottom is None:
            bottom = self._find_bottom()
        self.bottom = bottom

    def _find_bottom(self):
        lows = [e for e in self.elements if len(self._up[e]) == len(self.elements)]
        if len(lows) != 1:
            minimal = [e for e in self.elements if self._down[e] == {e}]
            raise NoBottom(f"no least element; minimal elements: {[self.name(m) for m in minimal]}")
        return lows[0]

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        return (isinstance(other, FinitePoset) and set(self.elements) == set(other.elements)
                and self.leq == other.leq)

    def __hash__(self):
        return hash(self.leq)

    def __repr__(self):
        return f"FinitePoset({len(self)} elements)"

    def le(self, a, b) -> bool:
        return (a, b) in self.leq

    def up(self, a) -> set:
        return self._up[a]

    def down(self, a) -> set:
        return self._down[a]

    def name(self, e) -> str:
        if self._names is not None:
            return self._names(e)
        return element_name(e)

    def sort(self, xs: Iterable) -> list:
        return sorted(xs, key=self.index.__getitem__)

    def covers(self) -> list[tuple]:
        out = []
        for a in self.elements:
            for b in self.sort(self._up[a]):
                if a != b and not any(c not in (a, b) and self.le(a, c) and self.le(c, b)
                                      for c in self._up[a]):
                    out.append((a, b))
        return out


def element_name(e) -> str:
    if isinstance(e, str):
        return e
    if isinstance(e, tuple):
        return "(" + ",".join(element_name(x) for x in e) + ")"
    if isinstance(e, frozenset):
        return "{" + ",".join(sorted(element_name(x) for x in e)) + "}"
    return str(e)


def make_poset(elements: Sequence, pairs: Iterable[tuple], names: Callable | None = None) -> FinitePoset:
    """Reflexive-transitive closure of pairs, then validate the partial-order laws."""
    elements = list(elements)
    idx = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    reach = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        if a not in idx:
            raise UnknownElement(str(a))
        if b not in idx:
            raise UnknownElement(str(b))
        reach[idx[a]][idx[b]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    for i in range(n):
        for j in range(i + 1, n):
            if reach[i][j] and reach[j][i]:
                nm = names or element_name
                raise NotAPartialOrder(f"cycle through {nm(elements[i])} and {nm(elements[j])}")
    leq = [(elements[i], elements[j]) for i in range(n) for j in range(n) if reach[i][j]]
    return FinitePoset(elements, leq, names=names)


def validate(P: FinitePoset) -> Verdict:
    """Check reflexivity, antisymmetry, transitivity and the bottom directly on the relation."""
    for a in P.elements:
        if not P.le(a, a):
            return Verdict(False, ["reflexive", P.name(a)])
        if not P.le(P.bottom, a):
            return Verdict(False, ["bottom", P.name(a)])
    for a, b in P.leq:
        if a != b and P.le(b, a):
            return Verdict(False, ["antisymmetric", P.name(a), P.name(b)])
        for c in P.up(b):
            if not P.le(a, c):
                return Verdict(False, ["transitive", P.name(a), P.name(b), P.name(c)])
    return Verdict(True)


def load_poset(text: str) -> FinitePoset:
    elements: list[str] = []
    pairs: list[tuple[str, str]] = []
    for no, raw in enumerate(text.splitlines(), 1):
        try:
            parts = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise PosetFormatError(f"line {no}: {exc}") from None
        if not parts:
            continue
        if parts[0] == "elem":
            for e in parts[1:]:
                if e in elements:
                    raise PosetFormatError(f"line {no}: element {e!r} listed twice")
                elements.append(e)
        elif parts[0] == "le" and len(parts) == 3:
            for e in parts[1:]:
                if e not in elements:
                    raise UnknownElement(f"line {no}: {e!r}")
            pairs.append((parts[1], parts[2]))
        elif parts[0] == "embed":
            continue
        else:
            raise PosetFormatError(f"line {no}: cannot read {raw.strip()!r}")
    if not elements:
        raise PosetFormatError("no elements")
    return make_poset(elements, pairs)


def _quote(s: str) -> str:
    if s and not any(c.isspace() or c in "'\"#\\" for c in s):
        return s
    return shlex.quote(s)


def dump_poset(P: FinitePoset) -> str:
    lines = ["elem " + " ".join(_quote(P.name(e)) for e in P.elements)]
    for a, b in P.covers():
        lines.append(f"le {_quote(P.name(a))} {_quote(P.name(b))}")
    return "\n".join(lines) + "\n"


# directed sets and bounds

def is_directed(P: FinitePoset, D: Iterable) -> bool:
    D = set(D)
    if not D:
        return False
    for a, b in itertools.combinations(D, 2):
        if not any(P.le(a, c) and P.le(b, c) for c in D):
            return False
    return True


def upper_bounds(P: FinitePoset, S: Iterable) -> list:
    S = list(S)
    return [u for u in P.elements if all(P.le(s, u) for s in S)]


def lub(P: FinitePoset, S: Iterable):
    """Least upper bound of S in P, or None."""
    ubs = upper_bounds(P, S)
    least = [u for u in ubs if all(P.le(u, v) for v in ubs)]
    return least[0] if least else None


def subsets(P: FinitePoset, budget: int | None = None) -> Iterable[frozenset]:
    n = len(P)
    if 2 ** n > default_budget(budget):
        raise BudgetExceeded(f"2^{n} subsets exceed the budget")
    for r in range(1, n + 1):
        for c in itertools.combinations(P.elements, r):
            yield frozenset(c)


def directed_subsets(P: FinitePoset, budget: int | None = None) -> list[frozenset]:
    return [D for D in subsets(P, budget) if is_directed(P, D)]


# maps

def is_monotone(f: Mapping, P: FinitePoset, Q: FinitePoset) -> Verdict:
    for a, b in sorted(P.leq, key=lambda ab: (P.index[ab[0]], P.index[ab[1]])):
        if not Q.le(f[a], f[b]):
            return Verdict(False, [P.name(a), P.name(b)])
    return Verdict(True)


def is_continuous(f: Mapping, P: FinitePoset, Q: FinitePoset, budget: int | None = None) -> Verdict:
    mono = is_monotone(f, P, Q)
    if not mono:
        return mono
    for D in directed_subsets(P, budget):
        top = lub(P, D)
        image = lub(Q, {f[d] for d in D})
        if top is None or image is None or f[top] != image:
            return Verdict(False, sorted(P.name(d) for d in D))
    return Verdict(True)


def is_cofinal(P: FinitePoset, D1: Iterable, D2: Iterable) -> bool:
    D2 = list(D2)
    return all(any(P.le(y1, y2) for y2 in D2) for y1 in D1)


# products

def product_poset(ps: Sequence[FinitePoset]) -> FinitePoset:
    """Pointwise order on tuples; the empty product is the one-point poset."""
    if not ps:
        return FinitePoset([()], [((), ())])
    elements = list(itertools.product(*(p.elements for p in ps)))
    leq = [(a, b) for a in elements for b in elements
           if all(p.le(x, y) for p, x, y in zip(ps, a, b))]
    return FinitePoset(elements, leq, bottom=tuple(p.bottom for p in ps))


# ideal completion

def _downsets_from_antichains(P: FinitePoset):
    """Each down-set is the down-closure of exactly one antichain."""
    elems = P.elements
    n = len(elems)

    def extend(start: int, chosen: list):
        if chosen:
            yield chosen
        for i in range(start, n):
            e = elems[i]
            if all(not P.le(e, c) and not P.le(c, e) for c in chosen):
                yield from extend(i + 1, chosen + [e])

    for antichain in extend(0, []):
        down = set()
        for a in antichain:
            down |= P.down(a)
        yield frozenset(down)


def directed_ideals(P: FinitePoset) -> list[frozenset]:
    ideals = [D for D in _downsets_from_antichains(P) if is_directed(P, D)]
    return sorted(set(ideals), key=lambda I: (len(I), sorted(P.index[x] for x in I)))


def directed_ideals_naive(P: FinitePoset) -> list[frozenset]:
    """Scan every subset; kept as a cross-check for the antichain route."""
    out = []
    for S in subsets(P):
        if all(P.down(x) <= S for x in S) and is_directed(P, S):
            out.append(S)
    return sorted(out, key=lambda I: (len(I), sorted(P.index[x] for x in I)))


@dataclass
class Completion:
    poset: FinitePoset
    embed: dict


def ideal_completion(Y: FinitePoset, max_elements: int = 20) -> Completion:
    """Directed down-closed subsets ordered by inclusion, with y -> principal ideal."""
    if len(Y) > max_elements:
        raise BudgetExceeded(f"{len(Y)} elements exceed the completion budget {max_elements}")
    ideals = directed_ideals(Y)
    leq = [(a, b) for a in ideals for b in ideals if a <= b]

    def name(I):
        return "{" + ",".join(Y.name(x) for x in Y.sort(I)) + "}"

    X = FinitePoset(ideals, leq, bottom=frozenset({Y.bottom}), names=name)
    embed = {y: frozenset(Y.down(y)) for y in Y.elements}
    return Completion(X, embed)


def dump_completion(c: Completion, Y: FinitePoset) -> str:
    lines = [dump_poset(c.poset).rstrip("\n")]
    for y in Y.elements:
        lines.append(f"embed {_quote(Y.name(y))} {_quote(c.poset.name(c.embed[y]))}")
    return "\n".join(lines) + "\n"


# compact elements

def compact_elements(X: FinitePoset, budget: int | None = None) -> list:
    directed = directed_subsets(X, budget)
    sups = [(D, lub(X, D)) for D in directed]
    out = []
    for x in X.elements:
        if all(any(X.le(x, d) for d in D) for D, s in sups if s is not None and X.le(x, s)):
            out.append(x)
    return out


def is_algebraic(X: FinitePoset, budget: int | None = None) -> Verdict:
    comp = set(compact_elements(X, budget))
    for D in directed_subsets(X, budget):
        if lub(X, D) is None:
            return Verdict(False, ["not_complete", sorted(X.name(d) for d in D)])
    for x in X.elements:
        below = [c for c in X.down(x) if c in comp]
        if not is_directed(X, below) or lub(X, below) != x:
            return Verdict(False, ["not_generated", X.name(x)])
    return Verdict(True)


# isomorphism

def _signature(P: FinitePoset, e) -> tuple:
    return (len(P.down(e)), len(P.up(e)))


def find_isomorphism(P: FinitePoset, Q: FinitePoset, budget: int | None = None) -> dict | None:
    """Order isomorphism P -> Q by backtracking over invariant-matched candidates."""
    if len(P) != len(Q) or len(P.leq) != len(Q.leq):
        return None
    sp = sorted(_signature(P, e) for e in P.elements)
    sq = sorted(_signature(Q, e) for e in Q.elements)
    if sp != sq:
        return None
    order = sorted(P.elements, key=lambda e: (len(P.down(e)), P.index[e]))
    cands = {e: [f for f in Q.elements if _signature(Q, f) == _signature(P, e)] for e in P.elements}
    limit = default_budget(budget)
    steps = 0
    mapping: dict = {}
    used: set = set()

    def go(i: int) -> bool:
        nonlocal steps
        if i == len(order):
            return True
        e = order[i]
        for f in cands[e]:
            steps += 1
            if steps > limit:
                raise BudgetExceeded("isomorphism search exceeded the budget")
            if f in used:
                continue
            if all(P.le(e, g) == Q.le(f, mapping[g]) and P.le(g, e) == Q.le(mapping[g], f)
                   for g in mapping):
                mapping[e] = f
                used.add(f)
                if go(i + 1):
                    return True
                del mapping[e]
                used.discard(f)
        return False

    return dict(mapping) if go(0) else None


def is_isomorphic(P: FinitePoset, Q: FinitePoset) -> bool:
    return find_isomorphism(P, Q) is not None

