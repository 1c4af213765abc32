"""Head types over the two-point set {⊥ ⊑ ♮} and normalization of partial terms.

A head type says, per constructor, whether an application is defined given
which arguments are defined.  Normalizing a term replaces every node whose
head is ⊥ by the bottom of its type.

Head files hold a base rule plus explicit tables::

    base strict
    head Succ: _ -> #
    head Succ: # -> _

``%`` starts a comment, since ``#`` marks a defined argument.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .errors import HeadFormatError, UnknownConstructor
from .finalg import FiniteAlgebra
from .sig import Signature
from .terms import Bottom, Node, Term, Variable, _postorder


class Head(enum.IntEnum):
    BOT = 0
    NAT = 1

    def __str__(self):
        return "⊥" if self is Head.BOT else "♮"

    @property
    def symbol(self) -> str:
        return "_" if self is Head.BOT else "#"


BUILTINS = ("flat", "strict", "smash", "degenerate")

Pattern = tuple[Head, ...]


def is_product_type(sig: Signature, b: str) -> bool:
    if sig.is_parameter(b) or b == sig.numeral_type:
        return False
    ks = sig.ctors_of(b)
    if len(ks) != 1:
        return False
    slots = sig.slots_of(ks[0])
    return len(slots) >= 2 and all(t != b for _, t in slots)


def _rule(name: str, sig: Signature, k: str, pattern: Pattern) -> Head:
    if name == "strict":
        return Head.NAT
    if name == "degenerate":
        return Head.BOT
    if name == "flat":
        return Head.NAT if all(p is Head.NAT for p in pattern) else Head.BOT
    if name == "smash":
        if is_product_type(sig, sig.result_of(k)):
            return Head.NAT if any(p is Head.NAT for p in pattern) else Head.BOT
        return Head.NAT
    raise HeadFormatError(f"unknown head type {name!r}")


def patterns(n: int) -> list[Pattern]:
    return [tuple(p) for p in itertools.product((Head.BOT, Head.NAT), repeat=n)]


@dataclass(frozen=True)
class HeadType:
    sig: Signature
    base: str = "strict"
    tables: Mapping[str, Mapping[Pattern, Head]] = field(default_factory=dict)

    def __post_init__(self):
        if self.base not in BUILTINS:
            raise HeadFormatError(f"unknown head type {self.base!r}")
        for k, table in self.tables.items():
            if not self.sig.has_constructor(k):
                raise UnknownConstructor(k)
            n = self.sig.arity(k)
            missing = [p for p in patterns(n) if p not in table]
            if missing:
                raise HeadFormatError(f"table for {k} misses pattern {_fmt(missing[0])}")

    def apply(self, k: str, pattern: Pattern) -> Head:
        table = self.tables.get(k)
        if table is not None:
            return table[tuple(pattern)]
        return _rule(self.base, self.sig, k, tuple(pattern))

    def table(self, k: str) -> dict[Pattern, Head]:
        return {p: self.apply(k, p) for p in patterns(self.sig.arity(k))}

    @property
    def name(self) -> str:
        return self.base if not self.tables else f"{self.base}+tables"

    def constructors(self) -> list[str]:
        """Constructors whose tables must be inspected: all named ones plus one numeral."""
        ks = list(self.sig.named_constructors())
        if self.sig.numeral_type is not None:
            ks.append(str(self.sig.window[0]) if self.sig.window else "0")
        return ks


def builtin_head_type(sig: Signature, name: str) -> HeadType:
    return HeadType(sig, name)


def _fmt(p: Pattern) -> str:
    return "".join(h.symbol for h in p) or "()"


def _parse_pattern(text: str) -> Pattern:
    if text == "()":
        return ()
    out = []
    for c in text:
        if c == "#":
            out.append(Head.NAT)
        elif c == "_":
            out.append(Head.BOT)
        else:
            raise HeadFormatError(f"bad pattern character {c!r}")
    return tuple(out)


def load_head_type(text: str, sig: Signature) -> HeadType:
    base = "strict"
    tables: dict[str, dict[Pattern, Head]] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "base" and len(parts) == 2:
            base = parts[1]
            continue
        if parts[0] != "head":
            raise HeadFormatError(f"line {no}: cannot read {line!r}")
        body = line[len("head"):].strip()
        if ":" not in body or "->" not in body:
            raise HeadFormatError(f"line {no}: expected 'head k: pattern -> value'")
        k, rest = body.split(":", 1)
        pat, val = rest.split("->", 1)
        k = k.strip()
        if not sig.has_constructor(k):
            raise HeadFormatError(f"line {no}: unknown constructor {k!r}")
        p = _parse_pattern(pat.strip())
        if len(p) != sig.arity(k):
            raise HeadFormatError(f"line {no}: {k} takes {sig.arity(k)} arguments")
        v = _parse_pattern(val.strip())
        if len(v) != 1:
            raise HeadFormatError(f"line {no}: value must be # or _")
        tables.setdefault(k, {})[p] = v[0]
    return HeadType(sig, base, tables)


def dump_head_type(h: HeadType) -> str:
    lines = [f"base {h.base}"]
    for k in h.sig.named_constructors():
        if k in h.tables:
            for p in patterns(h.sig.arity(k)):
                lines.append(f"head {k}: {_fmt(p)} -> {h.tables[k][p].symbol}")
    return "\n".join(lines) + "\n"


@dataclass
class HeadReport:
    stable: bool
    natural_invariant: bool
    witnesses: list


def head_properties(h: HeadType) -> HeadReport:
    """Monotonicity of each table in ⊥ ⊑ ♮, and whether all-defined inputs stay defined."""
    unstable, noninv = [], []
    for k in h.constructors():
        n = h.sig.arity(k)
        table = h.table(k)
        for p, q in itertools.product(table, repeat=2):
            if all(a <= b for a, b in zip(p, q)) and table[p] > table[q]:
                unstable.append([k, _fmt(p), _fmt(q)])
        if table[(Head.NAT,) * n] is Head.BOT:
            noninv.append(k)
    wit = []
    if unstable:
        wit.append(["stable", unstable])
    if noninv:
        wit.append(["natural_invariant", noninv])
    return HeadReport(not unstable, not noninv, wit)


def is_stable(h: HeadType) -> bool:
    return head_properties(h).stable


def eval_head(t: Term, h: HeadType) -> Head:
    vals: dict[int, Head] = {}
    for s in _postorder(t):
        if isinstance(s, Bottom):
            vals[id(s)] = Head.BOT
        elif isinstance(s, Variable):
            vals[id(s)] = Head.NAT
        else:
            vals[id(s)] = h.apply(s.ctor, tuple(vals[id(c)] for c in s.children))
    return vals[id(t)]


def normalize(t: Term, h: HeadType) -> Term:
    """Bottom-up: a node whose head is ⊥ becomes the bottom of its type."""
    out: dict[int, Term] = {}
    for s in _postorder(t):
        if isinstance(s, Node):
            kids = tuple(out[id(c)] for c in s.children)
            pattern = tuple(Head.BOT if isinstance(c, Bottom) else Head.NAT for c in kids)
            if h.apply(s.ctor, pattern) is Head.BOT:
                out[id(s)] = Bottom(s.type)
            elif kids == s.children:
                out[id(s)] = s
            else:
                out[id(s)] = Node(s.ctor, kids, s.type)
        else:
            out[id(s)] = s
    return out[id(t)]


def is_normal(t: Term, h: HeadType) -> bool:
    return normalize(t, h) == t


def flat_extension(alg: FiniteAlgebra, bottom: str = "⊥") -> FiniteAlgebra:
    """Adjoin a fresh bottom per type; any bottom argument gives bottom."""
    if alg.bottoms is not None:
        raise HeadFormatError("algebra already has bottoms")
    sig = alg.sig
    carriers, bots = {}, {}
    for b in sig.types:
        name = bottom
        while name in alg.carriers[b]:
            name += "'"
        bots[b] = name
        carriers[b] = (name,) + alg.carriers[b]
    tables = {}
    for k in sig.constructors:
        b = sig.result_of(k)
        slots = [t for _, t in sig.slots_of(k)]
        table = {}
        for args in itertools.product(*(carriers[t] for t in slots)):
            if any(a == bots[t] for a, t in zip(args, slots)):
                table[args] = bots[b]
            elif args in alg.tables[k]:
                table[args] = alg.tables[k][args]
        tables[k] = table
    return FiniteAlgebra(sig, carriers, tables, bots, alg.partial)
