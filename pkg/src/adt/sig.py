"""Signatures: type names, constructors and their typed argument slots.

A signature is written one rule per line::

    bool ::= True | False
    nat  ::= Zero | Succ nat
    (pair x y) ::= Pair x y      # augmented left-hand side declares a support
    int  ::= @integers           # numerals, expanded through a window

Types that never appear on a left-hand side are parameters.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    DuplicateConstructor,
    DuplicateType,
    EmptySignature,
    InfiniteConstructorFamily,
    OverlappingSignatures,
    ReservedToken,
    SignatureSyntaxError,
    UnknownConstructor,
    UnknownType,
)

RESERVED = frozenset({"::=", "|", "_", "(", ")"})
NUMERAL = re.compile(r"-?[0-9]+\Z")
INTEGERS = "@integers"

_TOKEN = re.compile(r"::=|\||\(|\)|[^\s|()]+")

Slot = tuple[str, str]


def check_name(name: str, what: str = "name") -> str:
    if name in RESERVED:
        raise ReservedToken(f"{what} {name!r} is reserved")
    if not name or any(c.isspace() for c in name):
        raise SignatureSyntaxError(f"bad {what} {name!r}")
    if name.startswith("?") or "@" in name or "#" in name:
        raise ReservedToken(f"{what} {name!r} uses a reserved character")
    return name


@dataclass(frozen=True, eq=False)
class Signature:
    types: tuple[str, ...]
    constructors: tuple[str, ...]
    result_type: Mapping[str, str]
    arg_slots: Mapping[str, tuple[Slot, ...]]
    numeral_type: str | None = None
    window: tuple[int, int] | None = None
    declared_support: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.types:
            raise EmptySignature("a signature needs at least one type")
        if not self.constructors and self.numeral_type is None:
            raise EmptySignature("a signature needs at least one constructor")
        if len(set(self.types)) != len(self.types):
            raise DuplicateType("repeated type name")
        if len(set(self.constructors)) != len(self.constructors):
            raise DuplicateConstructor("repeated constructor name")
        clash = set(self.types) & set(self.constructors)
        if clash:
            raise DuplicateConstructor(f"names used both as type and constructor: {sorted(clash)}")
        known = set(self.types)
        for k in self.constructors:
            if self.result_type[k] not in known:
                raise UnknownType(self.result_type[k])
            for _, t in self.arg_slots[k]:
                if t not in known:
                    raise UnknownType(t)
        if self.numeral_type is not None and self.numeral_type not in known:
            raise UnknownType(self.numeral_type)
        object.__setattr__(self, "_by_type", self._group())
        object.__setattr__(self, "_params", tuple(b for b in self.types if not self._by_type[b]
                                                  and b != self.numeral_type))

    def _group(self):
        out: dict[str, list[str]] = {b: [] for b in self.types}
        for k in self.constructors:
            out[self.result_type[k]].append(k)
        return {b: tuple(ks) for b, ks in out.items()}

    # identity

    def _key(self):
        return (
            self.types,
            self.constructors,
            tuple((k, self.result_type[k], tuple(self.arg_slots[k])) for k in self.constructors),
            self.numeral_type,
            self.window,
            tuple(sorted((b, tuple(ps)) for b, ps in self.declared_support.items())),
        )

    def __eq__(self, other):
        return isinstance(other, Signature) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def canonical(self):
        """Order-insensitive content, for comparing signatures up to declaration order."""
        return (
            frozenset(self.types),
            frozenset((k, self.result_type[k], tuple(self.arg_slots[k])) for k in self.constructors),
            self.numeral_type,
            self.window,
            frozenset((b, tuple(ps)) for b, ps in self.declared_support.items()),
        )

    def __repr__(self):
        return f"Signature({format_signature(self)!r})"

    # queries

    @property
    def parameters(self) -> tuple[str, ...]:
        return self._params

    @property
    def is_finite(self) -> bool:
        return self.numeral_type is None or self.window is not None

    def is_parameter(self, b: str) -> bool:
        return b in self._params

    def require_type(self, b: str) -> str:
        if b not in self._by_type:
            raise UnknownType(b)
        return b

    def ctors_of(self, b: str) -> tuple[str, ...]:
        self.require_type(b)
        if b == self.numeral_type and self.window is None:
            raise InfiniteConstructorFamily(f"type {b!r} has all numerals; give a window")
        return self._by_type[b]

    def is_numeral(self, k: str) -> bool:
        if self.numeral_type is None or not NUMERAL.match(k):
            return False
        if self.window is None:
            return True
        return self.window[0] <= int(k) <= self.window[1]

    def has_constructor(self, k: str) -> bool:
        return k in self.result_type or self.is_numeral(k)

    def result_of(self, k: str) -> str:
        if k in self.result_type:
            return self.result_type[k]
        if self.is_numeral(k):
            return self.numeral_type
        raise UnknownConstructor(k)

    def slots_of(self, k: str) -> tuple[Slot, ...]:
        if k in self.arg_slots:
            return self.arg_slots[k]
        if self.is_numeral(k):
            return ()
        raise UnknownConstructor(k)

    def arity(self, k: str) -> int:
        return len(self.slots_of(k))

    def with_window(self, lo: int, hi: int) -> Signature:
        """Restrict the numeral family to lo..hi, making every constructor explicit."""
        if self.numeral_type is None:
            return self
        if lo > hi:
            raise SignatureSyntaxError(f"empty numeral window {lo}:{hi}")
        base = [k for k in self.constructors if self.result_type[k] != self.numeral_type]
        nums = [str(i) for i in range(lo, hi + 1)]
        rt = {k: self.result_type[k] for k in base}
        slots = {k: self.arg_slots[k] for k in base}
        for n in nums:
            rt[n] = self.numeral_type
            slots[n] = ()
        return Signature(self.types, tuple(base) + tuple(nums), rt, slots,
                         self.numeral_type, (lo, hi), dict(self.declared_support))

    def named_constructors(self) -> tuple[str, ...]:
        """Constructors excluding the windowed numerals."""
        if self.window is None:
            return self.constructors
        return tuple(k for k in self.constructors if self.result_type[k] != self.numeral_type)


# text format

def _tokens(line: str) -> list[str]:
    return _TOKEN.findall(line)


def _split_alternatives(tokens: list[str]) -> list[list[str]]:
    alts: list[list[str]] = [[]]
    for tok in tokens:
        if tok == "|":
            alts.append([])
        else:
            alts[-1].append(tok)
    return alts


def _read_slots(items: list[str], k: str) -> list[Slot]:
    """Slot list after a constructor name; parenthesised types keep only their head."""
    slots: list[Slot] = []
    i = 0
    while i < len(items):
        tok = items[i]
        name = None
        if "@" in tok:
            name, _, tok = tok.partition("@")
            check_name(name, "slot name")
            if not tok:
                i += 1
                if i >= len(items):
                    raise SignatureSyntaxError(f"dangling slot name in {k}")
                tok = items[i]
        if tok == "(":
            depth, j = 1, i + 1
            if j >= len(items) or items[j] in ("(", ")"):
                raise SignatureSyntaxError(f"bad parenthesised type in {k}")
            head = items[j]
            while j < len(items) and depth:
                j += 1
                if j < len(items):
                    depth += {"(": 1, ")": -1}.get(items[j], 0)
            if depth:
                raise SignatureSyntaxError(f"unbalanced parentheses in {k}")
            tok, i = head, j
        elif tok == ")":
            raise SignatureSyntaxError(f"unbalanced parentheses in {k}")
        check_name(tok, "type")
        slots.append((name if name is not None else str(len(slots) + 1), tok))
        i += 1
    names = [s for s, _ in slots]
    if len(set(names)) != len(names):
        raise SignatureSyntaxError(f"repeated slot name in {k}")
    return slots


def _logical_lines(text: str) -> list[tuple[int, str]]:
    out: list[tuple[int, str]] = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("|") and out:
            out[-1] = (out[-1][0], out[-1][1] + " " + line)
        else:
            out.append((no, line))
    return out


def parse_signature(text: str) -> Signature:
    rules: list[tuple[str, tuple[str, ...] | None, list[str]]] = []
    declared_params: list[str] = []
    for no, line in _logical_lines(text):
        toks = _tokens(line)
        if toks[0] == "param":
            for p in toks[1:]:
                check_name(p, "parameter")
                if p in declared_params:
                    raise DuplicateType(f"line {no}: parameter {p!r} listed twice")
                declared_params.append(p)
            continue
        if toks.count("::=") != 1:
            raise SignatureSyntaxError(f"line {no}: expected exactly one '::='")
        at = toks.index("::=")
        lhs = [t for t in toks[:at] if t not in ("(", ")")]
        if not lhs:
            raise SignatureSyntaxError(f"line {no}: missing type name")
        b = check_name(lhs[0], "type")
        support = tuple(check_name(p, "parameter") for p in lhs[1:]) if len(toks[:at]) > 1 else None
        if rules and b in [r[0] for r in rules]:
            raise DuplicateType(f"line {no}: type {b!r} declared twice")
        rules.append((b, support, toks[at + 1:]))
    if not rules:
        raise EmptySignature("no rules")

    types = [r[0] for r in rules]
    constructors: list[str] = []
    result_type: dict[str, str] = {}
    arg_slots: dict[str, tuple[Slot, ...]] = {}
    numeral_type = None
    seen_rhs: list[str] = []
    declared_support: dict[str, tuple[str, ...]] = {}
    for b, support, rhs in rules:
        if support is not None:
            declared_support[b] = support
        if rhs == [INTEGERS]:
            if numeral_type is not None:
                raise DuplicateConstructor(f"numerals already belong to {numeral_type!r}")
            numeral_type = b
            continue
        for alt in _split_alternatives(rhs):
            if not alt:
                raise SignatureSyntaxError(f"empty alternative in rule for {b!r}")
            k = alt[0]
            if k.startswith("@"):
                raise SignatureSyntaxError(f"unknown builtin {k!r}")
            check_name(k, "constructor")
            if k in result_type:
                raise DuplicateConstructor(f"constructor {k!r} declared twice")
            slots = _read_slots(alt[1:], k)
            constructors.append(k)
            result_type[k] = b
            arg_slots[k] = tuple(slots)
            seen_rhs.extend(t for _, t in slots)
    if numeral_type is not None:
        clash = [k for k in constructors if NUMERAL.match(k)]
        if clash:
            raise DuplicateConstructor(f"constructor {clash[0]!r} collides with a numeral")

    for p in declared_params:
        if p in types:
            raise SignatureSyntaxError(f"declared parameter {p!r} has constructors")
    params = list(declared_params)
    for t in seen_rhs:
        if t not in types and t not in params:
            params.append(t)
    return Signature(tuple(types + params), tuple(constructors), result_type, arg_slots,
                     numeral_type, None, declared_support)


def format_signature(sig: Signature) -> str:
    lines = []
    for b in sig.types:
        if sig.is_parameter(b):
            continue
        lhs = b
        if b in sig.declared_support:
            lhs = "(" + " ".join((b,) + tuple(sig.declared_support[b])) + ")"
        if b == sig.numeral_type:
            lines.append(f"{lhs} ::= {INTEGERS}")
            continue
        alts = []
        for k in sig.ctors_of(b):
            parts = [k]
            for i, (s, t) in enumerate(sig.slots_of(k), 1):
                parts.append(t if s == str(i) else f"{s}@{t}")
            alts.append(" ".join(parts))
        lines.append(f"{lhs} ::= " + " | ".join(alts))
    if sig.parameters:
        lines.append("param " + " ".join(sig.parameters))
    return "\n".join(lines) + "\n"


# derived sets

def parameter_set(sig: Signature) -> frozenset[str]:
    return frozenset(sig.parameters)


def primitive_types(sig: Signature) -> frozenset[str]:
    out = set()
    for b in sig.types:
        if sig.is_parameter(b):
            continue
        if b == sig.numeral_type:
            out.add(b)
            continue
        if all(sig.arity(k) == 0 for k in sig.ctors_of(b)):
            out.add(b)
    return frozenset(out)


def is_extension(big: Signature, small: Signature) -> bool:
    if not set(small.types) <= set(big.types):
        return False
    for k in small.constructors:
        if not big.has_constructor(k):
            return False
        if big.result_of(k) != small.result_of(k) or big.slots_of(k) != small.slots_of(k):
            return False
    if small.numeral_type is not None and small.window is None:
        return big.numeral_type == small.numeral_type and big.window is None
    return True


def _restrict(sig: Signature, types: Iterable[str]) -> Signature:
    keep = set(types)
    ks = tuple(k for k in sig.constructors if sig.result_type[k] in keep)
    num = sig.numeral_type if sig.numeral_type in keep else None
    return Signature(
        tuple(b for b in sig.types if b in keep),
        ks,
        {k: sig.result_type[k] for k in ks},
        {k: sig.arg_slots[k] for k in ks},
        num,
        sig.window if num is not None else None,
        {b: ps for b, ps in sig.declared_support.items() if b in keep},
    )


def disjoint_components(sig: Signature) -> list[Signature]:
    parent = {b: b for b in sig.types}

    def find(b):
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        return b

    for k in sig.constructors:
        r = find(sig.result_type[k])
        for _, t in sig.arg_slots[k]:
            s = find(t)
            if s != r:
                parent[s] = r
    groups: dict[str, list[str]] = {}
    for b in sig.types:
        groups.setdefault(find(b), []).append(b)
    comps = []
    for members in sorted(groups.values(), key=lambda m: sig.types.index(m[0])):
        if all(sig.is_parameter(b) for b in members):
            continue
        comps.append(_restrict(sig, members))
    return comps


def sum_signatures(sigs: Iterable[Signature]) -> Signature:
    """Disjoint union; raises OverlappingSignatures on any shared name."""
    sigs = list(sigs)
    types: list[str] = []
    ks: list[str] = []
    rt: dict[str, str] = {}
    slots: dict[str, tuple[Slot, ...]] = {}
    num, window = None, None
    support: dict[str, tuple[str, ...]] = {}
    for s in sigs:
        overlap = (set(s.types) | set(s.constructors)) & (set(types) | set(ks))
        if overlap:
            raise OverlappingSignatures(f"shared names {sorted(overlap)}")
        if s.numeral_type is not None:
            if num is not None:
                raise OverlappingSignatures("two numeral families")
            num, window = s.numeral_type, s.window
        types.extend(s.types)
        ks.extend(s.constructors)
        rt.update(s.result_type)
        slots.update(s.arg_slots)
        support.update(s.declared_support)
    params = [b for b in types if b not in rt.values() and b != num]
    types = [b for b in types if b not in params] + params
    return Signature(tuple(types), tuple(ks), rt, slots, num, window, support)


def extend_with_constants(sig: Signature, constants: Mapping[str, str]) -> Signature:
    """Add one nullary constructor per entry name -> type (the variable constants of a free extension)."""
    ks = list(sig.constructors)
    rt = dict(sig.result_type)
    slots = dict(sig.arg_slots)
    for name, b in constants.items():
        check_name(name, "constructor")
        sig.require_type(b)
        if name in rt:
            raise DuplicateConstructor(name)
        ks.append(name)
        rt[name] = b
        slots[name] = ()
    return Signature(sig.types, tuple(ks), rt, slots, sig.numeral_type, sig.window,
                     dict(sig.declared_support))
