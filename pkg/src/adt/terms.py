"""Terms over a signature, prefix flattening and its inverse, enumeration and folds.

Text form is prefix notation: ``Cons 42 Cons -128 Nil``.  ``_`` is the bottom
of whatever type is expected, ``?v`` a variable.  Parentheses are accepted and
ignored.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Sequence, Union

from .errors import (
    ArityMismatch,
    BottomUnsupported,
    MissingOperation,
    NonInjectiveSpecifier,
    ReservedToken,
    TrailingTokens,
    TruncatedInput,
    TypeMismatch,
    UnboundVariable,
    UnknownToken,
)
from .sig import RESERVED, Signature

BOTTOM_TOKEN = "_"
VAR_PREFIX = "?"


@dataclass(frozen=True)
class Bottom:
    type: str

    def __str__(self):
        return BOTTOM_TOKEN


@dataclass(frozen=True)
class Variable:
    name: str
    type: Any

    def __str__(self):
        return VAR_PREFIX + self.name


@dataclass(frozen=True)
class Node:
    ctor: Any
    children: tuple = ()
    type: Any = None

    def __str__(self):
        return " ".join(flatten(self))


Term = Union[Bottom, Variable, Node]


def type_of(t: Term):
    return t.type


def build(sig: Signature, k: str, children: Sequence[Term]) -> Node:
    slots = sig.slots_of(k)
    if len(slots) != len(children):
        raise ArityMismatch(f"{k} takes {len(slots)} arguments, got {len(children)}")
    for i, ((_, t), c) in enumerate(zip(slots, children)):
        if c.type != t:
            raise TypeMismatch(f"{k} slot {i + 1} expects {t}, got {c.type}")
    return Node(k, tuple(children), sig.result_of(k))


def subterms(t: Term) -> Iterator[Term]:
    """All subterm occurrences, pre-order."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        if isinstance(s, Node):
            stack.extend(reversed(s.children))


def depth(t: Term) -> int:
    memo: dict[int, int] = {}
    for s in _postorder(t):
        if isinstance(s, Node) and s.children:
            memo[id(s)] = 1 + max(memo[id(c)] for c in s.children)
        else:
            memo[id(s)] = 0
    return memo[id(t)]


def _postorder(t: Term) -> list[Term]:
    out, stack = [], [(t, False)]
    while stack:
        s, done = stack.pop()
        if done or not isinstance(s, Node):
            out.append(s)
            continue
        stack.append((s, True))
        for c in reversed(s.children):
            stack.append((c, False))
    return out


# specifiers

@dataclass(frozen=True)
class Specifier:
    """Constructor -> token map.  Numerals always spell themselves."""

    sig: Signature
    tokens: Mapping[str, str] = field(default_factory=dict)
    locally_injective: bool = True

    @classmethod
    def identity(cls, sig: Signature) -> Specifier:
        return cls(sig, {k: k for k in sig.constructors})

    @classmethod
    def from_map(cls, sig: Signature, mapping: Mapping[str, str]) -> Specifier:
        tokens = {k: k for k in sig.constructors}
        tokens.update(mapping)
        for tok in tokens.values():
            if tok in RESERVED or tok.startswith(VAR_PREFIX) or not tok or any(c.isspace() for c in tok):
                raise ReservedToken(f"token {tok!r} cannot be used")
        for b in sig.types:
            if b == sig.numeral_type and sig.window is None:
                continue
            seen: dict[str, str] = {}
            for k in sig.ctors_of(b):
                tok = tokens[k]
                if tok in seen:
                    raise NonInjectiveSpecifier(f"type {b}: {seen[tok]} and {k} share token {tok!r}")
                seen[tok] = k
        return cls(sig, tokens)

    def token(self, k: str) -> str:
        return self.tokens.get(k, k)

    def resolve(self, b: str, tok: str) -> str | None:
        """Constructor of type b spelled tok, if any."""
        table = self._reverse().get(b, {})
        if tok in table:
            return table[tok]
        if b == self.sig.numeral_type and self.sig.is_numeral(tok) and tok not in self.tokens:
            return tok
        return None

    def _reverse(self):
        cache = self.__dict__.get("_rev")
        if cache is None:
            cache = {}
            for k in self.sig.constructors:
                cache.setdefault(self.sig.result_of(k), {})[self.token(k)] = k
            object.__setattr__(self, "_rev", cache)
        return cache

    def is_global(self) -> bool:
        toks = [self.token(k) for k in self.sig.constructors]
        return len(set(toks)) == len(toks)


def _spec(sig: Signature, spec: Specifier | None) -> Specifier:
    return spec if spec is not None else Specifier.identity(sig)


def flatten(t: Term, spec: Specifier | None = None) -> list[str]:
    out = []
    for s in subterms(t):
        if isinstance(s, Bottom):
            out.append(BOTTOM_TOKEN)
        elif isinstance(s, Variable):
            out.append(VAR_PREFIX + s.name)
        else:
            out.append(spec.token(s.ctor) if spec is not None else str(s.ctor))
    return out


def show(t: Term, spec: Specifier | None = None) -> str:
    return " ".join(flatten(t, spec))


def tokenize(text: str) -> list[str]:
    return text.replace("(", " ").replace(")", " ").split()


def parse(tokens: Sequence[str] | str, expected: str | None, sig: Signature,
          spec: Specifier | None = None, *, bottoms: bool = True, variables: bool = True) -> Term:
    """Single-pass recursive descent, run on an explicit stack."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    spec = _spec(sig, spec)
    if expected is None:
        expected = _infer_root(tokens, sig, spec)
    sig.require_type(expected)
    pos = 0
    # frames: [ctor, result type, slot types, children so far]
    stack: list[list] = []
    result: Term | None = None
    want = expected
    while True:
        if pos >= len(tokens):
            raise TruncatedInput(f"input ended while reading a {want}")
        tok = tokens[pos]
        pos += 1
        if tok == BOTTOM_TOKEN and bottoms:
            leaf: Term | None = Bottom(want)
        elif tok.startswith(VAR_PREFIX) and variables and len(tok) > 1:
            leaf = Variable(tok[1:], want)
        else:
            k = spec.resolve(want, tok)
            if k is None:
                raise UnknownToken(want, tok)
            slots = sig.slots_of(k)
            if slots:
                stack.append([k, want, [t for _, t in slots], []])
                want = slots[0][1]
                continue
            leaf = Node(k, (), want)
        # close finished frames
        while stack:
            frame = stack[-1]
            frame[3].append(leaf)
            if len(frame[3]) < len(frame[2]):
                want = frame[2][len(frame[3])]
                break
            stack.pop()
            leaf = Node(frame[0], tuple(frame[3]), frame[1])
        else:
            result = leaf
            break
    if pos != len(tokens):
        raise TrailingTokens(f"{len(tokens) - pos} tokens left after a complete {expected}")
    return result


def _infer_root(tokens: Sequence[str], sig: Signature, spec: Specifier) -> str:
    if not tokens:
        raise TruncatedInput("empty input")
    tok = tokens[0]
    hits = sorted({b for b in sig.types if spec.resolve(b, tok) is not None}, key=sig.types.index)
    if len(hits) != 1:
        raise UnknownToken("?", tok)
    return hits[0]


# enumeration

def enumerate_terms(sig: Signature, type_name: str, max_depth: int, *, bottoms: bool = False,
                    variables: Mapping[str, Sequence[str]] | None = None) -> list[Term]:
    """All terms of the type with depth <= max_depth: depth-major, then declaration order."""
    return list(_levels(sig, max_depth, bottoms, variables or {})(type_name))


def _levels(sig: Signature, max_depth: int, bottoms: bool, variables: Mapping[str, Sequence[str]]):
    exact: dict[tuple[str, int], list[Term]] = {}

    def at(b: str, d: int) -> list[Term]:
        key = (b, d)
        if key in exact:
            return exact[key]
        out: list[Term] = []
        ctors = () if sig.is_parameter(b) else sig.ctors_of(b)
        if d == 0:
            if bottoms:
                out.append(Bottom(b))
            out.extend(Variable(v, b) for v in variables.get(b, ()))
            out.extend(Node(k, (), b) for k in ctors if sig.arity(k) == 0)
        else:
            for k in ctors:
                slots = [t for _, t in sig.slots_of(k)]
                if not slots:
                    continue
                pools = [upto(t, d - 1) for t in slots]
                for combo in itertools.product(*pools):
                    if max(depth_of[id(c)] for c in combo) == d - 1:
                        node = Node(k, combo, b)
                        out.append(node)
        for t in out:
            depth_of[id(t)] = d
        exact[key] = out
        return out

    def upto(b: str, d: int) -> list[Term]:
        out: list[Term] = []
        for i in range(d + 1):
            out.extend(at(b, i))
        return out

    depth_of: dict[int, int] = {}
    return lambda b: upto(sig.require_type(b), max_depth)


def count_terms(sig: Signature, type_name: str, max_depth: int, *, bottoms: bool = False,
                variables: Mapping[str, Sequence[str]] | None = None) -> int:
    """Number of terms enumerate_terms would return, without building them."""
    variables = variables or {}
    upto: dict[str, int] = {}
    for d in range(max_depth + 1):
        nxt = {}
        for b in sig.types:
            n = (1 if bottoms else 0) + len(variables.get(b, ()))
            if not sig.is_parameter(b):
                for k in sig.ctors_of(b):
                    slots = [t for _, t in sig.slots_of(k)]
                    if not slots:
                        n += 1
                    elif d > 0:
                        p = 1
                        for t in slots:
                            p *= upto[t]
                        n += p
            nxt[b] = n
        upto = nxt
    return upto[type_name]


# substitution

def substitute(t: Term, env: Mapping[str, Term]) -> Term:
    memo: dict[int, Term] = {}
    for s in _postorder(t):
        if isinstance(s, Variable):
            if s.name not in env:
                raise UnboundVariable(s.name)
            r = env[s.name]
            if r.type != s.type:
                raise TypeMismatch(f"?{s.name} has type {s.type}, replacement has {r.type}")
            memo[id(s)] = r
        elif isinstance(s, Node) and s.children:
            memo[id(s)] = Node(s.ctor, tuple(memo[id(c)] for c in s.children), s.type)
        else:
            memo[id(s)] = s
    return memo[id(t)]


def variables_of(t: Term) -> list[Variable]:
    seen, out = set(), []
    for s in subterms(t):
        if isinstance(s, Variable) and s not in seen:
            seen.add(s)
            out.append(s)
    return out


# folds

@dataclass
class Callbacks:
    """Target algebra given by host functions.

    ``ops`` maps constructor names to functions of the child-value list; the
    key ``"@integers"`` handles numerals, receiving the int.  ``bottom``, if
    given, maps a type name to its bottom value.
    """

    ops: Mapping[str, Callable[[list], Any]]
    env: Mapping[str, Any] = field(default_factory=dict)
    bottom: Callable[[str], Any] | None = None
    keep_variables: bool = False

    def apply(self, k: str, args: list):
        f = self.ops.get(k)
        if f is not None:
            return f(args)
        num = self.ops.get("@integers")
        if num is not None and _is_int(k):
            return num(int(k))
        raise MissingOperation(k)

    def bottom_of(self, b: str):
        if self.bottom is None:
            raise BottomUnsupported(b)
        return self.bottom(b)

    def variable(self, v: Variable):
        if self.keep_variables:
            return v
        if v.name not in self.env:
            raise UnboundVariable(v.name)
        return self.env[v.name]


def _is_int(k: str) -> bool:
    try:
        int(k)
        return True
    except ValueError:
        return False


class AlgebraTarget:
    """Adapter presenting a FiniteAlgebra as a fold target."""

    def __init__(self, alg, env: Mapping[str, Any] | None = None):
        self.alg = alg
        self.env = dict(env or {})

    def apply(self, k: str, args: list):
        table = self.alg.tables.get(k)
        if table is None:
            raise MissingOperation(k)
        key = tuple(args)
        if key not in table:
            raise MissingOperation(f"{k}{key} is not defined")
        return table[key]

    def bottom_of(self, b: str):
        if not self.alg.bottoms or b not in self.alg.bottoms:
            raise BottomUnsupported(b)
        return self.alg.bottoms[b]

    def variable(self, v: Variable):
        if v.name not in self.env:
            raise UnboundVariable(v.name)
        return self.env[v.name]


def _target(target, env):
    if isinstance(target, (Callbacks, AlgebraTarget)):
        return target
    return AlgebraTarget(target, env)


def catamorphism(t: Term, target, env: Mapping[str, Any] | None = None):
    """Structural recursion (post-order) into the target."""
    tg = _target(target, env)
    vals: dict[int, Any] = {}
    for s in _postorder(t):
        vals[id(s)] = _step(s, tg, lambda c: vals[id(c)])
    return vals[id(t)]


def catamorphism_by_depth(t: Term, target, env: Mapping[str, Any] | None = None):
    """Evaluate distinct subterms level by level, depth 0 first."""
    tg = _target(target, env)
    levels: dict[int, set] = {}
    for s in set(subterms(t)):
        levels.setdefault(depth(s), set()).add(s)
    value: dict[Term, Any] = {}
    for d in sorted(levels):
        for s in levels[d]:
            value[s] = _step(s, tg, value.__getitem__)
    return value[t]


def _step(s: Term, tg, child):
    if isinstance(s, Bottom):
        return tg.bottom_of(s.type)
    if isinstance(s, Variable):
        return tg.variable(s)
    return tg.apply(s.ctor, [child(c) for c in s.children])


def term_algebra(sig: Signature) -> Callbacks:
    """Constructors as callbacks: folding into it rebuilds the input."""
    ops = {k: (lambda k: lambda args: Node(k, tuple(args), sig.result_of(k)))(k)
           for k in sig.constructors}
    if sig.numeral_type is not None:
        ops["@integers"] = lambda n: Node(str(n), (), sig.numeral_type)
    return Callbacks(ops, bottom=Bottom, keep_variables=True)
