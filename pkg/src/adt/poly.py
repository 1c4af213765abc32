"""Supports, polymorphic types and operators, and instantiation of parameterised algebras.

A polymorphic type is either a type variable or a base type applied to one
argument per parameter in its support: ``lp atom (list v) (pair v int)``.
Arguments are keyed by parameter name and printed in declaration order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence, Union

from .errors import (
    AdtError,
    DeclaredSupportInvalid,
    PolyTypeMismatch,
    PolyTypeSyntaxError,
    PropagatedOracleError,
    TrailingTokens,
    TruncatedInput,
    UnknownToken,
    WrongArgKeys,
)
from .finalg import FiniteAlgebra
from .report import Verdict
from .sig import Signature, disjoint_components
from .terms import BOTTOM_TOKEN, VAR_PREFIX, Bottom, Specifier, Variable, tokenize

Support = dict


def minimal_support(sig: Signature) -> Support:
    """Least fixpoint of slot inclusion, starting from {a} for each parameter."""
    sup: dict[str, set] = {b: ({b} if sig.is_parameter(b) else set()) for b in sig.types}
    changed = True
    while changed:
        changed = False
        for k in sig.constructors:
            b = sig.result_of(k)
            for _, t in sig.slots_of(k):
                if not sup[t] <= sup[b]:
                    sup[b] |= sup[t]
                    changed = True
    order = {a: i for i, a in enumerate(sig.parameters)}
    out = {b: tuple(sorted(s, key=order.__getitem__)) for b, s in sup.items()}
    check_declared_support(sig, out)
    return out


def check_support(sig: Signature, support: Mapping[str, Sequence[str]]) -> Verdict:
    for a in sig.parameters:
        if tuple(support.get(a, ())) != (a,):
            return Verdict(False, ["parameter", a])
    for k in sig.constructors:
        b = sig.result_of(k)
        for s, t in sig.slots_of(k):
            if not set(support[t]) <= set(support[b]):
                return Verdict(False, [k, s, t, b])
    return Verdict(True)


def check_declared_support(sig: Signature, minimal: Mapping[str, Sequence[str]]):
    """Declared entries override the minimal ones; the result must still be a support."""
    if not sig.declared_support:
        return
    merged = dict(minimal)
    for b, ps in sig.declared_support.items():
        for p in ps:
            if not sig.is_parameter(p):
                raise DeclaredSupportInvalid(f"{b}: {p!r} is not a parameter")
        merged[b] = tuple(ps)
    verdict = check_support(sig, merged)
    if not verdict:
        k, s, t, b = verdict.witness
        raise DeclaredSupportInvalid(f"slot {s} of {k} has type {t} whose parameters "
                                     f"{list(merged[t])} are not all in the support of {b}")


# polymorphic types

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    base: str
    args: tuple[tuple[str, "PolyType"], ...] = ()

    @property
    def arg_map(self) -> dict[str, "PolyType"]:
        return dict(self.args)


PolyType = Union[Var, App]


@dataclass(frozen=True)
class PolyOp:
    base: str
    args: tuple[tuple[str, PolyType], ...] = ()

    @property
    def arg_map(self) -> dict[str, PolyType]:
        return dict(self.args)


@dataclass(frozen=True)
class PolyNode:
    op: PolyOp
    children: tuple = ()
    type: PolyType | None = None


class PolySignature:
    """The polymorphic signature generated by a signature and a support."""

    def __init__(self, sig: Signature, support: Mapping[str, Sequence[str]] | None = None):
        self.sig = sig
        self.support = dict(support) if support is not None else minimal_support(sig)
        if support is not None:
            v = check_support(sig, self.support)
            if not v:
                raise DeclaredSupportInvalid(str(v.witness))

    # types

    def _keyed(self, keys: Sequence[str], args: Mapping[str, PolyType], what: str):
        if set(args) != set(keys):
            raise WrongArgKeys(f"{what} needs {list(keys)}, got {sorted(args)}")
        return tuple((a, args[a]) for a in keys)

    def make_polytype(self, b: str, args: Mapping[str, PolyType] | None = None) -> App:
        self.sig.require_type(b)
        if self.sig.is_parameter(b):
            raise WrongArgKeys(f"{b} is a parameter, not a base type")
        return App(b, self._keyed(self.support[b], args or {}, b))

    def decompose(self, pt: PolyType):
        """(base, args) for applications; the Var itself for variables."""
        if isinstance(pt, Var):
            return pt
        return pt.base, pt.arg_map

    def format(self, pt: PolyType | PolyOp, nested: bool = False) -> str:
        if isinstance(pt, Var):
            return pt.name
        head = pt.base
        if not pt.args:
            return head
        text = " ".join([head] + [self.format(t, True) for _, t in pt.args])
        return f"({text})" if nested else text

    def parse_polytype(self, text: str) -> PolyType:
        toks = text.replace("(", " ( ").replace(")", " ) ").split()
        pt, pos = self._read_type(toks, 0)
        if pos != len(toks):
            raise PolyTypeSyntaxError(f"unexpected {toks[pos]!r} in {text!r}")
        return pt

    def _read_type(self, toks: list[str], pos: int):
        if pos >= len(toks):
            raise PolyTypeSyntaxError("type ended early")
        tok = toks[pos]
        if tok == "(":
            pt, pos = self._read_type(toks, pos + 1)
            if pos >= len(toks) or toks[pos] != ")":
                raise PolyTypeSyntaxError("missing ')'")
            return pt, pos + 1
        if tok == ")":
            raise PolyTypeSyntaxError("unexpected ')'")
        if tok in self.sig.types and not self.sig.is_parameter(tok):
            args = {}
            pos += 1
            for a in self.support[tok]:
                args[a], pos = self._read_type(toks, pos)
            return App(tok, tuple((a, args[a]) for a in self.support[tok])), pos
        return Var(tok), pos + 1

    def parse_op(self, text: str) -> PolyOp:
        toks = text.replace("(", " ( ").replace(")", " ) ").split()
        if not toks or not self.sig.has_constructor(toks[0]):
            raise PolyTypeSyntaxError(f"no constructor at start of {text!r}")
        k = toks[0]
        b = self.sig.result_of(k)
        pos, args = 1, {}
        for a in self.support[b]:
            args[a], pos = self._read_type(toks, pos)
        if pos != len(toks):
            raise PolyTypeSyntaxError(f"unexpected {toks[pos]!r} in {text!r}")
        return self.instantiate(k, args)

    # operators

    def instantiate(self, k: str, u: Mapping[str, PolyType]) -> PolyOp:
        b = self.sig.result_of(k)
        return PolyOp(k, self._keyed(self.support[b], u, k))

    @staticmethod
    def omega(op: PolyOp) -> str:
        return op.base

    def apply_u(self, t: str, u: Mapping[str, PolyType]) -> PolyType:
        """The type map induced by an assignment u: parameters through u, others rebuilt."""
        if self.sig.is_parameter(t):
            return u[t]
        return App(t, tuple((a, u[a]) for a in self.support[t]))

    def op_signature(self, op: PolyOp):
        u = op.arg_map
        dom = [(s, self.apply_u(t, u)) for s, t in self.sig.slots_of(op.base)]
        cod = self.apply_u(self.sig.result_of(op.base), u)
        return dom, cod

    def format_type_of(self, op: PolyOp) -> str:
        """Arrow form of the operator's typing; domain types are parenthesized only in a product."""
        dom, cod = self.op_signature(op)
        if len(dom) == 1:
            left = self.format(dom[0][1])
        else:
            left = " ".join(self.format(t, True) for _, t in dom) or "ε"
        return f"{left} → {self.format(cod)}"

    def format_op_signature(self, op: PolyOp) -> str:
        return f"{self.format(op)} : {self.format_type_of(op)}"

    def constructors_of(self, pt: PolyType) -> list[PolyOp]:
        if isinstance(pt, Var):
            return []
        return [self.instantiate(k, pt.arg_map) for k in self.sig.ctors_of(pt.base)]

    # enumeration

    def enumerate_polytypes(self, max_depth: int, variables: Sequence[str],
                            bases: Sequence[str] | None = None) -> Iterator[PolyType]:
        """Depth-major: variables and argument-free bases at depth 0, then applications."""
        bases = [b for b in (bases or self.sig.types) if not self.sig.is_parameter(b)]
        levels: list[list[PolyType]] = []
        for d in range(max_depth + 1):
            cur: list[PolyType] = []
            if d == 0:
                cur.extend(Var(v) for v in variables)
                cur.extend(App(b) for b in bases if not self.support[b])
            else:
                below = [t for lvl in levels for t in lvl]
                prev = set(levels[-1])
                for b in bases:
                    keys = self.support[b]
                    if not keys:
                        continue
                    for combo in itertools.product(below, repeat=len(keys)):
                        if any(c in prev for c in combo):
                            cur.append(App(b, tuple(zip(keys, combo))))
            levels.append(cur)
            yield from cur

    # terms

    def poly_parse(self, tokens, expected: PolyType, spec: Specifier | None = None):
        if isinstance(tokens, str):
            tokens = tokenize(tokens)
        spec = spec if spec is not None else Specifier.identity(self.sig)
        pos = 0

        def read(want: PolyType, where: str):
            nonlocal pos
            if pos >= len(tokens):
                raise TruncatedInput(f"input ended while reading {self.format(want)}")
            tok = tokens[pos]
            pos += 1
            if tok == BOTTOM_TOKEN:
                return Bottom(want)
            if tok.startswith(VAR_PREFIX) and len(tok) > 1:
                return Variable(tok[1:], want)
            if isinstance(want, Var):
                raise PolyTypeMismatch(f"{where}: type variable {want.name} has no constructor {tok!r}")
            k = spec.resolve(want.base, tok)
            if k is None:
                if any(spec.resolve(b, tok) for b in self.sig.types):
                    raise PolyTypeMismatch(f"{where}: {tok!r} does not build a {self.format(want)}")
                raise UnknownToken(self.format(want), tok)
            op = self.instantiate(k, want.arg_map)
            dom, cod = self.op_signature(op)
            kids = []
            for (s, t), (_, decl) in zip(dom, self.sig.slots_of(k)):
                label = f"slot {decl}" if self.sig.is_parameter(decl) else f"slot {s} of {k}"
                kids.append(read(t, label))
            return PolyNode(op, tuple(kids), cod)

        term = read(expected, "root")
        if pos != len(tokens):
            raise TrailingTokens(f"{len(tokens) - pos} tokens left")
        return term

    def poly_flatten(self, t, spec: Specifier | None = None) -> list[str]:
        out = []
        stack = [t]
        while stack:
            s = stack.pop()
            if isinstance(s, Bottom):
                out.append(BOTTOM_TOKEN)
            elif isinstance(s, Variable):
                out.append(VAR_PREFIX + s.name)
            else:
                k = self.omega(s.op)
                out.append(spec.token(k) if spec is not None else k)
                stack.extend(reversed(s.children))
        return out

    def poly_enumerate(self, pt: PolyType, max_depth: int) -> list:
        """Polymorphic terms of type pt; each type variable t contributes the variable ?t."""
        memo: dict[tuple, list] = {}

        def at(want: PolyType, d: int) -> list:
            key = (want, d)
            if key in memo:
                return memo[key]
            out = []
            if isinstance(want, Var):
                if d == 0:
                    out.append(Variable(want.name, want))
            else:
                for op in self.constructors_of(want):
                    dom, cod = self.op_signature(op)
                    if not dom:
                        if d == 0:
                            out.append(PolyNode(op, (), cod))
                        continue
                    if d == 0:
                        continue
                    pools = [[(e, i) for i in range(d) for e in at(t, i)] for _, t in dom]
                    for combo in itertools.product(*pools):
                        if max(i for _, i in combo) == d - 1:
                            out.append(PolyNode(op, tuple(e for e, _ in combo), cod))
            memo[key] = out
            return out

        return [t for d in range(max_depth + 1) for t in at(pt, d)]


# classification

@dataclass
class PolyClassification:
    simple: bool
    semi_simple: bool
    components: list = field(default_factory=list)


def _is_simple(sig: Signature) -> bool:
    sup = minimal_support(sig)
    params = set(sig.parameters)
    return all(set(sup[b]) == params for b in sig.types if not sig.is_parameter(b))


def classify_poly(sig: Signature) -> PolyClassification:
    comps = []
    for c in disjoint_components(sig):
        comps.append({"types": list(c.types), "parameters": list(c.parameters), "simple": _is_simple(c)})
    return PolyClassification(_is_simple(sig), all(c["simple"] for c in comps), comps)


# parameterised algebras

Assignment = Mapping[str, tuple]
Family = Callable[[Assignment], FiniteAlgebra]


def check_compatibility(family: Family, sig: Signature, support: Mapping[str, Sequence[str]],
                        probes: Sequence[Assignment]) -> Verdict:
    """Sampled check: probes agreeing on a type's support give the same carrier and operations."""
    algs = []
    for V in probes:
        try:
            algs.append(family(V))
        except AdtError:
            raise
        except Exception as exc:
            raise PropagatedOracleError(str(exc)) from exc
    for (i, Vi), (j, Vj) in itertools.combinations(enumerate(probes), 2):
        for b in sig.types:
            if sig.is_parameter(b):
                continue
            if all(tuple(Vi[a]) == tuple(Vj[a]) for a in support[b]):
                if algs[i].carriers[b] != algs[j].carriers[b]:
                    return Verdict(False, {"type": b, "probes": [i, j]})
                for k in sig.ctors_of(b):
                    if algs[i].tables[k] != algs[j].tables[k]:
                        return Verdict(False, {"constructor": k, "probes": [i, j]})
    return Verdict(True, {"sampled": len(probes)})


class InstantiationEngine:
    """Carriers and operations of the polymorphic algebra, built by memoized unfolding."""

    def __init__(self, family: Family, psig: PolySignature, U: Mapping[str, tuple]):
        self.family = family
        self.psig = psig
        self.U = dict(U)
        self._memo: dict = {}
        self._algs: dict = {}
        self.hits = 0
        self.misses = 0

    def _assignment(self, pt: App) -> dict:
        V = {a: () for a in self.psig.sig.parameters}
        for a, t in pt.args:
            V[a] = self.carrier(t)
        return V

    def algebra(self, pt: App) -> FiniteAlgebra:
        V = self._assignment(pt)
        key = tuple(sorted(V.items()))
        if key not in self._algs:
            try:
                self._algs[key] = self.family(V)
            except Exception as exc:
                raise PropagatedOracleError(f"{self.psig.format(pt)}: {exc}") from exc
        return self._algs[key]

    def carrier(self, pt: PolyType) -> tuple:
        if pt in self._memo:
            self.hits += 1
            return self._memo[pt]
        self.misses += 1
        if isinstance(pt, Var):
            if pt.name not in self.U:
                raise PropagatedOracleError(f"no carrier for type variable {pt.name}")
            out = tuple(self.U[pt.name])
        else:
            out = self.algebra(pt).carriers[pt.base]
        self._memo[pt] = out
        return out

    def operation(self, op: PolyOp) -> dict:
        _, cod = self.psig.op_signature(op)
        return self.algebra(cod).tables[op.base]


def instantiation_engine(family: Family, psig: PolySignature, pt: PolyType,
                         U: Mapping[str, tuple]) -> tuple:
    return InstantiationEngine(family, psig, U).carrier(pt)
