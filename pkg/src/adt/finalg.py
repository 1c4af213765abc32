"""Finite algebras given by explicit tables.

File format::

    carrier nat: 0 1
    bottom nat: ⊥          # optional; the element is added to the carrier
    op Zero = 0
    op Succ(0) = 1
    partial                 # tables may omit tuples
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .config import budget as default_budget
from .errors import (
    AlgebraFormatError,
    BudgetExceeded,
    Diverged,
    IncompleteTable,
    InfiniteConstructorFamily,
    OverlappingSignatures,
    UnknownConstructor,
)
from .report import Verdict
from .sig import Signature, sum_signatures

Table = Mapping[tuple, str]


@dataclass(frozen=True)
class FiniteAlgebra:
    sig: Signature
    carriers: Mapping[str, tuple[str, ...]]
    tables: Mapping[str, Table]
    bottoms: Mapping[str, str] | None = None
    partial: bool = False

    def __post_init__(self):
        sig = self.sig
        if not sig.is_finite:
            raise InfiniteConstructorFamily("finite algebras need a numeral window")
        carriers = {b: tuple(self.carriers.get(b, ())) for b in sig.types}
        extra = set(self.carriers) - set(sig.types)
        if extra:
            raise AlgebraFormatError(f"carriers for unknown types {sorted(extra)}")
        for b, xs in carriers.items():
            if len(set(xs)) != len(xs):
                raise AlgebraFormatError(f"carrier {b} repeats an element")
        object.__setattr__(self, "carriers", carriers)
        sets = {b: set(xs) for b, xs in carriers.items()}
        tables = {}
        for k in self.tables:
            if k not in sig.constructors:
                raise UnknownConstructor(k)
        for k in sig.constructors:
            slots = [t for _, t in sig.slots_of(k)]
            b = sig.result_of(k)
            table = dict(self.tables.get(k, {}))
            for args, r in table.items():
                if len(args) != len(slots):
                    raise AlgebraFormatError(f"{k}{args}: wrong number of arguments")
                for a, t in zip(args, slots):
                    if a not in sets[t]:
                        raise AlgebraFormatError(f"{k}{args}: {a!r} is not in carrier {t}")
                if r not in sets[b]:
                    raise AlgebraFormatError(f"{k}{args} = {r!r} is not in carrier {b}")
            if not self.partial:
                n = 1
                for t in slots:
                    n *= len(carriers[t])
                if len(table) != n:
                    missing = next(a for a in itertools.product(*(carriers[t] for t in slots))
                                   if a not in table)
                    raise IncompleteTable(f"{k}{missing} has no value")
            tables[k] = table
        object.__setattr__(self, "tables", tables)
        if self.bottoms is not None:
            bots = dict(self.bottoms)
            for b, e in bots.items():
                if b not in sets or e not in sets[b]:
                    raise AlgebraFormatError(f"bottom {e!r} is not in carrier {b}")
            if set(bots) != set(sig.types):
                raise AlgebraFormatError("a bottomed algebra needs a bottom for every type")
            object.__setattr__(self, "bottoms", bots)

    @property
    def is_bottomed(self) -> bool:
        return self.bottoms is not None

    def size(self) -> int:
        return sum(len(xs) for xs in self.carriers.values())

    def slot_types(self, k: str) -> list[str]:
        return [t for _, t in self.sig.slots_of(k)]

    def arg_tuples(self, k: str, family: Mapping[str, Iterable[str]] | None = None):
        fam = family if family is not None else self.carriers
        return itertools.product(*(list(_ordered(self.carriers[t], fam[t])) for t in self.slot_types(k)))

    def is_bottom(self, b: str, x: str) -> bool:
        return self.bottoms is not None and self.bottoms[b] == x

    def non_bottom(self, b: str) -> tuple[str, ...]:
        return tuple(x for x in self.carriers[b] if not self.is_bottom(b, x))


def _ordered(carrier, subset):
    s = set(subset)
    return (x for x in carrier if x in s)


# text format

_OP = re.compile(r"op\s+([^\s(=]+)\s*(?:\(([^)]*)\))?\s*=\s*(\S+)\s*\Z")
_DECL = re.compile(r"(carrier|bottom)\s+(\S+?)\s*:\s*(.*)\Z")


def load_algebra(text: str, sig: Signature) -> FiniteAlgebra:
    carriers: dict[str, list[str]] = {}
    bottoms: dict[str, str] = {}
    tables: dict[str, dict[tuple, str]] = {}
    partial = False
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "partial":
            partial = True
            continue
        m = _DECL.match(line)
        if m:
            kind, b, rest = m.groups()
            if b not in sig.types:
                raise AlgebraFormatError(f"line {no}: unknown type {b!r}")
            elems = rest.split()
            if kind == "carrier":
                xs = carriers.setdefault(b, [])
                for e in elems:
                    if e in xs:
                        raise AlgebraFormatError(f"line {no}: {e!r} listed twice in carrier {b}")
                    xs.append(e)
            else:
                if len(elems) != 1:
                    raise AlgebraFormatError(f"line {no}: one bottom per type")
                bottoms[b] = elems[0]
            continue
        m = _OP.match(line)
        if m:
            k, args, r = m.groups()
            if k not in sig.constructors:
                raise AlgebraFormatError(f"line {no}: unknown constructor {k!r}")
            key = tuple(a.strip() for a in args.split(",")) if args and args.strip() else ()
            table = tables.setdefault(k, {})
            if key in table and table[key] != r:
                raise AlgebraFormatError(f"line {no}: {k}{key} defined twice")
            table[key] = r
            continue
        raise AlgebraFormatError(f"line {no}: cannot read {line!r}")
    for b, e in bottoms.items():
        xs = carriers.setdefault(b, [])
        if e not in xs:
            xs.insert(0, e)
    return FiniteAlgebra(sig, {b: tuple(xs) for b, xs in carriers.items()}, tables,
                         bottoms or None, partial)


def dump_algebra(alg: FiniteAlgebra) -> str:
    lines = []
    for b in alg.sig.types:
        lines.append(f"carrier {b}: " + " ".join(alg.carriers[b]) if alg.carriers[b] else f"carrier {b}:")
        if alg.bottoms is not None:
            lines.append(f"bottom {b}: {alg.bottoms[b]}")
    if alg.partial:
        lines.append("partial")
    for k in alg.sig.constructors:
        for args in alg.arg_tuples(k):
            if args in alg.tables[k]:
                head = f"op {k}({', '.join(args)})" if args else f"op {k}"
                lines.append(f"{head} = {alg.tables[k][args]}")
    return "\n".join(lines) + "\n"


# families and closure

class Family(dict):
    """Type -> frozenset of elements.  ``approximate`` is set when a partial table was hit."""

    approximate = False


def full_family(alg: FiniteAlgebra) -> Family:
    return Family({b: frozenset(xs) for b, xs in alg.carriers.items()})


def _seed(alg: FiniteAlgebra, U: Mapping[str, Iterable[str]] | None):
    fam = {b: set() for b in alg.sig.types}
    for b, xs in (U or {}).items():
        for x in xs:
            if x not in alg.carriers[b]:
                raise AlgebraFormatError(f"{x!r} is not in carrier {b}")
            fam[b].add(x)
    return fam


def invariant_closure(alg: FiniteAlgebra, U: Mapping[str, Iterable[str]] | None = None) -> Family:
    """Least invariant family containing U, by iterating constructor images."""
    fam = _seed(alg, U)
    for _ in range(alg.size() + 1):
        grown = False
        for k in alg.sig.constructors:
            b = alg.sig.result_of(k)
            slots = alg.slot_types(k)
            for args, r in alg.tables[k].items():
                if r not in fam[b] and all(a in fam[t] for a, t in zip(args, slots)):
                    fam[b].add(r)
                    grown = True
        if not grown:
            break
    out = Family({b: frozenset(xs) for b, xs in fam.items()})
    if alg.partial:
        out.approximate = any(a not in alg.tables[k]
                              for k in alg.sig.constructors for a in alg.arg_tuples(k, out))
    return out


def is_invariant(alg: FiniteAlgebra, fam: Mapping[str, Iterable[str]]) -> bool:
    sets = {b: set(fam.get(b, ())) for b in alg.sig.types}
    for k in alg.sig.constructors:
        b = alg.sig.result_of(k)
        slots = alg.slot_types(k)
        for args, r in alg.tables[k].items():
            if all(a in sets[t] for a, t in zip(args, slots)) and r not in sets[b]:
                return False
    return True


# classification

@dataclass
class Classification:
    approximate: bool
    bottomed: bool
    minimal: bool
    unambiguous: bool
    regular: bool
    initial: bool
    free: bool
    strictly_regular: bool | None = None
    strictly_unambiguous: bool | None = None
    regular_bottomed: bool | None = None
    natural_invariant: bool | None = None
    v_minimal: bool | None = None
    v_initial: bool | None = None
    witnesses: list = field(default_factory=list)

    def witness(self, prop: str):
        """Witness recorded against a failed property, or None."""
        return next((w for name, w in self.witnesses if name == prop), None)


def _images(alg: FiniteAlgebra, k: str) -> dict[str, list[tuple]]:
    inv: dict[str, list[tuple]] = {}
    for args in alg.arg_tuples(k):
        if args in alg.tables[k]:
            inv.setdefault(alg.tables[k][args], []).append(args)
    return inv


def _injectivity(alg: FiniteAlgebra, k: str, ignore: set = frozenset()):
    for r, pre in _images(alg, k).items():
        if r not in ignore and len(pre) > 1:
            return [k, list(pre[0]), list(pre[1]), r]
    return None


def _overlap(alg: FiniteAlgebra, b: str, ignore: set = frozenset()):
    owner: dict[str, str] = {}
    for k in alg.sig.ctors_of(b):
        for r in _images(alg, k):
            if r in ignore:
                continue
            if r in owner and owner[r] != k:
                return [b, owner[r], k, r]
            owner.setdefault(r, k)
    return None


def _regular_wrt(alg: FiniteAlgebra, U: Mapping[str, set]):
    """Injective constructors whose images avoid U_b and partition X_b minus U_b."""
    sig = alg.sig
    for k in sig.constructors:
        w = _injectivity(alg, k)
        if w:
            return False, {"not_injective": w}
    for b in sig.types:
        if sig.is_parameter(b):
            continue
        covered: dict[str, str] = {}
        for k in sig.ctors_of(b):
            for r in _images(alg, k):
                if r in U[b]:
                    return False, {"image_meets_U": [b, k, r]}
                if r in covered:
                    return False, {"images_overlap": [b, covered[r], k, r]}
                covered[r] = k
        missing = [x for x in alg.carriers[b] if x not in U[b] and x not in covered]
        if missing:
            return False, {"not_covered": [b, missing[0]]}
    return True, None


def _unambiguous_wrt(alg: FiniteAlgebra, U: Mapping[str, set]):
    sig = alg.sig
    for k in sig.constructors:
        w = _injectivity(alg, k)
        if w:
            return False, {"not_injective": w}
    for b in sig.types:
        if sig.is_parameter(b):
            continue
        w = _overlap(alg, b)
        if w:
            return False, {"images_overlap": w}
        for k in sig.ctors_of(b):
            for r in _images(alg, k):
                if r in U[b]:
                    return False, {"image_meets_U": [b, k, r]}
    return True, None


def _minimal_wrt(alg: FiniteAlgebra, U: Mapping[str, set]):
    closure = invariant_closure(alg, U)
    junk = [[b, x] for b in alg.sig.types for x in alg.carriers[b] if x not in closure[b]]
    return not junk, (junk or None), closure.approximate


def classify(alg: FiniteAlgebra, U: Mapping[str, Iterable[str]] | None = None,
             V: Mapping[str, Iterable[str]] | None = None) -> Classification:
    """Structural verdicts with witnesses.

    ``U`` is the seed family for the unbottomed verdicts (empty by default);
    ``V`` the parameter family for bottomed ones (all defined parameter
    elements by default).
    """
    sig = alg.sig
    Us = _seed(alg, U)
    empty = {b: set() for b in sig.types}
    wit: list = []
    minimal, junk, _ = _minimal_wrt(alg, Us)
    if junk:
        wit.append(["minimal", junk])
    unamb, w = _unambiguous_wrt(alg, Us)
    if w:
        wit.append(["unambiguous", w])
    regular, w = _regular_wrt(alg, Us)
    if w:
        wit.append(["regular", w])
    min0, _, _ = _minimal_wrt(alg, empty)
    reg0, _ = _regular_wrt(alg, empty)
    rep = Classification(
        approximate=alg.partial,
        bottomed=alg.is_bottomed,
        minimal=minimal,
        unambiguous=unamb,
        regular=regular,
        initial=min0 and reg0,
        free=minimal and regular,
        witnesses=wit,
    )
    if alg.is_bottomed:
        _classify_bottomed(alg, V, rep)
    return rep


def _classify_bottomed(alg: FiniteAlgebra, V, rep: Classification):
    sig = alg.sig
    bots = {b: {alg.bottoms[b]} for b in sig.types}
    if V is None:
        V = {a: alg.non_bottom(a) for a in sig.parameters}
    seed = {b: set(bots[b]) for b in sig.types}
    for a, xs in V.items():
        seed[a].update(xs)
    vmin, junk, _ = _minimal_wrt(alg, seed)
    if junk:
        rep.witnesses.append(["v_minimal", junk])
    strict, w = _regular_wrt(alg, bots)
    if w:
        rep.witnesses.append(["strictly_regular", w])
    sunamb, w = _unambiguous_wrt(alg, bots)
    if w:
        rep.witnesses.append(["strictly_unambiguous", w])
    regb, w = _regular_bottomed(alg)
    if w:
        rep.witnesses.append(["regular_bottomed", w])
    natinv, w = _natural_invariant(alg)
    if w:
        rep.witnesses.append(["natural_invariant", w])
    rep.v_minimal = vmin
    rep.strictly_regular = strict
    rep.strictly_unambiguous = sunamb
    rep.regular_bottomed = regb
    rep.natural_invariant = natinv
    rep.v_initial = vmin and strict


def _regular_bottomed(alg: FiniteAlgebra):
    """Every defined element of a non-parameter type has exactly one decomposition."""
    sig = alg.sig
    for b in sig.types:
        if sig.is_parameter(b):
            continue
        count: dict[str, list] = {x: [] for x in alg.non_bottom(b)}
        for k in sig.ctors_of(b):
            for r, pre in _images(alg, k).items():
                if r in count:
                    count[r].extend((k, p) for p in pre)
        for x in alg.non_bottom(b):
            if len(count[x]) != 1:
                return False, [b, x, [[k, list(p)] for k, p in count[x]]]
    return True, None


def _natural_invariant(alg: FiniteAlgebra):
    defined = {b: alg.non_bottom(b) for b in alg.sig.types}
    for k in alg.sig.constructors:
        b = alg.sig.result_of(k)
        for args in alg.arg_tuples(k, defined):
            r = alg.tables[k].get(args)
            if r is not None and alg.is_bottom(b, r):
                return False, [k, list(args)]
    return True, None


# gradings

Grading = dict


def compute_depths(alg: FiniteAlgebra, U: Mapping[str, Iterable[str]] | None = None) -> Grading:
    """Iterate the depth recursion from the zero family to its fixpoint.

    Nullary constructors get 0, other applications 1 + the largest argument
    depth; bottoms, parameter elements and members of U stay at 0.  When an
    element has several decompositions the largest value wins, so ambiguous
    algebras keep growing and are reported as Diverged.
    """
    sig = alg.sig
    pinned = {b: set() for b in sig.types}
    for b, xs in (U or {}).items():
        pinned[b].update(xs)
    for a in sig.parameters:
        pinned[a].update(alg.carriers[a])
    if alg.bottoms is not None:
        for b, e in alg.bottoms.items():
            pinned[b].add(e)
    g = {b: {x: 0 for x in alg.carriers[b]} for b in sig.types}
    for _ in range(alg.size() + 1):
        nxt = {b: {x: 0 for x in alg.carriers[b]} for b in sig.types}
        for k in sig.constructors:
            b = sig.result_of(k)
            slots = alg.slot_types(k)
            for args, r in alg.tables[k].items():
                if r in pinned[b]:
                    continue
                v = 1 + max(g[t][a] for a, t in zip(args, slots)) if args else 0
                if v > nxt[b][r]:
                    nxt[b][r] = v
        if nxt == g:
            return g
        g = nxt
    raise Diverged(f"depths still changing after {alg.size() + 1} rounds")


def verify_grading(alg: FiniteAlgebra, g: Mapping[str, Mapping[str, int]], bottomed: bool = False) -> Verdict:
    sig = alg.sig
    for b in sig.types:
        for x in alg.carriers[b]:
            if x not in g.get(b, {}):
                return Verdict(False, ["not_total", b, x])
    if bottomed:
        for b, e in (alg.bottoms or {}).items():
            if g[b][e] != 0:
                return Verdict(False, ["bottom_not_zero", b, e])
    for k in sig.constructors:
        b = sig.result_of(k)
        slots = alg.slot_types(k)
        for args, r in alg.tables[k].items():
            if bottomed and alg.is_bottom(b, r):
                continue
            for a, t in zip(args, slots):
                if not g[t][a] < g[b][r]:
                    return Verdict(False, [k, list(args), r])
    return Verdict(True)


# homomorphisms

HomCandidate = dict


def check_homomorphism(src: FiniteAlgebra, dst: FiniteAlgebra, pi: Mapping[str, Mapping[str, str]],
                       bottomed: bool = False) -> Verdict:
    sig = src.sig
    for b in sig.types:
        for x in src.carriers[b]:
            if x not in pi.get(b, {}):
                return Verdict(False, ["not_total", b, x])
    if bottomed:
        for b in sig.types:
            if pi[b][src.bottoms[b]] != dst.bottoms[b]:
                return Verdict(False, ["bottom", b])
    for k in sig.constructors:
        b = sig.result_of(k)
        slots = src.slot_types(k)
        for args in src.arg_tuples(k):
            if args not in src.tables[k]:
                continue
            image = tuple(pi[t][a] for a, t in zip(args, slots))
            if dst.tables[k].get(image) != pi[b][src.tables[k][args]]:
                return Verdict(False, [k, list(args)])
    return Verdict(True)


def find_homomorphisms(src: FiniteAlgebra, dst: FiniteAlgebra, bottomed: bool = False,
                       budget: int | None = None) -> list[HomCandidate]:
    """Every (bottomed) homomorphism, by exhaustive search over all maps."""
    sig = src.sig
    limit = default_budget(budget)
    total = 1
    for b in sig.types:
        total *= len(dst.carriers[b]) ** len(src.carriers[b])
        if total > limit:
            raise BudgetExceeded(f"more than {limit} candidate maps")
    per_type = []
    for b in sig.types:
        xs = src.carriers[b]
        choices = []
        for x in xs:
            if bottomed and src.is_bottom(b, x):
                choices.append([dst.bottoms[b]])
            else:
                choices.append(list(dst.carriers[b]))
        per_type.append([dict(zip(xs, img)) for img in itertools.product(*choices)])
    out = []
    for maps in itertools.product(*per_type):
        pi = dict(zip(sig.types, maps))
        if check_homomorphism(src, dst, pi, bottomed):
            out.append(pi)
    return out


def sum_algebras(algs: list[FiniteAlgebra]) -> FiniteAlgebra:
    if not algs:
        raise OverlappingSignatures("nothing to sum")
    sig = sum_signatures([a.sig for a in algs])
    bottomed = [a.is_bottomed for a in algs]
    if any(bottomed) and not all(bottomed):
        raise AlgebraFormatError("cannot sum bottomed and unbottomed algebras")
    carriers, tables, bottoms = {}, {}, {}
    for a in algs:
        carriers.update(a.carriers)
        tables.update(a.tables)
        if a.bottoms:
            bottoms.update(a.bottoms)
    return FiniteAlgebra(sig, carriers, tables, bottoms if all(bottomed) else None,
                         any(a.partial for a in algs))
