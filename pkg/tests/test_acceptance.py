"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import itertools
import os
import random
import subprocess
import sys
from pathlib import Path

import pytest

from adt.bottomed import BUILTINS, Head, builtin_head_type, eval_head, is_stable, load_head_type, normalize
from adt.finalg import FiniteAlgebra, classify, find_homomorphisms, invariant_closure, load_algebra
from adt.poly import App, PolySignature, Var, classify_poly, minimal_support
from adt.poset import (
    compact_elements,
    ideal_completion,
    is_isomorphic,
    product_poset,
    validate,
)
from adt.termorder import (
    normal_forms,
    principal_ideal,
    refine_ordering,
    term_leq,
    truncated_poset,
    truncation_algebra,
)
from adt.terms import (
    Bottom,
    Callbacks,
    Node,
    catamorphism,
    catamorphism_by_depth,
    enumerate_terms,
    flatten,
    parse,
    show,
    term_algebra,
)

from _support import (
    SIG_FIXTURES,
    all_algebras,
    cli_commands,
    enumerable_random_signatures,
    fixture,
    load_sig,
    min_depths,
    one_variable_per_parameter,
    overloaded_specifier,
    prunings,
    random_poset,
    random_term,
    size_vectors,
)

TESTS = Path(__file__).resolve().parent


@pytest.fixture
def verdict(capsys):
    def report(n: int, what: str, failures: list):
        line = f"{'PASS' if not failures else 'FAIL'} criterion {n}: {what}"
        if failures:
            line += f" ({len(failures)} failures, first: {failures[0]})"
        with capsys.disabled():
            print(line)
        assert not failures, line
    return report


# 1. unique readability

def _readability_failures(sig, spec=None):
    fails = []
    vs = one_variable_per_parameter(sig)
    for b in sig.types:
        ts = enumerate_terms(sig, b, 4, bottoms=True, variables=vs)
        flats = [tuple(flatten(t, spec)) for t in ts]
        for t, f in zip(ts, flats):
            back = parse(list(f), b, sig, spec)
            if back != t:
                fails.append(("round trip", b, show(t)))
        seen = set(flats)
        if len(seen) != len(flats):
            fails.append(("duplicate flattening", b))
        prefixes = {f[:i] for f in flats for i in range(1, len(f))}
        clash = seen & prefixes
        if clash:
            fails.append(("proper prefix", b, " ".join(sorted(clash)[0])))
    return fails


def test_criterion_1_unique_readability(verdict):
    fails = []
    for name in SIG_FIXTURES:
        fails += _readability_failures(load_sig(name, (-1, 1)))
    rng = random.Random(2024)
    randoms = enumerable_random_signatures(seed=7, count=50, depth=4, limit=20000, bottoms=True)
    for s in randoms:
        spec = overloaded_specifier(s) if rng.random() < 0.5 else None
        fails += _readability_failures(s, spec)
    verdict(1, f"unique readability on {len(SIG_FIXTURES)} fixtures + {len(randoms)} random signatures, "
               "depth <= 4", fails)


# 2. initiality

def _initiality_failures(algs):
    fails = []
    for a in algs:
        unique = all(len(find_homomorphisms(a, b)) == 1 for b in algs)
        if classify(a).initial != unique:
            fails.append((a.carriers, classify(a).initial, unique))
    return fails


def test_criterion_2_initiality(verdict):
    w = load_sig("w.sig")
    algs = [a for sizes in size_vectors(w, 4) if max(sizes.values()) <= 2 for a in all_algebras(w, sizes)]
    fails = []
    if len(algs) != 45:
        fails.append(("expected 45 algebras", len(algs)))
    fails += _initiality_failures(algs)
    # the w part is infinite in the initial algebra, so no finite one is initial
    if any(classify(a).initial for a in algs):
        fails.append("a finite w algebra claims to be initial")
    b = load_sig("bool.sig")
    balgs = [a for n in (1, 2) for a in all_algebras(b, {"bool": n})]
    fails += _initiality_failures(balgs)
    if sum(classify(a).initial for a in balgs) != 2:
        fails.append("bool: expected exactly the two bijective 2-element algebras to be initial")
    verdict(2, f"initial <=> unique homomorphisms on {len(algs)} w/bool algebras and {len(balgs)} bool "
               "algebras", fails)


# 3. catamorphisms

def _fingerprint(sig):
    ops = {k: (lambda i: lambda a: (131 * i + sum((j + 3) * v for j, v in enumerate(a))) % 999983)(i)
           for i, k in enumerate(sig.constructors)}
    ops["@integers"] = lambda n: n % 999983
    return Callbacks(ops, env={a: 17 for a in sig.parameters}, bottom=lambda b: 11)


def test_criterion_3_catamorphisms(verdict):
    fails = []
    total = 0
    for name in SIG_FIXTURES:
        s = load_sig(name, (-5, 5))
        vs = one_variable_per_parameter(s)
        rng = random.Random(name)
        tg = _fingerprint(s)
        ident = term_algebra(s)
        for i in range(1000):
            bottoms = i % 3 == 0
            md = min_depths(s, vs, bottoms)
            d = rng.randint(0, 7)
            b = rng.choice([b for b in s.types if md[b] <= d])
            t = random_term(s, b, d, rng, variables=vs, bottoms=bottoms)
            total += 1
            if catamorphism(t, tg) != catamorphism_by_depth(t, tg):
                fails.append((name, show(t)))
            if catamorphism(t, ident) != t or catamorphism_by_depth(t, ident) != t:
                fails.append(("identity", name, show(t)))
    verdict(3, f"structural and depth-stratified folds agree, identity fold is the identity ({total} terms)",
            fails)


# 4. closure

def _invariant_families(alg):
    sig = alg.sig
    cells = [(b, x) for b in sig.types for x in alg.carriers[b]]
    fams = []
    for mask in range(1 << len(cells)):
        fam = {b: set() for b in sig.types}
        for i, (b, x) in enumerate(cells):
            if mask >> i & 1:
                fam[b].add(x)
        if all(r in fam[sig.result_of(k)] for k in sig.constructors
               for args, r in alg.tables[k].items()
               if all(a in fam[t] for a, (_, t) in zip(args, sig.slots_of(k)))):
            fams.append(fam)
    return cells, fams


def _closure_failures(alg):
    cells, fams = _invariant_families(alg)
    sig = alg.sig
    fails = []
    for mask in range(1 << len(cells)):
        U = {b: set() for b in sig.types}
        for i, (b, x) in enumerate(cells):
            if mask >> i & 1:
                U[b].add(x)
        over = [f for f in fams if all(U[b] <= f[b] for b in sig.types)]
        want = {b: frozenset(set.intersection(*(f[b] for f in over))) for b in sig.types}
        if invariant_closure(alg, U) != want:
            fails.append((alg.carriers, U))
    return fails


CLOSURE_SIGS = ["bool.sig", "nat.sig", "w.sig", "pairbool.sig", "intro.sig"]
EXHAUSTIVE_LIMIT = 2000  # algebras per size vector; larger vectors are sampled


def _algebra_count(sig, sizes):
    n = 1
    for k in sig.constructors:
        args = 1
        for _, t in sig.slots_of(k):
            args *= sizes[t]
        n *= sizes[sig.result_of(k)] ** args
    return n


def test_criterion_4_closure(verdict):
    fails = []
    exhaustive = sampled = 0
    rng = random.Random(4)
    for name in CLOSURE_SIGS:
        s = load_sig(name)
        for sizes in size_vectors(s, 6):
            if _algebra_count(s, sizes) <= EXHAUSTIVE_LIMIT:
                for a in all_algebras(s, sizes):
                    exhaustive += 1
                    fails += _closure_failures(a)
            else:
                for _ in range(25):
                    carriers = {b: tuple(str(i) for i in range(sizes[b])) for b in s.types}
                    tables = {k: {args: rng.choice(carriers[s.result_of(k)])
                                  for args in itertools.product(*(carriers[t] for _, t in s.slots_of(k)))}
                              for k in s.constructors}
                    sampled += 1
                    fails += _closure_failures(FiniteAlgebra(s, carriers, tables))
    verdict(4, f"closure equals the subset-intersection oracle for every U ({exhaustive} algebras "
               f"exhaustively, {sampled} sampled, total carrier size <= 6)", fails)


# 5. bottomed semantics

def test_criterion_5_bottomed(verdict):
    fails = []
    count = 0
    for name in SIG_FIXTURES:
        s = load_sig(name, (-1, 1))
        vs = one_variable_per_parameter(s)
        for head in BUILTINS:
            h = builtin_head_type(s, head)
            for b in s.types:
                for t in enumerate_terms(s, b, 4, bottoms=True, variables=vs):
                    count += 1
                    n = normalize(t, h)
                    if normalize(n, h) != n:
                        fails.append(("idempotent", name, head, show(t)))
                    if head == "strict" and isinstance(n, Node) and eval_head(n, h) is Head.BOT:
                        fails.append(("strict node heads to bottom", name, show(n)))
        # flat normal forms: bottom, or free of bottoms; constructors act as in the flat extension
        flat = builtin_head_type(s, "flat")
        nfs = {b: normal_forms(s, b, flat, 3, vs) for b in s.types}
        for b, ts in nfs.items():
            for t in ts:
                if not isinstance(t, Bottom) and "_" in flatten(t):
                    fails.append(("flat normal form holds a bottom", name, show(t)))
        for k in s.constructors:
            slots = [t for _, t in s.slots_of(k)]
            pools = [nfs[t][:12] for t in slots]
            for args in itertools.product(*pools):
                n = normalize(Node(k, tuple(args), s.result_of(k)), flat)
                want = (Bottom(s.result_of(k)) if any(isinstance(a, Bottom) for a in args)
                        else Node(k, tuple(args), s.result_of(k)))
                if n != want:
                    fails.append(("flat table", name, k, show(n)))
        for head in BUILTINS:
            if not is_stable(builtin_head_type(s, head)):
                fails.append(("builtin unstable", name, head))
    nat = load_sig("nat.sig")
    if is_stable(load_head_type(fixture("antimono.head").read_text(), nat)):
        fails.append("anti-monotone table passes the stability check")
    verdict(5, f"normalize idempotent on {count} (term, head) pairs, flat closure, strict nodes defined, "
               "builtins stable, anti-monotone table unstable", fails)


# 6. term order

def test_criterion_6_term_order(verdict):
    fails = []
    nat = load_sig("nat.sig")
    P = truncated_poset(nat, "nat", builtin_head_type(nat, "strict"), 3)
    if not validate(P) or len(P) != 8:
        fails.append(("truncated poset", len(P)))
    pairs = 0
    for name in ["nat.sig", "intro.sig", "pairbool.sig", "lists.sig", "w.sig", "basic.sig"]:
        s = load_sig(name, (0, 1))
        vs = one_variable_per_parameter(s)
        for head in BUILTINS:
            h = builtin_head_type(s, head)
            alg, names = truncation_algebra(s, h, 2, vs)
            base = {p: {(x, x) for x in alg.carriers[p]} for p in s.parameters}
            order, _ = refine_ordering(alg, base)
            for b in s.types:
                for (x, t), (y, u) in itertools.product(names[b].items(), repeat=2):
                    pairs += 1
                    if ((x, y) in order[b]) != term_leq(t, u, h):
                        fails.append(("refinement", name, head, x, y))
                for t in normal_forms(s, b, h, 3, vs):
                    brute = sum(1 for p in prunings(t) if normalize(p, h) == p)
                    if len(principal_ideal(t, h)) != brute:
                        fails.append(("ideal size", name, head, show(t)))
    a = load_algebra(fixture("succ_cycle.alg").read_text(), nat)
    _, rep = refine_ordering(a)
    if "Succ non-monotone at (⊥,⊥°)" not in rep.describe():
        fails.append(("example fixture", rep.describe()))
    basic = load_sig("basic.sig", (0, 1))
    cons = parse("Cons 1 Nil", "list", basic)
    if len(principal_ideal(cons, builtin_head_type(basic, "strict"))) != 5:
        fails.append("|down(Cons 1 Nil)| != 5")
    verdict(6, f"8-element nat poset, term_leq = refinement fixpoint on {pairs} pairs, "
               "Succ non-monotone at (⊥,⊥°), principal ideals match pruning counts", fails)


# 7. ideal completion

def test_criterion_7_completion(verdict):
    fails = []
    rng = random.Random(7)
    n = 250
    for i in range(n):
        P = random_poset(rng, 5)
        c = ideal_completion(P)
        X = c.poset
        if not validate(X):
            fails.append(("invalid completion", i))
        for a, b in itertools.product(P.elements, repeat=2):
            if P.le(a, b) != X.le(c.embed[a], c.embed[b]):
                fails.append(("embedding", i, a, b))
        if set(compact_elements(X)) != set(c.embed.values()):
            fails.append(("compacts", i))
        if not is_isomorphic(X, P):
            fails.append(("not isomorphic", i))
    for i in range(200):
        P, Q = random_poset(rng, 4), random_poset(rng, 4)
        lhs = ideal_completion(product_poset([P, Q])).poset
        rhs = product_poset([ideal_completion(P).poset, ideal_completion(Q).poset])
        if not is_isomorphic(lhs, rhs):
            fails.append(("product", i))
    verdict(7, f"completion valid, embedding preserves and reflects order, compacts = image, "
               f"isomorphic to input on {n} posets; products commute on 200 pairs", fails)


# 8. polymorphism

def test_criterion_8_polymorphism(verdict):
    fails = []
    lists = load_sig("lists.sig", (0, 1))
    sup = minimal_support(lists)
    table = {b: sup[b] for b in ("pair", "list", "lp")}
    if table != {"pair": ("x", "y"), "list": ("z",), "lp": ("x", "y", "z")}:
        fails.append(("support", table))
    ps = PolySignature(lists)
    got = ps.format_type_of(ps.parse_op("P atom (list v) (pair v int)"))
    if got != "pair atom (list v) → lp atom (list v) (pair v int)":
        fails.append(("typing", got))
    if not classify_poly(load_sig("semisimple.sig")).semi_simple:
        fails.append("semi-simple fixture not semi-simple")
    if classify_poly(lists).semi_simple:
        fails.append("list fixture reported semi-simple")
    rng = random.Random(8)
    bases = [b for b in lists.types if not lists.is_parameter(b)]

    def rand_type(d):
        if d == 0 or rng.random() < 0.3:
            return rng.choice([Var("v"), Var("w")] + [App(b) for b in bases if not ps.support[b]])
        b = rng.choice(bases)
        return App(b, tuple((a, rand_type(d - 1)) for a in ps.support[b]))

    for _ in range(500):
        k = rng.choice(lists.constructors)
        b = lists.result_of(k)
        u = {a: rand_type(2) for a in ps.support[b]}
        op = ps.instantiate(k, u)
        if ps.omega(op) != k:
            fails.append(("omega", k))
        dom, cod = ps.op_signature(op)
        if cod != ps.apply_u(b, u) or ps.decompose(cod) != (b, {a: u[a] for a in sup[b]}):
            fails.append(("codomain", ps.format(op)))
        for (s, t), (s2, decl) in zip(dom, lists.slots_of(k)):
            want = u[decl] if lists.is_parameter(decl) else \
                ps.make_polytype(decl, {a: u[a] for a in sup[decl]})
            if s != s2 or t != want:
                fails.append(("domain", ps.format(op), s))
    verdict(8, "minimal support table, displayed operator typing, semi-simplicity, "
               "omega and typing commutation on 500 instantiations", fails)


# 9. determinism

RUNNER = """
import io, sys
sys.path.insert(0, {tests!r})
from _support import cli_commands
from adt.cli import run
for argv in cli_commands():
    out = io.StringIO()
    code = run(argv, out)
    sys.stdout.write("$ " + " ".join(argv) + "\\n" + str(code) + "\\n" + out.getvalue())
"""


def test_criterion_9_determinism(verdict):
    fails = []
    script = RUNNER.format(tests=str(TESTS))
    outs = []
    for seed in ("0", "4242"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        res = subprocess.run([sys.executable, "-c", script], capture_output=True, env=env, timeout=240)
        if res.returncode != 0:
            fails.append(("runner failed", res.stderr.decode()[-300:]))
        outs.append(res.stdout)
    if outs[0] != outs[1]:
        a, b = outs[0].splitlines(), outs[1].splitlines()
        diff = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
        fails.append(("output differs at line", diff))
    n = len(cli_commands())
    # one fresh pipeline through the console entry point as well
    for _ in range(2):
        res = subprocess.run(
            [sys.executable, "-m", "adt", "poset", "--sig", str(fixture("nat.sig")), "--type", "nat",
             "--head", "strict", "--depth", "2"], capture_output=True)
        outs.append(res.stdout)
    if outs[2] != outs[3]:
        fails.append("poset output differs between processes")
    verdict(9, f"{n} CLI commands byte-identical across two processes with different hash seeds", fails)
