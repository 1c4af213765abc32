"""Command-line front end: ``adt <verb> ...``.

Exit status is 0 on success, 1 when a domain error is reported and 2 for
usage errors.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import bottomed, finalg, poly, poset, sig as sigmod, termorder, terms
from .errors import AdtError
from .report import jsonable, report_json


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str, flag: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path!r}: {exc.strerror}") from None


def _window(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise UsageError(f"--window: expected LO:HI, got {text!r}") from None


def _load_sig(path: str, args, flag: str = "--sig") -> sigmod.Signature:
    s = sigmod.parse_signature(_read(path, flag))
    w = _window(getattr(args, "window", None))
    if w is not None:
        s = s.with_window(*w)
    return s


def _head(s: sigmod.Signature, spec: str) -> bottomed.HeadType:
    if spec in bottomed.BUILTINS:
        return bottomed.builtin_head_type(s, spec)
    if spec.startswith("@") or os.path.exists(spec):
        return bottomed.load_head_type(_read(spec.removeprefix("@"), "--head"), s)
    raise UsageError(f"--head: expected one of {', '.join(bottomed.BUILTINS)} or a head file")


def _specifier(s: sigmod.Signature, path: str | None) -> terms.Specifier:
    if path is None:
        return terms.Specifier.identity(s)
    mapping = {}
    for no, raw in enumerate(_read(path, "--spec").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        if len(parts) != 2:
            raise UsageError(f"--spec: line {no}: expected 'constructor = token'")
        if not s.has_constructor(parts[0]):
            raise UsageError(f"--spec: line {no}: unknown constructor {parts[0]!r}")
        mapping[parts[0]] = parts[1]
    return terms.Specifier.from_map(s, mapping)


def _variables(specs: Sequence[str] | None, s: sigmod.Signature) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for item in specs or ():
        if ":" not in item:
            raise UsageError(f"--var: expected NAME:TYPE, got {item!r}")
        name, b = item.split(":", 1)
        s.require_type(b)
        out.setdefault(b, []).append(name)
    return out


def _tree(t) -> object:
    if isinstance(t, terms.Bottom):
        return {"bottom": t.type}
    if isinstance(t, terms.Variable):
        return {"var": t.name, "type": t.type}
    return {"ctor": t.ctor, "type": t.type, "children": [_tree(c) for c in t.children]}


# verbs

def cmd_check(args, out):
    s = _load_sig(args.signature, args, "SIG")
    comps = sigmod.disjoint_components(s)
    ctors = []
    for k in s.named_constructors():
        ctors.append({"name": k, "result": s.result_of(k),
                      "slots": [[n, t] for n, t in s.slots_of(k)]})
    rep = {
        "types": list(s.types),
        "parameters": list(s.parameters),
        "primitive_types": [b for b in s.types if b in sigmod.primitive_types(s)],
        "components": [list(c.types) for c in comps],
        "constructors": ctors,
        "numerals": s.numeral_type,
        "window": list(s.window) if s.window else None,
        "declared_support": {b: list(ps) for b, ps in s.declared_support.items()},
    }
    if s.declared_support:
        poly.minimal_support(s)
    return rep


def cmd_parse(args, out):
    s = _load_sig(args.sig, args)
    spec = _specifier(s, args.spec)
    t = terms.parse(args.term, args.type, s, spec)
    rep = {"term": terms.show(t, spec), "type": t.type, "depth": terms.depth(t), "tree": _tree(t)}
    if args.json:
        return rep
    return f"{rep['term']} : {rep['type']} (depth {rep['depth']})"


def _peano(s: sigmod.Signature) -> terms.Callbacks:
    ops = {}
    for k in s.named_constructors():
        n = s.arity(k)
        if n == 0:
            ops[k] = lambda a: 0
        elif n == 1:
            ops[k] = lambda a: a[0] + 1
    ops["@integers"] = lambda i: i
    return terms.Callbacks(ops)


def _size(s: sigmod.Signature) -> terms.Callbacks:
    ops = {k: (lambda a: 1 + sum(a)) for k in s.named_constructors()}
    ops["@integers"] = lambda i: 1
    return terms.Callbacks(ops, bottom=lambda b: 0)


def _depth_target(s: sigmod.Signature) -> terms.Callbacks:
    ops = {k: (lambda a: 1 + max(a) if a else 0) for k in s.named_constructors()}
    ops["@integers"] = lambda i: 0
    return terms.Callbacks(ops, bottom=lambda b: 0)


def cmd_eval(args, out):
    s = _load_sig(args.sig, args)
    t = terms.parse(args.term, args.type, s)
    env = {}
    for item in args.env or ():
        if "=" not in item:
            raise UsageError(f"--env: expected NAME=VALUE, got {item!r}")
        name, val = item.split("=", 1)
        env[name] = val
    if args.target == "peano":
        target = _peano(s)
        target.env = {k: int(v) for k, v in env.items() if v.lstrip("-").isdigit()}
    elif args.target == "size":
        target = _size(s)
    elif args.target == "depth":
        target = _depth_target(s)
    elif args.target == "term":
        target = terms.term_algebra(s)
    else:
        alg = finalg.load_algebra(_read(args.target, "--target"), s)
        target = terms.AlgebraTarget(alg, env)
    value = terms.catamorphism(t, target, env)
    if isinstance(value, (terms.Node, terms.Bottom, terms.Variable)):
        value = terms.show(value)
    if args.json:
        return {"value": value}
    return str(value)


def cmd_normalize(args, out):
    s = _load_sig(args.sig, args)
    h = _head(s, args.head)
    t = terms.parse(args.term, args.type, s)
    n = bottomed.normalize(t, h)
    props = bottomed.head_properties(h)
    rep = {"normal_form": terms.show(n), "head": str(bottomed.eval_head(n, h)),
           "changed": n != t, "stable": props.stable}
    if args.json:
        return rep
    lines = [rep["normal_form"]]
    if not props.stable:
        lines.append("warning: head type is not ♮-stable; the order on normal forms may fail")
    return "\n".join(lines)


def cmd_leq(args, out):
    s = _load_sig(args.sig, args)
    h = _head(s, args.head)
    a = terms.parse(args.left, args.type, s)
    b = terms.parse(args.right, args.type, s)
    res = termorder.term_leq(a, b, h)
    if args.json:
        return {"leq": res}
    return "true" if res else "false"


def cmd_enumerate(args, out):
    s = _load_sig(args.sig, args)
    vs = _variables(args.var, s)
    if args.head:
        h = _head(s, args.head)
        ts = termorder.normal_forms(s, args.type, h, args.depth, vs)
    else:
        ts = terms.enumerate_terms(s, args.type, args.depth, bottoms=args.bottoms, variables=vs)
    shown = [terms.show(t) for t in ts]
    if args.json:
        return {"type": args.type, "depth": args.depth, "terms": shown}
    return "\n".join(shown)


def _poset_json(P: poset.FinitePoset):
    return {"elements": [P.name(e) for e in P.elements],
            "covers": [[P.name(a), P.name(b)] for a, b in P.covers()],
            "bottom": P.name(P.bottom)}


def cmd_poset(args, out):
    s = _load_sig(args.sig, args)
    h = _head(s, args.head)
    P = termorder.truncated_poset(s, args.type, h, args.depth, _variables(args.var, s))
    if args.json:
        return _poset_json(P)
    return poset.dump_poset(P).rstrip("\n")


def cmd_complete(args, out):
    Y = poset.load_poset(_read(args.file, "FILE"))
    c = poset.ideal_completion(Y, args.max_elements)
    if args.json:
        rep = _poset_json(c.poset)
        rep["embed"] = {Y.name(y): c.poset.name(c.embed[y]) for y in Y.elements}
        rep["isomorphic_to_input"] = poset.is_isomorphic(c.poset, Y)
        return rep
    return poset.dump_completion(c, Y).rstrip("\n")


def cmd_support(args, out):
    s = _load_sig(args.signature, args, "SIG")
    sup = poly.minimal_support(s)
    rows = {b: list(sup[b]) for b in s.types if not s.is_parameter(b)}
    if args.json:
        return rows
    return "\n".join(f"{b}: {' '.join(ps)}".rstrip() for b, ps in rows.items())


def cmd_poly(args, out):
    s = _load_sig(args.sig, args)
    ps = poly.PolySignature(s)
    if args.op:
        op = ps.parse_op(args.op)
        dom, cod = ps.op_signature(op)
        rep = {"op": ps.format(op), "base": ps.omega(op),
               "dom": [[n, ps.format(t)] for n, t in dom], "cod": ps.format(cod)}
        if args.json:
            return rep
        return ps.format_op_signature(op)
    if not args.type:
        raise UsageError("poly: give --op or --type")
    pt = ps.parse_polytype(args.type)
    if args.term is None:
        ops = ps.constructors_of(pt)
        if args.json:
            return {"type": ps.format(pt), "constructors": [ps.format(o) for o in ops]}
        return "\n".join(ps.format_op_signature(o) for o in ops)
    t = ps.poly_parse(args.term, pt)
    rep = {"term": " ".join(ps.poly_flatten(t)), "type": ps.format(pt)}
    if args.json:
        return rep
    return f"{rep['term']} : {rep['type']}"


def cmd_classify(args, out):
    s = _load_sig(args.sig, args)
    if args.algebra:
        alg = finalg.load_algebra(_read(args.algebra, "ALGEBRA"), s)
        if args.flat:
            alg = bottomed.flat_extension(alg)
        rep = jsonable(finalg.classify(alg))
        if args.order:
            order, orep = termorder.refine_ordering(alg)
            rep["order"] = {
                "kind": "fixpoint of refinement",
                "relations": {b: sorted([x, y] for x, y in order[b] if x != y) for b in s.types},
                "monotone": orep.monotone,
                "witnesses": orep.witnesses,
                "rounds": orep.rounds,
            }
        if args.json:
            return rep
        lines = [f"{k}: {str(v).lower()}" for k, v in rep.items() if isinstance(v, bool)]
        for k, v in rep["witnesses"]:
            lines.append(f"witness {k}: {report_json(v)}")
        if args.order:
            o = rep["order"]
            lines.append(f"order: fixpoint of refinement after {o['rounds']} rounds")
            if o["monotone"]:
                lines.append("all operations monotone")
            for k, a, b in o["witnesses"]:
                lines.append(f"{k} non-monotone at ({','.join(a)}) vs ({','.join(b)})"
                             if len(a) != 1 else f"{k} non-monotone at ({a[0]},{b[0]})")
        return "\n".join(lines)
    if args.head:
        h = _head(s, args.head)
        rep = jsonable(bottomed.head_properties(h))
        if args.json:
            return rep
        lines = [f"stable: {str(rep['stable']).lower()}",
                 f"natural_invariant: {str(rep['natural_invariant']).lower()}"]
        for k, v in rep["witnesses"]:
            lines.append(f"witness {k}: {report_json(v)}")
        return "\n".join(lines)
    rep = jsonable(poly.classify_poly(s))
    if args.json:
        return rep
    lines = [f"simple: {str(rep['simple']).lower()}", f"semi_simple: {str(rep['semi_simple']).lower()}"]
    for c in rep["components"]:
        lines.append(f"component {' '.join(c['types'])}: {'simple' if c['simple'] else 'not simple'}")
    return "\n".join(lines)


def cmd_hom(args, out):
    s = _load_sig(args.sig, args)
    src = finalg.load_algebra(_read(args.src, "SRC"), s)
    dst = finalg.load_algebra(_read(args.dst, "DST"), s)
    if args.flat:
        src, dst = bottomed.flat_extension(src), bottomed.flat_extension(dst)
    homs = finalg.find_homomorphisms(src, dst, args.bottomed or args.flat)
    rows = [{b: [[x, pi[b][x]] for x in src.carriers[b]] for b in s.types} for pi in homs]
    if args.json:
        return {"count": len(homs), "homomorphisms": rows}
    lines = [f"{len(homs)} homomorphism{'s' if len(homs) != 1 else ''}"]
    for row in rows:
        lines.append("; ".join(f"{b}: " + " ".join(f"{x}->{y}" for x, y in pairs)
                               for b, pairs in row.items() if pairs))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adt", description="Algebraic data types: terms, algebras, orders, polymorphism.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--json", action="store_true", help="canonical JSON output")
        sp.add_argument("--window", help="numeral window LO:HI (write --window=-2:2)")
        sp.set_defaults(fn=fn)
        return sp

    sp = verb("check", cmd_check, "load a signature and report its structure")
    sp.add_argument("signature", metavar="SIG")

    sp = verb("parse", cmd_parse, "parse a prefix term")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--type")
    sp.add_argument("--spec", help="specifier file of 'constructor = token' lines")
    sp.add_argument("term")

    sp = verb("eval", cmd_eval, "fold a term into a target algebra")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--type")
    sp.add_argument("--target", required=True, help="peano, size, depth, term or an algebra file")
    sp.add_argument("--env", action="append", help="variable binding NAME=VALUE")
    sp.add_argument("term")

    sp = verb("normalize", cmd_normalize, "normalize a partial term under a head type")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--type")
    sp.add_argument("--head", required=True)
    sp.add_argument("term")

    sp = verb("leq", cmd_leq, "compare two normal forms")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--type")
    sp.add_argument("--head", required=True)
    sp.add_argument("left")
    sp.add_argument("right")

    sp = verb("enumerate", cmd_enumerate, "list terms up to a depth")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--type", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--bottoms", action="store_true")
    sp.add_argument("--head", help="list normal forms under this head type instead")
    sp.add_argument("--var", action="append", help="variable NAME:TYPE")

    sp = verb("poset", cmd_poset, "truncated poset of normal forms")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--type", required=True)
    sp.add_argument("--head", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--var", action="append", help="variable NAME:TYPE")

    sp = verb("complete", cmd_complete, "ideal completion of a poset file ('-' for stdin)")
    sp.add_argument("file", metavar="FILE")
    sp.add_argument("--max-elements", type=int, default=20)

    sp = verb("support", cmd_support, "minimal support of a signature")
    sp.add_argument("signature", metavar="SIG")

    sp = verb("poly", cmd_poly, "polymorphic types, operators and terms")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--op", help="polymorphic operator, e.g. 'Cons (pair v bool)'")
    sp.add_argument("--type", help="polymorphic type, e.g. 'list int'")
    sp.add_argument("term", nargs="?")

    sp = verb("classify", cmd_classify, "classify an algebra, a head type or the signature")
    sp.add_argument("--sig", required=True)
    sp.add_argument("algebra", nargs="?", metavar="ALGEBRA")
    sp.add_argument("--flat", action="store_true", help="classify the flat extension")
    sp.add_argument("--order", action="store_true", help="also run the order refinement")
    sp.add_argument("--head", help="report properties of a head type")

    sp = verb("hom", cmd_hom, "all homomorphisms between two algebras")
    sp.add_argument("--sig", required=True)
    sp.add_argument("src", metavar="SRC")
    sp.add_argument("dst", metavar="DST")
    sp.add_argument("--bottomed", action="store_true")
    sp.add_argument("--flat", action="store_true", help="use the flat extensions")
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    want_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
        result = args.fn(args, out)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except AdtError as exc:
        if want_json:
            out.write(report_json({"error": exc.name, "message": str(exc)}) + "\n")
        else:
            out.write(f"error: {exc.name}: {exc}\n")
        return 1
    if isinstance(result, str):
        out.write(result + "\n" if result else "")
    else:
        out.write(report_json(result) + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
