"""Command-line front end.

Exit codes: 0 success or verified, 1 input error (one JSON line on stderr),
2 counterexample or rejected input pattern, 3 search budget exhausted.
Every run writes a reproducibility header (``#``-prefixed lines) to stderr;
JSON artifacts embed the same header and contain no timings.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import __version__, zoo
from .core import (
    InvalidInput,
    Pattern,
    SftError,
    Support,
    TorusConfig,
    _atomic_write,
    box,
    dumps_pattern,
    dumps_spec,
    dumps_torus,
    load_spec,
    loads_pattern,
    loads_torus,
    validate_pattern,
    validate_torus,
)
from .solver import BudgetExhausted, SearchBudget, count_language, cover_of, enumerate_language, extend

EXIT_OK, EXIT_INPUT, EXIT_COUNTEREXAMPLE, EXIT_BUDGET = 0, 1, 2, 3
BUDGET_ENV = "SFTKIT_MAX_NODES"
ARTIFACT_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInput(message)


# ---------------------------------------------------------------- helpers


def _load_shift(args):
    if getattr(args, "spec", None):
        try:
            return load_spec(args.spec)
        except OSError as e:
            raise InvalidInput(f"cannot read {args.spec}: {e.strerror}") from None
    if getattr(args, "shift", None):
        return zoo.builtin(args.shift)
    raise InvalidInput("give --spec FILE or --shift NAME")


def spec_hash(shift) -> str:
    text = dumps_spec(cover_of(shift))
    if isinstance(shift, zoo.SoficShift):
        text += f"\ncode {shift.code.name} {' '.join(shift.alphabet.names)}"
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()[:16]


def _params(args) -> dict:
    skip = {"func", "verb", "spec", "shift", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def header(args, shift=None) -> dict:
    return {
        "tool": f"sftkit {__version__}",
        "verb": args.verb,
        "spec": spec_hash(shift) if shift is not None else None,
        "shift": shift.name if shift is not None else None,
        "seed": args.seed,
        "params": _params(args),
    }


def _emit_run_header(args) -> None:
    """Header lines known before any input is read."""
    print(f"# tool: sftkit {__version__}", file=sys.stderr)
    print(f"# verb: {args.verb}", file=sys.stderr)
    print(f"# seed: {args.seed}", file=sys.stderr)
    print(f"# params: {json.dumps(_params(args), sort_keys=True)}", file=sys.stderr)


def _emit_header(h: dict) -> None:
    if h["shift"] is not None:
        print(f"# shift: {h['shift']}", file=sys.stderr)
        print(f"# spec: {h['spec']}", file=sys.stderr)


def _budget(args) -> SearchBudget:
    nodes = args.max_nodes
    if nodes is None and os.environ.get(BUDGET_ENV):
        try:
            nodes = int(os.environ[BUDGET_ENV])
        except ValueError:
            raise InvalidInput(f"{BUDGET_ENV} must be an integer") from None
    return SearchBudget(max_nodes=nodes, seed=args.seed)


def _write(args, text: str | bytes) -> None:
    if args.out:
        if isinstance(text, bytes):
            import tempfile

            d = os.path.dirname(os.path.abspath(args.out))
            fd, tmp = tempfile.mkstemp(dir=d)
            with os.fdopen(fd, "wb") as f:
                f.write(text)
            os.replace(tmp, args.out)
        else:
            _atomic_write(args.out, text)
    elif isinstance(text, bytes):
        sys.stdout.buffer.write(text)
    else:
        sys.stdout.write(text)


def _artifact(h: dict, kind: str, body: dict) -> str:
    doc = {"artifact": kind, "version": ARTIFACT_VERSION, "header": h, **body}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _support(args, d: int) -> Support:
    return box(d, args.box)


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InvalidInput(f"expected comma-separated integers, got {text!r}") from None


def _read(path: str) -> str:
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}") from None


def _load_object(shift, path: str) -> Pattern | TorusConfig:
    text = _read(path)
    first = text.lstrip().split(None, 1)[0] if text.strip() else ""
    if first == "torus":
        return loads_torus(shift, text)
    if first == "pattern":
        return loads_pattern(shift, text)
    if first == "{":
        doc = json.loads(text)
        if "torus" in doc:
            return loads_torus(shift, doc["torus"])
        if "pattern" in doc:
            return loads_pattern(shift, doc["pattern"])
    raise InvalidInput(f"{path} holds neither a pattern nor a torus")


def _is_member(shift, obj) -> bool:
    if isinstance(obj, TorusConfig):
        if isinstance(shift, zoo.SoficShift):
            from .solver import complete_torus

            return complete_torus(shift, obj.as_pattern(), obj.periods) is not None
        return validate_torus(shift, obj)
    if isinstance(shift, zoo.SoficShift):
        return extend(shift, obj, obj.support()) is not None
    return validate_pattern(shift, obj)


# ---------------------------------------------------------------- verbs


def cmd_validate(args) -> int:
    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    result = {"spec_ok": True}
    code = EXIT_OK
    for path in args.pattern or ():
        doc_objs = []
        text = _read(path)
        if text.lstrip().startswith("{") and '"patterns"' in text:
            doc_objs = [loads_pattern(shift, t) for t in json.loads(text)["patterns"]]
        else:
            doc_objs = [_load_object(shift, path)]
        ok = all(_is_member(shift, o) for o in doc_objs)
        result[path] = {"objects": len(doc_objs), "valid": ok}
        if not ok:
            code = EXIT_COUNTEREXAMPLE
    _write(args, _artifact(h, "validation", {"result": result}))
    return code


def cmd_enumerate(args) -> int:
    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    F = _support(args, shift.dimension)
    lang = enumerate_language(shift, F, args.margin, _budget(args), cap=args.cap)
    body = {"count": len(lang), "patterns": [dumps_pattern(shift, p) for p in lang]}
    _write(args, _artifact(h, "language", body))
    return EXIT_OK


def cmd_count(args) -> int:
    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    n = count_language(shift, _support(args, shift.dimension), args.margin, _budget(args))
    _write(args, _artifact(h, "count", {"count": str(n)}))
    return EXIT_OK


def cmd_entropy(args) -> int:
    from .entropy import entropy_upper_box, strip_table, strip_transfer_entropy

    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    if (args.strip is None) == (args.box is None):
        raise InvalidInput("give exactly one of --strip W or --box N")
    if args.strip is not None:
        est = strip_transfer_entropy(shift, args.strip, seed=args.seed)
        table = strip_table(shift, range(1, args.strip + 1), seed=args.seed) if args.table else None
    else:
        est = entropy_upper_box(shift, args.box, args.margin, _budget(args))
        table = None
        if args.table:
            table = []
            for n in range(1, args.box + 1):
                e = entropy_upper_box(shift, n, args.margin, _budget(args))
                table.append({"n": n, "upper": e.upper, "lower": e.lower, "count": str(e.count)})
    if table:
        key = "w" if args.strip is not None else "n"
        print(f"{key:>4} {'lower':>14} {'upper':>14}", file=sys.stderr)
        for row in table:
            print(f"{row[key]:>4} {row['lower']:>14.10f} {row['upper']:>14.10f}", file=sys.stderr)
    if args.out:
        body = {"estimate": est.to_dict(), "table": table}
        _write(args, _artifact(h, "entropy", body))
    print(f"upper {est.upper:.10f}")
    print(f"lower {est.lower:.10f}")
    return EXIT_OK


def _exchange_params(args):
    from .asymptotics import ExchangeabilityParams

    return ExchangeabilityParams(r=args.r, m=args.m, witness_mode=args.mode,
                                 budget=SearchBudget(max_nodes=args.max_nodes or 200_000, seed=args.seed))


def cmd_exchange(args) -> int:
    from .asymptotics import NoWitnessUpTo, Obstructed, Witness, exchangeable

    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    p, q = _load_object(shift, args.p), _load_object(shift, args.q)
    if not isinstance(p, Pattern) or not isinstance(q, Pattern):
        raise InvalidInput("exchange takes two pattern files")
    res = exchangeable(shift, p, q, _exchange_params(args))
    if isinstance(res, Witness):
        body = {"outcome": "witness", "witness": res.to_dict(shift)}
    elif isinstance(res, Obstructed):
        body = {"outcome": "obstructed", "obstruction": res.obstruction.to_dict()}
    else:
        assert isinstance(res, NoWitnessUpTo)
        body = {"outcome": "no-witness-up-to", "bound": res.to_dict()}
    _write(args, _artifact(h, "exchange", body))
    return EXIT_OK


def cmd_graph(args) -> int:
    from .asymptotics import exchangeability_graph, graph_to_dict, graph_to_dot

    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    g = exchangeability_graph(shift, _support(args, shift.dimension), _exchange_params(args),
                              args.strategy, cap=args.cap, sample=args.sample, seed=args.seed)
    if args.format == "dot":
        _write(args, graph_to_dot(g, shift))
    else:
        _write(args, _artifact(h, "graph", {"graph": graph_to_dict(g, shift)}))
    print(f"# components: {len(g.components())}", file=sys.stderr)
    return EXIT_OK


def cmd_bce(args) -> int:
    from .asymptotics import bce_profile

    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    supports = [box(shift.dimension, n) for n in range(0, args.max_box + 1)]
    prof = bce_profile(shift, supports, _exchange_params(args), cap=args.cap)
    _write(args, _artifact(h, "bce", {"params": prof.params.to_dict(), "records": prof.records}))
    return EXIT_OK


def cmd_claim(args) -> int:
    from . import claims

    h = header(args)
    _emit_header(h)
    budget = _budget(args)
    name = args.name
    if name == "good-wave":
        kw = {"budget": budget} if budget.max_nodes is not None else {}
        rep = claims.verify_good_wave(_ints(args.torus), sample=args.sample, seed=args.seed, **kw)
    elif name == "blue-sky":
        kw = {"budget": budget} if budget.max_nodes is not None else {}
        rep = claims.verify_blue_sky(args.n or 1, ring=args.ring, sample=args.sample, seed=args.seed, **kw)
    elif name == "pasting":
        if args.c1 or args.c2:
            gw = zoo.good_wave()
            c1, c2 = loads_torus(gw, _read(args.c1)), loads_torus(gw, _read(args.c2))
            rep = claims.verify_pasting(c1, c2, args.k)
        else:
            rep = claims.verify_pasting_random(args.count or 100, _ints(args.torus), args.seed)
    elif name == "weak-mixing":
        rep = claims.verify_weak_mixing_random(args.count or 25, args.seed)
    elif name == "worm-chain":
        rep = claims.verify_worm_chain(args.col_a, args.col_b, args.n or 4)
    elif name == "periodic-density":
        shift = _load_shift(args)
        h["shift"], h["spec"] = shift.name, spec_hash(shift)
        _emit_header(h)
        kw = {"budget": budget} if budget.max_nodes is not None else {}
        per = _ints(args.periods) if args.periods else None
        rep = claims.verify_periodic_density(shift, args.n or 1, per, args.sample, args.seed, **kw)
    else:
        raise InvalidInput(f"unknown claim {name!r}")
    doc = {"report": rep.to_dict()}
    _write(args, _artifact(h, "claim", doc))
    if args.render_dir and rep.verdict == claims.COUNTEREXAMPLE:
        _render_artifacts(rep, args.render_dir)
    return {claims.VERIFIED: EXIT_OK, claims.COUNTEREXAMPLE: EXIT_COUNTEREXAMPLE,
            claims.EXHAUSTED: EXIT_BUDGET}[rep.verdict]


def _render_artifacts(rep, directory: str) -> None:
    """SVG renders of counterexample patterns and tori in a report."""
    from .render import render_svg

    os.makedirs(directory, exist_ok=True)
    shift = zoo.good_wave() if rep.claim != "blue-sky" else zoo.x_struct()
    for i, art in enumerate(rep.artifacts):
        obj = None
        if "torus" in art:
            t = art["torus"]
            obj = TorusConfig(t["periods"], [shift.alphabet.index(s) for s in t["data"]])
        elif "pattern" in art:
            names = shift.alphabet.names
            if all(nm in names for _, nm in art["pattern"]):
                obj = Pattern({tuple(c): shift.alphabet.index(nm) for c, nm in art["pattern"]})
        if obj is not None and obj.dim in (2, 3):
            _atomic_write(os.path.join(directory, f"{rep.claim}-{i}.svg"), render_svg(shift, obj))


def cmd_render(args) -> int:
    from .render import render

    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    obj = _load_object(shift, args.input)
    planes = list(_ints(args.planes)) if args.planes else None
    fmt = args.format or (os.path.splitext(args.out or "")[1].lstrip(".") or "svg")
    _write(args, render(shift, obj, fmt, planes))
    return EXIT_OK


def cmd_export(args) -> int:
    """Write a builtin shift as a spec file, or one of its standard tori."""
    shift = _load_shift(args)
    h = header(args, shift)
    _emit_header(h)
    if args.flat_wave:
        _write(args, dumps_torus(shift, zoo.flat_wave_torus(_ints(args.flat_wave), spec=shift)))
    else:
        _write(args, dumps_spec(cover_of(shift)))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", "-o")
    common.add_argument("--max-nodes", type=int, help=f"search budget (default from ${BUDGET_ENV})")
    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--spec", help="shift spec file")
    src.add_argument("--shift", help="builtin shift name")
    xp = argparse.ArgumentParser(add_help=False)
    xp.add_argument("--r", type=int)
    xp.add_argument("--m", type=int)
    xp.add_argument("--mode", choices=("torus", "open"), default="torus")
    xp.add_argument("--cap", type=int, default=2000)

    ap = _Parser(prog="sftkit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"sftkit {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common, src], help="parse a spec and check pattern files")
    p.add_argument("pattern", nargs="*", help="pattern, torus or language artifact files")
    p.set_defaults(func=cmd_validate)

    for verb, fn, hlp in (("enumerate", cmd_enumerate, "list L_F^m"), ("count", cmd_count, "count |L_F^m|")):
        p = sub.add_parser(verb, parents=[common, src], help=hlp)
        p.add_argument("--box", type=int, required=True, help="support box(d, N)")
        p.add_argument("--margin", type=int, default=0)
        if verb == "enumerate":
            p.add_argument("--cap", type=int)
        p.set_defaults(func=fn)

    p = sub.add_parser("entropy", parents=[common, src], help="entropy bounds")
    p.add_argument("--strip", type=int, help="strip width w (2D nearest-neighbour SFTs)")
    p.add_argument("--box", type=int, help="box radius n (upper bound from pattern counts)")
    p.add_argument("--margin", type=int, default=0)
    p.add_argument("--table", action="store_true", help="print the convergence table")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("exchange", parents=[common, src, xp], help="search an exchange witness")
    p.add_argument("p")
    p.add_argument("q")
    p.set_defaults(func=cmd_exchange)

    p = sub.add_parser("graph", parents=[common, src, xp], help="exchangeability graph on box(d, N)")
    p.add_argument("--box", type=int, required=True)
    p.add_argument("--strategy", choices=("complete", "components", "sample"), default="complete")
    p.add_argument("--sample", type=int, default=500)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("bce", parents=[common, src, xp], help="component diameters for box(d, 0..N)")
    p.add_argument("--max-box", type=int, default=1)
    p.set_defaults(func=cmd_bce)

    p = sub.add_parser("claim", parents=[common, src], help="run a claim verifier")
    p.add_argument("name", choices=("good-wave", "blue-sky", "pasting", "weak-mixing", "worm-chain",
                                    "periodic-density"))
    p.add_argument("--torus", default="3,3,5", help="torus periods (good-wave, pasting)")
    p.add_argument("--n", type=int, help="window radius (default 1; worm-chain 4)")
    p.add_argument("--ring", type=int)
    p.add_argument("--sample", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--periods")
    p.add_argument("--c1")
    p.add_argument("--c2")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--col-a", type=int, default=0)
    p.add_argument("--col-b", type=int, default=3)
    p.add_argument("--render-dir", help="write SVG renders of counterexample artifacts here")
    p.set_defaults(func=cmd_claim)

    p = sub.add_parser("render", parents=[common, src], help="render a pattern or torus")
    p.add_argument("input")
    p.add_argument("--format", choices=("svg", "ppm"))
    p.add_argument("--planes", help="z planes for 3D sheets, e.g. -1,0,1,2")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("export", parents=[common, src], help="write a shift spec or a flat-wave torus")
    p.add_argument("--flat-wave", help="periods of a flat-wave X_GW torus")
    p.set_defaults(func=cmd_export)
    return ap


def _error_line(kind: str, message: str) -> str:
    return json.dumps({"error": kind, "message": message}, sort_keys=True)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _emit_run_header(args)
        return args.func(args)
    except BudgetExhausted as e:
        print(_error_line("BudgetExhausted", str(e)), file=sys.stderr)
        return EXIT_BUDGET
    except InvalidInput as e:
        print(_error_line(type(e).__name__, str(e).splitlines()[0] if str(e) else ""), file=sys.stderr)
        return EXIT_INPUT
    except (SftError, ValueError, KeyError) as e:
        print(_error_line(type(e).__name__, str(e).replace("\n", " ")), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
