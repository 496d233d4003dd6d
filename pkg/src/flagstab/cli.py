"""Command-line entry point: ``flagstab VERB [options]``.

Every verb reads JSON documents (a file path, or inline JSON starting with
``{`` or ``[``), runs one library operation plus its consistency checks, and
writes a deterministic report.  Exit codes: 0 pass, 1 a check failed,
2 input or precondition error, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import FlagstabError, InputError, InvariantError
from .exact_linalg import Subspace, intersect, span, subspace_sum
from .flagkit import Chain, GeneralizedFlag, fl_from_chain, flag_report, is_isotropic_flag, twin
from .liealg import (
    Ambient,
    LineSystem,
    element_type,
    generated_subalgebra,
    is_maximal_solvable,
    is_solvable,
    line_system,
    matrix,
    nilpotent_subalgebra,
    normalizer,
    stabilizer,
    toral_subalgebra,
)
from .limits import PairingDescriptor, closure_certified, descriptor_from_json, perp_certified
from .pairing import Pairing, classify, closure, perp
from .report import Report, conventions, digest
from .scenarios import BUILTIN_NAMES, CHECKS, builtin, parse_levels, verify_levels, worker_count


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message, field="arguments")


class _Inputs:
    """Loads named JSON documents and remembers their bytes for the digest."""

    def __init__(self):
        self.raw: dict = {}

    def load(self, name: str, arg: str):
        text = arg.strip()
        if text.startswith(("{", "[")):
            data = text.encode()
        else:
            try:
                data = Path(arg).read_bytes()
            except OSError as exc:
                raise InputError(f"cannot read {name} document {arg!r}: {exc.strerror}", field=name) from None
        self.raw[name] = data
        try:
            return json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise InputError(f"{name} is not valid JSON: {exc}", field=name) from None

    def note(self, name: str, value):
        self.raw[name] = str(value).encode()

    @property
    def digest(self) -> str:
        return digest(self.raw)


# -- document readers ----------------------------------------------------------


def _need(doc, key: str, field: str):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"{field} document needs {key!r}", field=field)
    return doc[key]


def read_subspace(doc, field: str = "subspace") -> Subspace:
    n = _need(doc, "ambient_dim", field)
    if not isinstance(n, int) or n <= 0:
        raise InputError("ambient_dim must be a positive integer", field=field)
    if "basis" in doc:
        # serialized subspaces must already be canonical
        return Subspace.from_json(doc)
    rows = doc.get("vectors")
    if not isinstance(rows, list):
        raise InputError(f"{field} document needs a 'basis' (RREF) or 'vectors' list", field=field)
    return span(rows, n)


def read_flag(doc) -> GeneralizedFlag:
    n = _need(doc, "ambient_dim", "flag")
    if "pairs" in doc:
        return GeneralizedFlag.from_json(doc)
    if "members" in doc:
        members = [read_subspace({"ambient_dim": n, **m}, "flag") for m in doc["members"]]
        return GeneralizedFlag.from_members(members, n)
    if "vectors" in doc:
        return GeneralizedFlag.from_vectors(doc["vectors"], n)
    raise InputError("flag document needs 'pairs', 'members' or 'vectors'", field="flag")


def read_chain(doc) -> Chain:
    n = _need(doc, "ambient_dim", "chain")
    members = [read_subspace({"ambient_dim": n, **m}, "chain") for m in _need(doc, "members", "chain")]
    return Chain.of(members + [Subspace.zero(n), Subspace.full(n)], n)


def read_line_system(doc, dim: int) -> LineSystem:
    def lines(key):
        out = []
        for item in _need(doc, key, "lines"):
            line = item.get("line", item)
            out.append((int(_need(item, "index", "lines")), read_subspace({"ambient_dim": dim, **line}, "lines")))
        return tuple(out)

    return LineSystem(lines("lines_L"), lines("lines_M"))


def _subspace_result(S: Subspace) -> dict:
    return {"dim": S.dim, **S.to_json()}


def _algebra_result(b) -> dict:
    return {"dim": b.dim, "basis": b.to_json()["basis"]}


def _pairing_conventions(P: Pairing, domain=None) -> dict:
    return conventions(P.kind, domain)


# -- verbs ---------------------------------------------------------------------


def cmd_span(args, inp: _Inputs) -> Report:
    S = read_subspace(inp.load("input", args.input), "input")
    rep = Report("span", conventions(), inp.digest, {"subspace": _subspace_result(S)})
    rep.check("rref_roundtrip", Subspace.from_json(S.to_json()) == S)
    return rep


def _descriptor_mode(args, inp: _Inputs, verb: str) -> Report:
    d = descriptor_from_json(inp.load("descriptor", args.descriptor))
    P = PairingDescriptor.from_json(inp.load("pairing", args.pairing))
    if args.level is None:
        raise InputError("descriptor mode needs --level", field="level")
    inp.note("level", args.level)
    inp.note("lookahead", args.lookahead)
    op = perp_certified if verb == "perp" else closure_certified
    S, cert = op(d, P, args.level, args.lookahead)
    result = {"subspace": _subspace_result(S), "certificate": cert.to_json(), "level_labels": list(P.domain.labels(args.level))}
    rep = Report(verb, conventions(P.kind, P.domain.kind), inp.digest, result)
    rep.check("certificate_stable", cert.stable, f"level {cert.level}, lookahead {cert.lookahead}")
    return rep


def cmd_perp(args, inp: _Inputs) -> Report:
    if args.descriptor:
        return _descriptor_mode(args, inp, "perp")
    S = read_subspace(inp.load("subspace", _required(args.subspace, "--subspace")))
    P = Pairing.from_json(inp.load("form", _required(args.form, "--form")))
    inp.note("side", args.side)
    Sp = perp(S, P, args.side)
    other = "right" if args.side == "left" else "left"
    rep = Report("perp", _pairing_conventions(P), inp.digest, {"side": args.side, "perp": _subspace_result(Sp)})
    rep.check("triple_perp", perp(perp(Sp, P, other), P, args.side) == Sp, "S^perp = S^perp-perp-perp")
    return rep


def cmd_closure(args, inp: _Inputs) -> Report:
    if args.descriptor:
        return _descriptor_mode(args, inp, "closure")
    S = read_subspace(inp.load("subspace", _required(args.subspace, "--subspace")))
    P = Pairing.from_json(inp.load("form", _required(args.form, "--form")))
    C = closure(S, P)
    result = {"closure": _subspace_result(C), "is_closed": C == S}
    if P.is_form:
        result["classification"] = classify(S, P).to_json()
    rep = Report("closure", _pairing_conventions(P), inp.digest, result)
    rep.check("contains_input", S <= C)
    rep.check("idempotent", closure(C, P) == C)
    return rep


def cmd_flag(args, inp: _Inputs) -> Report:
    C = read_chain(inp.load("chain", _required(args.chain, "--chain")))
    F = fl_from_chain(C, Subspace.full(C.ambient_dim))
    result = {"flag": F.to_json()}
    conv = conventions()
    rep_checks = []
    if args.form:
        P = Pairing.from_json(inp.load("form", args.form))
        result["report"] = flag_report(F, P).to_json()
        if P.is_form:
            result["isotropic"] = is_isotropic_flag(F, P)
        conv = _pairing_conventions(P)
    rep = Report("flag", conv, inp.digest, result, rep_checks)
    again = fl_from_chain(Chain.of(F.members, C.ambient_dim), Subspace.full(C.ambient_dim))
    rep.check("fl_idempotent", again == F)
    return rep


def _flag_and_ambient(args, inp: _Inputs):
    F = read_flag(inp.load("flag", _required(args.flag, "--flag")))
    A = Ambient.from_json(inp.load("ambient", _required(args.ambient, "--ambient")))
    return F, A


def cmd_stab(args, inp: _Inputs) -> Report:
    F, A = _flag_and_ambient(args, inp)
    inp.note("mode", args.mode)
    modes = ("brute", "formula") if args.mode == "both" else (args.mode,)
    found = {m: stabilizer(F, A, m) for m in modes}
    result = {"ambient": {"kind": A.kind, "dim": A.dim}, "stabilizers": {m: _algebra_result(b) for m, b in found.items()}}
    rep = Report("stab", _pairing_conventions(A.form), inp.digest, result)
    if args.mode == "both":
        equal = found["brute"].space == found["formula"].space
        result["equal"] = equal
        rep.check("brute_equals_formula", equal)
    for m, b in found.items():
        rep.check(f"{m}_is_subalgebra_of_ambient", b.space <= A.space)
    return rep


def cmd_borel(args, inp: _Inputs) -> Report:
    if args.generators:
        A = Ambient.from_json(inp.load("ambient", _required(args.ambient, "--ambient")))
        gens = [matrix(M) for M in inp.load("generators", args.generators)]
        b = generated_subalgebra(gens, A)
    else:
        F, A = _flag_and_ambient(args, inp)
        b = stabilizer(F, A)
    result = {"subalgebra": _algebra_result(b), "derived_dims": [g.dim for g in b.derived_series]}
    rep = Report("borel", _pairing_conventions(A.form), inp.digest, result)
    solvable = rep.check("solvable", is_solvable(b))
    if solvable:
        maximal = is_maximal_solvable(b)
        result["maximal_solvable"] = maximal
        rep.check("maximal_solvable", maximal)
        rep.check("self_normalizing", normalizer(b, A).space == b.space)
    return rep


def cmd_toral(args, inp: _Inputs) -> Report:
    F, A = _flag_and_ambient(args, inp)
    if args.lines:
        ls = read_line_system(inp.load("lines", args.lines), A.n)
    else:
        ls = line_system(F, A)
    t = toral_subalgebra(ls, A)
    nil = nilpotent_subalgebra(F, A)
    b = stabilizer(F, A)
    result = {
        "line_system": ls.to_json(),
        "toral": _algebra_result(t),
        "nilpotent": _algebra_result(nil),
        "stabilizer_dim": b.dim,
    }
    rep = Report("toral", _pairing_conventions(A.form), inp.digest, result)
    rep.check("span_is_stabilizer", subspace_sum(t.space, nil.space) == b.space, "b = t + n")
    rep.check("trivial_intersection", intersect(t.space, nil.space).is_zero())
    rep.check("dimensions_add", t.dim + nil.dim == b.dim)
    rep.check("toral_semisimple", all(element_type(Z) == "semisimple" for Z in t.basis))
    rep.check("nilpotent_nilpotent", all(element_type(Z) == "nilpotent" for Z in nil.basis))
    return rep


def cmd_twin(args, inp: _Inputs) -> Report:
    F = read_flag(inp.load("flag", _required(args.flag, "--flag")))
    P = Pairing.from_json(inp.load("form", _required(args.form, "--form")))
    T = twin(F, P)
    result = {"twin": "none" if T is None else T.to_json()}
    rep = Report("twin", _pairing_conventions(P), inp.digest, result)
    if T is not None:
        rep.check("involution", twin(T, P) == F, "tw(tw(F)) = F")
        rep.check("distinct", T != F)
    return rep


def _verify(sc_name: str, props, levels_text: str, inp: _Inputs, verb: str) -> Report:
    sc = builtin(sc_name)
    levels = parse_levels(levels_text)
    inp.note("scenario", sc_name)
    inp.note("levels", levels_text)
    inp.note("properties", ",".join(props))
    pairing = sc.pairing.kind if sc.pairing else None
    domain = sc.pairing.domain.kind if sc.pairing else None
    rep = Report(verb, conventions(pairing, domain), inp.digest, {"scenario": sc.to_json(), "levels": levels})
    workers = worker_count()
    reports = []
    for prop in props:
        vr = verify_levels(sc, prop, levels, workers=workers)
        reports.append(vr.to_json())
        for r in vr.results:
            detail = json.dumps(r.summary, sort_keys=True, ensure_ascii=False)
            rep.check(f"{prop} @ level {r.level}", r.passed, detail)
            for w in r.witnesses:
                rep.witnesses.append({"property": prop, "level": r.level, **w})
    rep.result["reports"] = reports
    return rep


def cmd_limits_verify(args, inp: _Inputs) -> Report:
    return _verify(args.scenario, [args.property], args.levels, inp, "limits-verify")


def cmd_example(args, inp: _Inputs) -> Report:
    sc = builtin(args.name)
    props = [args.check] if args.check else list(sc.properties)
    return _verify(args.name, props, args.levels, inp, "example")


def _required(value, flag: str):
    if value is None:
        raise InputError(f"missing required option {flag}", field=flag.lstrip("-"))
    return value


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "markdown"), default=argparse.SUPPRESS)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    common.add_argument("--metadata", default=argparse.SUPPRESS, help="write run metadata (timing, version) here")

    parser = _Parser(prog="flagstab", description="Exact flag, stabilizer and Borel computations.")
    parser.add_argument("--format", choices=("json", "markdown"), default="json")
    parser.add_argument("--output", "-o")
    parser.add_argument("--metadata")
    parser.add_argument("--version", action="version", version=f"flagstab {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("span", parents=[common], help="canonical basis of a span")
    p.add_argument("--input", required=True, help='{"ambient_dim": n, "vectors": [...]}')
    p.set_defaults(run=cmd_span)

    for verb, fn in (("perp", cmd_perp), ("closure", cmd_closure)):
        p = sub.add_parser(verb, parents=[common], help=f"{verb} of a subspace or a descriptor")
        p.add_argument("--subspace")
        p.add_argument("--form", help="pairing document")
        if verb == "perp":
            p.add_argument("--side", choices=("left", "right"), default="left")
        p.add_argument("--descriptor", help="stable or template descriptor (certified mode)")
        p.add_argument("--pairing", help="pairing descriptor for certified mode")
        p.add_argument("--level", type=int)
        p.add_argument("--lookahead", type=int, default=1)
        p.set_defaults(run=fn)

    p = sub.add_parser("flag", parents=[common], help="fl(C) of a chain and its properties")
    p.add_argument("--chain", required=True)
    p.add_argument("--form")
    p.set_defaults(run=cmd_flag)

    p = sub.add_parser("stab", parents=[common], help="stabilizer of a flag")
    p.add_argument("--flag", required=True)
    p.add_argument("--ambient", required=True)
    p.add_argument("--mode", choices=("brute", "formula", "both"), default="brute")
    p.set_defaults(run=cmd_stab)

    p = sub.add_parser("borel", parents=[common], help="maximal solvable test")
    p.add_argument("--flag")
    p.add_argument("--ambient", required=True)
    p.add_argument("--generators", help="list of matrices generating the subalgebra")
    p.set_defaults(run=cmd_borel)

    p = sub.add_parser("toral", parents=[common], help="toral and nilpotent parts of a stabilizer")
    p.add_argument("--flag", required=True)
    p.add_argument("--ambient", required=True)
    p.add_argument("--lines", help="explicit line system; default is the canonical one")
    p.set_defaults(run=cmd_toral)

    p = sub.add_parser("twin", parents=[common], help="twin of a maximal isotropic flag")
    p.add_argument("--flag", required=True)
    p.add_argument("--form", required=True)
    p.set_defaults(run=cmd_twin)

    p = sub.add_parser("limits-verify", parents=[common], help="run one property over levels")
    p.add_argument("--scenario", required=True, choices=BUILTIN_NAMES)
    p.add_argument("--property", required=True, choices=tuple(CHECKS))
    p.add_argument("--levels", required=True, help="a..b")
    p.set_defaults(run=cmd_limits_verify)

    p = sub.add_parser("example", parents=[common], help="run a built-in scenario")
    p.add_argument("name", choices=BUILTIN_NAMES)
    p.add_argument("--levels", required=True, help="a..b")
    p.add_argument("--check", choices=tuple(CHECKS))
    p.set_defaults(run=cmd_example)
    return parser


def _emit_error(exc: FlagstabError) -> int:
    sys.stderr.write(json.dumps(exc.payload(), sort_keys=True, ensure_ascii=False) + "\n")
    return exc.code


def main(argv=None) -> int:
    started = time.time()
    try:
        args = build_parser().parse_args(argv)
        rep = args.run(args, _Inputs())
        text = rep.render(args.format)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        if args.metadata:
            meta = {"version": __version__, "started": started, "seconds": round(time.time() - started, 3)}
            Path(args.metadata).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
        return rep.exit_code
    except FlagstabError as exc:
        return _emit_error(exc)
    except RecursionError as exc:
        return _emit_error(InvariantError(f"recursion limit: {exc}", invariant="recursion"))
    except Exception as exc:  # noqa: BLE001 - a bug must still exit nonzero with a name
        return _emit_error(InvariantError(f"{type(exc).__name__}: {exc}", invariant="unhandled_exception"))


if __name__ == "__main__":
    sys.exit(main())
