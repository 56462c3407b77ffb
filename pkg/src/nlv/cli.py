"""Command-line front end: ``nlv list|show|verify|certificate|reduce``.

Exit codes: 0 claim verified / success, 1 claim refuted, 2 inconclusive,
64 usage error, 65 input format error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

from . import constructions
from .opm import (
    NontrivialWitness,
    certificate,
    certificate_to_dict,
    constraint_system,
    format_matrix,
)
from .partitions import Grouping, GroupingError, coarse_grain
from .reduction import (
    ProtocolError,
    ReductionError,
    Verdict,
    check_projective_reduction,
    find_coordinate_reduction,
    leaves_to_dict,
    load_protocol,
    outcome_to_dict,
    run_protocol,
)
from .states import FormatError, StateError, StateSet, dumps_state_set, load_state_set
from .verdicts import (
    Irreducibility,
    StrongNonlocality,
    VerdictError,
    local_irreducibility_report,
    strong_nonlocality_report,
)

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_FORMAT = 65


class UsageError(Exception):
    pass


class InputFormatError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _resolve_set(ref: str) -> StateSet:
    try:
        return constructions.build(ref)
    except constructions.UnknownConstruction:
        pass
    if os.path.isfile(ref):
        try:
            return load_state_set(ref)
        except (FormatError, StateError) as e:
            raise InputFormatError(f"{ref}: {e}") from None
    raise UsageError(f"unknown set {ref!r} (not a builtin name or an existing file)")


def _grouped(s: StateSet, grouping: Optional[str], one_based: bool):
    if not grouping:
        return s, Grouping.singletons(s.profile.n)
    try:
        g = Grouping.parse(grouping, one_based)
    except GroupingError as e:
        raise UsageError(str(e)) from None
    if g.n != s.profile.n:
        raise UsageError(f"grouping {grouping!r} does not cover the {s.profile.n} parties")
    return coarse_grain(s, g), g


def _party(s: StateSet, party: int, one_based: bool) -> int:
    p = party - (1 if one_based else 0)
    if not 0 <= p < s.profile.n:
        raise UsageError(f"party {party} out of range")
    return p


def _print_json(obj, out):
    out.write(json.dumps(obj, indent=2) + "\n")


def cmd_list(args, out) -> int:
    rows = []
    for name in constructions.names():
        s = constructions.build(name)
        rows.append({"name": name, "dims": list(s.profile.dims), "states": len(s)})
    if args.json:
        _print_json(rows, out)
    else:
        for r in rows:
            out.write(f"{r['name']} dims={','.join(map(str, r['dims']))} states={r['states']}\n")
    return EXIT_OK


def cmd_show(args, out) -> int:
    try:
        s = constructions.build(args.set)
    except constructions.UnknownConstruction:
        raise UsageError(f"unknown builtin set {args.set!r}") from None
    out.write(dumps_state_set(s) + "\n")
    return EXIT_OK


def _fmt_subset(subset, base):
    return "{" + ",".join(str(k + base) for k in subset) + "}"


def cmd_verify(args, out) -> int:
    s = _resolve_set(args.set)
    base = 1 if args.one_based else 0
    try:
        if args.mode == "strong":
            report = strong_nonlocality_report(s, certificates=args.certificates)
        else:
            report = local_irreducibility_report(s, certificates=args.certificates)
    except VerdictError as e:
        raise UsageError(str(e)) from None
    data = report.to_dict(base)
    if args.json:
        _print_json(data, out)
    else:
        out.write(f"set {data['set'] or args.set} dims={','.join(map(str, data['dims']))}\n")
        if args.mode == "strong":
            for b in data["bipartitions"]:
                sides = ", ".join(
                    f"side {p['party']}: dim={p['dimension']}"
                    + (f" reduction={_fmt_subset(p['reduction'], 0)}" if p["reduction"] else "")
                    for p in b["sides"]
                )
                out.write(f"  {b['grouping']:<8} {b['verdict']:<22} {sides}\n")
            if "witness" in data:
                w = data["witness"]
                out.write(
                    f"witness: bipartition {w['grouping']}, party {w['party']}, "
                    f"subset {_fmt_subset(w['subset'], 0)}\n"
                )
        else:
            for p in data["parties"]:
                red = f" reduction={_fmt_subset(p['reduction'], 0)}" if p["reduction"] else ""
                out.write(f"  party {p['party']}: dim={p['dimension']} trivial={p['trivial']}{red}\n")
        for note in data["advisories"]:
            out.write(f"advisory: {note}\n")
        if args.certificates:
            for c in data["certificates"]:
                out.write(f"certificate ({c.get('grouping', '')} party {c['party']}):\n")
                for st in c["steps"]:
                    out.write(f"  {_step_line(st)}\n")
        out.write(f"verdict: {data['verdict']}\n")
    v = report.verdict
    if v in (Irreducibility.CERTIFIED_IRREDUCIBLE, StrongNonlocality.CERTIFIED):
        return EXIT_OK
    if v in (Irreducibility.CERTIFIED_REDUCIBLE, StrongNonlocality.NOT):
        return EXIT_REFUTED
    return EXIT_INCONCLUSIVE


def _step_line(st: dict) -> str:
    part = f" ({st['part']} part)" if "part" in st else ""
    concl = f"{st['entry']} = 0{part}" if st["fact"] == "zero" else f"{st['entry']} = {st['fact'][7:]}"
    return f"{st['pair'][0]:<18} {st['pair'][1]:<18} {concl}"


def cmd_certificate(args, out) -> int:
    s, _ = _grouped(_resolve_set(args.set), args.grouping, args.one_based)
    party = _party(s, args.party, args.one_based)
    base = 1 if args.one_based else 0
    cs = constraint_system(s, party)
    cert = certificate(cs)
    data = certificate_to_dict(cs, cert, base)
    if args.json:
        _print_json(data, out)
    elif isinstance(cert, NontrivialWitness):
        out.write("nontrivial: traceless orthogonality-preserving witness\n")
        out.write(format_matrix(cert.matrix()) + "\n")
    else:
        out.write(f"{'state':<18} {'state':<18} conclusion\n")
        for st in data["steps"]:
            out.write(_step_line(st) + "\n")
        for r in data["residual"]:
            out.write(f"residual: {r}\n")
        out.write("trivial: every orthogonality-preserving POVM element is proportional to 1\n")
    return EXIT_OK if not isinstance(cert, NontrivialWitness) else EXIT_REFUTED


def cmd_reduce(args, out) -> int:
    s = _resolve_set(args.set)
    base = 1 if args.one_based else 0
    if args.protocol:
        try:
            proto = load_protocol(args.protocol, args.one_based)
            leaves = run_protocol(s, proto)
        except ProtocolError as e:
            raise InputFormatError(str(e)) from None
        except OSError as e:
            raise UsageError(str(e)) from None
        data = {"set": s.name, "leaves": leaves_to_dict(s, leaves)}
        if args.json:
            _print_json(data, out)
        else:
            for leaf in data["leaves"]:
                tag = "identified" if leaf["identified"] else "multi-state"
                path = " ".join(f"p{st['party'] + base}{_fmt_subset(st['subset'], base)}" for st in leaf["path"])
                out.write(f"[{path or 'root'}] {tag}: {', '.join(leaf['survivors'])}\n")
        return EXIT_OK
    g_set, _ = _grouped(s, args.grouping, args.one_based)
    party = _party(g_set, args.party, args.one_based)
    try:
        if args.subset is not None:
            try:
                subset = [int(t) - base for t in args.subset.split(",") if t.strip()]
            except ValueError:
                raise UsageError(f"bad subset {args.subset!r}") from None
            check = check_projective_reduction(g_set, party, subset)
            data = {"verdict": check.verdict.value}
            if check.outcome is not None:
                data["outcome"] = outcome_to_dict(g_set, check.outcome)
            if check.violation is not None:
                data["violation"] = [g_set.labels()[i] for i in check.violation]
            found = check.verdict is Verdict.REDUCING
        else:
            subset = find_coordinate_reduction(g_set, party)
            data = {"subset": None if subset is None else [k + base for k in subset]}
            found = subset is not None
            if found:
                check = check_projective_reduction(g_set, party, subset)
                data["outcome"] = outcome_to_dict(g_set, check.outcome)
    except ReductionError as e:
        raise UsageError(str(e)) from None
    if args.json:
        _print_json(data, out)
    else:
        if "verdict" in data:
            out.write(f"verdict: {data['verdict']}\n")
        elif found:
            out.write(f"subset {_fmt_subset(data['subset'], 0)}\n")
        else:
            out.write("none: no reducing coordinate projector\n")
        if "violation" in data:
            out.write(f"orthogonality broken for {data['violation'][0]}, {data['violation'][1]}\n")
        if "outcome" in data:
            for b in data["outcome"]["branches"]:
                out.write(
                    f"  branch {_fmt_subset(b['subset'], base)}: keeps {len(b['survivors'])}"
                    f" [{', '.join(b['survivors'])}]\n"
                )
    return EXIT_OK if found else EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlv", description="Exact local-irreducibility verifier")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("list", help="list builtin state sets")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("show", help="dump a builtin set as JSON")
    sp.add_argument("--set", required=True)
    sp.set_defaults(func=cmd_show)

    def common(sp):
        sp.add_argument("--set", required=True, help="builtin name or JSON file")
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--one-based", action="store_true", help="1-based party/label indices")

    sp = sub.add_parser("verify", help="irreducibility or strong nonlocality verdict")
    common(sp)
    sp.add_argument("--mode", choices=("irreducible", "strong"), default="irreducible")
    sp.add_argument("--certificates", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("certificate", help="forcing derivation or nontrivial witness")
    common(sp)
    sp.add_argument("--grouping", help='e.g. "0|1,2"')
    sp.add_argument("--party", type=int, required=True)
    sp.set_defaults(func=cmd_certificate)

    sp = sub.add_parser("reduce", help="coordinate-projector reduction or protocol replay")
    common(sp)
    sp.add_argument("--grouping")
    sp.add_argument("--party", type=int)
    sp.add_argument("--subset", help="comma-separated labels")
    sp.add_argument("--protocol", help="protocol JSON file")
    sp.set_defaults(func=cmd_reduce)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command == "reduce" and not args.protocol and args.party is None:
            raise UsageError("reduce needs --party (or --protocol)")
        return args.func(args, out)
    except UsageError as e:
        sys.stderr.write(f"nlv: usage error: {e}\n")
        return EXIT_USAGE
    except InputFormatError as e:
        sys.stderr.write(f"nlv: input error: {e}\n")
        return EXIT_FORMAT


def entry_point():
    sys.exit(main())
