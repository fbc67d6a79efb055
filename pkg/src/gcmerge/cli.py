"""Command-line front end.

Exit codes: 0 when the result is positive, 1 for a negative verdict and 2
for usage, input or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import serialize
from .parser import ParseError, format_type, parse_choreography, parse_global_type, pretty_print
from .semantics import BuiltinEnv, run
from .syntax import Chan, Choreography, GlobalType, Role, Sess, Start
from .terms import alpha_equal, alpha_equal_type, etas, well_formed
from .transform import FreshnessError, merge, simplify
from .typealg import ExtractError, extract_type, mesh_member
from .typecheck import SessionState, SortEnv, typecheck
from .verify import completeness_check, soundness_check

OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def load_choreography(path: str) -> Choreography:
    c = parse_choreography(_read(path), origin=path)
    diags = well_formed(c)
    if diags:
        d = diags[0]
        raise UsageError(f"{path}: ill-formed choreography at {'/'.join(d.path) or 'root'}: {d.message}")
    return c


def load_protocols(paths: Sequence[str]) -> dict[str, GlobalType]:
    out: dict[str, GlobalType] = {}
    for path in paths:
        for name, g in parse_global_type(_read(path), origin=path).items():
            if name in out:
                raise UsageError(f"{path}: protocol {name} is defined twice")
            out[name] = g
    return out


def load_env(path: str | None, chor_path: str | None) -> BuiltinEnv:
    if path is None and chor_path is not None:
        default = Path(chor_path).with_suffix(".env.json")
        if default.exists():
            path = str(default)
    if path is None:
        return BuiltinEnv()
    try:
        return BuiltinEnv.from_json(json.loads(_read(path)))
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{path}: bad environment: {e}") from None


def sort_env(env: BuiltinEnv) -> SortEnv:
    return SortEnv(env.binding_sorts(), env.signatures())


def bind_channels(c: Choreography, protocols: dict[str, GlobalType], binds: Sequence[str]) -> dict[Chan, GlobalType]:
    """Map public channels to protocols: explicit ``a=Ga`` first, then by name ``a`` or ``Ga``."""
    explicit = {}
    for b in binds:
        chan, sep, name = b.partition("=")
        if not sep or not chan or not name:
            raise UsageError(f"--bind expects CHAN=PROTOCOL, got {b!r}")
        if name not in protocols:
            raise UsageError(f"--bind {b}: no protocol named {name}")
        explicit[chan] = protocols[name]
    gamma = {}
    for eta in etas(c):
        if isinstance(eta, Start):
            ch = eta.chan.name
            for g in (explicit.get(ch), protocols.get(ch), protocols.get("G" + ch)):
                if g is not None:
                    gamma[eta.chan] = g
                    break
    return gamma


def pick_protocol(protocols: dict[str, GlobalType], name: str | None, path: str) -> GlobalType:
    if name is not None:
        if name not in protocols:
            raise UsageError(f"{path}: no protocol named {name}")
        return protocols[name]
    if len(protocols) != 1:
        raise UsageError(f"{path}: defines {len(protocols)} protocols, choose one with --name")
    return next(iter(protocols.values()))


def _emit(args: argparse.Namespace, doc: Any, text: str) -> None:
    if args.format == "json":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args: argparse.Namespace) -> int:
    text = _read(args.file)
    if args.file.endswith(".gt"):
        protocols = parse_global_type(text, origin=args.file)
        doc = {name: serialize.type_json(g) for name, g in protocols.items()}
        out = "".join(f"protocol {name} {{ {format_type(g)} }}\n" for name, g in protocols.items())
    else:
        c = load_choreography(args.file)
        doc = serialize.choreography_json(c)
        out = pretty_print(c)
    _emit(args, doc, out)
    return OK


def cmd_check(args: argparse.Namespace) -> int:
    c = load_choreography(args.file)
    protocols = load_protocols(args.protocols)
    gamma = bind_channels(c, protocols, args.bind)
    report = typecheck(gamma, c, {}, sort_env(load_env(args.env, args.file)))
    lines = ["ok"] if report.ok else [f"{'/'.join(p) or 'root'}: {m}" for p, m in report.errors]
    _emit(args, serialize.type_report_json(report), "\n".join(lines))
    return OK if report.ok else NEGATIVE


def cmd_run(args: argparse.Namespace) -> int:
    c = load_choreography(args.file)
    trace = run(c, load_env(args.env, args.file), args.fuel)
    lines = [_event_text(ev) for ev in trace.events]
    lines.append(
        f"steps: {len(trace.steps)}  startCount: {trace.start_count}  fuelExhausted: {str(trace.fuel_exhausted).lower()}"
    )
    if trace.error is not None:
        lines.append(f"error: {trace.error}")
    _emit(args, serialize.trace_json(trace), "\n".join(lines))
    return OK if trace.error is None else NEGATIVE


def cmd_merge(args: argparse.Namespace) -> int:
    c = load_choreography(args.file)
    merged = merge(c, Sess(args.session), Chan(args.chan))
    text = pretty_print(merged)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    _emit(args, {"merged": text, "ast": serialize.choreography_json(merged)}, text)
    return OK


def cmd_extract(args: argparse.Namespace) -> int:
    c = load_choreography(args.file)
    if args.merge:
        c = simplify(c, Sess(args.session)).merged
    try:
        g = extract_type(c, sort_env(load_env(args.env, args.file)))
    except ExtractError as e:
        _emit(args, {"ok": False, "error": {"kind": e.kind, "message": str(e), "path": list(e.path)}}, f"error: {e}")
        return NEGATIVE
    _emit(args, {"ok": True, "type": format_type(g), "ast": serialize.type_json(g)}, format_type(g))
    return OK


def cmd_mesh(args: argparse.Namespace) -> int:
    cand = pick_protocol(load_protocols([args.candidate]), args.name, args.candidate)
    originals = list(load_protocols(args.against).values())
    report = mesh_member(cand, originals, args.D, args.L, args.M, strict=args.strict)
    _emit(args, serialize.mesh_report_json(report), _mesh_text(report))
    return OK if report.member else NEGATIVE


def cmd_verify(args: argparse.Namespace) -> int:
    c = load_choreography(args.file)
    env = load_env(args.env, args.file)
    k = Sess(args.session)
    verdicts = [soundness_check(c, k, env, args.depth), completeness_check(c, k, env, args.depth)]
    _emit(args, [serialize.verdict_json(v) for v in verdicts], "\n".join(_verdict_text(v) for v in verdicts))
    return OK if all(v.passed for v in verdicts) else NEGATIVE


def cmd_pipeline(args: argparse.Namespace) -> int:
    c = load_choreography(args.file)
    protocols = load_protocols(args.protocols)
    env = load_env(args.env, args.file)
    sorts = sort_env(env)
    k, chan = Sess(args.session), Chan(args.chan)
    gamma = bind_channels(c, protocols, args.bind)
    doc: dict[str, Any] = {}
    lines: list[str] = []
    ok = True

    report = typecheck(gamma, c, {}, sorts)
    doc["check"] = serialize.type_report_json(report)
    lines.append("check         " + ("ok" if report.ok else f"{len(report.errors)} error(s)"))
    lines += [f"  {'/'.join(p) or 'root'}: {m}" for p, m in report.errors]
    ok &= report.ok

    m = simplify(c, k)
    merged = merge(c, k, chan)
    doc["merged"] = pretty_print(merged)
    lines.append("merge         " + pretty_print(merged).replace("\n", "\n              "))
    if args.golden_merged:
        same = alpha_equal(merged, load_choreography(args.golden_merged), unordered_starts=True)
        doc["mergedMatchesGolden"] = same
        lines.append(f"  golden merged: {'match' if same else 'MISMATCH'}")
        ok &= same

    try:
        g = extract_type(m.merged, sorts)
    except ExtractError as e:
        doc["type"] = None
        lines.append(f"extract       error: {e}")
        _emit(args, {**doc, "ok": False}, "\n".join(lines))
        return NEGATIVE
    doc["type"] = format_type(g)
    lines.append(f"extract       {format_type(g)}")
    if args.golden_type:
        same = alpha_equal_type(g, pick_protocol(load_protocols([args.golden_type]), None, args.golden_type))
        doc["typeMatchesGolden"] = same
        lines.append(f"  golden type: {'match' if same else 'MISMATCH'}")
        ok &= same
    cast = {Role(t.name): t for t in m.threads}
    coherent = typecheck({}, m.merged, {k: SessionState(g, cast)}, sorts)
    doc["mergedCheck"] = serialize.type_report_json(coherent)
    lines.append("merged check  " + ("ok" if coherent.ok else f"{len(coherent.errors)} error(s)"))
    ok &= coherent.ok

    originals = list(dict.fromkeys(gamma.values()))
    mesh = mesh_member(g, originals, args.D, args.L, args.M, strict=args.strict)
    doc["mesh"] = serialize.mesh_report_json(mesh)
    lines.append("mesh          " + _mesh_text(mesh).replace("\n", "\n              "))
    ok &= mesh.member

    for v in (soundness_check(c, k, env, args.depth), completeness_check(c, k, env, args.depth)):
        doc[v.property] = serialize.verdict_json(v)
        lines.append(f"{v.property:<14}{_verdict_text(v).split(': ', 1)[1]}")
        ok &= v.passed

    doc["ok"] = bool(ok)
    lines.append("result        " + ("ok" if ok else "FAILED"))
    _emit(args, doc, "\n".join(lines))
    return OK if ok else NEGATIVE


# ---------------------------------------------------------------------------
# text renderings


def _event_text(ev) -> str:
    d = serialize.event_json(ev)
    kind = d.pop("kind")
    return f"{kind:<5} " + json.dumps(d, separators=(",", ":"))


def _word_text(word) -> str:
    return " . ".join(str(ev) for ev in word) or "(empty)"


def _mesh_text(r) -> str:
    d, base, m = r.bounds
    head = f"{'member' if r.member else 'not a member'} (D={d}, L={base}, M={m}, {r.checked_paths} maximal paths)"
    if r.failing is not None:
        return f"{head}\nfailing path: {_word_text(r.failing)}"
    return head


def _verdict_text(v) -> str:
    status = "passed" if v.passed else "FAILED"
    kinds = sorted({m.kind for m in v.weakenings})
    line = f"{v.property}: {status} ({v.depth_checked} steps checked"
    line += f"; weakenings: {', '.join(kinds)})" if kinds else ")"
    if v.counterexample is not None:
        line += f"\n  {v.counterexample.explanation}"
    return line


# ---------------------------------------------------------------------------
# argument parsing


def _positive(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return n


def _natural(s: str) -> int:
    n = int(s)
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcmerge", description="Merge the sessions of a choreography and check the result.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common])

    def mesh_bounds(p: argparse.ArgumentParser) -> None:
        p.add_argument("-D", type=_positive, default=8, help="depth bound on candidate paths")
        p.add_argument("-L", type=_positive, default=5, help="depth bound on base paths")
        p.add_argument("-M", type=_positive, default=None, help="max interleaved components (default: number of originals)")
        p.add_argument("--strict", action="store_true", help="each component repeats one fixed base path")

    p = add("parse", "parse a .gc choreography or .gt protocols file")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = add("check", "typecheck a choreography against protocols")
    p.add_argument("file")
    p.add_argument("--protocols", nargs="+", required=True)
    p.add_argument("--bind", action="append", default=[], metavar="CHAN=PROTOCOL")
    p.add_argument("--env")
    p.set_defaults(func=cmd_check)

    p = add("run", "execute a choreography")
    p.add_argument("file")
    p.add_argument("--env")
    p.add_argument("--fuel", type=_natural, default=100)
    p.set_defaults(func=cmd_run)

    p = add("merge", "merge all sessions into one")
    p.add_argument("file")
    p.add_argument("--session", default="k")
    p.add_argument("--chan", default="c")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_merge)

    p = add("extract", "extract the global type of a single-session choreography")
    p.add_argument("file")
    p.add_argument("--env")
    p.add_argument("--merge", action="store_true", help="merge sessions first")
    p.add_argument("--session", default="k")
    p.set_defaults(func=cmd_extract)

    p = add("mesh", "bounded mesh membership of a candidate type")
    p.add_argument("--candidate", required=True)
    p.add_argument("--name", help="protocol to use from the candidate file")
    p.add_argument("--against", nargs="+", required=True)
    mesh_bounds(p)
    p.set_defaults(func=cmd_mesh)

    p = add("verify", "bounded soundness and completeness of merging")
    p.add_argument("file")
    p.add_argument("--session", default="k")
    p.add_argument("--env")
    p.add_argument("--depth", type=_natural, default=12)
    p.set_defaults(func=cmd_verify)

    p = add("pipeline", "check, merge, extract, mesh and verify in sequence")
    p.add_argument("file")
    p.add_argument("--protocols", nargs="+", required=True)
    p.add_argument("--bind", action="append", default=[], metavar="CHAN=PROTOCOL")
    p.add_argument("--env")
    p.add_argument("--session", default="k")
    p.add_argument("--chan", default="c")
    p.add_argument("--depth", type=_natural, default=12)
    p.add_argument("--golden-merged")
    p.add_argument("--golden-type")
    mesh_bounds(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, UsageError, FreshnessError) as e:
        print(f"gcmerge: {e}", file=sys.stderr)
        return USAGE
