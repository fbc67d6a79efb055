"""JSON encodings of terms, events and reports (schema-stable, key order fixed)."""

from __future__ import annotations

from typing import Any

from .parser import format_expr, pretty_print
from .semantics import EvCom, EvCond, Event, EvSel, EvStart, Trace, value_to_json
from .syntax import (
    Call,
    Choreography,
    Com,
    Cond,
    Endpoint,
    GlobalType,
    Inact,
    Rec,
    Res,
    Sel,
    Seq,
    Start,
    TChoice,
    TCom,
    TEnd,
    TRec,
    TVar,
    Value,
    sort_of_value,
)
from .typealg import MeshReport, PathEvent, PCom
from .typecheck import TypeReport
from .verify import Verdict

Json = Any


def value_json(v: Value) -> Json:
    return {"sort": sort_of_value(v).value, "value": value_to_json(v)}


def endpoint_json(e: Endpoint) -> Json:
    return {"thread": e.thread.name, "role": e.role.name}


def eta_json(eta) -> Json:
    match eta:
        case Start(parts, chan, sess):
            return {"kind": "start", "participants": [endpoint_json(p) for p in parts], "chan": chan.name, "session": sess.name}
        case Com(snd, expr, rcv, var, sess):
            return {
                "kind": "com",
                "sender": endpoint_json(snd),
                "expr": format_expr(expr),
                "receiver": endpoint_json(rcv),
                "var": var.name,
                "session": sess.name,
            }
        case Sel(snd, rcv, sess, label):
            return {
                "kind": "sel",
                "sender": endpoint_json(snd),
                "receiver": endpoint_json(rcv),
                "session": sess.name,
                "label": label.name,
            }
    raise TypeError(f"not an eta: {eta!r}")


def choreography_json(c: Choreography) -> Json:
    match c:
        case Seq(eta, cont):
            return {"node": "seq", "eta": eta_json(eta), "cont": choreography_json(cont)}
        case Cond(at, guard, then, orelse):
            return {
                "node": "cond",
                "at": at.name,
                "guard": format_expr(guard),
                "then": choreography_json(then),
                "else": choreography_json(orelse),
            }
        case Rec(var, body):
            return {"node": "rec", "var": var.name, "body": choreography_json(body)}
        case Call(var):
            return {"node": "call", "var": var.name}
        case Res(sess, body):
            return {"node": "res", "session": sess.name, "body": choreography_json(body)}
        case Inact():
            return {"node": "inact"}
    raise TypeError(f"not a choreography: {c!r}")


def type_json(g: GlobalType) -> Json:
    match g:
        case TCom(p, q, sort, cont):
            return {"node": "com", "p": p.name, "q": q.name, "sort": sort.value, "cont": type_json(cont)}
        case TChoice(p, q, branches):
            return {"node": "choice", "p": p.name, "q": q.name, "branches": {lab.name: type_json(b) for lab, b in branches}}
        case TEnd():
            return {"node": "end"}
        case TRec(var, body):
            return {"node": "rec", "var": var.name, "body": type_json(body)}
        case TVar(var):
            return {"node": "var", "var": var.name}
    raise TypeError(f"not a global type: {g!r}")


def event_json(ev: Event) -> Json:
    match ev:
        case EvStart(parts, chan, sess):
            return {"kind": "start", "participants": [endpoint_json(p) for p in parts], "chan": chan.name, "session": sess.name}
        case EvCom(snd, value, rcv, var, sess):
            return {
                "kind": "com",
                "sender": endpoint_json(snd),
                "value": value_json(value),
                "receiver": endpoint_json(rcv),
                "var": var.name,
                "session": sess.name,
            }
        case EvSel(snd, rcv, sess, label):
            return {
                "kind": "sel",
                "sender": endpoint_json(snd),
                "receiver": endpoint_json(rcv),
                "session": sess.name,
                "label": label.name,
            }
        case EvCond(thread, result):
            return {"kind": "cond", "thread": thread.name, "result": result}
    raise TypeError(f"not an event: {ev!r}")


def path_event_json(ev: PathEvent) -> Json:
    if isinstance(ev, PCom):
        return {"kind": "com", "p": ev.p.name, "q": ev.q.name, "sort": ev.sort.value}
    return {"kind": "sel", "p": ev.p.name, "q": ev.q.name, "label": ev.label.name}


def word_json(word) -> Json:
    return [path_event_json(ev) for ev in word]


def type_report_json(r: TypeReport) -> Json:
    return {
        "ok": r.ok,
        "errors": [{"path": list(path), "message": msg} for path, msg in r.errors],
        "completedSessions": sorted(k.name for k in r.completed_sessions),
    }


def trace_json(t: Trace) -> Json:
    err = None
    if t.error is not None:
        err = {"kind": t.error.kind, "message": t.error.message, "path": list(t.error.path)}
    return {
        "steps": len(t.steps),
        "startCount": t.start_count,
        "events": [event_json(ev) for ev in t.events],
        "fuelExhausted": t.fuel_exhausted,
        "final": pretty_print(t.final),
        "error": err,
    }


def mesh_report_json(r: MeshReport) -> Json:
    d, base, m = r.bounds
    return {
        "member": r.member,
        "checkedPaths": r.checked_paths,
        "failing": None if r.failing is None else word_json(r.failing),
        "witnesses": [
            {
                "path": word_json(path),
                "components": [[word_json(w) for w in comp] for comp in wit.components],
                "coloring": list(wit.coloring),
            }
            for path, wit in r.witnesses
        ],
        "bounds": {"D": d, "L": base, "M": m},
        "renaming": {k.name: v.name for k, v in sorted(r.renaming.items(), key=lambda kv: kv[0].name)},
        "mode": "strict" if r.strict else "varying",
    }


def verdict_json(v: Verdict) -> Json:
    cex = None
    if v.counterexample is not None:
        ce = v.counterexample
        cex = {
            "state": pretty_print(ce.state),
            "event": None if ce.event is None else event_json(ce.event),
            "explanation": ce.explanation,
            "trace": [event_json(ev) for ev in ce.trace],
        }
    return {
        "property": v.property,
        "passed": v.passed,
        "depthChecked": v.depth_checked,
        "counterexample": cex,
        "weakenings": [{"index": m.index, "kind": m.kind, "event": event_json(m.event)} for m in v.weakenings],
    }
