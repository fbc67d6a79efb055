"""Global type algebra: path automata, type extraction and bounded mesh checks.

A global type denotes a regular tree; its paths are the finite sequences of
communication and selection events read along a branch.  ``mesh_member``
asks, up to a depth bound, whether every path of a candidate type can be cut
into at most ``M`` interleaved components, each a repetition of paths taken
from the original types.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from . import _kernels
from .syntax import (
    Call,
    Choreography,
    Com,
    Cond,
    GlobalType,
    Inact,
    Label,
    Rec,
    Res,
    Role,
    Sel,
    Seq,
    Sort,
    Start,
    TChoice,
    TCom,
    TEnd,
    TRec,
    TVar,
    TypeVar,
)
from .terms import alpha_equal_type, etas, type_roles
from .typecheck import SortEnv, SortError, sort_of


@dataclass(frozen=True, slots=True, order=True)
class PCom:
    p: Role
    q: Role
    sort: Sort

    def __str__(self) -> str:
        return f"{self.p}->{self.q}:<{self.sort}>"


@dataclass(frozen=True, slots=True, order=True)
class PSel:
    p: Role
    q: Role
    label: Label

    def __str__(self) -> str:
        return f"{self.p}->{self.q}:{self.label}"


PathEvent = Union[PCom, PSel]
Word = tuple[PathEvent, ...]


def rename_event(ev: PathEvent, mapping: dict[Role, Role]) -> PathEvent:
    p, q = mapping.get(ev.p, ev.p), mapping.get(ev.q, ev.q)
    return PCom(p, q, ev.sort) if isinstance(ev, PCom) else PSel(p, q, ev.label)


# ---------------------------------------------------------------------------
# path automata


@dataclass(frozen=True)
class PathAutomaton:
    """Finite automaton over path events; every state accepts."""

    initial: int
    transitions: tuple[tuple[tuple[PathEvent, int], ...], ...]

    @property
    def states(self) -> range:
        return range(len(self.transitions))

    def successors(self, states: Iterable[int]) -> dict[PathEvent, frozenset[int]]:
        out: dict[PathEvent, set[int]] = {}
        for s in sorted(set(states)):
            for ev, t in self.transitions[s]:
                out.setdefault(ev, set()).add(t)
        return {ev: frozenset(ts) for ev, ts in out.items()}

    def accepts(self, word: Sequence[PathEvent]) -> bool:
        current = frozenset({self.initial})
        for ev in word:
            current = self.successors(current).get(ev, frozenset())
            if not current:
                return False
        return True


def paths_automaton(g: GlobalType) -> PathAutomaton:
    trans: list[list[tuple[PathEvent, int]]] = []

    def build(g: GlobalType, env: dict[TypeVar, int]) -> int:
        binders = []
        while isinstance(g, TRec):
            binders.append(g.var)
            g = g.body
        if isinstance(g, TVar):
            if g.var not in env:
                raise ValueError(f"unbound or non-contractive type variable {g.var}")
            return env[g.var]
        sid = len(trans)
        trans.append([])
        env = {**env, **{b: sid for b in binders}}
        match g:
            case TCom(p, q, sort, cont):
                trans[sid].append((PCom(p, q, sort), build(cont, env)))
            case TChoice(p, q, branches):
                for lab, b in branches:
                    trans[sid].append((PSel(p, q, lab), build(b, env)))
        return sid

    init = build(g, {})
    return PathAutomaton(init, tuple(tuple(t) for t in trans))


def enumerate_paths(a: PathAutomaton, depth: int) -> dict[Word, bool]:
    """Every accepted word of length at most ``depth``, mapped to whether it is maximal.

    A word is maximal when it has length ``depth`` or cannot be extended.
    Words come out in breadth-first order.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    out: dict[Word, bool] = {}
    frontier: list[tuple[Word, frozenset[int]]] = [((), frozenset({a.initial}))]
    while frontier:
        nxt = []
        for word, states in frontier:
            succ = a.successors(states)
            out[word] = len(word) == depth or not succ
            if len(word) < depth:
                nxt.extend((word + (ev,), ts) for ev, ts in succ.items())
        frontier = nxt
    return out


def tree_equivalent(g1: GlobalType, g2: GlobalType) -> bool:
    """Whether two types denote the same regular tree."""
    a1, a2 = paths_automaton(g1), paths_automaton(g2)
    seen = {(a1.initial, a2.initial)}
    queue = deque(seen)
    while queue:
        s1, s2 = queue.popleft()
        t1, t2 = dict(a1.transitions[s1]), dict(a2.transitions[s2])
        if t1.keys() != t2.keys():
            return False
        for ev in t1:
            pair = (t1[ev], t2[ev])
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return True


# ---------------------------------------------------------------------------
# extraction


class ExtractError(ValueError):
    def __init__(self, kind: str, message: str, path: tuple[str, ...] = ()):
        self.kind = kind
        self.path = path
        super().__init__(f"{kind}: {message}")


def _free_tvars(g: GlobalType) -> set[TypeVar]:
    match g:
        case TVar(var):
            return {var}
        case TRec(var, body):
            return _free_tvars(body) - {var}
        case TCom(_, _, _, cont):
            return _free_tvars(cont)
        case TChoice(_, _, branches):
            return set().union(*(_free_tvars(b) for _, b in branches))
    return set()


def extract_type(c: Choreography, sorts: SortEnv | None = None) -> GlobalType:
    """Read the single-session global type off a merged choreography.

    ``sorts`` supplies builtin signatures and free variable sorts needed to
    sort the communicated expressions.
    """
    sessions = {eta.sess for eta in etas(c)}
    if len(sessions) > 1:
        names = ", ".join(sorted(s.name for s in sessions))
        raise ExtractError("multi-session", f"choreography uses several sessions: {names}")
    if isinstance(c, Seq) and isinstance(c.eta, Start):
        c = c.cont
    counter = itertools.count()

    def fresh() -> TypeVar:
        n = next(counter)
        return TypeVar("t" if n == 0 else f"t{n}")

    def go(c: Choreography, sorts: SortEnv, renv: dict, path: tuple[str, ...]) -> GlobalType:
        match c:
            case Inact():
                return TEnd()
            case Call(var):
                if var not in renv:
                    raise ExtractError("unbound", f"recursion variable {var} is unbound", path)
                return TVar(renv[var])
            case Rec(var, body):
                t = fresh()
                inner = go(body, sorts, {**renv, var: t}, path + ("body",))
                return TRec(t, inner) if t in _free_tvars(inner) else inner
            case Res(_, body):
                return go(body, sorts, renv, path + ("body",))
            case Seq(Start(), _):
                raise ExtractError("multi-session", "start inside a merged choreography", path)
            case Seq(Com(snd, expr, rcv, var, _), cont):
                try:
                    s = sort_of(expr, sorts, snd.thread)
                except SortError as e:
                    raise ExtractError("unsortable expression", e.message, path) from None
                rest = go(cont, sorts.bind(rcv.thread, var, s), renv, path + ("cont",))
                return TCom(snd.role, rcv.role, s, rest)
            case Seq(Sel(snd, rcv, _, label), cont):
                return TChoice(snd.role, rcv.role, ((label, go(cont, sorts, renv, path + ("cont",))),))
            case Cond(_, _, then, orelse):
                g1 = go(then, sorts, renv, path + ("then",))
                g2 = go(orelse, sorts, renv, path + ("else",))
                if (
                    isinstance(g1, TChoice)
                    and isinstance(g2, TChoice)
                    and (g1.p, g1.q) == (g2.p, g2.q)
                    and not {lab for lab, _ in g1.branches} & {lab for lab, _ in g2.branches}
                ):
                    return TChoice(g1.p, g1.q, g1.branches + g2.branches)
                if alpha_equal_type(g1, g2):
                    return g1
                raise ExtractError(
                    "unmergeable conditional",
                    "branches neither start with distinct selections between the same roles nor have equal types",
                    path,
                )
        raise TypeError(f"not a choreography: {c!r}")

    return go(c, sorts or SortEnv(), {}, ())


# ---------------------------------------------------------------------------
# shuffle decomposition and mesh membership


@dataclass(frozen=True)
class Witness:
    """A decomposition: the base words each component spells, and a colour per position."""

    components: tuple[tuple[Word, ...], ...]
    coloring: tuple[int, ...]


def _dedupe_words(words: Iterable[Sequence[PathEvent]]) -> list[Word]:
    seen: dict[Word, None] = {}
    for w in words:
        if w:
            seen.setdefault(tuple(w))
    return list(seen)


def shuffle_decompose(
    p: Sequence[PathEvent],
    base_words: Iterable[Sequence[PathEvent]],
    m: int,
    *,
    strict: bool = False,
    backend: str | None = None,
) -> Witness | None:
    """Split ``p`` into at most ``m`` interleaved components built from ``base_words``.

    By default each component is any concatenation of base words; with
    ``strict`` it must repeat a single base word.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    words = _dedupe_words(base_words)
    codes: dict[PathEvent, int] = {}
    for w in words:
        for ev in w:
            codes.setdefault(ev, len(codes))
    unknown = len(codes)
    enc_words = [[codes[ev] for ev in w] for w in words]
    enc_p = [codes.get(ev, unknown) for ev in p]
    if unknown in enc_p:
        return None
    assign = _kernels.decompose(enc_p, enc_words, m, strict, backend)
    if assign is None:
        return None
    # renumber components by first use and cut each into word occurrences
    renum: dict[int, int] = {}
    offsets: dict[int, int] = {}
    comps: list[list[Word]] = []
    coloring = []
    for comp, widx in assign:
        if comp not in renum:
            renum[comp] = len(renum)
            comps.append([])
            offsets[comp] = 0
        if offsets[comp] == 0:
            comps[renum[comp]].append(words[widx])
        offsets[comp] = (offsets[comp] + 1) % len(words[widx])
        coloring.append(renum[comp])
    return Witness(tuple(tuple(c) for c in comps), tuple(coloring))


@dataclass
class MeshReport:
    member: bool
    checked_paths: int
    bounds: tuple[int, int, int]
    failing: Word | None = None
    witnesses: list[tuple[Word, Witness]] = field(default_factory=list)
    renaming: dict[Role, Role] = field(default_factory=dict)
    strict: bool = False


def role_renamings(roles: Iterable[Role], targets: Iterable[Role]) -> Iterator[dict[Role, Role]]:
    """Injective role renamings, identity first, each role kept or sent to a target."""
    src = sorted(set(roles), key=lambda r: r.name)
    tgt = sorted(set(targets), key=lambda r: r.name)

    def go(i: int, used: frozenset, acc: dict) -> Iterator[dict[Role, Role]]:
        if i == len(src):
            yield dict(acc)
            return
        r = src[i]
        for t in [r] + [t for t in tgt if t != r]:
            if t in used:
                continue
            acc[r] = t
            yield from go(i + 1, used | {t}, acc)
            del acc[r]

    yield from go(0, frozenset(), {})


def mesh_member(
    g: GlobalType,
    originals: Iterable[GlobalType],
    depth: int = 8,
    base_depth: int = 5,
    m: int | None = None,
    *,
    strict: bool = False,
    backend: str | None = None,
) -> MeshReport:
    """Bounded check that ``g`` lies in the mesh of ``originals``.

    Every maximal path of ``g`` up to ``depth`` must decompose over the
    non-empty paths of the originals up to ``base_depth``, for one injective
    renaming of the roles of ``g``.  A positive answer holds up to the
    bounds; a negative one exhibits a failing path (in ``g``'s own role
    names, under the identity renaming).
    """
    originals = list(originals)
    if depth < 1 or base_depth < 1:
        raise ValueError("depth bounds must be at least 1")
    if m is None:
        m = max(1, len(originals))
    if m < 1:
        raise ValueError("m must be at least 1")
    base = sorted(
        _dedupe_words(w for o in originals for w in enumerate_paths(paths_automaton(o), base_depth)),
        key=lambda w: (len(w), [str(e) for e in w]),
    )
    targets = set().union(*(type_roles(o) for o in originals)) if originals else set()
    words = [w for w, maximal in enumerate_paths(paths_automaton(g), depth).items() if maximal]
    bounds = (depth, base_depth, m)

    # failing path reported from the renaming that decomposed the most paths
    best: tuple[int, Word] | None = None
    for mapping in role_renamings(type_roles(g), targets):
        witnesses = []
        for w in words:
            renamed = tuple(rename_event(ev, mapping) for ev in w)
            wit = shuffle_decompose(renamed, base, m, strict=strict, backend=backend)
            if wit is None:
                if best is None or len(witnesses) > best[0]:
                    best = (len(witnesses), w)
                break
            witnesses.append((w, wit))
        else:
            return MeshReport(True, len(words), bounds, None, witnesses, mapping, strict)
    return MeshReport(False, len(words), bounds, best[1] if best else None, [], {}, strict)
