"""Event model for serialized depth-first eager executions.

A trace is the serial replay of a task-parallel program: a child function
started by ``spawn`` or ``create`` runs to completion before its parent's
continuation, a ``sync`` joins the most recently spawned outstanding child,
and a ``get`` joins a future by handle. Memory accesses are 4-byte reads and
writes tagged with byte addresses.

Wire format is JSON Lines, one event per line, UTF-8:

    {"t":"spawn","f":<uint>}
    {"t":"create","f":<uint>,"h":<uint>}
    {"t":"sync"}
    {"t":"get","h":<uint>}
    {"t":"ret"}
    {"t":"r","a":<uint64>}
    {"t":"w","a":<uint64>}

The root function is implicit: it has no opening event and end-of-file closes
it. Function instance ids (``f``) and future handle ids (``h``) are arbitrary
unique unsigned integers.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

from .errors import ParseError, UsageError

SPAWN = "spawn"
CREATE = "create"
SYNC = "sync"
GET = "get"
RET = "ret"
READ = "read"
WRITE = "write"

CONTROL_KINDS = (SPAWN, CREATE, SYNC, GET, RET)
ACCESS_KINDS = (READ, WRITE)

MODE_STRUCTURED = "structured"
MODE_GENERAL = "general"

_WIRE_OF_KIND = {READ: "r", WRITE: "w"}
_KIND_OF_WIRE = {
    "spawn": SPAWN,
    "create": CREATE,
    "sync": SYNC,
    "get": GET,
    "ret": RET,
    "r": READ,
    "w": WRITE,
}


@dataclass(slots=True)
class Event:
    kind: str
    fn: int | None = None
    handle: int | None = None
    addr: int | None = None


@dataclass
class TraceCounts:
    events: int = 0
    strands: int = 1  # 1 + one per control event
    reads: int = 0
    writes: int = 0
    spawns: int = 0
    creates: int = 0
    syncs: int = 0
    gets: int = 0
    rets: int = 0

    @property
    def accesses(self) -> int:
        return self.reads + self.writes

    @property
    def fork_points(self) -> int:
        """Dynamic count of places where parallelism is created."""
        return self.spawns + self.creates

    @property
    def future_ops(self) -> int:
        return self.creates + self.gets


@dataclass
class EventSequence:
    events: list[Event] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def counts(self) -> TraceCounts:
        c = TraceCounts(events=len(self.events))
        for ev in self.events:
            k = ev.kind
            if k == READ:
                c.reads += 1
            elif k == WRITE:
                c.writes += 1
            elif k == SPAWN:
                c.spawns += 1
            elif k == CREATE:
                c.creates += 1
            elif k == SYNC:
                c.syncs += 1
            elif k == GET:
                c.gets += 1
            else:
                c.rets += 1
        c.strands = 1 + c.spawns + c.creates + c.syncs + c.gets + c.rets
        return c


# -- parse / serialize ------------------------------------------------------


def _field(obj: dict, name: str, lineno: int) -> int:
    v = obj.get(name)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ParseError(lineno, f"field {name!r} must be a non-negative integer")
    return v


def parse(source) -> EventSequence:
    """Parse a JSON-Lines trace from a string or a text stream.

    Blank lines are ignored. Any malformed line raises :class:`ParseError`
    with its line number.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    events: list[Event] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise ParseError(lineno, "event must be a JSON object")
        kind = _KIND_OF_WIRE.get(obj.get("t"))
        if kind is None:
            raise ParseError(lineno, f"unknown event kind {obj.get('t')!r}")
        if kind == SPAWN:
            events.append(Event(SPAWN, fn=_field(obj, "f", lineno)))
        elif kind == CREATE:
            events.append(Event(CREATE, fn=_field(obj, "f", lineno), handle=_field(obj, "h", lineno)))
        elif kind == GET:
            events.append(Event(GET, handle=_field(obj, "h", lineno)))
        elif kind in ACCESS_KINDS:
            events.append(Event(kind, addr=_field(obj, "a", lineno)))
        else:
            events.append(Event(kind))
    return EventSequence(events)


def serialize(seq: EventSequence) -> str:
    """Render a trace back to its JSON-Lines form (one canonical line per event)."""
    out = []
    for ev in seq.events:
        if ev.kind == SPAWN:
            obj = {"t": "spawn", "f": ev.fn}
        elif ev.kind == CREATE:
            obj = {"t": "create", "f": ev.fn, "h": ev.handle}
        elif ev.kind == GET:
            obj = {"t": "get", "h": ev.handle}
        elif ev.kind in ACCESS_KINDS:
            obj = {"t": _WIRE_OF_KIND[ev.kind], "a": ev.addr}
        else:
            obj = {"t": ev.kind}
        out.append(json.dumps(obj, separators=(",", ":")))
    return "\n".join(out) + ("\n" if out else "")


def load(path) -> EventSequence:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh)


def dump(seq: EventSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(seq))


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    index: int  # event index, or len(events) for end-of-trace problems
    code: str
    message: str


@dataclass
class ValidationReport:
    mode: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(seq: EventSequence, mode: str) -> ValidationReport:
    """Check well-formedness of a trace for the given mode.

    Violations are reported as data, never raised. A clean report means:
    frames are balanced, every ``get`` names a known handle whose frame has
    already closed, every ``spawn`` is matched by a ``sync`` in its own frame
    before that frame returns, and (in structured mode) no handle is gotten
    more than once.
    """
    if mode not in (MODE_STRUCTURED, MODE_GENERAL):
        raise UsageError(f"unknown mode {mode!r}")
    report = ValidationReport(mode=mode)
    bad = report.violations.append

    handle_state: dict[int, str] = {}  # handle -> "open" | "closed"
    got: set[int] = set()
    # one entry per open frame: [outstanding spawn count, handle or None]
    frames: list[list] = [[0, None]]

    for i, ev in enumerate(seq.events):
        k = ev.kind
        if k == SPAWN:
            frames[-1][0] += 1
            frames.append([0, None])
        elif k == CREATE:
            if ev.handle in handle_state:
                bad(Violation(i, "duplicate-handle", f"handle {ev.handle} created twice"))
            handle_state[ev.handle] = "open"
            frames.append([0, ev.handle])
        elif k == SYNC:
            if frames[-1][0] == 0:
                bad(Violation(i, "sync-without-spawn", "sync with no outstanding spawned child"))
            else:
                frames[-1][0] -= 1
        elif k == GET:
            state = handle_state.get(ev.handle)
            if state is None:
                bad(Violation(i, "unknown-handle", f"get of unknown handle {ev.handle}"))
            elif state == "open":
                bad(Violation(i, "get-before-future-return",
                              f"get of handle {ev.handle} while its frame is still open"))
            elif mode == MODE_STRUCTURED and ev.handle in got:
                bad(Violation(i, "single-touch", f"handle {ev.handle} gotten more than once"))
            got.add(ev.handle)
        elif k == RET:
            if len(frames) == 1:
                bad(Violation(i, "return-from-root", "ret event in the implicit root frame"))
                continue
            outstanding, handle = frames.pop()
            if outstanding:
                bad(Violation(i, "unsynced-spawn",
                              f"frame returns with {outstanding} unsynced spawned child(ren)"))
            if handle is not None:
                handle_state[handle] = "closed"
        # reads/writes are always well-formed once parsed

    end = len(seq.events)
    if len(frames) > 1:
        bad(Violation(end, "unclosed-frames", f"{len(frames) - 1} frame(s) never return"))
    elif frames and frames[0][0]:
        bad(Violation(end, "unsynced-spawn",
                      f"root ends with {frames[0][0]} unsynced spawned child(ren)"))
    return report
