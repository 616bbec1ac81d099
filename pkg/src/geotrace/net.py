"""Trace diagrams: the geometric record of one execution.

A run is drawn on a grid.  Vertical lines (lifelines) are the objects that
took part: one per thread, variable, and channel port.  Horizontal
coordinates (transactions) are the atomic steps, one per row in firing
order.  Points where a transaction meets a lifeline are events, and arrows
join events: vertical arrows carry a variable's value from one event on its
lifeline to the next, horizontal arrows carry the value moved by a single
step (a write, a read, a message, an ownership transfer).  Arrows with a
missing endpoint lead off the page: vertical ones to the margin above or
below (the initial and final state of global objects), horizontal ones to
the left or right margin (messages exchanged with the environment).

Slices mirror the program's composition tree.  Every slice is a box: a row
range crossed with a column interval.  A sequential composition splits its
box horizontally (time above, time below); the concurrent compositions
split vertically between the threads' column groups.  The operations here
read geometry off a diagram: the lifelines a slice owns (footprint), the
variable state crossing a horizontal cut (state_at_cut), and the arrows
that pierce one of a slice's edges (crossing_arrows).

One wrinkle is deliberate: when ownership of an object moves between
threads, the splitting edge between them jogs around the object's lifeline
at the transfer row, so the edge crosses the transfer arrow and nothing
else.  Membership tests against an internal edge therefore follow replayed
ownership rather than raw column positions (see replay_ownership).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import Span

# lifeline kinds
THREAD = "thread"
VARIABLE = "variable"
IN_PORT = "channel-in-port"
OUT_PORT = "channel-out-port"

# event kinds
ALLOC, DISPOSE_K, READ, WRITE = "alloc", "dispose", "read", "write"
SEND, RECV, RELEASE_K, ACQUIRE_K = "send", "recv", "release", "acquire"
ASSERT_K, SKIP_MARK = "assert", "skip-mark"

VERTICAL, HORIZONTAL = "vertical", "horizontal"

# slice operators (leaf plus the four compositions from lang)
LEAF_OP = "leaf"

ENVIRONMENT = -1  # issuer sentinel for transactions no thread issued


@dataclass
class Lifeline:
    id: int
    name: str
    kind: str  # thread | variable | channel-in-port | channel-out-port
    column: int
    alloc_row: int | None = None
    dispose_row: int | None = None
    scope: int | None = None  # slice id when local to it, None when global


@dataclass
class Event:
    id: int
    lifeline: int
    transaction: int
    kind: str


@dataclass
class Transaction:
    id: int
    row: int
    label: str
    issuer: int  # thread lifeline id, or ENVIRONMENT
    participants: tuple
    span: Span


@dataclass
class Arrow:
    id: int
    tail: int | None  # event id; None = off the page (top or left margin)
    head: int | None  # event id; None = off the page (bottom or right margin)
    orientation: str
    value: int | None = None
    lifeline: int | None = None  # set on vertical arrows; an untouched global
    # object's through-arrow has no endpoint to recover its lifeline from


@dataclass
class Slice:
    id: int
    op: str  # leaf | seq | chain | interleave | par
    span: Span
    parent: int | None
    children: tuple
    orientation: str  # none | horizontal | vertical
    row_lo: int
    row_hi: int
    col_lo: int
    col_hi: int


@dataclass
class Violation:
    code: str
    classification: str
    loci: tuple  # of (kind, id) pairs, kind in {"event", "arrow", "transaction"}
    spans: tuple  # of Span
    detail: str
    witness: tuple | None = None
    row: int = 0


@dataclass
class Diagram:
    source: str
    config: object  # RunConfig echo
    globals_: tuple  # of (name, value, owner)
    lifelines: list
    events: list
    transactions: list
    arrows: list
    slices: list
    violations: list
    _index: object = field(default=None, repr=False, compare=False)

    def index(self):
        if self._index is None:
            self._index = _Index(self)
        return self._index


class _Index:
    def __init__(self, d):
        self.by_lifeline = {}
        for e in d.events:
            self.by_lifeline.setdefault(e.lifeline, []).append(e.id)
        row = lambda eid: d.transactions[d.events[eid].transaction].row
        for eids in self.by_lifeline.values():
            eids.sort(key=lambda eid: (row(eid), eid))
        self.heads = {}
        self.tails = {}
        for a in d.arrows:
            if a.head is not None:
                self.heads.setdefault(a.head, []).append(a.id)
            if a.tail is not None:
                self.tails.setdefault(a.tail, []).append(a.id)


def event_row(d, eid):
    return d.transactions[d.events[eid].transaction].row


def event_col(d, eid):
    return d.lifelines[d.events[eid].lifeline].column


def thread_by_name(d, name):
    for l in d.lifelines:
        if l.kind == THREAD and l.name == name:
            return l
    return None


# ---- ownership replay ------------------------------------------------------

def replay_ownership(d):
    """Walk every variable lifeline in row order and track its owner.

    Ownership starts at the declared owner for globals, moves to the
    allocating thread at an alloc event, and to the acquiring thread at a
    handover event.  Any other access re-seats ownership on the accessing
    thread ("adoption") so one unsynchronized access does not cascade.

    Returns (owner_by_event, races): the owning thread lifeline id in force
    at each variable event, and one (lifeline_id, loci_event_ids) record for
    the first unsynchronized access pair on each raced lifeline.
    """
    idx = d.index()
    declared = {}
    for name, _value, owner in d.globals_:
        t = thread_by_name(d, owner)
        if t is not None:
            declared[name] = t.id
    owner_by_event = {}
    races = []
    for line in d.lifelines:
        if line.kind != VARIABLE:
            continue
        owner = declared.get(line.name)
        raced = False
        last_eid = None
        for eid in idx.by_lifeline.get(line.id, ()):
            ev = d.events[eid]
            tx = d.transactions[ev.transaction]
            if ev.kind == ALLOC:
                owner = tx.issuer if tx.issuer != ENVIRONMENT else owner
            elif ev.kind == RELEASE_K and _acquirer_of(d, tx) is not None:
                owner = _acquirer_of(d, tx)
            else:
                accessor = _accessor_of(d, tx, ev)
                if accessor == ENVIRONMENT:
                    pass
                elif owner is None:
                    owner = accessor
                elif accessor != owner:
                    if not raced:
                        loci = tuple(e for e in (last_eid, eid) if e is not None)
                        races.append((line.id, loci))
                        raced = True
                    owner = accessor
            owner_by_event[eid] = owner
            last_eid = eid
    return owner_by_event, races


def _acquirer_of(d, tx):
    for eid in tx.participants:
        ev = d.events[eid]
        if ev.kind == ACQUIRE_K and d.lifelines[ev.lifeline].kind == THREAD:
            return ev.lifeline
    return None


def _accessor_of(d, tx, ev):
    """The thread acting on a variable event.  A message step has two acting
    threads: its reads belong to the sender, its write to the receiver."""
    snd = rcv = None
    for eid in tx.participants:
        other = d.events[eid]
        if d.lifelines[other.lifeline].kind == THREAD:
            if other.kind == SEND:
                snd = other.lifeline
            elif other.kind == RECV:
                rcv = other.lifeline
    if ev.kind == READ and snd is not None:
        return snd
    if ev.kind == WRITE and rcv is not None:
        return rcv
    return tx.issuer


def port_user_thread(d, ev):
    """The thread lifeline id a port event serves, via its transaction."""
    want = SEND if d.lifelines[ev.lifeline].kind == OUT_PORT else RECV
    tx = d.transactions[ev.transaction]
    for eid in tx.participants:
        other = d.events[eid]
        if other.kind == want and d.lifelines[other.lifeline].kind == THREAD:
            return other.lifeline
    return tx.issuer if tx.issuer != ENVIRONMENT else None


def child_of_event(d, sl, eid, owner_by_event):
    """Which child of a vertical-split slice an event belongs to, or None.

    Thread events sit at their own column; variable events follow the
    thread owning them at that row; port events follow their using thread.
    """
    ev = d.events[eid]
    line = d.lifelines[ev.lifeline]
    if line.kind == THREAD:
        col = line.column
    elif line.kind == VARIABLE:
        owner = owner_by_event.get(eid)
        if owner is None:
            col = line.column
        else:
            col = d.lifelines[owner].column
    else:
        user = port_user_thread(d, ev)
        col = line.column if user is None else d.lifelines[user].column
    for cid in sl.children:
        ch = d.slices[cid]
        if ch.col_lo <= col <= ch.col_hi:
            return cid
    return None


# ---- geometric queries -----------------------------------------------------

def _endpoint_pos(d, arrow, end):
    """(row, col) of an arrow endpoint; None endpoints sit off the page."""
    eid = arrow.tail if end == "tail" else arrow.head
    if eid is not None:
        return event_row(d, eid), event_col(d, eid)
    other = arrow.head if end == "tail" else arrow.tail
    orow = event_row(d, other) if other is not None else 0
    ocol = event_col(d, other) if other is not None else 0
    inf = float("inf")
    if arrow.orientation == VERTICAL:
        return (-inf, ocol) if end == "tail" else (inf, ocol)
    return (orow, -inf) if end == "tail" else (orow, inf)


def _inside(sl, pos):
    row, col = pos
    return sl.row_lo <= row <= sl.row_hi and sl.col_lo <= col <= sl.col_hi


def crossing_arrows(d, slice_id, edge):
    """Arrow ids piercing one edge of a slice's box.

    edge is top, bottom, left, right, or internal.  The box edges use plain
    geometry: an arrow crosses when exactly one endpoint lies inside the
    box, and the outside endpoint's position names the edge.  The internal
    edge of a split uses child membership: for vertical splits the
    ownership-aware kind (see child_of_event), for horizontal splits the
    child boxes; an arrow crosses when its endpoints land in different
    children.
    """
    sl = d.slices[slice_id]
    out = []
    if edge == "internal":
        if sl.orientation == "none" or not sl.children:
            return out
        if sl.orientation == VERTICAL:
            owner_by_event, _ = replay_ownership(d)
            for a in d.arrows:
                if a.tail is None or a.head is None:
                    continue
                ct = child_of_event(d, sl, a.tail, owner_by_event)
                ch = child_of_event(d, sl, a.head, owner_by_event)
                if ct is not None and ch is not None and ct != ch:
                    out.append(a.id)
        else:
            boxes = [d.slices[c] for c in sl.children]
            for a in d.arrows:
                if a.tail is None or a.head is None:
                    continue
                pt, ph = _endpoint_pos(d, a, "tail"), _endpoint_pos(d, a, "head")
                ct = next((b.id for b in boxes if _inside(b, pt)), None)
                ch = next((b.id for b in boxes if _inside(b, ph)), None)
                if ct is not None and ch is not None and ct != ch:
                    out.append(a.id)
        return out

    for a in d.arrows:
        pt, ph = _endpoint_pos(d, a, "tail"), _endpoint_pos(d, a, "head")
        t_in, h_in = _inside(sl, pt), _inside(sl, ph)
        if t_in == h_in:
            continue
        orow, ocol = pt if h_in else ph
        if orow < sl.row_lo:
            side = "top"
        elif orow > sl.row_hi:
            side = "bottom"
        elif ocol < sl.col_lo:
            side = "left"
        else:
            side = "right"
        if side == edge:
            out.append(a.id)
    return out


def footprint(d, slice_id):
    """Lifeline ids a slice owns: those scoped to it or a descendant, plus
    lifelines whose whole (non-empty) event set sits inside the slice's box."""
    sl = d.slices[slice_id]
    under = set()
    stack = [slice_id]
    while stack:
        sid = stack.pop()
        under.add(sid)
        stack.extend(d.slices[sid].children)
    idx = d.index()
    out = set()
    for line in d.lifelines:
        if line.scope is not None and line.scope in under:
            out.add(line.id)
            continue
        eids = idx.by_lifeline.get(line.id, ())
        if eids and all(
            _inside(sl, (event_row(d, e), d.lifelines[line.id].column)) for e in eids
        ):
            out.add(line.id)
    return out


def message_serials(d):
    """transaction id -> (channel, serial) for every message-bearing step.

    Serials count per channel from 1 + the configured message offset, in
    row order, one message per transaction.
    """
    offsets = getattr(d.config, "message_offset", {}) or {}
    counts = {}
    out = {}
    for tx in sorted(d.transactions, key=lambda t: (t.row, t.id)):
        for eid in tx.participants:
            ev = d.events[eid]
            line = d.lifelines[ev.lifeline]
            if line.kind in (IN_PORT, OUT_PORT):
                ch = line.name.rstrip("?!")
                counts[ch] = counts.get(ch, 0) + 1
                out[tx.id] = (ch, offsets.get(ch, 0) + counts[ch])
                break
    return out


def state_at_cut(d, slice_id, edge):
    """The labelled state crossing one edge of a slice.

    For top/bottom edges: variable name -> value, read off the vertical
    arrows spanning the cut row within the slice's columns.  For left/right
    edges: the message interface, port entries named with their serial
    subscript (``c_[84]``) -> message value.
    """
    sl = d.slices[slice_id]
    if edge in ("top", "bottom"):
        boundary = sl.row_lo if edge == "top" else sl.row_hi + 1
        state = {}
        for a in d.arrows:
            if a.orientation != VERTICAL or a.value is None:
                continue
            line = _vertical_arrow_lifeline(d, a)
            if line is None or line.kind != VARIABLE:
                continue
            if not (sl.col_lo <= line.column <= sl.col_hi):
                continue
            lo = event_row(d, a.tail) if a.tail is not None else float("-inf")
            hi = event_row(d, a.head) if a.head is not None else float("inf")
            if lo < boundary <= hi:
                state[line.name] = a.value
        return state
    if edge in ("left", "right"):
        serials = message_serials(d)
        state = {}
        for aid in crossing_arrows(d, slice_id, edge):
            a = d.arrows[aid]
            if a.value is None:
                continue
            for eid in (a.tail, a.head):
                if eid is None:
                    continue
                ev = d.events[eid]
                line = d.lifelines[ev.lifeline]
                if line.kind in (IN_PORT, OUT_PORT):
                    ch, serial = serials[ev.transaction]
                    state[f"{ch}_[{serial}]"] = a.value
                    break
        return state
    raise ValueError(f"no such edge: {edge}")


def _vertical_arrow_lifeline(d, a):
    if a.lifeline is not None:
        return d.lifelines[a.lifeline]
    eid = a.tail if a.tail is not None else a.head
    if eid is None:
        return None
    return d.lifelines[d.events[eid].lifeline]
