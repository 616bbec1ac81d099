"""Diagram checking: the error taxonomy and the geometric sanity scans.

Every violation carries a stable code with a fixed classification:

    IMPLEMENTER    the diagram itself is malformed; whoever built or
                   imported it broke a construction rule
    DEVELOPER      the recorded execution misbehaved (races, deadlock,
                   arithmetic faults, ownership abuse, leaks)
    PREVENTION     the program never got as far as running (parse errors)
    INCONCLUSIVE   the run was cut short, nothing was proven

Diagrams produced by run() arrive with their runtime violations already
recorded; the scans here re-derive the geometric classes from the drawing
alone so imported diagrams get the same scrutiny.  A run-produced diagram
passes check_sequential and check_atomicity by construction.
"""

from __future__ import annotations

from . import net
from .net import Violation

IMPLEMENTER = "IMPLEMENTER"
DEVELOPER = "DEVELOPER"
PREVENTION = "PREVENTION"
INCONCLUSIVE = "INCONCLUSIVE"

# SUBSCRIPT_OVERFLOW and TYPE_MISMATCH are reserved and never emitted;
# INTEGER_OVERFLOW likewise since integers here are unbounded.
TAXONOMY = {
    "SEQ_BACK_ARROW": IMPLEMENTER,
    "ATOMIC_SPLIT": IMPLEMENTER,
    "ARROW_CYCLE": IMPLEMENTER,
    "RACE_EDGE": DEVELOPER,
    "PORT_SHARED": DEVELOPER,
    "INTERLEAVE_CROSS": DEVELOPER,
    "CHAIN_BACK": DEVELOPER,
    "DEADLOCK_CYCLE": DEVELOPER,
    "STARVATION": DEVELOPER,
    "ZERO_DIVIDE": DEVELOPER,
    "ASSERT_FALSE": DEVELOPER,
    "USE_AFTER_DISPOSE": DEVELOPER,
    "NOT_OWNER": DEVELOPER,
    "DOUBLE_ALLOCATE": DEVELOPER,
    "UNKNOWN_NAME": DEVELOPER,
    "LEAKED_OBJECT": DEVELOPER,
    "INTEGER_OVERFLOW": DEVELOPER,
    "SUBSCRIPT_OVERFLOW": DEVELOPER,
    "STEP_LIMIT_EXCEEDED": INCONCLUSIVE,
    "PARSE_ERROR": PREVENTION,
    "DUP_THREAD": PREVENTION,
    "DUP_GLOBAL": PREVENTION,
    "NAME_CLASH": PREVENTION,
    "TYPE_MISMATCH": PREVENTION,
}


class UnknownViolationCode(Exception):
    pass


class MalformedDiagram(Exception):
    pass


def classify(code):
    try:
        return TAXONOMY[code]
    except KeyError:
        raise UnknownViolationCode(code) from None


def make_violation(code, loci=(), spans=(), detail="", witness=None, row=0):
    return Violation(code, classify(code), tuple(loci), tuple(spans),
                     detail, witness, row)


def _tx_of_event(d, eid):
    return d.transactions[d.events[eid].transaction]


# ---- individual scans ------------------------------------------------------

def check_sequential(d):
    """SEQ_BACK_ARROW for every arrow running upward across a seq edge."""
    out = []
    for sl in d.slices:
        if sl.op != "seq" or len(sl.children) != 2:
            continue
        a_box, b_box = (d.slices[c] for c in sl.children)
        upper, lower = (a_box, b_box) if a_box.row_lo <= b_box.row_lo else (b_box, a_box)
        for a in d.arrows:
            if a.tail is None or a.head is None:
                continue
            pt = (net.event_row(d, a.tail), net.event_col(d, a.tail))
            ph = (net.event_row(d, a.head), net.event_col(d, a.head))
            if net._inside(lower, pt) and net._inside(upper, ph):
                out.append(make_violation(
                    "SEQ_BACK_ARROW",
                    loci=[("arrow", a.id)],
                    spans=[_tx_of_event(d, a.tail).span, _tx_of_event(d, a.head).span],
                    detail=f"arrow {a.id} runs backward across the sequential edge "
                           f"of slice {sl.id}",
                    row=net.event_row(d, a.head)))
    return out


def _rendezvous_children(d, sl, tx, owner_by_event):
    """The two children a sanctioned rendezvous joins, or None."""
    thread_kinds = {}
    for eid in tx.participants:
        ev = d.events[eid]
        if d.lifelines[ev.lifeline].kind == net.THREAD:
            thread_kinds.setdefault(ev.kind, []).append(eid)
    for pair in ((net.RELEASE_K, net.ACQUIRE_K), (net.SEND, net.RECV)):
        a, b = pair
        if set(thread_kinds) == {a, b} and \
                len(thread_kinds[a]) == 1 and len(thread_kinds[b]) == 1:
            ca = net.child_of_event(d, sl, thread_kinds[a][0], owner_by_event)
            cb = net.child_of_event(d, sl, thread_kinds[b][0], owner_by_event)
            if ca is not None and cb is not None and ca != cb:
                return {ca, cb}
    return None


def check_atomicity(d):
    """ATOMIC_SPLIT when a step straddles a concurrent split (rendezvous
    between exactly the two children excepted), or when an arrow skips over
    a transaction on its own lifeline."""
    out = []
    owner_by_event, _ = net.replay_ownership(d)
    for sl in d.slices:
        if sl.orientation != net.VERTICAL:
            continue
        for tx in d.transactions:
            children = set()
            for eid in tx.participants:
                c = net.child_of_event(d, sl, eid, owner_by_event)
                if c is not None:
                    children.add(c)
            if len(children) < 2:
                continue
            sanctioned = _rendezvous_children(d, sl, tx, owner_by_event)
            if sanctioned is not None and children <= sanctioned:
                continue
            out.append(make_violation(
                "ATOMIC_SPLIT",
                loci=[("transaction", tx.id)],
                spans=[tx.span],
                detail=f"step {tx.label!r} straddles the split of slice {sl.id}",
                row=tx.row))
    idx = d.index()
    for a in d.arrows:
        if a.tail is None or a.head is None:
            continue
        tail_ev, head_ev = d.events[a.tail], d.events[a.head]
        if tail_ev.lifeline != head_ev.lifeline:
            continue
        lo = d.transactions[tail_ev.transaction].row
        hi = d.transactions[head_ev.transaction].row
        if hi <= lo:
            continue
        for eid in idx.by_lifeline.get(tail_ev.lifeline, ()):
            row = net.event_row(d, eid)
            if lo < row < hi:
                tx = d.transactions[d.events[eid].transaction]
                out.append(make_violation(
                    "ATOMIC_SPLIT",
                    loci=[("arrow", a.id), ("transaction", tx.id)],
                    spans=[tx.span],
                    detail=f"arrow {a.id} skips over step {tx.label!r} on its "
                           f"own lifeline",
                    row=row))
    return out


def check_race(d):
    """RACE_EDGE per variable handed between threads with no transfer;
    PORT_SHARED per channel port used by more than one thread."""
    out = []
    _, races = net.replay_ownership(d)
    for line_id, loci in races:
        line = d.lifelines[line_id]
        spans = [_tx_of_event(d, e).span for e in loci]
        out.append(make_violation(
            "RACE_EDGE",
            loci=[("event", e) for e in loci],
            spans=spans,
            detail=f"unsynchronized access to {line.name!r}",
            row=min((net.event_row(d, e) for e in loci), default=0)))
    idx = d.index()
    for line in d.lifelines:
        if line.kind not in (net.IN_PORT, net.OUT_PORT):
            continue
        first_by_user = {}
        for eid in idx.by_lifeline.get(line.id, ()):
            user = net.port_user_thread(d, d.events[eid])
            if user is not None and user not in first_by_user:
                first_by_user[user] = eid
        if len(first_by_user) > 1:
            eids = sorted(first_by_user.values())
            out.append(make_violation(
                "PORT_SHARED",
                loci=[("transaction", d.events[e].transaction) for e in eids],
                spans=[_tx_of_event(d, e).span for e in eids],
                detail=f"port {line.name!r} is used by "
                       f"{len(first_by_user)} threads",
                row=net.event_row(d, eids[0])))
    return out


def check_operator(d):
    """INTERLEAVE_CROSS per arrow joining the children of an interleave
    slice; CHAIN_BACK per arrow running right-to-left across a chain."""
    out = []
    owner_by_event, _ = net.replay_ownership(d)
    for sl in d.slices:
        if sl.op not in ("interleave", "chain") or len(sl.children) != 2:
            continue
        left, right = sorted(sl.children, key=lambda c: d.slices[c].col_lo)
        for a in d.arrows:
            if a.tail is None or a.head is None:
                continue
            ct = net.child_of_event(d, sl, a.tail, owner_by_event)
            ch = net.child_of_event(d, sl, a.head, owner_by_event)
            if ct is None or ch is None or ct == ch:
                continue
            if sl.op == "interleave":
                code, why = "INTERLEAVE_CROSS", "arrows may not cross ||| at all"
            elif ct == right and ch == left:
                code, why = "CHAIN_BACK", "arrows across >> must run left to right"
            else:
                continue
            out.append(make_violation(
                code,
                loci=[("arrow", a.id)],
                spans=[_tx_of_event(d, a.tail).span],
                detail=f"arrow {a.id} crosses slice {sl.id}: {why}",
                row=net.event_row(d, a.tail)))
    return out


def _arrow_cycles(d):
    """ARROW_CYCLE per strongly connected knot in the arrow graph."""
    succ = {}
    for a in d.arrows:
        if a.tail is not None and a.head is not None:
            succ.setdefault(a.tail, []).append(a.head)
    order, comp = _tarjan(succ)
    out = []
    self_loops = {a.tail for a in d.arrows
                  if a.tail is not None and a.tail == a.head}
    for scc in comp:
        if len(scc) < 2 and not (scc and scc[0] in self_loops):
            continue
        members = set(scc)
        arrows = sorted(a.id for a in d.arrows
                        if a.tail in members and a.head in members)
        rows = [net.event_row(d, e) for e in scc]
        out.append(make_violation(
            "ARROW_CYCLE",
            loci=[("arrow", aid) for aid in arrows],
            spans=[_tx_of_event(d, min(scc)).span],
            detail=f"arrows {arrows} form a cycle: time cannot flow around it",
            row=min(rows)))
    out.sort(key=lambda v: (v.row, v.loci))
    return out


def _tarjan(succ):
    """Iterative Tarjan; returns (postorder, list of SCCs as sorted lists)."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = [0]
    nodes = sorted(set(succ) | {h for hs in succ.values() for h in hs})
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    n = stack.pop()
                    on_stack.discard(n)
                    scc.append(n)
                    if n == node:
                        break
                comps.append(sorted(scc))
    return nodes, comps


def check_deadlock(d):
    """The run's stuck-state verdicts plus an independent arrow-graph scan.

    Deadlock and starvation are classified while the run is live (the
    wait-for relation needs the blocked commands, which fired no step), so
    this returns those recorded violations and re-checks the drawing for
    cyclic arrow chains, which no honest execution can contain.
    """
    stored = [v for v in d.violations if v.code in ("DEADLOCK_CYCLE", "STARVATION")]
    return stored + _arrow_cycles(d)


def _validate_ids(d):
    ne, nt, na = len(d.events), len(d.transactions), len(d.arrows)
    for i, line in enumerate(d.lifelines):
        if line.id != i:
            raise MalformedDiagram(f"lifeline ids out of order at {i}")
    for i, ev in enumerate(d.events):
        if ev.id != i or not (0 <= ev.lifeline < len(d.lifelines)) \
                or not (0 <= ev.transaction < nt):
            raise MalformedDiagram(f"event {ev.id} references missing ids")
    for i, tx in enumerate(d.transactions):
        if tx.id != i:
            raise MalformedDiagram(f"transaction ids out of order at {i}")
        for eid in tx.participants:
            if not (0 <= eid < ne):
                raise MalformedDiagram(f"transaction {tx.id} lists missing event {eid}")
    for i, a in enumerate(d.arrows):
        if a.id != i:
            raise MalformedDiagram(f"arrow ids out of order at {i}")
        for eid in (a.tail, a.head):
            if eid is not None and not (0 <= eid < ne):
                raise MalformedDiagram(f"arrow {a.id} references missing event {eid}")
    for i, sl in enumerate(d.slices):
        if sl.id != i:
            raise MalformedDiagram(f"slice ids out of order at {i}")
        for c in sl.children:
            if not (0 <= c < len(d.slices)):
                raise MalformedDiagram(f"slice {sl.id} references missing child {c}")


def check_all(d):
    """Every violation the diagram holds: the run's own records plus all
    geometric scans, ordered by (row, code)."""
    _validate_ids(d)
    found = list(d.violations)
    found += check_sequential(d)
    found += check_atomicity(d)
    found += check_race(d)
    found += check_operator(d)
    found += _arrow_cycles(d)
    found.sort(key=lambda v: (v.row, v.code, v.loci))
    return found
