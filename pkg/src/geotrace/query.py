"""Causal navigation over a diagram.

An event's immediate causes are the tails of arrows pointing at it plus the
other participants of its own transaction (an atomic step has no internal
order, so simultaneity counts as mutual causation).  Walking that relation
to a fixpoint gives the causal past, the cone of everything that had to
happen for the event to happen; the future is the same thing with every
arrow reversed.  locate() takes any violation back to the program text.
"""

from __future__ import annotations

from dataclasses import dataclass


class UnknownEvent(ValueError):
    pass


@dataclass(frozen=True)
class NavStep:
    """One hop of navigation: via is the arrow taken, None for a same-step
    hop between participants of one transaction."""

    from_event: int
    via: int | None
    to_event: int
    direction: str  # back | forward
    label: str


def _check_event(d, eid):
    if not isinstance(eid, int) or not (0 <= eid < len(d.events)):
        raise UnknownEvent(f"no event {eid!r} in this diagram")


def _pos(d, eid):
    ev = d.events[eid]
    return d.transactions[ev.transaction].row, d.lifelines[ev.lifeline].column


def _step_label(d, arrow, far_eid):
    tx = d.transactions[d.events[far_eid].transaction]
    if arrow is not None and arrow.value is not None:
        return f"{arrow.value} {tx.label}"
    return tx.label


def immediate_causes(d, eid):
    """NavSteps (direction back) from the event to each immediate cause,
    ordered by the cause's (row, column)."""
    _check_event(d, eid)
    idx = d.index()
    steps = {}
    for aid in idx.heads.get(eid, ()):
        a = d.arrows[aid]
        if a.tail is not None:
            steps.setdefault((a.tail, aid), NavStep(
                eid, aid, a.tail, "back", _step_label(d, a, a.tail)))
    tx = d.transactions[d.events[eid].transaction]
    for other in tx.participants:
        if other != eid:
            steps.setdefault((other, None), NavStep(
                eid, None, other, "back", tx.label))
    return sorted(steps.values(),
                  key=lambda s: (_pos(d, s.to_event),
                                 s.via is None, s.via or 0))


def immediate_effects(d, eid):
    """NavSteps (direction forward) from the event to each immediate
    effect; the exact dual of immediate_causes, ordered by the effect's
    (row, column)."""
    _check_event(d, eid)
    idx = d.index()
    steps = {}
    for aid in idx.tails.get(eid, ()):
        a = d.arrows[aid]
        if a.head is not None:
            steps.setdefault((a.head, aid), NavStep(
                eid, aid, a.head, "forward", _step_label(d, a, a.head)))
    tx = d.transactions[d.events[eid].transaction]
    for other in tx.participants:
        if other != eid:
            steps.setdefault((other, None), NavStep(
                eid, None, other, "forward", tx.label))
    return sorted(steps.values(),
                  key=lambda s: (_pos(d, s.to_event),
                                 s.via is None, s.via or 0))


def _cone(d, eid, forward):
    _check_event(d, eid)
    idx = d.index()
    along = idx.tails if forward else idx.heads
    seen = {eid}
    work = [eid]
    while work:
        e = work.pop()
        for p in d.transactions[d.events[e].transaction].participants:
            if p not in seen:
                seen.add(p)
                work.append(p)
        for aid in along.get(e, ()):
            a = d.arrows[aid]
            far = a.head if forward else a.tail
            if far is not None and far not in seen:
                seen.add(far)
                work.append(far)
    return seen


def causal_past(d, eid):
    """Event ids the given event causally depends on, itself included."""
    return _cone(d, eid, forward=False)


def causal_future(d, eid):
    """Event ids causally downstream of the given event, itself included."""
    return _cone(d, eid, forward=True)


def locate(d, violation):
    """(span, label) pairs tying a violation back to the program text.

    Transactions named by the loci contribute their source span and command
    label; raw spans carried by the violation (blocked commands never fired,
    so they have no transaction) contribute the quoted source text.
    Deduplicated by span, source order.
    """
    found = []

    def add(span, label):
        found.append((span, label))

    for kind, ident in violation.loci:
        if kind == "transaction":
            if not (0 <= ident < len(d.transactions)):
                raise ValueError(f"locus names missing transaction {ident}")
            tx = d.transactions[ident]
            add(tx.span, tx.label)
        elif kind == "event":
            if not (0 <= ident < len(d.events)):
                raise ValueError(f"locus names missing event {ident}")
            tx = d.transactions[d.events[ident].transaction]
            add(tx.span, tx.label)
        elif kind == "arrow":
            if not (0 <= ident < len(d.arrows)):
                raise ValueError(f"locus names missing arrow {ident}")
            a = d.arrows[ident]
            for eid in (a.tail, a.head):
                if eid is not None:
                    tx = d.transactions[d.events[eid].transaction]
                    add(tx.span, tx.label)
        else:
            raise ValueError(f"unknown locus kind {kind!r}")
    for span in violation.spans:
        add(span, d.source[span.start:span.end])

    first = {}
    for span, label in found:
        first.setdefault((span.start, span.end), (span, label))
    return [first[k] for k in sorted(first)]
