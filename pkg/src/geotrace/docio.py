"""The diagram interchange document: canonical JSON, version 1.

Canonical means byte-reproducible: fixed key order, no insignificant
whitespace, ASCII only, arrays ordered by id, channel maps ordered by
channel name.  Integers that carry program values (global initial values,
arrow labels, input feeds, the seed) are written as decimal strings so a
reader limited to doubles cannot silently round them; structural integers
(ids, rows, columns, spans, step counts) stay plain numbers.  A
transaction's issuer is its thread lifeline id, or the string
"environment".

deserialize() refuses, with distinct messages, documents with an
unsupported version, dangling ids, ids out of array order, or transaction
rows that do not strictly increase.  It deliberately does not re-check
construction rules: imported diagrams go through check_all like any other.
"""

from __future__ import annotations

import json

from . import net
from .execute import RunConfig
from .lang import Span

VERSION = 1


class ImportFailure(Exception):
    pass


# ---- writing ----------------------------------------------------------------

def _span(s):
    return [s.start, s.end]

def _value(v):
    return None if v is None else str(v)


def serialize(d):
    """Canonical document bytes for a diagram."""
    cfg = d.config
    doc = {
        "version": VERSION,
        "source": d.source,
        "config": {
            "seed": str(cfg.seed),
            "max_steps": cfg.max_steps,
            "channel_inputs": {ch: [str(v) for v in cfg.channel_inputs[ch]]
                               for ch in sorted(cfg.channel_inputs)},
            "message_offset": {ch: cfg.message_offset[ch]
                               for ch in sorted(cfg.message_offset)},
        },
        "globals": [{"name": n, "value": str(v), "owner": o}
                    for n, v, o in d.globals_],
        "lifelines": [{
            "id": l.id, "name": l.name, "kind": l.kind, "column": l.column,
            "alloc_row": l.alloc_row, "dispose_row": l.dispose_row,
            "scope": l.scope,
        } for l in d.lifelines],
        "events": [{
            "id": e.id, "lifeline": e.lifeline,
            "transaction": e.transaction, "kind": e.kind,
        } for e in d.events],
        "transactions": [{
            "id": t.id, "row": t.row, "label": t.label,
            "issuer": "environment" if t.issuer == net.ENVIRONMENT else t.issuer,
            "participants": list(t.participants), "span": _span(t.span),
        } for t in d.transactions],
        "arrows": [{
            "id": a.id, "tail": a.tail, "head": a.head,
            "orientation": a.orientation, "value": _value(a.value),
            "lifeline": a.lifeline,
        } for a in d.arrows],
        "slices": [{
            "id": s.id, "op": s.op, "span": _span(s.span), "parent": s.parent,
            "children": list(s.children), "orientation": s.orientation,
            "row_lo": s.row_lo, "row_hi": s.row_hi,
            "col_lo": s.col_lo, "col_hi": s.col_hi,
        } for s in d.slices],
        "violations": [{
            "code": v.code, "classification": v.classification,
            "loci": [[k, i] for k, i in v.loci],
            "spans": [_span(s) for s in v.spans],
            "detail": v.detail,
            "witness": None if v.witness is None else list(v.witness),
            "row": v.row,
        } for v in d.violations],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=True).encode("ascii")


# ---- reading ----------------------------------------------------------------

def _shape(cond, what):
    if not cond:
        raise ImportFailure(f"not a diagram document: {what}")


def _ref(value, limit, what, nullable=False):
    if value is None and nullable:
        return None
    _shape(isinstance(value, int) and not isinstance(value, bool),
           f"{what} must be an id")
    if not (0 <= value < limit):
        raise ImportFailure(f"dangling id: {what} is {value}, "
                            f"but only {limit} exist")
    return value


def _read_span(raw, what):
    _shape(isinstance(raw, list) and len(raw) == 2
           and all(isinstance(x, int) for x in raw), f"{what} is not a span")
    return Span(raw[0], raw[1])


def _ordered(items, what):
    for i, item in enumerate(items):
        if item.get("id") != i:
            raise ImportFailure(f"ids out of order: {what}[{i}] "
                                f"has id {item.get('id')!r}")


def deserialize(data):
    """Rebuild a Diagram from document bytes (or text)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        doc = json.loads(data)
    except ValueError as err:
        raise ImportFailure(f"not a diagram document: {err}") from None
    _shape(isinstance(doc, dict), "top level is not an object")
    version = doc.get("version")
    if version != VERSION:
        raise ImportFailure(f"unsupported version: {version!r} "
                            f"(this reader speaks {VERSION})")
    try:
        return _build(doc)
    except (KeyError, TypeError, ValueError) as err:
        raise ImportFailure(f"not a diagram document: {err}") from None


def _build(doc):
    cfg_raw = doc["config"]
    config = RunConfig(
        seed=int(cfg_raw["seed"]),
        max_steps=int(cfg_raw["max_steps"]),
        channel_inputs={ch: tuple(int(v) for v in vs)
                        for ch, vs in cfg_raw["channel_inputs"].items()},
        message_offset={ch: int(n)
                        for ch, n in cfg_raw["message_offset"].items()},
    )
    globals_ = tuple((g["name"], int(g["value"]), g["owner"])
                     for g in doc["globals"])

    raw_lines = doc["lifelines"]
    raw_events = doc["events"]
    raw_txs = doc["transactions"]
    raw_arrows = doc["arrows"]
    raw_slices = doc["slices"]
    for items, what in ((raw_lines, "lifelines"), (raw_events, "events"),
                        (raw_txs, "transactions"), (raw_arrows, "arrows"),
                        (raw_slices, "slices")):
        _shape(isinstance(items, list), f"{what} is not an array")
        _shape(all(isinstance(x, dict) for x in items),
               f"{what} holds a non-record")
        _ordered(items, what)
    nl, ne, nt, ns = (len(raw_lines), len(raw_events), len(raw_txs),
                      len(raw_slices))

    lifelines = [net.Lifeline(
        r["id"], r["name"], r["kind"], r["column"],
        r["alloc_row"], r["dispose_row"],
        _ref(r["scope"], ns, f"lifelines[{r['id']}].scope", nullable=True),
    ) for r in raw_lines]

    events = [net.Event(
        r["id"],
        _ref(r["lifeline"], nl, f"events[{r['id']}].lifeline"),
        _ref(r["transaction"], nt, f"events[{r['id']}].transaction"),
        r["kind"],
    ) for r in raw_events]

    transactions = []
    for r in raw_txs:
        issuer = r["issuer"]
        if issuer == "environment":
            issuer = net.ENVIRONMENT
        else:
            issuer = _ref(issuer, nl, f"transactions[{r['id']}].issuer")
        transactions.append(net.Transaction(
            r["id"], r["row"], r["label"], issuer,
            tuple(_ref(p, ne, f"transactions[{r['id']}].participants")
                  for p in r["participants"]),
            _read_span(r["span"], f"transactions[{r['id']}].span"),
        ))
    for prev, cur in zip(transactions, transactions[1:]):
        if not prev.row < cur.row:
            raise ImportFailure(
                f"non-canonical row order: transaction {cur.id} has row "
                f"{cur.row} after row {prev.row}")

    arrows = [net.Arrow(
        r["id"],
        _ref(r["tail"], ne, f"arrows[{r['id']}].tail", nullable=True),
        _ref(r["head"], ne, f"arrows[{r['id']}].head", nullable=True),
        r["orientation"],
        None if r["value"] is None else int(r["value"]),
        _ref(r["lifeline"], nl, f"arrows[{r['id']}].lifeline", nullable=True),
    ) for r in raw_arrows]

    slices = [net.Slice(
        r["id"], r["op"], _read_span(r["span"], f"slices[{r['id']}].span"),
        _ref(r["parent"], ns, f"slices[{r['id']}].parent", nullable=True),
        tuple(_ref(c, ns, f"slices[{r['id']}].children")
              for c in r["children"]),
        r["orientation"], r["row_lo"], r["row_hi"], r["col_lo"], r["col_hi"],
    ) for r in raw_slices]

    violations = [net.Violation(
        r["code"], r["classification"],
        tuple((k, i) for k, i in r["loci"]),
        tuple(_read_span(s, "violation span") for s in r["spans"]),
        r["detail"],
        None if r["witness"] is None else tuple(r["witness"]),
        r["row"],
    ) for r in doc["violations"]]

    return net.Diagram(
        source=doc["source"],
        config=config,
        globals_=globals_,
        lifelines=lifelines,
        events=events,
        transactions=transactions,
        arrows=arrows,
        slices=slices,
        violations=violations,
    )


def load(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def dump(d, path):
    with open(path, "wb") as fh:
        fh.write(serialize(d))
        fh.write(b"\n")
