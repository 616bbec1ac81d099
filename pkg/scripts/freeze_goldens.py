#!/usr/bin/env python3
"""Regenerate the golden fixtures under tests/goldens/.

Run from the repository root after an intentional format or semantics
change, then audit the diff before committing.  Tests compare against
these files byte for byte.
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from geotrace import docio, query
from geotrace.execute import RunConfig, run_text

GOLDENS = pathlib.Path(__file__).resolve().parent.parent / "tests" / "goldens"

WORKED_EXAMPLE = """\
globals { y = 3 @ u }

// producer: allocate, fill from the input feed, hand over
t:(new x; x := c?; release x)
>> // consumer: bump y, take over x, publish the sum, clean up
u:(y := y + 1; acquire x; d!(x + y); dispose x)
"""

WORKED_CONFIG = RunConfig(seed=0, channel_inputs={"c": (8,)},
                          message_offset={"c": 83, "d": 36})

DEADLOCK_EXAMPLE = """\
globals { a = 0 @ t  b = 0 @ u }

// each thread waits for the object the other one never gives up
t:(acquire b; release a) | u:(acquire a; release b)
"""


def write(path, data):
    path.write_bytes(data)
    print(f"wrote {path.relative_to(GOLDENS.parent.parent)} ({len(data)} bytes)")


def navigation_blob(d, source_name):
    nav = []
    for eid in range(len(d.events)):
        def shape(steps):
            return [{"from": s.from_event, "via": s.via, "to": s.to_event,
                     "direction": s.direction, "label": s.label}
                    for s in steps]
        nav.append({
            "event": eid,
            "back": shape(query.immediate_causes(d, eid)),
            "forward": shape(query.immediate_effects(d, eid)),
            "past": sorted(query.causal_past(d, eid)),
        })
    return json.dumps({"source": source_name, "events": nav},
                      indent=1).encode() + b"\n"


def freeze_worked_example():
    write(GOLDENS / "worked_example.gt", WORKED_EXAMPLE.encode())
    d = run_text(WORKED_EXAMPLE, WORKED_CONFIG)
    assert d.violations == []
    write(GOLDENS / "worked_example.diagram.json", docio.serialize(d) + b"\n")
    write(GOLDENS / "worked_example.navigation.json",
          navigation_blob(d, "worked_example.diagram.json"))


def freeze_deadlock_example():
    write(GOLDENS / "deadlock.gt", DEADLOCK_EXAMPLE.encode())
    d = run_text(DEADLOCK_EXAMPLE, RunConfig(seed=0))
    assert [v.code for v in d.violations] == ["DEADLOCK_CYCLE"]
    write(GOLDENS / "deadlock.diagram.json", docio.serialize(d) + b"\n")
    write(GOLDENS / "deadlock.navigation.json",
          navigation_blob(d, "deadlock.diagram.json"))


def freeze_skip():
    d = run_text("t:(skip)", RunConfig(seed=0))
    assert d.violations == []
    write(GOLDENS / "skip.diagram.json", docio.serialize(d) + b"\n")


def freeze_planted_back_arrow():
    d = run_text("a:(new g; dispose g) ; b:(skip)", RunConfig(seed=0))
    assert d.violations == []
    doc = json.loads(docio.serialize(d))
    tail = next(e["id"] for e in doc["events"] if e["kind"] == "skip-mark")
    head = next(e["id"] for e in doc["events"] if e["kind"] == "dispose")
    doc["arrows"].append({"id": len(doc["arrows"]), "tail": tail,
                          "head": head, "orientation": "horizontal",
                          "value": None, "lifeline": None})
    blob = json.dumps(doc, separators=(",", ":")).encode() + b"\n"
    docio.deserialize(blob)  # must stay loadable
    write(GOLDENS / "planted_seq_back.diagram.json", blob)


def main():
    GOLDENS.mkdir(parents=True, exist_ok=True)
    freeze_worked_example()
    freeze_deadlock_example()
    freeze_skip()
    freeze_planted_back_arrow()


if __name__ == "__main__":
    main()
