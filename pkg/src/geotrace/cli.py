"""The geotrace command line.

run executes a program file and emits the diagram document; check replays
the geometric rules over an existing document; query and locate answer
causal questions about one; serve puts a document behind HTTP for the
browser UI.  Exit codes grade the outcome by who has to act: 0 clean,
10 developer error, 20 implementer error (broken geometry or a document
this tool refuses to trust), 30 prevention (the program never ran),
40 inconclusive, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import checks, docio, query, server
from .execute import RunConfig, run
from .lang import parse

EXIT_CLEAN = 0
EXIT_DEVELOPER = 10
EXIT_IMPLEMENTER = 20
EXIT_PREVENTION = 30
EXIT_INCONCLUSIVE = 40
EXIT_USAGE = 2

# worst class first: broken tooling outranks a buggy program, a program
# that never ran outranks an unfinished verdict
_GRADES = ((checks.IMPLEMENTER, EXIT_IMPLEMENTER),
           (checks.DEVELOPER, EXIT_DEVELOPER),
           (checks.PREVENTION, EXIT_PREVENTION),
           (checks.INCONCLUSIVE, EXIT_INCONCLUSIVE))


def grade(violations):
    present = {v.classification for v in violations}
    for cls, code in _GRADES:
        if cls in present:
            return code
    return EXIT_CLEAN


def _say(v):
    where = f" row {v.row}" if v.row is not None else ""
    return f"{v.code} [{v.classification.lower()}]{where}: {v.detail}"


def _fail(message, code=EXIT_USAGE):
    print(f"geotrace: {message}", file=sys.stderr)
    return code


def _read_text(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_diagram(path):
    with open(path, "rb") as fh:
        return docio.deserialize(fh.read())


def _parse_feed(pairs, parser):
    feeds = {}
    for item in pairs:
        name, eq, rest = item.partition("=")
        if not eq or not name:
            parser.error(f"--in wants CH=v1,v2,... not {item!r}")
        try:
            feeds[name] = tuple(int(v) for v in rest.split(",")) if rest else ()
        except ValueError:
            parser.error(f"--in values for {name} must be integers")
    return feeds


def _parse_offsets(pairs, parser):
    offsets = {}
    for item in pairs:
        name, eq, rest = item.partition("=")
        try:
            if not eq or not name:
                raise ValueError
            offsets[name] = int(rest)
        except ValueError:
            parser.error(f"--msg-offset wants CH=N not {item!r}")
    return offsets


def cmd_run(args, parser):
    try:
        text = _read_text(args.file)
    except OSError as err:
        return _fail(err)
    program = parse(text)
    if isinstance(program, list):
        for f in program:
            print(f"{f.code} [prevention] at {f.span.start}-{f.span.end}: "
                  f"{f.message}", file=sys.stderr)
        return EXIT_PREVENTION
    config = RunConfig(
        seed=args.seed, max_steps=args.max_steps,
        channel_inputs=_parse_feed(args.inputs, parser),
        message_offset=_parse_offsets(args.msg_offset, parser),
    )
    diagram = run(program, config, source=text)
    blob = docio.serialize(diagram) + b"\n"
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(blob)
    else:
        sys.stdout.buffer.write(blob)
        sys.stdout.buffer.flush()
    violations = checks.check_all(diagram)
    for v in violations:
        print(_say(v), file=sys.stderr)
    return grade(violations)


def cmd_check(args, parser):
    try:
        diagram = _load_diagram(args.file)
    except OSError as err:
        return _fail(err)
    except docio.ImportFailure as err:
        return _fail(err, EXIT_IMPLEMENTER)
    try:
        violations = checks.check_all(diagram)
    except checks.MalformedDiagram as err:
        return _fail(err, EXIT_IMPLEMENTER)
    if not violations:
        print("clean")
        return EXIT_CLEAN
    for v in violations:
        print(_say(v))
    return grade(violations)


def _steps_json(steps):
    return [{"from": s.from_event, "via": s.via, "to": s.to_event,
             "direction": s.direction, "label": s.label} for s in steps]


def cmd_query(args, parser):
    try:
        diagram = _load_diagram(args.file)
    except OSError as err:
        return _fail(err)
    except docio.ImportFailure as err:
        return _fail(err, EXIT_IMPLEMENTER)
    try:
        if args.back:
            out = _steps_json(query.immediate_causes(diagram, args.event))
        elif args.forward:
            out = _steps_json(query.immediate_effects(diagram, args.event))
        else:
            out = sorted(query.causal_past(diagram, args.event))
    except query.UnknownEvent as err:
        return _fail(err)
    print(json.dumps(out, separators=(",", ":")))
    return EXIT_CLEAN


def cmd_locate(args, parser):
    try:
        diagram = _load_diagram(args.file)
    except OSError as err:
        return _fail(err)
    except docio.ImportFailure as err:
        return _fail(err, EXIT_IMPLEMENTER)
    try:
        violations = checks.check_all(diagram)
    except checks.MalformedDiagram as err:
        return _fail(err, EXIT_IMPLEMENTER)
    if not (0 <= args.violation < len(violations)):
        return _fail(f"no violation {args.violation}; "
                     f"this diagram has {len(violations)}")
    spots = query.locate(diagram, violations[args.violation])
    print(json.dumps([{"span": [s.start, s.end], "label": label}
                      for s, label in spots], separators=(",", ":")))
    return EXIT_CLEAN


def cmd_serve(args, parser):
    try:
        diagram = _load_diagram(args.file)
    except OSError as err:
        return _fail(err)
    except docio.ImportFailure as err:
        return _fail(err, EXIT_IMPLEMENTER)
    server.serve(diagram, args.port, args.ui_dir)
    return EXIT_CLEAN


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geotrace",
        description="run concurrent toy programs and inspect their "
                    "history diagrams")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute FILE.gt and print its document")
    p.add_argument("file", metavar="FILE.gt")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10000)
    p.add_argument("--in", dest="inputs", action="append", default=[],
                   metavar="CH=v1,v2,...",
                   help="feed for an environment input channel (repeatable)")
    p.add_argument("--msg-offset", action="append", default=[],
                   metavar="CH=N",
                   help="start a channel's message numbering at N+1")
    p.add_argument("-o", "--output", metavar="OUT.json")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("check", help="re-check a document's geometry")
    p.add_argument("file", metavar="DIAGRAM.json")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("query", help="navigate causes and effects")
    p.add_argument("file", metavar="DIAGRAM.json")
    p.add_argument("--event", type=int, required=True)
    way = p.add_mutually_exclusive_group(required=True)
    way.add_argument("--back", action="store_true",
                     help="immediate causes as navigation steps")
    way.add_argument("--past", action="store_true",
                     help="every event id in the causal past")
    way.add_argument("--forward", action="store_true",
                     help="immediate effects as navigation steps")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("locate", help="map a violation back to source")
    p.add_argument("file", metavar="DIAGRAM.json")
    p.add_argument("--violation", type=int, required=True,
                   help="index into the check output, 0-based")
    p.set_defaults(fn=cmd_locate)

    p = sub.add_parser("serve", help="serve the document and UI over HTTP")
    p.add_argument("file", metavar="DIAGRAM.json")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", metavar="DIR",
                   help="directory of built UI assets")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args, parser)


if __name__ == "__main__":
    sys.exit(main())
