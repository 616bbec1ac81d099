"""geotrace: run small concurrent programs and draw what happened.

Programs are parsed (lang), executed under a seeded deterministic scheduler
(execute) into a geometric trace diagram (net), scanned against an error
taxonomy (checks), navigated along cause and effect (query), and shipped as
canonical JSON (docio).  The command line and a small HTTP server live in
cli and server.
"""

from .lang import Program, ParseFailure, Span, parse, pretty
from .net import Diagram, state_at_cut, crossing_arrows, footprint
from .execute import RunConfig, run, run_text
from .checks import (
    TAXONOMY, MalformedDiagram, UnknownViolationCode, check_all,
    check_atomicity, check_deadlock, check_operator, check_race,
    check_sequential, classify,
)
from .query import (
    NavStep, UnknownEvent, causal_future, causal_past, immediate_causes,
    immediate_effects, locate,
)
from .docio import ImportFailure, deserialize, serialize

__all__ = [
    "Program", "ParseFailure", "Span", "parse", "pretty",
    "Diagram", "state_at_cut", "crossing_arrows", "footprint",
    "RunConfig", "run", "run_text",
    "TAXONOMY", "MalformedDiagram", "UnknownViolationCode", "check_all",
    "check_atomicity", "check_deadlock", "check_operator", "check_race",
    "check_sequential", "classify",
    "NavStep", "UnknownEvent", "causal_future", "causal_past",
    "immediate_causes", "immediate_effects", "locate",
    "ImportFailure", "deserialize", "serialize",
]
