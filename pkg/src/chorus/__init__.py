"""chorus: a workbench for core and dynamic choreographies.

Parse, execute, transform and exhaustively check choreographic programs in
four calculi (MC, CC, DMC, DCC), including an asynchrony encoding that
splits every communication into a send/receive pair over spawned channel
processes.
"""
from .corpus import CorpusProgram, corpus
from .explorer import (
    CheckResult, StateSpace, check_eventual_delivery, check_no_added_behavior,
    check_progress, explore, fifo_per_pair,
)
from .runtime import Configuration, Value, initial_config
from .semantics import Outcome, RunResult, TraceEvent, run
from .syntax import (
    CalculusMode, Choreography, ParseError, parse, parse_program, pretty_print,
)
from .transform import (
    TransformError, check_wellformed, eliminate_selections, encode_async,
    encode_async_report,
)

__version__ = "0.1.0"

__all__ = [
    "CalculusMode", "CheckResult", "Choreography", "Configuration",
    "CorpusProgram", "Outcome", "ParseError", "RunResult", "StateSpace",
    "TraceEvent", "TransformError", "Value", "check_eventual_delivery",
    "check_no_added_behavior", "check_progress", "check_wellformed", "corpus",
    "eliminate_selections", "encode_async", "encode_async_report", "explore",
    "fifo_per_pair", "initial_config", "parse", "parse_program",
    "pretty_print", "run",
]
