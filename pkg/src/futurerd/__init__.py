"""On-the-fly determinacy-race detection for task-parallel traces with futures."""

from .dsu import LABEL_P, LABEL_S, DisjointSets, SetRecord
from .engine import (
    ALGO_MULTIBAGS,
    ALGO_PLUS,
    DetectReport,
    Stats,
    VerifyReport,
    detect,
    replay,
    stats_only,
    verify,
)
from .errors import InputError, InvariantError, ParseError, UsageError
from .generators import gen_lcs_general, gen_lcs_structured, gen_random
from .multibags import MultiBags
from .multibags_plus import MultiBagsPlus
from .oracle import OracleDag, build, longest_path, naive_races, to_dot
from .reachdag import ReachDag
from .shadow import RaceReport, ShadowTable
from .trace import (
    MODE_GENERAL,
    MODE_STRUCTURED,
    Event,
    EventSequence,
    ValidationReport,
    Violation,
    dump,
    load,
    parse,
    serialize,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ALGO_MULTIBAGS",
    "ALGO_PLUS",
    "DetectReport",
    "DisjointSets",
    "Event",
    "EventSequence",
    "InputError",
    "InvariantError",
    "LABEL_P",
    "LABEL_S",
    "MODE_GENERAL",
    "MODE_STRUCTURED",
    "MultiBags",
    "MultiBagsPlus",
    "OracleDag",
    "ParseError",
    "RaceReport",
    "ReachDag",
    "SetRecord",
    "ShadowTable",
    "Stats",
    "UsageError",
    "ValidationReport",
    "VerifyReport",
    "Violation",
    "build",
    "detect",
    "dump",
    "gen_lcs_general",
    "gen_lcs_structured",
    "gen_random",
    "load",
    "longest_path",
    "naive_races",
    "parse",
    "replay",
    "serialize",
    "stats_only",
    "to_dot",
    "validate",
    "verify",
]
