"""A voxel-building command language that users grow interactively: a small
core grammar, a chart parser with a trainable ranker, and rule induction from
user definitions."""

from .grammar import Category, Grammar, GrammarRule, core_grammar
from .induction import Definition, InductionResult, induce_rules
from .interpreter import EvalError, ResourceLimitError, ValueSet, eval_set, execute
from .model import Params, featurize, update
from .parser import ChartParser, Derivation, ParseResult, strip_root_scope, tokenize
from .programs import ProgramSyntaxError, pretty, program_length, read_program
from .session import Session, SessionError
from .world import Color, Direction, Position, WorldState

__version__ = "0.1.0"

__all__ = [
    "Category",
    "ChartParser",
    "Color",
    "Definition",
    "Derivation",
    "Direction",
    "EvalError",
    "Grammar",
    "GrammarRule",
    "InductionResult",
    "Params",
    "ParseResult",
    "Position",
    "ProgramSyntaxError",
    "ResourceLimitError",
    "Session",
    "SessionError",
    "ValueSet",
    "WorldState",
    "core_grammar",
    "eval_set",
    "execute",
    "featurize",
    "induce_rules",
    "pretty",
    "program_length",
    "read_program",
    "strip_root_scope",
    "tokenize",
    "update",
    "__version__",
]
