"""Conjunctive query answering over ELHO knowledge bases with transitive and reflexive
roles, nominals and Self restrictions."""
from .answer import AnswerSet, certain_answers, entails
from .kb_text import ParseError, parse_kb, parse_query
from .materialize import ResourceLimit

__all__ = ["AnswerSet", "ParseError", "ResourceLimit", "certain_answers", "entails",
           "parse_kb", "parse_query"]
__version__ = "0.1.0"
