"""Prompt rendering and LLM response parsing."""

from stalm.prompt.parse import (
    BadArity,
    EmptyPlan,
    EntityVocabulary,
    MalformedTuple,
    NoPlanBlock,
    ParsedResponse,
    ParseError,
    TaskPlan,
    UnknownEntity,
    format_plan,
    parse_response,
)
from stalm.prompt.render import CLOSING_LINE, PromptBundle, create_prompt, state_hash

__all__ = [
    "CLOSING_LINE",
    "BadArity",
    "EmptyPlan",
    "EntityVocabulary",
    "MalformedTuple",
    "NoPlanBlock",
    "ParseError",
    "ParsedResponse",
    "PromptBundle",
    "TaskPlan",
    "UnknownEntity",
    "create_prompt",
    "format_plan",
    "parse_response",
    "state_hash",
]
