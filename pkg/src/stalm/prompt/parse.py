"""Parse LLM responses into task plans, and format plans back to text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Protocol

from stalm.world import ContractViolation, DiscreteAction, Direction, Kind, Operator, check_action

_PLAN_RE = re.compile(r"plan\s*=\s*\[")
# the header may wrap onto a second line before its closing "##"
_CHALLENGES_RE = re.compile(r"##\s*Possible Challenges(?:[^#]{0,200}?##[ \t]*|[^\n]*)\n?", re.IGNORECASE)
_PLAN_HEADER_RE = re.compile(r"##\s*Plan", re.IGNORECASE)
_QUOTES = {"'": "'", '"': '"', "‘": "’", "“": "”"}
_ARITY = {"pick": 2, "open": 2, "place": 4}


class ParseError(ValueError):
    """Base class; subclasses tell the caller which recovery path applies."""


class NoPlanBlock(ParseError):
    def __init__(self) -> None:
        super().__init__("no 'plan = [' block found")


class EmptyPlan(ParseError):
    def __init__(self) -> None:
        super().__init__("plan list is empty")


class MalformedTuple(ParseError):
    def __init__(self, index: int, reason: str) -> None:
        super().__init__(f"tuple {index}: {reason}")
        self.index = index
        self.reason = reason


class BadArity(ParseError):
    def __init__(self, index: int, op: str, got: int) -> None:
        super().__init__(f"tuple {index}: {op!r} expects {_ARITY.get(op, '?')} elements, got {got}")
        self.index = index


class UnknownEntity(ParseError):
    def __init__(self, name: str, index: int) -> None:
        super().__init__(f"tuple {index}: unknown entity {name!r}")
        self.name = name
        self.index = index


class Vocabulary(Protocol):
    def kind(self, name: str) -> Kind: ...


@dataclass(frozen=True)
class EntityVocabulary:
    """Name-to-kind table usable wherever a problem instance is expected by the parser."""

    kinds: Mapping[str, Kind]

    def kind(self, name: str) -> Kind:
        try:
            return Kind(self.kinds[name])
        except KeyError:
            raise KeyError(f"unknown entity {name!r}") from None

    @property
    def entities(self):
        return self.kinds


@dataclass(frozen=True)
class TaskPlan:
    actions: tuple[DiscreteAction, ...]

    def __post_init__(self) -> None:
        if not self.actions:
            raise EmptyPlan()

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


@dataclass(frozen=True)
class ParsedResponse:
    challenges_text: str
    plan: TaskPlan
    raw: str


def _skip_comment(text: str, i: int) -> int:
    j = text.find("\n", i)
    return len(text) if j < 0 else j + 1


def _read_string(text: str, i: int) -> tuple[str | None, int]:
    """Read a quoted string starting at ``text[i]``; ``None`` if unterminated on the line."""
    close = _QUOTES[text[i]]
    j = i + 1
    while j < len(text) and text[j] != close and text[j] != "\n":
        j += 1
    if j >= len(text) or text[j] != close:
        return None, j
    return text[i + 1 : j], j + 1


def _read_tuple(text: str, i: int, index: int) -> tuple[list[str], int]:
    """Parse ``(...)`` or ``[...]`` of quoted strings starting after the opener at ``i``."""
    items: list[str] = []
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace() or c == ",":
            i += 1
        elif c == "#":
            i = _skip_comment(text, i)
        elif c in ")]":
            return items, i + 1
        elif c in _QUOTES:
            s, j = _read_string(text, i)
            if s is None:
                raise MalformedTuple(index, "unterminated string")
            items.append(s.strip())
            i = j
        else:
            raise MalformedTuple(index, f"unexpected character {c!r}")
    raise MalformedTuple(index, "unterminated tuple")


def _scan_list(text: str, start: int) -> list[list[str]]:
    tuples: list[list[str]] = []
    i, n = start, len(text)
    while i < n:
        c = text[i]
        if c.isspace() or c == ",":
            i += 1
        elif c == "#":
            i = _skip_comment(text, i)
        elif c == "]":
            break
        elif c in "([":
            items, i = _read_tuple(text, i + 1, len(tuples))
            tuples.append(items)
        elif c in _QUOTES:
            # stray quoted words between tuples (wrapped comments) are ignored
            _, i = _read_string(text, i)
        else:
            # bare words: wrapped comment text that lost its '#'
            while i < n and not text[i].isspace() and text[i] not in "()[],#":
                i += 1
    return tuples


def _to_action(items: list[str], index: int, vocab: Vocabulary) -> DiscreteAction:
    if not items:
        raise MalformedTuple(index, "empty tuple")
    op = items[0].lower()
    if op not in _ARITY:
        raise MalformedTuple(index, f"unknown operator {items[0]!r}")
    if len(items) != _ARITY[op]:
        raise BadArity(index, op, len(items))
    names = [items[1]] + ([items[3]] if op == "place" else [])
    for name in names:
        try:
            vocab.kind(name)
        except KeyError:
            raise UnknownEntity(name, index) from None
    if op == "place":
        try:
            d = Direction(items[2])
        except ValueError:
            raise MalformedTuple(index, f"unknown direction {items[2]!r}") from None
        a = DiscreteAction.place(items[1], d, items[3])
    else:
        a = DiscreteAction(Operator(op), items[1])
    try:
        check_action(a, vocab)  # type: ignore[arg-type]
    except ContractViolation as exc:
        raise MalformedTuple(index, str(exc)) from None
    return a


def _challenges(text: str, plan_at: int) -> str:
    m = _CHALLENGES_RE.search(text, 0, plan_at)
    if m is None:
        return ""
    end = _PLAN_HEADER_RE.search(text, m.end(), plan_at)
    return text[m.end() : end.start() if end else plan_at].strip()


def parse_response(text: str, vocab: Vocabulary) -> ParsedResponse:
    """Parse the last ``plan = [...]`` block of ``text`` into a well-typed task plan.

    Raises a :class:`ParseError` subclass on failure and nothing else.
    """
    if not isinstance(text, str):
        raise NoPlanBlock()
    matches = list(_PLAN_RE.finditer(text))
    if not matches:
        raise NoPlanBlock()
    m = matches[-1]
    tuples = _scan_list(text, m.end())
    if not tuples:
        raise EmptyPlan()
    actions = tuple(_to_action(items, i, vocab) for i, items in enumerate(tuples))
    return ParsedResponse(_challenges(text, m.start()), TaskPlan(actions), text)


def format_action(a: DiscreteAction) -> str:
    return "(" + ", ".join(repr(x) for x in a.as_tuple()) + ")"


def format_plan(plan: TaskPlan | list[DiscreteAction] | tuple[DiscreteAction, ...]) -> str:
    actions = plan.actions if isinstance(plan, TaskPlan) else tuple(plan)
    return "plan = [" + ", ".join(format_action(a) for a in actions) + "]"
