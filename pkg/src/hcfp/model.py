"""Higher-order context-free processes and their explicit step relation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import LevelMismatch, ModelError, UnsupportedOperation
from .store import Operation, PopK, Push1, PushK, Store, encoded_size, level, top_letter, try_apply


@dataclass(frozen=True, order=True)
class Transition:
    guard: str
    op: Operation

    @property
    def level(self) -> int:
        return self.op.level

    def __str__(self) -> str:
        return f"rule {self.guard} {self.op}"


@dataclass(frozen=True)
class Hcfp:
    """Alphabet, level and an *ordered* tuple of rules."""

    alphabet: frozenset
    level: int
    transitions: tuple = ()

    def __init__(self, alphabet: Iterable[str], level: int, transitions: Iterable[Transition] = ()):
        object.__setattr__(self, "alphabet", frozenset(alphabet))
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "transitions", tuple(transitions))

    def reordered(self, order: Iterable[int]) -> "Hcfp":
        return Hcfp(self.alphabet, self.level, [self.transitions[i] for i in order])


def rules(*pairs) -> tuple:
    """Convenience: rules(("a", PopK(2)), ...) -> tuple of Transition."""
    return tuple(Transition(a, o) for a, o in pairs)


def validate(h: Hcfp) -> None:
    problems = []
    if h.level < 1:
        problems.append("model level must be at least 1")
    for a in h.alphabet:
        if not isinstance(a, str) or len(a) != 1 or a in "[]":
            problems.append(f"letter {a!r} must be a single non-bracket character")
    seen = set()
    for i, d in enumerate(h.transitions):
        if d in seen:
            problems.append(f"rule {i} ({d}) is a duplicate")
        seen.add(d)
        if d.guard not in h.alphabet:
            problems.append(f"rule {i}: guard {d.guard!r} is not a declared letter")
        if d.op.level > h.level:
            problems.append(f"rule {i}: operation level {d.op.level} exceeds model level {h.level}")
        if isinstance(d.op, Push1):
            bad = sorted(set(d.op.word) - h.alphabet)
            if bad:
                problems.append(f"rule {i}: push1 word uses undeclared letters {bad}")
    if problems:
        raise ModelError(problems)


def enabled(h: Hcfp, s: Store) -> list:
    a = top_letter(s)
    if a is None:
        return []
    return [d for d in h.transitions if d.guard == a and try_apply(d.op, s) is not None]


def successors(h: Hcfp, s: Store) -> list:
    """Successor stores in rule order (duplicates removed, first occurrence kept)."""
    a = top_letter(s)
    if a is None:
        return []
    out = []
    for d in h.transitions:
        if d.guard == a:
            t = try_apply(d.op, s)
            if t is not None and t not in out:
                out.append(t)
    return out


def step(h: Hcfp, s: Store) -> set:
    return set(successors(h, s))


def post_explicit(h: Hcfp, S: Iterable[Store]) -> set:
    result = set()
    for s in S:
        result.update(successors(h, s))
    return result


def post_symbolic(*_args, **_kw):
    raise UnsupportedOperation(
        "post over automata is not supported: the successor set of a regular store set is "
        "in general not regular (push_k duplicates an unbounded component)")


class Verdict(enum.Enum):
    REACHES_WITHIN = "ReachesWithin"
    NOT_WITHIN_BOUNDS = "NotWithinBounds"


def bounded_reach(h: Hcfp, s: Store, target: Callable[[Store], bool], max_depth: int,
                  max_encoded_size: int, allowed: Callable[[Store], bool] | None = None) -> Verdict:
    """Breadth-first search for a run of length <= max_depth into ``target``.

    Every visited store (start included) must have encoded length within the
    bound. With ``allowed`` each step must also stay inside that set (both
    endpoints), which gives the constrained relation.
    """
    found = reach_distance(h, s, target, max_depth, max_encoded_size, allowed)
    return Verdict.NOT_WITHIN_BOUNDS if found is None else Verdict.REACHES_WITHIN


def reach_distance(h: Hcfp, s: Store, target: Callable[[Store], bool], max_depth: int,
                   max_encoded_size: int, allowed=None) -> int | None:
    """Length of a shortest bounded witness run, or None."""
    if encoded_size(s) > max_encoded_size:
        return None
    if target(s):
        return 0
    if allowed is not None and not allowed(s):
        return None
    seen = {s}
    frontier = [s]
    for depth in range(1, max_depth + 1):
        nxt = []
        for u in frontier:
            for t in successors(h, u):
                if t in seen or encoded_size(t) > max_encoded_size:
                    continue
                if allowed is not None and not allowed(t):
                    continue
                if target(t):
                    return depth
                seen.add(t)
                nxt.append(t)
        if not nxt:
            return None
        frontier = nxt
    return None


def check_level(h: Hcfp, s: Store) -> None:
    if level(s) != h.level:
        raise LevelMismatch(f"store of level {level(s)} for a level-{h.level} model")


__all__ = ["Transition", "Hcfp", "rules", "validate", "enabled", "successors", "step",
           "post_explicit", "post_symbolic", "Verdict", "bounded_reach", "reach_distance",
           "Push1", "PushK", "PopK"]
