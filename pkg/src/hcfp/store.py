"""Higher-order stores and the operations acting on them.

A level-1 store is a ``str`` of single-character letters (possibly empty).
A level-n store (n >= 2) is a non-empty ``tuple`` of level n-1 stores.
The top of a store is its *first* element, so ``"ab"`` has top letter ``a``.
Values are immutable and hashable; operations return fresh values that share
untouched children with their argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import LevelMismatch, ParseError, Undefined

Store = Union[str, tuple]

OPEN, CLOSE = "[", "]"


@dataclass(frozen=True, order=True)
class Push1:
    """Replace the top letter by ``word``; ``Push1("")`` is pop_1."""

    word: str

    @property
    def level(self) -> int:
        return 1

    def __str__(self) -> str:
        return f'push1 "{self.word}"' if self.word else "pop 1"


@dataclass(frozen=True, order=True)
class PushK:
    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("push_k needs k >= 2; use Push1 for level 1")

    @property
    def level(self) -> int:
        return self.k

    def __str__(self) -> str:
        return f"push {self.k}"


@dataclass(frozen=True, order=True)
class PopK:
    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("pop_1 is Push1(''); build it with pop(1)")

    @property
    def level(self) -> int:
        return self.k

    def __str__(self) -> str:
        return f"pop {self.k}"


Operation = Union[Push1, PushK, PopK]


def push(k: int, word: str | None = None) -> Operation:
    if k == 1:
        if word is None:
            raise ValueError("push1 needs a word")
        return Push1(word)
    return PushK(k)


def pop(k: int) -> Operation:
    """pop_1 is canonicalised to ``Push1("")``."""
    return Push1("") if k == 1 else PopK(k)


def level(s: Store) -> int:
    n = 1
    while not isinstance(s, str):
        s = s[0]
        n += 1
    return n


def is_store(s, n: int | None = None) -> bool:
    """Structural well-formedness, optionally at a given level."""
    if isinstance(s, str):
        return n in (None, 1)
    if not isinstance(s, tuple) or not s:
        return False
    m = level(s)
    if n is not None and m != n:
        return False
    return all(is_store(c, m - 1) for c in s)


def top(s: Store, k: int):
    """``top_k``: the top-most (k-1)-store for k >= 2, the top letter for k = 1."""
    n = level(s)
    if not 1 <= k <= n:
        raise Undefined(f"top_{k} on a level-{n} store")
    while n > k:
        s = s[0]
        n -= 1
    if k == 1 and not s:
        raise Undefined("top_1 of an empty store")
    return s[0]


def top_letter(s: Store) -> str | None:
    """Top letter or None when the top-most 1-store is empty."""
    while not isinstance(s, str):
        s = s[0]
    return s[0] if s else None


def apply(op: Operation, s: Store) -> Store:
    n = level(s)
    k = op.level
    if k > n:
        raise Undefined(f"{op} on a level-{n} store")
    return _apply(op, k, s, n)


def _apply(op, k, s, n):
    if n > k:
        return (_apply(op, k, s[0], n - 1),) + s[1:]
    if k == 1:
        if not s:
            raise Undefined("push1 on an empty 1-store")
        return op.word + s[1:]
    if isinstance(op, PushK):
        return (s[0],) + s
    if len(s) < 2:
        raise Undefined(f"pop_{k} on a {k}-store with a single child")
    return s[1:]


def try_apply(op: Operation, s: Store) -> Store | None:
    try:
        return apply(op, s)
    except Undefined:
        return None


def encode(s: Store) -> str:
    if isinstance(s, str):
        return OPEN + s + CLOSE
    return OPEN + "".join(encode(c) for c in s) + CLOSE


def encoded_size(s: Store) -> int:
    if isinstance(s, str):
        return len(s) + 2
    return 2 + sum(encoded_size(c) for c in s)


def parse(word: str, n: int | None = None) -> Store:
    """Inverse of :func:`encode`.

    Whitespace is ignored. With ``n`` given the store must have that level.
    Raises :class:`ParseError` on ill-bracketed input and
    :class:`LevelMismatch` on a well-bracketed word that is not an n-store.
    """
    text = "".join(word.split())
    if not text.startswith(OPEN):
        raise ParseError("store must start with '['", 0)
    value, end = _parse_at(text, 0)
    if end != len(text):
        raise ParseError("trailing input after store", end)
    if n is not None:
        m = level(value)
        if m != n:
            raise LevelMismatch(f"expected a level-{n} store, got level {m}")
    return value


def _parse_at(text, i):
    # returns (store, index after its closing bracket)
    j = i + 1
    if j >= len(text):
        raise ParseError("unbalanced '['", i)
    if text[j] == CLOSE:
        return "", j + 1
    if text[j] != OPEN:
        k = j
        while k < len(text) and text[k] not in (OPEN, CLOSE):
            k += 1
        if k >= len(text):
            raise ParseError("unbalanced '['", i)
        if text[k] == OPEN:
            raise ParseError("letters and stores mixed at one depth", k)
        return text[j:k], k + 1
    children = []
    while j < len(text) and text[j] == OPEN:
        child, j = _parse_at(text, j)
        children.append(child)
    if j >= len(text):
        raise ParseError("unbalanced '['", i)
    if text[j] != CLOSE:
        raise ParseError("letters and stores mixed at one depth", j)
    levels = {level(c) for c in children}
    if len(levels) != 1:
        raise LevelMismatch("children of one store have different levels")
    return tuple(children), j + 1


def show(s: Store) -> str:
    return encode(s)
