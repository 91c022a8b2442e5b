"""Text formats for models, store automata and formulas, plus DOT export.

Model files::

    level 2
    letters a b
    rule a push1 "ab"
    rule a pop 2          # pop 1 is the same as push1 ""

Automaton files::

    level 1
    letters a
    states q0 q1 q2
    initial q0
    final q2
    trans q0 [ q1
    trans q1 a q1
    trans q1 ] q2

or, as sugar for a finite set, ``stores { [[a][b]] [[a]] }``.
Statements end at a newline or ``;``; ``#`` starts a comment.
"""

from __future__ import annotations

import re
import shlex
from pathlib import Path

from . import flat as F
from . import nested as N
from .errors import LevelMismatch, ParseError
from .flat import BRACKETS, EPS, FlatAutomaton
from .logic import Formula, parse_formula
from .model import Hcfp, Transition, validate
from .nested import NestedAutomaton, TABLE
from .store import PopK, Push1, PushK, encode, level as store_level, parse as parse_store, pop


class SourceError(ParseError):
    """A ParseError that knows its file, line and column."""

    def __init__(self, message: str, line: int, column: int, source: str = "<string>"):
        self.line, self.column, self.source = line, column, source
        ParseError.__init__(self, f"{source}:{line}:{column}: {message}")


def _statements(text: str):
    """Yield (line, column, text) for every statement, comments stripped."""
    for lineno, raw in enumerate(text.splitlines(), 1):
        col = 0
        buf, start, quote = [], 0, False
        for col, ch in enumerate(raw):
            if ch == '"':
                quote = not quote
            if not quote and ch == "#":
                break
            if not quote and ch == ";":
                stmt = "".join(buf)
                if stmt.strip():
                    yield lineno, start + 1 + _indent(stmt), stmt.strip()
                buf, start = [], col + 1
                continue
            buf.append(ch)
        stmt = "".join(buf)
        if stmt.strip():
            yield lineno, start + 1 + _indent(stmt), stmt.strip()


def _indent(s: str) -> int:
    return len(s) - len(s.lstrip())


# ---------------------------------------------------------------- models

def parse_model(text: str, source: str = "<string>") -> Hcfp:
    level = None
    letters: list = []
    rules = []
    for line, col, stmt in _statements(text):
        try:
            words = shlex.split(stmt)
        except ValueError as e:
            raise SourceError(str(e), line, col, source) from None
        head = words[0]
        if head == "level":
            if len(words) != 2 or not words[1].isdigit():
                raise SourceError("expected 'level N'", line, col, source)
            level = int(words[1])
        elif head == "letters":
            letters.extend(words[1:])
        elif head == "rule":
            rules.append(_rule(words, stmt, line, col, source))
        else:
            raise SourceError(f"unknown statement {head!r}", line, col, source)
    if level is None:
        raise SourceError("missing 'level' statement", 1, 1, source)
    h = Hcfp(letters, level, rules)
    validate(h)
    return h


def _rule(words, stmt, line, col, source) -> Transition:
    if len(words) < 3:
        raise SourceError("expected 'rule LETTER OPERATION'", line, col, source)
    guard, op = words[1], words[2:]
    try:
        if op[0] == "push1" and len(op) == 2:
            if '"' not in stmt:
                raise SourceError('push1 needs a quoted word, e.g. push1 "ab"', line, col, source)
            return Transition(guard, Push1(op[1]) if op[1] else pop(1))
        if op[0] in ("push", "pop") and len(op) == 2 and op[1].isdigit():
            k = int(op[1])
            if op[0] == "pop":
                return Transition(guard, pop(k))
            if k == 1:
                raise SourceError('push 1 is written push1 "word"', line, col, source)
            return Transition(guard, PushK(k))
    except ValueError as e:
        raise SourceError(str(e), line, col, source) from None
    raise SourceError(f"bad operation {' '.join(op)!r}", line, col, source)


def format_model(h: Hcfp) -> str:
    out = [f"level {h.level}", "letters " + " ".join(sorted(h.alphabet))]
    for d in h.transitions:
        out.append(str(d))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- automata

_STORES = re.compile(r"stores\s*\{(?P<body>[^}]*)\}", re.S)


def parse_automaton(text: str, source: str = "<string>", level: int | None = None,
                    alphabet=()) -> FlatAutomaton:
    """Parse an automaton file into a flat automaton with its declared level.

    ``level`` (when given) must agree with the file's.
    """
    m = _STORES.search(_strip_comments(text))
    declared = None
    letters = set(alphabet)
    states, trans, finals = [], [], []
    initial = None
    rest = _strip_comments(text)
    stores = None
    if m:
        rest = rest[:m.start()] + " " * (m.end() - m.start()) + rest[m.end():]
        stores = _store_block(text, m, source)
    for line, col, stmt in _statements(rest):
        words = stmt.split()
        head = words[0]
        if head == "level" and len(words) == 2 and words[1].isdigit():
            declared = int(words[1])
        elif head == "letters":
            letters.update(words[1:])
        elif head == "states":
            states.extend(words[1:])
        elif head == "initial" and len(words) == 2:
            initial = words[1]
        elif head == "final":
            finals.extend(words[1:])
        elif head == "trans" and len(words) == 4:
            p, x, q = words[1:]
            if x == "eps":
                x = EPS
            elif x not in BRACKETS:
                if len(x) != 1:
                    raise SourceError(f"symbol {x!r} must be one character, '[', ']' or eps",
                                      line, col, source)
                letters.add(x)
            trans.append((p, x, q))
        else:
            raise SourceError(f"cannot read statement {stmt!r}", line, col, source)
    if stores is not None:
        if trans or states or initial is not None or finals:
            raise SourceError("a stores block cannot be mixed with explicit states", 1, 1, source)
        levels = {store_level(s) for s in stores}
        n = declared if declared is not None else (levels.pop() if len(levels) == 1 else level)
        if n is None and len(levels) > 1:
            raise LevelMismatch(f"{source}: stores of mixed levels {sorted(levels)}")
        if n is None:
            raise SourceError("cannot infer the level of an empty stores block; add 'level N'",
                              1, 1, source)
        bad = [encode(s) for s in stores if store_level(s) != n]
        if bad:
            raise LevelMismatch(f"{source}: stores {bad} are not of level {n}")
        for s in stores:
            letters.update(ch for ch in encode(s) if ch not in BRACKETS)
        A = F.from_words(sorted({encode(s) for s in stores}), letters, n)
    else:
        if initial is None:
            raise SourceError("missing 'initial' statement", 1, 1, source)
        known = set(states) | {initial} | set(finals) | {t[0] for t in trans} | {t[2] for t in trans}
        if states:
            unknown = sorted(known - set(states))
            if unknown:
                raise SourceError(f"undeclared states {unknown}", 1, 1, source)
        A = FlatAutomaton(known, letters, trans, initial, finals, declared)
    if level is not None and A.level is not None and A.level != level:
        raise LevelMismatch(f"{source}: automaton of level {A.level}, expected level {level}")
    if A.level is None:
        A = A.with_level(level)
    if A.level is not None and not F.validate_store_language(A, A.level):
        raise LevelMismatch(f"{source}: automaton accepts words that are not {A.level}-stores")
    return A


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def _store_block(text, m, source):
    body = m.group("body")
    offset = m.start("body")
    stores, depth, start = [], 0, 0
    for j, ch in enumerate(body):
        if ch == "[":
            if depth == 0:
                start = j
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise _located("unbalanced ']'", text, offset + j, source)
            if depth == 0:
                try:
                    stores.append(parse_store(body[start:j + 1]))
                except ParseError as e:
                    raise _located(str(e), text, offset + start, source) from None
        elif depth == 0 and not ch.isspace():
            raise _located(f"unexpected {ch!r} in stores block", text, offset + j, source)
    if depth:
        raise _located("unterminated store", text, offset + start, source)
    return stores


def _located(msg, text, pos, source):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return SourceError(msg, line, col, source)


def format_automaton(A: FlatAutomaton | NestedAutomaton) -> str:
    """Canonical text: the minimal DFA, states q0.. in breadth-first order.

    Identical languages give byte-identical output.
    """
    if isinstance(A, NestedAutomaton):
        level = A.level
        A = N.flatten(A)
    else:
        level = A.level
    M = F.minimize(A)
    out = []
    if level is not None:
        out.append(f"level {level}")
    out.append("letters " + " ".join(sorted(M.alphabet)))
    states = sorted(M.states)
    out.append("states " + " ".join(f"q{p}" for p in states))
    out.append(f"initial q{M.initial}")
    out.append("final " + " ".join(f"q{p}" for p in sorted(M.finals)))
    order = {"[": 0, "]": 1}
    for p, x, q in sorted(M.transitions, key=lambda t: (t[0], order.get(t[1], 2), t[1], t[2])):
        out.append(f"trans q{p} {x} q{q}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- DOT

def to_dot(A: FlatAutomaton | NestedAutomaton, name: str = "A") -> str:
    """Graphviz source; nested labels appear as interned ids with a legend."""
    if isinstance(A, FlatAutomaton):
        return _flat_dot(A, name)
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  node [shape=circle];',
             f'  __start [shape=point]; __start -> "{A.initial}";']
    for f in sorted(A.finals):
        lines.append(f'  "{f}" [shape=doublecircle];')
    for p, lab, q, ob in A.transitions:
        text = lab if A.level == 1 else f"#{lab}"
        if ob:
            text += " " + str(sorted(ob))
        lines.append(f'  "{p}" -> "{q}" [label="{_esc(text)}"];')
    if A.level > 1:
        rows = []
        for B in N.reachable_automata(A)[1:]:
            rows.append(f"#{B.uid}: level {B.level}, {len(B.states)} states, "
                        f"{len(B.transitions)} transitions, labels "
                        + " ".join(f"#{u}" if B.level > 1 else str(u) for u in sorted(
                            {t[1] for t in B.transitions}, key=str)))
        lines.append(f'  legend [shape=note, label="{_esc(chr(10).join(rows))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _flat_dot(A: FlatAutomaton, name: str) -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  node [shape=circle];',
             f'  __start [shape=point]; __start -> "{A.initial}";']
    for f in sorted(A.finals, key=repr):
        lines.append(f'  "{f}" [shape=doublecircle];')
    for p, x, q in sorted(A.transitions, key=repr):
        lines.append(f'  "{p}" -> "{q}" [label="{_esc("eps" if x is EPS else x)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\l")


# ---------------------------------------------------------------- formulas

def parse_formula_text(text: str, atoms=None, source: str = "<string>") -> Formula:
    body = _strip_comments(text)
    try:
        return parse_formula(body, atoms)
    except SourceError:
        raise
    except ParseError as e:
        if e.position is None:
            raise
        msg = str(e).rsplit(" (at position", 1)[0]
        raise _located(msg, body, e.position, source) from None


# ---------------------------------------------------------------- files

def load_model(path) -> Hcfp:
    return parse_model(Path(path).read_text(encoding="utf-8"), str(path))


def load_automaton(path, level: int | None = None, alphabet=()) -> FlatAutomaton:
    return parse_automaton(Path(path).read_text(encoding="utf-8"), str(path), level, alphabet)


def load_formula(path, atoms=None) -> Formula:
    return parse_formula_text(Path(path).read_text(encoding="utf-8"), atoms, str(path))


def save_automaton(path, A) -> None:
    Path(path).write_text(format_automaton(A), encoding="utf-8")
