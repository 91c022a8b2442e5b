"""E(U,X) formulas over regular store predicates and their symbolic evaluation.

Every sub-formula is evaluated to a regular set of stores, kept as a minimal
flat DFA over encodings (booleans are cheap there) and inflated to a nested
automaton whenever a saturation needs one.

    [[EX f]]    = pre([[f]])
    [[EF f]]    = pre*([[f]])
    [[E f U g]] = [[g]] | pre*_C([[f]] & pre([[g]])) with C = [[f]]

Saturation may stop on its budget; the sub-result is then an
under-approximation. Positive contexts keep it sound, so evaluation carries
on and finally raises BudgetExhausted with the partial answer attached.
Complementing a partial sub-result raises PartialResultNegation instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import flat as F
from . import nested as N
from .constrained import prestar_constrained, to_flat
from .errors import BudgetExhausted, LevelMismatch, ParseError, PartialResultNegation
from .flat import FlatAutomaton
from .model import Hcfp
from .nested import NestedAutomaton
from .saturation import SaturationConfig, pre, prestar
from .store import Store, encode, level as store_level, parse as parse_store


# ---------------------------------------------------------------- syntax

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Atom(Formula):
    """A named predicate; ``stores`` is set for inline literals like ``{ [a] [aa] }``."""

    name: str
    stores: tuple | None = None

    def __str__(self):
        if self.stores is not None:
            return "{ " + " ".join(encode(s) for s in self.stores) + " }"
        return f"atom {self.name}"


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula

    def __str__(self):
        return f"!{_wrap(self.sub)}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


@dataclass(frozen=True)
class EX(Formula):
    sub: Formula

    def __str__(self):
        return f"EX {_wrap(self.sub)}"


@dataclass(frozen=True)
class EF(Formula):
    sub: Formula

    def __str__(self):
        return f"EF {_wrap(self.sub)}"


@dataclass(frozen=True)
class EU(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"E {_wrap(self.left)} U {_wrap(self.right)}"


def _wrap(f: Formula) -> str:
    return str(f) if isinstance(f, (TrueF, Atom)) else f"({f})"


def atoms_of(f: Formula) -> set:
    if isinstance(f, Atom):
        return {f}
    if isinstance(f, TrueF):
        return set()
    parts = [getattr(f, a) for a in ("sub", "left", "right") if hasattr(f, a)]
    return set().union(*(atoms_of(p) for p in parts))


_TOKEN = re.compile(r"\s*(?:(?P<brace>\{[^}]*\})|(?P<sym>[!&|()])|(?P<word>[A-Za-z_][A-Za-z0-9_.-]*))")


def _tokenize(text: str) -> list:
    out, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, known: Iterable[str] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.known = None if known is None else set(known)

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def formula(self):
        f = self.disj()
        return f

    def disj(self):
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, val, pos = self.peek()
        if val == "!":
            self.take()
            return Not(self.unary())
        if val == "EX":
            self.take()
            return EX(self.unary())
        if val == "EF":
            self.take()
            return EF(self.unary())
        if val == "E":
            self.take()
            left = self.disj()
            self.take("U")
            return EU(left, self.unary())
        if val == "(":
            self.take()
            f = self.disj()
            self.take(")")
            return f
        if val == "true":
            self.take()
            return TrueF()
        if val == "atom":
            self.take()
            kind, name, npos = self.take()
            if kind != "word":
                raise ParseError("expected an atom name", npos)
            if self.known is not None and name not in self.known:
                raise ParseError(f"unknown atom {name!r}", npos)
            return Atom(name)
        if kind == "brace":
            self.take()
            return _literal(val, pos)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def _literal(text: str, pos: int) -> Atom:
    body = text[1:-1]
    stores, depth, start = [], 0, None
    for j, ch in enumerate(body):
        if ch == "[":
            if depth == 0:
                start = j
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ']' in store literal", pos + j + 1)
            if depth == 0:
                stores.append(parse_store(body[start:j + 1]))
        elif depth == 0 and not ch.isspace():
            raise ParseError(f"unexpected {ch!r} in store literal", pos + j + 1)
    if depth:
        raise ParseError("unterminated store in literal", pos)
    stores = tuple(sorted(set(stores), key=lambda s: (len(encode(s)), encode(s))))
    return Atom("{" + " ".join(encode(s) for s in stores) + "}", stores)


def parse_formula(text: str, atoms: Iterable[str] | None = None) -> Formula:
    """Parse the textual syntax; with ``atoms`` given, unknown names are errors."""
    p = _Parser(text, atoms)
    f = p.formula()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r} after formula", pos)
    return f


# ---------------------------------------------------------------- semantics

@dataclass
class SatResult:
    """``flat`` is a minimal DFA for the store set; ``exact`` is False when
    some saturation below stopped on its budget (then the set is a subset)."""

    flat: FlatAutomaton
    exact: bool
    level: int
    _nested: NestedAutomaton | None = field(default=None, repr=False)

    @property
    def automaton(self) -> NestedAutomaton:
        if self._nested is None:
            self._nested = _to_nested(self.flat, self.level)
        return self._nested


def _to_nested(B: FlatAutomaton, n: int) -> NestedAutomaton:
    if F.is_empty(B):
        return N.empty_nested(B.alphabet, n)
    return N.inflate(B, n, B.alphabet)


def atom_flat(value, alphabet, n: int) -> FlatAutomaton:
    """Accept a flat automaton, a nested automaton or a collection of stores."""
    if isinstance(value, NestedAutomaton):
        if value.level != n:
            raise LevelMismatch(f"atom of level {value.level} for a level-{n} model")
        B = N.flatten(value)
    elif isinstance(value, FlatAutomaton):
        if value.level is not None and value.level != n:
            raise LevelMismatch(f"atom of level {value.level} for a level-{n} model")
        B = value
    else:
        stores = list(value)
        for s in stores:
            if store_level(s) != n:
                raise LevelMismatch(f"store {encode(s)} is not of level {n}")
        B = F.from_words((encode(s) for s in stores), alphabet, n)
    B = FlatAutomaton(B.states, B.alphabet | frozenset(alphabet), B.transitions, B.initial, B.finals, n)
    return F.intersect(B, F.universe_flat(B.alphabet, n))


class Checker:
    """Evaluates formulas for one model and atom environment, caching sub-results."""

    def __init__(self, h: Hcfp, atoms: Mapping | None = None, cfg: SaturationConfig | None = None):
        self.h = h
        self.cfg = cfg or SaturationConfig()
        self.alphabet = frozenset(h.alphabet)
        self.atoms = {}
        for name, value in (atoms or {}).items():
            self.atoms[name] = atom_flat(value, self.alphabet, h.level)
        self.alphabet = self.alphabet.union(*(A.alphabet for A in self.atoms.values()))
        self.reports: list = []
        self._cache: dict = {}

    def _norm(self, B: FlatAutomaton) -> FlatAutomaton:
        B = FlatAutomaton(B.states, B.alphabet | self.alphabet, B.transitions, B.initial, B.finals,
                          self.h.level)
        return F.minimize(B).with_level(self.h.level)

    def _result(self, B, exact) -> SatResult:
        return SatResult(self._norm(B), exact, self.h.level)

    def evaluate(self, f: Formula) -> SatResult:
        r = self._cache.get(f)
        if r is None:
            r = self._cache[f] = self._eval(f)
        return r

    def _eval(self, f: Formula) -> SatResult:
        n, G = self.h.level, self.alphabet
        if isinstance(f, TrueF):
            return self._result(F.universe_flat(G, n), True)
        if isinstance(f, Atom):
            if f.stores is not None:
                return self._result(atom_flat(f.stores, G, n), True)
            if f.name not in self.atoms:
                raise ParseError(f"unknown atom {f.name!r}")
            return self._result(self.atoms[f.name], True)
        if isinstance(f, Not):
            sub = self.evaluate(f.sub)
            if not sub.exact:
                raise PartialResultNegation(
                    f"cannot negate {f.sub}: its value is an under-approximation")
            return self._result(F.complement_within(sub.flat, n, G), True)
        if isinstance(f, (And, Or)):
            a, b = self.evaluate(f.left), self.evaluate(f.right)
            op = F.intersect if isinstance(f, And) else F.union
            return self._result(op(a.flat, b.flat), a.exact and b.exact)
        if isinstance(f, EX):
            sub = self.evaluate(f.sub)
            return self._result(N.flatten(pre(self.h, sub.automaton)), sub.exact)
        if isinstance(f, EF):
            sub = self.evaluate(f.sub)
            R, exact = self._prestar(sub.automaton)
            return self._result(N.flatten(R), sub.exact and exact)
        if isinstance(f, EU):
            a, b = self.evaluate(f.left), self.evaluate(f.right)
            pre_b = N.flatten(pre(self.h, b.automaton))
            target = self._result(F.intersect(a.flat, pre_b), True)
            R, exact = self._prestar_constrained(target.automaton, a.flat)
            return self._result(F.union(b.flat, R), a.exact and b.exact and exact)
        raise TypeError(f"not a formula: {f!r}")

    def _prestar(self, A):
        try:
            R, rep = prestar(self.h, A, self.cfg)
        except BudgetExhausted as e:
            self.reports.append(e.report)
            return e.partial, False
        self.reports.append(rep)
        return R, True

    def _prestar_constrained(self, A, C):
        try:
            R, rep = prestar_constrained(self.h, A, C, self.cfg)
            exact = True
        except BudgetExhausted as e:
            R, rep, exact = e.partial, e.report, False
        self.reports.append(rep)
        return to_flat(R), exact

    def sat(self, f: Formula) -> NestedAutomaton:
        r = self.evaluate(f)
        if not r.exact:
            raise BudgetExhausted("a saturation stopped on its budget; the answer is partial",
                                  partial=r.automaton, report=self.reports[-1] if self.reports else None)
        return r.automaton

    def check(self, f: Formula, s: Store) -> bool:
        if store_level(s) != self.h.level:
            raise LevelMismatch(f"store of level {store_level(s)} for a level-{self.h.level} model")
        r = self.evaluate(f)
        if F.member(r.flat, encode(s)):
            return True
        if not r.exact:
            raise BudgetExhausted("store rejected by a partial answer; the verdict is unknown",
                                  partial=r.automaton, report=self.reports[-1] if self.reports else None)
        return False


def sat(h: Hcfp, f: Formula, atoms: Mapping | None = None,
        cfg: SaturationConfig | None = None) -> NestedAutomaton:
    """Nested automaton for the stores satisfying f."""
    return Checker(h, atoms, cfg).sat(f)


def check(h: Hcfp, f: Formula, s: Store, atoms: Mapping | None = None,
          cfg: SaturationConfig | None = None) -> bool:
    return Checker(h, atoms, cfg).check(f, s)
