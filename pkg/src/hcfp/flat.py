"""Finite automata over letters plus the two bracket symbols.

These recognise bracketed encodings of stores and carry all the boolean
algebra (union, product, complement relative to the n-stores), bracket-depth
levelling, and extraction of the sub-automaton between two states of one
level.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .errors import LevelingFailed, ResourceExceeded
from .store import CLOSE, OPEN

EPS = None
BRACKETS = (OPEN, CLOSE)
DEFAULT_DETERMINIZE_BUDGET = 100_000


class FlatAutomaton:
    """An NFA whose symbols are letters, ``[`` and ``]`` (``None`` is epsilon).

    ``level`` is the declared store level, if any. Instances are treated as
    immutable once built.
    """

    __slots__ = ("states", "alphabet", "transitions", "initial", "finals", "level", "_out")

    def __init__(self, states, alphabet, transitions, initial, finals, level=None):
        self.states = frozenset(states)
        self.alphabet = frozenset(alphabet)
        self.transitions = frozenset(transitions)
        self.initial = initial
        self.finals = frozenset(finals)
        self.level = level
        self._out = None
        if initial not in self.states:
            raise ValueError("initial state is not a state")
        if not self.finals <= self.states:
            raise ValueError("final states must be states")
        for p, x, q in self.transitions:
            if p not in self.states or q not in self.states:
                raise ValueError(f"transition {p!r} -{x}-> {q!r} uses unknown states")
            if x is not EPS and x not in BRACKETS and x not in self.alphabet:
                raise ValueError(f"symbol {x!r} not in the alphabet")

    @property
    def symbols(self) -> list:
        return sorted(self.alphabet) + list(BRACKETS)

    def out(self) -> dict:
        """state -> symbol -> set of successors (cached)."""
        if self._out is None:
            out: dict = {p: {} for p in self.states}
            for p, x, q in self.transitions:
                out[p].setdefault(x, set()).add(q)
            self._out = out
        return self._out

    def successors(self, p, x) -> set:
        return self.out()[p].get(x, set())

    def has_epsilon(self) -> bool:
        return any(x is EPS for _, x, _ in self.transitions)

    def is_deterministic(self) -> bool:
        if self.has_epsilon():
            return False
        seen = set()
        for p, x, _ in self.transitions:
            if (p, x) in seen:
                return False
            seen.add((p, x))
        return True

    def with_finals(self, finals) -> "FlatAutomaton":
        return FlatAutomaton(self.states, self.alphabet, self.transitions, self.initial, finals, self.level)

    def with_level(self, level) -> "FlatAutomaton":
        return FlatAutomaton(self.states, self.alphabet, self.transitions, self.initial, self.finals, level)

    def __repr__(self) -> str:
        return (f"FlatAutomaton(level={self.level}, states={len(self.states)}, "
                f"transitions={len(self.transitions)})")


# ---------------------------------------------------------------- basics

def empty_flat(alphabet: Iterable[str], level=None) -> FlatAutomaton:
    return FlatAutomaton({0}, alphabet, (), 0, (), level)


def from_words(words: Iterable[str], alphabet: Iterable[str], level=None) -> FlatAutomaton:
    """A trie accepting exactly the given words."""
    states, trans, finals = {0}, set(), set()
    child: dict = {}
    fresh = 1
    for w in words:
        p = 0
        for x in w:
            q = child.get((p, x))
            if q is None:
                q = child[(p, x)] = fresh
                fresh += 1
                states.add(q)
                trans.add((p, x, q))
            p = q
        finals.add(p)
    return FlatAutomaton(states, alphabet, trans, 0, finals, level)


def eps_closure(A: FlatAutomaton, start: Iterable) -> frozenset:
    out = A.out()
    seen = set(start)
    todo = list(seen)
    while todo:
        p = todo.pop()
        for q in out[p].get(EPS, ()):
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return frozenset(seen)


def eliminate_epsilon(A: FlatAutomaton) -> FlatAutomaton:
    if not A.has_epsilon():
        return A
    out = A.out()
    trans, finals = set(), set()
    for p in A.states:
        cl = eps_closure(A, [p])
        if cl & A.finals:
            finals.add(p)
        for r in cl:
            for x, qs in out[r].items():
                if x is not EPS:
                    trans.update((p, x, q) for q in qs)
    return trim(FlatAutomaton(A.states, A.alphabet, trans, A.initial, finals, A.level))


def _reachable(A: FlatAutomaton) -> set:
    out = A.out()
    seen = {A.initial}
    todo = [A.initial]
    while todo:
        p = todo.pop()
        for qs in out[p].values():
            for q in qs:
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
    return seen


def _coreachable(A: FlatAutomaton) -> set:
    back: dict = {}
    for p, _, q in A.transitions:
        back.setdefault(q, []).append(p)
    seen = set(A.finals)
    todo = list(seen)
    while todo:
        q = todo.pop()
        for p in back.get(q, ()):
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


def trim(A: FlatAutomaton) -> FlatAutomaton:
    """Keep useful states only; the initial state always survives."""
    useful = _reachable(A) & _coreachable(A)
    keep = useful | {A.initial}
    trans = [(p, x, q) for p, x, q in A.transitions if p in useful and q in useful]
    if keep == A.states and len(trans) == len(A.transitions):
        return A
    return FlatAutomaton(keep, A.alphabet, trans, A.initial, A.finals & keep, A.level)


def renumber(A: FlatAutomaton) -> FlatAutomaton:
    """Rename states to 0..k-1 in breadth-first order; unreachable states vanish."""
    out = A.out()
    order = {A.initial: 0}
    todo = deque([A.initial])
    sym_key = _sym_key
    while todo:
        p = todo.popleft()
        for x in sorted(out[p], key=sym_key):
            for q in sorted(out[p][x], key=_tie_key):
                if q not in order:
                    order[q] = len(order)
                    todo.append(q)
    trans = [(order[p], x, order[q]) for p, x, q in A.transitions if p in order]
    finals = [order[f] for f in A.finals if f in order]
    return FlatAutomaton(range(len(order)), A.alphabet, trans, 0, finals, A.level)


def _tie_key(s):
    # deterministic across processes (str hashes are salted)
    return (type(s).__name__, repr(s))


def _sym_key(x):
    return (0, "") if x is EPS else (1, x)


def single_final_normalize(A: FlatAutomaton) -> FlatAutomaton:
    """Epsilon-free, trimmed, with one final state.

    If the empty word is accepted the initial state necessarily stays final
    as well; store languages never contain it.
    """
    A = trim(eliminate_epsilon(A))
    if len(A.finals) <= 1:
        if not A.finals:
            return FlatAutomaton({A.initial}, A.alphabet, (), A.initial, (), A.level)
        return A
    f = ("final",)
    trans = set(A.transitions)
    for p, x, q in A.transitions:
        if q in A.finals:
            trans.add((p, x, f))
    finals = {f} | ({A.initial} if A.initial in A.finals else set())
    return trim(FlatAutomaton(A.states | {f}, A.alphabet, trans, A.initial, finals, A.level))


# ---------------------------------------------------------------- queries

def member(A: FlatAutomaton, word: str) -> bool:
    out = A.out()
    eps = A.has_epsilon()
    cur = eps_closure(A, [A.initial]) if eps else {A.initial}
    for x in word:
        nxt = set()
        for p in cur:
            nxt.update(out[p].get(x, ()))
        if not nxt:
            return False
        cur = eps_closure(A, nxt) if eps else nxt
    return not cur.isdisjoint(A.finals)


def is_empty(A: FlatAutomaton) -> bool:
    return _reachable(A).isdisjoint(A.finals)


def some_word(A: FlatAutomaton) -> str | None:
    """A shortest accepted word, or None (0-1 BFS: epsilon moves cost nothing)."""
    out = A.out()
    dist = {A.initial: 0}
    prev = {A.initial: None}
    done = set()
    todo = deque([A.initial])
    while todo:
        p = todo.popleft()
        if p in done:
            continue
        done.add(p)
        if p in A.finals:
            word = []
            while prev[p] is not None:
                p, x = prev[p]
                if x is not EPS:
                    word.append(x)
            return "".join(reversed(word))
        for x in sorted(out[p], key=_sym_key):
            cost = 0 if x is EPS else 1
            for q in sorted(out[p][x], key=_tie_key):
                if q not in dist or dist[p] + cost < dist[q]:
                    dist[q] = dist[p] + cost
                    prev[q] = (p, x)
                    if cost:
                        todo.append(q)
                    else:
                        todo.appendleft(q)
    return None


# ---------------------------------------------------------------- boolean algebra

def union(A: FlatAutomaton, B: FlatAutomaton) -> FlatAutomaton:
    states = {(0, p) for p in A.states} | {(1, q) for q in B.states} | {"init"}
    trans = {((0, p), x, (0, q)) for p, x, q in A.transitions}
    trans |= {((1, p), x, (1, q)) for p, x, q in B.transitions}
    trans |= {("init", EPS, (0, A.initial)), ("init", EPS, (1, B.initial))}
    finals = {(0, f) for f in A.finals} | {(1, f) for f in B.finals}
    level = A.level if A.level == B.level else None
    U = FlatAutomaton(states, A.alphabet | B.alphabet, trans, "init", finals, level)
    return renumber(eliminate_epsilon(U))


def union_all(automata: list, alphabet=(), level=None) -> FlatAutomaton:
    result = empty_flat(alphabet, level)
    for A in automata:
        result = union(result, A)
    return result


def intersect(A: FlatAutomaton, B: FlatAutomaton) -> FlatAutomaton:
    A, B = eliminate_epsilon(A), eliminate_epsilon(B)
    oa, ob = A.out(), B.out()
    start = (A.initial, B.initial)
    seen = {start}
    todo = [start]
    trans = []
    while todo:
        p, q = todo.pop()
        da, db = oa[p], ob[q]
        for x in da.keys() & db.keys():
            for p2 in da[x]:
                for q2 in db[x]:
                    t = (p2, q2)
                    trans.append(((p, q), x, t))
                    if t not in seen:
                        seen.add(t)
                        todo.append(t)
    finals = [s for s in seen if s[0] in A.finals and s[1] in B.finals]
    level = A.level if A.level is not None else B.level
    P = FlatAutomaton(seen, A.alphabet | B.alphabet, trans, start, finals, level)
    return renumber(trim(P))


def determinize(A: FlatAutomaton, budget: int = DEFAULT_DETERMINIZE_BUDGET) -> FlatAutomaton:
    """Subset construction; raises ResourceExceeded past ``budget`` subsets."""
    A = eliminate_epsilon(A)
    if A.is_deterministic():
        return A
    out = A.out()
    start = frozenset([A.initial])
    index = {start: 0}
    todo = [start]
    trans = []
    while todo:
        S = todo.pop()
        by_sym: dict = {}
        for p in S:
            for x, qs in out[p].items():
                by_sym.setdefault(x, set()).update(qs)
        for x, qs in by_sym.items():
            T = frozenset(qs)
            if T not in index:
                if len(index) >= budget:
                    raise ResourceExceeded(f"determinisation exceeded {budget} subset states")
                index[T] = len(index)
                todo.append(T)
            trans.append((index[S], x, index[T]))
    finals = [i for S, i in index.items() if not S.isdisjoint(A.finals)]
    return FlatAutomaton(range(len(index)), A.alphabet, trans, 0, finals, A.level)


def minimize(A: FlatAutomaton, budget: int = DEFAULT_DETERMINIZE_BUDGET) -> FlatAutomaton:
    """The minimal trim DFA for L(A), states numbered canonically."""
    D = trim(determinize(A, budget))
    out = D.out()
    syms = sorted({x for _, x, _ in D.transitions}, key=_sym_key)
    block = {p: int(p in D.finals) for p in D.states}
    count = len(set(block.values()))
    while True:
        sigs: dict = {}
        new = {}
        for p in sorted(D.states, key=_tie_key):
            sig = (block[p],) + tuple(
                block[next(iter(out[p][x]))] if x in out[p] else -1 for x in syms)
            new[p] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    trans = {(block[p], x, block[q]) for p, x, q in D.transitions}
    M = FlatAutomaton(set(block.values()), D.alphabet, trans, block[D.initial],
                      {block[f] for f in D.finals}, D.level)
    return renumber(M)


def complete(A: FlatAutomaton, alphabet=None) -> FlatAutomaton:
    """Add a rejecting sink so that every state has every symbol (A must be a DFA)."""
    alphabet = A.alphabet if alphabet is None else frozenset(alphabet) | A.alphabet
    syms = sorted(alphabet) + list(BRACKETS)
    out = A.out()
    sink = ("sink",)
    trans = set(A.transitions)
    used = False
    for p in A.states:
        for x in syms:
            if x not in out[p]:
                trans.add((p, x, sink))
                used = True
    if not used:
        return A
    trans.update((sink, x, sink) for x in syms)
    return FlatAutomaton(A.states | {sink}, alphabet, trans, A.initial, A.finals, A.level)


def complement_within(A: FlatAutomaton, n: int, alphabet=None,
                      budget: int = DEFAULT_DETERMINIZE_BUDGET) -> FlatAutomaton:
    """Encodings of n-stores not accepted by A."""
    alphabet = A.alphabet if alphabet is None else frozenset(alphabet) | A.alphabet
    D = complete(determinize(A, budget), alphabet)
    flipped = D.with_finals(D.states - D.finals)
    return intersect(flipped, universe_flat(alphabet, n)).with_level(n)


def difference_within(A: FlatAutomaton, B: FlatAutomaton, n: int) -> FlatAutomaton:
    return intersect(A, complement_within(B, n, A.alphabet | B.alphabet))


# ---------------------------------------------------------------- stores

def universe_flat(alphabet: Iterable[str], n: int) -> FlatAutomaton:
    """Deterministic automaton for the encodings of all n-stores."""
    if n < 1:
        raise ValueError("store level must be at least 1")
    alphabet = frozenset(alphabet)
    # states: ("s", n) before the store, ("x", k) inside a k-store before any child,
    # ("m", k) after at least one child, ("e", n) after the store
    trans = [(("s", n), OPEN, ("x", n) if n > 1 else ("m", 1))]
    for a in alphabet:
        trans.append((("m", 1), a, ("m", 1)))
    for k in range(2, n + 1):
        child_start = ("x", k - 1) if k - 1 > 1 else ("m", 1)
        for src in (("x", k), ("m", k)):
            trans.append((src, OPEN, child_start))
        trans.append((("m", k - 1), CLOSE, ("m", k)))
    trans.append((("m", n), CLOSE, ("e", n)))
    states = {("s", n), ("e", n), ("m", 1)} | {(t, k) for k in range(2, n + 1) for t in "xm"}
    return renumber(FlatAutomaton(states, alphabet, trans, ("s", n), [("e", n)], n))


def validate_store_language(A: FlatAutomaton, n: int) -> bool:
    """True iff every accepted word encodes an n-store."""
    U = complete(universe_flat(A.alphabet, n))
    outside = U.with_finals(U.states - U.finals)
    return is_empty(intersect(A, outside))


def _leveled_product(A: FlatAutomaton, n: int) -> FlatAutomaton:
    # product with a bracket-depth tracker (depth 0..n, then "done"); moves the
    # tracker forbids are dropped, which is harmless on store-valid languages
    out = A.out()
    start = (A.initial, 0)
    seen = {start}
    todo = [start]
    trans = []
    while todo:
        s = todo.pop()
        p, d = s
        for x, qs in out[p].items():
            if d == "done":
                continue
            if x == OPEN:
                nd = d + 1 if d < n else None
            elif x == CLOSE:
                nd = (d - 1 if d > 1 else "done") if d >= 1 else None
            else:
                nd = d if d == n else None
            if nd is None:
                continue
            for q in qs:
                t = (q, nd)
                trans.append((s, x, t))
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
    finals = [s for s in seen if s[0] in A.finals and s[1] == "done"]
    return trim(FlatAutomaton(seen, A.alphabet, trans, start, finals, n))


def assign_levels(A: FlatAutomaton, n: int):
    """Return an equivalent automaton whose states all have a well-defined level.

    The level of a state is n minus the bracket depth at which it is visited.
    Raises LevelingFailed when A accepts a word that is not an n-store.
    """
    A = trim(eliminate_epsilon(A))
    if is_empty(A):
        E = empty_flat(A.alphabet, n)
        return E, {0: n}
    if not validate_store_language(A, n):
        raise LevelingFailed(f"automaton accepts a word that is not a level-{n} store")
    P = _leveled_product(A, n)
    levels = {s: (n if s[1] == "done" else n - s[1]) for s in P.states}
    R = renumber(P)
    mapping = _renumber_map(P)
    return R, {mapping[s]: lv for s, lv in levels.items() if s in mapping}


def _renumber_map(A: FlatAutomaton) -> dict:
    out = A.out()
    order = {A.initial: 0}
    todo = deque([A.initial])
    while todo:
        p = todo.popleft()
        for x in sorted(out[p], key=_sym_key):
            for q in sorted(out[p][x], key=_tie_key):
                if q not in order:
                    order[q] = len(order)
                    todo.append(q)
    return order


def check_levels(A: FlatAutomaton, levels: dict) -> bool:
    """The level-definition predicate, read literally."""
    for p, x, q in A.transitions:
        lp, lq = levels[p], levels[q]
        if x == OPEN and lq != lp - 1:
            return False
        if x == CLOSE and lp != lq - 1:
            return False
        if x not in BRACKETS and (lp != 0 or lq != 0):
            return False
    return True


def leads(A: FlatAutomaton, levels: dict, p1, p2):
    """Sub-automaton of the paths from p1 to p2 whose inner states lie below their level.

    p1 and p2 get fresh copies so a path cannot pass through them midway.
    Returns None when no such path exists.
    """
    k = levels[p1]
    if levels[p2] != k:
        raise ValueError("leads needs two states of the same level")
    out = A.out()
    src, dst = ("in",), ("out",)
    trans = []
    states = {src, dst}
    seen = set()
    todo = []

    def visit(q):
        if q not in seen:
            seen.add(q)
            todo.append(q)

    for x, qs in out[p1].items():
        for q in qs:
            if q == p2 and levels[q] == k:
                continue
            if levels[q] < k:
                trans.append((src, x, q))
                visit(q)
    while todo:
        p = todo.pop()
        states.add(p)
        for x, qs in out[p].items():
            for q in qs:
                if q == p2 and x == CLOSE:
                    trans.append((p, x, dst))
                if levels[q] < k:
                    trans.append((p, x, q))
                    visit(q)
    B = FlatAutomaton(states, A.alphabet, trans, src, [dst])
    B = trim(B)
    if dst not in B.states:
        return None
    return B


def sub_levels(A: FlatAutomaton, levels: dict, B: FlatAutomaton, k: int) -> dict:
    """Level map of a ``leads`` result whose endpoints sit at level k."""
    return {s: (k if s in (("in",), ("out",)) else levels[s]) for s in B.states}


def words_upto(alphabet: Iterable[str], max_len: int, brackets: bool = True):
    """All words over the letters (and brackets) up to a length, shortest first."""
    syms = sorted(alphabet) + (list(BRACKETS) if brackets else [])
    layer = [""]
    yield ""
    for _ in range(max_len):
        layer = [w + x for w in layer for x in syms]
        yield from layer
