"""Nested store automata with hash-consed labels.

A level-k automaton reads a k-store component by component. At level 1 the
transition labels are letters; above that they are level k-1 automata,
referenced by their intern id. Structurally equal automata share one id,
which is what makes structural fixpoint detection in saturation possible.

Transitions are 4-tuples ``(p, label, q, obligations)``. ``obligations`` is
a frozenset that stays empty for ordinary automata; constrained automata use
it to attach constraint-automaton obligations (see :mod:`hcfp.constrained`).
States are small integers.
"""

from __future__ import annotations

import threading
from collections import deque
from itertools import product as cartesian
from typing import Iterable

from .errors import LevelMismatch, ResourceExceeded
from .flat import BRACKETS, FlatAutomaton, _renumber_map, assign_levels, renumber as flat_renumber
from .store import CLOSE, OPEN, Store, level as store_level

NO_OBS: frozenset = frozenset()


class NestedAutomaton:
    __slots__ = ("uid", "level", "alphabet", "ctx", "states", "transitions",
                 "initial", "finals", "_out", "_key")

    def __init__(self, uid, key):
        level, alphabet, ctx, states, transitions, initial, finals = key
        self.uid = uid
        self.level = level
        self.alphabet = alphabet
        self.ctx = ctx
        self.states = states
        self.transitions = tuple(sorted(transitions, key=_trans_key))
        self.initial = initial
        self.finals = finals
        self._out = None
        self._key = key

    def out(self) -> dict:
        """state -> list of (label, target, obligations), in sorted order."""
        if self._out is None:
            out: dict = {p: [] for p in self.states}
            for p, lab, q, ob in self.transitions:
                out[p].append((lab, q, ob))
            self._out = out
        return self._out

    def label(self, lab) -> "NestedAutomaton | str":
        return lab if self.level == 1 else TABLE.get(lab)

    def labels(self) -> list:
        if self.level == 1:
            return []
        return [TABLE.get(u) for u in sorted({t[1] for t in self.transitions})]

    @property
    def constrained(self) -> bool:
        return self.ctx is not None

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return self.uid

    def __repr__(self):
        return (f"NestedAutomaton#{self.uid}(level={self.level}, states={len(self.states)}, "
                f"transitions={len(self.transitions)})")


def _ob_key(ob):
    return tuple(sorted(ob))


def _trans_key(t):
    return (t[0], t[1], t[2], _ob_key(t[3]))


class InternTable:
    """Insert-if-absent table from structural descriptions to automata."""

    def __init__(self):
        self._lock = threading.Lock()
        self._by_key: dict = {}
        self._by_uid: list = []
        self.hooks: list = []

    def intern(self, level, alphabet, states, transitions, initial, finals, ctx=None):
        key = (level, frozenset(alphabet), ctx, frozenset(states),
               frozenset(transitions), initial, frozenset(finals))
        found = self._by_key.get(key)
        if found is not None:
            return found
        with self._lock:
            found = self._by_key.get(key)
            if found is not None:
                return found
            for hook in self.hooks:
                hook(key)
            A = NestedAutomaton(len(self._by_uid), key)
            self._by_uid.append(A)
            self._by_key[key] = A
            return A

    def get(self, uid) -> NestedAutomaton:
        return self._by_uid[uid]

    def __len__(self):
        return len(self._by_uid)


TABLE = InternTable()


def make(level, alphabet, states, transitions, initial, finals, ctx=None) -> NestedAutomaton:
    """Intern an automaton; transitions may be 3-tuples (no obligations).

    The constraint marker is kept only when some transition, here or in a
    label, carries obligations; otherwise it is inherited from labels or None.
    """
    trans = [t if len(t) == 4 else (t[0], t[1], t[2], NO_OBS) for t in transitions]
    inherited = None
    if level > 1:
        get = TABLE.get
        for t in trans:
            c = get(t[1]).ctx
            if c is not None:
                inherited = c
                break
    if any(t[3] for t in trans):
        if ctx is None:
            ctx = inherited
        if ctx is None:
            raise ValueError("obligations without a constraint")
    else:
        ctx = inherited
    return TABLE.intern(level, alphabet, states, trans, initial, finals, ctx)


def _ctx_of(automata) -> object:
    ctx = None
    for A in automata:
        if A.ctx is not None:
            if ctx is not None and ctx != A.ctx:
                raise ValueError("automata constrained by different constraint automata")
            ctx = A.ctx
    return ctx


# ---------------------------------------------------------------- base automata

_cache_atom: dict = {}
_cache_universe: dict = {}


def universe_nested(alphabet: Iterable[str], n: int) -> NestedAutomaton:
    alphabet = frozenset(alphabet)
    key = (alphabet, n)
    if key not in _cache_universe:
        if n == 1:
            trans = [(0, a, 1) for a in alphabet] + [(1, a, 1) for a in alphabet]
            A = make(1, alphabet, {0, 1}, trans, 0, {0, 1})
        else:
            U = universe_nested(alphabet, n - 1).uid
            A = make(n, alphabet, {0, 1}, [(0, U, 1), (1, U, 1)], 0, {1})
        _cache_universe[key] = A
    return _cache_universe[key]


def atom_automaton(a: str, k: int, alphabet: Iterable[str]) -> NestedAutomaton:
    """The k-stores whose top letter is ``a``."""
    alphabet = frozenset(alphabet)
    key = (a, k, alphabet)
    if key not in _cache_atom:
        if k == 1:
            trans = [(0, a, 1)] + [(1, x, 1) for x in alphabet]
            A = make(1, alphabet, {0, 1}, trans, 0, {1})
        else:
            first = atom_automaton(a, k - 1, alphabet).uid
            rest = universe_nested(alphabet, k - 1).uid
            A = make(k, alphabet, {0, 1}, [(0, first, 1), (1, rest, 1)], 0, {1})
        _cache_atom[key] = A
    return _cache_atom[key]


def empty_nested(alphabet: Iterable[str], n: int) -> NestedAutomaton:
    return make(n, alphabet, {0}, (), 0, ())


def from_store_set(stores: Iterable[Store], alphabet: Iterable[str], n: int | None = None) -> NestedAutomaton:
    """A trie automaton accepting exactly the given stores."""
    stores = list(stores)
    alphabet = frozenset(alphabet)
    if n is None:
        if not stores:
            raise ValueError("level needed for an empty store set")
        n = store_level(stores[0])
    for s in stores:
        if store_level(s) != n:
            raise LevelMismatch("stores of different levels in one set")
    child: dict = {}
    trans, finals = [], set()
    for s in stores:
        p = 0
        for c in s:
            lab = c if n == 1 else from_store_set([c], alphabet, n - 1).uid
            q = child.get((p, lab))
            if q is None:
                q = child[(p, lab)] = len(child) + 1
                trans.append((p, lab, q))
            p = q
        finals.add(p)
    return make(n, alphabet, range(len(child) + 1), trans, 0, finals)


# ---------------------------------------------------------------- membership / emptiness

_member_memo: dict = {}
_MEMO_LIMIT = 2_000_000


def member(A: NestedAutomaton, s: Store) -> bool:
    """Membership in the language read by A, ignoring any obligations."""
    if store_level(s) != A.level:
        return False
    if len(_member_memo) > _MEMO_LIMIT:
        _member_memo.clear()
    return _member(A, s)


def _member(A: NestedAutomaton, s) -> bool:
    key = (A.uid, s)
    r = _member_memo.get(key)
    if r is not None:
        return r
    out = A.out()
    cur = {A.initial}
    if A.level == 1:
        for ch in s:
            cur = {q for p in cur for (lab, q, _) in out[p] if lab == ch}
            if not cur:
                break
    else:
        get = TABLE.get
        for c in s:
            nxt = set()
            for p in cur:
                for lab, q, _ in out[p]:
                    if q not in nxt and _member(get(lab), c):
                        nxt.add(q)
            cur = nxt
            if not cur:
                break
    r = not cur.isdisjoint(A.finals)
    _member_memo[key] = r
    return r


_empty_memo: dict = {}


def is_empty(A: NestedAutomaton) -> bool:
    """Emptiness of the underlying language (obligations ignored)."""
    r = _empty_memo.get(A.uid)
    if r is None:
        r = _is_empty(A)
        _empty_memo[A.uid] = r
    return r


def _is_empty(A):
    out = A.out()
    if A.level == 1 and A.initial in A.finals:
        return False
    seen = set()
    todo = [A.initial]
    while todo:
        p = todo.pop()
        for lab, q, _ in out[p]:
            if A.level > 1 and is_empty(TABLE.get(lab)):
                continue
            if q in A.finals:
                return False
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return True


# ---------------------------------------------------------------- structural helpers

def trim(A: NestedAutomaton) -> NestedAutomaton:
    """Drop empty-label transitions and useless states, then renumber."""
    out = A.out()
    live = [(p, lab, q, ob) for p, lab, q, ob in A.transitions
            if A.level == 1 or not is_empty(TABLE.get(lab))]
    fwd = {A.initial}
    todo = [A.initial]
    adj: dict = {}
    back: dict = {}
    for p, _, q, _ in live:
        adj.setdefault(p, []).append(q)
        back.setdefault(q, []).append(p)
    while todo:
        p = todo.pop()
        for q in adj.get(p, ()):
            if q not in fwd:
                fwd.add(q)
                todo.append(q)
    bwd = set(A.finals)
    todo = list(bwd)
    while todo:
        q = todo.pop()
        for p in back.get(q, ()):
            if p not in bwd:
                bwd.add(p)
                todo.append(p)
    keep = (fwd & bwd) | {A.initial}
    trans = [t for t in live if t[0] in keep and t[2] in keep]
    return renumber(A.level, A.alphabet, keep, trans, A.initial, A.finals & keep, A.ctx)


def renumber(level, alphabet, states, transitions, initial, finals, ctx=None) -> NestedAutomaton:
    """Intern after renaming states 0.. in breadth-first order from the initial state."""
    adj: dict = {}
    for t in transitions:
        adj.setdefault(t[0], []).append(t)
    order = {initial: 0}
    todo = deque([initial])
    while todo:
        p = todo.popleft()
        for t in sorted(adj.get(p, ()), key=lambda t: (t[1], _ob_key(t[3]) if len(t) > 3 else ())):
            if t[2] not in order:
                order[t[2]] = len(order)
                todo.append(t[2])
    trans = [(order[t[0]], t[1], order[t[2]], t[3] if len(t) > 3 else NO_OBS)
             for t in transitions if t[0] in order]
    return make(level, alphabet, range(len(order)), trans, 0,
                [order[f] for f in finals if f in order], ctx)


_norm_cache: dict = {}


def normalize_initial(A: NestedAutomaton) -> NestedAutomaton:
    """Equivalent automaton (labels included, recursively) whose initial state has no incoming transition."""
    r = _norm_cache.get(A.uid)
    if r is not None:
        return r
    if A.level == 1:
        trans = list(A.transitions)
    else:
        trans = [(p, normalize_initial(TABLE.get(lab)).uid, q, ob) for p, lab, q, ob in A.transitions]
    i = A.initial
    if any(t[2] == i for t in trans):
        fresh = max(A.states) + 1
        trans += [(fresh, lab, q, ob) for p, lab, q, ob in trans if p == i]
        finals = set(A.finals) | ({fresh} if i in A.finals else set())
        r = trim(make(A.level, A.alphabet, set(A.states) | {fresh}, trans, fresh, finals, A.ctx))
    else:
        r = make(A.level, A.alphabet, A.states, trans, i, A.finals, A.ctx)
    _norm_cache[A.uid] = r
    _norm_cache[r.uid] = r
    return r


def is_normalized(A: NestedAutomaton) -> bool:
    return not any(t[2] == A.initial for t in A.transitions)


def union(A: NestedAutomaton, B: NestedAutomaton) -> NestedAutomaton:
    """Disjoint union with a fresh, non-reentrant initial state."""
    if A.level != B.level:
        raise LevelMismatch("union of automata of different levels")
    ctx = _ctx_of([A, B])
    offA, offB = 1, 1 + max(A.states) + 1
    trans = [(p + offA, lab, q + offA, ob) for p, lab, q, ob in A.transitions]
    trans += [(p + offB, lab, q + offB, ob) for p, lab, q, ob in B.transitions]
    trans += [(0, lab, q + offA, ob) for p, lab, q, ob in A.transitions if p == A.initial]
    trans += [(0, lab, q + offB, ob) for p, lab, q, ob in B.transitions if p == B.initial]
    finals = {f + offA for f in A.finals} | {f + offB for f in B.finals}
    if A.initial in A.finals or B.initial in B.finals:
        finals.add(0)
    states = {0} | {p + offA for p in A.states} | {p + offB for p in B.states}
    return trim(make(A.level, A.alphabet | B.alphabet, states, trans, 0, finals, ctx))


def union_all(automata: list, alphabet, n) -> NestedAutomaton:
    result = empty_nested(alphabet, n)
    for A in automata:
        result = union(result, A)
    return result


def reachable_automata(A: NestedAutomaton) -> list:
    """A and every automaton reachable through labels, each once."""
    seen = {A.uid: A}
    todo = [A]
    while todo:
        B = todo.pop()
        if B.level > 1:
            for lab in {t[1] for t in B.transitions}:
                if lab not in seen:
                    C = TABLE.get(lab)
                    seen[lab] = C
                    todo.append(C)
    return [seen[u] for u in sorted(seen)]


def total_transitions(A: NestedAutomaton) -> int:
    return sum(len(B.transitions) for B in reachable_automata(A))


# ---------------------------------------------------------------- products

_factors: dict = {}
_product_cache: dict = {}
PRODUCT_BUDGET = [200_000]


def factors_of(A: NestedAutomaton) -> tuple:
    return _factors.get(A.uid, (A.uid,))


def product(*automata: NestedAutomaton) -> NestedAutomaton:
    """Intersection with canonical factor sets.

    Nested products are flattened into one factor set, duplicates are removed
    and the set is sorted, so A x A is A and (A x B) x C is A x (B x C).
    """
    if not automata:
        raise ValueError("product of nothing")
    lv = automata[0].level
    if any(A.level != lv for A in automata):
        raise LevelMismatch("product of automata of different levels")
    fs = set()
    for A in automata:
        fs.update(factors_of(A))
    key = tuple(sorted(fs))
    if len(key) == 1:
        return TABLE.get(key[0])
    r = _product_cache.get(key)
    if r is None:
        r = _materialize([TABLE.get(u) for u in key])
        _product_cache[key] = r
        # a product whose obligations all vanished interns as a plain automaton;
        # its constrained factors must not be attached to it
        if r.uid not in key and r.uid not in _factors and r.ctx == _ctx_of(TABLE.get(u) for u in key):
            _factors[r.uid] = key
    return r


def _materialize(parts: list) -> NestedAutomaton:
    lv = parts[0].level
    ctx = _ctx_of(parts)
    alphabet = frozenset().union(*(A.alphabet for A in parts))
    outs = [A.out() for A in parts]
    start = tuple(A.initial for A in parts)
    index = {start: 0}
    todo = [start]
    trans = []
    budget = PRODUCT_BUDGET[0]
    while todo:
        s = todo.pop()
        choices = [outs[i][p] for i, p in enumerate(s)]
        if not all(choices):
            continue
        if lv == 1:
            groups = [{} for _ in parts]
            for g, ch in zip(groups, choices):
                for lab, q, ob in ch:
                    g.setdefault(lab, []).append((q, ob))
            common = set(groups[0]).intersection(*groups[1:])
            combos = []
            for a in sorted(common):
                for picks in cartesian(*(g[a] for g in groups)):
                    combos.append((a, picks))
        else:
            combos = []
            for picks in cartesian(*choices):
                C = product(*(TABLE.get(lab) for lab, _, _ in picks))
                if is_empty(C):
                    continue
                combos.append((C.uid, [(q, ob) for _, q, ob in picks]))
        for lab, picks in combos:
            t = tuple(q for q, _ in picks)
            ob = frozenset().union(*(o for _, o in picks))
            if t not in index:
                if len(index) >= budget:
                    raise ResourceExceeded(f"product exceeded {budget} states")
                index[t] = len(index)
                todo.append(t)
            trans.append((index[s], lab, index[t], ob))
    finals = [i for t, i in index.items() if all(q in A.finals for q, A in zip(t, parts))]
    return trim(make(lv, alphabet, range(len(index)), trans, 0, finals, ctx))


def intersect_many(automata: list) -> NestedAutomaton:
    return product(*automata)


# ---------------------------------------------------------------- obligations

def map_obligations(A: NestedAutomaton, fn, memo: dict | None = None) -> NestedAutomaton:
    """Rewrite every obligation set (recursively, through labels) with ``fn``."""
    memo = {} if memo is None else memo
    if A.ctx is None:
        return A
    r = memo.get(A.uid)
    if r is not None:
        return r
    fs = _factors.get(A.uid)
    if fs is not None:
        r = product(*(map_obligations(TABLE.get(u), fn, memo) for u in fs))
    else:
        trans = []
        for p, lab, q, ob in A.transitions:
            if A.level > 1:
                lab = map_obligations(TABLE.get(lab), fn, memo).uid
            trans.append((p, lab, q, fn(ob) if ob else ob))
        r = make(A.level, A.alphabet, A.states, trans, A.initial, A.finals, A.ctx)
    memo[A.uid] = r
    return r


def strip_obligations(A: NestedAutomaton, memo: dict | None = None) -> NestedAutomaton:
    """The underlying unconstrained automaton."""
    memo = {} if memo is None else memo
    if A.ctx is None:
        return A
    r = memo.get(A.uid)
    if r is None:
        trans = []
        for p, lab, q, ob in A.transitions:
            if A.level > 1:
                lab = strip_obligations(TABLE.get(lab), memo).uid
            trans.append((p, lab, q, NO_OBS))
        r = make(A.level, A.alphabet, A.states, trans, A.initial, A.finals, None)
        memo[A.uid] = r
    return r


# ---------------------------------------------------------------- flatten

class AltFlat:
    """Flattened form with obligations on edges: (p, symbol, q, obligations)."""

    __slots__ = ("states", "transitions", "initial", "finals", "alphabet", "level")

    def __init__(self, states, transitions, initial, finals, alphabet, level):
        self.states = states
        self.transitions = transitions
        self.initial = initial
        self.finals = finals
        self.alphabet = alphabet
        self.level = level

    def plain(self) -> FlatAutomaton:
        return FlatAutomaton(self.states, self.alphabet, {(p, x, q) for p, x, q, _ in self.transitions},
                             self.initial, self.finals, self.level)


_flatten_cache: dict = {}


def flatten(A: NestedAutomaton) -> FlatAutomaton:
    """Flat automaton for the encodings of the underlying language of A."""
    return flatten_alt(A).plain()


def _flatten_alt(A: NestedAutomaton):
    S, E = ("S",), ("E",)
    trans = []
    if A.level == 1:
        trans.append((S, OPEN, ("a", A.initial), NO_OBS))
        for p, a, q, ob in A.transitions:
            trans.append((("a", p), a, ("a", q), ob))
        for f in A.finals:
            trans.append((("a", f), CLOSE, E, NO_OBS))
        states = {S, E} | {("a", p) for p in A.states}
        return states, trans, S, {E}
    i0 = ("i0",)
    trans.append((S, OPEN, i0, NO_OBS))
    states = {S, E, i0} | {("a", p) for p in A.states}
    by_label: dict = {}
    for p, lab, q, ob in A.transitions:
        by_label.setdefault((p, lab), []).append((q, ob))
    for (p, lab), targets in by_label.items():
        F = flatten_alt(TABLE.get(lab))
        comp = lambda x: ("a", p) if x == F.initial else ("c", p, lab, x)
        for x, y, z, inner in F.transitions:
            srcs = [comp(x)]
            if x == F.initial and p == A.initial:
                srcs.append(i0)
            if z in F.finals:
                for q, ob in targets:
                    for src in srcs:
                        trans.append((src, y, ("a", q), inner | ob))
            else:
                for src in srcs:
                    trans.append((src, y, comp(z), inner))
                states.add(comp(z))
    for f in A.finals:
        trans.append((("a", f), CLOSE, E, NO_OBS))
    return states, trans, S, {E}


def _alt_from(parts, alphabet, level) -> AltFlat:
    states, trans, init, finals = parts
    adj: dict = {}
    for t in trans:
        adj.setdefault(t[0], []).append(t)
    order = {init: 0}
    todo = deque([init])
    while todo:
        p = todo.popleft()
        for t in sorted(adj.get(p, ()), key=lambda t: (t[1], repr(t[2]))):
            if t[2] not in order:
                order[t[2]] = len(order)
                todo.append(t[2])
    rt = [(order[p], x, order[q], ob) for p, x, q, ob in trans if p in order]
    return AltFlat(range(len(order)), rt, 0, {order[f] for f in finals if f in order}, alphabet, level)


def flatten_alt(A: NestedAutomaton) -> AltFlat:
    r = _flatten_cache.get(A.uid)
    if r is None:
        r = _alt_from(_flatten_alt(A), A.alphabet, A.level)
        _flatten_cache[A.uid] = r
    return r


# ---------------------------------------------------------------- inflate

_inflate_cache: dict = {}


def inflate(B: FlatAutomaton, n: int, alphabet: Iterable[str] | None = None) -> NestedAutomaton:
    """Nested automaton for the stores whose encodings B accepts."""
    alphabet = frozenset(B.alphabet if alphabet is None else alphabet) | B.alphabet
    B = B if B.alphabet == alphabet else FlatAutomaton(B.states, alphabet, B.transitions,
                                                       B.initial, B.finals, B.level)
    L, levels = assign_levels(B, n)
    return _inflate(L, levels, n)


def _inflate(B: FlatAutomaton, levels: dict, n: int) -> NestedAutomaton:
    key = (n, B.alphabet, B.initial, B.finals, B.transitions)
    r = _inflate_cache.get(key)
    if r is not None:
        return r
    out = B.out()
    inner = sorted((p for p, lv in levels.items() if lv == n - 1), key=repr)
    entry = set(out[B.initial].get(OPEN, ()))
    exits = {p for p in inner if any(q in B.finals for q in out[p].get(CLOSE, ()))}
    I, FZ = 0, len(inner) + 1
    num = {p: i + 1 for i, p in enumerate(inner)}
    trans = []
    finals = {FZ}
    if n == 1:
        for p, x, q in B.transitions:
            if x in BRACKETS or p not in num or q not in num:
                continue
            _connect(trans, num[p], x, num[q], p in entry, q in exits, I, FZ)
        if entry & exits:
            finals.add(I)
    else:
        for p, q, sub in _all_leads(B, levels, n - 1, inner):
            lab = _inflate(*sub, n - 1).uid
            _connect(trans, num[p], lab, num[q], p in entry, q in exits, I, FZ)
    r = trim(make(n, B.alphabet, range(FZ + 1), trans, I, finals))
    _inflate_cache[key] = r
    return r


def _connect(trans, p, lab, q, from_entry, to_exit, I, FZ):
    trans.append((p, lab, q))
    if from_entry:
        trans.append((I, lab, q))
    if to_exit:
        trans.append((p, lab, FZ))
    if from_entry and to_exit:
        trans.append((I, lab, FZ))


def _all_leads(B: FlatAutomaton, levels: dict, k: int, inner: list):
    """Yield (p, q, (automaton, levels)) for every pair of level-k states joined below level k."""
    out = B.out()
    back: dict = {}
    for p, x, q in B.transitions:
        back.setdefault(q, []).append((p, x))
    for p in inner:
        # forward closure below level k
        low = set()
        todo = []
        for q in out[p].get(OPEN, ()):
            if levels[q] < k and q not in low:
                low.add(q)
                todo.append(q)
        while todo:
            r = todo.pop()
            for x, qs in out[r].items():
                for q in qs:
                    if levels[q] < k and q not in low:
                        low.add(q)
                        todo.append(q)
        targets = {q for r in low for q in out[r].get(CLOSE, ()) if levels[q] == k}
        for q in sorted(targets, key=repr):
            # states of the closure that can still reach q
            co = {r for r, x in back[q] if x == CLOSE and r in low}
            todo = list(co)
            while todo:
                r = todo.pop()
                for s, _ in back.get(r, ()):
                    if s in low and s not in co:
                        co.add(s)
                        todo.append(s)
            src, dst = ("in",), ("out",)
            trans = []
            for x in (OPEN,):
                for r in out[p].get(x, ()):
                    if r in co:
                        trans.append((src, x, r))
            for r in co:
                for x, qs in out[r].items():
                    for s in qs:
                        if s in co:
                            trans.append((r, x, s))
                        if s == q and x == CLOSE:
                            trans.append((r, x, dst))
            sub = FlatAutomaton(co | {src, dst}, B.alphabet, trans, src, [dst], k)
            mapping = _renumber_map(sub)
            lv = {mapping[s]: (k if s in (src, dst) else levels[s]) for s in sub.states if s in mapping}
            yield p, q, (flat_renumber(sub), lv)
