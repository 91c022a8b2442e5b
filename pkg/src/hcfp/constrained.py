"""Constrained nested automata and predecessor sets through a regular constraint.

A constraint is a flat automaton C over n-store encodings. It is
determinised and levelled once (``ConstraintContext``). Nested automata built
under a constraint carry *obligations* on their transitions. An obligation
``(r, J)`` says: from the position right after this transition's component,
the constraint DFA started in state ``r`` must accept the rest of the whole
word. ``J`` is a sorted tuple of jumps ``(level, f)``: the first time the
copy reaches that level its state ``s`` is replaced by ``f(s)``. Jumps
record that the component just closed stands for two copies of itself in
the successor store (push_k duplicates it), so the constraint must be run
across the missing copy.

Semantics go through an alternating flat automaton: the nondeterministic
flattening of the underlying automaton, with each obligation spawned as a
universal branch, plus one branch for the whole word from the constraint's
initial state.
"""

from __future__ import annotations

from itertools import product as cartesian
from typing import Iterable

from . import nested as N
from .errors import BudgetExhausted, LevelMismatch, ResourceExceeded
from .flat import (BRACKETS, DEFAULT_DETERMINIZE_BUDGET, FlatAutomaton, assign_levels, determinize,
                   eliminate_epsilon, minimize, renumber, trim, union as flat_union, universe_flat,
                   validate_store_language)
from .model import Hcfp
from .nested import NestedAutomaton, TABLE, flatten_alt, inflate
from .saturation import SaturationConfig, SaturationReport, prestar, transform
from .store import Store, encode, level as store_level

DEAD = -1
LANGUAGE_KEY_BUDGET = 20_000

_contexts: list = []
_context_cache: dict = {}


def context_by_id(cid: int) -> "ConstraintContext":
    return _contexts[cid]


class ConstraintContext:
    """A levelled partial DFA for the constraint plus the helpers saturation needs."""

    def __init__(self, C: FlatAutomaton, n: int, alphabet, budget: int = DEFAULT_DETERMINIZE_BUDGET):
        alphabet = frozenset(alphabet) | C.alphabet
        C = FlatAutomaton(C.states, alphabet, C.transitions, C.initial, C.finals, n)
        if not validate_store_language(C, n):
            raise LevelMismatch(f"constraint accepts words that are not level-{n} stores")
        D, levels = assign_levels(determinize(C, budget), n)
        self.B = D
        self.n = n
        self.alphabet = alphabet
        self.levels = levels
        self.init = D.initial
        self.finals = D.finals
        self.delta = {(p, x): q for p, x, q in D.transitions}
        self.by_level: dict = {}
        for s in sorted(D.states):
            self.by_level.setdefault(levels[s], []).append(s)
        self.index = {lv: {s: i for i, s in enumerate(states)} for lv, states in self.by_level.items()}
        self._trans_cache: dict = {}
        self._jump_cache: dict = {}
        self.id = len(_contexts)
        _contexts.append(self)

    @classmethod
    def of(cls, C: FlatAutomaton, n: int, alphabet) -> "ConstraintContext":
        alphabet = frozenset(alphabet) | C.alphabet
        key = (C.transitions, C.initial, C.finals, n, alphabet)
        ctx = _context_cache.get(key)
        if ctx is None:
            ctx = _context_cache[key] = cls(C, n, alphabet)
        return ctx

    # -- runs of the DFA
    def step(self, r, x):
        return self.delta.get((r, x))

    def run(self, r, word: str):
        for x in word:
            r = self.delta.get((r, x))
            if r is None:
                return None
        return r

    def prefix(self, m: int):
        """State after m opening brackets from the initial state."""
        return self.run(self.init, "[" * m)

    def accepts_from(self, r, word: str) -> bool:
        r = self.run(r, word)
        return r is not None and r in self.finals

    # -- obligations
    def step_ob(self, ob, x):
        r, J = ob
        r2 = self.delta.get((r, x))
        if r2 is None:
            return None
        if J and self.levels[r2] == J[0][0]:
            lv, f = J[0]
            r2 = f[self.index[lv][r2]]
            if r2 == DEAD:
                return None
            J = J[1:]
        return (r2, J)

    def step_obs(self, obs, x):
        out = set()
        for ob in obs:
            o2 = self.step_ob(ob, x)
            if o2 is None:
                return None
            out.add(o2)
        return frozenset(out)

    def ob_final(self, ob) -> bool:
        return ob[0] in self.finals and not ob[1]

    def apply(self, f, lv, r):
        i = self.index[lv].get(r)
        if i is None:
            return None
        v = f[i]
        return None if v == DEAD else v

    def apply_to_obs(self, f, lv, obs):
        """Run every obligation (sitting at level lv) across one more copy of the component."""
        out = set()
        for r, J in obs:
            r2 = self.apply(f, lv, r)
            if r2 is None:
                return None
            out.add((r2, J))
        return frozenset(out)

    def compose_jump(self, ob, lv, f):
        r, J = ob
        J = list(J)
        for i, (l2, g) in enumerate(J):
            if l2 == lv:
                J[i] = (lv, tuple(DEAD if x == DEAD else f[self.index[lv][x]] for x in g))
                break
        else:
            J.append((lv, f))
            J.sort()
        return (r, tuple(J))

    def with_jump(self, C: NestedAutomaton, lv: int, f) -> NestedAutomaton:
        if C.ctx is None:
            return C
        key = (C.uid, lv, f)
        r = self._jump_cache.get(key)
        if r is None:
            r = N.map_obligations(C, lambda obs: frozenset(self.compose_jump(o, lv, f) for o in obs))
            self._jump_cache[key] = r
        return r

    def transformations(self, lv: int) -> list:
        """Every realisable state transformation f of level-lv stores, with the automaton V_f.

        f maps each level-lv state of the DFA to the state reached after
        reading one lv-store encoding (DEAD when the run dies). V_f accepts
        exactly the lv-stores inducing f.
        """
        r = self._trans_cache.get(lv)
        if r is None:
            r = self._explore(lv)
            self._trans_cache[lv] = r
        return r

    def _explore(self, lv):
        dom = tuple(self.by_level.get(lv, ()))
        if not dom:
            return []
        U = universe_flat(self.alphabet, lv)
        uo = U.out()
        start = (dom, U.initial)
        seen = {start}
        todo = [start]
        trans = []
        budget = N.PRODUCT_BUDGET[0]
        while todo:
            s = todo.pop()
            tup, u = s
            for x, us in uo[u].items():
                nt = tuple(DEAD if r == DEAD else self.delta.get((r, x), DEAD) for r in tup)
                if all(r == DEAD for r in nt):
                    continue
                for u2 in us:
                    t = (nt, u2)
                    trans.append((s, x, t))
                    if t not in seen:
                        if len(seen) >= budget:
                            raise ResourceExceeded(f"constraint exploration exceeded {budget} states")
                        seen.add(t)
                        todo.append(t)
        ends: dict = {}
        for s in seen:
            if s[1] in U.finals:
                ends.setdefault(s[0], []).append(s)
        out = []
        E = FlatAutomaton(seen, self.alphabet, trans, start, (), lv)
        for f in sorted(ends):
            V = inflate(E.with_finals(ends[f]), lv, self.alphabet)
            if not N.is_empty(V):
                out.append((f, V))
        return out


# ---------------------------------------------------------------- constrained automata

class ConstrainedAutomaton:
    """A nested automaton read together with a constraint context."""

    __slots__ = ("automaton", "ctx")

    def __init__(self, automaton: NestedAutomaton, ctx: ConstraintContext):
        if automaton.ctx is not None and automaton.ctx != ctx.id:
            raise ValueError("automaton carries obligations of another constraint")
        self.automaton = automaton
        self.ctx = ctx

    @property
    def level(self) -> int:
        return self.automaton.level

    def __repr__(self):
        return f"ConstrainedAutomaton({self.automaton!r}, constraint #{self.ctx.id})"


def constrain(A: NestedAutomaton, C: FlatAutomaton) -> ConstrainedAutomaton:
    """A read under the global constraint C: language L(A) intersected with C."""
    ctx = ConstraintContext.of(C, A.level, A.alphabet)
    return ConstrainedAutomaton(A, ctx)


class AlternatingFlatAutomaton:
    """Finite-word alternating automaton with conjunctive transition targets.

    ``delta[state][symbol]`` is a list of frozensets (disjunction of
    conjunctions); ``initial`` is a conjunction.
    """

    def __init__(self, alphabet, delta: dict, initial: frozenset, finals, level=None):
        self.alphabet = frozenset(alphabet)
        self.delta = delta
        self.initial = frozenset(initial)
        self.finals = frozenset(finals)
        self.level = level
        states = set(delta) | set(self.initial) | set(self.finals)
        for row in delta.values():
            for conjs in row.values():
                for conj in conjs:
                    states |= conj
        self.states = frozenset(states)

    @property
    def symbols(self):
        return sorted(self.alphabet) + list(BRACKETS)

    def options(self, s, x) -> list:
        row = self.delta.get(s)
        return row.get(x, []) if row else []

    @classmethod
    def from_flat(cls, A: FlatAutomaton) -> "AlternatingFlatAutomaton":
        A = eliminate_epsilon(A)
        delta: dict = {}
        for p, x, q in A.transitions:
            delta.setdefault(p, {}).setdefault(x, []).append(frozenset([q]))
        return cls(A.alphabet, delta, frozenset([A.initial]), A.finals, A.level)


_alt_cache: dict = {}


def flatten_constrained(CA: ConstrainedAutomaton) -> AlternatingFlatAutomaton:
    key = (CA.automaton.uid, CA.ctx.id)
    r = _alt_cache.get(key)
    if r is not None:
        return r
    ctx = CA.ctx
    F = flatten_alt(CA.automaton)
    syms = sorted(ctx.alphabet) + list(BRACKETS)
    delta: dict = {}
    obs_seen = set()
    todo = []

    def ob_state(o):
        s = ("ob", o[0], o[1])
        if s not in obs_seen:
            obs_seen.add(s)
            todo.append(s)
        return s

    for p, x, q, O in F.transitions:
        conj = frozenset([("a", q)] + [ob_state(o) for o in O])
        delta.setdefault(("a", p), {}).setdefault(x, []).append(conj)
    initial = frozenset([("a", F.initial), ob_state((ctx.init, ()))])
    while todo:
        s = todo.pop()
        o = (s[1], s[2])
        row = {}
        for x in syms:
            o2 = ctx.step_ob(o, x)
            if o2 is not None:
                row[x] = [frozenset([ob_state(o2)])]
        delta[s] = row
    finals = {("a", f) for f in F.finals}
    finals |= {s for s in obs_seen if s[1] in ctx.finals and not s[2]}
    r = AlternatingFlatAutomaton(ctx.alphabet, delta, initial, finals, CA.level)
    _alt_cache[key] = r
    return r


def member_alternating(alt: AlternatingFlatAutomaton, word: str) -> bool:
    """Backward dynamic programming over the positions of ``word``."""
    acc = set(alt.finals)
    states = alt.states
    for x in reversed(word):
        acc = {s for s in states if any(conj <= acc for conj in alt.options(s, x))}
        if not acc:
            return False
    return alt.initial <= acc


def member_constrained(CA: ConstrainedAutomaton, s: Store) -> bool:
    if store_level(s) != CA.level:
        return False
    return member_alternating(flatten_constrained(CA), encode(s))


def remove_alternation(alt: AlternatingFlatAutomaton, budget: int = DEFAULT_DETERMINIZE_BUDGET) -> FlatAutomaton:
    """Equivalent NFA whose states are sets of alternating states."""
    start = alt.initial
    index = {start: 0}
    todo = [start]
    trans = []
    syms = alt.symbols
    while todo:
        M = todo.pop()
        members = sorted(M, key=repr)
        for x in syms:
            choices = [alt.options(s, x) for s in members]
            if not all(choices):
                continue
            targets = {frozenset().union(*combo) for combo in cartesian(*choices)}
            for T in targets:
                if T not in index:
                    if len(index) >= budget:
                        raise ResourceExceeded(f"alternation removal exceeded {budget} states")
                    index[T] = len(index)
                    todo.append(T)
                trans.append((index[M], x, index[T]))
    finals = [i for M, i in index.items() if M <= alt.finals]
    A = FlatAutomaton(range(len(index)), alt.alphabet, trans, 0, finals, alt.level)
    return renumber(trim(A))


def to_flat(CA: ConstrainedAutomaton, budget: int = DEFAULT_DETERMINIZE_BUDGET) -> FlatAutomaton:
    return remove_alternation(flatten_constrained(CA), budget)


def to_nested(CA: ConstrainedAutomaton, budget: int = DEFAULT_DETERMINIZE_BUDGET) -> NestedAutomaton:
    return inflate(to_flat(CA, budget), CA.level, CA.ctx.alphabet)


_lang_keys: dict = {}


def language_key(CA: ConstrainedAutomaton):
    """Equal keys iff equal languages; None when alternation removal is too big."""
    key = (CA.automaton.uid, CA.ctx.id)
    if key not in _lang_keys:
        try:
            M = minimize(to_flat(CA, LANGUAGE_KEY_BUDGET))
            _lang_keys[key] = (M.initial, M.transitions, M.finals)
        except ResourceExceeded:
            _lang_keys[key] = None
    return _lang_keys[key]


# ---------------------------------------------------------------- saturation

def saturate_step_constrained(CA: ConstrainedAutomaton, d) -> ConstrainedAutomaton:
    return ConstrainedAutomaton(transform(CA.automaton, d, CA.ctx), CA.ctx)


def prestar_constrained(h: Hcfp, A: NestedAutomaton, C: FlatAutomaton,
                        cfg: SaturationConfig | None = None, on_step=None):
    """Stores of C from which a run staying inside C reaches L(A) within C.

    Returns (ConstrainedAutomaton, report). On budget exhaustion the raised
    BudgetExhausted carries a sound partial ConstrainedAutomaton.
    """
    if A.level != h.level:
        raise LevelMismatch(f"automaton of level {A.level} for a level-{h.level} model")
    ctx = ConstraintContext.of(C, h.level, h.alphabet | A.alphabet)

    def unchanged(before, after):
        k = language_key(ConstrainedAutomaton(before, ctx))
        return k is not None and k == language_key(ConstrainedAutomaton(after, ctx))

    try:
        R, report = prestar(h, A, cfg, on_step=on_step, ctx=ctx, unchanged=unchanged)
    except BudgetExhausted as e:
        e.partial = ConstrainedAutomaton(e.partial, ctx)
        raise
    return ConstrainedAutomaton(R, ctx), report


def literal_prestar_constrained(h: Hcfp, A: NestedAutomaton, C: FlatAutomaton,
                                cfg: SaturationConfig | None = None):
    """Like prestar_constrained but also keeps the zero-step members of L(A) outside C."""
    R, report = prestar_constrained(h, A, C, cfg)
    flat = flat_union(N.flatten(A), to_flat(R))
    return inflate(flat, h.level, h.alphabet | A.alphabet), report
