"""One-step predecessors and saturation to the full predecessor set.

``transform(A, d)`` adds transitions leaving the initial state of A (or, for
a rule acting below A's level, rewrites the labels of the transitions leaving
the initial state) so that the language absorbs the one-step d-predecessors.
``prestar`` applies the transforms round-robin in rule order until a whole
pass leaves the automaton unchanged. Because labels are hash-consed, "unchanged"
is an identity test.

The same engine serves the constrained variant: when a constraint context is
passed, new transitions also carry obligations for the constraint automaton.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

from . import flat as F
from . import nested as N
from .errors import BudgetExhausted, LevelMismatch, ResourceExceeded
from .model import Hcfp, Transition
from .nested import NO_OBS, TABLE, NestedAutomaton, atom_automaton, is_empty, make, product
from .store import PopK, Push1, PushK


@dataclass
class SaturationConfig:
    max_passes: int = 10_000
    max_interned_labels: int = 200_000  # distinct labels used by the automata of one run
    max_total_transitions: int = 1_000_000
    max_product_states: int = 200_000

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SaturationReport:
    passes_run: int = 0
    transitions_added: int = 0
    labels_interned: int = 0
    fixpoint_reached: bool = False
    steps: int = 0
    stopped_by: str = ""

    def lines(self) -> list:
        out = [f"passes_run={self.passes_run}",
               f"transitions_added={self.transitions_added}",
               f"labels_interned={self.labels_interned}",
               f"fixpoint_reached={'true' if self.fixpoint_reached else 'false'}"]
        if self.stopped_by:
            out.append(f"stopped_by={self.stopped_by}")
        return out


class _LabelBudget(Exception):
    pass


# ---------------------------------------------------------------- the transform

_memo: dict = {}


def _ctx_id(ctx):
    return None if ctx is None else ctx.id


# uid -> uids of the automata it was obtained from by transforms; every
# ancestor's language is contained in the descendant's
_ancestors: dict = {}


def ancestors(A: NestedAutomaton) -> frozenset:
    return _ancestors.get(A.uid, frozenset())


def transform(A: NestedAutomaton, d: Transition, ctx=None) -> NestedAutomaton:
    """One saturation step for rule d; states never change.

    A step that leaves the language of an unconstrained automaton unchanged
    returns A itself, so that purely structural growth cannot keep the
    iteration going.
    """
    key = (_ctx_id(ctx), A.uid, d)
    r = _memo.get(key)
    if r is None:
        r = _transform(A, d, ctx)
        if r is not A and not r.constrained and same_language(A, r):
            r = A
        _memo[key] = r
        if r is not A:
            _ancestors[r.uid] = ancestors(r) | ancestors(A) | {A.uid}
    return r


_lang_keys: dict = {}


def language_key(A: NestedAutomaton):
    """Equal keys iff equal languages (None when determinisation is too big)."""
    if A.uid in _lang_keys:
        return _lang_keys[A.uid]
    try:
        M = F.minimize(N.flatten(A))
        key = (M.initial, frozenset(M.transitions), frozenset(M.finals))
    except ResourceExceeded:
        key = None
    _lang_keys[A.uid] = key
    return key


def same_language(A: NestedAutomaton, B: NestedAutomaton) -> bool:
    ka = language_key(A)
    return ka is not None and ka == language_key(B)


_canon: dict = {}


def canonical(L: NestedAutomaton) -> NestedAutomaton:
    """A representative of L's language that depends on the language alone.

    Used for the product labels that push_k creates; without it the label
    vocabulary can grow forever with structurally distinct copies of the same
    language. Labels carrying obligations are returned as they are.
    """
    if L.constrained:
        return L
    r = _canon.get(L.uid)
    if r is None:
        B = F.minimize(N.flatten(L))
        r = N.inflate(B, L.level, L.alphabet) if not F.is_empty(B) else N.empty_nested(L.alphabet, L.level)
        _canon[L.uid] = r
        _canon[r.uid] = r
        if r is not L:
            _ancestors[r.uid] = ancestors(r) | ancestors(L) | {L.uid}
    return r


def _transform(A, d, ctx):
    k, i = A.level, A.initial
    if d.level > k:
        raise LevelMismatch(f"rule of level {d.level} applied to a level-{k} automaton")
    if d.level < k:
        trans = []
        for p, lab, q, ob in A.transitions:
            if p == i:
                lab = transform(TABLE.get(lab), d, ctx).uid
            trans.append((p, lab, q, ob))
    else:
        trans = set(A.transitions)
        covered = set()
        if k > 1:
            for p, lab, q, ob in A.transitions:
                if p == i:
                    covered.update((old, q, ob) for old in ancestors(TABLE.get(lab)))
        for lab, q, ob in _additions(A, d, ctx):
            # a rewritten descendant of this label already sits here
            if (lab, q, ob) not in covered:
                trans.add((i, lab, q, ob))
    return make(k, A.alphabet, A.states, trans, i, A.finals, _ctx_id(ctx))


def _additions(A, d, ctx):
    """(label, target, obligations) of the transitions rule d adds at A's own level."""
    k, i, a, op = A.level, A.initial, d.guard, d.op
    out = A.out()
    if isinstance(op, Push1):
        q0 = ctx.prefix(ctx.n) if ctx is not None else None
        if ctx is not None and q0 is None:
            return
        for q1, obs in _word_paths(A, op.word, ctx):
            if ctx is not None:
                r = ctx.run(q0, op.word)
                if r is None:
                    continue
                obs = obs | {(r, ())}
            yield a, q1, obs
        return
    atom = atom_automaton(a, k - 1, A.alphabet)
    if isinstance(op, PopK):
        obs = NO_OBS
        if ctx is not None:
            q0 = ctx.prefix(ctx.n - k + 1)
            if q0 is None:
                return
            obs = frozenset({(q0, ())})
        yield atom.uid, i, obs
        return
    assert isinstance(op, PushK)
    get = TABLE.get
    if ctx is None:
        for lab1, p, _ in out[i]:
            for lab2, q2, _ in out[p]:
                C = product(get(lab1), get(lab2), atom)
                if not is_empty(C):
                    yield canonical(C).uid, q2, NO_OBS
        return
    lv = k - 1
    q0 = ctx.prefix(ctx.n - k + 1)
    if q0 is None:
        return
    for f, V in ctx.transformations(lv):
        x = ctx.apply(f, lv, q0)
        y = ctx.apply(f, lv, x) if x is not None else None
        if y is None:
            continue
        for lab1, p, O1 in out[i]:
            O1f = ctx.apply_to_obs(f, lv, O1)
            if O1f is None:
                continue
            C1 = ctx.with_jump(get(lab1), lv, f)
            for lab2, q2, O2 in out[p]:
                C = product(C1, get(lab2), V, atom)
                if not is_empty(C):
                    yield C.uid, q2, O1f | O2 | {(y, ())}


def _word_paths(A, w, ctx):
    """Pairs (q, obligations) for the paths from the initial state reading w.

    Obligations met along the way are advanced over the rest of w, so they
    refer to the position just after the path.
    """
    out = A.out()
    cur = {(A.initial, NO_OBS)}
    for ch in w:
        nxt = set()
        for p, obs in cur:
            if obs:
                obs = ctx.step_obs(obs, ch)
                if obs is None:
                    continue
            for lab, q, O in out[p]:
                if lab == ch:
                    nxt.add((q, obs | O))
        cur = nxt
    return sorted(cur, key=lambda t: (t[0], sorted(t[1])))


def saturate_step(A: NestedAutomaton, d: Transition) -> NestedAutomaton:
    return transform(A, d)


# ---------------------------------------------------------------- single-step pre

_pre_memo: dict = {}


def pre_step(A: NestedAutomaton, d: Transition) -> NestedAutomaton:
    """Exactly the stores with a d-step into L(A) (the old language is not kept)."""
    key = (A.uid, d)
    r = _pre_memo.get(key)
    if r is None:
        r = _pre_step(A, d)
        _pre_memo[key] = r
    return r


def _pre_step(A, d):
    k, i = A.level, A.initial
    if d.level > k:
        raise LevelMismatch(f"rule of level {d.level} applied to a level-{k} automaton")
    j = max(A.states) + 1
    trans = list(A.transitions)
    if d.level < k:
        for p, lab, q, ob in A.transitions:
            if p == i:
                C = pre_step(TABLE.get(lab), d)
                if not is_empty(C):
                    trans.append((j, C.uid, q, ob))
    else:
        for lab, q, ob in _additions(A, d, None):
            trans.append((j, lab, q, ob))
    return N.trim(make(k, A.alphabet, set(A.states) | {j}, trans, j, A.finals))


def pre(h: Hcfp, A: NestedAutomaton) -> NestedAutomaton:
    """Union over the rules of the one-step predecessors."""
    A = prepare(h, A, normalize=False)
    parts = [pre_step(A, d) for d in h.transitions]
    return N.union_all(parts, A.alphabet, A.level)


# ---------------------------------------------------------------- saturation

_alpha_memo: dict = {}


def with_alphabet(A: NestedAutomaton, alphabet) -> NestedAutomaton:
    """The same automaton declared over a larger alphabet."""
    alphabet = frozenset(alphabet) | A.alphabet
    if alphabet == A.alphabet:
        return A
    key = (A.uid, alphabet)
    r = _alpha_memo.get(key)
    if r is None:
        trans = A.transitions if A.level == 1 else [
            (p, with_alphabet(TABLE.get(lab), alphabet).uid, q, ob) for p, lab, q, ob in A.transitions]
        r = make(A.level, alphabet, A.states, trans, A.initial, A.finals, A.ctx)
        _alpha_memo[key] = r
    return r


def prepare(h: Hcfp, A: NestedAutomaton, normalize: bool = True) -> NestedAutomaton:
    if A.level != h.level:
        raise LevelMismatch(f"automaton of level {A.level} for a level-{h.level} model")
    A = with_alphabet(A, h.alphabet)
    return N.normalize_initial(A) if normalize else A


class _Budget:
    """Installs the product budget for one saturation run."""

    def __init__(self, cfg: SaturationConfig):
        self.cfg = cfg

    def __enter__(self):
        self.saved = N.PRODUCT_BUDGET[0]
        N.PRODUCT_BUDGET[0] = self.cfg.max_product_states
        return self

    def __exit__(self, *exc):
        N.PRODUCT_BUDGET[0] = self.saved
        return False


def _collect_labels(A: NestedAutomaton, seen: set) -> None:
    """Add the labels used anywhere below A to seen.

    Labels are immutable, so the walk stops at labels already counted."""
    todo = [A]
    while todo:
        B = todo.pop()
        if B.level > 1:
            for t in B.transitions:
                lab = t[1]
                if lab not in seen:
                    seen.add(lab)
                    todo.append(TABLE.get(lab))


def prestar(h: Hcfp, A: NestedAutomaton, cfg: SaturationConfig | None = None,
            on_step: Callable | None = None, ctx=None, unchanged: Callable | None = None):
    """Saturate A under the rules of h; returns (automaton, report).

    On budget exhaustion raises BudgetExhausted whose ``partial`` is the last
    fully computed automaton (its language is contained in the exact answer).
    ``on_step(before, after, rule)`` is called after every transform.
    ``unchanged(before, after)`` may declare a step void (same language); the
    old automaton is then kept.
    """
    cfg = cfg or SaturationConfig()
    A = prepare(h, A)
    report = SaturationReport()
    base_transitions = N.total_transitions(A)
    # the label count covers every automaton of this run, so it does not
    # depend on what earlier runs left in the caches
    labels: set = set()
    _collect_labels(A, labels)
    with _Budget(cfg):
        try:
            while True:
                if report.passes_run >= cfg.max_passes:
                    report.stopped_by = "max_passes"
                    raise _LabelBudget()
                changed = False
                for d in h.transitions:
                    B = transform(A, d, ctx)
                    if B is not A and unchanged is not None and unchanged(A, B):
                        B = A
                    report.steps += 1
                    if on_step is not None:
                        on_step(A, B, d)
                    if B is not A:
                        changed = True
                        _collect_labels(B, labels)
                        if len(labels) > cfg.max_interned_labels:
                            report.stopped_by = "max_interned_labels"
                            raise _LabelBudget()
                        if N.total_transitions(B) > cfg.max_total_transitions:
                            report.stopped_by = "max_total_transitions"
                            raise _LabelBudget()
                    A = B
                report.passes_run += 1
                if not changed:
                    report.fixpoint_reached = True
                    break
        except (_LabelBudget, ResourceExceeded):
            if not report.stopped_by:
                report.stopped_by = "max_product_states"
            report.labels_interned = len(labels)
            report.transitions_added = N.total_transitions(A) - base_transitions
            raise BudgetExhausted(f"saturation stopped early ({report.stopped_by})",
                                  partial=A, report=report) from None
    report.labels_interned = len(labels)
    report.transitions_added = N.total_transitions(A) - base_transitions
    return A, report


# ---------------------------------------------------------------- structural checks

def step_violations(before: NestedAutomaton, after: NestedAutomaton, d: Transition, ctx=None) -> list:
    """Ways in which one transform broke its structural contract (empty when fine).

    The state set is unchanged, transitions are only added at the initial
    state when the rule acts at this level, and otherwise only labels of
    transitions leaving the initial state are rewritten, recursively under
    the same contract.
    """
    problems = []
    if after is before:
        # includes steps suppressed because the language did not change
        return problems
    if before.states != after.states or before.initial != after.initial or before.finals != after.finals:
        problems.append(f"state set changed at level {before.level}")
        return problems
    if d.level == before.level:
        old, new = set(before.transitions), set(after.transitions)
        if not old <= new:
            problems.append(f"transitions removed at level {before.level}")
        if any(t[0] != before.initial for t in new - old):
            problems.append(f"transition added away from the initial state at level {before.level}")
        return problems
    keep_b = {t for t in before.transitions if t[0] != before.initial}
    keep_a = {t for t in after.transitions if t[0] != after.initial}
    if keep_b != keep_a:
        problems.append(f"non-initial transitions changed at level {before.level}")
    moved = {}
    for p, lab, q, ob in before.transitions:
        if p == before.initial:
            new_lab = transform(TABLE.get(lab), d, ctx).uid
            moved[(lab, q, ob)] = new_lab
            problems += step_violations(TABLE.get(lab), TABLE.get(new_lab), d, ctx)
    expected = {(before.initial, nl, q, ob) for (lab, q, ob), nl in moved.items()}
    got = {t for t in after.transitions if t[0] == after.initial}
    if expected != got:
        problems.append(f"initial transitions are not the rewritten originals at level {before.level}")
    return problems

