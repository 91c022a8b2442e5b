import itertools
import random

import pytest

from hcfp import flat as F
from hcfp.errors import LevelingFailed
from hcfp.flat import CLOSE, EPS, OPEN, FlatAutomaton

from gen import rand_flat_store_language


# ---- an independent reference simulator

class Ref:
    def __init__(self, A: FlatAutomaton):
        self.A = A
        self.delta = {}
        for p, x, q in A.transitions:
            self.delta.setdefault((p, x), set()).add(q)

    def close(self, states):
        seen = set(states)
        todo = list(states)
        while todo:
            p = todo.pop()
            for q in self.delta.get((p, EPS), ()):
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return frozenset(seen)

    def start(self):
        return self.close([self.A.initial])

    def step(self, cur, x):
        nxt = set()
        for p in cur:
            nxt |= self.delta.get((p, x), set())
        return self.close(nxt)

    def accepts(self, cur):
        return bool(cur & self.A.finals)


def walk(automata, letters, max_len, check):
    """Run check(word, verdicts) so that every word up to max_len is covered.

    Words reaching the same tuple of simulator configurations have the same
    verdicts and the same futures, so each configuration is checked once, at
    the shortest word reaching it. Checks must hold on an all-False vector.
    """
    sims = [Ref(A) for A in automata]
    syms = sorted(letters) + [OPEN, CLOSE]
    start = tuple(s.start() for s in sims)
    seen = {start}
    layer = [("", start)]
    for depth in range(max_len + 1):
        nxt = []
        for w, cur in layer:
            check(w, [s.accepts(c) for s, c in zip(sims, cur)])
            if depth < max_len and any(cur):
                for x in syms:
                    t = tuple(s.step(c, x) for s, c in zip(sims, cur))
                    if t not in seen:
                        seen.add(t)
                        nxt.append((w + x, t))
        layer = nxt
    return len(seen)


def accepted(A, max_len):
    """Explicit accepted words, by plain enumeration."""
    sim = Ref(A)
    found = set()
    stack = [("", sim.start())]
    while stack:
        w, cur = stack.pop()
        if sim.accepts(cur):
            found.add(w)
        if len(w) < max_len and cur:
            stack.extend((w + x, sim.step(cur, x)) for x in sorted(A.alphabet) + [OPEN, CLOSE])
    return found


def rand_flat(rng, letters, eps=True):
    k = rng.randint(1, 5)
    syms = list(letters) + [OPEN, CLOSE] + ([EPS] if eps else [])
    trans = {(rng.randrange(k), rng.choice(syms), rng.randrange(k)) for _ in range(rng.randint(0, 10))}
    finals = {q for q in range(k) if rng.random() < 0.4}
    return FlatAutomaton(range(k), letters, trans, 0, finals)


def words(*ws, letters="ab", level=None):
    return F.from_words(ws, letters, level)


# ---- examples

def test_single_final_normalize_examples():
    A = FlatAutomaton(range(4), "a", [(0, "[", 1), (1, "a", 2), (2, "]", 3), (1, "a", 3)], 0, {3, 2})
    B = F.single_final_normalize(A)
    assert len(B.finals) == 1
    assert accepted(B, 6) == accepted(A, 6)
    C = FlatAutomaton(range(5), "a", [(0, "[", 1), (1, "]", 2), (3, "a", 4)], 0, {2})
    D = F.single_final_normalize(C)
    assert len(D.states) == 3 and accepted(D, 6) == {"[]"}
    E = F.single_final_normalize(F.empty_flat("a"))
    assert F.is_empty(E) and not E.finals


def test_boolean_examples():
    U = F.union(words("[a]"), words("[b]"))
    assert accepted(U, 6) == {"[a]", "[b]"}
    I = F.intersect(words("[a]", "[ab]"), words("[ab]", "[b]"))
    assert accepted(I, 6) == {"[ab]"}
    assert F.member(words("[a]"), "[a]")
    assert not F.member(words("[a]"), "[aa]")
    assert F.is_empty(F.intersect(words("[a]"), words("[b]")))


def test_complement_example_against_enumeration():
    C = F.complement_within(words("[a]", letters="a"), 1, "a")
    got = accepted(C, 8)
    expected = {w for w in F.words_upto("a", 8) if w.startswith("[") and w.endswith("]")
                and len(w) >= 2 and set(w[1:-1]) <= {"a"} and w != "[a]"}
    assert got == expected
    assert {"[]", "[aa]", "[aaa]"} <= got


def test_universe_examples():
    U1 = F.universe_flat("a", 1)
    assert all(F.member(U1, w) for w in ["[]", "[a]", "[aa]"])
    U2 = F.universe_flat("a", 2)
    assert F.member(U2, "[[a]]") and F.member(U2, "[[][a]]")
    assert not F.member(U2, "[]") and not F.member(U2, "[a]")


def test_validate_store_language_examples():
    assert F.validate_store_language(words("[[a]]"), 2)
    for n in (1, 2, 3):
        assert not F.validate_store_language(words("[a"), n)
    assert F.validate_store_language(F.universe_flat("ab", 2), 2)


def _levels_by_depth(A, n):
    """Level of each state from the bracket depth of any path reaching it."""
    depth = {A.initial: 0}
    todo = [A.initial]
    out = A.out()
    while todo:
        p = todo.pop()
        for x, qs in out[p].items():
            d = depth[p] + (1 if x == OPEN else -1 if x == CLOSE else 0)
            for q in qs:
                if q not in depth:
                    depth[q] = d
                    todo.append(q)
    return {p: (n if d == 0 else n - d) for p, d in depth.items()}


def test_assign_levels_examples():
    A, lv = F.assign_levels(F.universe_flat("a", 2), 2)
    assert lv[A.initial] == 2 and all(lv[f] == 2 for f in A.finals)
    assert set(lv.values()) == {0, 1, 2}
    B, lv = F.assign_levels(words("[[a][b]]"), 2)
    out = B.out()
    mids = [p for p in B.states if CLOSE in {x for q, x, r in B.transitions if r == p}
            and OPEN in out[p]]
    assert mids and all(lv[p] == 1 for p in mids)
    # already leveled: idempotent up to isomorphism
    C, lv2 = F.assign_levels(A, 2)
    assert len(C.states) == len(A.states) and len(C.transitions) == len(A.transitions)
    assert F.check_levels(C, lv2)
    with pytest.raises(LevelingFailed):
        F.assign_levels(words("[a]]"), 1)


def test_leads_universe_example():
    A, lv = F.assign_levels(F.universe_flat("a", 2), 2)
    level1 = [p for p in A.states if lv[p] == 1]
    found = False
    for p1, p2 in itertools.product(level1, repeat=2):
        B = F.leads(A, lv, p1, p2)
        if B is None:
            continue
        found = True
        U = F.universe_flat("a", 1)
        for w in F.words_upto("a", 8):
            assert F.member(B, w) == F.member(U, w), w
    assert found


def test_leads_none_without_path():
    A, lv = F.assign_levels(words("[[a]]"), 2)
    # no level-2 path leads from the final state back to the initial one
    fin = next(iter(A.finals))
    assert F.leads(A, lv, fin, A.initial) is None


def test_leads_self_loop():
    # p1 = p2 with a loop of 1-stores [a] returning to the same level-1 state
    A = FlatAutomaton(range(6), "a",
                      [(0, "[", 1), (1, "[", 2), (2, "a", 3), (3, "]", 4), (4, "[", 2), (4, "]", 5)],
                      0, {5}, 2)
    lv = {0: 2, 5: 2, 1: 1, 4: 1, 2: 0, 3: 0}
    assert F.check_levels(A, lv)
    B = F.leads(A, lv, 4, 4)
    assert accepted(B, 8) == _paths(A, lv, 4, 4, 8) == {"[a]"}


# ---- properties against the word-enumeration oracle

def _paths(A, lv, p1, p2, max_len):
    k = lv[p1]
    out = A.out()
    found = set()
    stack = [(p1, "")]
    while stack:
        p, w = stack.pop()
        if len(w) >= max_len:
            continue
        for x, qs in out[p].items():
            for q in qs:
                if q == p2 and w:
                    found.add(w + x)
                if lv[q] < k:
                    stack.append((q, w + x))
    return found


@pytest.mark.parametrize("letters", ["a", "ab"])
def test_boolean_operations_agree_with_enumeration(letters):
    rng = random.Random(11 + len(letters))
    for _ in range(200):
        A, B = rand_flat(rng, letters), rand_flat(rng, letters)
        ops = [F.union(A, B), F.intersect(A, B), F.eliminate_epsilon(A), F.trim(A),
               F.determinize(A), F.minimize(A), F.single_final_normalize(A)]

        def check(w, v):
            a, b, u, i, ne, tr, de, mi, sf = v
            assert u == (a or b), w
            assert i == (a and b), w
            assert ne == tr == de == mi == sf == a, w
        walk([A, B] + ops, letters, 10, check)
        assert F.determinize(A).is_deterministic()
        hits = []
        walk([A], letters, 12, lambda w, v: v[0] and hits.append(w))
        assert F.is_empty(A) == (not hits) == (F.some_word(A) is None)
        if hits:
            assert len(F.some_word(A)) == min(map(len, hits)) and F.member(A, F.some_word(A))


@pytest.mark.parametrize("n", [1, 2])
def test_complement_and_difference(n):
    rng = random.Random(20 + n)
    U = F.universe_flat("ab", n)
    for _ in range(25):
        A = rand_flat_store_language(rng, n)
        B = rand_flat_store_language(rng, n)
        C = F.complement_within(A, n, "ab")
        CC = F.complement_within(C, n, "ab")
        D = F.difference_within(A, B, n)

        def check(w, v):
            a, b, u, c, cc, d = v
            assert c == (u and not a), w
            assert cc == (a and u), w
            assert d == (a and not b), w
        walk([A, B, U, C, CC, D], "ab", 10, check)


def test_minimize_is_canonical():
    rng = random.Random(5)
    for _ in range(40):
        A = rand_flat(rng, "ab")
        # the same language written twice differently
        B = F.union(A, F.intersect(A, rand_flat(rng, "ab")))
        MA, MB = F.minimize(A), F.minimize(B)
        assert MA.transitions == MB.transitions and MA.finals == MB.finals
        assert len(MA.states) <= len(F.trim(F.determinize(A)).states)


def test_assign_levels_properties():
    rng = random.Random(8)
    done = 0
    for _ in range(60):
        n = rng.randint(1, 3)
        A = rand_flat_store_language(rng, n)
        B, lv = F.assign_levels(A, n)
        assert F.check_levels(B, lv)
        assert all(lv[q] == 0 for p, x, q in B.transitions if x not in (OPEN, CLOSE))
        # level 0: no [-successor and no ]-predecessor
        for p, x, q in B.transitions:
            assert not (x == OPEN and lv[p] == 0)
            assert not (x == CLOSE and lv[q] == 0)
        walk([A, B], "ab", 10, lambda w, v: (v[0] == v[1]) or pytest.fail(w))
        done += not F.is_empty(A)
    assert done > 10


def test_leads_agree_with_path_enumeration():
    rng = random.Random(9)
    pairs = 0
    for _ in range(40):
        n = rng.randint(2, 3)
        A, lv = F.assign_levels(rand_flat_store_language(rng, n), n)
        for p1, p2 in itertools.product(sorted(A.states), repeat=2):
            if lv[p1] != lv[p2] or lv[p1] == 0:
                continue
            B = F.leads(A, lv, p1, p2)
            expected = _paths(A, lv, p1, p2, 8)
            if B is None:
                assert not expected
                continue
            pairs += 1
            assert accepted(B, 8) == expected, (p1, p2)
    assert pairs > 20
