import random
import sys
from functools import lru_cache

import pytest

from hcfp import flat as F
from hcfp import nested as N
from hcfp.constrained import (AlternatingFlatAutomaton, constrain, flatten_constrained,
                              literal_prestar_constrained, member_alternating, member_constrained,
                              prestar_constrained, remove_alternation, saturate_step_constrained,
                              to_flat, to_nested)
from hcfp.errors import LevelMismatch
from hcfp.model import Hcfp, Transition, rules
from hcfp.oracle import Bounds, crosscheck_constrained, enumerate_stores, explicit_prestar
from hcfp.saturation import prestar, saturate_step
from hcfp.store import encode, parse, pop, push

from gen import rand_constraint, rand_model, rand_nested, rand_store

POP1 = Hcfp("a", 1, rules(("a", pop(1))))
ONE = enumerate_stores("a", 1, 12)


def words(*enc, letters="a", level=1):
    return F.from_words(enc, letters, level)


def ca_lang(CA, pool):
    return {encode(s) for s in pool if member_constrained(CA, s)}


def and_or_member(alt, word):
    """Top-down AND-OR evaluation, independent of the backward DP."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10_000))

    @lru_cache(maxsize=None)
    def ok(state, i):
        if i == len(word):
            return state in alt.finals
        return any(all(ok(t, i + 1) for t in conj) for conj in alt.options(state, word[i]))

    return all(ok(s, 0) for s in alt.initial)


# ---- constrain and its semantics

def test_constrain_examples():
    A = N.from_store_set(["a", "aa"], "a")
    assert ca_lang(constrain(A, words("[a]")), ONE) == {"[a]"}
    assert ca_lang(constrain(A, F.universe_flat("a", 1)), ONE) == {"[a]", "[aa]"}
    assert ca_lang(constrain(A, F.empty_flat("a", 1)), ONE) == set()


def test_flatten_constrained_example():
    alt = flatten_constrained(constrain(N.from_store_set(["a"], "a"), F.universe_flat("a", 1)))
    accepted = {w for w in F.words_upto("a", 8) if member_alternating(alt, w)}
    assert accepted == {"[a]"}


def test_constraint_must_hold_store_encodings():
    with pytest.raises(LevelMismatch):
        constrain(N.from_store_set(["a"], "a"), words("[a"))


def test_member_constrained_is_componentwise():
    rng = random.Random(1)
    for _ in range(200):
        n = rng.randint(1, 2)
        A = rand_nested(rng, n)
        C, _ = rand_constraint(rng, n)
        s = rand_store(rng, n, "ab")
        expected = N.member(A, s) and F.member(C, encode(s))
        assert member_constrained(constrain(A, C), s) == expected


def test_member_constrained_edge_cases():
    A = N.from_store_set(["a"], "ab")
    assert not member_constrained(constrain(A, words("[b]", letters="ab")), "a")
    assert not member_constrained(constrain(N.empty_nested("ab", 1), F.universe_flat("ab", 1)), "a")


# ---- alternation removal

def test_remove_alternation_on_an_alternation_free_input():
    B = words("[a]", "[aa]")
    R = remove_alternation(AlternatingFlatAutomaton.from_flat(B))
    assert all(F.member(R, w) == F.member(B, w) for w in F.words_upto("a", 8))


def test_remove_alternation_conjunction():
    # q reads a+ and r reads aa*; the initial conjunction needs both
    delta = {"q": {"a": [frozenset(["q1"])]}, "q1": {"a": [frozenset(["q1"])]},
             "r": {"a": [frozenset(["r1"])]}, "r1": {"a": [frozenset(["r1"])]}}
    alt = AlternatingFlatAutomaton("a", delta, frozenset(["q", "r"]), {"q1", "r1"})
    R = remove_alternation(alt)
    for w in F.words_upto("a", 10, brackets=False):
        assert F.member(R, w) == member_alternating(alt, w) == and_or_member(alt, w) == (len(w) >= 1)


def test_remove_alternation_of_a_constrained_flattening():
    rng = random.Random(2)
    for _ in range(40):
        n = rng.randint(1, 2)
        A = rand_nested(rng, n)
        C, _ = rand_constraint(rng, n)
        R = to_flat(constrain(A, C))
        I = F.intersect(N.flatten(A), C)
        assert F.validate_store_language(R, n)
        for s in enumerate_stores("ab", n, 10):
            assert F.member(R, encode(s)) == F.member(I, encode(s))


# ---- one constrained step

BOUNDED = words("[a]", "[aa]", "[aaa]")


def test_step_under_a_finite_constraint():
    CA = constrain(N.from_store_set(["a"], "a"), BOUNDED)
    R = saturate_step_constrained(CA, Transition("a", pop(1)))
    assert member_constrained(R, "aa")
    assert not member_constrained(R, "aaaa")
    # the added transition carries an obligation
    assert any(t[3] for t in R.automaton.transitions)


def test_step_under_the_universe_is_the_plain_step():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(1, 2)
        h = rand_model(rng, n)
        A = N.from_store_set({rand_store(rng, n, "ab")}, "ab", n)
        for d in h.transitions:
            plain = saturate_step(A, d)
            con = saturate_step_constrained(constrain(A, F.universe_flat("ab", n)), d)
            for s in enumerate_stores("ab", n, 10):
                assert member_constrained(con, s) == N.member(plain, s)


def test_step_blocked_by_the_constraint():
    CA = constrain(N.from_store_set(["a"], "a"), words("[a]"))
    R = saturate_step_constrained(CA, Transition("a", pop(1)))
    assert ca_lang(R, ONE) == {"[a]"}


# ---- constrained pre*

def test_prestar_constrained_example():
    S = N.from_store_set(["a"], "a")
    R, rep = prestar_constrained(POP1, S, BOUNDED)
    assert rep.fixpoint_reached
    assert ca_lang(R, ONE) == {"[a]", "[aa]", "[aaa]"}
    b = Bounds(max_encoded_size=12, max_depth=20, max_start_size=6)
    cr = crosscheck_constrained(POP1, S, BOUNDED, R, b)
    assert cr.ok and not cr.warnings


def test_prestar_constrained_with_universe_is_prestar():
    rng = random.Random(4)
    for _ in range(30):
        n = rng.randint(1, 2)
        h = rand_model(rng, n)
        A = N.from_store_set({rand_store(rng, n, "ab")}, "ab", n)
        R, _ = prestar(h, A)
        CR, _ = prestar_constrained(h, A, F.universe_flat("ab", n))
        for s in enumerate_stores("ab", n, 10):
            assert member_constrained(CR, s) == N.member(R, s), encode(s)


def test_prestar_constrained_disjoint_target_is_empty():
    R, _ = prestar_constrained(POP1, N.from_store_set(["aaaa"], "a"), BOUNDED)
    assert ca_lang(R, ONE) == set()
    assert F.is_empty(to_flat(R))


def test_literal_variant():
    h = Hcfp("ab", 1, rules(("a", push(1, "b"))))
    S = N.from_store_set(["b"], "ab")
    C = words("[a]", "[aa]", letters="ab")
    L, _ = literal_prestar_constrained(h, S, C)
    pool = enumerate_stores("ab", 1, 7)
    # zero steps keep [b]; the step [a] -> [b] leaves C, so nothing else
    assert {encode(s) for s in pool if N.member(L, s)} == {"[b]"}
    # S inside C: the two variants agree
    C2 = words("[a]", "[b]", letters="ab")
    L2, _ = literal_prestar_constrained(h, S, C2)
    R2, _ = prestar_constrained(h, S, C2)
    assert {s for s in pool if N.member(L2, s)} == {s for s in pool if member_constrained(R2, s)}
    assert N.member(L2, "a")


def test_literal_variant_against_the_definition():
    rng = random.Random(5)
    for _ in range(20):
        h = rand_model(rng, 1)
        targets = {rand_store(rng, 1, "ab", 2, 3) for _ in range(2)}
        S = N.from_store_set(targets, "ab", 1)
        C, _ = rand_constraint(rng, 1)
        L, _ = literal_prestar_constrained(h, S, C)
        reach = explicit_prestar(h, S, "ab", 5, max_depth=20, max_size=14, C=C)
        expected = reach | {s for s in enumerate_stores("ab", 1, 5) if s in targets}
        got = {s for s in enumerate_stores("ab", 1, 5) if N.member(L, s)}
        assert got == expected


def test_constrained_properties_on_random_instances():
    rng = random.Random(6)
    b = Bounds(max_encoded_size=16, max_depth=12, max_start_size=10)
    for _ in range(40):
        n = rng.randint(1, 2)
        h = rand_model(rng, n)
        A = N.from_store_set({rand_store(rng, n, "ab", 2, 2) for _ in range(2)}, "ab", n)
        C, kind = rand_constraint(rng, n)
        R, rep = prestar_constrained(h, A, C)
        assert rep.fixpoint_reached
        assert crosscheck_constrained(h, A, C, R, b).hard_failures == []
        plain, _ = prestar(h, A)
        flat = to_flat(R)
        alt = flatten_constrained(R)
        for s in enumerate_stores("ab", n, 10):
            inside = member_constrained(R, s)
            # only stores of C, and never more than the unconstrained answer
            assert not inside or F.member(C, encode(s))
            assert not inside or N.member(plain, s) or N.member(A, s)
            # alternation removal keeps membership
            assert F.member(flat, encode(s)) == inside == and_or_member(alt, encode(s))


def test_constraint_monotonicity():
    rng = random.Random(7)
    for _ in range(25):
        n = rng.randint(1, 2)
        h = rand_model(rng, n)
        A = N.from_store_set({rand_store(rng, n, "ab")}, "ab", n)
        C, _ = rand_constraint(rng, n)
        C2 = F.union(C, rand_constraint(rng, n)[0])
        R, _ = prestar_constrained(h, A, C)
        R2, _ = prestar_constrained(h, A, C2)
        for s in enumerate_stores("ab", n, 10):
            assert not member_constrained(R, s) or member_constrained(R2, s)


def test_to_nested_matches():
    S = N.from_store_set(["a"], "a")
    R, _ = prestar_constrained(POP1, S, BOUNDED)
    M = to_nested(R)
    assert {encode(s) for s in ONE if N.member(M, s)} == {"[a]", "[aa]", "[aaa]"}


def test_recorded_product_factors_share_the_product_constraint():
    # constrained products whose obligations vanish intern as plain automata;
    # their constrained factors must not be recorded against them
    from hcfp.logic import Checker, parse_formula
    from hcfp.suite import SUITE
    formulas = ["EF atom p", "E true U atom p", "EX atom p", "E atom q U atom p", "!(EF atom p)",
                "atom q & EX atom p", "EX EX atom p | atom p", "EF (atom q & !atom p)",
                "E !atom p U EX atom q"]
    for inst in SUITE:
        h = inst.model
        atoms = {"p": inst.target, "q": N.atom_automaton(sorted(h.alphabet)[0], h.level, h.alphabet)}
        c = Checker(h, atoms)
        for text in formulas:
            c.evaluate(parse_formula(text))
    for uid, key in N._factors.items():
        ctx = N.TABLE.get(uid).ctx
        assert {N.TABLE.get(u).ctx for u in key} <= {ctx, None}, (uid, key)
