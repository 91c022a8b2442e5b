"""Acceptance criteria C1-C8.

Each test records one PASS/FAIL line, shown at the end of a pytest run.
Running this file as a script runs the criteria directly and prints the lines.
"""

import dataclasses
import functools
import io
import random
import sys
import time
import traceback

from hcfp import flat as F
from hcfp import nested as N
from hcfp.cli import EXIT_BUDGET, PARTIAL_BANNER, main
from hcfp.constrained import member_constrained, prestar_constrained, to_flat
from hcfp.errors import BudgetExhausted
from hcfp.formats import format_model, parse_automaton
from hcfp.logic import EF, EU, EX, And, Atom, Checker, Formula, Not, Or, TrueF
from hcfp.model import Hcfp, rules
from hcfp.oracle import (Bounds, ExplicitChecker, bounded_language_eq, crosscheck_prestar,
                         enumerate_stores, explicit_prestar)
from hcfp.saturation import prepare, prestar, step_violations, transform
from hcfp.store import encode, parse, pop
from hcfp.suite import STRESS, SUITE

import conftest
from gen import rand_flat_store_language, rand_model, rand_nested, rand_store

POP1 = Hcfp("a", 1, rules(("a", pop(1))))
SUITE_BOUNDS = Bounds(max_encoded_size=25, max_depth=20)


def criterion(cid, title):
    def deco(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as e:
                conftest.ACCEPTANCE_LINES.append(f"{cid} FAIL {title}: {type(e).__name__}: {e}")
                raise
            took = time.perf_counter() - t0
            note = f" ({detail})" if detail else ""
            conftest.ACCEPTANCE_LINES.append(f"{cid} PASS {title} [{took:.1f}s]{note}")
        return run
    return deco


def shortest_disagreement(A: F.FlatAutomaton, B: F.FlatAutomaton, n: int):
    """Shortest word in exactly one of two n-store languages, or None."""
    only_a = F.intersect(A, F.complement_within(B, n))
    only_b = F.intersect(B, F.complement_within(A, n))
    return F.some_word(F.union(only_a, only_b))


# ----------------------------------------------------------------------------

@criterion("C1", "pop1 example")
def test_c1_pop_example():
    S = N.from_store_set(["a"], "a")
    t0 = time.perf_counter()
    R, rep = prestar(POP1, S)
    elapsed = time.perf_counter() - t0
    assert rep.fixpoint_reached
    assert all(N.member(R, "a" * i) for i in range(1, 21))
    assert not N.member(R, "")
    flat = N.flatten(R)
    stores = {encode(s) for s in enumerate_stores("a", 1, 12)}
    for w in F.words_upto("a", 12):
        if w not in stores:
            assert not F.member(flat, w), w
    assert elapsed < 1.0
    return f"saturation {elapsed * 1000:.0f} ms"


@criterion("C2", "oracle completeness on the 20-instance suite")
def test_c2_suite_crosscheck():
    t0 = time.perf_counter()
    hard = warn = 0
    for inst in SUITE:
        R, rep = prestar(inst.model, inst.target)
        assert rep.fixpoint_reached, inst.name
        cr = crosscheck_prestar(inst.model, inst.target, R, SUITE_BOUNDS)
        hard += len(cr.hard_failures)
        warn += len(cr.warnings)
    elapsed = time.perf_counter() - t0
    assert (hard, warn) == (0, 0)
    assert elapsed < 300
    return f"{hard} hard failures, {warn} warnings"


@criterion("C3", "constrained agreement")
def test_c3_constrained_agreement():
    for inst in SUITE:
        h = inst.model
        U = F.universe_flat(h.alphabet, h.level)
        R, _ = prestar(h, inst.target)
        CR, rep = prestar_constrained(h, inst.target, U)
        assert rep.fixpoint_reached, inst.name
        # exact comparison of the flat languages, restricted to size <= 20
        w = shortest_disagreement(N.flatten(R), to_flat(CR), h.level)
        assert w is None or len(w) > 20, (inst.name, w)
        # and an enumeration that does not go through the flat library
        for s in enumerate_stores(h.alphabet, h.level, 12):
            assert member_constrained(CR, s) == N.member(R, s), (inst.name, encode(s))
    S = N.from_store_set(["a"], "a")
    C = F.from_words(["[a]", "[aa]", "[aaa]"], "a", 1)
    R, _ = prestar_constrained(POP1, S, C)
    expected = explicit_prestar(POP1, S, "a", 8, C=C)
    got = {s for s in enumerate_stores("a", 1, 8) if member_constrained(R, s)}
    assert got == expected == {"a", "aa", "aaa"}
    return "20 instances, finite example exact"


@criterion("C4", "roundtrips")
def test_c4_roundtrips():
    rng = random.Random(4)
    for n in (1, 2, 3):
        for _ in range(50):
            A = rand_nested(rng, n)
            back = N.inflate(N.flatten(A), n, "ab")
            assert bounded_language_eq(A, back, "ab", n, 10) == (True, None)
            B = rand_flat_store_language(rng, n)
            again = N.flatten(N.inflate(B, n, "ab"))
            assert bounded_language_eq(B, again, "ab", n, 10) == (True, None)
    for _ in range(1000):
        n = rng.randint(1, 3)
        s = rand_store(rng, n, "ab", 3, 4)
        assert parse(encode(s), n) == s
    return "150 nested, 150 flat, 1000 stores"


@criterion("C5", "structural saturation invariants")
def test_c5_structural_invariants():
    rng = random.Random(5)
    cases = [(inst.model, inst.target) for inst in SUITE]
    for _ in range(40):
        n = rng.randint(1, 3)
        cases.append((rand_model(rng, n), N.from_store_set({rand_store(rng, n, "ab")}, "ab", n)))
    runs = steps = 0
    for h, A in cases:
        sample = enumerate_stores("ab", h.level, 8)
        problems = []

        def on_step(before, after, d):
            nonlocal steps
            steps += 1
            problems.extend(step_violations(before, after, d))
            lost = [s for s in sample if N.member(before, s) and not N.member(after, s)]
            assert lost == [], lost

        try:
            R, _ = prestar(h, A, on_step=on_step)
        except BudgetExhausted:
            continue
        assert problems == [], problems
        assert all(transform(R, d) is R for d in h.transitions)
        runs += 1
    assert runs >= 40
    return f"{runs} fixpoints, {steps} steps"


CURATED = [
    EX(Atom("p")),
    EF(Atom("p")),
    EU(Atom("q"), Atom("p")),
    Not(EF(Atom("p"))),
    And(Atom("q"), EX(Atom("p"))),
    Or(EX(EX(Atom("p"))), Atom("p")),
    EF(And(Atom("q"), Not(Atom("p")))),
    EU(Not(Atom("p")), EX(Atom("q"))),
    Not(EU(TrueF(), Not(Atom("q")))),
    EX(EF(Or(Atom("p"), Not(Atom("q"))))),
]


@criterion("C6", "model checker consistency")
def test_c6_model_checker():
    kinds = {type(f).__name__ for g in CURATED for f in _subformulas(g)}
    assert {"EX", "EF", "EU", "Not", "And", "Or"} <= kinds
    compared = 0
    for inst in SUITE:
        h = inst.model
        atoms = {"p": inst.target, "q": N.atom_automaton(sorted(h.alphabet)[0], h.level, h.alphabet)}
        c = Checker(h, atoms)
        ef, eu = c.evaluate(EF(Atom("p"))), c.evaluate(EU(TrueF(), Atom("p")))
        assert shortest_disagreement(ef.flat, eu.flat, h.level) is None, inst.name
        assert bounded_language_eq(ef.flat, eu.flat, h.alphabet, h.level, 12) == (True, None)
        ex = ExplicitChecker(h, atoms, max_size=20, max_depth=40)
        pool = enumerate_stores(h.alphabet, h.level, 8)
        for f in CURATED:
            r = c.evaluate(f)
            for s in pool:
                assert c.check(f, s) == F.member(r.flat, encode(s)) == ex.holds(f, s), \
                    (inst.name, str(f), encode(s))
                compared += 1
    return f"{compared} store/formula pairs"


def _subformulas(f):
    yield f
    for field in dataclasses.fields(f):
        child = getattr(f, field.name)
        if isinstance(child, Formula):
            yield from _subformulas(child)


@criterion("C7", "mutation sensitivity")
def test_c7_mutation():
    total = detected = 0
    for inst in SUITE:
        h = inst.model
        A0 = prepare(h, inst.target)
        R, _ = prestar(h, inst.target)
        original = set(A0.transitions)
        for t in [t for t in R.transitions if t not in original]:
            M = N.make(R.level, R.alphabet, R.states, [u for u in R.transitions if u != t],
                       R.initial, R.finals)
            total += 1
            detected += bool(crosscheck_prestar(h, inst.target, M, SUITE_BOUNDS).hard_failures)
    assert total > 0 and detected == total
    return f"{detected}/{total} deletions detected"


@criterion("C8", "budget behaviour on the level-3 stress instance")
def test_c8_budget(tmp_path):
    (tmp_path / "m.hcfp").write_text(format_model(STRESS.model))
    (tmp_path / "S.auto").write_text("stores { " + " ".join(encode(s) for s in STRESS.stores) + " }\n")
    out = io.StringIO()
    code = main(["prestar", "--model", str(tmp_path / "m.hcfp"), "--set", str(tmp_path / "S.auto"),
                 "--max-labels", "40", "--out", str(tmp_path / "P.auto")], out)
    text = out.getvalue()
    assert code == EXIT_BUDGET
    assert text.startswith(PARTIAL_BANNER) and "fixpoint_reached=false" in text
    P = parse_automaton((tmp_path / "P.auto").read_text(), level=3)
    assert not F.is_empty(P)
    partial = N.inflate(P, 3, STRESS.model.alphabet)
    bounds = Bounds(max_encoded_size=25, max_depth=20, max_start_size=14)
    cr = crosscheck_prestar(STRESS.model, STRESS.target, partial, bounds)
    # soundness: no accepted store lacks a witness
    assert cr.warnings == []
    pool = enumerate_stores(STRESS.model.alphabet, 3, bounds.max_start_size)
    exact, _ = prestar(STRESS.model, STRESS.target)
    accepted = [s for s in pool if N.member(partial, s)]
    assert accepted and all(N.member(exact, s) for s in accepted)
    assert len(accepted) < sum(N.member(exact, s) for s in pool)
    return f"exit {code}, {len(accepted)} accepted stores, all witnessed"


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    tests = [test_c1_pop_example, test_c2_suite_crosscheck, test_c3_constrained_agreement,
             test_c4_roundtrips, test_c5_structural_invariants, test_c6_model_checker,
             test_c7_mutation]
    failed = False
    for t in tests:
        try:
            t()
        except BaseException:
            failed = True
            traceback.print_exc()
    with tempfile.TemporaryDirectory() as d:
        try:
            test_c8_budget(Path(d))
        except BaseException:
            failed = True
            traceback.print_exc()
    for line in conftest.ACCEPTANCE_LINES:
        print(line)
    sys.exit(1 if failed else 0)
