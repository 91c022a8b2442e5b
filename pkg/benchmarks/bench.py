"""Timings for saturation, constrained saturation, model checking and the oracle.

    python benchmarks/bench.py [--repeat N]
"""

import argparse
import statistics
import time

from hcfp import flat as F
from hcfp import nested as N
from hcfp.constrained import prestar_constrained
from hcfp.logic import Checker, parse_formula
from hcfp.oracle import Bounds, crosscheck_prestar
from hcfp.saturation import prestar
from hcfp.suite import STRESS, SUITE


def timed(fn, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    # the saturation memo is global, so only a first run is cold
    cases = {
        "prestar, suite (cold)": (lambda: [prestar(i.model, i.target) for i in SUITE], 1),
        "prestar, stress (cold)": (lambda: prestar(STRESS.model, STRESS.target), 1),
        "prestar, suite (warm)": (lambda: [prestar(i.model, i.target) for i in SUITE], args.repeat),
        "prestar_constrained, universe, suite": (
            lambda: [prestar_constrained(i.model, i.target, F.universe_flat(i.model.alphabet, i.model.level))
                     for i in SUITE], args.repeat),
        "model checking, 3 formulas x suite": (lambda: [
            Checker(i.model, {"p": i.target}).evaluate(parse_formula(t))
            for i in SUITE for t in ("EF atom p", "EX atom p", "E !atom p U atom p")], args.repeat),
        "oracle crosscheck, suite": (lambda: [
            crosscheck_prestar(i.model, i.target, prestar(i.model, i.target)[0], Bounds())
            for i in SUITE], args.repeat),
    }
    width = max(map(len, cases))
    for name, (fn, repeat) in cases.items():
        print(f"{name:<{width}}  {timed(fn, repeat) * 1000:9.1f} ms")
    R, _ = prestar(STRESS.model, STRESS.target)
    print(f"stress fixpoint holds {len(N.reachable_automata(R)) - 1} labels and {N.total_transitions(R)} transitions")


if __name__ == "__main__":
    main()
