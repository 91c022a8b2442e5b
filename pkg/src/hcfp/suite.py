"""Curated instances for cross-checking, plus a level-3 stress instance.

Each suite instance is small (levels 1 and 2, at most two letters and three
rules) and chosen so that every store accepted by the exact predecessor set
has a short witness run. That makes the brute-force check warning-free at
the default bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import nested as N
from .model import Hcfp, rules
from .nested import NestedAutomaton
from .store import PushK, parse, pop, push


@dataclass(frozen=True)
class Instance:
    name: str
    model: Hcfp
    stores: tuple

    @property
    def target(self) -> NestedAutomaton:
        return N.from_store_set(self.stores, self.model.alphabet, self.model.level)


def _inst(name, letters, level, rule_pairs, stores) -> Instance:
    return Instance(name, Hcfp(letters, level, rules(*rule_pairs)),
                    tuple(parse(s, level) for s in stores))


SUITE = (
    # level 1
    _inst("pop1-example", "a", 1, [("a", pop(1))], ["[a]"]),
    _inst("grow", "a", 1, [("a", push(1, "aa"))], ["[aaaa]"]),
    _inst("drain", "ab", 1, [("a", push(1, "b")), ("b", pop(1))], ["[]"]),
    _inst("swap", "ab", 1, [("a", push(1, "b")), ("b", push(1, "a"))], ["[a]"]),
    _inst("rewrite", "ab", 1, [("a", push(1, "ba")), ("b", pop(1))], ["[b]"]),
    _inst("two-targets", "ab", 1, [("a", pop(1)), ("b", push(1, "ab"))], ["[b]", "[aa]"]),
    _inst("doubling", "ab", 1, [("a", push(1, "bb")), ("b", pop(1)), ("a", pop(1))], ["[b]"]),
    _inst("stuck", "ab", 1, [("b", push(1, "ab"))], ["[a]", "[aab]"]),
    # level 2
    _inst("pop2", "a", 2, [("a", pop(2))], ["[[a]]"]),
    _inst("push2-pop2", "a", 2, [("a", PushK(2)), ("a", pop(2))], ["[[a][a]]"]),
    _inst("push2-pop1", "a", 2, [("a", PushK(2)), ("a", pop(1))], ["[[][a]]"]),
    _inst("push2-grow", "ab", 2, [("a", PushK(2)), ("a", pop(2)), ("b", push(1, "a"))], ["[[a][b]]"]),
    _inst("copy-then-pop", "ab", 2, [("a", PushK(2)), ("a", push(1, "b")), ("b", pop(1))],
          ["[[][a]]"]),
    _inst("pop-mixed", "ab", 2, [("a", pop(2)), ("b", pop(1))], ["[[ab]]", "[[]]"]),
    _inst("inner-loop", "ab", 2, [("a", push(1, "b")), ("b", push(1, "a")), ("a", pop(2))],
          ["[[b][a]]"]),
    _inst("guarded-pop2", "ab", 2, [("b", pop(2)), ("a", push(1, "b"))], ["[[a]]"]),
    _inst("dup-b", "ab", 2, [("b", PushK(2)), ("b", pop(1)), ("a", pop(2))], ["[[][b]]"]),
    _inst("empty-top", "a", 2, [("a", pop(1)), ("a", pop(2))], ["[[]]"]),
    _inst("two-stores", "ab", 2, [("a", PushK(2)), ("b", pop(2))], ["[[b]]", "[[a][a]]"]),
    _inst("reach-b", "ab", 2, [("a", push(1, "ab")), ("b", pop(1)), ("a", pop(2))], ["[[b]]"]),
)


def by_name(name: str) -> Instance:
    for inst in SUITE:
        if inst.name == name:
            return inst
    raise KeyError(name)


# A level-3 instance whose saturation uses about 50 distinct labels: far more
# than a small budget allows, while its exact answer is still cheap.
STRESS = _inst("stress-level3", "ab", 3,
               [("a", pop(2)), ("a", push(1, "b")), ("b", PushK(3)), ("a", pop(3)), ("b", pop(1)),
                ("b", push(1, "a"))],
               ["[[[][aa]][[]]]", "[[[b][a]][[ba][a]]]"])
