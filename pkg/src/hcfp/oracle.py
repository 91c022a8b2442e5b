"""Brute-force reference implementations used to check the symbolic ones.

Nothing here is clever on purpose: stores are enumerated explicitly and runs
are found by breadth-first search under explicit size and depth bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

from . import flat as F
from . import nested as N
from .model import Hcfp, reach_distance, successors
from .store import Store, encode, encoded_size, level as store_level


@dataclass(frozen=True)
class Bounds:
    """``max_encoded_size``/``max_depth`` bound the witness search;
    ``max_start_size`` bounds the enumerated start stores."""

    max_encoded_size: int = 25
    max_depth: int = 20
    max_level: int = 3
    max_start_size: int = 12

    def __post_init__(self):
        for name in ("max_encoded_size", "max_depth", "max_level", "max_start_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class CrosscheckReport:
    instances_checked: int = 0
    hard_failures: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.hard_failures

    def merge(self, other: "CrosscheckReport") -> "CrosscheckReport":
        return CrosscheckReport(self.instances_checked + other.instances_checked,
                                self.hard_failures + other.hard_failures,
                                self.warnings + other.warnings,
                                {**self.details, **other.details})

    def lines(self) -> list:
        out = [f"instances_checked={self.instances_checked}",
               f"hard_failures={len(self.hard_failures)}",
               f"warnings={len(self.warnings)}"]
        out += [f"hard_failure {encode(s)}" for s in self.hard_failures[:20]]
        out += [f"warning {encode(s)}" for s in self.warnings[:20]]
        return out

    def summary(self) -> str:
        return f"{len(self.hard_failures)} hard failures, {len(self.warnings)} warnings"


# ---------------------------------------------------------------- enumeration

def enumerate_stores(alphabet: Iterable[str], n: int, max_encoded_size: int) -> list:
    """Every n-store whose encoding has at most the given length, each once.

    Ordered by encoded length, then by encoding.
    """
    if n < 1:
        raise ValueError("level must be positive")
    letters = tuple(sorted(set(alphabet)))
    out = []
    for size in range(2 * n, max_encoded_size + 1):
        out.extend(sorted(_exact(letters, n, size), key=encode))
    return out


@lru_cache(maxsize=None)
def _exact(letters: tuple, n: int, size: int) -> tuple:
    if n == 1:
        if size < 2:
            return ()
        words = [""]
        for _ in range(size - 2):
            words = [w + a for w in words for a in letters]
        return tuple(words)
    return tuple(_sequences(letters, n - 1, size - 2, nonempty=True))


@lru_cache(maxsize=None)
def _sequences(letters, k, total, nonempty) -> tuple:
    # tuples of k-stores whose encodings add up to ``total`` characters
    if total == 0:
        return () if nonempty else ((),)
    out = []
    for c in range(2 * k, total + 1):
        heads = _exact(letters, k, c)
        if not heads:
            continue
        tails = _sequences(letters, k, total - c, False)
        for head in heads:
            for tail in tails:
                out.append((head,) + tail)
    return tuple(out)


# ---------------------------------------------------------------- membership adapter

def accepts(X, s: Store) -> bool:
    """Membership for any automaton kind, a predicate, or a finite set."""
    from .constrained import ConstrainedAutomaton, member_constrained
    if isinstance(X, N.NestedAutomaton):
        return N.member(X, s)
    if isinstance(X, ConstrainedAutomaton):
        return member_constrained(X, s)
    if isinstance(X, F.FlatAutomaton):
        return F.member(X, encode(s))
    if callable(X):
        return X(s)
    return s in X


def _predicate(X) -> Callable[[Store], bool]:
    memo: dict = {}

    def pred(s):
        r = memo.get(s)
        if r is None:
            r = memo[s] = accepts(X, s)
        return r

    return pred


# ---------------------------------------------------------------- crosschecks

def _crosscheck(h, target, result, b: Bounds, allowed, alphabet) -> CrosscheckReport:
    report = CrosscheckReport(instances_checked=1)
    hard, warn = report.hard_failures, report.warnings
    inside = _predicate(result)
    checked = witnessed = 0
    for s in enumerate_stores(alphabet, h.level, b.max_start_size):
        checked += 1
        dist = reach_distance(h, s, target, b.max_depth, b.max_encoded_size, allowed)
        acc = inside(s)
        if dist is not None:
            witnessed += 1
            if not acc:
                hard.append(s)
        elif acc:
            warn.append(s)
    report.details = {"stores_checked": checked, "stores_with_witness": witnessed}
    return report


def crosscheck_prestar(h: Hcfp, S, result, b: Bounds | None = None) -> CrosscheckReport:
    """Every store with a bounded witness run into S must be accepted (hard);
    accepted stores without one are reported as warnings."""
    b = b or Bounds()
    return _crosscheck(h, _predicate(S), result, b, None, h.alphabet)


def crosscheck_constrained(h: Hcfp, S, C, result, b: Bounds | None = None) -> CrosscheckReport:
    """As crosscheck_prestar, with every step required to start and end inside C.

    The target is S intersected with C, which is what the saturation computes.
    """
    b = b or Bounds()
    s_in, c_in = _predicate(S), _predicate(C)
    return _crosscheck(h, lambda s: c_in(s) and s_in(s), result, b, c_in, h.alphabet)


def bounded_language_eq(A1, A2, alphabet: Iterable[str], n: int, max_encoded_size: int = 10):
    """(True, None) or (False, first store on which the two disagree)."""
    for s in enumerate_stores(alphabet, n, max_encoded_size):
        if accepts(A1, s) != accepts(A2, s):
            return False, s
    return True, None


def bounded_language(A, alphabet, n, max_encoded_size) -> list:
    return [s for s in enumerate_stores(alphabet, n, max_encoded_size) if accepts(A, s)]


# ---------------------------------------------------------------- explicit predecessor sets

def explicit_prestar(h: Hcfp, S, alphabet, max_start_size, max_depth=20, max_size=25, C=None) -> set:
    """Stores (of bounded size) with a bounded witness into S, optionally through C."""
    target = _predicate(S)
    allowed = None
    if C is not None:
        c_in = _predicate(C)
        target = (lambda t, s_in=target: c_in(t) and s_in(t))
        allowed = c_in
    return {s for s in enumerate_stores(alphabet, h.level, max_start_size)
            if reach_distance(h, s, target, max_depth, max_size, allowed) is not None}


# ---------------------------------------------------------------- explicit CTL

class ExplicitChecker:
    """Evaluates E(U,X) formulas by explicit search from a given store.

    EF and EU explore stores up to ``max_size`` characters and ``max_depth``
    steps; answers are exact whenever every witness fits those bounds.
    """

    def __init__(self, h: Hcfp, atoms: dict, max_size: int = 16, max_depth: int = 40):
        self.h = h
        self.atoms = {k: _predicate(v) for k, v in atoms.items()}
        self.max_size = max_size
        self.max_depth = max_depth
        self._memo: dict = {}

    def holds(self, phi, s: Store) -> bool:
        key = (phi, s)
        r = self._memo.get(key)
        if r is None:
            r = self._memo[key] = self._eval(phi, s)
        return r

    def _eval(self, phi, s):
        from . import logic as L
        if isinstance(phi, L.TrueF):
            return True
        if isinstance(phi, L.Atom):
            if phi.stores is not None:
                return s in phi.stores
            return self.atoms[phi.name](s)
        if isinstance(phi, L.Not):
            return not self.holds(phi.sub, s)
        if isinstance(phi, L.And):
            return self.holds(phi.left, s) and self.holds(phi.right, s)
        if isinstance(phi, L.Or):
            return self.holds(phi.left, s) or self.holds(phi.right, s)
        if isinstance(phi, L.EX):
            return any(self.holds(phi.sub, t) for t in successors(self.h, s))
        if isinstance(phi, L.EF):
            return self._until(L.TrueF(), phi.sub, s)
        if isinstance(phi, L.EU):
            return self._until(phi.left, phi.right, s)
        raise TypeError(f"not a formula: {phi!r}")

    def _until(self, psi, chi, s):
        seen = {s}
        frontier = [s]
        for _ in range(self.max_depth + 1):
            nxt = []
            for u in frontier:
                if self.holds(chi, u):
                    return True
                if not self.holds(psi, u):
                    continue
                for t in successors(self.h, u):
                    if t not in seen and encoded_size(t) <= self.max_size:
                        seen.add(t)
                        nxt.append(t)
            if not nxt:
                return False
            frontier = nxt
        return False
