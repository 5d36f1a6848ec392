"""Explicit matroids on small ground sets."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .core import independent, vec
from .errors import ParameterError


@dataclass(frozen=True)
class MatroidDescriptor:
    """A matroid on {0, ..., ground_size - 1} given by all its independent sets."""

    ground_size: int
    independent_sets: frozenset

    def __post_init__(self):
        check_matroid(self.ground_size, self.independent_sets)

    @classmethod
    def from_bases(cls, ground_size: int, bases) -> "MatroidDescriptor":
        sets = set()
        for b in bases:
            b = frozenset(b)
            for r in range(len(b) + 1):
                sets.update(frozenset(c) for c in combinations(sorted(b), r))
        return cls(ground_size, frozenset(sets))

    @classmethod
    def from_vectors(cls, vectors) -> "MatroidDescriptor":
        vs = [vec(v) for v in vectors]
        k = len(vs[0]) if vs else 0
        sets = {frozenset()}
        for r in range(1, len(vs) + 1):
            for c in combinations(range(len(vs)), r):
                if independent([vs[i] for i in c], k):
                    sets.add(frozenset(c))
        return cls(len(vs), frozenset(sets))

    @property
    def rank(self) -> int:
        return max(len(s) for s in self.independent_sets)

    def bases(self) -> list:
        r = self.rank
        return sorted((tuple(sorted(s)) for s in self.independent_sets if len(s) == r))

    def first_basis(self) -> tuple:
        return self.bases()[0]

    def is_independent(self, subset) -> bool:
        return frozenset(subset) in self.independent_sets

    def sorted_sets(self) -> list:
        return sorted(self.independent_sets, key=lambda s: (len(s), sorted(s)))


def check_matroid(n: int, sets: frozenset):
    if frozenset() not in sets:
        raise ParameterError("the empty set must be independent")
    for s in sets:
        if any(not 0 <= e < n for e in s):
            raise ParameterError(f"element outside ground set in {sorted(s)}")
        for e in s:
            if s - {e} not in sets:
                raise ParameterError(f"not closed under subsets at {sorted(s)}")
    for a in sets:
        for b in sets:
            if len(a) < len(b) and not any(a | {e} in sets for e in b - a):
                raise ParameterError(f"exchange fails for {sorted(a)} and {sorted(b)}")


@lru_cache(maxsize=None)
def enumerate_matroids(n: int, max_rank: int) -> tuple:
    """Every matroid on an n-element ground set with rank at most ``max_rank``.

    Matroids are generated from their basis families and validated; the
    result is sorted for determinism.
    """
    out = []
    top = min(n, max_rank)
    for r in range(top + 1):
        ksets = list(combinations(range(n), r))
        for mask in range(1, 1 << len(ksets)):
            bases = [frozenset(ksets[t]) for t in range(len(ksets)) if mask >> t & 1]
            if not _basis_exchange(bases):
                continue
            out.append(MatroidDescriptor.from_bases(n, bases))
    out.sort(key=lambda m: (m.rank, m.bases()))
    return tuple(out)


def _basis_exchange(bases: list) -> bool:
    bs = set(bases)
    for a in bases:
        for b in bases:
            for x in a - b:
                if not any((a - {x}) | {y} in bs for y in b - a):
                    return False
    return True
