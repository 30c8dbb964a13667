"""Exact combinatorics of weighted rooted labelled trees.

The law of interest puts mass prod_i p_i^(number of children of i) on each
rooted labelled tree over [n] (Cayley's multinomial formula).  Enumeration is
brute force over parent functions with cycle rejection, which is trivially
fast and obviously correct for the n <= 5 used in the tests.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

MAX_ENUM_N = 5


@dataclass(frozen=True)
class PTree:
    """Rooted labelled tree on vertices 1..n via a parent tuple.

    parent[i-1] is the parent of vertex i, and 0 at the root.
    """

    n: int
    parent: tuple

    def __post_init__(self):
        if len(self.parent) != self.n:
            raise ValueError("parent tuple has wrong length")
        roots = [i for i in range(1, self.n + 1) if self.parent[i - 1] == 0]
        if len(roots) != 1:
            raise ValueError("tree must have exactly one root")
        for i in range(1, self.n + 1):
            seen = set()
            v = i
            while v != 0:
                if v in seen:
                    raise ValueError("parent mapping contains a cycle")
                seen.add(v)
                v = self.parent[v - 1]

    @property
    def root(self):
        return next(i for i in range(1, self.n + 1) if self.parent[i - 1] == 0)

    def child_counts(self):
        counts = [0] * self.n
        for i in range(1, self.n + 1):
            p = self.parent[i - 1]
            if p:
                counts[p - 1] += 1
        return counts

    def canonical(self):
        return self.parent

    def to_json(self):
        return {"n": self.n, "parent": list(self.parent)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["n"], tuple(obj["parent"]))


def cayley_pmf(p, tree: PTree):
    """prod_i p_i^(children of i); exact when the weights are Fractions."""
    if len(p) != tree.n:
        raise ValueError("weights do not match the vertex count")
    prob = p[0] ** 0
    for i, kappa in enumerate(tree.child_counts()):
        prob = prob * p[i] ** kappa
    return prob


def _is_tree(parent, n):
    for i in range(1, n + 1):
        v = i
        steps = 0
        while v != 0:
            v = parent[v - 1]
            steps += 1
            if steps > n:
                return False
    return True


@lru_cache(maxsize=None)
def enumerate_rooted_trees(n):
    """All n^(n-1) rooted labelled trees on [n], in canonical order."""
    if not 1 <= n <= MAX_ENUM_N:
        raise ValueError(f"n must lie in [1, {MAX_ENUM_N}]")
    trees = []
    for root in range(1, n + 1):
        others = [i for i in range(1, n + 1) if i != root]
        for choice in product(range(1, n + 1), repeat=n - 1):
            parent = [0] * n
            for v, p in zip(others, choice):
                parent[v - 1] = p
            if _is_tree(parent, n):
                trees.append(PTree(n, tuple(parent)))
    trees.sort(key=lambda t: t.parent)
    return tuple(trees)


def shape_census(trees):
    """Frequency table of canonical forms; cemetery outcomes are their own
    cell.  All LabelledTree inputs must share the same leaf count."""
    table = Counter()
    ks = set()
    for t in trees:
        key = t.canonical()
        if hasattr(t, "k"):
            ks.add(t.k)
        table[key] += 1
    if len(ks) > 1:
        raise ValueError("census over mixed leaf counts")
    return table
