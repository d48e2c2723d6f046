"""Definition-level reference for the MP search: plain sets, no grouping."""

from itertools import chain, combinations


def closure_pairs(elements, pairs):
    rel = {(x, x) for x in elements} | set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return rel


def nonempty_subsets(elements, max_size=None):
    top = len(elements) if max_size is None else max_size
    return [frozenset(c) for c in chain.from_iterable(combinations(elements, r) for r in range(1, top + 1))]


def ub(elements, rel, subset):
    return frozenset(x for x in elements if all((a, x) in rel for a in subset))


def holds(elements, rel, A, B):
    if A & B:
        return False
    if ub(elements, rel, A) != ub(elements, rel, B):
        return False
    cond_a = any(not any((a, b) in rel for b in B) for a in A)
    cond_b = any(not any((b, a) in rel for a in A) for b in B)
    return cond_a and cond_b


def all_mp_pairs(elements, rel, max_size=None):
    subsets = nonempty_subsets(elements, max_size)
    found = set()
    for A in subsets:
        for B in subsets:
            if holds(elements, rel, A, B):
                found.add(frozenset((A, B)))
    return found
