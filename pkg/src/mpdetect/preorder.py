"""Finite preorders, upper-bound sets and a checker for the sufficient
condition of the multiplicity principle (MP).

Two disjoint subsets A and B of a preorder witness the MP when

1. A and B have the same set of upper bounds,
2. some a in A has no upper bound in B,
3. some b in B has no upper bound in A.

Subsets are handled internally as integer bitmasks over element indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ParameterError
from .evaluate import ComparisonVerdict, EvalReport, Outcome, growth_flags

MAX_SEARCH_ELEMENTS = 64
MAX_SEARCH_SUBSET = 4


@dataclass(frozen=True)
class FinitePreorder:
    """Reflexive, transitive relation on ``elements``.

    ``up[i]`` is the bitmask of all ``j`` with ``elements[i] <= elements[j]``.
    Use :func:`build` rather than the constructor.
    """

    elements: tuple[str, ...]
    up: tuple[int, ...]
    notes: tuple[str, ...] = field(default=(), compare=False)

    def index(self, x: str) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise ParameterError(f"unknown element {x!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.elements)}

    def leq(self, x: str, y: str) -> bool:
        return bool(self.up[self.index(x)] >> self.index(y) & 1)

    def matrix(self) -> list[list[bool]]:
        size = len(self.elements)
        return [[bool(self.up[i] >> j & 1) for j in range(size)] for i in range(size)]

    def pairs(self) -> list[tuple[str, str]]:
        """Non-reflexive related pairs in element order."""
        return [
            (x, y)
            for i, x in enumerate(self.elements)
            for j, y in enumerate(self.elements)
            if i != j and self.up[i] >> j & 1
        ]

    def mask(self, subset: Iterable[str]) -> int:
        m = 0
        for x in subset:
            m |= 1 << self.index(x)
        return m

    def names(self, mask: int) -> frozenset[str]:
        return frozenset(e for i, e in enumerate(self.elements) if mask >> i & 1)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.elements)) - 1


def _closure(up: list[int]) -> list[int]:
    # Warshall on bitmask rows
    size = len(up)
    for k in range(size):
        bit = 1 << k
        row_k = up[k]
        for i in range(size):
            if up[i] & bit:
                up[i] |= row_k
    return up


def build(
    elements: Sequence[str],
    relation_pairs: Iterable[tuple[str, str]] = (),
    notes: Sequence[str] = (),
) -> FinitePreorder:
    """Reflexive-transitive closure of ``relation_pairs`` (each ``(x, y)``
    meaning ``x <= y``)."""
    elems = tuple(elements)
    if len(set(elems)) != len(elems):
        raise ParameterError("duplicate element identifiers")
    index = {e: i for i, e in enumerate(elems)}
    up = [1 << i for i in range(len(elems))]
    for x, y in relation_pairs:
        if x not in index or y not in index:
            raise ParameterError(f"relation ({x!r}, {y!r}) references an unknown element")
        up[index[x]] |= 1 << index[y]
    return FinitePreorder(elems, tuple(_closure(up)), tuple(notes))


def _ub_mask(P: FinitePreorder, mask: int) -> int:
    result = P.full_mask
    i = 0
    while mask:
        if mask & 1:
            result &= P.up[i]
        mask >>= 1
        i += 1
    return result


def upper_bounds(P: FinitePreorder, A: Iterable[str]) -> frozenset[str]:
    """Elements above every member of ``A``; the whole set when ``A`` is empty."""
    return P.names(_ub_mask(P, P.mask(A)))


@dataclass(frozen=True)
class MPResult:
    holds: bool
    disjoint: bool
    cond_upper_bounds_equal: bool
    cond_a_witness: str | None
    cond_b_witness: str | None
    failing_detail: str = ""

    @property
    def failing_condition(self) -> str | None:
        if not self.disjoint:
            return "disjointness"
        if not self.cond_upper_bounds_equal:
            return "(i)"
        if self.cond_a_witness is None:
            return "(ii)"
        if self.cond_b_witness is None:
            return "(iii)"
        return None


def _first_without_bound_in(P: FinitePreorder, mask: int, other: int) -> int | None:
    for i in range(len(P.elements)):
        if mask >> i & 1 and not P.up[i] & other:
            return i
    return None


def _fmt(names: Iterable[str]) -> str:
    return "{" + ", ".join(sorted(names)) + "}"


def mp_verify(P: FinitePreorder, A: Iterable[str], B: Iterable[str]) -> MPResult:
    a_mask, b_mask = P.mask(A), P.mask(B)
    if not a_mask or not b_mask:
        raise ParameterError("A and B must be nonempty")
    disjoint = not a_mask & b_mask
    ub_a, ub_b = _ub_mask(P, a_mask), _ub_mask(P, b_mask)
    same = ub_a == ub_b
    wa = _first_without_bound_in(P, a_mask, b_mask)
    wb = _first_without_bound_in(P, b_mask, a_mask)
    holds = disjoint and same and wa is not None and wb is not None

    detail = ""
    if not disjoint:
        detail = f"A and B share {_fmt(P.names(a_mask & b_mask))}"
    elif not same:
        detail = (
            f"(i) fails: upper bounds of A are {_fmt(P.names(ub_a))}, "
            f"upper bounds of B are {_fmt(P.names(ub_b))}"
        )
    elif wa is None:
        detail = "(ii) fails: every element of A has an upper bound in B"
    elif wb is None:
        detail = "(iii) fails: every element of B has an upper bound in A"
    return MPResult(
        holds=holds,
        disjoint=disjoint,
        cond_upper_bounds_equal=same,
        cond_a_witness=None if wa is None else P.elements[wa],
        cond_b_witness=None if wb is None else P.elements[wb],
        failing_detail=detail,
    )


def _subset_masks(size: int, k: int) -> list[int]:
    out = []
    for r in range(1, k + 1):
        for combo in combinations(range(size), r):
            m = 0
            for i in combo:
                m |= 1 << i
            out.append(m)
    return out


def _mp_pairs_from_masks(P: FinitePreorder, masks: list[int]) -> list[tuple[int, int]]:
    groups: dict[int, list[int]] = {}
    for m in masks:
        groups.setdefault(_ub_mask(P, m), []).append(m)
    found = []
    for members in groups.values():
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                if a & b:
                    continue
                if _first_without_bound_in(P, a, b) is None or _first_without_bound_in(P, b, a) is None:
                    continue
                found.append((a, b))
    return found


def _canonical(P: FinitePreorder, a: int, b: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    def key(mask: int) -> tuple[int, ...]:
        return tuple(i for i in range(len(P.elements)) if mask >> i & 1)

    first, second = sorted((a, b), key=lambda m: (bin(m).count("1"), key(m)))
    return (
        tuple(P.elements[i] for i in key(first)),
        tuple(P.elements[i] for i in key(second)),
    )


def mp_search(P: FinitePreorder, max_subset_size: int) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """All disjoint pairs ``(A, B)`` with ``|A|, |B| <= max_subset_size``
    satisfying :func:`mp_verify`, each reported once up to swapping.

    Candidates are grouped by their upper-bound set so only pairs sharing
    it are tested.
    """
    if len(P.elements) > MAX_SEARCH_ELEMENTS:
        raise ParameterError(f"mp_search is capped at {MAX_SEARCH_ELEMENTS} elements")
    if not 1 <= max_subset_size <= MAX_SEARCH_SUBSET:
        raise ParameterError(f"max_subset_size must lie in [1, {MAX_SEARCH_SUBSET}]")
    masks = _subset_masks(len(P.elements), min(max_subset_size, len(P.elements)))
    pairs = {_canonical(P, a, b) for a, b in _mp_pairs_from_masks(P, masks)}
    order = {e: i for i, e in enumerate(P.elements)}
    return sorted(pairs, key=lambda ab: (len(ab[0]), len(ab[1]), [order[x] for x in ab[0]], [order[x] for x in ab[1]]))


def build_empirical(
    elements: Sequence[str], verdicts: Sequence[ComparisonVerdict], oracle_id: str
) -> FinitePreorder:
    """Preorder induced by pairwise comparison verdicts plus ``x <= oracle``
    for every element."""
    elems = list(elements)
    if oracle_id not in elems:
        raise ParameterError(f"oracle {oracle_id!r} missing from the element list")
    covered = {frozenset(v.pair) for v in verdicts}
    missing = [
        (x, y) for x, y in combinations(elems, 2) if frozenset((x, y)) not in covered
        and oracle_id not in (x, y)
    ]
    if missing:
        raise ParameterError(f"verdicts do not cover pairs {missing}")
    pairs = [(x, oracle_id) for x in elems]
    notes = []
    for v in verdicts:
        f, g = v.pair
        if v.outcome is Outcome.LEFT_BELOW:
            pairs.append((f, g))
        elif v.outcome is Outcome.RIGHT_BELOW:
            pairs.append((g, f))
        elif v.outcome is Outcome.EQUIVALENT:
            pairs += [(f, g), (g, f)]
        elif v.outcome is Outcome.UNDECIDED:
            notes.append(f"undecided: {f} vs {g}" + (f" ({v.note})" if v.note else ""))
    return build(elems, pairs, notes)


@dataclass(frozen=True)
class TruncationDiagnostic:
    external_bounds_a: frozenset[str]
    external_bounds_b: frozenset[str]
    external_bounds_equal: bool
    no_cross_bounds: bool
    growth: dict[str, list[bool]]
    growth_ok: bool

    @property
    def consistent(self) -> bool:
        return self.external_bounds_equal and self.no_cross_bounds and self.growth_ok

    @property
    def verdict(self) -> str:
        return "consistent" if self.consistent else "inconsistent"


def _top_of(P: FinitePreorder, family: Sequence[str]) -> str:
    # member with the most of the family below it; first one wins ties
    return max(family, key=lambda x: sum(P.leq(y, x) for y in family))


def truncated_family_mp_diagnostic(
    P: FinitePreorder,
    A: Sequence[str],
    B: Sequence[str],
    external: Iterable[str] | None = None,
    curves: dict[str, Sequence[EvalReport]] | None = None,
) -> TruncationDiagnostic:
    """Check what a finite truncation of two growing families can show about
    the MP in the limit.

    (a) both families have the same upper bounds outside themselves,
    (b) the top member of each family has no upper bound in the other,
    (c) detection rates grow along each family (when ``curves`` is given).
    """
    a_mask, b_mask = P.mask(A), P.mask(B)
    if not a_mask or not b_mask:
        raise ParameterError("A and B must be nonempty")
    if a_mask & b_mask:
        raise ParameterError("A and B must be disjoint")
    ext_mask = P.full_mask & ~(a_mask | b_mask)
    if external is not None and P.mask(external) != ext_mask:
        raise ParameterError("external must be the complement of A and B")

    ext_a = _ub_mask(P, a_mask) & ext_mask
    ext_b = _ub_mask(P, b_mask) & ext_mask
    top_a, top_b = _top_of(P, list(A)), _top_of(P, list(B))
    no_cross = not P.up[P.index(top_a)] & b_mask and not P.up[P.index(top_b)] & a_mask
    growth = {name: growth_flags(curve) for name, curve in (curves or {}).items()}
    return TruncationDiagnostic(
        external_bounds_a=P.names(ext_a),
        external_bounds_b=P.names(ext_b),
        external_bounds_equal=ext_a == ext_b,
        no_cross_bounds=no_cross,
        growth=growth,
        growth_ok=all(all(flags) for flags in growth.values()),
    )


def dumps(P: FinitePreorder) -> str:
    """Edge-list text: element ids on the first line, then ``x <= y`` lines."""
    lines = [" ".join(P.elements)]
    lines += [f"{x} <= {y}" for x, y in P.pairs()]
    return "\n".join(lines) + "\n"


def loads(text: str) -> FinitePreorder:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParameterError("empty preorder file")
    elements = lines[0].split()
    pairs = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3 or parts[1] != "<=":
            raise ParameterError(f"malformed relation line {ln!r}")
        pairs.append((parts[0], parts[2]))
    return build(elements, pairs)
