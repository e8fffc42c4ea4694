"""Exact breadth checkers for a support (or output stream) against a target."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .collection import Collection
from .core_sets import (
    EMPTY_SET,
    FMS,
    INFINITE,
    Cardinality,
    FiniteSet,
    SetLike,
    as_finite_set,
    fms_cardinality,
    fms_count_in,
    fms_difference_card,
    fms_intersection,
    fms_modify,
    fms_relate,
)


class Notion(str, Enum):
    EXACT = "EXACT"
    APPROX = "APPROX"
    EXHAUSTIVE = "EXHAUSTIVE"
    EXHAUSTIVE_VARIANT = "EXHAUSTIVE_VARIANT"
    UNAMBIGUOUS = "UNAMBIGUOUS"
    INFINITE_COVERAGE = "INFINITE_COVERAGE"
    INCREASING_COVERAGE = "INCREASING_COVERAGE"


class ExhaustiveVariant(str, Enum):
    FINITE_HALLUCINATION = "def6"
    NO_HALLUCINATION = "def18"


@dataclass(frozen=True)
class BreadthVerdict:
    notion: Notion
    holds: bool
    hallucination_card: Cardinality
    missing_card: Cardinality
    overlap_card: Cardinality | None = None
    rival: int | None = None
    bounded: bool = False

    def to_json(self) -> dict:
        out = {
            "holds": self.holds,
            "hallucination": self.hallucination_card.to_json(),
            "missing": self.missing_card.to_json(),
        }
        if self.overlap_card is not None:
            out["overlap"] = self.overlap_card.to_json()
        if self.rival is not None:
            out["rival"] = self.rival
        return out


def overlap_card(supp: FMS, k: FMS, missing: Cardinality) -> Cardinality:
    # targets are infinite, so missing finitely many leaves infinitely many present
    if missing.is_finite:
        return INFINITE
    return fms_cardinality(fms_intersection(supp, k))


def check_exact(supp: FMS, k: FMS, seen: SetLike = EMPTY_SET) -> BreadthVerdict:
    union = fms_modify(supp, plus=seen)
    rel = fms_relate(union, k)
    return BreadthVerdict(Notion.EXACT, rel.equal, rel.diff_card, rel.rdiff_card, overlap_card(union, k, rel.rdiff_card))


def check_approximate(supp: FMS, k: FMS) -> BreadthVerdict:
    rel = fms_relate(supp, k)
    holds = rel.subset and rel.rdiff_card.is_finite
    return BreadthVerdict(Notion.APPROX, holds, rel.diff_card, rel.rdiff_card, overlap_card(supp, k, rel.rdiff_card))


def check_exhaustive(
    stream: FMS,
    k: FMS,
    seen: SetLike = EMPTY_SET,
    prior_firsts: SetLike = EMPTY_SET,
    variant: ExhaustiveVariant | str = ExhaustiveVariant.FINITE_HALLUCINATION,
) -> BreadthVerdict:
    """Finite (or zero) hallucination plus coverage by seen, prior firsts and stream."""
    variant = ExhaustiveVariant(variant)
    hallucination = fms_difference_card(stream, k)
    cover = fms_modify(stream, plus=as_finite_set(seen).union(prior_firsts))
    missing = fms_difference_card(k, cover)
    if variant is ExhaustiveVariant.NO_HALLUCINATION:
        holds = hallucination == 0 and missing == 0
        notion = Notion.EXHAUSTIVE_VARIANT
    else:
        holds = hallucination.is_finite and missing == 0
        notion = Notion.EXHAUSTIVE
    return BreadthVerdict(notion, holds, hallucination, missing)


def check_unambiguous(supp: FMS, c: Collection, k_index: int, rival_bound: int = 50) -> BreadthVerdict:
    """Strictly closer to L_k than to every rival index <= rival_bound (flagged bounded)."""
    if rival_bound < 1:
        raise ValueError("rival_bound must be >= 1")
    k = c.language_at(k_index)
    rel = fms_relate(supp, k)
    m = rel.symdiff_card
    if m.is_infinite:
        return BreadthVerdict(Notion.UNAMBIGUOUS, False, rel.diff_card, rel.rdiff_card, bounded=True)
    for j in c.indices_upto(rival_bound):
        if j == k_index:
            continue
        if not m < fms_relate(supp, c.language_at(j)).symdiff_card:
            return BreadthVerdict(Notion.UNAMBIGUOUS, False, rel.diff_card, rel.rdiff_card, rival=j, bounded=True)
    return BreadthVerdict(Notion.UNAMBIGUOUS, True, rel.diff_card, rel.rdiff_card, bounded=True)


def check_infinite_coverage(supp: FMS, k: FMS, seen: SetLike = EMPTY_SET, allow_seen: bool = False) -> BreadthVerdict:
    """Subset of K, disjoint from the seen strings and infinite.

    ``allow_seen`` drops the disjointness clause, which gives an equivalent
    notion whenever the support is infinite (removing finitely many seen
    strings keeps it infinite).
    """
    rel = fms_relate(supp, k)
    size = fms_cardinality(supp)
    disjoint = allow_seen or fms_count_in(supp, seen) == 0
    holds = rel.subset and disjoint and size.is_infinite
    return BreadthVerdict(Notion.INFINITE_COVERAGE, holds, rel.diff_card, rel.rdiff_card, size if rel.subset else None)


def check_increasing_coverage(history: Sequence[FMS], k: FMS) -> BreadthVerdict:
    """Nested supports, each equal to K or strictly exceeded later in the history."""
    if not history:
        raise ValueError("history must contain at least one support")
    final = fms_relate(history[-1], k)
    runs: list[FMS] = [history[0]]
    for s in history[1:]:
        if s != runs[-1]:
            runs.append(s)
    nested = all(fms_relate(a, b).subset for a, b in zip(runs, runs[1:]))
    holds = nested
    if holds:
        last = runs[-1]
        for s in runs:
            if fms_relate(s, k).equal:
                continue
            # nested chain: strictly exceeded later iff different from the last snapshot
            if fms_relate(s, last).equal:
                holds = False
                break
    return BreadthVerdict(Notion.INCREASING_COVERAGE, holds, final.diff_card, final.rdiff_card)


# --------------------------------------------------------------------------
# extent classification for summary tables


class MissingExtent(str, Enum):
    NONE = "no missing elements"
    FINITE = "finitely many missing"
    INFINITE_PRESENT_INFINITE = "infinitely many missing, infinitely many present"
    INFINITE_PRESENT_FINITE = "infinitely many missing, finitely many present"


class HallucinationExtent(str, Enum):
    NONE = "no hallucinations"
    FINITE = "finitely many hallucinations"
    INFINITE = "infinitely many hallucinations"


def extent_cell(supp: FMS, k: FMS, seen: SetLike = EMPTY_SET) -> tuple[MissingExtent, HallucinationExtent]:
    """Locate a support in the missing-extent x hallucination-extent grid.

    Missing elements are counted against ``supp ∪ seen`` so that strings the
    generator has already observed are not held against it.
    """
    union = fms_modify(supp, plus=seen)
    rel = fms_relate(union, k)
    missing = rel.rdiff_card
    if missing == 0:
        row = MissingExtent.NONE
    elif missing.is_finite:
        row = MissingExtent.FINITE
    elif fms_cardinality(fms_intersection(union, k)).is_infinite:
        row = MissingExtent.INFINITE_PRESENT_INFINITE
    else:
        row = MissingExtent.INFINITE_PRESENT_FINITE
    hall = rel.diff_card
    col = HallucinationExtent.NONE if hall == 0 else HallucinationExtent.FINITE if hall.is_finite else HallucinationExtent.INFINITE
    return row, col


def evaluate(
    notion: Notion | str,
    support: FMS,
    k: FMS,
    seen: FiniteSet = EMPTY_SET,
    prior_firsts: FiniteSet = EMPTY_SET,
    collection: Collection | None = None,
    k_index: int | None = None,
    rival_bound: int = 50,
) -> BreadthVerdict:
    """Dispatch one notion on a generator's current support or stream."""
    notion = Notion(notion)
    if notion is Notion.EXACT:
        return check_exact(support, k, seen)
    if notion is Notion.APPROX:
        return check_approximate(support, k)
    if notion is Notion.EXHAUSTIVE:
        return check_exhaustive(support, k, seen, prior_firsts, ExhaustiveVariant.FINITE_HALLUCINATION)
    if notion is Notion.EXHAUSTIVE_VARIANT:
        return check_exhaustive(support, k, seen, prior_firsts, ExhaustiveVariant.NO_HALLUCINATION)
    if notion is Notion.UNAMBIGUOUS:
        if collection is None or k_index is None:
            raise ValueError("unambiguity needs the collection and the target index")
        return check_unambiguous(support, collection, k_index, rival_bound)
    if notion is Notion.INFINITE_COVERAGE:
        return check_infinite_coverage(support, k, seen)
    raise ValueError(f"{notion.value} is judged on a support history, not a single step")
