"""Bounded checkers for tell-tale conditions and the closure dimension."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

from .collection import Collection, TellTaleKind
from .core_sets import (
    FiniteSet,
    as_finite_set,
    fms_count_in,
    fms_enumerate,
    fms_intersection,
    fms_is_infinite,
    fms_iter,
    fms_member,
)
from .errors import ContractViolation, NoTellTale


@dataclass(frozen=True)
class SearchBounds:
    max_index: int
    max_telltale_size: int
    domain_horizon: int
    chain_depth: int = 3

    def __post_init__(self) -> None:
        if self.max_index < 0:
            raise ValueError("max_index must be >= 0")
        for name in ("max_telltale_size", "domain_horizon", "chain_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


class Verdict(str, Enum):
    VERIFIED = "verified"
    REFUTED = "refuted within bounds"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TellTaleTable:
    kind: TellTaleKind
    entries: dict[int, FiniteSet]


@dataclass(frozen=True)
class ChainLink:
    telltale: FiniteSet
    index: int


@dataclass(frozen=True)
class ConditionCertificate:
    kind: TellTaleKind
    verdict: Verdict
    bounds: SearchBounds
    telltales: TellTaleTable | None = None
    star_index: int | None = None
    witness_chain: tuple[ChainLink, ...] = ()
    unresolved: tuple[int, ...] = ()
    sources: dict[int, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {
            "condition": "angluin" if self.kind is TellTaleKind.STRONG else "weak_angluin",
            "verdict": self.verdict.value,
            "bounds": {
                "max_index": self.bounds.max_index,
                "max_telltale_size": self.bounds.max_telltale_size,
                "domain_horizon": self.bounds.domain_horizon,
                "chain_depth": self.bounds.chain_depth,
            },
        }
        if self.telltales is not None:
            out["telltales"] = {str(i): list(t.sorted()) for i, t in sorted(self.telltales.entries.items())}
            out["sources"] = {str(i): s for i, s in sorted(self.sources.items())}
        if self.star_index is not None:
            out["star_index"] = self.star_index
            out["witness_chain"] = [{"T": list(l.telltale.sorted()), "L_T": l.index} for l in self.witness_chain]
        if self.unresolved:
            out["unresolved"] = list(self.unresolved)
        return out


def _bad_indices(c: Collection, i: int, indices: list[int], kind: TellTaleKind) -> list[int]:
    """Indices whose language would violate the clause for L_i if it covered T_i."""
    bad = []
    for j in indices:
        if not c.is_proper_subset(j, i):
            continue
        if kind is TellTaleKind.WEAK and c.has_finite_difference(i, j):
            continue
        bad.append(j)
    return bad


def telltale_passes(c: Collection, i: int, t: FiniteSet, kind: TellTaleKind, indices: list[int]) -> bool:
    """Re-check the tell-tale clause for ``T`` against every index in ``indices``."""
    if not all(c.member(i, x) for x in t):
        return False
    for j in _bad_indices(c, i, indices, kind):
        if all(c.member(j, x) for x in t):
            return False
    return True


def _search_telltale(c: Collection, i: int, kind: TellTaleKind, b: SearchBounds, indices: list[int]) -> FiniteSet | None:
    bad = _bad_indices(c, i, indices, kind)
    pool = fms_enumerate(c.language_at(i), b.domain_horizon)
    for size in range(0, b.max_telltale_size + 1):
        for combo in itertools.combinations(pool, size):
            if all(any(not c.member(j, x) for x in combo) for j in bad):
                return FiniteSet(combo)
    return None


def link_is_valid(c: Collection, star: int, link: ChainLink, kind: TellTaleKind) -> bool:
    t, j = link.telltale, link.index
    if not all(c.member(star, x) and c.member(j, x) for x in t):
        return False
    if not c.is_proper_subset(j, star):
        return False
    return kind is TellTaleKind.STRONG or not c.has_finite_difference(star, j)


def _first_missing(c: Collection, star: int, j: int, horizon: int) -> int | None:
    lang = c.language_at(j)
    for x in itertools.islice(fms_iter(c.language_at(star)), horizon):
        if not fms_member(lang, x):
            return x
    return None


def _refutation_chain(
    c: Collection, star: int, kind: TellTaleKind, b: SearchBounds, indices: list[int]
) -> tuple[ChainLink, ...] | None:
    declared = (star, kind) in c.violation_points
    first = fms_enumerate(c.language_at(star), 1)
    t = FiniteSet(first)
    chain: list[ChainLink] = []
    for _ in range(b.chain_depth):
        if declared:
            j = c.violation_rule(star, t, kind)
        else:
            j = next(
                (j for j in indices if link_is_valid(c, star, ChainLink(t, j), kind)),
                None,
            )
            if j is None:
                return None
        link = ChainLink(t, j)
        if not link_is_valid(c, star, link, kind):
            return None
        chain.append(link)
        nxt = _first_missing(c, star, j, b.domain_horizon * 10)
        if nxt is None:
            return None
        t = t.union((nxt,))
    return tuple(chain)


def _check(c: Collection, b: SearchBounds, kind: TellTaleKind) -> ConditionCertificate:
    indices = c.indices_upto(b.max_index)
    flag = "telltale_strong" if kind is TellTaleKind.STRONG else "telltale_weak"
    entries: dict[int, FiniteSet] = {}
    sources: dict[int, str] = {}
    unresolved: list[int] = []
    for i in indices:
        provably_none = False
        if getattr(c.capabilities, flag):
            try:
                t = c.telltale(i, kind)
            except NoTellTale:
                provably_none = True
            else:
                if telltale_passes(c, i, t, kind, indices):
                    entries[i], sources[i] = t, "declared"
                    continue
        if not provably_none:
            found = _search_telltale(c, i, kind, b, indices)
            if found is not None:
                entries[i], sources[i] = found, "searched"
                continue
        chain = _refutation_chain(c, i, kind, b, indices)
        if chain is not None:
            return ConditionCertificate(kind, Verdict.REFUTED, b, star_index=i, witness_chain=chain)
        unresolved.append(i)
    if unresolved:
        return ConditionCertificate(kind, Verdict.UNKNOWN, b, unresolved=tuple(unresolved))
    return ConditionCertificate(kind, Verdict.VERIFIED, b, TellTaleTable(kind, entries), sources=sources)


def check_angluin(c: Collection, b: SearchBounds) -> ConditionCertificate:
    return _check(c, b, TellTaleKind.STRONG)


def check_weak_angluin(c: Collection, b: SearchBounds) -> ConditionCertificate:
    return _check(c, b, TellTaleKind.WEAK)


@dataclass(frozen=True)
class ClosureDimension:
    """``value`` is a lower bound only when ``at_least`` is set.

    ``defined`` is False when no tuple of any size up to the bound has a
    non-empty version space with finite intersection; ``value`` is then 0.
    """

    value: int
    at_least: bool
    witness: FiniteSet
    defined: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "at_least": self.at_least,
            "witness": list(self.witness.sorted()),
            "defined": self.defined,
        }


def closure_dimension(c: Collection, b: SearchBounds) -> ClosureDimension:
    """Largest tuple size whose version space over indices <= max_index has a finite intersection."""
    indices = c.indices_upto(b.max_index)
    full_mask = (1 << len(indices)) - 1
    masks = []
    for x in range(1, b.domain_horizon + 1):
        m = 0
        for bit, i in enumerate(indices):
            if c.member(i, x):
                m |= 1 << bit
        masks.append(m)
    finite_cache: dict[int, bool] = {}

    def finite_intersection(mask: int) -> bool:
        hit = finite_cache.get(mask)
        if hit is None:
            chosen = [i for bit, i in enumerate(indices) if mask >> bit & 1]
            inter = c.language_at(chosen[0])
            for i in chosen[1:]:
                inter = fms_intersection(inter, c.language_at(i))
            hit = finite_cache[mask] = not fms_is_infinite(inter)
        return hit

    ids = range(1, b.domain_horizon + 1)
    for size in range(b.max_telltale_size, -1, -1):
        for combo in itertools.combinations(range(len(masks)), size):
            mask = full_mask
            for k in combo:
                mask &= masks[k]
                if not mask:
                    break
            if mask and finite_intersection(mask):
                witness = FiniteSet(ids[k] for k in combo)
                return ClosureDimension(size, size == b.max_telltale_size, witness, True)
    return ClosureDimension(0, False, FiniteSet(), False)


def violation_witness(c: Collection, star: int, t, kind: TellTaleKind | str) -> int:
    """An index j with T ⊆ L_j ⊊ L_star (and infinite difference for weak)."""
    t = as_finite_set(t)
    kind = TellTaleKind(kind)
    if fms_count_in(c.language_at(star), t) != len(t):
        raise ContractViolation("T must be a subset of L_star")
    return c.violation_rule(star, t, kind)
