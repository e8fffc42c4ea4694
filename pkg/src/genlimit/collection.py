"""Builtin language collections with closed-form oracle suites."""

from __future__ import annotations

import dataclasses
import math
import weakref
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterator

from sympy import prime, primefactors

from .core_sets import (
    EMPTY_BASE,
    EMPTY_FMS,
    FMS,
    FULL_BASE,
    FiniteSet,
    SetLike,
    as_finite_set,
    fms,
    fms_intersection,
    fms_member,
    fms_relate,
    mult,
    parity,
    suffix,
    zigzag_decode,
    zigzag_encode,
)
from .errors import (
    CapabilityMissing,
    ContractViolation,
    EmptyVersionSpace,
    IndexOutOfRange,
    NoTellTale,
    NotAViolationPoint,
)


class CollectionName(str, Enum):
    SINGLE_REMOVAL = "SINGLE_REMOVAL"
    SUFFIXES = "SUFFIXES"
    PRIME_MULTIPLES = "PRIME_MULTIPLES"
    PARITY_DEMO = "PARITY_DEMO"


class TellTaleKind(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


CAPABILITY_FLAGS = ("membership", "subset", "finite_difference", "telltale_strong", "telltale_weak", "vsi")


@dataclass(frozen=True)
class Capabilities:
    membership: bool = True
    subset: bool = True
    finite_difference: bool = True
    telltale_strong: bool = True
    telltale_weak: bool = True
    vsi: bool = True

    def without(self, *flags: str) -> "Capabilities":
        unknown = set(flags) - set(CAPABILITY_FLAGS)
        if unknown:
            raise ValueError(f"unknown capability flags: {sorted(unknown)}")
        return dataclasses.replace(self, **{f: False for f in flags})

    def missing(self, required: tuple[str, ...]) -> list[str]:
        return [f for f in required if not getattr(self, f)]


class Collection:
    """An indexed family of infinite languages over domain ids.

    Subclasses provide ``_language``, ``_telltale``, ``_witness`` and
    ``_vsi``.  ``first_index``/``last_index`` bound the index range
    (``last_index`` is None for infinite collections).
    """

    name: CollectionName
    first_index: int = 0
    last_index: int | None = None
    violation_points: frozenset[tuple[int, TellTaleKind]] = frozenset()

    def __init__(self, capabilities: Capabilities | None = None):
        self.capabilities = capabilities or Capabilities()
        self._languages: dict[int, FMS] = {}
        self._subset: dict[tuple[int, int], bool] = {}
        self._telltales: dict[tuple[int, TellTaleKind], FiniteSet | NoTellTale] = {}

    def restricted(self, *flags: str) -> "Collection":
        return type(self)(self.capabilities.without(*flags))

    def __repr__(self) -> str:
        return f"<{self.name.value}>"

    # -- indexing ----------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.last_index is not None

    def check_index(self, i: int) -> None:
        if i < self.first_index or (self.last_index is not None and i > self.last_index):
            raise IndexOutOfRange(f"{self.name.value} has no index {i}")

    def index_at(self, k: int) -> int | None:
        """The k-th valid index (0-based position), or None past the end."""
        i = self.first_index + k
        if self.last_index is not None and i > self.last_index:
            return None
        return i

    def indices(self, limit: int | None = None) -> Iterator[int]:
        k = 0
        while limit is None or k < limit:
            i = self.index_at(k)
            if i is None:
                return
            yield i
            k += 1

    def indices_upto(self, max_index: int) -> list[int]:
        top = max_index if self.last_index is None else min(max_index, self.last_index)
        return list(range(self.first_index, top + 1))

    # -- value coding ------------------------------------------------------

    def encode(self, value: int) -> int:
        return value

    def decode(self, x: int) -> int:
        return x

    # -- languages ---------------------------------------------------------

    def language_at(self, i: int) -> FMS:
        lang = self._languages.get(i)
        if lang is None:
            self.check_index(i)
            lang = self._languages[i] = self._language(i)
        return lang

    def describe(self, i: int) -> str:
        return str(self.language_at(i))

    def member(self, i: int, x: int) -> bool:
        return fms_member(self.language_at(i), x)

    def is_subset(self, i: int, j: int) -> bool:
        key = (i, j)
        hit = self._subset.get(key)
        if hit is None:
            hit = self._subset[key] = i == j or fms_relate(self.language_at(i), self.language_at(j)).subset
        return hit

    def is_proper_subset(self, i: int, j: int) -> bool:
        return i != j and self.is_subset(i, j) and not self.is_subset(j, i)

    def has_finite_difference(self, big: int, small: int) -> bool:
        """Whether ``|L_big \\ L_small|`` is finite (no contract check)."""
        return fms_relate(self.language_at(big), self.language_at(small)).diff_card.is_finite

    def telltale(self, i: int, kind: TellTaleKind) -> FiniteSet:
        key = (i, TellTaleKind(kind))
        hit = self._telltales.get(key)
        if hit is None:
            self.check_index(i)
            try:
                hit = as_finite_set(self._telltale(i, key[1]))
            except NoTellTale as exc:
                hit = exc
            self._telltales[key] = hit
        if isinstance(hit, NoTellTale):
            raise hit
        return hit

    def violation_rule(self, star: int, t: FiniteSet, kind: TellTaleKind) -> int:
        if (star, TellTaleKind(kind)) not in self.violation_points:
            raise NotAViolationPoint(f"{self.name.value} index {star} under {kind} tell-tales")
        return self._witness(star, t, TellTaleKind(kind))

    def vsi(self, samples: SetLike) -> FMS:
        """Intersection of every language consistent with ``samples``."""
        return self._vsi(as_finite_set(samples))

    def version_space(self, samples: SetLike, max_index: int) -> list[int]:
        samples = as_finite_set(samples)
        return [i for i in self.indices_upto(max_index) if all(self.member(i, x) for x in samples)]

    # -- subclass hooks ----------------------------------------------------

    def _language(self, i: int) -> FMS:
        raise NotImplementedError

    def _telltale(self, i: int, kind: TellTaleKind) -> SetLike:
        raise NotImplementedError

    def _witness(self, star: int, t: FiniteSet, kind: TellTaleKind) -> int:
        raise NotImplementedError

    def _vsi(self, samples: FiniteSet) -> FMS:
        raise NotImplementedError


class SingleRemoval(Collection):
    """N at index 0 and N minus {i} at index i."""

    name = CollectionName.SINGLE_REMOVAL
    violation_points = frozenset({(0, TellTaleKind.STRONG)})

    def __init__(self, capabilities: Capabilities | None = None):
        super().__init__(capabilities)
        # smallest-missing is monotone along a growing log: remember where to resume
        self._mex_hint: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()

    def _language(self, i: int) -> FMS:
        return fms(FULL_BASE, sub=(i,) if i else ())

    def _telltale(self, i: int, kind: TellTaleKind) -> SetLike:
        if i == 0:
            if kind is TellTaleKind.STRONG:
                raise NoTellTale("every finite subset of N lies in some N \\ {j}")
            return (1,)
        # no language is a proper subset of N \ {i}
        return ()

    def _witness(self, star: int, t: FiniteSet, kind: TellTaleKind) -> int:
        source = t.source
        j = 1
        if source is not None:
            log, n = source
            hint_n, hint_j = self._mex_hint.get(log, (0, 1))
            if hint_n <= n:
                j = hint_j
        while j in t:
            j += 1
        if source is not None:
            self._mex_hint[source[0]] = (source[1], j)
        return j

    def _vsi(self, samples: FiniteSet) -> FMS:
        # N and every N \ {j} with j unseen: only the samples survive
        return fms(EMPTY_BASE, add=samples)


class Suffixes(Collection):
    """Z at index 0 and the suffix {a, a+1, ...} with a = decode(i) at index i."""

    name = CollectionName.SUFFIXES
    violation_points = frozenset({(0, TellTaleKind.STRONG), (0, TellTaleKind.WEAK)})

    def encode(self, value: int) -> int:
        return zigzag_encode(value)

    def decode(self, x: int) -> int:
        return zigzag_decode(x)

    def index_of_suffix(self, a: int) -> int:
        return zigzag_encode(a)

    def _language(self, i: int) -> FMS:
        return fms(FULL_BASE) if i == 0 else fms(suffix(zigzag_decode(i)))

    def _telltale(self, i: int, kind: TellTaleKind) -> SetLike:
        if i == 0:
            raise NoTellTale("every finite subset of Z lies in a suffix missing infinitely many integers")
        return (i,)  # the id of the suffix's least element a is i itself

    def __init__(self, capabilities: Capabilities | None = None):
        super().__init__(capabilities)
        # running minimum of decoded values along a growing log
        self._min_hint: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()

    def _min_value(self, t: FiniteSet) -> int:
        source = t.source
        if source is None:
            return min(zigzag_decode(x) for x in t)
        log, n = source
        done, low = self._min_hint.get(log, (0, None))
        if done > n:
            done, low = 0, None
        for x in log.items[done:n]:
            v = zigzag_decode(x)
            if low is None or v < low:
                low = v
        self._min_hint[log] = (n, low)
        return low

    def _witness(self, star: int, t: FiniteSet, kind: TellTaleKind) -> int:
        if not t:
            return zigzag_encode(0)
        return zigzag_encode(self._min_value(t))

    def _vsi(self, samples: FiniteSet) -> FMS:
        if not samples:
            return EMPTY_FMS
        return fms(suffix(min(zigzag_decode(x) for x in samples)))


class PrimeMultiples(Collection):
    """Index i >= 1 holds the positive multiples of the i-th prime."""

    name = CollectionName.PRIME_MULTIPLES
    first_index = 1

    def prime_at(self, i: int) -> int:
        self.check_index(i)
        return _prime(i)

    def _language(self, i: int) -> FMS:
        return fms(mult(_prime(i)))

    def _telltale(self, i: int, kind: TellTaleKind) -> SetLike:
        return (_prime(i),)

    def _vsi(self, samples: FiniteSet) -> FMS:
        if not samples:
            return EMPTY_FMS
        g = math.gcd(*samples.sorted())
        factors = primefactors(g)
        if not factors:
            raise EmptyVersionSpace("no prime divides every sample")
        return fms(mult(math.prod(factors)))


class ParityDemo(Collection):
    """Two languages over codes v + 1 of N_0: even values, and odd values plus 0."""

    name = CollectionName.PARITY_DEMO
    first_index = 1
    last_index = 2

    def encode(self, value: int) -> int:
        if value < 0:
            raise ValueError("PARITY_DEMO values are non-negative")
        return value + 1

    def decode(self, x: int) -> int:
        return x - 1

    def _language(self, i: int) -> FMS:
        if i == 1:
            return fms(parity(0))
        return fms(parity(1), add=(self.encode(0),))

    def _telltale(self, i: int, kind: TellTaleKind) -> SetLike:
        return (self.encode(0),) if i == 1 else (self.encode(1),)

    def _vsi(self, samples: FiniteSet) -> FMS:
        consistent = self.version_space(samples, self.last_index)
        if not consistent:
            raise EmptyVersionSpace("no language contains every sample")
        result = self.language_at(consistent[0])
        for i in consistent[1:]:
            result = fms_intersection(result, self.language_at(i))
        return result


@lru_cache(maxsize=None)
def _prime(i: int) -> int:
    return int(prime(i))


_BUILTINS = {
    CollectionName.SINGLE_REMOVAL: SingleRemoval,
    CollectionName.SUFFIXES: Suffixes,
    CollectionName.PRIME_MULTIPLES: PrimeMultiples,
    CollectionName.PARITY_DEMO: ParityDemo,
}


def builtin(name: CollectionName | str) -> Collection:
    try:
        key = CollectionName(name)
    except ValueError:
        raise ValueError(f"unknown collection {name!r}; choose from {[n.value for n in CollectionName]}") from None
    return _BUILTINS[key]()


def _require(c: Collection, flag: str) -> None:
    if not getattr(c.capabilities, flag):
        raise CapabilityMissing(f"{c.name.value} lacks the {flag} oracle")


def membership_oracle(c: Collection, i: int, x: int) -> bool:
    _require(c, "membership")
    c.check_index(i)
    return c.member(i, x)


def subset_oracle(c: Collection, i: int, j: int) -> bool:
    _require(c, "subset")
    c.check_index(i)
    c.check_index(j)
    return c.is_subset(i, j)


def finite_difference_oracle(c: Collection, i: int, j: int) -> bool:
    """Whether ``|L_j \\ L_i|`` is finite, defined only when L_i ⊆ L_j."""
    _require(c, "finite_difference")
    c.check_index(i)
    c.check_index(j)
    if not c.is_subset(i, j):
        raise ContractViolation(f"L_{i} is not a subset of L_{j}")
    return c.has_finite_difference(j, i)


def telltale_oracle(c: Collection, i: int, kind: TellTaleKind | str, take: int | None = None) -> FiniteSet:
    kind = TellTaleKind(kind)
    _require(c, "telltale_strong" if kind is TellTaleKind.STRONG else "telltale_weak")
    t = c.telltale(i, kind)
    return t if take is None else t.take(take)


def vsi_membership(c: Collection, samples: SetLike, x: int) -> bool:
    _require(c, "vsi")
    return fms_member(c.vsi(samples), x)
