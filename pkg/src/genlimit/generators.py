"""Generators as step functions over an enumeration of the target.

Each generator owns its observation log; ``step(x)`` consumes the next
enumerated element and returns the descriptor for that round.  Descriptors
are closed-form FMS values, so membership in a generator's support is always
decidable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Iterator, Union

import numpy as np

from .collection import Collection, CollectionName, TellTaleKind, finite_difference_oracle
from .core_sets import (
    EMPTY_BASE,
    BaseKind,
    EMPTY_SET,
    FMS,
    FULL_BASE,
    Cardinality,
    FiniteSet,
    Relation,
    SeenLog,
    fms,
    fms_cardinality,
    fms_enumerate,
    fms_first,
    fms_member,
    fms_modify,
    fms_nth,
    fms_relate,
    suffix,
    zigzag_decode,
)
from .errors import CapabilityMissing, EmptySupport, NoTellTale, UndefinedSupport, WrongCollection


class GeneratorKind(str, Enum):
    KM_SUBSET = "KM_SUBSET"
    TELLTALE = "TELLTALE"
    EXHAUSTIVE_FN = "EXHAUSTIVE_FN"
    TELLTALE_EXHAUSTIVE = "TELLTALE_EXHAUSTIVE"
    CLOSURE_STABLE = "CLOSURE_STABLE"
    SUFFIX_INCREASING = "SUFFIX_INCREASING"
    IDENTIFIER_EXACT = "IDENTIFIER_EXACT"


REQUIREMENTS: dict[GeneratorKind, tuple[str, ...]] = {
    GeneratorKind.KM_SUBSET: ("membership", "subset"),
    GeneratorKind.TELLTALE: ("membership", "telltale_weak"),
    GeneratorKind.EXHAUSTIVE_FN: ("membership", "subset", "finite_difference"),
    GeneratorKind.TELLTALE_EXHAUSTIVE: ("membership", "telltale_weak"),
    GeneratorKind.CLOSURE_STABLE: ("vsi",),
    GeneratorKind.SUFFIX_INCREASING: (),
    GeneratorKind.IDENTIFIER_EXACT: ("membership", "telltale_strong"),
}

# "output an arbitrary element": the smallest domain id, flagged as undefined
ARBITRARY = fms(EMPTY_BASE, add=(1,))


@dataclass(frozen=True)
class SupportDescriptor:
    support: FMS | None
    index: int | None = None

    @property
    def defined(self) -> bool:
        return self.support is not None

    @property
    def effective(self) -> FMS:
        return ARBITRARY if self.support is None else self.support

    def summary(self) -> dict:
        s = self.effective
        out = {"base": str(s.base), "add": len(s.add), "sub": len(s.sub), "defined": self.defined}
        if self.index is not None:
            out["index"] = self.index
        return out


@dataclass(frozen=True)
class EnumerationOutput:
    """An output enumeration in canonical order; ``first`` is its first element."""

    stream: FMS | None
    first: int
    index: int | None = None
    counter: int = 0

    @property
    def defined(self) -> bool:
        return self.stream is not None

    @property
    def support(self) -> FMS | None:
        return self.stream

    @property
    def effective(self) -> FMS:
        return ARBITRARY if self.stream is None else self.stream

    def summary(self) -> dict:
        s = self.effective
        out = {
            "base": str(s.base),
            "add": len(s.add),
            "sub": len(s.sub),
            "defined": self.defined,
            "first": self.first,
            "counter": self.counter,
        }
        if self.index is not None:
            out["index"] = self.index
        return out


Descriptor = Union[SupportDescriptor, EnumerationOutput]


class _VersionSpace:
    """Consistency of indexed languages with an observation log, kept incrementally.

    Positions are 0-based offsets into the collection's index order.  A
    position found inconsistent stays dead forever (the log only grows), and
    dead runs are skipped with path-compressed jump pointers.
    """

    def __init__(self, collection: Collection, log: SeenLog):
        self.c = collection
        self.log = log
        self._checked: dict[int, int] = {}
        self._jump: dict[int, int] = {}
        self._low_upto = 0
        self._low: int | None = None

    def _lowest_value(self) -> int | None:
        items = self.log.items
        for x in items[self._low_upto :]:
            v = zigzag_decode(x)
            if self._low is None or v < self._low:
                self._low = v
        self._low_upto = len(items)
        return self._low

    def _skip(self, k: int) -> int:
        root = k
        jump = self._jump
        while root in jump:
            root = jump[root]
        while k != root:
            nxt = jump[k]
            jump[k] = root
            k = nxt
        return root

    def _consistent(self, k: int, i: int) -> bool:
        items = self.log.items
        done = self._checked.get(k, 0)
        if done < len(items):
            lang = self.c.language_at(i)
            if lang.base == FULL_BASE and len(lang.sub) < len(items) - done:
                # cofinite language: consistent iff no removed id was ever observed
                if any(y in self.log.pos for y in lang.sub):
                    return False
                self._checked[k] = len(items)
                return True
            if lang.base.kind is BaseKind.SUFFIX and not lang.add and not lang.sub:
                ok = self._lowest_value() >= lang.base.param
                if ok:
                    self._checked[k] = len(items)
                return ok
            for x in items[done:]:
                if not fms_member(lang, x):
                    return False
            self._checked[k] = len(items)
        return True

    def alive(self, limit: int) -> Iterator[int]:
        """Indices among the first ``limit`` positions consistent with the log."""
        k = self._skip(0)
        while k < limit:
            i = self.c.index_at(k)
            if i is None:
                return
            if self._consistent(k, i):
                yield i
            else:
                self._jump[k] = k + 1
            k = self._skip(k + 1)


class Generator:
    kind: ClassVar[GeneratorKind]

    def __init__(self, collection: Collection):
        missing = collection.capabilities.missing(REQUIREMENTS[self.kind])
        if missing:
            raise CapabilityMissing(f"{self.kind.value} needs {', '.join(missing)} on {collection.name.value}")
        self.collection = collection
        self._log = SeenLog()
        self.seen: FiniteSet = EMPTY_SET
        self.n = 0
        self.descriptor: Descriptor | None = None

    @property
    def prior_firsts(self) -> FiniteSet:
        return EMPTY_SET

    @property
    def support(self) -> FMS:
        if self.descriptor is None:
            raise UndefinedSupport("no input observed yet")
        return self.descriptor.effective

    def step(self, x: int) -> Descriptor:
        if x < 1:
            raise ValueError(f"domain ids start at 1, got {x}")
        self._log.append(x)
        self.seen = self._log.view()
        self.n += 1
        self.descriptor = self._advance(x)
        return self.descriptor

    def _advance(self, x: int) -> Descriptor:
        raise NotImplementedError


class KMSubsetGenerator(Generator):
    """Largest critical language of the version space, minus what was seen."""

    kind = GeneratorKind.KM_SUBSET

    def __init__(self, collection: Collection):
        super().__init__(collection)
        self._vs = _VersionSpace(collection, self._log)
        self.critical: list[int] = []

    def _advance(self, x: int) -> SupportDescriptor:
        c = self.collection
        version = list(self._vs.alive(self.n))
        if not version:
            self.critical = []
            return SupportDescriptor(None)
        critical = [version[0]]
        for pos in range(1, len(version)):
            v = version[pos]
            if all(c.is_subset(v, u) for u in version[:pos]):
                critical.append(v)
        self.critical = critical
        i = critical[-1]
        return SupportDescriptor(fms_modify(c.language_at(i), minus=self.seen), index=i)


class TellTaleGenerator(Generator):
    """Smallest consistent index whose truncated weak tell-tale has been seen."""

    kind = GeneratorKind.TELLTALE
    telltale_kind = TellTaleKind.WEAK

    def __init__(self, collection: Collection):
        super().__init__(collection)
        self._vs = _VersionSpace(collection, self._log)
        self.guess: int | None = None

    def _choose(self) -> int | None:
        c = self.collection
        for i in self._vs.alive(self.n):
            try:
                t = c.telltale(i, self.telltale_kind)
            except NoTellTale:
                continue
            if t.take(self.n).issubset(self.seen):
                return i
        return None

    def _advance(self, x: int) -> SupportDescriptor:
        self.guess = g = self._choose()
        if g is None:
            return SupportDescriptor(None)
        removed = self.seen.union(FiniteSet(range(1, self.n + 1)))
        return SupportDescriptor(fms_modify(self.collection.language_at(g), minus=removed), index=g)


class IdentifierGenerator(TellTaleGenerator):
    """Tell-tale identifier with strong tell-tales; support is L_guess \\ S_n."""

    kind = GeneratorKind.IDENTIFIER_EXACT
    telltale_kind = TellTaleKind.STRONG

    def _advance(self, x: int) -> SupportDescriptor:
        self.guess = g = self._choose()
        if g is None:
            return SupportDescriptor(None)
        return SupportDescriptor(fms_modify(self.collection.language_at(g), minus=self.seen), index=g)


class _CountedEnumeration(Generator):
    """Shared bookkeeping for generators that output L_i \\ {x_0, ..., x_l}."""

    def __init__(self, collection: Collection):
        super().__init__(collection)
        self._firsts = SeenLog()
        self.index: int | None = None
        self.counter = 0
        self._started = False

    @property
    def prior_firsts(self) -> FiniteSet:
        return self._firsts.view()

    def _emit(self, i: int | None) -> EnumerationOutput:
        if isinstance(self.descriptor, EnumerationOutput):
            self._firsts.append(self.descriptor.first)
        if not self._started or i != self.index:
            self.counter = 0
        else:
            self.counter += 1
        self._started = True
        self.index = i
        if i is None:
            return EnumerationOutput(None, 1, None, self.counter)
        lang = self.collection.language_at(i)
        stream = fms_modify(lang, minus=range(0, self.counter + 1))
        first = fms_first(lang, self.counter + 1)
        return EnumerationOutput(stream, first, i, self.counter)


class ExhaustiveFunctionGenerator(_CountedEnumeration):
    kind = GeneratorKind.EXHAUSTIVE_FN

    def __init__(self, collection: Collection):
        super().__init__(collection)
        self._vs = _VersionSpace(collection, self._log)
        self.critical: list[int] = []

    def _advance(self, x: int) -> EnumerationOutput:
        c = self.collection
        version = list(self._vs.alive(self.n))
        if not version:
            self.critical = []
            return self._emit(None)
        critical = [version[0]]
        for pos in range(1, len(version)):
            v = version[pos]
            if all(c.is_subset(v, u) for u in version[:pos]):
                critical.append(v)
        self.critical = critical
        last = critical[-1]
        chosen = next((i for i in critical if finite_difference_oracle(c, last, i)), None)
        # the filtered list starts at the chosen language, so its minimum-index member is that language
        return self._emit(chosen)


class TellTaleExhaustiveGenerator(_CountedEnumeration):
    kind = GeneratorKind.TELLTALE_EXHAUSTIVE

    def __init__(self, collection: Collection):
        super().__init__(collection)
        self._vs = _VersionSpace(collection, self._log)

    def _advance(self, x: int) -> EnumerationOutput:
        c = self.collection
        for i in self._vs.alive(self.n):
            try:
                t = c.telltale(i, TellTaleKind.WEAK)
            except NoTellTale:
                continue
            if t.take(self.n).issubset(self.seen):
                return self._emit(i)
        return self._emit(None)


class ClosureStableGenerator(Generator):
    """Fix the support to the version-space intersection of the first d+1 distinct inputs."""

    kind = GeneratorKind.CLOSURE_STABLE

    def __init__(self, collection: Collection, d: int):
        super().__init__(collection)
        if d < 0:
            raise ValueError("closure dimension must be >= 0")
        self.d = d
        self.fixed: SupportDescriptor | None = None

    def _advance(self, x: int) -> SupportDescriptor:
        if self.fixed is None:
            if len(self.seen) < self.d + 1:
                return SupportDescriptor(None)
            self.fixed = SupportDescriptor(self.collection.vsi(FiniteSet(self._log.items[: self.d + 1])))
        return self.fixed


class SuffixIncreasingGenerator(Generator):
    """Support is the suffix starting at the least value seen so far."""

    kind = GeneratorKind.SUFFIX_INCREASING

    def __init__(self, collection: Collection):
        if collection.name is not CollectionName.SUFFIXES:
            raise WrongCollection(f"{self.kind.value} runs only on SUFFIXES, not {collection.name.value}")
        super().__init__(collection)
        self.low: int | None = None
        self._current: SupportDescriptor | None = None

    def _advance(self, x: int) -> SupportDescriptor:
        v = zigzag_decode(x)
        if self.low is None or v < self.low:
            self.low = v
            self._current = SupportDescriptor(fms(suffix(v)), index=self.collection.encode(v))
        return self._current


_KINDS: dict[GeneratorKind, type[Generator]] = {
    GeneratorKind.KM_SUBSET: KMSubsetGenerator,
    GeneratorKind.TELLTALE: TellTaleGenerator,
    GeneratorKind.EXHAUSTIVE_FN: ExhaustiveFunctionGenerator,
    GeneratorKind.TELLTALE_EXHAUSTIVE: TellTaleExhaustiveGenerator,
    GeneratorKind.CLOSURE_STABLE: ClosureStableGenerator,
    GeneratorKind.SUFFIX_INCREASING: SuffixIncreasingGenerator,
    GeneratorKind.IDENTIFIER_EXACT: IdentifierGenerator,
}


def make_generator(kind: GeneratorKind | str, collection: Collection, **params) -> Generator:
    kind = GeneratorKind(kind)
    cls = _KINDS[kind]
    if kind is GeneratorKind.CLOSURE_STABLE:
        if "d" not in params:
            raise ValueError("CLOSURE_STABLE needs the closure dimension d")
        return cls(collection, int(params.pop("d")))
    if params:
        raise ValueError(f"{kind.value} takes no parameters, got {sorted(params)}")
    return cls(collection)


def sample(d: Descriptor, rng: int | np.random.Generator | None = None) -> int:
    """Draw the k-th element of the support with k ~ Geometric(1/2)."""
    support = d.effective
    size = fms_cardinality(support)
    if size == 0:
        raise EmptySupport("cannot sample from an empty support")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    while True:
        k = int(gen.geometric(0.5))
        if size.is_infinite or k <= size.count:
            return fms_nth(support, k)


@dataclass(frozen=True)
class Introspection:
    support: FMS

    def contains(self, x: int) -> bool:
        return fms_member(self.support, x)

    def enumerate(self, horizon: int) -> list[int]:
        return fms_enumerate(self.support, horizon)

    def relate(self, other: FMS) -> Relation:
        return fms_relate(self.support, other)

    def cardinality(self) -> Cardinality:
        return fms_cardinality(self.support)


def introspect(d: Descriptor) -> Introspection:
    if not d.defined:
        raise UndefinedSupport("the descriptor is an arbitrary placeholder")
    return Introspection(d.effective)
