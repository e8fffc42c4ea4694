"""Exact algebra of finitely modified sets over a countable domain.

Domain elements are natural numbers >= 1.  Integer-valued domains go through
the zigzag bijection 0, 1, -1, 2, -2, ... -> 1, 2, 3, 4, 5, ...  The id 0 is
reserved for the sentinel ``x_0`` which never belongs to any base.

A :class:`FiniteSet` is either an explicit frozenset or a prefix view of an
append-only :class:`SeenLog` plus a few explicit extras.  Generators keep the
set of observed strings in such a log, so a support of the form ``L \\ S_n``
costs O(1) to build and cancels against ``S_n`` without copying it.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import UnknownBasePair

SENTINEL = 0
_SMALL = 64


def zigzag_encode(z: int) -> int:
    return 2 * z if z > 0 else 1 - 2 * z


def zigzag_decode(x: int) -> int:
    if x < 1:
        raise ValueError(f"domain ids start at 1, got {x}")
    return x // 2 if x % 2 == 0 else (1 - x) // 2


# --------------------------------------------------------------------------
# cardinalities


@dataclass(frozen=True)
class Cardinality:
    """``Finite(n)`` when ``count`` is an int, ``Infinite`` when it is None."""

    count: int | None

    @classmethod
    def finite(cls, n: int) -> "Cardinality":
        if n < 0:
            raise ValueError("cardinality cannot be negative")
        return cls(n)

    @property
    def is_finite(self) -> bool:
        return self.count is not None

    @property
    def is_infinite(self) -> bool:
        return self.count is None

    def __add__(self, other: "Cardinality") -> "Cardinality":
        if self.count is None or other.count is None:
            return INFINITE
        return Cardinality(self.count + other.count)

    def __lt__(self, other: "Cardinality") -> bool:
        if self.count is None:
            return False
        return other.count is None or self.count < other.count

    def __le__(self, other: "Cardinality") -> bool:
        return self == other or self < other

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            return self.count == other
        if isinstance(other, Cardinality):
            return self.count == other.count
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.count)

    def __str__(self) -> str:
        return "Infinite" if self.count is None else f"Finite({self.count})"

    __repr__ = __str__

    def to_json(self) -> int | str:
        return "inf" if self.count is None else self.count

    @classmethod
    def from_json(cls, value: int | str) -> "Cardinality":
        return INFINITE if value == "inf" else cls.finite(int(value))


INFINITE = Cardinality(None)
Finite = Cardinality.finite


# --------------------------------------------------------------------------
# finite sets


class SeenLog:
    """Append-only sequence of distinct ids; every prefix is a FiniteSet view."""

    __slots__ = ("items", "pos", "_scan", "__weakref__")

    def __init__(self, items: Iterable[int] = ()):
        self.items: list[int] = []
        self.pos: dict[int, int] = {}
        self._scan: dict[BaseRef, list] = {}
        for x in items:
            self.append(x)

    def __len__(self) -> int:
        return len(self.items)

    def append(self, x: int) -> bool:
        if x in self.pos:
            return False
        self.pos[x] = len(self.items)
        self.items.append(x)
        return True

    def view(self, n: int | None = None) -> "FiniteSet":
        n = len(self.items) if n is None else n
        return FiniteSet._make(self, n, _EMPTY_FROZEN)

    def prefix_within(self, base: "BaseRef", n: int) -> bool:
        """Whether the first ``n`` items all lie in ``base`` (incremental scan)."""
        if base.kind is BaseKind.FULL:
            return True
        state = self._scan.get(base)
        if state is None:
            state = self._scan[base] = [0, None]
        scanned, bad = state
        if bad is not None:
            return bad >= n
        if scanned < n:
            contains = base.contains
            items = self.items
            for p in range(scanned, n):
                if not contains(items[p]):
                    state[0], state[1] = p + 1, p
                    return False
            state[0] = n
        return True


_EMPTY_FROZEN: frozenset = frozenset()


class FiniteSet:
    """Immutable finite set of domain ids, iterated in ascending order."""

    __slots__ = ("_log", "_n", "_extra", "_frozen", "_sorted", "_hash")

    def __init__(self, elements: Iterable[int] = ()):
        extra = elements if isinstance(elements, frozenset) else frozenset(elements)
        self._log = None
        self._n = 0
        self._extra = extra
        self._frozen = extra
        self._sorted = None
        self._hash = None

    @property
    def source(self) -> tuple[SeenLog, int] | None:
        """``(log, n)`` when the set is exactly a log prefix, else None."""
        if self._n and not self._extra:
            return self._log, self._n
        return None

    @classmethod
    def _make(cls, log: SeenLog | None, n: int, extra: frozenset) -> "FiniteSet":
        obj = cls.__new__(cls)
        if log is None or n == 0:
            obj._log, obj._n, obj._frozen = None, 0, extra
        else:
            obj._log, obj._n, obj._frozen = log, n, None
        obj._extra = extra
        obj._sorted = None
        obj._hash = None
        return obj

    # -- basic protocol --------------------------------------------------

    def __len__(self) -> int:
        return self._n + len(self._extra)

    def __bool__(self) -> bool:
        return self._n > 0 or bool(self._extra)

    def __contains__(self, x: object) -> bool:
        if x in self._extra:
            return True
        if self._n:
            p = self._log.pos.get(x)
            return p is not None and p < self._n
        return False

    def frozen(self) -> frozenset:
        if self._frozen is None:
            self._frozen = self._extra.union(self._log.items[: self._n])
        return self._frozen

    def sorted(self) -> tuple[int, ...]:
        if self._sorted is None:
            self._sorted = tuple(sorted(self.frozen()))
        return self._sorted

    def __iter__(self) -> Iterator[int]:
        return iter(self.sorted())

    def min(self) -> int:
        return self.sorted()[0]

    def max(self) -> int:
        return self.sorted()[-1]

    def take(self, k: int) -> "FiniteSet":
        if k >= len(self):
            return self
        return FiniteSet(self.sorted()[:k])

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.frozen())
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FiniteSet):
            if self is other:
                return True
            if len(self) != len(other):
                return False
            if self._log is not None and self._log is other._log:
                a, b = (self, other) if self._n <= other._n else (other, self)
                ax = a._extra
                tail = self._log.items[a._n : b._n]
                for x in tail:
                    if x not in ax:
                        return False
                return ax.difference(tail) == b._extra
            return self.frozen() == other.frozen()
        if isinstance(other, (set, frozenset)):
            return self.frozen() == other
        return NotImplemented

    def __repr__(self) -> str:
        items = self.sorted()
        shown = ", ".join(map(str, items[:12]))
        if len(items) > 12:
            shown += f", ... ({len(items)} total)"
        return f"FiniteSet({{{shown}}})"

    # -- algebra -----------------------------------------------------------

    def with_element(self, x: int) -> "FiniteSet":
        if x in self:
            return self
        log = self._log
        if log is not None and self._n == len(log.items) and x not in log.pos:
            log.append(x)
            return FiniteSet._make(log, self._n + 1, self._extra)
        return FiniteSet._make(log, self._n, self._extra | {x})

    def union(self, other: "SetLike") -> "FiniteSet":
        other = as_finite_set(other)
        if not other:
            return self
        if not self:
            return other
        a, b = (self, other) if self._n >= other._n else (other, self)
        if a._n == 0:
            return FiniteSet(a._extra | b._extra)
        if b._log is a._log:
            rest = b._extra
        else:
            rest = b.frozen()
        if len(rest) <= _SMALL:
            new = [x for x in rest if x not in a]
            if not new:
                return a
            return FiniteSet._make(a._log, a._n, a._extra.union(new))
        return FiniteSet._make(a._log, a._n, a._extra | (rest - a.frozen()))

    __or__ = union

    def difference(self, other: "SetLike") -> "FiniteSet":
        other = as_finite_set(other)
        if not self or not other:
            return self
        if self._n == 0:
            if other._n == 0:
                return FiniteSet(self._extra - other._extra)
            if len(self._extra) > _SMALL:
                return FiniteSet(self._extra - other.frozen())
            return FiniteSet(x for x in self._extra if x not in other)
        if other._log is self._log and other._n >= self._n:
            return FiniteSet(x for x in self._extra if x not in other)
        if len(other) <= _SMALL:
            removed = [x for x in other.frozen() if x in self]
            if not removed:
                return self
            if all(x in self._extra for x in removed):
                return FiniteSet._make(self._log, self._n, self._extra.difference(removed))
        return FiniteSet(self.frozen() - other.frozen())

    __sub__ = difference

    def intersection(self, other: "SetLike") -> "FiniteSet":
        other = as_finite_set(other)
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        if not a:
            return a
        if a._log is not None and a._log is b._log:
            small, big = (a, b) if a._n <= b._n else (b, a)
            rest = frozenset(x for x in small._extra if x in big)
            return FiniteSet._make(small._log, small._n, rest)
        if len(a) <= _SMALL:
            return FiniteSet(x for x in a.frozen() if x in b)
        return FiniteSet(a.frozen() & b.frozen())

    __and__ = intersection

    def issubset(self, other: "SetLike") -> bool:
        other = as_finite_set(other)
        if len(self) > len(other):
            return False
        if self._log is not None and self._log is other._log and self._n <= other._n:
            return all(x in other for x in self._extra)
        if len(self) <= _SMALL:
            return all(x in other for x in self.frozen())
        return self.frozen() <= other.frozen()

    __le__ = issubset

    def isdisjoint(self, other: "SetLike") -> bool:
        other = as_finite_set(other)
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        if not a:
            return True
        if a._log is not None and a._log is b._log:
            return False
        if len(a) <= _SMALL:
            return not any(x in b for x in a.frozen())
        return a.frozen().isdisjoint(b.frozen())


SetLike = Union[FiniteSet, Iterable[int]]
EMPTY_SET = FiniteSet()


def as_finite_set(values: SetLike) -> FiniteSet:
    if isinstance(values, FiniteSet):
        return values
    return FiniteSet(values)


def _card_minus(x: FiniteSet, y: FiniteSet) -> int:
    """``|x \\ y|`` without materialising x when y is small."""
    if not y or not x:
        return len(x)
    if len(y) <= _SMALL:
        return len(x) - sum(1 for v in y.frozen() if v in x)
    return len(x.difference(y))


# --------------------------------------------------------------------------
# bases


class BaseKind(str, Enum):
    EMPTY = "EMPTY"
    FULL = "FULL"
    SUFFIX = "SUFFIX"
    MULT = "MULT"
    PARITY = "PARITY"


@dataclass(frozen=True)
class BaseRef:
    """A closed-form infinite (or empty) base language.

    SUFFIX(a): zigzag ids of the integers a, a+1, ...
    MULT(m): positive multiples of m.
    PARITY(k): ids x with (x - 1) % 2 == k, i.e. the codes of even (k=0)
    or odd (k=1) values of N_0 under the code v -> v + 1.
    """

    kind: BaseKind
    param: int = 0

    def contains(self, x: int) -> bool:
        kind = self.kind
        if x < 1:
            return False
        if kind is BaseKind.FULL:
            return True
        if kind is BaseKind.SUFFIX:
            return zigzag_decode(x) >= self.param
        if kind is BaseKind.MULT:
            return x % self.param == 0
        if kind is BaseKind.PARITY:
            return (x - 1) % 2 == self.param
        return False

    def iter_from(self, start: int = 1) -> Iterator[int]:
        start = max(start, 1)
        kind = self.kind
        if kind is BaseKind.EMPTY:
            return iter(())
        if kind is BaseKind.FULL:
            return itertools.count(start)
        if kind is BaseKind.MULT:
            m = self.param
            return itertools.count(-(-start // m) * m, m)
        if kind is BaseKind.PARITY:
            first = start if (start - 1) % 2 == self.param else start + 1
            return itertools.count(first, 2)
        return (x for x in itertools.count(start) if self.contains(x))

    @property
    def is_empty(self) -> bool:
        return self.kind is BaseKind.EMPTY

    def __str__(self) -> str:
        if self.kind in (BaseKind.EMPTY, BaseKind.FULL):
            return self.kind.value
        return f"{self.kind.value}({self.param})"


EMPTY_BASE = BaseRef(BaseKind.EMPTY)
FULL_BASE = BaseRef(BaseKind.FULL)


def suffix(a: int) -> BaseRef:
    return BaseRef(BaseKind.SUFFIX, a)


def mult(m: int) -> BaseRef:
    if m < 1:
        raise ValueError("multiplier must be positive")
    return FULL_BASE if m == 1 else BaseRef(BaseKind.MULT, m)


def parity(k: int) -> BaseRef:
    if k not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    return BaseRef(BaseKind.PARITY, k)


def base_difference(a: BaseRef, b: BaseRef) -> frozenset | None:
    """``a \\ b`` as an explicit frozenset, or None when it is infinite."""
    if a == b or a.kind is BaseKind.EMPTY or b.kind is BaseKind.FULL:
        return _EMPTY_FROZEN
    if a.kind is BaseKind.FULL or b.kind is BaseKind.EMPTY:
        # every non-full builtin base is co-infinite and every non-empty one infinite
        return None
    if a.kind is b.kind:
        if a.kind is BaseKind.SUFFIX:
            if a.param < b.param:
                return frozenset(zigzag_encode(v) for v in range(a.param, b.param))
            return _EMPTY_FROZEN
        if a.kind is BaseKind.MULT:
            return _EMPTY_FROZEN if a.param % b.param == 0 else None
        if a.kind is BaseKind.PARITY:
            return None
    raise UnknownBasePair(f"no relation between {a} and {b}")


def base_intersection(a: BaseRef, b: BaseRef) -> BaseRef:
    if a == b or b.kind is BaseKind.FULL:
        return a
    if a.kind is BaseKind.FULL:
        return b
    if a.kind is BaseKind.EMPTY or b.kind is BaseKind.EMPTY:
        return EMPTY_BASE
    if a.kind is b.kind:
        if a.kind is BaseKind.SUFFIX:
            return suffix(max(a.param, b.param))
        if a.kind is BaseKind.MULT:
            return mult(math.lcm(a.param, b.param))
        if a.kind is BaseKind.PARITY:
            return EMPTY_BASE
    raise UnknownBasePair(f"no intersection rule for {a} and {b}")


# --------------------------------------------------------------------------
# finitely modified sets


def _select(fs: FiniteSet, base: BaseRef, inside: bool) -> FiniteSet:
    """Elements of ``fs`` that are (or are not) members of ``base``."""
    if not fs:
        return fs
    kind = base.kind
    if kind is BaseKind.EMPTY:
        return EMPTY_SET if inside else fs
    if kind is BaseKind.FULL and SENTINEL not in fs:
        return fs if inside else EMPTY_SET
    if fs._n and fs._log.prefix_within(base, fs._n):
        contains = base.contains
        if inside:
            if all(contains(x) for x in fs._extra):
                return fs
            kept = frozenset(x for x in fs._extra if contains(x))
            return FiniteSet._make(fs._log, fs._n, kept)
        return FiniteSet(x for x in fs._extra if not contains(x))
    if kind is BaseKind.FULL:
        has_sentinel = SENTINEL in fs
        if inside:
            return fs.difference((SENTINEL,)) if has_sentinel else fs
        return FiniteSet((SENTINEL,)) if has_sentinel else EMPTY_SET
    contains = base.contains
    return FiniteSet(x for x in fs.frozen() if contains(x) == inside)


@dataclass(frozen=True)
class FMS:
    """``(base ∪ add) \\ sub`` kept in normal form.

    Construction normalises: ``add`` is disjoint from the base, ``sub`` is a
    subset of it, and the two corrections are disjoint.  Equality is
    structural on the normal form.
    """

    base: BaseRef
    add: FiniteSet = EMPTY_SET
    sub: FiniteSet = EMPTY_SET

    def __post_init__(self) -> None:
        add = as_finite_set(self.add)
        sub = as_finite_set(self.sub)
        sub_in = _select(sub, self.base, inside=True)
        add_out = _select(add, self.base, inside=False)
        if add_out and sub:
            add_out = add_out.difference(sub)
        object.__setattr__(self, "add", add_out)
        object.__setattr__(self, "sub", sub_in)

    def __contains__(self, x: int) -> bool:
        return fms_member(self, x)

    def __str__(self) -> str:
        text = str(self.base)
        if self.add:
            text += f" + {_brief(self.add)}"
        if self.sub:
            text += f" - {_brief(self.sub)}"
        return text

    def to_json(self) -> dict:
        return {
            "base": str(self.base),
            "add": list(self.add.sorted()),
            "sub_size": len(self.sub),
        }


def _brief(fs: FiniteSet, limit: int = 8) -> str:
    items = fs.sorted()
    if len(items) <= limit:
        return "{" + ",".join(map(str, items)) + "}"
    return "{" + ",".join(map(str, items[:limit])) + f",...}}[{len(items)}]"


EMPTY_FMS = FMS(EMPTY_BASE)
FULL_FMS = FMS(FULL_BASE)


def fms(base: BaseRef, add: SetLike = (), sub: SetLike = ()) -> FMS:
    return FMS(base, as_finite_set(add), as_finite_set(sub))


def finite_fms(elements: SetLike) -> FMS:
    return FMS(EMPTY_BASE, as_finite_set(elements))


def fms_member(s: FMS, x: int) -> bool:
    if x in s.add:
        return True
    return s.base.contains(x) and x not in s.sub


def fms_modify(s: FMS, plus: SetLike = (), minus: SetLike = ()) -> FMS:
    """``(s ∪ plus) \\ minus`` in normal form."""
    plus = as_finite_set(plus)
    minus = as_finite_set(minus)
    add, sub = s.add, s.sub
    if plus:
        add = add.union(plus)
        sub = sub.difference(plus)
    if minus:
        add = add.difference(minus)
        sub = sub.union(minus)
    return FMS(s.base, add, sub)


@dataclass(frozen=True)
class Relation:
    subset: bool
    equal: bool
    diff_card: Cardinality
    rdiff_card: Cardinality
    symdiff_card: Cardinality


def _diff_card(a: FMS, b: FMS) -> Cardinality:
    d = base_difference(a.base, b.base)
    if d is None:
        return INFINITE
    count = 0
    for x in d:
        if x not in a.sub and x not in b.add:
            count += 1
    b_base = b.base.contains
    for x in a.add.frozen():
        if x not in b.add and (not b_base(x) or x in b.sub):
            count += 1
    # removed from b but still present in a through a's base
    count += _card_minus(_select(b.sub, a.base, inside=True), a.sub)
    return Cardinality(count)


def fms_difference_card(a: FMS, b: FMS) -> Cardinality:
    return _diff_card(a, b)


def fms_relate(a: FMS, b: FMS) -> Relation:
    if a == b:
        zero = Cardinality(0)
        return Relation(True, True, zero, zero, zero)
    diff = _diff_card(a, b)
    rdiff = _diff_card(b, a)
    return Relation(diff == 0, diff == 0 and rdiff == 0, diff, rdiff, diff + rdiff)


def fms_cardinality(s: FMS) -> Cardinality:
    return _diff_card(s, EMPTY_FMS)


def fms_is_infinite(s: FMS) -> bool:
    return fms_cardinality(s).is_infinite


def fms_intersection(a: FMS, b: FMS) -> FMS:
    base = base_intersection(a.base, b.base)
    add = [x for x in a.add.frozen() if fms_member(b, x)]
    add += [x for x in b.add.frozen() if fms_member(a, x)]
    return FMS(base, FiniteSet(add), a.sub.union(b.sub))


def fms_iter(s: FMS, start: int = 1) -> Iterator[int]:
    """Elements of ``s`` that are >= ``start``, in canonical order."""
    sub = s.sub
    base_part = (x for x in s.base.iter_from(start) if x not in sub)
    adds = [x for x in s.add.sorted() if x >= start]
    if not adds:
        return base_part
    return heapq.merge(base_part, adds)


def fms_enumerate(s: FMS, horizon: int) -> list[int]:
    if horizon <= 0:
        return []
    return list(itertools.islice(fms_iter(s), horizon))


def fms_first(s: FMS, start: int = 1) -> int | None:
    return next(fms_iter(s, start), None)


def fms_nth(s: FMS, k: int) -> int | None:
    """The k-th element (1-based) of the canonical enumeration, if any."""
    return next(itertools.islice(fms_iter(s), k - 1, None), None)


def fms_count_in(s: FMS, values: SetLike) -> int:
    """``|s ∩ values|`` for a finite set of values."""
    values = as_finite_set(values)
    inside = sum(1 for x in s.add.frozen() if x in values) if len(s.add) <= len(values) else len(s.add.intersection(values))
    return inside + _card_minus(_select(values, s.base, inside=True), s.sub)
