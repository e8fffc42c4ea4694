"""Enumeration strategies played against a generator in lock-step.

Every adversary exposes ``next_element()`` (the string for the coming round)
and ``observe(generator)`` (called once the generator has consumed it).
Adaptive adversaries read the generator's exact support descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .breadth import BreadthVerdict, Notion, evaluate
from .collection import Collection, CollectionName, TellTaleKind
from .conditions import violation_witness
from .core_sets import SeenLog, fms_first, fms_is_infinite, fms_iter
from .errors import NotAViolationPoint, StalledPhase, WrongCollection
from .generators import Generator


class AdversaryKind(str, Enum):
    CANONICAL = "canonical"
    LOWER_BOUND = "lower_bound"
    STABLE_COVERAGE = "stable_coverage"
    IID = "iid"


class Subphase(str, Enum):
    A = "A"
    B1 = "B1"
    B2 = "B2"
    SEEK = "SEEK"
    SKIP = "SKIP"
    CLOSE = "CLOSE"


STRONG_PREDICATES = frozenset({Notion.EXACT, Notion.UNAMBIGUOUS})
WEAK_PREDICATES = frozenset({Notion.APPROX, Notion.EXHAUSTIVE, Notion.EXHAUSTIVE_VARIANT})


@dataclass
class Stall:
    phase: int
    step: int
    budget: int
    reason: str
    committed_target: int

    def to_json(self) -> dict:
        return {
            "phase": self.phase,
            "step": self.step,
            "budget": self.budget,
            "reason": self.reason,
            "committed_target": self.committed_target,
        }


class Adversary:
    kind: AdversaryKind

    def __init__(self, collection: Collection):
        self.collection = collection
        self.emitted: list[int] = []
        self._emitted_log = SeenLog()
        self.step = 0
        self.committed_target: int | None = None
        self.stall: Stall | None = None

    def _emit(self, x: int) -> int:
        self.emitted.append(x)
        self._emitted_log.append(x)
        self.step += 1
        return x

    def next_element(self) -> int:
        raise NotImplementedError

    def observe(self, generator: Generator) -> None:
        pass

    def status(self) -> dict:
        return {}

    @property
    def phases(self) -> list:
        return []


class CanonicalAdversary(Adversary):
    """Target's canonical enumeration, each element repeated ``repeat`` times."""

    kind = AdversaryKind.CANONICAL

    def __init__(self, collection: Collection, target: int, repeat: int = 1):
        super().__init__(collection)
        collection.check_index(target)
        if repeat < 1:
            raise ValueError("repeat must be >= 1")
        self.committed_target = target
        self.repeat = repeat
        self._source = fms_iter(collection.language_at(target))
        self._current = 0
        self._left = 0

    def next_element(self) -> int:
        if self._left == 0:
            self._current = next(self._source)
            self._left = self.repeat
        self._left -= 1
        return self._emit(self._current)


class IIDAdversary(Adversary):
    """Independent draws: the k-th canonical element of K with k ~ Geometric(1/2)."""

    kind = AdversaryKind.IID

    def __init__(self, collection: Collection, target: int, seed: int = 0):
        super().__init__(collection)
        collection.check_index(target)
        self.committed_target = target
        self.rng = np.random.default_rng(seed)
        self._prefix: list[int] = []
        self._source = fms_iter(collection.language_at(target))

    def next_element(self) -> int:
        k = int(self.rng.geometric(0.5))
        while len(self._prefix) < k:
            self._prefix.append(next(self._source))
        return self._emit(self._prefix[k - 1])


@dataclass
class LowerBoundPhase:
    number: int
    witness: int
    start_step: int
    exit_step: int | None = None
    end_step: int | None = None
    skipped: tuple[int, ...] = ()
    witness_verdict: BreadthVerdict | None = None
    star_verdict: BreadthVerdict | None = None

    def to_json(self) -> dict:
        out = {
            "phase": self.number,
            "witness": self.witness,
            "start_step": self.start_step,
            "exit_step": self.exit_step,
            "end_step": self.end_step,
            "skipped": list(self.skipped),
        }
        if self.witness_verdict is not None:
            out["witness_verdict"] = self.witness_verdict.to_json()
        if self.star_verdict is not None:
            out["star_verdict"] = self.star_verdict.to_json()
        return out


class LowerBoundAdversary(Adversary):
    """Phased construction driven by a breadth predicate and a violation witness oracle.

    Subphase A enumerates, in the order of L_star's canonical enumeration, the
    elements that lie in the current witness L_j and skips the rest, until the
    predicate holds for L_j.  Subphase B1 then re-emits the skipped elements in
    ascending order; if nothing was skipped, B2 continues the enumeration of
    L_star up to and including its first element outside L_j.  The next
    witness comes from the oracle applied to everything emitted so far.
    """

    kind = AdversaryKind.LOWER_BOUND

    def __init__(
        self,
        collection: Collection,
        star: int,
        predicate: Notion | str,
        budget: int = 10_000,
        rival_bound: int = 50,
        strict: bool = False,
    ):
        super().__init__(collection)
        collection.check_index(star)
        self.star = star
        self.predicate = Notion(predicate)
        if self.predicate in STRONG_PREDICATES:
            self.witness_kind = TellTaleKind.STRONG
        elif self.predicate in WEAK_PREDICATES:
            self.witness_kind = TellTaleKind.WEAK
        else:
            raise ValueError(f"{self.predicate.value} cannot drive the lower-bound adversary")
        if (star, self.witness_kind) not in collection.violation_points:
            raise NotAViolationPoint(
                f"{collection.name.value} index {star} is not a {self.witness_kind.value} violation point"
            )
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.budget = budget
        self.rival_bound = rival_bound
        self.strict = strict
        self._star_lang = collection.language_at(star)
        self._order: list[int] = []
        self._source = fms_iter(self._star_lang)
        self._ptr = 0
        self._skipped: list[int] = []
        self._pending_close = False
        self._a_steps = 0
        self.log: list[LowerBoundPhase] = []
        self.subphase = Subphase.A
        self.committed_target = star
        first = self._star_item(0)
        self._open_phase(violation_witness(collection, star, (first,), self.witness_kind))

    @property
    def phases(self) -> list[LowerBoundPhase]:
        return self.log

    @property
    def closed_phases(self) -> list[LowerBoundPhase]:
        return [p for p in self.log if p.end_step is not None]

    @property
    def current(self) -> LowerBoundPhase:
        return self.log[-1]

    def _star_item(self, k: int) -> int:
        while len(self._order) <= k:
            self._order.append(next(self._source))
        return self._order[k]

    def _open_phase(self, witness: int) -> None:
        self.log.append(LowerBoundPhase(len(self.log) + 1, witness, self.step + 1))
        self.subphase = Subphase.A
        self._skipped = []
        self._a_steps = 0
        self._witness_lang = self.collection.language_at(witness)

    def next_element(self) -> int:
        lang = self._witness_lang
        if self.subphase is Subphase.A:
            while True:
                x = self._star_item(self._ptr)
                self._ptr += 1
                if x in self._emitted_log.pos:
                    continue
                if x in lang:
                    self._a_steps += 1
                    return self._emit(x)
                self._skipped.append(x)
        if self.subphase is Subphase.B1:
            x = self._skipped.pop(0)
            if not self._skipped:
                self._pending_close = True
            return self._emit(x)
        x = self._star_item(self._ptr)
        self._ptr += 1
        if x not in lang:
            self._pending_close = True
        return self._emit(x)

    def _verdict(self, generator: Generator, index: int) -> BreadthVerdict:
        c = self.collection
        return evaluate(
            self.predicate,
            generator.support,
            c.language_at(index),
            generator.seen,
            generator.prior_firsts,
            c,
            index,
            self.rival_bound,
        )

    def observe(self, generator: Generator) -> None:
        phase = self.current
        if self.subphase is Subphase.A:
            verdict = self._verdict(generator, phase.witness)
            if verdict.holds:
                phase.exit_step = self.step
                phase.witness_verdict = verdict
                phase.star_verdict = self._verdict(generator, self.star)
                phase.skipped = tuple(sorted(self._skipped))
                self._skipped = sorted(self._skipped)
                self.subphase = Subphase.B1 if self._skipped else Subphase.B2
                if self.stall is not None and self.stall.phase == phase.number:
                    self.stall = None
                    self.committed_target = self.star
            elif self._a_steps >= self.budget and self.stall is None:
                self.stall = Stall(
                    phase.number,
                    self.step,
                    self.budget,
                    f"generator never achieved {self.predicate.value} on L_{phase.witness} within budget",
                    phase.witness,
                )
                self.committed_target = phase.witness
                if self.strict:
                    raise StalledPhase(self.budget, self.stall.reason)
            return
        if self._pending_close:
            self._pending_close = False
            phase.end_step = self.step
            emitted = self._emitted_log.view()
            self._open_phase(violation_witness(self.collection, self.star, emitted, self.witness_kind))

    def status(self) -> dict:
        return {"phase": self.current.number, "subphase": self.subphase.value, "witness": self.current.witness}


@dataclass
class CoveragePhase:
    number: int
    start_step: int
    infinite_step: int | None = None
    n_hat: int | None = None
    change_step: int | None = None
    end_step: int | None = None
    reference: str = ""

    def to_json(self) -> dict:
        return {
            "phase": self.number,
            "start_step": self.start_step,
            "infinite_step": self.infinite_step,
            "n_hat": self.n_hat,
            "change_step": self.change_step,
            "end_step": self.end_step,
            "reference": self.reference,
        }


class StableCoverageAdversary(Adversary):
    """Forces a generator on SINGLE_REMOVAL to change its support or lose coverage.

    Enumerate consecutive naturals until the support is infinite; note the
    least support element n̂ above everything emitted; keep enumerating
    while skipping n̂ until the support differs from the recorded one and is
    infinite; then emit n̂ and start over.  A phase that outlives ``budget``
    steps is recorded as a stall, which commits the target: N if the support
    never became infinite, N \\ {n̂} if it never changed.
    """

    kind = AdversaryKind.STABLE_COVERAGE

    def __init__(self, collection: Collection, budget: int = 10_000, strict: bool = False):
        if collection.name is not CollectionName.SINGLE_REMOVAL:
            raise WrongCollection("the stable-coverage adversary is defined on SINGLE_REMOVAL")
        super().__init__(collection)
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.budget = budget
        self.strict = strict
        self.log: list[CoveragePhase] = [CoveragePhase(1, 1)]
        self.subphase = Subphase.SEEK
        self._next = 1
        self._phase_steps = 0
        self._reference = None
        self._n_hat: int | None = None
        self.committed_target = None

    @property
    def phases(self) -> list[CoveragePhase]:
        return self.log

    @property
    def closed_phases(self) -> list[CoveragePhase]:
        return [p for p in self.log if p.end_step is not None]

    def next_element(self) -> int:
        if self.subphase is Subphase.CLOSE:
            return self._emit(self._n_hat)
        if self._n_hat is not None and self._next == self._n_hat and self.subphase is Subphase.SKIP:
            self._next += 1
        x = self._next
        self._next += 1
        self._phase_steps += 1
        return self._emit(x)

    def observe(self, generator: Generator) -> None:
        phase = self.log[-1]
        support = generator.support
        if self.subphase is Subphase.CLOSE:
            phase.end_step = self.step
            self.log.append(CoveragePhase(phase.number + 1, self.step + 1))
            self.subphase = Subphase.SEEK
            self._phase_steps = 0
            self._n_hat = None
            return
        if self.subphase is Subphase.SEEK:
            if fms_is_infinite(support):
                top = max(self._next - 1, max(self.emitted))
                self._n_hat = fms_first(support, top + 1)
                self._reference = support
                phase.infinite_step = self.step
                phase.n_hat = self._n_hat
                phase.reference = str(support)
                self.subphase = Subphase.SKIP
                self._phase_steps = 0
            elif self._phase_steps >= self.budget and self.stall is None:
                self._stalled(phase, "support never infinite", 0)
            return
        passed = self.emitted[-1] > self._n_hat
        if passed and support != self._reference and fms_is_infinite(support):
            phase.change_step = self.step
            self.subphase = Subphase.CLOSE
            if self.stall is not None and self.stall.phase == phase.number:
                self.stall = None
                self.committed_target = None
        elif self._phase_steps >= self.budget and self.stall is None:
            self._stalled(phase, "support never changed while containing n_hat", self._n_hat)

    def _stalled(self, phase: CoveragePhase, reason: str, target: int) -> None:
        self.stall = Stall(phase.number, self.step, self.budget, reason, target)
        self.committed_target = target
        if self.strict:
            raise StalledPhase(self.budget, reason)

    def status(self) -> dict:
        return {"phase": self.log[-1].number, "subphase": self.subphase.value}


def make_adversary(kind: AdversaryKind | str, collection: Collection, **params) -> Adversary:
    kind = AdversaryKind(kind)
    if kind is AdversaryKind.CANONICAL:
        return CanonicalAdversary(collection, **params)
    if kind is AdversaryKind.IID:
        return IIDAdversary(collection, **params)
    if kind is AdversaryKind.LOWER_BOUND:
        return LowerBoundAdversary(collection, **params)
    return StableCoverageAdversary(collection, **params)


def enumeration_prefix(adversary: Adversary) -> Iterator[int]:
    return iter(adversary.emitted)
