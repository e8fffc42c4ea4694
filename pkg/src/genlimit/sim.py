"""Duel driver, stability accounting and the i.i.d. error-rate harness."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .adversaries import Adversary, AdversaryKind, make_adversary
from .breadth import BreadthVerdict, Notion, check_increasing_coverage, evaluate, extent_cell
from .collection import Collection, builtin
from .core_sets import FMS
from .errors import ConfigError
from .generators import Generator, GeneratorKind, make_generator

SCHEMA_VERSION = 1
DENSE_CHECKPOINTS = 1000


def default_checkpoints(horizon: int) -> tuple[int, ...]:
    """Every step up to 1000, then powers of two, then the horizon itself."""
    points = list(range(1, min(horizon, DENSE_CHECKPOINTS) + 1))
    p = 1024
    while p < horizon:
        if p > DENSE_CHECKPOINTS:
            points.append(p)
        p *= 2
    if points[-1] != horizon:
        points.append(horizon)
    return tuple(points)


def derive_seed(seed: int, i: int) -> int:
    digest = hashlib.sha256(f"{seed}:{i}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class DuelConfig:
    collection: str
    generator: str
    adversary: str
    generator_params: dict = field(default_factory=dict)
    adversary_params: dict = field(default_factory=dict)
    notions: tuple[str, ...] = ()
    target: int | None = None
    horizon: int = 10_000
    checkpoints: tuple[int, ...] | None = None
    seed: int = 0
    rival_bound: int = 50
    disable_capabilities: tuple[str, ...] = ()
    record_supports: bool = False

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigError("must be >= 1", "horizon")
        if self.checkpoints is not None:
            bad = [c for c in self.checkpoints if not 1 <= c <= self.horizon]
            if bad:
                raise ConfigError(f"outside [1, {self.horizon}]: {bad[:5]}", "checkpoints")
        for n in self.notions:
            try:
                Notion(n)
            except ValueError:
                raise ConfigError(f"unknown notion {n!r}", "notions") from None

    def resolved_checkpoints(self) -> tuple[int, ...]:
        if self.checkpoints is None:
            return default_checkpoints(self.horizon)
        return tuple(sorted(set(self.checkpoints)))

    def to_json(self) -> dict:
        out = asdict(self)
        out["notions"] = list(self.notions)
        out["checkpoints"] = None if self.checkpoints is None else list(self.checkpoints)
        out["disable_capabilities"] = list(self.disable_capabilities)
        return out


@dataclass
class StepTrace:
    step: int
    element: int
    seen_size: int
    descriptor: dict
    changed: bool
    verdicts: dict[str, dict] = field(default_factory=dict)
    adversary: dict = field(default_factory=dict)
    extent: tuple[str, str] | None = None
    support: dict | None = None

    def to_json(self) -> dict:
        out = {
            "step": self.step,
            "element": self.element,
            "seen_size": self.seen_size,
            "descriptor": self.descriptor,
            "changed": self.changed,
        }
        if self.verdicts:
            out["verdicts"] = self.verdicts
        if self.adversary:
            out["adversary"] = self.adversary
        if self.extent is not None:
            out["extent"] = list(self.extent)
        if self.support is not None:
            out["support"] = self.support
        return out


@dataclass(frozen=True)
class StabilityCounters:
    breadth_failures: int
    support_changes: int

    def to_json(self) -> dict:
        return {"C_B": self.breadth_failures, "C_S": self.support_changes}


@dataclass
class RunReport:
    config: DuelConfig
    target: int | None
    steps: int
    n_star: dict[str, int | None]
    counters: StabilityCounters
    index_stable_from: int | None
    final_index: int | None
    checkpoint_failures: dict[str, list[int]]
    phases: list[dict]
    stall: dict | None
    history_verdicts: dict[str, dict] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config.to_json(),
            "target": self.target,
            "steps": self.steps,
            "n_star": self.n_star,
            "counters": self.counters.to_json(),
            "index_stable_from": self.index_stable_from,
            "final_index": self.final_index,
            "checkpoint_failures": self.checkpoint_failures,
            "phases": self.phases,
            "stall": self.stall,
            "history_verdicts": self.history_verdicts,
        }


def build_collection(cfg: DuelConfig) -> Collection:
    try:
        c = builtin(cfg.collection)
    except ValueError:
        raise ConfigError(f"unknown collection {cfg.collection!r}", "collection") from None
    if cfg.disable_capabilities:
        c = c.restricted(*cfg.disable_capabilities)
    return c


class Duel:
    """One generator against one adversary, advanced a step at a time."""

    def __init__(self, cfg: DuelConfig, generator: Generator | None = None):
        self.cfg = cfg
        self.collection = build_collection(cfg)
        self.generator = generator or make_generator(cfg.generator, self.collection, **dict(cfg.generator_params))
        params = dict(cfg.adversary_params)
        if AdversaryKind(cfg.adversary) is AdversaryKind.IID:
            params.setdefault("seed", cfg.seed)
        self.adversary: Adversary = make_adversary(cfg.adversary, self.collection, **params)
        self.notions = tuple(Notion(n) for n in cfg.notions)
        self.checkpoints = set(cfg.resolved_checkpoints())
        self.traces: list[StepTrace] = []
        self.supports: list[FMS] = []
        self.step = 0
        self._previous: FMS | None = None
        self._previous_defined: bool | None = None
        self.support_changes = 0
        self.breadth_failures = 0
        self.failures: dict[str, list[int]] = {n.value: [] for n in self.notions}
        self.last_failure: dict[str, int] = {n.value: 0 for n in self.notions}
        self.evaluated: dict[str, bool] = {n.value: False for n in self.notions}
        self.index_stable_from: int | None = None
        self._index = object()

    def target_index(self) -> int | None:
        if self.cfg.target is not None:
            return self.cfg.target
        adv = self.adversary
        star = getattr(adv, "star", None)
        return star if star is not None else adv.committed_target

    def verdicts(self) -> dict[Notion, BreadthVerdict]:
        k_index = self.target_index()
        if k_index is None:
            return {}
        g = self.generator
        k = self.collection.language_at(k_index)
        out = {}
        for notion in self.notions:
            if notion is Notion.INCREASING_COVERAGE:
                continue
            out[notion] = evaluate(
                notion, g.support, k, g.seen, g.prior_firsts, self.collection, k_index, self.cfg.rival_bound
            )
        return out

    def advance(self) -> StepTrace:
        self.step += 1
        n = self.step
        x = self.adversary.next_element()
        d = self.generator.step(x)
        self.adversary.observe(self.generator)
        support = d.effective
        changed = self._previous is not None and (support != self._previous or d.defined != self._previous_defined)
        if changed:
            self.support_changes += 1
        if self._previous is None or changed:
            self.supports.append(support)
        self._previous, self._previous_defined = support, d.defined
        index = getattr(d, "index", None)
        if index != self._index:
            self._index = index
            self.index_stable_from = n
        trace = StepTrace(n, x, len(self.generator.seen), d.summary(), changed, adversary=self.adversary.status())
        if n in self.checkpoints:
            k_index = self.target_index()
            if k_index is not None:
                row, col = extent_cell(support, self.collection.language_at(k_index), self.generator.seen)
                trace.extent = (row.value, col.value)
            failed_primary = False
            for notion, verdict in self.verdicts().items():
                trace.verdicts[notion.value] = verdict.to_json()
                self.evaluated[notion.value] = True
                if not verdict.holds:
                    self.failures[notion.value].append(n)
                    self.last_failure[notion.value] = n
                    if notion is self.notions[0]:
                        failed_primary = True
            if failed_primary:
                self.breadth_failures += 1
        if self.cfg.record_supports:
            trace.support = support.to_json()
        self.traces.append(trace)
        return trace

    def run(self) -> tuple[list[StepTrace], RunReport]:
        while self.step < self.cfg.horizon:
            self.advance()
        return self.traces, self.report()

    def report(self) -> RunReport:
        n_star: dict[str, int | None] = {}
        for name, ok in self.evaluated.items():
            if not ok:
                continue
            last = self.last_failure[name]
            if last == self.step:
                n_star[name] = None
            else:
                n_star[name] = min(c for c in self.checkpoints if c > last)
        history: dict[str, dict] = {}
        k_index = self.target_index()
        if Notion.INCREASING_COVERAGE in self.notions and k_index is not None:
            verdict = check_increasing_coverage(self.supports, self.collection.language_at(k_index))
            history[Notion.INCREASING_COVERAGE.value] = verdict.to_json()
        adv = self.adversary
        index = self._index if self.step else None
        return RunReport(
            config=self.cfg,
            target=k_index,
            steps=self.step,
            n_star=n_star,
            counters=StabilityCounters(self.breadth_failures, self.support_changes),
            index_stable_from=self.index_stable_from if index is not None else None,
            final_index=index,
            checkpoint_failures=self.failures,
            phases=[p.to_json() for p in adv.phases],
            stall=adv.stall.to_json() if adv.stall else None,
            history_verdicts=history,
        )


def run_duel(cfg: DuelConfig) -> tuple[list[StepTrace], RunReport]:
    return Duel(cfg).run()


def stability_counters(traces: Sequence[StepTrace], notion: Notion | str | None = None) -> StabilityCounters:
    """Recount C_B and C_S from stored traces (C_B only sees checkpointed steps)."""
    changes = sum(1 for t in traces if t.changed)
    if notion is None:
        return StabilityCounters(0, changes)
    name = Notion(notion).value
    fails = sum(1 for t in traces if name in t.verdicts and not t.verdicts[name]["holds"])
    return StabilityCounters(fails, changes)


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_traces(path: str | Path, traces: Iterable[StepTrace]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in traces:
            fh.write(dumps({"schema_version": SCHEMA_VERSION, **t.to_json()}))
            fh.write("\n")


def read_traces(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_report(path: str | Path, report: RunReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report.to_json(), sort_keys=True, indent=2, ensure_ascii=False))
        fh.write("\n")


def _failed_at(cfg: DuelConfig, notion: Notion, grid: tuple[int, ...]) -> list[bool]:
    duel = Duel(cfg)
    duel.notions = (notion,)
    duel.checkpoints = set()
    wanted = set(grid)
    out = []
    while duel.step < max(grid):
        duel.advance()
        if duel.step in wanted:
            out.append(not duel.verdicts()[notion].holds)
    return out


def estimate_error_rate(
    cfg: DuelConfig,
    notion: Notion | str,
    trials: int,
    n_grid: Sequence[int],
    targets: Sequence[int] | None = None,
) -> dict[int, float]:
    """Fraction of seeded i.i.d. runs in which ``notion`` fails at each n of the grid.

    Trial i draws with seed derive_seed(cfg.seed, i); ``targets`` cycles the
    target index across trials.
    """
    if AdversaryKind(cfg.adversary) is not AdversaryKind.IID:
        raise ConfigError("error rates need the iid adversary", "adversary")
    if trials < 1:
        raise ConfigError("must be >= 1", "trials")
    grid = tuple(sorted(set(n_grid)))
    if not grid or grid[0] < 1:
        raise ConfigError("grid must be non-empty and start at >= 1", "n_grid")
    notion = Notion(notion)
    counts = [0] * len(grid)
    for i in range(trials):
        params = dict(cfg.adversary_params)
        if targets:
            params["target"] = targets[i % len(targets)]
        params["seed"] = derive_seed(cfg.seed, i)
        trial = DuelConfig(
            collection=cfg.collection,
            generator=cfg.generator,
            adversary=cfg.adversary,
            generator_params=cfg.generator_params,
            adversary_params=params,
            notions=(notion.value,),
            target=params.get("target", cfg.target),
            horizon=grid[-1],
            checkpoints=(),
            seed=params["seed"],
            rival_bound=cfg.rival_bound,
            disable_capabilities=cfg.disable_capabilities,
        )
        for k, failed in enumerate(_failed_at(trial, notion, grid)):
            counts[k] += failed
    return {n: counts[k] / trials for k, n in enumerate(grid)}


def _matrix_cell(cfg: DuelConfig) -> dict:
    _, report = run_duel(cfg)
    return report.to_json()


def run_matrix(cells: Sequence[DuelConfig], workers: int | None = None) -> list[dict]:
    """Run duels concurrently; cell i is reseeded with derive_seed(its seed, i)."""
    seeded = []
    for i, cfg in enumerate(cells):
        seeded.append(DuelConfig(**{**cfg.__dict__, "seed": derive_seed(cfg.seed, i)}))
    if workers == 1 or len(seeded) <= 1:
        return [_matrix_cell(c) for c in seeded]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_matrix_cell, seeded))
