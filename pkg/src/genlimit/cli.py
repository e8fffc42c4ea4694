"""Command-line front-end: condition checks, duels, matrices, error rates, reports."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .adversaries import AdversaryKind
from .breadth import HallucinationExtent, MissingExtent, Notion
from .collection import CAPABILITY_FLAGS, CollectionName, builtin
from .conditions import SearchBounds, check_angluin, check_weak_angluin, closure_dimension
from .errors import (
    CapabilityError,
    CapabilityMissing,
    ConfigError,
    GenLimitError,
    NotAViolationPoint,
    WrongCollection,
)
from .generators import REQUIREMENTS, GeneratorKind
from .sim import Duel, DuelConfig, estimate_error_rate, read_traces, run_matrix, write_report, write_traces

DEFAULT_HORIZON = 10_000

GENERATOR_ALIASES = {"KM": GeneratorKind.KM_SUBSET, "KM_SUBSET": GeneratorKind.KM_SUBSET}
ADVERSARY_ALIASES = {"lb_phase": AdversaryKind.LOWER_BOUND, "lower_bound": AdversaryKind.LOWER_BOUND}

DUEL_KEYS = frozenset(
    {
        "collection",
        "generator",
        "generator_params",
        "adversary",
        "adversary_params",
        "target",
        "star",
        "notion",
        "notions",
        "predicate",
        "horizon",
        "checkpoints",
        "seed",
        "budget",
        "repeat",
        "rival_bound",
        "disable_capabilities",
        "record_supports",
        "d",
        "out",
    }
)
MATRIX_KEYS = frozenset(
    {"collections", "generators", "adversaries", "notions", "horizon", "seed", "budget", "out", "workers", "rival_bound", "targets"}
)


@dataclass(frozen=True)
class RunMatrixConfig:
    cells: tuple[DuelConfig, ...]
    out: str | None = None
    workers: int | None = None


def _enum(value, enum_cls, field_name: str, aliases: dict | None = None):
    if isinstance(value, enum_cls):
        return value
    text = str(value)
    if aliases:
        for key in (text, text.upper(), text.lower()):
            if key in aliases:
                return aliases[key]
    for key in (text, text.upper(), text.lower()):
        try:
            return enum_cls(key)
        except ValueError:
            continue
    choices = ", ".join(m.value for m in enum_cls)
    raise ConfigError(f"unknown value {value!r} (choose from {choices})", field_name)


def _int(raw: dict, key: str, default=None, minimum: int | None = None):
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"expected an integer, got {value!r}", key) from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}", key)
    return value


def _notions(raw: dict) -> tuple[str, ...]:
    value = raw.get("notions", raw.get("notion"))
    if value is None:
        return ()
    if isinstance(value, str):
        value = [v for v in value.split(",") if v]
    return tuple(_enum(v, Notion, "notions").value for v in value)


def validate_capabilities(cfg: DuelConfig) -> None:
    """Reject a cell before running it if the collection cannot serve the generator."""
    kind = GeneratorKind(cfg.generator)
    c = builtin(cfg.collection)
    if cfg.disable_capabilities:
        c = c.restricted(*cfg.disable_capabilities)
    missing = c.capabilities.missing(REQUIREMENTS[kind])
    if missing:
        raise CapabilityError(f"{kind.value} needs {', '.join(missing)} on {cfg.collection}", "generator")
    if kind is GeneratorKind.SUFFIX_INCREASING and c.name is not CollectionName.SUFFIXES:
        raise ConfigError(f"{kind.value} runs only on SUFFIXES", "generator")
    if kind is GeneratorKind.CLOSURE_STABLE and "d" not in cfg.generator_params:
        raise ConfigError("CLOSURE_STABLE needs generator_params.d", "generator_params")
    adv = AdversaryKind(cfg.adversary)
    if adv is AdversaryKind.STABLE_COVERAGE and c.name is not CollectionName.SINGLE_REMOVAL:
        raise ConfigError("the stable-coverage adversary runs only on SINGLE_REMOVAL", "adversary")


def duel_config(raw: dict) -> DuelConfig:
    unknown = sorted(set(raw) - DUEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", unknown[0])
    for key in ("collection", "generator", "adversary"):
        if raw.get(key) is None:
            raise ConfigError("is required", key)
    collection = _enum(raw["collection"], CollectionName, "collection").value
    generator = _enum(raw["generator"], GeneratorKind, "generator", GENERATOR_ALIASES)
    adversary = _enum(raw["adversary"], AdversaryKind, "adversary", ADVERSARY_ALIASES)
    disabled = tuple(raw.get("disable_capabilities") or ())
    bad = [f for f in disabled if f not in CAPABILITY_FLAGS]
    if bad:
        raise ConfigError(f"unknown capability flags {bad}", "disable_capabilities")

    gen_params = dict(raw.get("generator_params") or {})
    if raw.get("d") is not None:
        gen_params["d"] = _int(raw, "d", minimum=0)
    adv_params = dict(raw.get("adversary_params") or {})
    target = _int(raw, "target")
    notions = _notions(raw)
    budget = _int(raw, "budget", minimum=1)
    if adversary in (AdversaryKind.CANONICAL, AdversaryKind.IID):
        if target is None and "target" not in adv_params:
            raise ConfigError(f"{adversary.value} needs a target", "target")
        adv_params.setdefault("target", target)
        if adversary is AdversaryKind.CANONICAL and raw.get("repeat") is not None:
            adv_params["repeat"] = _int(raw, "repeat", minimum=1)
    elif adversary is AdversaryKind.LOWER_BOUND:
        star = _int(raw, "star", adv_params.get("star"))
        if star is None:
            raise ConfigError("lower_bound needs a star index", "star")
        predicate = raw.get("predicate", adv_params.get("predicate"))
        if predicate is None:
            if not notions:
                raise ConfigError("lower_bound needs a predicate", "predicate")
            predicate = notions[0]
        adv_params.update(star=star, predicate=_enum(predicate, Notion, "predicate").value)
        if budget is not None:
            adv_params["budget"] = budget
        if raw.get("rival_bound") is not None:
            adv_params["rival_bound"] = _int(raw, "rival_bound", minimum=1)
        if not notions:
            notions = (adv_params["predicate"],)
    elif budget is not None:
        adv_params["budget"] = budget

    checkpoints = raw.get("checkpoints")
    cfg = DuelConfig(
        collection=collection,
        generator=generator.value,
        adversary=adversary.value,
        generator_params=gen_params,
        adversary_params=adv_params,
        notions=notions,
        target=target,
        horizon=_int(raw, "horizon", DEFAULT_HORIZON, minimum=1),
        checkpoints=None if checkpoints is None else tuple(int(c) for c in checkpoints),
        seed=_int(raw, "seed", 0),
        rival_bound=_int(raw, "rival_bound", 50, minimum=1),
        disable_capabilities=disabled,
        record_supports=bool(raw.get("record_supports", False)),
    )
    validate_capabilities(cfg)
    return cfg


def matrix_config(raw: dict) -> RunMatrixConfig:
    unknown = sorted(set(raw) - MATRIX_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", unknown[0])
    for key in ("collections", "generators", "adversaries"):
        if not raw.get(key):
            raise ConfigError("must be a non-empty list", key)
    targets = raw.get("targets") or {}
    cells = []
    for coll, gen, adv in itertools.product(raw["collections"], raw["generators"], raw["adversaries"]):
        gen_spec = gen if isinstance(gen, dict) else {"generator": gen}
        adv_spec = adv if isinstance(adv, dict) else {"adversary": adv}
        cell = {"collection": coll, **gen_spec, **adv_spec}
        name = _enum(coll, CollectionName, "collections").value
        if "target" not in cell and "star" not in cell and name in targets:
            cell["target"] = targets[name]
        for key in ("horizon", "seed", "budget", "rival_bound"):
            if key in raw and key not in cell:
                cell[key] = raw[key]
        if "notions" in raw and "notions" not in cell:
            cell["notions"] = raw["notions"]
        cells.append(duel_config(cell))
    return RunMatrixConfig(tuple(cells), raw.get("out"), _int(raw, "workers", minimum=1))


def parse_config(source: str | Path | dict | None = None, **flags) -> DuelConfig | RunMatrixConfig:
    """Load a JSON config file (or dict) and overlay non-None flags."""
    if source is None:
        raw: dict = {}
    elif isinstance(source, dict):
        raw = dict(source)
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist", "config")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}", "config") from None
        if not isinstance(raw, dict):
            raise ConfigError("top level must be an object", "config")
    raw.update({k: v for k, v in flags.items() if v is not None})
    if "collections" in raw:
        return matrix_config(raw)
    return duel_config(raw)


# --------------------------------------------------------------------------
# tables

_ROW_LABELS = {
    MissingExtent.NONE: "no missing",
    MissingExtent.FINITE: "finitely many missing",
    MissingExtent.INFINITE_PRESENT_INFINITE: "inf missing, inf present",
    MissingExtent.INFINITE_PRESENT_FINITE: "inf missing, finite present",
}
_COL_LABELS = {
    HallucinationExtent.NONE: "none",
    HallucinationExtent.FINITE: "finite",
    HallucinationExtent.INFINITE: "infinite",
}


def extent_table(cells: Counter) -> str:
    """Missing-extent rows by hallucination-extent columns, with observed counts."""
    width = max(len(v) for v in _ROW_LABELS.values())
    header = " " * width + " | " + " | ".join(f"{v:>8}" for v in _COL_LABELS.values())
    lines = [header, "-" * len(header)]
    for row, label in _ROW_LABELS.items():
        counts = [cells.get((row.value, col.value), 0) for col in _COL_LABELS]
        lines.append(f"{label:<{width}} | " + " | ".join(f"{c:>8}" for c in counts))
    return "\n".join(lines)


def landscape_table(reports: Sequence[dict]) -> str:
    rows = [("collection", "generator", "adversary", "notion", "n*", "C_B", "C_S", "stall")]
    for r in reports:
        cfg = r["config"]
        for notion in cfg["notions"] or ["-"]:
            n_star = r["n_star"].get(notion, "-") if notion != "-" else "-"
            rows.append(
                (
                    cfg["collection"],
                    cfg["generator"],
                    cfg["adversary"],
                    notion,
                    "never" if n_star is None else str(n_star),
                    str(r["counters"]["C_B"]),
                    str(r["counters"]["C_S"]),
                    r["stall"]["reason"] if r["stall"] else "",
                )
            )
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)


def summarize_traces(traces: Sequence[dict]) -> dict:
    """Recompute counters, n* per notion and the extent grid from stored traces."""
    cells: Counter = Counter()
    failures: dict[str, int] = {}
    last_fail: dict[str, int] = {}
    checked: dict[str, list[int]] = {}
    changes = 0
    for t in traces:
        changes += bool(t.get("changed"))
        if "extent" in t:
            cells[tuple(t["extent"])] += 1
        for name, v in t.get("verdicts", {}).items():
            checked.setdefault(name, []).append(t["step"])
            if not v["holds"]:
                failures[name] = failures.get(name, 0) + 1
                last_fail[name] = t["step"]
    n_star = {}
    for name, steps in checked.items():
        later = [s for s in steps if s > last_fail.get(name, 0)]
        n_star[name] = later[0] if later else None
    return {"steps": len(traces), "C_S": changes, "failures": failures, "n_star": n_star, "extent": cells}


# --------------------------------------------------------------------------
# subcommands


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def cmd_check(args: argparse.Namespace) -> int:
    if not args.collection:
        raise ConfigError("is required", "collection")
    name = _enum(args.collection, CollectionName, "collection")
    c = builtin(name)
    if args.disable:
        c = c.restricted(*args.disable)
    try:
        bounds = SearchBounds(*args.bounds)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "bounds") from None
    out: dict = {"collection": name.value}
    if args.condition in ("angluin", "all"):
        out["angluin"] = check_angluin(c, bounds).to_json()
    if args.condition in ("weak_angluin", "all"):
        out["weak_angluin"] = check_weak_angluin(c, bounds).to_json()
    if args.condition in ("closure_dimension", "all"):
        out["closure_dimension"] = closure_dimension(c, bounds).to_json()
    _emit(out, args.out)
    return 0


def _duel_flags(args: argparse.Namespace) -> dict:
    return {
        "collection": args.collection,
        "generator": args.generator,
        "adversary": args.adversary,
        "target": args.target,
        "star": args.star,
        "notions": args.notion,
        "horizon": args.horizon,
        "seed": args.seed,
        "budget": args.budget,
        "d": getattr(args, "d", None),
    }


def cmd_duel(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config, **_duel_flags(args))
    if isinstance(cfg, RunMatrixConfig):
        raise ConfigError("use the matrix subcommand for grid configs", "config")
    traces, report = Duel(cfg).run()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_traces(out / "traces.jsonl", traces)
        write_report(out / "report.json", report)
    body = report.to_json()
    body.pop("checkpoint_failures")
    print(json.dumps(body, sort_keys=True, indent=2))
    print(extent_table(Counter(tuple(t.extent) for t in traces if t.extent)))
    return 0


def cmd_matrix(args: argparse.Namespace) -> int:
    if not args.config:
        raise ConfigError("matrix runs need --config", "config")
    cfg = parse_config(args.config, horizon=args.horizon, seed=args.seed, out=args.out)
    if not isinstance(cfg, RunMatrixConfig):
        raise ConfigError("matrix configs list collections, generators and adversaries", "config")
    reports = run_matrix(cfg.cells, cfg.workers)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "matrix.json").write_text(json.dumps(reports, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(landscape_table(reports))
    return 0


def cmd_rate(args: argparse.Namespace) -> int:
    targets = [int(t) for t in args.targets.split(",")] if args.targets else None
    flags = _duel_flags(args)
    flags["adversary"] = AdversaryKind.IID.value
    if flags["target"] is None and targets:
        flags["target"] = targets[0]
    cfg = parse_config(args.config, **flags)
    if not cfg.notions:
        raise ConfigError("rate estimation needs --notion", "notion")
    grid = range(1, args.grid + 1)
    rates = estimate_error_rate(cfg, cfg.notions[0], args.trials, grid, targets)
    _emit({"notion": cfg.notions[0], "trials": args.trials, "error": {str(n): r for n, r in rates.items()}}, args.out)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.traces)
    if path.is_dir():
        path = path / "traces.jsonl"
    if not path.exists():
        raise ConfigError(f"{path} does not exist", "traces")
    summary = summarize_traces(read_traces(path))
    cells = summary.pop("extent")
    print(json.dumps(summary, sort_keys=True, indent=2))
    print(extent_table(cells))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genlimit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--collection")
        p.add_argument("--generator")
        p.add_argument("--adversary")
        p.add_argument("--target", type=int)
        p.add_argument("--star", type=int)
        p.add_argument("--notion")
        p.add_argument("--horizon", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--d", type=int, help="closure dimension for CLOSURE_STABLE")
        p.add_argument("--config")
        p.add_argument("--out")

    p = sub.add_parser("check", help="bounded tell-tale condition checks")
    p.add_argument("--collection")
    p.add_argument("--condition", choices=("angluin", "weak_angluin", "closure_dimension", "all"), default="all")
    p.add_argument(
        "--bounds",
        type=int,
        nargs=4,
        default=(25, 2, 100, 3),
        metavar=("MAX_INDEX", "MAX_SIZE", "HORIZON", "CHAIN_DEPTH"),
    )
    p.add_argument("--disable", nargs="*", default=(), choices=CAPABILITY_FLAGS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("duel", help="one generator against one adversary")
    common(p)
    p.set_defaults(func=cmd_duel)

    p = sub.add_parser("matrix", help="grid of duels from a config file")
    p.add_argument("--config")
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("rate", help="empirical error rate under i.i.d. draws")
    common(p)
    p.add_argument("--targets", help="comma-separated target indices cycled across trials")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--grid", type=int, default=50, help="evaluate n = 1..GRID")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("report", help="re-summarize a stored trace file")
    p.add_argument("traces")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 3
    except CapabilityMissing as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, NotAViolationPoint, WrongCollection) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GenLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
