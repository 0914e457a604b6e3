"""Parameter sweeps: config parsing, per-run execution, and the report table."""

from __future__ import annotations

import csv
import io
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from hypergt.construction import BuilderConfig, eval_selector_bound, eval_two_stage_bound
from hypergt.errors import ConfigError, HypergtError
from hypergt.harness.generate import random_hypergraph
from hypergt.hypergraph import Hypergraph, compute_chi, compute_p, read_hypergraph
from hypergt.protocols import (
    NON_ADAPTIVE,
    THREE_STAGE,
    TWO_STAGE,
    TestOracle,
    guarantee_violations,
    run_protocol,
)

GENERATOR_KEYS = ("n", "d", "edges", "uniform", "min_diff", "seed")
SWEEP_KEYS = ("instance", *GENERATOR_KEYS, "protocol", "param", "builder", "budget", "sample_pool", "builder_seed")
INT_KEYS = {"n", "d", "edges", "min_diff", "seed", "param", "budget", "sample_pool", "builder_seed"}


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    parameter: int
    builder: BuilderConfig = BuilderConfig()
    instance: str | None = None
    generator: tuple[tuple[str, object], ...] | None = None

    def __post_init__(self) -> None:
        if (self.instance is None) == (self.generator is None):
            raise ConfigError("exactly one of an instance file or generator parameters is required")
        if self.protocol not in (NON_ADAPTIVE, TWO_STAGE, THREE_STAGE):
            raise ConfigError(f"unknown protocol {self.protocol!r}")

    @property
    def instance_id(self) -> str:
        if self.instance is not None:
            return Path(self.instance).name
        return "gen(" + ",".join(f"{k}={v}" for k, v in self.generator) + ")"

    def load(self) -> Hypergraph:
        if self.instance is not None:
            return read_hypergraph(self.instance)
        return random_hypergraph(**dict(self.generator))


def _value(key: str, raw: str):
    if key in INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} expects integers, got {raw!r}") from None
    if key == "uniform":
        if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"uniform expects a boolean, got {raw!r}")
        return raw.lower() in ("true", "1", "yes")
    return raw


def parse_sweep_config(text: str, base_dir: str | Path = ".") -> tuple[list[ExperimentConfig], int]:
    """Expand a ``key=value`` sweep file into run configs and the worker cap.

    Comma-separated values are swept; the runs are the Cartesian product in
    key order of :data:`SWEEP_KEYS`.
    """
    lists: dict[str, list] = {}
    workers = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "workers":
            workers = int(value)
            continue
        if key not in SWEEP_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        items = [s.strip() for s in value.split(",") if s.strip()]
        if not items:
            raise ConfigError(f"line {lineno}: empty list for {key!r}")
        lists[key] = [_value(key, s) for s in items]

    if "instance" in lists and any(k in lists for k in GENERATOR_KEYS):
        raise ConfigError("give either instance or generator keys, not both")
    for required in ("protocol", "param"):
        if required not in lists:
            raise ConfigError(f"missing key {required!r}")
    if "instance" not in lists:
        missing = [k for k in ("n", "d", "edges") if k not in lists]
        if missing:
            raise ConfigError(f"generator needs {', '.join(missing)}")

    keys = [k for k in SWEEP_KEYS if k in lists]
    configs = []
    for combo in itertools.product(*(lists[k] for k in keys)):
        values = dict(zip(keys, combo))
        builder = BuilderConfig(
            method=values.get("builder", "greedy"),
            budget=values.get("budget", BuilderConfig.budget),
            sample_pool=values.get("sample_pool", BuilderConfig.sample_pool),
            seed=values.get("builder_seed", 0),
        )
        instance = generator = None
        if "instance" in values:
            instance = str(Path(base_dir) / values["instance"])
        else:
            generator = tuple((k, values[k]) for k in GENERATOR_KEYS if k in values)
        configs.append(ExperimentConfig(values["protocol"], values["param"], builder, instance, generator))
    return configs, workers


@dataclass
class RunRow:
    index: int
    instance: str
    protocol: str
    parameter: int
    n: int = 0
    d: int = 0
    E: int = 0
    p_min: str = ""
    chi: str = ""
    preconditions: bool = False
    stage1_t: str = ""
    stage1_bound: str = ""
    max_total: str = ""
    mean_total: str = ""
    additive: str = ""
    total_bound: str = ""
    success: bool = False
    note: str = ""
    seconds: float = 0.0


COLUMNS = ["run", "instance", "protocol", "param", "n", "d", "E", "p_min", "chi", "preconditions",
           "stage1_t", "stage1_bound", "max_total", "mean_total", "additive",
           "total_bound", "success", "note"]


def _preconditions(h: Hypergraph, protocol: str, k: int) -> tuple[bool, str, str]:
    p = compute_p(h) if h.size >= 2 else None
    chi = ""
    if protocol == NON_ADAPTIVE:
        ok = p is None or 1 <= k <= p
    elif protocol == TWO_STAGE:
        ok = 1 <= k <= h.size - 1 and compute_chi(h, k) >= 1
        chi = str(compute_chi(h, k)) if 1 <= k <= h.size - 1 else ""
    else:
        ok = 1 <= k < h.d
    return ok, "" if p is None else str(p), chi


def run_experiment(index: int, cfg: ExperimentConfig) -> RunRow:
    """Run one config against every edge as the defective one."""
    start = time.perf_counter()
    row = RunRow(index, cfg.instance_id, cfg.protocol, cfg.parameter)
    try:
        h = cfg.load()
        row.n, row.d, row.E = h.n, h.d, h.size
        row.preconditions, row.p_min, row.chi = _preconditions(h, cfg.protocol, cfg.parameter)
        totals = []
        violations = []
        stage1 = None
        for edge in h.edges:
            t = run_protocol(cfg.protocol, h, TestOracle(edge, h), cfg.parameter, cfg.builder)
            totals.append(t.total_tests)
            violations += guarantee_violations(h, t)
            if t.stages and stage1 is None:
                stage1 = t.stages[0].selector
        row.max_total = str(max(totals))
        row.mean_total = f"{sum(totals) / len(totals):.3f}"
        if stage1 is not None:
            row.stage1_t = str(stage1.t)
            q, chi = (1, cfg.parameter) if cfg.protocol != TWO_STAGE else (cfg.parameter, int(row.chi))
            row.stage1_bound = str(eval_selector_bound(stage1.width, h.d, q, h.d + 1, chi, h.size).ceiling)
        if cfg.protocol == TWO_STAGE:
            bound = eval_two_stage_bound(h.n, h.d, cfg.parameter, int(row.chi), h.size)
            row.additive = str(bound.additive)
            row.total_bound = str(bound.ceiling)
        elif cfg.protocol == NON_ADAPTIVE:
            row.total_bound = row.stage1_bound
        row.success = not violations
        row.note = violations[0] if violations else ""
    except HypergtError as exc:
        row.success = False
        row.note = f"{type(exc).__name__}: {exc}"
    row.seconds = time.perf_counter() - start
    return row


@dataclass
class ExperimentReport:
    rows: list[RunRow] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        eligible = [r for r in self.rows if r.preconditions]
        return sum(r.success for r in eligible) / len(eligible) if eligible else 1.0

    @property
    def ok(self) -> bool:
        return all(r.success for r in self.rows if r.preconditions)

    def to_table(self, delimiter: str = ",", timing: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        writer.writerow(COLUMNS + (["seconds"] if timing else []))
        for r in self.rows:
            values = [r.index, r.instance, r.protocol, r.parameter, r.n, r.d, r.E, r.p_min, r.chi,
                      int(r.preconditions), r.stage1_t, r.stage1_bound, r.max_total, r.mean_total,
                      r.additive, r.total_bound, int(r.success), r.note]
            writer.writerow(values + ([f"{r.seconds:.3f}"] if timing else []))
        ts = [int(r.stage1_t) for r in self.rows if r.stage1_t]
        buf.write(f"# runs={len(self.rows)}")
        if ts:
            buf.write(f" mean_stage1_t={sum(ts) / len(ts):.3f} max_stage1_t={max(ts)}")
        buf.write(f" success_rate={self.success_rate:.3f}\n")
        return buf.getvalue()


def run_sweep(configs: list[ExperimentConfig], workers: int = 1) -> ExperimentReport:
    """Run every config; rows come back in config order whatever the completion order."""
    if not configs:
        raise ConfigError("sweep has no runs")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(run_experiment, range(len(configs)), configs))
    return ExperimentReport(sorted(rows, key=lambda r: r.index))


def with_builder(configs: list[ExperimentConfig], **changes) -> list[ExperimentConfig]:
    return [replace(c, builder=replace(c.builder, **changes)) for c in configs]
