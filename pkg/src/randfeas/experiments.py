"""Random-versus-reference experiments on weighted G(n, m) graphs.

A run sweeps a grid of ``(n, m_edges)`` cells.  Each trial draws a connected
G(n, m), weights it, builds a weight-blind spanning tree and compares its
cost with a reference: the exact MST, or the distance-network Steiner
2-approximation on a random terminal set.  Every trial owns the seed
substream ``(seed, n, m_edges, trial)``, which makes output independent of
execution order and worker count.

Config files are plain ``key = value`` text (``#`` starts a comment)::

    problem = mst                 # mst | steiner
    n_min = 4
    n_max = 30
    m_edges_policy = density:0,0.3,0.5,0.7,1   # or: all
    dist = uniform:0:1
    trials = 100
    seed = 0
    terminal_fraction = 0.5       # steiner only
"""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConfigInvalid, ConnectivityUnreachable, EmptyInput, RandFeasError
from .instances import (
    DistributionSpec,
    Seed,
    SteinerInstance,
    WeightedGraph,
    assign_weights,
    pick_terminals,
    sample_gnm,
)
from .solvers import mst, random_feasible_tree, steiner_2approx

log = logging.getLogger(__name__)

PROBLEMS = ("mst", "steiner")
DEFAULT_DENSITIES = (0.0, 0.3, 0.5, 0.7, 1.0)
DEFAULT_TRIALS = 100


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "mst"
    n_min: int = 4
    n_max: int = 30
    densities: tuple[float, ...] | None = DEFAULT_DENSITIES  # None sweeps every m_edges
    dist: DistributionSpec = field(default_factory=lambda: DistributionSpec.uniform(0, 1))
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    terminal_fraction: float = 0.5

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigInvalid(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if not (2 <= self.n_min <= self.n_max):
            raise ConfigInvalid(f"need 2 <= n_min <= n_max, got {self.n_min}..{self.n_max}")
        if self.trials < 1:
            raise ConfigInvalid(f"trials must be >= 1, got {self.trials}")
        if not (0 <= self.seed < 2**64):
            raise ConfigInvalid(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not (0 < self.terminal_fraction <= 1):
            raise ConfigInvalid(f"terminal_fraction must lie in (0, 1], got {self.terminal_fraction}")
        if self.densities is not None:
            if not self.densities or any(not (0 <= f <= 1) for f in self.densities):
                raise ConfigInvalid(f"densities must be fractions in [0, 1], got {self.densities}")
        if not self.dist.nonnegative:
            raise ConfigInvalid(f"{self.problem} experiments need nonnegative weights, got {self.dist}")

    @property
    def policy_text(self) -> str:
        if self.densities is None:
            return "all"
        return "density:" + ",".join(_fmt(f) for f in self.densities)

    def cells(self) -> list[tuple[int, int]]:
        """Grid cells in emission order."""
        out = []
        for n in range(self.n_min, self.n_max + 1):
            total = n * (n - 1) // 2
            if self.densities is None:
                if n - 1 > 3:
                    log.info("n=%d: skipping m_edges 3..%d (cannot be connected)", n, n - 2)
                ms = range(n - 1, total + 1)
            else:
                ms = sorted({min(total, max(n - 1, math.floor(f * total + 0.5))) for f in self.densities})
            out.extend((n, m) for m in ms)
        return out

    def to_text(self) -> str:
        lines = [
            f"problem = {self.problem}",
            f"n_min = {self.n_min}",
            f"n_max = {self.n_max}",
            f"m_edges_policy = {self.policy_text}",
            f"dist = {self.dist.dist_id}",
            f"trials = {self.trials}",
            f"seed = {self.seed}",
            f"terminal_fraction = {_fmt(self.terminal_fraction)}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> ExperimentConfig:
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigInvalid(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        kwargs = {}
        try:
            for key, value in values.items():
                if key == "problem":
                    kwargs["problem"] = value.lower()
                elif key in ("n_min", "n_max", "trials", "seed"):
                    kwargs[key] = int(value)
                elif key == "terminal_fraction":
                    kwargs[key] = float(value)
                elif key == "dist":
                    kwargs["dist"] = DistributionSpec.parse(value)
                elif key == "m_edges_policy":
                    kwargs["densities"] = _parse_policy(value)
                else:
                    raise ConfigInvalid(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(str(exc)) from None
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> ExperimentConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, **overrides)


def _parse_policy(value: str) -> tuple[float, ...] | None:
    value = value.strip().lower()
    if value == "all":
        return None
    if value.startswith("density:"):
        return tuple(float(x) for x in value[len("density:"):].split(","))
    raise ConfigInvalid(f"m_edges_policy must be 'all' or 'density:f1,f2,...', got {value!r}")


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


# ----------------------------------------------------------------- records


@dataclass
class ExperimentRecord:
    problem: str
    n: int
    m_edges: int
    dist_id: str
    trial_index: int
    random_cost: float | None
    reference_cost: float | None
    ratio: float | None
    rejections: int | None
    status: str = "ok"


RECORD_COLUMNS = [f.name for f in fields(ExperimentRecord)]


@dataclass
class RunSummary:
    cells: int = 0
    records: int = 0
    failed: int = 0
    dropped: int = 0


def trial_instance(cfg: ExperimentConfig, n: int, m: int, t: int
                   ) -> tuple[WeightedGraph | SteinerInstance, int, Seed]:
    """Rebuild the weighted instance of trial ``t`` in cell ``(n, m)``.

    Returns the graph (or Steiner instance), the rejection count and the
    trial's base seed; ``base.spawn(2)`` drives the weight-blind tree.
    """
    base = Seed(cfg.seed).spawn(n, m, t)
    g, rejections = sample_gnm(n, m, base.spawn(0), require_connected=True)
    g = assign_weights(g, cfg.dist, base.spawn(1))
    if cfg.problem == "steiner":
        return pick_terminals(g, math.floor(cfg.terminal_fraction * n), base.spawn(3)), rejections, base
    return g, rejections, base


def _trial(cfg: ExperimentConfig, n: int, m: int, t: int) -> ExperimentRecord:
    inst, rejections, base = trial_instance(cfg, n, m, t)
    if isinstance(inst, SteinerInstance):
        random_cost = random_feasible_tree(inst.graph, base.spawn(2)).cost
        reference = steiner_2approx(inst).cost
    else:
        random_cost = random_feasible_tree(inst, base.spawn(2)).cost
        reference = mst(inst).cost
    ratio = random_cost / reference if reference > 0 else None
    return ExperimentRecord(cfg.problem, n, m, cfg.dist.dist_id, t, random_cost, reference, ratio, rejections)


def _failed(cfg, n, m, t, exc: Exception) -> ExperimentRecord:
    return ExperimentRecord(cfg.problem, n, m, cfg.dist.dist_id, t, None, None, None, None,
                            f"failed:{type(exc).__name__}")


def run_cell(cfg: ExperimentConfig, n: int, m: int) -> list[ExperimentRecord]:
    """All trials of one grid cell; failures become ``failed:*`` rows."""
    out = []
    unreachable = None
    for t in range(cfg.trials):
        if unreachable is not None:
            out.append(_failed(cfg, n, m, t, unreachable))
            continue
        try:
            out.append(_trial(cfg, n, m, t))
        except ConnectivityUnreachable as exc:
            # remaining trials in this cell would hit the same cap
            unreachable = exc
            out.append(_failed(cfg, n, m, t, exc))
        except RandFeasError as exc:
            out.append(_failed(cfg, n, m, t, exc))
    return out


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, summary: RunSummary | None = None,
                   workers: int = 1) -> Iterator[ExperimentRecord]:
    """Yield records in grid order.  Rows whose reference cost is not
    positive are dropped and counted in ``summary``."""
    summary = summary if summary is not None else RunSummary()
    jobs = [(cfg, n, m) for n, m in cfg.cells()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from _drain(pool.map(_run_cell_args, jobs), summary)
    else:
        yield from _drain(map(_run_cell_args, jobs), summary)
    if summary.dropped:
        log.warning("dropped %d rows with nonpositive reference cost", summary.dropped)
    if summary.failed:
        log.warning("%d trials failed", summary.failed)


def _drain(cell_results, summary: RunSummary) -> Iterator[ExperimentRecord]:
    for records in cell_results:
        summary.cells += 1
        for rec in records:
            if rec.status == "ok" and rec.ratio is None:
                summary.dropped += 1
                continue
            if rec.status != "ok":
                summary.failed += 1
            summary.records += 1
            yield rec


def run_mst_experiment(cfg: ExperimentConfig, summary: RunSummary | None = None,
                       workers: int = 1) -> Iterator[ExperimentRecord]:
    if cfg.problem != "mst":
        raise ConfigInvalid(f"expected an mst config, got problem={cfg.problem!r}")
    return run_experiment(cfg, summary, workers)


def run_steiner_experiment(cfg: ExperimentConfig, summary: RunSummary | None = None,
                           workers: int = 1) -> Iterator[ExperimentRecord]:
    if cfg.problem != "steiner":
        raise ConfigInvalid(f"expected a steiner config, got problem={cfg.problem!r}")
    return run_experiment(cfg, summary, workers)


# --------------------------------------------------------------------- csv


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _to_csv(columns: list[str], rows: Iterable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(getattr(row, c)) for c in columns])
    return buf.getvalue()


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    return _to_csv(RECORD_COLUMNS, records)


def records_from_csv(text: str) -> list[ExperimentRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        def num(key, cast=float):
            return cast(row[key]) if row[key] != "" else None
        out.append(ExperimentRecord(
            row["problem"], int(row["n"]), int(row["m_edges"]), row["dist_id"], int(row["trial_index"]),
            num("random_cost"), num("reference_cost"), num("ratio"), num("rejections", int), row["status"]))
    return out


# -------------------------------------------------------------- aggregates


@dataclass
class AggregateRow:
    """Summary of the ``ok`` trials in one (problem, n, density bucket, dist) group.

    ``density_bucket`` is ``m_edges / C(n, 2)`` rounded to one decimal;
    ``std_error`` is the sample standard deviation of the ratio over
    ``sqrt(trials)`` and is blank for a single trial.
    """

    problem: str
    n: int
    density_bucket: float
    dist_id: str
    trials: int
    mean_ratio: float
    std_error: float | None
    median_ratio: float
    min_ratio: float
    max_ratio: float


AGGREGATE_COLUMNS = [f.name for f in fields(AggregateRow)]


def density_bucket(n: int, m_edges: int) -> float:
    return round(m_edges / (n * (n - 1) // 2), 1)


def emit_aggregates(records: Iterable[ExperimentRecord]) -> list[AggregateRow]:
    """Group ``ok`` records, in first-seen order, and summarise their ratios."""
    groups: dict[tuple, list[float]] = {}
    for rec in records:
        if rec.status != "ok" or rec.ratio is None:
            continue
        key = (rec.problem, rec.n, density_bucket(rec.n, rec.m_edges), rec.dist_id)
        groups.setdefault(key, []).append(rec.ratio)
    if not groups:
        raise EmptyInput("no successful records to aggregate")
    rows = []
    for (problem, n, bucket, dist_id), ratios in groups.items():
        count = len(ratios)
        se = statistics.stdev(ratios) / math.sqrt(count) if count > 1 else None
        rows.append(AggregateRow(problem, n, bucket, dist_id, count, statistics.fmean(ratios), se,
                                 statistics.median(ratios), min(ratios), max(ratios)))
    return rows


def aggregates_to_csv(rows: Iterable[AggregateRow]) -> str:
    return _to_csv(AGGREGATE_COLUMNS, rows)


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
