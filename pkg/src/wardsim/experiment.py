"""Experiment pattern: parameters separated from model logic.

An :class:`Experiment` subclass holds every parameter of one model
configuration (distributions, capacities, routing, run control). Generic
runners execute replications, aggregate cross-replication summaries and
sweep a single parameter across scenarios while preserving common random
numbers (every scenario reuses the same master seed and replication
indices, so KPIs driven purely by arrival streams are bit-identical
across scenarios).
"""

from __future__ import annotations

import dataclasses
import math
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ConfigError
from .sampling import stream_table


@dataclass
class OccupancyDistribution:
    """Audited occupancy frequency table for one unit.

    ``counts[k]`` is the number of post-warm-up audit samples that observed
    exactly ``k`` occupants. Distributions pool across replications by
    summing counts.
    """

    unit: str
    counts: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_samples(cls, unit: str, samples: Sequence[int]) -> "OccupancyDistribution":
        counts: dict[int, int] = {}
        for value in samples:
            counts[value] = counts.get(value, 0) + 1
        return cls(unit, counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def pmf(self) -> dict[int, float]:
        total = self.total
        if total == 0:
            return {}
        return {k: self.counts[k] / total for k in sorted(self.counts)}

    def mean(self) -> float:
        total = self.total
        if total == 0:
            return 0.0
        return sum(k * c for k, c in self.counts.items()) / total

    def prob_at_least(self, n: int) -> float:
        """Fraction of audit samples with occupancy >= n."""
        total = self.total
        if total == 0:
            return 0.0
        return sum(c for k, c in self.counts.items() if k >= n) / total

    def pooled_with(self, other: "OccupancyDistribution") -> "OccupancyDistribution":
        counts = dict(self.counts)
        for k, c in other.counts.items():
            counts[k] = counts.get(k, 0) + c
        return OccupancyDistribution(self.unit, counts)


@dataclass
class DelayCurve:
    """Probability that an arrival would find all N beds occupied, per N."""

    unit: str
    capacities: list[int]
    probabilities: list[float]


@dataclass
class ReplicationResult:
    """KPIs and occupancy tables from one replication (post-warm-up only)."""

    replication_index: int
    kpis: dict[str, float]
    occupancy: dict[str, OccupancyDistribution] = field(default_factory=dict)
    extras: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    trace_lines: Optional[list[str]] = None


@dataclass
class ScenarioSummary:
    """Per-KPI mean and sample (n-1) standard deviation across replications."""

    n_replications: int
    kpi_means: dict[str, float]
    kpi_sds: dict[str, float]
    flags: list[str] = field(default_factory=list)


@dataclass
class ScenarioResult:
    """One scenario: its replications, summary and pooled distribution outputs."""

    label: str
    value: Optional[object]
    replications: list[ReplicationResult]
    summary: ScenarioSummary
    occupancy: dict[str, OccupancyDistribution] = field(default_factory=dict)
    delay: dict[str, DelayCurve] = field(default_factory=dict)


@dataclass
class ResultSet:
    """Output of a run or sweep: ordered scenarios plus sweep metadata."""

    model_id: str
    master_seed: int
    scenarios: list[ScenarioResult]
    param: Optional[str] = None


@dataclass(kw_only=True)
class Experiment:
    """Run-control parameters shared by every model.

    ``run_length`` is the total simulated span including warm-up; KPI
    accumulators reset at ``warm_up`` and the collection window is
    [warm_up, run_length]. Entities in service at the warm-up instant are
    not flushed; they simply contribute only post-warm-up observations.
    """

    run_length: float
    warm_up: float
    n_replications: int = 5
    master_seed: int = 0
    audit_interval: float = 1.0
    trace: bool = False

    model_id = "base"
    time_unit = "units"

    def validate(self) -> None:
        if self.run_length <= 0:
            raise ConfigError("run_length", f"must be > 0, got {self.run_length!r}")
        if self.warm_up < 0:
            raise ConfigError("warm_up", f"must be >= 0, got {self.warm_up!r}")
        if self.warm_up >= self.run_length:
            raise ConfigError("warm_up", f"must be < run_length ({self.run_length!r}), got {self.warm_up!r}")
        if self.n_replications < 1:
            raise ConfigError("replications", f"must be >= 1, got {self.n_replications!r}")
        if self.audit_interval <= 0:
            raise ConfigError("audit_interval", f"must be > 0, got {self.audit_interval!r}")
        self._validate_params()

    def _validate_params(self) -> None:
        """Model-specific validation; raises ConfigError with a field path."""

    def stream_names(self) -> list[str]:
        """Ordered stream slot table; position in the list is the slot index."""
        raise NotImplementedError

    def spawn(self, replication_index: int):
        return stream_table(self.stream_names(), self.master_seed, replication_index)

    def _run(self, replication_index: int) -> ReplicationResult:
        raise NotImplementedError

    def audit_times(self):
        """Audit sampling instants: (k + 0.5) * interval grid points within
        the collection window. The half-interval offset keeps audits off the
        integer-time instants where arrival events cluster."""
        interval = self.audit_interval
        t = (math.floor(self.warm_up / interval) + 0.5) * interval
        while t < self.warm_up:
            t += interval
        while t <= self.run_length:
            yield t
            t += interval

    def delay_curves(self, pooled: dict[str, OccupancyDistribution]) -> dict[str, DelayCurve]:
        """Distribution-level outputs derived from pooled occupancy; models override."""
        return {}


def run_replication(exp: Experiment, replication_index: int) -> ReplicationResult:
    """Run one replication; streams are spawned from (master_seed, index)."""
    exp.validate()
    if not 0 <= replication_index < exp.n_replications:
        raise ValueError(f"replication index {replication_index} outside 0..{exp.n_replications - 1}")
    return exp._run(replication_index)


def summarize(results: Sequence[ReplicationResult]) -> ScenarioSummary:
    """Mean and sample standard deviation per KPI, in replication-index order.

    Aggregation sorts by replication index first so that parallel execution
    cannot change the output. With a single replication the sd is reported
    as 0 and flagged.
    """
    ordered = sorted(results, key=lambda r: r.replication_index)
    kpi_names = list(ordered[0].kpis)
    means = {}
    sds = {}
    flags = []
    for name in kpi_names:
        values = [r.kpis[name] for r in ordered]
        means[name] = statistics.fmean(values)
        sds[name] = statistics.stdev(values) if len(values) > 1 else 0.0
    if len(ordered) == 1:
        flags.append("single replication: standard deviations reported as 0")
    seen = set()
    for r in ordered:
        for flag in r.flags:
            if flag not in seen:
                seen.add(flag)
                flags.append(f"rep {r.replication_index}: {flag}")
    return ScenarioSummary(len(ordered), means, sds, flags)


def pool_occupancy(results: Sequence[ReplicationResult]) -> dict[str, OccupancyDistribution]:
    pooled: dict[str, OccupancyDistribution] = {}
    for r in sorted(results, key=lambda x: x.replication_index):
        for unit, dist in r.occupancy.items():
            pooled[unit] = pooled[unit].pooled_with(dist) if unit in pooled else dist
    return pooled


def run_replications(exp: Experiment) -> tuple[list[ReplicationResult], ScenarioSummary]:
    """Run all replications of ``exp`` and summarize.

    Replications are independent (each owns its streams and engine) and are
    executed serially here; results are merged by index so a parallel
    executor would produce identical output.
    """
    exp.validate()
    results = [exp._run(i) for i in range(exp.n_replications)]
    return results, summarize(results)


def run_scenario(exp: Experiment, label: str, value: Optional[object] = None) -> ScenarioResult:
    results, summary = run_replications(exp)
    pooled = pool_occupancy(results)
    return ScenarioResult(label, value, results, summary, pooled, exp.delay_curves(pooled))


def run_scenarios(base: Experiment, param: str, values: Sequence) -> ResultSet:
    """Sweep one parameter; every scenario shares the base master seed (CRN)."""
    if len(values) == 0:
        raise ValueError("scenario sweep requires at least one value")
    field_names = {f.name for f in dataclasses.fields(base)}
    if param not in field_names:
        raise ConfigError(param, f"not a parameter of model {base.model_id!r}")
    scenarios = []
    for value in values:
        exp = dataclasses.replace(base, **{param: value})
        scenarios.append(run_scenario(exp, f"{param}={value}", value))
    return ResultSet(base.model_id, base.master_seed, scenarios, param)


def run_single(exp: Experiment, label: str = "base") -> ResultSet:
    """Run one configuration as a single-scenario result set."""
    return ResultSet(exp.model_id, exp.master_seed, [run_scenario(exp, label)], None)
