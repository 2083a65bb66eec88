"""Acute stroke unit / rehabilitation unit capacity planning model.

Four patient types (Stroke, TIA, ComplexNeurological, Other) arrive
externally to an acute stroke unit (ASU); some types also arrive externally
to a rehabilitation unit. Both units have infinite capacity: occupancy is
counted, never contended, and capacity questions are answered afterwards
from the occupancy distribution. On completing an ASU stay a patient is
routed by a per-type pmf over {Rehab, ESD, Other}; Rehab transfers enter
the rehabilitation unit, ESD and Other leave the model. Rehab stays end
with a per-type post-rehab routing draw (kept for config compatibility;
every destination exits).

The probability of delay for a candidate capacity N is the fraction of
post-warm-up audit samples with occupancy >= N, i.e. the fraction of time
an arriving patient would find all N beds occupied (PASTA justifies the
time-fraction estimator for Poisson externals).

Stream slot table (slot index = position; one block of six per type, types
in canonical order Stroke, TIA, ComplexNeurological, Other; slots exist
whether or not a type is configured so the allocation never shifts):

    6*t + 0  asu_arrival.<type>      6*t + 3  rehab_arrival.<type>
    6*t + 1  asu_los.<type>          6*t + 4  rehab_los.<type>
    6*t + 2  post_asu.<type>         6*t + 5  post_rehab.<type>

All times are in days.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .engine import Engine, Timeout, Trace
from .errors import ConfigError
from .experiment import (
    DelayCurve,
    Experiment,
    OccupancyDistribution,
    ReplicationResult,
)
from .sampling import Discrete, Distribution

PATIENT_TYPES = ("Stroke", "TIA", "ComplexNeurological", "Other")
POST_ASU_DESTINATIONS = ("Rehab", "ESD", "Other")
POST_REHAB_DESTINATIONS = ("ESD", "Other")

ASU_UNIT = "asu"
REHAB_UNIT = "rehab"


def _routing_pmf(table: Mapping[str, float], destinations: Sequence[str], path: str) -> Discrete:
    unknown = set(table) - set(destinations)
    if unknown:
        raise ConfigError(path, f"unknown destinations {sorted(unknown)}; expected {list(destinations)}")
    p = [float(table.get(d, 0.0)) for d in destinations]
    try:
        return Discrete(tuple(destinations), tuple(p))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


@dataclass
class PatientTypeParams:
    """Arrival, length-of-stay and routing parameters for one patient type."""

    asu_arrival: Distribution
    asu_los: Distribution
    post_asu: dict[str, float]
    rehab_los: Distribution
    rehab_external_arrival: Optional[Distribution] = None
    post_rehab: dict[str, float] = field(default_factory=lambda: {"Other": 1.0})


@dataclass(kw_only=True)
class StrokeExperiment(Experiment):
    """Full parameter set for one stroke pathway configuration (times in days)."""

    types: dict[str, PatientTypeParams] = field(default_factory=dict)
    capacity_range: dict[str, tuple[int, int]] = field(
        default_factory=lambda: {ASU_UNIT: (9, 14), REHAB_UNIT: (10, 16)}
    )

    model_id = "stroke"
    time_unit = "days"

    def _validate_params(self):
        if not self.types:
            raise ConfigError("types", "at least one patient type is required")
        for label in self.types:
            if label not in PATIENT_TYPES:
                raise ConfigError(f"types.{label}", f"unknown patient type; expected one of {list(PATIENT_TYPES)}")
        for label, params in self.types.items():
            base = f"types.{label}"
            for attr in ("asu_arrival", "asu_los", "rehab_los"):
                if not isinstance(getattr(params, attr), Distribution):
                    raise ConfigError(f"{base}.{attr}", "not a distribution")
            if params.rehab_external_arrival is not None and not isinstance(
                params.rehab_external_arrival, Distribution
            ):
                raise ConfigError(f"{base}.rehab_external_arrival", "not a distribution")
            _routing_pmf(params.post_asu, POST_ASU_DESTINATIONS, f"{base}.post_asu")
            _routing_pmf(params.post_rehab, POST_REHAB_DESTINATIONS, f"{base}.post_rehab")
        for unit, bounds in self.capacity_range.items():
            if unit not in (ASU_UNIT, REHAB_UNIT):
                raise ConfigError(f"capacity_range.{unit}", "unknown unit")
            low, high = bounds
            if not (isinstance(low, int) and isinstance(high, int) and 1 <= low <= high):
                raise ConfigError(f"capacity_range.{unit}", f"need integers 1 <= low <= high, got {bounds!r}")

    def stream_names(self):
        names = []
        for t in PATIENT_TYPES:
            names += [
                f"asu_arrival.{t}",
                f"asu_los.{t}",
                f"post_asu.{t}",
                f"rehab_arrival.{t}",
                f"rehab_los.{t}",
                f"post_rehab.{t}",
            ]
        return names

    def _run(self, replication_index):
        return _StrokeRun(self, replication_index).run()

    def delay_curves(self, pooled):
        curves = {}
        for unit, (low, high) in self.capacity_range.items():
            if unit in pooled:
                capacities = list(range(low, high + 1))
                probabilities = [pooled[unit].prob_at_least(n) for n in capacities]
                curves[unit] = DelayCurve(unit, capacities, probabilities)
        return curves


def occupancy_pmf(samples: Sequence[int], unit: str = ASU_UNIT) -> dict[int, float]:
    """Empirical pmf over occupancy levels from audit samples; rejects empty input."""
    if len(samples) == 0:
        raise ValueError("occupancy pmf requires at least one audit sample")
    return OccupancyDistribution.from_samples(unit, samples).pmf()


def prob_delay(pmf: Union[Mapping[int, float], OccupancyDistribution], capacity: int) -> float:
    """Probability an arrival finds all ``capacity`` beds occupied: sum of
    pmf mass at occupancy levels >= capacity."""
    if capacity < 1:
        raise ValueError(f"capacity must be >= 1, got {capacity!r}")
    if isinstance(pmf, OccupancyDistribution):
        return pmf.prob_at_least(capacity)
    return sum(p for k, p in pmf.items() if k >= capacity)


class _StrokeRun:
    """State of one stroke pathway replication."""

    def __init__(self, exp: StrokeExperiment, replication_index: int):
        self.exp = exp
        self.rep = replication_index
        self.engine = Engine(trace=Trace(enabled=exp.trace))
        self.streams = exp.spawn(replication_index)
        self.post_asu_pmf = {
            label: _routing_pmf(p.post_asu, POST_ASU_DESTINATIONS, f"types.{label}.post_asu")
            for label, p in exp.types.items()
        }
        self.post_rehab_pmf = {
            label: _routing_pmf(p.post_rehab, POST_REHAB_DESTINATIONS, f"types.{label}.post_rehab")
            for label, p in exp.types.items()
        }
        self.next_id = 0
        self.asu_occupancy = 0
        self.rehab_occupancy = 0
        self.asu_admissions = 0
        self.asu_discharges = 0
        self.rehab_external = 0
        self.rehab_transfers = 0
        self.rehab_discharges = 0
        self.asu_samples: list[int] = []
        self.rehab_samples: list[int] = []
        self.occupancy_at_reset = (0, 0)

    def run(self) -> ReplicationResult:
        exp = self.exp
        self.engine.schedule(exp.warm_up, self._reset_kpis)
        self.engine.start_process(self._audit_loop())
        for label in PATIENT_TYPES:
            params = exp.types.get(label)
            if params is None:
                continue
            self.engine.start_process(self._asu_source(label, params))
            if params.rehab_external_arrival is not None:
                self.engine.start_process(self._rehab_source(label, params))
        self.engine.run_until(exp.run_length)
        return self._collect()

    def _reset_kpis(self):
        self.asu_admissions = 0
        self.asu_discharges = 0
        self.rehab_external = 0
        self.rehab_transfers = 0
        self.rehab_discharges = 0
        self.asu_samples.clear()
        self.rehab_samples.clear()
        self.occupancy_at_reset = (self.asu_occupancy, self.rehab_occupancy)

    def _audit_loop(self):
        last = 0.0
        for t in self.exp.audit_times():
            yield Timeout(t - last)
            last = t
            self.asu_samples.append(self.asu_occupancy)
            self.rehab_samples.append(self.rehab_occupancy)

    def _asu_source(self, label: str, params: PatientTypeParams):
        arrival_stream = self.streams[f"asu_arrival.{label}"]
        los_stream = self.streams[f"asu_los.{label}"]
        while True:
            yield Timeout(params.asu_arrival.sample(arrival_stream))
            pid = self.next_id
            self.next_id += 1
            self.asu_admissions += 1
            self.engine.emit(pid, label, "asu_arrival")
            los = params.asu_los.sample(los_stream)
            self.engine.start_process(self._asu_stay(pid, label, params, los))

    def _asu_stay(self, pid: int, label: str, params: PatientTypeParams, los: float):
        self.asu_occupancy += 1
        yield Timeout(los)
        self.asu_occupancy -= 1
        self.asu_discharges += 1
        destination = self.post_asu_pmf[label].sample(self.streams[f"post_asu.{label}"])
        self.engine.emit(pid, label, "asu_discharge", f"to={destination}")
        if destination == "Rehab":
            self.rehab_transfers += 1
            los = params.rehab_los.sample(self.streams[f"rehab_los.{label}"])
            self.engine.start_process(self._rehab_stay(pid, label, los))
        # ESD and Other exit the model here

    def _rehab_source(self, label: str, params: PatientTypeParams):
        arrival_stream = self.streams[f"rehab_arrival.{label}"]
        los_stream = self.streams[f"rehab_los.{label}"]
        while True:
            yield Timeout(params.rehab_external_arrival.sample(arrival_stream))
            pid = self.next_id
            self.next_id += 1
            self.rehab_external += 1
            self.engine.emit(pid, label, "rehab_arrival")
            los = params.rehab_los.sample(los_stream)
            self.engine.start_process(self._rehab_stay(pid, label, los))

    def _rehab_stay(self, pid: int, label: str, los: float):
        self.rehab_occupancy += 1
        yield Timeout(los)
        self.rehab_occupancy -= 1
        self.rehab_discharges += 1
        destination = self.post_rehab_pmf[label].sample(self.streams[f"post_rehab.{label}"])
        self.engine.emit(pid, label, "rehab_discharge", f"to={destination}")

    def _collect(self) -> ReplicationResult:
        flags = []
        if self.asu_samples:
            mean_asu = statistics.fmean(self.asu_samples)
            mean_rehab = statistics.fmean(self.rehab_samples)
        else:
            mean_asu = 0.0
            mean_rehab = 0.0
            flags.append("no audit samples in collection window; occupancy reported as 0")
        kpis = {
            "asu_admissions": float(self.asu_admissions),
            "asu_discharges": float(self.asu_discharges),
            "rehab_admissions": float(self.rehab_external + self.rehab_transfers),
            "rehab_external_arrivals": float(self.rehab_external),
            "rehab_transfers_in": float(self.rehab_transfers),
            "rehab_discharges": float(self.rehab_discharges),
            "mean_asu_occupancy": mean_asu,
            "mean_rehab_occupancy": mean_rehab,
        }
        occupancy = {
            ASU_UNIT: OccupancyDistribution.from_samples(ASU_UNIT, self.asu_samples),
            REHAB_UNIT: OccupancyDistribution.from_samples(REHAB_UNIT, self.rehab_samples),
        }
        extras = {
            "final_asu_occupancy": float(self.asu_occupancy),
            "final_rehab_occupancy": float(self.rehab_occupancy),
            "asu_occupancy_at_warm_up": float(self.occupancy_at_reset[0]),
            "rehab_occupancy_at_warm_up": float(self.occupancy_at_reset[1]),
        }
        trace_lines = self.engine.trace.lines if self.exp.trace else None
        return ReplicationResult(self.rep, kpis, occupancy, extras, flags, trace_lines)
