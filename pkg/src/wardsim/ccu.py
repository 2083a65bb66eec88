"""Critical care unit bed model.

Six arrival sources share one pool of beds. The five unplanned sources
(AandE, Ward, EmergencySurgery, OtherHospital, XRay) queue for a bed with
priority 0 in a single shared FIFO queue and never renege. Elective
arrivals check availability on arrival: if every bed is held the operation
is cancelled and the patient leaves immediately; otherwise the bed is
seized without waiting. After a patient's sampled length of stay the bed
stays held for a deterministic turnaround (cleaning) interval before it is
released, so occupancy and utilization count beds made unavailable by
patients or cleaning alike.

Stream slot table (slot index = position; see sampling.stream_table):

    0  arrival.AandE            6  los.AandE
    1  arrival.Ward             7  los.Ward
    2  arrival.EmergencySurgery 8  los.EmergencySurgery
    3  arrival.OtherHospital    9  los.OtherHospital
    4  arrival.XRay            10  los.XRay
    5  arrival.Elective        11  los.Elective

All times are in hours.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from .engine import Acquire, CountedResource, Engine, Timeout, Trace
from .errors import ConfigError
from .experiment import Experiment, OccupancyDistribution, ReplicationResult
from .sampling import Distribution

UNPLANNED_SOURCES = ("AandE", "Ward", "EmergencySurgery", "OtherHospital", "XRay")
ELECTIVE = "Elective"
ALL_SOURCES = UNPLANNED_SOURCES + (ELECTIVE,)

# smaller number = more urgent; electives never join the queue but the
# resource contract is general
PRIORITY_UNPLANNED = 0
PRIORITY_ELECTIVE = 1

BED_UNIT = "beds"


@dataclass(kw_only=True)
class CcuExperiment(Experiment):
    """Full parameter set for one CCU configuration (times in hours)."""

    n_beds: int = 24
    turnaround: float = 5.0
    arrivals: dict[str, Distribution] = field(default_factory=dict)
    los: dict[str, Distribution] = field(default_factory=dict)

    model_id = "ccu"
    time_unit = "hours"

    def _validate_params(self):
        if not isinstance(self.n_beds, int) or self.n_beds < 1:
            raise ConfigError("n_beds", f"must be a positive integer, got {self.n_beds!r}")
        if self.turnaround < 0:
            raise ConfigError("turnaround_hours", f"must be >= 0, got {self.turnaround!r}")
        for source in ALL_SOURCES:
            if source not in self.arrivals:
                raise ConfigError(f"arrivals.{source}", "missing inter-arrival distribution")
            if not isinstance(self.arrivals[source], Distribution):
                raise ConfigError(f"arrivals.{source}", "not a distribution")
            if source not in self.los:
                raise ConfigError(f"los.{source}", "missing length-of-stay distribution")
            if not isinstance(self.los[source], Distribution):
                raise ConfigError(f"los.{source}", "not a distribution")

    def stream_names(self):
        return [f"arrival.{s}" for s in ALL_SOURCES] + [f"los.{s}" for s in ALL_SOURCES]

    def _run(self, replication_index):
        return _CcuRun(self, replication_index).run()


class _CcuRun:
    """State of one CCU replication."""

    def __init__(self, exp: CcuExperiment, replication_index: int):
        self.exp = exp
        self.rep = replication_index
        self.engine = Engine(trace=Trace(enabled=exp.trace))
        self.streams = exp.spawn(replication_index)
        self.beds = CountedResource(self.engine, exp.n_beds, BED_UNIT)
        self.next_id = 0
        self.arrival_count = 0
        self.cancelled = 0
        self.waits: list[float] = []
        self.patients_in_beds = 0
        self.audit_samples: list[int] = []

    def run(self) -> ReplicationResult:
        exp = self.exp
        # reset is inserted before any same-time arrival, so events at
        # exactly t=warm_up land inside the collection window
        self.engine.schedule(exp.warm_up, self._reset_kpis)
        self.engine.start_process(self._audit_loop())
        for source in UNPLANNED_SOURCES:
            self.engine.start_process(self._unplanned_source(source))
        self.engine.start_process(self._elective_source())
        self.engine.run_until(exp.run_length)
        return self._collect()

    def _reset_kpis(self):
        self.arrival_count = 0
        self.cancelled = 0
        self.waits.clear()
        self.audit_samples.clear()

    def _audit_loop(self):
        last = 0.0
        for t in self.exp.audit_times():
            yield Timeout(t - last)
            last = t
            self.audit_samples.append(self.beds.in_use)

    def _new_patient(self, source: str) -> int:
        pid = self.next_id
        self.next_id += 1
        self.arrival_count += 1
        self.engine.emit(pid, source, "arrival")
        return pid

    def _unplanned_source(self, source: str):
        arrival_stream = self.streams[f"arrival.{source}"]
        los_stream = self.streams[f"los.{source}"]
        arrival_dist = self.exp.arrivals[source]
        los_dist = self.exp.los[source]
        while True:
            yield Timeout(arrival_dist.sample(arrival_stream))
            pid = self._new_patient(source)
            # length of stay is sampled at arrival so that the i-th draw on a
            # source's stream always belongs to its i-th arrival, independent
            # of bed capacity (keeps scenarios comparable under CRN)
            los = los_dist.sample(los_stream)
            self.engine.start_process(self._unplanned_patient(pid, source, los))

    def _unplanned_patient(self, pid: int, source: str, los: float):
        grant = yield Acquire(self.beds, PRIORITY_UNPLANNED)
        self.waits.append(grant.wait)
        self.patients_in_beds += 1
        self.engine.emit(pid, source, "admitted", f"wait={grant.wait:.2f}")
        yield Timeout(los)
        self.patients_in_beds -= 1
        self.engine.emit(pid, source, "discharge")
        yield Timeout(self.exp.turnaround)
        self.beds.release()
        self.engine.emit(pid, source, "bed_released")

    def _elective_source(self):
        arrival_stream = self.streams[f"arrival.{ELECTIVE}"]
        los_stream = self.streams[f"los.{ELECTIVE}"]
        arrival_dist = self.exp.arrivals[ELECTIVE]
        los_dist = self.exp.los[ELECTIVE]
        while True:
            yield Timeout(arrival_dist.sample(arrival_stream))
            pid = self._new_patient(ELECTIVE)
            grant = self.beds.try_acquire()
            if grant is None:
                self.cancelled += 1
                self.engine.emit(pid, ELECTIVE, "cancelled_operation")
            else:
                los = los_dist.sample(los_stream)
                self.patients_in_beds += 1
                self.engine.emit(pid, ELECTIVE, "admitted", "wait=0.00")
                self.engine.start_process(self._elective_patient(pid, los))

    def _elective_patient(self, pid: int, los: float):
        yield Timeout(los)
        self.patients_in_beds -= 1
        self.engine.emit(pid, ELECTIVE, "discharge")
        yield Timeout(self.exp.turnaround)
        self.beds.release()
        self.engine.emit(pid, ELECTIVE, "bed_released")

    def _collect(self) -> ReplicationResult:
        flags = []
        if self.audit_samples:
            mean_occupancy = statistics.fmean(self.audit_samples)
        else:
            mean_occupancy = 0.0
            flags.append("no audit samples in collection window; occupancy reported as 0")
        if self.waits:
            mean_wait = statistics.fmean(self.waits)
        else:
            mean_wait = 0.0
            flags.append("no unplanned admissions completed waiting in window; wait reported as 0")
        kpis = {
            "patient_count": float(self.arrival_count),
            "cancelled_electives": float(self.cancelled),
            "bed_utilization": mean_occupancy / self.exp.n_beds,
            "mean_bed_occupancy": mean_occupancy,
            "mean_unplanned_wait": mean_wait,
        }
        occupancy = {BED_UNIT: OccupancyDistribution.from_samples(BED_UNIT, self.audit_samples)}
        extras = {
            "final_occupancy": float(self.beds.in_use),
            "final_patients_in_beds": float(self.patients_in_beds),
            "unplanned_waits_recorded": float(len(self.waits)),
        }
        trace_lines = self.engine.trace.lines if self.exp.trace else None
        return ReplicationResult(self.rep, kpis, occupancy, extras, flags, trace_lines)
