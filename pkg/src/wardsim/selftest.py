"""Embedded verification suite, runnable via ``wardsim selftest``.

Two batches of fast, deterministic checks (one per model) covering extreme
values, component isolation, warm-up variation, analytic oracles and the
kernel/sampling machinery each model depends on. Every check returns pass
or fail with a one-line detail; the CLI prints one line per check and a
summary count.

These are complementary to the pytest suite: the pytest suite is the
development gate, while the selftest ships inside the package so a model
user can verify an installation without a test framework.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ccu import ALL_SOURCES, ELECTIVE, UNPLANNED_SOURCES, CcuExperiment
from .engine import Acquire, CountedResource, Engine, SchedulingError, Timeout
from .errors import ConfigError
from .experiment import run_replications, run_scenarios
from .sampling import (
    Deterministic,
    Discrete,
    Exponential,
    LognormalMeanSd,
    lognormal_mu_sigma,
    spawn_streams,
    stream_from_state,
    stream_state,
)
from .stroke import PatientTypeParams, StrokeExperiment, occupancy_pmf, prob_delay


@dataclass
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str = ""


CCU_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = []
STROKE_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = []


def ccu_check(name):
    def register(fn):
        CCU_CHECKS.append((name, fn))
        return fn
    return register


def stroke_check(name):
    def register(fn):
        STROKE_CHECKS.append((name, fn))
        return fn
    return register


# --- helpers ---------------------------------------------------------------

OFF = Deterministic(10**9)  # first arrival far beyond any run length


def _ccu_exp(**overrides) -> CcuExperiment:
    arrivals = {s: OFF for s in ALL_SOURCES}
    arrivals.update(overrides.pop("arrivals", {}))
    los = {s: Deterministic(1.0) for s in ALL_SOURCES}
    los.update(overrides.pop("los", {}))
    kwargs = dict(
        run_length=200.0, warm_up=0.0, n_replications=1, master_seed=1,
        audit_interval=1.0, trace=False, n_beds=24, turnaround=0.0,
    )
    kwargs.update(overrides)
    return CcuExperiment(arrivals=arrivals, los=los, **kwargs)


def _stroke_type(**overrides) -> PatientTypeParams:
    kwargs = dict(
        asu_arrival=OFF,
        asu_los=Deterministic(1.0),
        post_asu={"Other": 1.0},
        rehab_los=Deterministic(1.0),
        rehab_external_arrival=None,
        post_rehab={"Other": 1.0},
    )
    kwargs.update(overrides)
    return PatientTypeParams(**kwargs)


def _stroke_exp(types=None, **overrides) -> StrokeExperiment:
    kwargs = dict(
        run_length=200.0, warm_up=0.0, n_replications=1, master_seed=1,
        audit_interval=1.0, trace=False,
        types=types if types is not None else {"Stroke": _stroke_type()},
    )
    kwargs.update(overrides)
    return StrokeExperiment(**kwargs)


def _poisson_pmf(mean: float, k_max: int = 80) -> dict[int, float]:
    pmf = {}
    term = math.exp(-mean)
    for k in range(k_max + 1):
        pmf[k] = term
        term *= mean / (k + 1)
    return pmf


def _tv_distance(p: dict[int, float], q: dict[int, float]) -> float:
    support = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in support)


def _approx(actual, expected, rel) -> bool:
    return abs(actual - expected) <= rel * abs(expected)


# --- CCU suite: kernel behaviour -------------------------------------------

@ccu_check("equal-time events fire in insertion order")
def _check_tie_break():
    engine = Engine()
    order = []
    engine.schedule(5.0, lambda: order.append("A"))
    engine.schedule(5.0, lambda: order.append("B"))
    engine.schedule(0.0, lambda: order.append("C"))
    engine.run_until(10.0)
    return order == ["C", "A", "B"], f"order={order}"


@ccu_check("run_until processes only events at or before the end time")
def _check_run_until_bound():
    engine = Engine()
    fired = []
    for t in (1.0, 2.0, 150.0):
        engine.schedule(t, lambda t=t: fired.append(t))
    engine.run_until(100.0)
    return fired == [1.0, 2.0] and engine.now == 100.0, f"fired={fired} now={engine.now}"


@ccu_check("empty queue advances the clock to the end time")
def _check_run_until_empty():
    engine = Engine()
    engine.run_until(100.0)
    return engine.now == 100.0, f"now={engine.now}"


@ccu_check("dequeue order matches a sort oracle over random times")
def _check_dequeue_sorted():
    rng = np.random.default_rng(42)
    times = rng.uniform(0, 1000, size=2000)
    engine = Engine()
    fired = []
    for t in times:
        engine.schedule(float(t), lambda t=t: fired.append(float(t)))
    engine.run_until(1001.0)
    return fired == sorted(float(t) for t in times), f"{len(fired)} events"


@ccu_check("scheduling in the past is rejected")
def _check_schedule_past():
    engine = Engine()
    engine.schedule(1.0, lambda: None)
    engine.run_until(5.0)
    try:
        engine.schedule(4.0, lambda: None)
    except SchedulingError:
        return True, ""
    return False, "no error raised"


@ccu_check("availability check refuses when all units are held")
def _check_try_acquire_full():
    engine = Engine()
    beds = CountedResource(engine, 24)
    for _ in range(24):
        assert beds.try_acquire() is not None
    refused = beds.try_acquire() is None and beds.in_use == 24
    return refused, f"in_use={beds.in_use}"


@ccu_check("availability check grants when one unit is free")
def _check_try_acquire_free():
    engine = Engine()
    beds = CountedResource(engine, 24)
    for _ in range(23):
        beds.try_acquire()
    grant = beds.try_acquire()
    return grant is not None and beds.in_use == 24, f"in_use={beds.in_use}"


@ccu_check("lower priority number is served first, FIFO within a level")
def _check_priority_order():
    engine = Engine()
    resource = CountedResource(engine, 1)
    served = []

    def holder():
        yield Acquire(resource, 0)
        yield Timeout(10.0)
        resource.release()

    def waiter(name, priority):
        yield Acquire(resource, priority)
        served.append(name)
        yield Timeout(1.0)
        resource.release()

    engine.start_process(holder())
    engine.run_until(1.0)
    engine.start_process(waiter("low_urgency_first_in", 1))
    engine.run_until(2.0)
    engine.start_process(waiter("high_urgency_later", 0))
    engine.start_process(waiter("high_urgency_last", 0))
    engine.run_until(100.0)
    expected = ["high_urgency_later", "high_urgency_last", "low_urgency_first_in"]
    return served == expected, f"served={served}"


@ccu_check("units in use never exceed capacity under random load")
def _check_conservation():
    engine = Engine()
    resource = CountedResource(engine, 3)
    rng = np.random.default_rng(7)
    violations = []

    def user():
        yield Acquire(resource, 0)
        if not 0 <= resource.in_use <= 3:
            violations.append(resource.in_use)
        yield Timeout(float(rng.exponential(2.0)))
        resource.release()
        if not 0 <= resource.in_use <= 3:
            violations.append(resource.in_use)

    def arrivals():
        for _ in range(300):
            yield Timeout(float(rng.exponential(0.5)))
            engine.start_process(user())

    engine.start_process(arrivals())
    engine.run_until(10_000.0)
    return not violations and resource.in_use == 0, f"violations={violations}"


# --- CCU suite: model behaviour ---------------------------------------------

@ccu_check("deterministic gap of 10 yields exactly 10 arrivals in 100 h")
def _check_deterministic_arrivals():
    exp = _ccu_exp(run_length=100.0, arrivals={"AandE": Deterministic(10.0)})
    results, _ = run_replications(exp)
    count = results[0].kpis["patient_count"]
    return count == 10.0, f"count={count}"


@ccu_check("single-source arrival count matches the Poisson-rate oracle")
def _check_single_source_rate():
    exp = _ccu_exp(run_length=8760.0, arrivals={"AandE": Exponential(22.72)},
                   n_replications=20, n_beds=1, los={"AandE": Deterministic(0.0)})
    _, summary = run_replications(exp)
    expected = 8760.0 / 22.72
    mean = summary.kpi_means["patient_count"]
    return _approx(mean, expected, 0.05), f"mean={mean:.1f} expected={expected:.1f}"


@ccu_check("five-source arrival count matches the closed-form rate sum")
def _check_rate_sum():
    means = {"AandE": 22.72, "Ward": 26.0, "EmergencySurgery": 37.0,
             "OtherHospital": 47.2, "XRay": 575.0}
    exp = _ccu_exp(
        run_length=8760.0,
        arrivals={s: Exponential(m) for s, m in means.items()},
        los={s: Deterministic(0.0) for s in ALL_SOURCES},
        n_replications=10,
    )
    _, summary = run_replications(exp)
    expected = 8760.0 * sum(1.0 / m for m in means.values())
    mean = summary.kpi_means["patient_count"]
    return _approx(mean, expected, 0.05), f"mean={mean:.1f} expected={expected:.1f}"


@ccu_check("saturated unit cancels every elective operation")
def _check_saturated_cancels():
    exp = _ccu_exp(
        n_beds=1,
        arrivals={"AandE": Deterministic(1.0), ELECTIVE: Deterministic(10.0)},
        los={"AandE": Deterministic(10_000.0), ELECTIVE: Deterministic(1.0)},
        run_length=100.0,
    )
    results, _ = run_replications(exp)
    # electives arrive at t=10..100 (events at exactly t=end still fire)
    cancelled = results[0].kpis["cancelled_electives"]
    return cancelled == 10.0, f"cancelled={cancelled} (10 elective arrivals expected)"


@ccu_check("ample capacity cancels nothing")
def _check_ample_beds():
    exp = _ccu_exp(
        n_beds=500,
        arrivals={ELECTIVE: Exponential(2.0)},
        los={ELECTIVE: Exponential(5.0)},
    )
    results, _ = run_replications(exp)
    return results[0].kpis["cancelled_electives"] == 0.0, ""


@ccu_check("zero stays and zero turnaround produce no cancellations or waits")
def _check_zero_los():
    exp = _ccu_exp(
        n_beds=1, turnaround=0.0,
        arrivals={s: Exponential(2.0) for s in ALL_SOURCES},
        los={s: Deterministic(0.0) for s in ALL_SOURCES},
    )
    results, _ = run_replications(exp)
    kpis = results[0].kpis
    ok = kpis["cancelled_electives"] == 0.0 and kpis["mean_unplanned_wait"] == 0.0
    return ok, f"cancelled={kpis['cancelled_electives']} wait={kpis['mean_unplanned_wait']}"


@ccu_check("bed is released at stay plus turnaround")
def _check_turnaround_release():
    exp = _ccu_exp(
        arrivals={"AandE": Deterministic(50.0)},
        los={"AandE": Deterministic(5.0)},
        turnaround=5.0, run_length=70.0, trace=True,
    )
    results, _ = run_replications(exp)
    lines = results[0].trace_lines
    admitted = next(float(l.split()[0][2:]) for l in lines if "event=admitted" in l)
    released = next(float(l.split()[0][2:]) for l in lines if "event=bed_released" in l)
    return released - admitted == 10.0, f"held for {released - admitted}"


@ccu_check("zero turnaround releases the bed at the stay end")
def _check_zero_turnaround_release():
    exp = _ccu_exp(
        arrivals={"AandE": Deterministic(50.0)},
        los={"AandE": Deterministic(5.0)},
        turnaround=0.0, run_length=70.0, trace=True,
    )
    results, _ = run_replications(exp)
    lines = results[0].trace_lines
    admitted = next(float(l.split()[0][2:]) for l in lines if "event=admitted" in l)
    released = next(float(l.split()[0][2:]) for l in lines if "event=bed_released" in l)
    return released - admitted == 5.0, f"held for {released - admitted}"


@ccu_check("cleaning keeps the bed occupied for auditing")
def _check_cleaning_occupancy():
    # one admission at t=10 with a 5 h stay; audits at half-hours over 20 h
    def occupied_samples(turnaround):
        exp = _ccu_exp(
            arrivals={"AandE": Deterministic(10.0)},
            los={"AandE": Deterministic(5.0)},
            turnaround=turnaround, run_length=20.0,
        )
        results, _ = run_replications(exp)
        return results[0].occupancy["beds"].counts.get(1, 0)

    # stay [10, 15) alone covers 5 samples; adding cleaning [15, 20) covers 10
    with_cleaning = occupied_samples(5.0)
    without_cleaning = occupied_samples(0.0)
    ok = with_cleaning == 10 and without_cleaning == 5
    return ok, f"occupied samples: turnaround 5 -> {with_cleaning}, turnaround 0 -> {without_cleaning}"


@ccu_check("utilization equals mean occupancy over capacity")
def _check_utilization_definition():
    exp = _ccu_exp(
        arrivals={s: Exponential(20.0) for s in ALL_SOURCES},
        los={s: Exponential(40.0) for s in ALL_SOURCES},
        n_beds=7,
    )
    results, _ = run_replications(exp)
    kpis = results[0].kpis
    diff = abs(kpis["bed_utilization"] - kpis["mean_bed_occupancy"] / 7)
    return diff <= 1e-12, f"diff={diff}"


@ccu_check("same seed reproduces identical KPIs and trace")
def _check_ccu_determinism():
    exp = _ccu_exp(
        arrivals={s: Exponential(10.0) for s in ALL_SOURCES},
        los={s: LognormalMeanSd(20.0, 15.0) for s in ALL_SOURCES},
        n_beds=4, trace=True,
    )
    a, _ = run_replications(exp)
    b, _ = run_replications(exp)
    ok = a[0].kpis == b[0].kpis and a[0].trace_lines == b[0].trace_lines
    return ok, ""


@ccu_check("different replication indices give different samples")
def _check_ccu_reps_differ():
    exp = _ccu_exp(
        arrivals={s: Exponential(10.0) for s in ALL_SOURCES},
        los={s: Exponential(20.0) for s in ALL_SOURCES},
        n_replications=2, n_beds=4,
    )
    results, _ = run_replications(exp)
    return results[0].kpis != results[1].kpis, ""


@ccu_check("patient counts are capacity-invariant under shared streams")
def _check_crn_invariance():
    exp = _ccu_exp(
        arrivals={s: Exponential(15.0) for s in ALL_SOURCES},
        los={s: Exponential(60.0) for s in ALL_SOURCES},
        run_length=2000.0, n_replications=3, n_beds=23,
    )
    sweep = run_scenarios(exp, "n_beds", [23, 28])
    counts = [
        [r.kpis["patient_count"] for r in scenario.replications]
        for scenario in sweep.scenarios
    ]
    return counts[0] == counts[1], f"counts={counts}"


def _example_like_ccu(n_replications=5, run_length=4000.0):
    from .config import example_document, load_experiment

    doc = example_document("ccu")
    doc["replications"] = n_replications
    doc["run_length_hours"] = run_length
    doc["warm_up_hours"] = 400.0
    return load_experiment(doc)


@ccu_check("cancellations do not increase with more beds")
def _check_cancellations_monotone():
    sweep = run_scenarios(_example_like_ccu(), "n_beds", [23, 25, 28])
    values = [s.summary.kpi_means["cancelled_electives"] for s in sweep.scenarios]
    ok = all(b <= a for a, b in zip(values, values[1:]))
    return ok, f"values={values}"


@ccu_check("occupancy does not decrease with more beds")
def _check_occupancy_monotone():
    sweep = run_scenarios(_example_like_ccu(), "n_beds", [23, 25, 28])
    values = [s.summary.kpi_means["mean_bed_occupancy"] for s in sweep.scenarios]
    ok = all(b >= a for a, b in zip(values, values[1:]))
    return ok, f"values={values}"


@ccu_check("unplanned waits do not increase with more beds")
def _check_waits_monotone():
    sweep = run_scenarios(_example_like_ccu(), "n_beds", [23, 25, 28])
    values = [s.summary.kpi_means["mean_unplanned_wait"] for s in sweep.scenarios]
    ok = all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    return ok, f"values={values}"


@ccu_check("warm-up resets arrival counting")
def _check_warm_up_reset():
    exp = _ccu_exp(
        arrivals={"AandE": Deterministic(10.0)},
        run_length=100.0, warm_up=55.0,
    )
    results, _ = run_replications(exp)
    # arrivals at 10..100; in-window are 60,70,80,90,100
    count = results[0].kpis["patient_count"]
    return count == 5.0, f"count={count}"


@ccu_check("warm-up choice leaves the event trace unchanged")
def _check_warm_up_trace():
    def trace_for(warm_up):
        exp = _ccu_exp(
            arrivals={s: Exponential(10.0) for s in ALL_SOURCES},
            los={s: Exponential(30.0) for s in ALL_SOURCES},
            n_beds=4, trace=True, warm_up=warm_up,
        )
        results, _ = run_replications(exp)
        return results[0]

    a = trace_for(0.0)
    b = trace_for(50.0)
    ok = a.trace_lines == b.trace_lines and a.kpis != b.kpis
    return ok, ""


@ccu_check("near-empty collection window is flagged, not fatal")
def _check_empty_window():
    # window (99.9, 100] holds no arrival (gaps of 7) and no audit instant
    exp = _ccu_exp(
        arrivals={"AandE": Deterministic(7.0)},
        run_length=100.0, warm_up=99.9,
    )
    results, _ = run_replications(exp)
    r = results[0]
    ok = (r.kpis["patient_count"] == 0.0 and r.kpis["mean_bed_occupancy"] == 0.0
          and r.kpis["mean_unplanned_wait"] == 0.0 and len(r.flags) == 2)
    return ok, f"flags={r.flags}"


@ccu_check("patient identifiers increment in arrival order across sources")
def _check_ids_in_order():
    exp = _ccu_exp(
        arrivals={s: Exponential(5.0) for s in ALL_SOURCES},
        los={s: Exponential(5.0) for s in ALL_SOURCES},
        run_length=300.0, trace=True,
    )
    results, _ = run_replications(exp)
    ids = [int(line.split()[1][3:]) for line in results[0].trace_lines
           if "event=arrival" in line]
    return ids == list(range(len(ids))) and len(ids) > 50, f"{len(ids)} arrivals"


@ccu_check("disabling the trace does not change the results")
def _check_trace_off_same():
    def kpis(trace):
        exp = _ccu_exp(
            arrivals={s: Exponential(10.0) for s in ALL_SOURCES},
            los={s: Exponential(30.0) for s in ALL_SOURCES},
            n_beds=4, trace=trace,
        )
        results, _ = run_replications(exp)
        return results[0].kpis

    return kpis(False) == kpis(True), ""


@ccu_check("electives never contribute to the waiting-time KPI")
def _check_electives_never_wait():
    exp = _ccu_exp(
        n_beds=1,
        arrivals={ELECTIVE: Deterministic(2.0)},
        los={ELECTIVE: Deterministic(5.0)},
        run_length=100.0,
    )
    results, _ = run_replications(exp)
    r = results[0]
    # some electives admitted, some cancelled; none recorded as waiting
    ok = r.extras["unplanned_waits_recorded"] == 0.0 and r.kpis["cancelled_electives"] > 0
    return ok, f"waits_recorded={r.extras['unplanned_waits_recorded']}"


@ccu_check("patient count includes cancelled electives")
def _check_count_includes_cancelled():
    exp = _ccu_exp(
        n_beds=1,
        arrivals={"AandE": Deterministic(1.0), ELECTIVE: Deterministic(10.0)},
        los={"AandE": Deterministic(10_000.0), ELECTIVE: Deterministic(1.0)},
        run_length=100.0,
    )
    results, _ = run_replications(exp)
    kpis = results[0].kpis
    # 100 unplanned (t=1..100) + 10 electives (t=10..100, one bed never frees)
    ok = kpis["patient_count"] == 110.0 and kpis["cancelled_electives"] == 10.0
    return ok, f"count={kpis['patient_count']}"


@ccu_check("unplanned patients never balk: all are eventually admitted or queued")
def _check_unplanned_never_balk():
    exp = _ccu_exp(
        n_beds=1,
        arrivals={"AandE": Deterministic(5.0)},
        los={"AandE": Deterministic(20.0)},
        run_length=200.0, trace=True,
    )
    results, _ = run_replications(exp)
    lines = results[0].trace_lines
    arrivals = sum("event=arrival" in l for l in lines)
    cancelled = sum("event=cancelled_operation" in l for l in lines)
    admitted = sum("event=admitted" in l for l in lines)
    ok = cancelled == 0 and arrivals == 40 and 0 < admitted < arrivals
    return ok, f"arrivals={arrivals} admitted={admitted}"


@ccu_check("mean stay plus turnaround matches the bed-holding oracle")
def _check_mean_hold_oracle():
    exp = _ccu_exp(
        n_beds=400,
        arrivals={"AandE": Exponential(1.0)},
        los={"AandE": LognormalMeanSd(30.0, 20.0)},
        turnaround=5.0,
        run_length=6000.0, warm_up=1000.0,
        n_replications=3,
    )
    _, summary = run_replications(exp)
    # infinite-server view: mean held beds = rate x mean(hold time)
    expected = (1.0 / 1.0) * (30.0 + 5.0)
    mean = summary.kpi_means["mean_bed_occupancy"]
    return _approx(mean, expected, 0.05), f"mean={mean:.2f} expected={expected:.1f}"


# --- stroke suite: sampling machinery ---------------------------------------

@stroke_check("lognormal conversion reproduces the reference values")
def _check_lognormal_reference():
    mu, sigma = lognormal_mu_sigma(10.0, 10.0)
    ok = abs(mu - 1.95601) < 1e-5 and abs(sigma - 0.83255) < 1e-5
    return ok, f"mu={mu:.6f} sigma={sigma:.6f}"


@stroke_check("lognormal conversion preserves the mean exactly")
def _check_lognormal_identity():
    for mean, sd in ((10.0, 10.0), (128.0, 50.0), (7.0, 2.0)):
        mu, sigma = lognormal_mu_sigma(mean, sd)
        analytic = math.exp(mu + sigma * sigma / 2.0)
        if abs(analytic - mean) > 1e-12 * mean:
            return False, f"({mean},{sd}) -> analytic mean {analytic!r}"
    return True, ""


@stroke_check("zero-sd lognormal degenerates to its mean")
def _check_lognormal_degenerate():
    dist = LognormalMeanSd(42.0, 0.0)
    rng = np.random.default_rng(0)
    draws = {dist.sample(rng) for _ in range(10)}
    return draws == {42.0}, f"draws={draws}"


@stroke_check("lognormal sample moments match the requested moments")
def _check_lognormal_moments():
    dist = LognormalMeanSd(128.0, 50.0)
    rng = np.random.default_rng(3)
    draws = dist.sample_n(rng, 200_000)
    mean_ok = _approx(float(np.mean(draws)), 128.0, 0.01)
    sd_ok = _approx(float(np.std(draws, ddof=1)), 50.0, 0.03)
    return mean_ok and sd_ok, f"mean={np.mean(draws):.2f} sd={np.std(draws, ddof=1):.2f}"


@stroke_check("invalid lognormal parameters are rejected at construction")
def _check_lognormal_invalid():
    try:
        LognormalMeanSd(0.0, 5.0)
    except ValueError:
        return True, ""
    return False, "no error raised"


@stroke_check("discrete sampling frequencies match the pmf")
def _check_discrete_frequencies():
    dist = Discrete(("A", "B"), (0.24, 0.76))
    rng = np.random.default_rng(11)
    draws = dist.sample_n(rng, 100_000)
    freq = float(np.mean(draws == "A"))
    return abs(freq - 0.24) < 0.005, f"freq={freq:.4f}"


@stroke_check("a pmf that does not sum to one is rejected")
def _check_discrete_invalid():
    try:
        Discrete(("A", "B"), (0.5, 0.4))
    except ValueError:
        return True, ""
    return False, "no error raised"


@stroke_check("exponential sample mean matches its parameter")
def _check_exponential_mean():
    rng = np.random.default_rng(5)
    draws = Exponential(22.72).sample_n(rng, 100_000)
    mean = float(np.mean(draws))
    return abs(mean - 22.72) < 0.3, f"mean={mean:.3f}"


@stroke_check("stream spawning is deterministic")
def _check_streams_deterministic():
    a = spawn_streams(12345, 2, 4)
    b = spawn_streams(12345, 2, 4)
    ok = all(
        np.array_equal(x.standard_normal(50), y.standard_normal(50))
        for x, y in zip(a, b)
    )
    return ok, ""


@stroke_check("changing the replication index changes every stream")
def _check_streams_differ():
    a = spawn_streams(12345, 0, 6)
    b = spawn_streams(12345, 1, 6)
    ok = all(x.standard_normal() != y.standard_normal() for x, y in zip(a, b))
    return ok, ""


@stroke_check("extra draws on one stream never disturb another")
def _check_stream_isolation():
    a0, a1 = spawn_streams(99, 0, 2)
    b0, b1 = spawn_streams(99, 0, 2)
    a0.standard_normal(1000)  # extra draws on stream 0 only
    ok = np.array_equal(a1.standard_normal(100), b1.standard_normal(100))
    return ok, ""


@stroke_check("stream state round-trips through serialization")
def _check_stream_state_roundtrip():
    (stream,) = spawn_streams(4, 1, 1)
    stream.standard_normal(17)
    state = stream_state(stream)
    restored = stream_from_state(state)
    ok = np.array_equal(stream.standard_normal(50), restored.standard_normal(50))
    return ok, ""


@stroke_check("streams are pairwise uncorrelated")
def _check_stream_correlation():
    streams = spawn_streams(2024, 0, 10)
    draws = np.stack([s.exponential(1.0, size=20_000) for s in streams])
    corr = np.corrcoef(draws)
    off_diag = corr[~np.eye(len(streams), dtype=bool)]
    worst = float(np.max(np.abs(off_diag)))
    return worst < 0.05, f"max |r|={worst:.4f}"


# --- stroke suite: model behaviour ------------------------------------------

@stroke_check("zero-length stays leave audited occupancy at zero")
def _check_zero_los_stroke():
    types = {"Stroke": _stroke_type(asu_arrival=Deterministic(1.0), asu_los=Deterministic(0.0))}
    results, _ = run_replications(_stroke_exp(types))
    dist = results[0].occupancy["asu"]
    return set(dist.counts) == {0}, f"counts={dist.counts}"


@stroke_check("arrival counts match the Poisson oracle over ten years")
def _check_stroke_poisson_counts():
    types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.2))}
    exp = _stroke_exp(types, run_length=3650.0, n_replications=5)
    _, summary = run_replications(exp)
    expected = 3650.0 / 1.2
    mean = summary.kpi_means["asu_admissions"]
    return _approx(mean, expected, 0.05), f"mean={mean:.1f} expected={expected:.1f}"


@stroke_check("types without an external rehab stream produce no external rehab arrivals")
def _check_no_rehab_external():
    types = {"TIA": _stroke_type(asu_arrival=Exponential(2.0))}
    results, _ = run_replications(_stroke_exp(types))
    return results[0].kpis["rehab_external_arrivals"] == 0.0, ""


@stroke_check("certain transfer routes every completer to rehabilitation")
def _check_transfer_all():
    types = {"Stroke": _stroke_type(
        asu_arrival=Exponential(2.0), asu_los=Exponential(3.0),
        post_asu={"Rehab": 1.0}, rehab_los=Exponential(2.0),
    )}
    results, _ = run_replications(_stroke_exp(types, run_length=500.0))
    r = results[0]
    ok = r.kpis["rehab_transfers_in"] == r.kpis["asu_discharges"] > 0
    return ok, f"transfers={r.kpis['rehab_transfers_in']} discharges={r.kpis['asu_discharges']}"


@stroke_check("no-transfer routing leaves rehabilitation to external arrivals")
def _check_transfer_none():
    types = {"Stroke": _stroke_type(
        asu_arrival=Exponential(2.0), asu_los=Exponential(3.0),
        post_asu={"Other": 1.0},
        rehab_external_arrival=Exponential(5.0), rehab_los=Exponential(2.0),
    )}
    results, _ = run_replications(_stroke_exp(types, run_length=500.0))
    r = results[0]
    ok = r.kpis["rehab_transfers_in"] == 0.0 and r.kpis["rehab_external_arrivals"] > 0
    return ok, ""


@stroke_check("transfer fraction matches the binomial oracle")
def _check_transfer_fraction():
    types = {"Stroke": _stroke_type(
        asu_arrival=Exponential(0.5), asu_los=Deterministic(0.5),
        post_asu={"Rehab": 0.24, "Other": 0.76}, rehab_los=Deterministic(1.0),
    )}
    exp = _stroke_exp(types, run_length=3000.0, n_replications=2)
    results, _ = run_replications(exp)
    transfers = sum(r.kpis["rehab_transfers_in"] for r in results)
    completions = sum(r.kpis["asu_discharges"] for r in results)
    fraction = transfers / completions
    return abs(fraction - 0.24) < 0.03, f"fraction={fraction:.4f} over {completions:.0f}"


@stroke_check("constant occupancy gives a point-mass distribution")
def _check_constant_occupancy():
    # arrivals at 50/100/150 with unbounded stays: occupancy is 3 from t=150
    # and the post-warm-up audits (151.5 .. 160.5) all see it
    types = {"Stroke": _stroke_type(asu_arrival=Deterministic(50.0), asu_los=Deterministic(10**9))}
    exp = _stroke_exp(types, run_length=161.0, warm_up=151.0)
    results, _ = run_replications(exp)
    pmf = results[0].occupancy["asu"].pmf()
    return pmf == {3: 1.0}, f"pmf={pmf}"


@stroke_check("occupancy distributions sum to one")
def _check_pmf_sums():
    types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=Exponential(5.0))}
    results, _ = run_replications(_stroke_exp(types, run_length=400.0))
    total = sum(results[0].occupancy["asu"].pmf().values())
    return abs(total - 1.0) <= 1e-12, f"total={total!r}"


@stroke_check("an empty audit window is rejected by the pmf operation")
def _check_empty_pmf_rejected():
    try:
        occupancy_pmf([])
    except ValueError:
        return True, ""
    return False, "no error raised"


@stroke_check("delay probability of an empty unit is zero")
def _check_prob_delay_empty():
    pmf = {0: 1.0}
    ok = prob_delay(pmf, 1) == 0.0 and prob_delay(pmf, 5) == 0.0
    return ok, ""


@stroke_check("delay probability at capacity one is one minus the empty mass")
def _check_prob_delay_definitional():
    pmf = {0: 0.3, 1: 0.5, 2: 0.2}
    value = prob_delay(pmf, 1)
    return abs(value - 0.7) <= 1e-12, f"value={value}"


@stroke_check("delay probability reproduces the analytic Poisson tail")
def _check_prob_delay_poisson():
    value = prob_delay(_poisson_pmf(5.0), 10)
    return abs(value - 0.0318) < 1e-3, f"value={value:.5f}"


@stroke_check("delay curves never increase with capacity")
def _check_delay_monotone():
    types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=Exponential(5.0))}
    exp = _stroke_exp(types, run_length=500.0, capacity_range={"asu": (1, 12), "rehab": (1, 3)})
    from .experiment import run_single

    curve = run_single(exp).scenarios[0].delay["asu"]
    ps = curve.probabilities
    ok = all(b <= a + 1e-12 for a, b in zip(ps, ps[1:]))
    return ok, f"probabilities={[round(p, 4) for p in ps]}"


@stroke_check("delay probability vanishes beyond the observed maximum")
def _check_delay_vanishes():
    types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=Exponential(5.0))}
    results, _ = run_replications(_stroke_exp(types, run_length=500.0))
    dist = results[0].occupancy["asu"]
    return dist.prob_at_least(max(dist.counts) + 1) == 0.0, ""


@stroke_check("infinite-server occupancy approaches the Poisson law")
def _check_mg_infinity():
    types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=LognormalMeanSd(5.0, 1.0))}
    exp = _stroke_exp(types, run_length=3650.0, warm_up=365.0, n_replications=3)
    results, _ = run_replications(exp)
    pooled = results[0].occupancy["asu"]
    for r in results[1:]:
        pooled = pooled.pooled_with(r.occupancy["asu"])
    tv = _tv_distance(pooled.pmf(), _poisson_pmf(5.0))
    return tv < 0.05, f"tv={tv:.4f}"


@stroke_check("occupancy depends on the stay distribution only through its mean")
def _check_insensitivity():
    def pooled_pmf(los):
        types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=los)}
        exp = _stroke_exp(types, run_length=3650.0, warm_up=365.0, n_replications=3)
        results, _ = run_replications(exp)
        pooled = results[0].occupancy["asu"]
        for r in results[1:]:
            pooled = pooled.pooled_with(r.occupancy["asu"])
        return pooled.pmf()

    tv = _tv_distance(pooled_pmf(Exponential(5.0)), pooled_pmf(LognormalMeanSd(5.0, 1.0)))
    return tv < 0.07, f"tv={tv:.4f}"


@stroke_check("the rehabilitation unit alone behaves as an infinite-server queue")
def _check_rehab_isolation():
    types = {"Stroke": _stroke_type(
        rehab_external_arrival=Exponential(1.0), rehab_los=LognormalMeanSd(4.0, 2.0),
    )}
    exp = _stroke_exp(types, run_length=3650.0, warm_up=365.0, n_replications=3)
    results, _ = run_replications(exp)
    pooled = results[0].occupancy["rehab"]
    for r in results[1:]:
        pooled = pooled.pooled_with(r.occupancy["rehab"])
    tv = _tv_distance(pooled.pmf(), _poisson_pmf(4.0))
    return tv < 0.05, f"tv={tv:.4f}"


@stroke_check("the acute unit can be exercised with rehabilitation idle")
def _check_asu_isolation():
    types = {"Stroke": _stroke_type(
        asu_arrival=Exponential(1.0), asu_los=Exponential(3.0), post_asu={"Other": 1.0},
    )}
    results, _ = run_replications(_stroke_exp(types, run_length=500.0))
    r = results[0]
    rehab = r.occupancy["rehab"]
    ok = set(rehab.counts) == {0} and r.kpis["rehab_admissions"] == 0.0
    return ok, ""


@stroke_check("acute unit flow is conserved")
def _check_flow_asu():
    types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=Exponential(5.0))}
    results, _ = run_replications(_stroke_exp(types, run_length=500.0))
    r = results[0]
    ok = r.kpis["asu_admissions"] == r.kpis["asu_discharges"] + r.extras["final_asu_occupancy"]
    return ok, f"{r.kpis['asu_admissions']} vs {r.kpis['asu_discharges']} + {r.extras['final_asu_occupancy']}"


@stroke_check("rehabilitation inflow equals externals plus transfers")
def _check_flow_rehab():
    types = {"Stroke": _stroke_type(
        asu_arrival=Exponential(1.0), asu_los=Exponential(3.0),
        post_asu={"Rehab": 0.5, "Other": 0.5},
        rehab_external_arrival=Exponential(4.0), rehab_los=Exponential(4.0),
    )}
    results, _ = run_replications(_stroke_exp(types, run_length=500.0))
    r = results[0]
    inflow_ok = (r.kpis["rehab_admissions"]
                 == r.kpis["rehab_external_arrivals"] + r.kpis["rehab_transfers_in"])
    stock_ok = (r.kpis["rehab_admissions"]
                == r.kpis["rehab_discharges"] + r.extras["final_rehab_occupancy"])
    return inflow_ok and stock_ok, ""


@stroke_check("warm-up variation changes KPIs but not the event sequence")
def _check_stroke_warm_up():
    def run_with(warm_up):
        types = {"Stroke": _stroke_type(asu_arrival=Exponential(1.0), asu_los=Exponential(5.0))}
        exp = _stroke_exp(types, run_length=300.0, warm_up=warm_up, trace=True)
        results, _ = run_replications(exp)
        return results[0]

    a = run_with(0.0)
    b = run_with(100.0)
    ok = a.trace_lines == b.trace_lines and a.kpis["asu_admissions"] > b.kpis["asu_admissions"]
    return ok, ""


@stroke_check("no arrivals means empty units throughout")
def _check_no_arrivals():
    results, _ = run_replications(_stroke_exp({"Stroke": _stroke_type()}))
    r = results[0]
    ok = (r.kpis["asu_admissions"] == 0.0
          and r.occupancy["asu"].pmf() == {0: 1.0}
          and r.occupancy["rehab"].pmf() == {0: 1.0})
    return ok, ""


@stroke_check("unbounded stays accumulate the whole admission count")
def _check_long_los():
    types = {"Stroke": _stroke_type(asu_arrival=Deterministic(1.0), asu_los=Deterministic(10**9))}
    results, _ = run_replications(_stroke_exp(types, run_length=250.0))
    r = results[0]
    ok = r.extras["final_asu_occupancy"] == r.kpis["asu_admissions"] == 250.0
    return ok, f"admissions={r.kpis['asu_admissions']}"


@stroke_check("same seed reproduces identical stroke results")
def _check_stroke_determinism():
    types = {
        "Stroke": _stroke_type(
            asu_arrival=Exponential(1.2), asu_los=LognormalMeanSd(7.4, 8.6),
            post_asu={"Rehab": 0.24, "ESD": 0.13, "Other": 0.63},
            rehab_external_arrival=Exponential(21.8), rehab_los=LognormalMeanSd(28.4, 27.2),
            post_rehab={"ESD": 0.4, "Other": 0.6},
        )
    }
    exp = _stroke_exp(types, run_length=500.0, trace=True)
    a, _ = run_replications(exp)
    b, _ = run_replications(exp)
    ok = a[0].kpis == b[0].kpis and a[0].trace_lines == b[0].trace_lines
    return ok, ""


@stroke_check("audit instants sit on the half-interval grid")
def _check_audit_grid():
    exp = _stroke_exp({"Stroke": _stroke_type()}, run_length=10.0, warm_up=2.0)
    times = list(exp.audit_times())
    ok = times == [2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5, 9.5]
    return ok, f"times={times}"


@stroke_check("patient identifiers are shared across both units")
def _check_stroke_ids():
    types = {"Stroke": _stroke_type(
        asu_arrival=Exponential(2.0), asu_los=Exponential(2.0),
        rehab_external_arrival=Exponential(2.0), rehab_los=Exponential(2.0),
    )}
    results, _ = run_replications(_stroke_exp(types, run_length=200.0, trace=True))
    ids = [int(line.split()[1][3:]) for line in results[0].trace_lines
           if "event=asu_arrival" in line or "event=rehab_arrival" in line]
    return ids == list(range(len(ids))) and len(ids) > 50, f"{len(ids)} arrivals"


@stroke_check("invalid routing tables are rejected with the field named")
def _check_routing_rejected():
    types = {"Stroke": _stroke_type(post_asu={"Rehab": 0.6, "Other": 0.6})}
    try:
        _stroke_exp(types).validate()
    except ConfigError as exc:
        return "post_asu" in str(exc), str(exc)
    return False, "no error raised"


# --- runner ------------------------------------------------------------------

def selftest_results(which: str = "all") -> list[CheckResult]:
    suites = []
    if which in ("ccu", "all"):
        suites.append(("ccu", CCU_CHECKS))
    if which in ("stroke", "all"):
        suites.append(("stroke", STROKE_CHECKS))
    if not suites:
        raise ValueError(f"unknown suite {which!r}; expected ccu, stroke or all")
    results = []
    for suite, checks in suites:
        for name, fn in checks:
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashing check is a failing check
                ok, detail = False, f"raised {type(exc).__name__}: {exc}"
            results.append(CheckResult(suite, name, ok, detail))
    return results


def run_selftest(which: str = "all", verbose: bool = False) -> bool:
    results = selftest_results(which)
    by_suite: dict[str, list[CheckResult]] = {}
    for result in results:
        by_suite.setdefault(result.suite, []).append(result)
    all_ok = True
    for suite, suite_results in by_suite.items():
        passed = sum(r.ok for r in suite_results)
        for r in suite_results:
            if verbose or not r.ok:
                status = "PASS" if r.ok else "FAIL"
                suffix = f" ({r.detail})" if r.detail and not r.ok else ""
                print(f"[{suite}] {status} {r.name}{suffix}")
        print(f"[{suite}] {passed}/{len(suite_results)} checks passed")
        all_ok = all_ok and passed == len(suite_results)
    return all_ok
