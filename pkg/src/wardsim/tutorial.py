"""Minimal worked example: an urgent-care call centre.

Callers arrive with exponential inter-arrival times and wait for one of a
pool of operators; call durations are triangular. This is the smallest
useful model on the kernel and doubles as a sanity check: over a long run
the mean operator utilisation approaches offered load / capacity.

    >>> from wardsim.tutorial import run_call_centre
    >>> stats = run_call_centre(run_length=10_000.0, seed=1)
    >>> 0 < stats["utilisation"] < 1
    True
"""

from __future__ import annotations

from .engine import Acquire, CountedResource, Engine, Timeout, Trace
from .sampling import Exponential, Triangular, stream_table

STREAM_NAMES = ["inter_arrival", "call_duration"]


def run_call_centre(
    run_length: float = 1_000.0,
    n_operators: int = 2,
    arrival_mean: float = 0.6,
    duration: tuple[float, float, float] = (0.5, 1.0, 1.5),
    seed: int = 0,
    trace: bool = False,
) -> dict:
    """Run the call centre once and return summary statistics."""
    engine = Engine(trace=Trace(enabled=trace))
    streams = stream_table(STREAM_NAMES, seed, 0)
    operators = CountedResource(engine, n_operators, "operators")
    inter_arrival = Exponential(arrival_mean)
    call_time = Triangular(*duration)
    waits: list[float] = []
    answered = [0]

    def caller(caller_id: int):
        grant = yield Acquire(operators)
        waits.append(grant.wait)
        engine.emit(caller_id, "caller", "answered", f"wait={grant.wait:.2f}")
        yield Timeout(call_time.sample(streams["call_duration"]))
        operators.release()
        answered[0] += 1
        engine.emit(caller_id, "caller", "finished")

    def arrivals():
        caller_id = 0
        while True:
            yield Timeout(inter_arrival.sample(streams["inter_arrival"]))
            engine.emit(caller_id, "caller", "arrival")
            engine.start_process(caller(caller_id))
            caller_id += 1

    engine.start_process(arrivals())
    engine.run_until(run_length)
    utilisation = operators.busy_time() / (n_operators * run_length)
    return {
        "answered": answered[0],
        "utilisation": utilisation,
        "mean_wait": sum(waits) / len(waits) if waits else 0.0,
        "offered_load": (1.0 / arrival_mean) * (sum(duration) / 3.0) / n_operators,
    }
