"""Event-scheduling simulation kernel.

A single :class:`Engine` owns the simulation clock and a future-event queue.
Model logic is written as plain generator functions ("processes") that yield
:class:`Timeout` or :class:`Acquire` commands; the engine resumes them when
the requested delay elapses or a resource unit is granted.

Determinism guarantees:

* events with equal timestamps fire in insertion order (a global sequence
  number breaks ties, never object identity or hashing);
* every process continuation flows through the event queue, so execution
  order is a pure function of (time, insertion sequence);
* resource wait queues serve lower priority numbers first and are FIFO
  within a priority level.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import count
from typing import Callable, Generator, Optional


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock time."""


@dataclass
class TraceRecord:
    """One simulated event for the human-readable trace."""

    time: float
    entity_id: int
    entity_class: str
    event_kind: str
    detail: Optional[str] = None

    def format(self) -> str:
        """Render as ``t=<2dp> id=<int> class=<label> event=<label>[ detail=<text>]``."""
        line = (
            f"t={self.time:.2f} id={self.entity_id} "
            f"class={self.entity_class} event={self.event_kind}"
        )
        if self.detail is not None:
            line += f" detail={self.detail}"
        return line


class Trace:
    """Optional event trace. When disabled, emitting is a no-op.

    Lines are collected in :attr:`lines` unless a ``sink`` callable is given,
    in which case each formatted line is passed straight to it.
    """

    def __init__(self, enabled: bool = False, sink: Optional[Callable[[str], None]] = None):
        self.enabled = enabled
        self.sink = sink
        self.lines: list[str] = []
        self.emitted = 0

    def emit(self, record: TraceRecord) -> None:
        if not self.enabled:
            return
        self.emitted += 1
        line = record.format()
        if self.sink is None:
            self.lines.append(line)
        else:
            self.sink(line)


class EventHandle:
    """Handle for a scheduled event; ``cancel()`` before it fires to skip it."""

    __slots__ = ("time", "seq", "action", "cancelled")

    def __init__(self, time: float, seq: int, action: Callable[[], None]):
        self.time = time
        self.seq = seq
        self.action = action
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class EventQueue:
    """Future events keyed by (time, insertion sequence number)."""

    def __init__(self):
        self._heap: list[tuple[float, int, EventHandle]] = []
        self._seq = count()

    def __len__(self) -> int:
        return len(self._heap)

    def next_seq(self) -> int:
        return next(self._seq)

    def push(self, time: float, action: Callable[[], None]) -> EventHandle:
        handle = EventHandle(time, self.next_seq(), action)
        heapq.heappush(self._heap, (time, handle.seq, handle))
        return handle

    def peek_time(self) -> Optional[float]:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> EventHandle:
        return heapq.heappop(self._heap)[2]


class Timeout:
    """Process command: resume after ``delay`` time units."""

    __slots__ = ("delay",)

    def __init__(self, delay: float):
        self.delay = delay


class Acquire:
    """Process command: wait for one unit of ``resource``.

    The yield resumes with a :class:`Grant` once a unit is allocated. Lower
    ``priority`` numbers are served first.
    """

    __slots__ = ("resource", "priority")

    def __init__(self, resource: "CountedResource", priority: int = 0):
        self.resource = resource
        self.priority = priority


@dataclass(frozen=True)
class Grant:
    """Allocation of one resource unit. ``wait`` is grant time minus request time."""

    request_time: float
    grant_time: float

    @property
    def wait(self) -> float:
        return self.grant_time - self.request_time


Process = Generator[object, object, None]


class Engine:
    """Simulation clock, event queue and process scheduler."""

    def __init__(self, trace: Optional[Trace] = None):
        self.now = 0.0
        self.events = EventQueue()
        self.trace = trace if trace is not None else Trace()

    def schedule(self, at: float, action: Callable[[], None]) -> EventHandle:
        """Schedule ``action`` to run at absolute time ``at``."""
        if at < self.now:
            raise SchedulingError(f"cannot schedule at t={at!r}: clock is already at {self.now!r}")
        return self.events.push(at, action)

    def schedule_after(self, delay: float, action: Callable[[], None]) -> EventHandle:
        return self.schedule(self.now + delay, action)

    def run_until(self, end: float) -> float:
        """Process every event with time <= ``end``; leave the clock at ``end``.

        An empty queue terminates early with the clock still advanced to
        ``end``. Events beyond ``end`` stay queued for a later call.
        """
        while True:
            t = self.events.peek_time()
            if t is None or t > end:
                break
            handle = self.events.pop()
            if handle.cancelled:
                continue
            self.now = handle.time
            handle.action()
        if end > self.now:
            self.now = end
        return self.now

    def start_process(self, gen: Process) -> None:
        """Register a generator process; its first step runs at the current time."""
        self.schedule(self.now, lambda: self._advance(gen, None))

    def _advance(self, gen: Process, value: object) -> None:
        try:
            command = gen.send(value)
        except StopIteration:
            return
        if isinstance(command, Timeout):
            self.schedule(self.now + command.delay, lambda: self._advance(gen, None))
        elif isinstance(command, Acquire):
            command.resource._enqueue(gen, command.priority)
        else:
            raise TypeError(f"process yielded {command!r}; expected Timeout or Acquire")

    def emit(self, entity_id: int, entity_class: str, event_kind: str, detail: Optional[str] = None) -> None:
        """Emit a trace record at the current clock time."""
        self.trace.emit(TraceRecord(self.now, entity_id, entity_class, event_kind, detail))


class CountedResource:
    """Pool of identical units with a priority wait queue.

    ``try_acquire`` never waits: it grants a unit if one is free, otherwise
    returns ``None`` and leaves the resource untouched (callers implement
    balking on top of this). Waiting acquisition happens by yielding
    :class:`Acquire` from a process. Units are returned with :meth:`release`.
    """

    def __init__(self, engine: Engine, capacity: int, name: str = "resource"):
        if not isinstance(capacity, int) or capacity < 1:
            raise ValueError(f"capacity must be a positive integer, got {capacity!r}")
        self.engine = engine
        self.capacity = capacity
        self.name = name
        self.in_use = 0
        self._waiters: list[tuple[int, int, float, Process]] = []
        self._wait_seq = count()
        self._busy_area = 0.0
        self._last_change = engine.now

    @property
    def free(self) -> int:
        return self.capacity - self.in_use

    def queue_length(self) -> int:
        return len(self._waiters)

    def _account(self) -> None:
        now = self.engine.now
        self._busy_area += self.in_use * (now - self._last_change)
        self._last_change = now

    def busy_time(self) -> float:
        """Time-integral of units in use since creation (unit-hours etc.)."""
        self._account()
        return self._busy_area

    def try_acquire(self) -> Optional[Grant]:
        if self.in_use < self.capacity:
            self._account()
            self.in_use += 1
            now = self.engine.now
            return Grant(now, now)
        return None

    def _enqueue(self, gen: Process, priority: int) -> None:
        now = self.engine.now
        if self.in_use < self.capacity:
            # invariant: a free unit implies no waiters, so grant directly
            self._account()
            self.in_use += 1
            grant = Grant(now, now)
            self.engine.schedule(now, lambda: self.engine._advance(gen, grant))
        else:
            heapq.heappush(self._waiters, (priority, next(self._wait_seq), now, gen))

    def release(self) -> None:
        """Return one unit; hands it to the highest-priority waiter if any."""
        if self.in_use <= 0:
            raise RuntimeError(f"release of {self.name!r} with no units in use")
        self._account()
        self.in_use -= 1
        if self._waiters:
            _, _, request_time, gen = heapq.heappop(self._waiters)
            self._account()
            self.in_use += 1
            grant = Grant(request_time, self.engine.now)
            self.engine.schedule(self.engine.now, lambda: self.engine._advance(gen, grant))
