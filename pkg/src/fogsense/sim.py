"""Deterministic discrete-event kernel.

Time is integer milliseconds. Events execute in (fire_time, sequence) order,
where the sequence number is assigned at scheduling time, so runs with the
same inputs and seed replay identically. Links carry a latency and a schedule
of half-open up-intervals; a message accepted while the link is up is
delivered after the latency even if the link drops mid-flight.

Every executed event is appended to the trace, followed by any records the
handler emits, which makes the trace the unit of golden-file testing.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional

from .rng import Rng

SimTime = int

ROLES = ("cloud", "fog", "sensor")


class UnknownNodeError(KeyError):
    pass


class InvariantViolation(RuntimeError):
    """A runtime self-check failed; carries the invariant name and position."""

    def __init__(self, name: str, detail: str, trace_seq: int) -> None:
        super().__init__(f"{name}: {detail} (at trace seq {trace_seq})")
        self.name = name
        self.detail = detail
        self.trace_seq = trace_seq


@dataclass(frozen=True)
class TraceRecord:
    time: SimTime
    seq: int
    node: str
    kind: str
    fields: dict[str, Any]

    def as_dict(self) -> dict[str, Any]:
        return {
            "time": self.time,
            "seq": self.seq,
            "node": self.node,
            "kind": self.kind,
            "fields": dict(sorted(self.fields.items())),
        }


@dataclass
class Event:
    fire_time: SimTime
    seq: int
    target: str
    kind: str
    payload: Any
    trace_fields: dict[str, Any] = field(default_factory=dict)
    cancelled: bool = False


class LinkSchedule:
    """Latency plus sorted, disjoint [up_start, up_end) intervals."""

    def __init__(self, latency_ms: int, up_intervals: list[tuple[int, int]]) -> None:
        if latency_ms < 0:
            raise ValueError("link latency must be >= 0")
        intervals = [(int(s), int(e)) for s, e in up_intervals]
        last_end = None
        for s, e in intervals:
            if s < 0 or e <= s:
                raise ValueError(f"bad up-interval [{s}, {e})")
            if last_end is not None and s < last_end:
                raise ValueError("up-intervals must be sorted and disjoint")
            last_end = e
        self.latency_ms = latency_ms
        self.up_intervals = intervals

    def is_up(self, at: SimTime) -> bool:
        for s, e in self.up_intervals:
            if s <= at < e:
                return True
            if s > at:
                return False
        return False


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class Simulator:
    """Single-threaded, run-to-completion event loop."""

    def __init__(self, seed: int = 0) -> None:
        self.now: SimTime = 0
        self.rng = Rng(seed)
        self.nodes: dict[str, str] = {}
        self.links: dict[tuple[str, str], LinkSchedule] = {}
        self.trace_records: list[TraceRecord] = []
        self.dispatcher: Optional[Callable[[Event], None]] = None
        self._queue: list[tuple[SimTime, int, Event]] = []
        self._event_seq = 0
        self._trace_seq = 0
        self._finished = False

    # -- topology -----------------------------------------------------------

    def add_node(self, node_id: str, role: str) -> None:
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        if node_id in self.nodes:
            raise ValueError(f"duplicate node id {node_id!r}")
        self.nodes[node_id] = role

    def add_link(self, a: str, b: str, latency_ms: int, up_intervals: list[tuple[int, int]]) -> None:
        self._require_node(a)
        self._require_node(b)
        if a == b:
            raise ValueError("link endpoints must differ")
        key = _pair(a, b)
        if key in self.links:
            raise ValueError(f"duplicate link {a}-{b}")
        self.links[key] = LinkSchedule(latency_ms, up_intervals)
        # Transition events drive connection callbacks and queue flushes.
        for start, end in self.links[key].up_intervals:
            for me, other in ((a, b), (b, a)):
                self.schedule(me, "link_up", other, delay=start - self.now, fields={"peer": other})
                self.schedule(me, "link_down", other, delay=end - self.now, fields={"peer": other})

    def neighbors(self, node_id: str) -> list[str]:
        """Nodes sharing a declared link, in link-declaration order."""
        out = []
        for (a, b) in self.links:
            if a == node_id:
                out.append(b)
            elif b == node_id:
                out.append(a)
        return out

    def _require_node(self, node_id: str) -> None:
        if node_id not in self.nodes:
            raise UnknownNodeError(node_id)

    # -- scheduling ---------------------------------------------------------

    def schedule(
        self,
        target: str,
        kind: str,
        payload: Any = None,
        delay: SimTime = 0,
        fields: Optional[dict[str, Any]] = None,
    ) -> Event:
        if delay < 0:
            raise ValueError("delay must be >= 0")
        if self._finished:
            raise RuntimeError("simulation already finished")
        self._require_node(target)
        self._event_seq += 1
        event = Event(self.now + delay, self._event_seq, target, kind, payload, dict(fields or {}))
        heapq.heappush(self._queue, (event.fire_time, event.seq, event))
        return event

    def cancel(self, event: Event) -> None:
        event.cancelled = True

    def send(self, src: str, dst: str, payload: Any) -> Literal["accepted", "no-link"]:
        self._require_node(src)
        self._require_node(dst)
        if src == dst:
            raise ValueError("send() requires distinct endpoints")
        link = self.links.get(_pair(src, dst))
        if link is None or not link.is_up(self.now):
            return "no-link"
        self.schedule(dst, "receive", (src, payload), delay=link.latency_ms, fields={"from": src})
        return "accepted"

    def link_state(self, a: str, b: str, at: SimTime) -> bool:
        link = self.links.get(_pair(a, b))
        return link is not None and link.is_up(at)

    # -- execution ----------------------------------------------------------

    def run_until(self, t: SimTime) -> list[TraceRecord]:
        if t < self.now:
            raise ValueError("run_until() target is in the past")
        start = len(self.trace_records)
        while self._queue and self._queue[0][0] < t:
            fire_time, _, event = heapq.heappop(self._queue)
            if event.cancelled:
                continue
            if fire_time < self.now:
                raise InvariantViolation(
                    "clock_monotonicity",
                    f"event at t={fire_time} after clock reached {self.now}",
                    self._trace_seq,
                )
            self.now = fire_time
            self.trace(event.target, event.kind, **event.trace_fields)
            if self.dispatcher is not None:
                self.dispatcher(event)
        self.now = t
        return self.trace_records[start:]

    def finish(self) -> None:
        """Mark the run complete; further schedule() calls are rejected."""
        self._finished = True

    def trace(self, node: str, kind: str, **fields: Any) -> TraceRecord:
        self._trace_seq += 1
        record = TraceRecord(self.now, self._trace_seq, node, kind, fields)
        self.trace_records.append(record)
        return record
