"""Delay-tolerant publish/subscribe shared by all three tiers.

Messages flood to declared neighbors through per-neighbor FIFO queues that
hold traffic while a link is down and flush when it returns. A per-node seen
set gives at-most-once processing, fog and cloud nodes keep a retained store
reconciled by anti-entropy, and sensor-to-sensor forwarding is bounded by a
relay hop budget so flooding through the sensor tier stays local.

Wire format of a transported message (also in docs/wire-format.md): the five
fields origin id, sequence, topic, created_at, payload are concatenated in
that order, each prefixed with a big-endian u32 byte length; sequence and
created_at are big-endian u64 inside their length-prefixed slot.
"""

from __future__ import annotations

import json
import struct
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .sim import SimTime, Simulator

MessageId = tuple[str, int]

Handler = Callable[["Message"], None]


@dataclass(frozen=True)
class Message:
    origin: str
    seq: int
    topic: str
    payload: bytes
    created_at: SimTime

    @property
    def id(self) -> MessageId:
        return (self.origin, self.seq)

    @property
    def id_str(self) -> str:
        return f"{self.origin}:{self.seq}"


def _field(raw: bytes) -> bytes:
    return struct.pack(">I", len(raw)) + raw


def encode_message(msg: Message) -> bytes:
    return b"".join(
        [
            _field(msg.origin.encode("utf-8")),
            _field(struct.pack(">Q", msg.seq)),
            _field(msg.topic.encode("utf-8")),
            _field(struct.pack(">Q", msg.created_at)),
            _field(msg.payload),
        ]
    )


def decode_message(data: bytes) -> Message:
    fields = []
    offset = 0
    for _ in range(5):
        if offset + 4 > len(data):
            raise ValueError("truncated message frame")
        (length,) = struct.unpack_from(">I", data, offset)
        offset += 4
        if offset + length > len(data):
            raise ValueError("truncated message field")
        fields.append(data[offset : offset + length])
        offset += length
    if offset != len(data):
        raise ValueError("trailing bytes after message frame")
    return Message(
        origin=fields[0].decode("utf-8"),
        seq=struct.unpack(">Q", fields[1])[0],
        topic=fields[2].decode("utf-8"),
        payload=fields[4],
        created_at=struct.unpack(">Q", fields[3])[0],
    )


def to_payload(obj: Any) -> bytes:
    """Canonical JSON bytes, so identical values encode identically."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def from_payload(payload: bytes) -> Any:
    return json.loads(payload.decode("utf-8"))


def payload_repr(payload: bytes) -> Any:
    """Decoded payload for traces; falls back to latin-1 text for raw bytes."""
    try:
        return from_payload(payload)
    except (UnicodeDecodeError, json.JSONDecodeError):
        return payload.decode("latin-1")


class _NodeBus:
    def __init__(self, node_id: str, role: str, keeps_store: bool) -> None:
        self.node_id = node_id
        self.role = role
        self.subs: dict[str, list[tuple[str, Handler]]] = {}
        self.seen: set[MessageId] = set()
        self.store: Optional[dict[MessageId, Message]] = {} if keeps_store else None
        self.out_queues: dict[str, deque] = {}
        self.next_seq = 0


class PubSubLayer:
    """Store-and-forward pub/sub over the kernel's declared links.

    ``enqueue_targets`` is injected by the component layer and returns the
    neighbors a node currently floods to (fog peer sets shrink under churn);
    by default every declared link neighbor is a target.
    """

    def __init__(self, sim: Simulator, params: dict[str, Any]) -> None:
        self.sim = sim
        self.params = params
        self.buses: dict[str, _NodeBus] = {}
        self.enqueue_targets: Callable[[str], list[str]] = self._declared_neighbors

    def add_node(self, node_id: str) -> None:
        role = self.sim.nodes[node_id]
        self.buses[node_id] = _NodeBus(node_id, role, keeps_store=role in ("fog", "cloud"))

    def _declared_neighbors(self, node_id: str) -> list[str]:
        return self.sim.neighbors(node_id)

    # -- public operations ---------------------------------------------------

    def publish(self, node: str, topic: str, payload: bytes) -> MessageId:
        if not topic:
            raise ValueError("topic name must be non-empty")
        bus = self.buses[node]
        bus.next_seq += 1
        msg = Message(node, bus.next_seq, topic, payload, self.sim.now)
        self.sim.trace(node, "PUBLISH", id=msg.id_str, topic=topic, payload=payload_repr(payload))
        self._mark_processed(bus, msg)
        # Local subscriptions run in their own zero-delay event so a handler
        # that republishes never re-enters itself.
        self.sim.schedule(node, "deliver_local", ("local", encode_message(msg)), delay=0)
        self._fan_out(bus, msg, exclude=None, relay_hops=0)
        return msg.id

    def subscribe(self, node: str, topic: str, handler: Handler, handler_id: Optional[str] = None) -> str:
        if not topic:
            raise ValueError("topic name must be non-empty")
        bus = self.buses[node]
        hid = handler_id or getattr(handler, "__name__", "handler")
        entries = bus.subs.setdefault(topic, [])
        for existing_id, _ in entries:
            if existing_id == hid:
                return f"{node}/{topic}/{hid}"
        entries.append((hid, handler))
        return f"{node}/{topic}/{hid}"

    def forward(self, node: str, msg: Message, arrived_from: Optional[str], relay_hops: int) -> None:
        """Process an arriving message: dedup, deliver locally, re-flood."""
        bus = self.buses[node]
        self.sim.trace(node, "RECV", id=msg.id_str, topic=msg.topic, sender=arrived_from or "")
        if msg.id in bus.seen:
            self.sim.trace(node, "DUP", id=msg.id_str, sender=arrived_from or "")
            return
        self._mark_processed(bus, msg)
        self._deliver_local(bus, msg)
        self._fan_out(bus, msg, exclude=arrived_from, relay_hops=relay_hops)

    def anti_entropy(self, node: str, peer: str) -> int:
        """Pairwise store reconciliation; missing messages ride the link."""
        bus, peer_bus = self.buses[node], self.buses[peer]
        if bus.store is None or peer_bus.store is None:
            raise ValueError("anti-entropy runs between fog/cloud nodes only")
        if not self.sim.link_state(node, peer, self.sim.now):
            return 0
        self._prune_store(bus)
        self._prune_store(peer_bus)
        to_peer = sorted(set(bus.store) - set(peer_bus.store))
        to_node = sorted(set(peer_bus.store) - set(bus.store))
        for mid in to_peer:
            self.sim.send(node, peer, ("msg", 0, encode_message(bus.store[mid])))
        for mid in to_node:
            self.sim.send(peer, node, ("msg", 0, encode_message(peer_bus.store[mid])))
        exchanged = len(to_peer) + len(to_node)
        self.sim.trace(node, "ANTI_ENTROPY", peer=peer, sent=len(to_peer), fetched=len(to_node))
        return exchanged

    # -- event plumbing (driven by the network dispatcher) --------------------

    def on_receive(self, node: str, sender: str, envelope: tuple) -> None:
        _, relay_hops, wire = envelope
        self.forward(node, decode_message(wire), arrived_from=sender, relay_hops=relay_hops)

    def on_deliver_local(self, node: str, envelope: tuple) -> None:
        self._deliver_local(self.buses[node], decode_message(envelope[1]))

    def flush(self, node: str, neighbor: str) -> None:
        """Drain the queue toward a neighbor whose link just came up."""
        queue = self.buses[node].out_queues.get(neighbor)
        while queue:
            self.sim.send(node, neighbor, queue.popleft())

    def drop_queued_ctl(self, node: str, neighbor: str, match: Callable[[tuple], bool]) -> int:
        queue = self.buses[node].out_queues.get(neighbor)
        if not queue:
            return 0
        kept = [env for env in queue if not (env[0] == "ctl" and match(env))]
        dropped = len(queue) - len(kept)
        queue.clear()
        queue.extend(kept)
        return dropped

    def send_or_queue(self, node: str, neighbor: str, envelope: tuple) -> None:
        """Unicast with store-and-forward: queue whenever the link is down."""
        if self.sim.link_state(node, neighbor, self.sim.now):
            self.sim.send(node, neighbor, envelope)
            return
        queue = self.buses[node].out_queues.setdefault(neighbor, deque())
        capacity = self.params["queue_capacity"]
        if len(queue) >= capacity:
            dropped = queue.popleft()
            self.sim.trace(node, "QUEUE_DROP", neighbor=neighbor, dropped_kind=dropped[0])
        queue.append(envelope)

    # -- internals -----------------------------------------------------------

    def _mark_processed(self, bus: _NodeBus, msg: Message) -> None:
        bus.seen.add(msg.id)
        if bus.store is not None:
            bus.store[msg.id] = msg

    def _prune_store(self, bus: _NodeBus) -> None:
        ttl = self.params.get("store_ttl_ms")
        if ttl is None or bus.store is None:
            return
        cutoff = self.sim.now - ttl
        stale = [mid for mid, m in bus.store.items() if m.created_at < cutoff]
        for mid in stale:
            del bus.store[mid]

    def _deliver_local(self, bus: _NodeBus, msg: Message) -> None:
        for handler_id, handler in list(bus.subs.get(msg.topic, ())):
            self.sim.trace(bus.node_id, "DELIVER", id=msg.id_str, topic=msg.topic, handler=handler_id)
            handler(msg)

    def _fan_out(self, bus: _NodeBus, msg: Message, exclude: Optional[str], relay_hops: int) -> None:
        wire = encode_message(msg)
        for neighbor in self.enqueue_targets(bus.node_id):
            if neighbor == exclude:
                continue
            if bus.role == "sensor" and self.sim.nodes[neighbor] == "sensor":
                hops = relay_hops + 1  # another sensor-to-sensor hop
                if hops > self.params["max_relay_hops"]:
                    continue
            else:
                hops = 0  # reaching or leaving the fog/cloud tier resets the budget
            self.send_or_queue(bus.node_id, neighbor, ("msg", hops, wire))
