"""Cloud, fog and sensor component state machines.

The fog tier registers sensors (directly or through sensor relays), issues
directed and broadcast queries, renews soft-state leases, reconciles retained
stores with peers, and tracks peer liveness under churn. The sensor tier
installs continuous queries with lease timeouts, simulates the human in the
loop for one-time prompts, relays registrations and traffic for fog-less
neighbors, and gossips broadcast queries onward. The cloud tier is a plain
pub/sub endpoint that also pushes pending configuration blobs to fogs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Optional

from . import cql
from .pubsub import Message, from_payload, to_payload

if TYPE_CHECKING:
    from .network import Network

PROMPTS = ("MARK_SELF_OK", "TAKE_PHOTO", "COUNT_PERSONS", "POSITION", "DESTINATION")


class UnknownSensorError(KeyError):
    pass


@dataclass(frozen=True)
class Query:
    query_id: str
    kind: str  # "continuous" | "one_time"
    reply_topic: str
    text: Optional[str] = None  # continuous query string
    prompt: Optional[str] = None  # one-time prompt tag
    required: Optional[int] = None  # None encodes an unbounded answer count
    hop_ttl: int = 0
    lease_period_ms: Optional[int] = None

    def to_wire(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "kind": self.kind,
            "reply_topic": self.reply_topic,
            "text": self.text,
            "prompt": self.prompt,
            "required": self.required,
            "hop_ttl": self.hop_ttl,
            "lease_period_ms": self.lease_period_ms,
        }

    @staticmethod
    def from_wire(data: dict[str, Any]) -> "Query":
        return Query(**data)


@dataclass
class SensorInfo:
    location: tuple[float, float]
    neighbors: list[str]
    route: list[str]  # hop chain from the fog to the sensor; [sensor] if direct
    registered_at: int
    last_lease: int


@dataclass
class GeneralQueryState:
    query: Query
    required: Optional[int]
    deadline: int
    answers: dict[str, Any] = field(default_factory=dict)
    closed: bool = False
    partial: bool = False


@dataclass
class LeaseEntry:
    query: Query
    fog: str
    installed_at: int
    period: int
    last_renewal: int


class FogComponent:
    def __init__(self, net: "Network", node_id: str) -> None:
        self.net = net
        self.id = node_id
        self.registry: dict[str, SensorInfo] = {}
        self.peers: dict[str, bool] = {}
        self._peer_down_since: dict[str, int] = {}
        self.continuous_targets: dict[str, tuple[str, Query]] = {}
        self.general: dict[str, GeneralQueryState] = {}
        self._query_counter = 0
        self.sensor_connection_hooks: list[Callable[[str, SensorInfo], None]] = []
        self.fog_connection_hooks: list[Callable[[str], None]] = []
        self.cloud_connection_hooks: list[Callable[[str], None]] = []
        self.config_hooks: list[Callable[[str], None]] = []

    # -- pub/sub surface -----------------------------------------------------

    def publish(self, topic: str, payload: Any) -> tuple[str, int]:
        return self.net.pubsub.publish(self.id, topic, to_payload(payload))

    def subscribe(self, topic: str, handler: Callable[[Message], None], handler_id: Optional[str] = None) -> str:
        return self.net.pubsub.subscribe(self.id, topic, handler, handler_id)

    # -- query construction ----------------------------------------------------

    def next_query_id(self) -> str:
        self._query_counter += 1
        return f"{self.id}:{self._query_counter}"

    def make_continuous(self, text: str, lease_period_ms: Optional[int] = None) -> Query:
        qid = self.next_query_id()
        return Query(
            query_id=qid,
            kind="continuous",
            reply_topic=f"ans/{qid}",
            text=text,
            lease_period_ms=lease_period_ms or self.net.params["lease_period_ms"],
        )

    def make_one_time(self, prompt: str) -> Query:
        if prompt not in PROMPTS:
            raise ValueError(f"unknown prompt tag {prompt!r}")
        qid = self.next_query_id()
        return Query(query_id=qid, kind="one_time", reply_topic=f"ans/{qid}", prompt=prompt)

    # -- Fig.-4 style query primitives -----------------------------------------

    def query_specific_sensor(
        self,
        sensor: str,
        query: Query,
        on_result: Optional[Callable[[dict], None]] = None,
    ) -> str:
        if sensor not in self.registry:
            raise UnknownSensorError(sensor)
        if on_result is not None:
            self._subscribe_results(query, on_result)
        if query.kind == "continuous":
            self.continuous_targets[query.query_id] = (sensor, query)
        self._send_query(sensor, query, queue=True)
        return query.query_id

    def query_all_sensors(
        self,
        required: Optional[int],
        query: Query,
        deadline_ms: Optional[int] = None,
        on_close: Optional[Callable[[GeneralQueryState], None]] = None,
    ) -> str:
        if required is not None and required <= 0:
            raise ValueError("required answer count must be positive (or None for unbounded)")
        sim = self.net.sim
        deadline = sim.now + (deadline_ms if deadline_ms is not None else self.net.params["deadline_ms"])
        ttl = query.hop_ttl or self.net.params["hop_ttl"]
        query = Query(**{**query.to_wire(), "required": required, "hop_ttl": ttl})
        state = GeneralQueryState(query=query, required=required, deadline=deadline)
        self.general[query.query_id] = state
        self.net.pubsub.subscribe(
            self.id, query.reply_topic, self._make_answer_handler(query.query_id), f"collect/{query.query_id}"
        )
        targets = [
            s
            for s, info in self.registry.items()
            if info.route == [s] and sim.link_state(self.id, s, sim.now)
        ]
        for sensor in targets:
            self.net.pubsub.send_or_queue(
                self.id, sensor, ("ctl", "gquery", {"fog": self.id, "query": query.to_wire(), "ttl": ttl})
            )
        sim.trace(self.id, "QUERY_BROADCAST", query=query.query_id, targets=len(targets), required=required or "unbounded")
        self.net.schedule_call(self.id, "query_deadline", self._general_deadline, (query.query_id,),
                               delay=deadline - sim.now, fields={"query": query.query_id})
        if on_close is not None:
            self._close_hooks.setdefault(query.query_id, []).append(on_close)
        return query.query_id

    _close_hooks: dict[str, list]

    def _subscribe_results(self, query: Query, on_result: Callable[[dict], None]) -> None:
        def handler(msg: Message) -> None:
            on_result(from_payload(msg.payload))

        self.net.pubsub.subscribe(self.id, query.reply_topic, handler, f"result/{query.query_id}")

    def _make_answer_handler(self, query_id: str) -> Callable[[Message], None]:
        def handler(msg: Message) -> None:
            self._on_general_answer(query_id, from_payload(msg.payload))

        return handler

    def _on_general_answer(self, query_id: str, answer: dict) -> None:
        sim = self.net.sim
        state = self.general.get(query_id)
        if state is None:
            return
        sensor = answer.get("sensor", "")
        if state.closed:
            sim.trace(self.id, "ANSWER_LATE", query=query_id, sensor=sensor)
            return
        if sensor in state.answers:
            sim.trace(self.id, "ANSWER_DUP", query=query_id, sensor=sensor)
            return
        state.answers[sensor] = answer.get("value")
        sim.trace(self.id, "ANSWER", query=query_id, sensor=sensor, count=len(state.answers))
        if state.required is not None and len(state.answers) >= state.required:
            self._close_general(query_id, partial=False)

    def _general_deadline(self, query_id: str) -> None:
        state = self.general.get(query_id)
        if state is not None and not state.closed:
            partial = state.required is not None and len(state.answers) < state.required
            self._close_general(query_id, partial=partial)

    def _close_general(self, query_id: str, partial: bool) -> None:
        state = self.general[query_id]
        state.closed = True
        state.partial = partial
        self.net.sim.trace(
            self.id,
            "QUERY_CLOSE",
            query=query_id,
            count=len(state.answers),
            sensors=sorted(state.answers),
            partial=partial,
        )
        for hook in self._close_hooks.pop(query_id, []):
            hook(state)

    # -- registration and connections -------------------------------------------

    def on_sensor_connection(self, sensor: str, context: dict[str, Any]) -> None:
        sim = self.net.sim
        path = list(context.get("path", []))
        route = list(reversed(path)) if path else [sensor]
        fresh = sensor not in self.registry
        registered_at = sim.now if fresh else self.registry[sensor].registered_at
        self.registry[sensor] = SensorInfo(
            location=tuple(context.get("location", (0.0, 0.0))),
            neighbors=list(context.get("neighbors", [])),
            route=route,
            registered_at=registered_at,
            last_lease=sim.now,
        )
        if fresh:
            sim.trace(self.id, "REGISTER", sensor=sensor, via=route[0] if route[0] != sensor else "direct")
            for hook in self.sensor_connection_hooks:
                hook(sensor, self.registry[sensor])
        # Reinstall and immediately renew continuous queries aimed at this
        # sensor, so a reconnect just before the expiry threshold keeps the
        # query alive regardless of renewal-timer phase.
        for query_id, (target, query) in self.continuous_targets.items():
            if target == sensor:
                self._send_query(sensor, query, queue=True)
                self._send_lease(sensor, query_id)

    def on_fog_connection(self, peer: str) -> None:
        self._peer_down_since.pop(peer, None)
        if peer not in self.peers:
            self.peers[peer] = True
            self.net.sim.trace(self.id, "PEER_ADD", peer=peer)
        if self.id < peer:
            self.net.pubsub.anti_entropy(self.id, peer)

    def on_fog_link_down(self, peer: str) -> None:
        if peer not in self.peers:
            return
        self._peer_down_since[peer] = self.net.sim.now
        self.net.schedule_call(
            self.id, "peer_timeout", self._peer_timeout, (peer,),
            delay=self.net.params["peer_grace_ms"], fields={"peer": peer},
        )

    def _peer_timeout(self, peer: str) -> None:
        down_since = self._peer_down_since.get(peer)
        if down_since is None:
            return  # link returned within the grace window
        if self.net.sim.now - down_since >= self.net.params["peer_grace_ms"]:
            self._peer_down_since.pop(peer, None)
            self.peers.pop(peer, None)
            self.net.sim.trace(self.id, "PEER_DROP", peer=peer)

    def on_cloud_connection(self, cloud: str) -> None:
        self.net.sim.trace(self.id, "CLOUD_CONNECT", cloud=cloud)
        self.net.pubsub.anti_entropy(self.id, cloud)
        for hook in self.cloud_connection_hooks:
            hook(cloud)

    def on_config(self, blob: str) -> None:
        self.net.sim.trace(self.id, "CONFIG_RECV", blob=blob)
        for hook in self.config_hooks:
            hook(blob)

    # -- soft-state leases --------------------------------------------------------

    def renew_leases(self) -> None:
        sim = self.net.sim
        params = self.net.params
        ttl = params["expiry_threshold"] * params["lease_period_ms"]
        for sensor in list(self.registry):
            if sim.now - self.registry[sensor].last_lease >= ttl:
                info = self.registry.pop(sensor)
                sim.trace(self.id, "REGISTRY_EXPIRE", sensor=sensor)
                self._purge_queued_queries(sensor, info)
        for query_id, (sensor, _query) in self.continuous_targets.items():
            if sensor in self.registry:
                self._send_lease(sensor, query_id)

    def _send_lease(self, sensor: str, query_id: str) -> None:
        # Renewals are fire-and-forget: a queued beacon would defeat the
        # timeout, so send only while the first hop is live.
        self._send_ctl(sensor, ("ctl", "lease", {"query_id": query_id, "sensor": sensor}), queue=False)

    def _send_query(self, sensor: str, query: Query, queue: bool) -> None:
        sent = self._send_ctl(
            sensor, ("ctl", "squery", {"fog": self.id, "sensor": sensor, "query": query.to_wire()}), queue=queue
        )
        self.net.sim.trace(self.id, "QUERY_SENT", query=query.query_id, sensor=sensor, queued=not sent)

    def _send_ctl(self, sensor: str, ctl: tuple, queue: bool) -> bool:
        """Route a control envelope to a registered sensor. Returns True if it
        was handed to a live link rather than queued."""
        info = self.registry.get(sensor)
        if info is None:
            raise UnknownSensorError(sensor)
        first = info.route[0]
        envelope = ctl if len(info.route) == 1 else ("ctl", "relay", {"route": info.route[1:], "inner": ctl})
        live = self.net.sim.link_state(self.id, first, self.net.sim.now)
        if live:
            self.net.sim.send(self.id, first, envelope)
        elif queue:
            self.net.pubsub.send_or_queue(self.id, first, envelope)
        return live

    def _purge_queued_queries(self, sensor: str, info: SensorInfo) -> None:
        def targets_sensor(envelope: tuple) -> bool:
            kind, data = envelope[1], envelope[2]
            if kind == "squery":
                return data.get("sensor") == sensor
            if kind == "relay":
                inner = data.get("inner", ())
                return len(inner) == 3 and inner[1] == "squery" and inner[2].get("sensor") == sensor
            return False

        dropped = self.net.pubsub.drop_queued_ctl(self.id, info.route[0], targets_sensor)
        if dropped:
            self.net.sim.trace(self.id, "QUERY_PURGED", sensor=sensor, count=dropped)


class SensorComponent:
    def __init__(
        self,
        net: "Network",
        node_id: str,
        respond_after_ms: Optional[int] = 0,
        answers: Optional[dict[str, Any]] = None,
        streams: Optional[list["StreamSpec"]] = None,
    ) -> None:
        self.net = net
        self.id = node_id
        self.respond_after_ms = respond_after_ms  # None models a user who ignores prompts
        self.answers = dict(answers or {})
        self.leases: dict[str, LeaseEntry] = {}
        self.seen_queries: set[str] = set()
        self.executor = cql.StreamExecutor()
        self._instances: dict[str, int] = {}
        self._emit_events: dict[str, Any] = {}
        self._streams: dict[str, StreamSpec] = {s.name: s for s in (streams or [])}
        self._stream_users: dict[str, dict[str, None]] = {}
        self._stream_events: dict[str, Any] = {}
        self._stream_index: dict[str, int] = {}
        self.prompt_handlers: dict[str, "PromptHandler"] = {}
        self._lease_timer_running = False

    # -- pub/sub surface ---------------------------------------------------------

    def publish(self, topic: str, payload: Any) -> tuple[str, int]:
        return self.net.pubsub.publish(self.id, topic, to_payload(payload))

    def subscribe(self, topic: str, handler: Callable[[Message], None], handler_id: Optional[str] = None) -> str:
        return self.net.pubsub.subscribe(self.id, topic, handler, handler_id)

    def relay_send(self, topic: str, payload: Any) -> tuple[str, int]:
        """Uplink toward a fog through neighbor sensors; plain flooding with
        the relay hop budget does the work, and queues hold the payload until
        some path appears."""
        return self.publish(topic, payload)

    # -- registration ---------------------------------------------------------------

    def live_neighbors(self, role: str) -> list[str]:
        sim = self.net.sim
        return [
            nb
            for nb in sim.neighbors(self.id)
            if sim.nodes[nb] == role and sim.link_state(self.id, nb, sim.now)
        ]

    def register_now(self) -> None:
        sim = self.net.sim
        context = {
            "sensor": self.id,
            "location": list(self.net.position(self.id)),
            "neighbors": self.live_neighbors("sensor"),
            "path": [],
        }
        live_fogs = self.live_neighbors("fog")
        if live_fogs:
            for fog in live_fogs:
                sim.send(self.id, fog, ("ctl", "register", context))
            return
        relayed = dict(context, path=[self.id])
        for neighbor in context["neighbors"]:
            sim.send(self.id, neighbor, ("ctl", "register", relayed))

    def relay_register(self, data: dict[str, Any]) -> None:
        """A neighbor's registration passing through; uplink it or pass it on."""
        sim = self.net.sim
        path = list(data.get("path", []))
        if self.id in path or data.get("sensor") == self.id:
            return
        forwarded = dict(data, path=path + [self.id])
        live_fogs = self.live_neighbors("fog")
        if live_fogs:
            for fog in live_fogs:
                sim.send(self.id, fog, ("ctl", "register", forwarded))
            return
        if len(path) < self.net.params["max_relay_hops"]:
            for neighbor in self.live_neighbors("sensor"):
                if neighbor not in path:
                    sim.send(self.id, neighbor, ("ctl", "register", forwarded))

    def relay_forward(self, data: dict[str, Any]) -> None:
        """Carry a fog-originated control envelope one hop closer to its target."""
        route, inner = list(data["route"]), data["inner"]
        next_hop = route[0]
        envelope = inner if len(route) == 1 else ("ctl", "relay", {"route": route[1:], "inner": inner})
        self.net.pubsub.send_or_queue(self.id, next_hop, envelope)

    # -- query handling ---------------------------------------------------------------

    def on_specific_query(self, fog: str, query: Query) -> None:
        if query.kind == "continuous":
            self._install_continuous(fog, query)
        else:
            if query.query_id in self.seen_queries:
                return
            self.seen_queries.add(query.query_id)
            self._prompt(fog, query)

    def on_general_query(self, fog: str, query: Query, ttl: int) -> None:
        sim = self.net.sim
        if query.query_id in self.seen_queries:
            sim.trace(self.id, "GOSSIP_DUP", query=query.query_id)
            return
        self.seen_queries.add(query.query_id)
        if query.kind == "continuous":
            self._install_continuous(fog, query)
        else:
            self._prompt(fog, query)
        if ttl > 0:
            live = sorted(self.live_neighbors("sensor"))
            chosen = self.net.rng.sample(live, min(self.net.params["fanout"], len(live)))
            for neighbor in chosen:
                sim.send(
                    self.id, neighbor,
                    ("ctl", "gquery", {"fog": fog, "query": query.to_wire(), "ttl": ttl - 1}),
                )
            sim.trace(self.id, "GOSSIP_FWD", query=query.query_id, to=chosen, ttl=ttl - 1)

    # -- continuous queries and leases ---------------------------------------------------

    def _install_continuous(self, fog: str, query: Query) -> None:
        sim = self.net.sim
        if query.query_id in self.leases:
            return  # duplicate install is a no-op
        try:
            ast = cql.parse(query.text or "")
        except cql.CqlError as err:
            self.publish(query.reply_topic, {"query_id": query.query_id, "sensor": self.id, "error": str(err)})
            sim.trace(self.id, "NACK", query=query.query_id, error=str(err))
            return
        instance_id = self.executor.install(ast, self._make_emitter(query))
        self._instances[query.query_id] = instance_id
        period = query.lease_period_ms or self.net.params["lease_period_ms"]
        self.leases[query.query_id] = LeaseEntry(query, fog, sim.now, period, sim.now)
        sim.trace(self.id, "INSTALL", query=query.query_id, stream=ast.stream)
        self._stream_users.setdefault(ast.stream, {})[query.query_id] = None
        self._start_stream(ast.stream)
        if ast.window_kind == "TIME":
            self._schedule_emit(query.query_id, ast.every, anchor=sim.now)
        if not self._lease_timer_running:
            self._lease_timer_running = True
            self.net.schedule_call(self.id, "lease_check", self.expire_queries, (), delay=period)

    def _make_emitter(self, query: Query) -> Callable[[cql.Emission], None]:
        def emit(emission: cql.Emission) -> None:
            self.publish(
                query.reply_topic,
                {"query_id": query.query_id, "sensor": self.id, "value": emission.value, "at": emission.time},
            )
            self.net.sim.trace(self.id, "EMIT", query=query.query_id, value=emission.value, at=emission.time)

        return emit

    def _schedule_emit(self, query_id: str, every: int, anchor: int) -> None:
        # Fire 1 ms past the window boundary so samples stamped exactly on the
        # boundary are already admitted; the logical emission instant is the
        # boundary itself.
        event = self.net.schedule_call(
            self.id, "cql_emit", self._emit_tick, (query_id, anchor + every, every),
            delay=anchor + every + 1 - self.net.sim.now, fields={"query": query_id},
        )
        self._emit_events[query_id] = event

    def _emit_tick(self, query_id: str, boundary: int, every: int) -> None:
        if query_id not in self.leases:
            return
        self.executor.tick(self._instances[query_id], boundary)
        self._schedule_emit(query_id, every, anchor=boundary)

    def on_lease_renewal(self, query_id: str) -> None:
        lease = self.leases.get(query_id)
        if lease is not None:
            lease.last_renewal = self.net.sim.now
            self.net.sim.trace(self.id, "RENEW_RECV", query=query_id)

    def expire_queries(self) -> list[str]:
        """Uninstall queries whose renewals stopped; reschedules itself."""
        sim = self.net.sim
        threshold = self.net.params["expiry_threshold"]
        expired = []
        for query_id in list(self.leases):
            lease = self.leases[query_id]
            missed = (sim.now - lease.last_renewal) // lease.period
            if missed >= threshold:
                self._uninstall(query_id)
                sim.trace(self.id, "LEASE_EXPIRE", query=query_id, missed=missed)
                expired.append(query_id)
        if self.leases:
            period = min(lease.period for lease in self.leases.values())
            self.net.schedule_call(self.id, "lease_check", self.expire_queries, (), delay=period)
        else:
            self._lease_timer_running = False
        return expired

    def _uninstall(self, query_id: str) -> None:
        lease = self.leases.pop(query_id)
        instance_id = self._instances.pop(query_id)
        ast = self.executor.instance(instance_id).ast
        self.executor.uninstall(instance_id)
        emit_event = self._emit_events.pop(query_id, None)
        if emit_event is not None:
            self.net.sim.cancel(emit_event)
        users = self._stream_users.get(ast.stream, {})
        users.pop(query_id, None)
        if not users:
            self._stop_stream(ast.stream)

    # -- sampling ------------------------------------------------------------------------

    def _start_stream(self, name: str) -> None:
        spec = self._streams.get(name)
        if spec is None or name in self._stream_events:
            return
        self._stream_index.setdefault(name, 0)
        self._stream_events[name] = self.net.schedule_call(
            self.id, "sample", self._sample_tick, (name,), delay=spec.interval_ms, fields={"stream": name}
        )

    def _stop_stream(self, name: str) -> None:
        event = self._stream_events.pop(name, None)
        if event is not None:
            self.net.sim.cancel(event)

    def _sample_tick(self, name: str) -> None:
        spec = self._streams[name]
        users = self._stream_users.get(name, {})
        if not users:
            self._stream_events.pop(name, None)
            return
        index = self._stream_index[name]
        self._stream_index[name] = index + 1
        value = spec.value_at(index, self.net.rng)
        sample = cql.Sample(name, self.net.sim.now, {spec.field: value})
        self.net.sim.trace(self.id, "SAMPLE", stream=name, field=spec.field, value=value)
        for query_id in list(users):
            outcome = self.executor.on_sample(self._instances[query_id], sample)
            if outcome.status == "type_error":
                self.net.sim.trace(self.id, "SAMPLE_SKIP", query=query_id, stream=name)
        self._stream_events[name] = self.net.schedule_call(
            self.id, "sample", self._sample_tick, (name,), delay=spec.interval_ms, fields={"stream": name}
        )

    # -- one-time prompts -------------------------------------------------------------------

    def _prompt(self, fog: str, query: Query) -> None:
        handler = self.prompt_handlers.get(query.prompt or "")
        if handler is not None and handler.on_prompt is not None:
            handler.on_prompt(fog, query)
        else:
            self.net.sim.trace(self.id, "PROMPT", query=query.query_id, prompt=query.prompt or "")
        if self.respond_after_ms is None:
            return  # the user ignores the prompt; nothing is ever published
        self.net.schedule_call(
            self.id, "user_response", self._user_response, (fog, query),
            delay=self.respond_after_ms, fields={"query": query.query_id},
        )

    def _user_response(self, fog: str, query: Query) -> None:
        handler = self.prompt_handlers.get(query.prompt or "")
        if handler is not None and handler.on_response is not None:
            handler.on_response(fog, query)
            return
        value = self._default_answer(query.prompt or "")
        if value is None:
            return
        self.publish(query.reply_topic, {"query_id": query.query_id, "sensor": self.id, "value": value})
        self.net.sim.trace(self.id, "ANSWER_SENT", query=query.query_id, value=value)

    def _default_answer(self, prompt: str) -> Any:
        if prompt == "POSITION":
            return list(self.net.position(self.id))
        return self.answers.get(prompt)


@dataclass
class PromptHandler:
    on_prompt: Optional[Callable[[str, Query], None]] = None
    on_response: Optional[Callable[[str, Query], None]] = None


@dataclass
class StreamSpec:
    """Deterministic sample source: a linear ramp or seeded-uniform values."""

    name: str
    interval_ms: int
    field: str = "v"
    kind: str = "ramp"  # "ramp" | "uniform"
    start: float = 0.0
    step: float = 1.0
    lo: float = 0.0
    hi: float = 1.0

    def value_at(self, index: int, rng) -> float:
        if self.kind == "uniform":
            return round(rng.uniform(self.lo, self.hi), 6)
        value = self.start + self.step * index
        return int(value) if float(value).is_integer() else value


class CloudComponent:
    def __init__(self, net: "Network", node_id: str, config_updates: Optional[list[str]] = None) -> None:
        self.net = net
        self.id = node_id
        self.config_updates = list(config_updates or [])
        self._delivered: set[tuple[str, int]] = set()

    def publish(self, topic: str, payload: Any) -> tuple[str, int]:
        return self.net.pubsub.publish(self.id, topic, to_payload(payload))

    def subscribe(self, topic: str, handler: Callable[[Message], None], handler_id: Optional[str] = None) -> str:
        return self.net.pubsub.subscribe(self.id, topic, handler, handler_id)

    def push_config(self, blob: str) -> None:
        """Queue a config blob; connected and future fogs receive it once."""
        self.config_updates.append(blob)
        sim = self.net.sim
        for fog in sim.neighbors(self.id):
            if sim.nodes[fog] == "fog" and sim.link_state(self.id, fog, sim.now):
                self.deliver_pending(fog)

    def deliver_pending(self, fog: str) -> None:
        for index, blob in enumerate(self.config_updates):
            key = (fog, index)
            if key in self._delivered:
                continue
            self._delivered.add(key)
            self.net.sim.send(self.id, fog, ("ctl", "config", {"blob": blob}))
            self.net.sim.trace(self.id, "CONFIG_PUSH", fog=fog, blob=blob)
