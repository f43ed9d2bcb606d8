import pytest

from fogsense.sim import Simulator, UnknownNodeError


def two_node_sim(latency=20, up=((0, 1_000_000),)):
    sim = Simulator(seed=1)
    sim.add_node("a", "fog")
    sim.add_node("b", "fog")
    sim.add_link("a", "b", latency, list(up))
    return sim


def test_schedule_delay_arithmetic():
    sim = Simulator()
    sim.add_node("n1", "fog")
    fired = []
    sim.dispatcher = lambda ev: fired.append((sim.now, ev.kind))
    sim.schedule("n1", "TICK", delay=10)
    sim.run_until(100)
    assert fired == [(10, "TICK")]


def test_zero_delay_fires_after_earlier_sequenced_same_time_events():
    sim = Simulator()
    sim.add_node("n1", "fog")
    order = []

    def dispatch(ev):
        order.append(ev.kind)
        if ev.kind == "first":
            sim.schedule("n1", "child", delay=0)

    sim.dispatcher = dispatch
    sim.schedule("n1", "first", delay=5)
    sim.schedule("n1", "second", delay=5)
    sim.run_until(50)
    assert order == ["first", "second", "child"]


def test_equal_fire_time_executes_in_scheduling_order():
    # Oracle: sort the scheduled set by (time, sequence), compare to the trace.
    sim = Simulator()
    sim.add_node("n1", "fog")
    scheduled = []
    for i, delay in enumerate([30, 10, 30, 10, 30, 0]):
        ev = sim.schedule("n1", f"k{i}", delay=delay)
        scheduled.append((ev.fire_time, ev.seq, f"k{i}"))
    trace = sim.run_until(100)
    expected = [k for _, _, k in sorted(scheduled)]
    assert [r.kind for r in trace] == expected


def test_schedule_rejects_negative_delay():
    sim = Simulator()
    sim.add_node("n1", "fog")
    with pytest.raises(ValueError):
        sim.schedule("n1", "TICK", delay=-1)


def test_schedule_rejected_after_finish():
    sim = Simulator()
    sim.add_node("n1", "fog")
    sim.run_until(10)
    sim.finish()
    with pytest.raises(RuntimeError):
        sim.schedule("n1", "TICK", delay=1)


def test_cancel_suppresses_event():
    sim = Simulator()
    sim.add_node("n1", "fog")
    fired = []
    sim.dispatcher = lambda ev: fired.append(ev.kind)
    keep = sim.schedule("n1", "keep", delay=5)
    drop = sim.schedule("n1", "drop", delay=5)
    sim.cancel(drop)
    sim.run_until(10)
    assert fired == ["keep"]
    assert not keep.cancelled


def test_send_latency_addition():
    sim = two_node_sim(latency=20)
    got = []
    sim.dispatcher = lambda ev: got.append((sim.now, ev.kind, ev.payload))
    sim.run_until(100)
    assert sim.send("a", "b", b"hi") == "accepted"
    sim.run_until(200)
    assert got[-1] == (120, "receive", ("a", b"hi"))


def test_send_while_link_down_is_no_link():
    sim = two_node_sim(up=((50, 60),))
    sim.run_until(10)
    before = len(sim.trace_records)
    assert sim.send("a", "b", b"x") == "no-link"
    sim.run_until(1000)
    kinds = [r.kind for r in sim.trace_records[before:]]
    assert "receive" not in kinds


def test_in_flight_delivery_survives_link_down():
    # Accepted at t=95, link drops at 100, latency 20: still delivered at 115.
    sim = two_node_sim(latency=20, up=((0, 100),))
    sim.run_until(95)
    assert sim.send("a", "b", b"x") == "accepted"
    trace = sim.run_until(500)
    receives = [r for r in trace if r.kind == "receive"]
    assert len(receives) == 1 and receives[0].time == 115


def test_send_conservation():
    # Every accepted send produces exactly one receive; every no-link send none.
    sim = two_node_sim(latency=5, up=((0, 100), (200, 300)))
    sim.run_until(10)
    outcomes = []
    for t in (10, 50, 150, 250):
        sim.run_until(t)
        outcomes.append(sim.send("a", "b", t))
    sim.run_until(1000)
    accepted = outcomes.count("accepted")
    receives = [r for r in sim.trace_records if r.kind == "receive"]
    assert accepted == 3 and len(receives) == accepted


def test_send_unknown_node():
    sim = two_node_sim()
    with pytest.raises(UnknownNodeError):
        sim.send("a", "ghost", b"x")


def test_link_state_half_open_interval():
    sim = two_node_sim(up=((0, 100),))
    assert sim.link_state("a", "b", 50)
    assert not sim.link_state("a", "b", 100)
    assert sim.link_state("a", "b", 0)


def test_link_state_undeclared_pair_is_down():
    sim = Simulator()
    sim.add_node("a", "fog")
    sim.add_node("b", "fog")
    assert not sim.link_state("a", "b", 0)


def test_run_until_empty_queue_advances_clock():
    sim = Simulator()
    sim.add_node("n1", "fog")
    trace = sim.run_until(1000)
    assert trace == [] and sim.now == 1000


def test_run_until_excludes_events_at_boundary():
    sim = Simulator()
    sim.add_node("n1", "fog")
    sim.schedule("n1", "at_5", delay=5)
    assert [r.kind for r in sim.run_until(5)] == []
    assert [r.kind for r in sim.run_until(6)] == ["at_5"]


def test_clock_monotonic_across_trace():
    sim = two_node_sim(latency=3)
    for d in (40, 10, 25, 10, 0):
        sim.schedule("a", "t", delay=d)
    sim.run_until(50)
    times = [r.time for r in sim.trace_records]
    assert times == sorted(times)
    seqs = [r.seq for r in sim.trace_records]
    assert seqs == sorted(set(seqs))


def test_identical_runs_identical_traces():
    def run():
        sim = two_node_sim(latency=7, up=((0, 30), (60, 90)))
        sim.schedule("a", "beat", delay=0)

        def dispatch(ev):
            if ev.kind == "beat" and sim.now < 80:
                sim.send("a", "b", sim.rng.next_u64())
                sim.schedule("a", "beat", delay=10)

        sim.dispatcher = dispatch
        sim.run_until(200)
        return [(r.time, r.seq, r.node, r.kind, tuple(sorted(r.fields.items()))) for r in sim.trace_records]

    assert run() == run()
