"""Randomized equivalence between the incremental executor and a full re-scan."""

import random

from fogsense.cql import Comparison, QueryAst, QueryInstance, Sample, parse, format_query

from oracles import brute_force_emissions, emissions_close

FIELDS = ["x", "y", "tag"]
OPS = ["=", "!=", "<", "<=", ">", ">="]


def random_ast(rng):
    agg = rng.choice(["COUNT", "SUM", "AVG", "MIN", "MAX", "LAST"])
    field = rng.choice(["x", "y"])
    where = []
    for _ in range(rng.randrange(3)):
        literal = rng.choice([rng.randrange(-5, 15), round(rng.uniform(-5, 15), 3), "red", "blue"])
        where.append(Comparison(rng.choice(FIELDS), rng.choice(OPS), literal))
    kind = rng.choice(["TIME", "COUNT"])
    size = rng.randrange(1, 40) if kind == "COUNT" else rng.randrange(1, 400)
    every = rng.randrange(1, 50) if kind == "COUNT" else rng.randrange(1, 500)
    return QueryAst(agg, field, "s", tuple(where), kind, size, every)


def random_stream(rng, max_len):
    samples = []
    t = 0
    for _ in range(rng.randrange(max_len)):
        t += rng.randrange(0, 25)
        fields = {}
        for name in FIELDS:
            if rng.random() < 0.85:
                if name == "tag":
                    fields[name] = rng.choice(["red", "blue", "green"])
                elif rng.random() < 0.5:
                    fields[name] = rng.randrange(-10, 20)
                else:
                    fields[name] = round(rng.uniform(-10, 20), 3)
        samples.append(Sample("s", t, fields))
    return samples


def incremental_emissions(ast, samples, horizon):
    """Drive the instance the way a correct host does: samples in time order,
    TIME-window extractions interleaved at every emission instant."""
    inst = QueryInstance(ast)
    out = []
    if ast.window_kind == "COUNT":
        for sample in samples:
            outcome = inst.admit(sample)
            if outcome.emission is not None:
                out.append((outcome.emission.time, outcome.emission.value))
    else:
        due = ast.every
        for sample in samples:
            while due <= horizon and due < sample.time:
                emission = inst.emit_at(due)
                if emission is not None:
                    out.append((emission.time, emission.value))
                due += ast.every
            inst.admit(sample)
        while due <= horizon:
            emission = inst.emit_at(due)
            if emission is not None:
                out.append((emission.time, emission.value))
            due += ast.every
    return out


def run_equivalence_trials(n_pairs, seed=20240601, max_len=400):
    rng = random.Random(seed)
    for trial in range(n_pairs):
        ast = random_ast(rng)
        samples = random_stream(rng, max_len)
        horizon = (samples[-1].time if samples else 0) + ast.every * 2
        got = incremental_emissions(ast, samples, horizon)
        want = brute_force_emissions(ast, samples, horizon=horizon)
        assert emissions_close(got, want), (
            f"trial {trial}: {format_query(ast)}\n got {got[:10]}\nwant {want[:10]}"
        )
    return n_pairs


def test_incremental_matches_brute_force_500():
    run_equivalence_trials(500)


def test_long_stream_equivalence():
    # A few streams near the upper size bound.
    rng = random.Random(7)
    for _ in range(5):
        ast = random_ast(rng)
        samples = random_stream(rng, 10_000)
        horizon = (samples[-1].time if samples else 0) + ast.every
        got = incremental_emissions(ast, samples, horizon)
        want = brute_force_emissions(ast, samples, horizon=horizon)
        assert emissions_close(got, want)


def test_window_extent_exact_for_time_windows():
    ast = parse("SELECT COUNT(x) FROM s WINDOW TIME 50 EVERY 30")
    rng = random.Random(3)
    samples = random_stream(rng, 300)
    horizon = (samples[-1].time if samples else 0) + 60
    got = incremental_emissions(ast, samples, horizon)
    want = brute_force_emissions(ast, samples, horizon=horizon)
    assert got == want
