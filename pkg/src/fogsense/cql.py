"""Mini continuous-query dialect over sensor sample streams.

Grammar (keywords case-insensitive, whitespace-insensitive)::

    SELECT <agg>(<field>) FROM <stream>
        [WHERE <field> <op> <literal> {AND <field> <op> <literal>}]
        WINDOW (TIME <n> | COUNT <n>) [EVERY <n>]

with ``agg`` one of COUNT, SUM, AVG, MIN, MAX, LAST and ``op`` one of
``= != < <= > >=``. Literals are numbers or quoted strings (no escapes).
``EVERY`` defaults to the window size (tumbling); smaller values slide,
larger values sample. TIME windows hold samples with time in
``(emit_time - n, emit_time]`` and emit every ``n`` milliseconds after
install; COUNT windows hold the last ``n`` admitted samples and emit on
every ``every``-th admission.

A sample is admitted when every WHERE conjunct holds, the selected field is
present, and its value is numeric for SUM/AVG/MIN/MAX. A predicate whose
field is missing or of a mismatched type marks the sample as a type error
(skipped, reported to the caller for tracing). On an empty window COUNT
emits 0 and every other aggregate emits nothing.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Optional

AGGREGATES = ("COUNT", "SUM", "AVG", "MIN", "MAX", "LAST")
COMPARATORS = ("=", "!=", "<", "<=", ">", ">=")

NUMERIC_AGCS = ("SUM", "AVG", "MIN", "MAX")


class CqlError(ValueError):
    pass


class ParseError(CqlError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()) -> None:
        detail = f"{message} at position {position}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class SemanticError(CqlError):
    pass


@dataclass(frozen=True)
class Comparison:
    field: str
    op: str
    value: Any  # number or string literal


@dataclass(frozen=True)
class QueryAst:
    aggregate: str
    field: str
    stream: str
    where: tuple[Comparison, ...]
    window_kind: str  # "TIME" or "COUNT"
    window_size: int
    every: int


@dataclass
class Sample:
    stream: str
    time: int
    fields: dict[str, Any]


@dataclass(frozen=True)
class Emission:
    time: int
    value: Any


# -- lexer --------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'[^']*'|"[^"]*")
  | (?P<op><=|>=|!=|[=<>()])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"SELECT", "FROM", "WHERE", "AND", "WINDOW", "TIME", "COUNT", "EVERY"} | set(AGGREGATES)


@dataclass(frozen=True)
class _Token:
    kind: str  # keyword text, "ident", "number", "string", an operator, or "eof"
    text: str
    value: Any
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "number":
            raw = m.group()
            value = float(raw) if "." in raw else int(raw)
            tokens.append(_Token("number", raw, value, pos))
        elif m.lastgroup == "ident":
            upper = m.group().upper()
            if upper in _KEYWORDS:
                tokens.append(_Token(upper, m.group(), None, pos))
            else:
                tokens.append(_Token("ident", m.group(), m.group(), pos))
        elif m.lastgroup == "string":
            tokens.append(_Token("string", m.group(), m.group()[1:-1], pos))
        elif m.lastgroup == "op":
            tokens.append(_Token(m.group(), m.group(), None, pos))
        pos = m.end()
    tokens.append(_Token("eof", "", None, len(text)))
    return tokens


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def expect(self, *kinds: str) -> _Token:
        token = self.current
        if token.kind not in kinds:
            raise ParseError(f"unexpected token {token.text or 'end of input'!r}", token.pos, kinds)
        self.index += 1
        return token

    def parse(self) -> QueryAst:
        self.expect("SELECT")
        agg = self.expect(*AGGREGATES).kind
        self.expect("(")
        # COUNT and TIME double as field names outside keyword position.
        field_tok = self.expect("ident", *(_KEYWORDS))
        self.expect(")")
        self.expect("FROM")
        stream = self.expect("ident").value
        where: list[Comparison] = []
        if self.current.kind == "WHERE":
            self.index += 1
            where.append(self._comparison())
            while self.current.kind == "AND":
                self.index += 1
                where.append(self._comparison())
        self.expect("WINDOW")
        kind_tok = self.expect("TIME", "COUNT")
        size_tok = self.expect("number")
        every = None
        if self.current.kind == "EVERY":
            self.index += 1
            every = self.expect("number")
        self.expect("eof")
        ast = QueryAst(
            aggregate=agg,
            field=field_tok.text,
            stream=stream,
            where=tuple(where),
            window_kind=kind_tok.kind,
            window_size=_positive_int(size_tok),
            every=_positive_int(every) if every is not None else _positive_int(size_tok),
        )
        validate_ast(ast)
        return ast

    def _comparison(self) -> Comparison:
        name = self.expect("ident").value
        op = self.expect(*COMPARATORS).kind
        literal = self.expect("number", "string")
        return Comparison(name, op, literal.value)


def _positive_int(token: _Token) -> int:
    if not isinstance(token.value, int) or token.value <= 0:
        raise SemanticError(f"window/emission size must be a positive integer, got {token.text}")
    return token.value


def parse(text: str) -> QueryAst:
    return _Parser(text).parse()


def validate_ast(ast: QueryAst) -> None:
    if ast.aggregate not in AGGREGATES:
        raise SemanticError(f"unknown aggregate {ast.aggregate!r}")
    if ast.window_kind not in ("TIME", "COUNT"):
        raise SemanticError(f"unknown window kind {ast.window_kind!r}")
    if not isinstance(ast.window_size, int) or ast.window_size <= 0:
        raise SemanticError("window size must be a positive integer")
    if not isinstance(ast.every, int) or ast.every <= 0:
        raise SemanticError("EVERY must be a positive integer")
    if not ast.field or not ast.stream:
        raise SemanticError("field and stream names must be non-empty")
    for cmp in ast.where:
        if cmp.op not in COMPARATORS:
            raise SemanticError(f"unknown comparator {cmp.op!r}")


def format_query(ast: QueryAst) -> str:
    """Canonical pretty-printing; parse(format_query(a)) == a."""
    parts = [f"SELECT {ast.aggregate}({ast.field}) FROM {ast.stream}"]
    if ast.where:
        conjuncts = " AND ".join(f"{c.field} {c.op} {_literal(c.value)}" for c in ast.where)
        parts.append(f"WHERE {conjuncts}")
    parts.append(f"WINDOW {ast.window_kind} {ast.window_size} EVERY {ast.every}")
    return " ".join(parts)


def _literal(value: Any) -> str:
    if isinstance(value, str):
        return f"'{value}'"
    return repr(value)


# -- admission and aggregation ------------------------------------------------


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _compare(op: str, left: Any, right: Any) -> Optional[bool]:
    """None signals a type mismatch (missing field or unlike types)."""
    if _is_number(left) != _is_number(right) or isinstance(left, str) != isinstance(right, str):
        return None
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def classify_sample(ast: QueryAst, sample: Sample) -> str:
    """One of "admitted", "filtered", "type_error" per the admission rule."""
    for cmp in ast.where:
        if cmp.field not in sample.fields:
            return "type_error"
        verdict = _compare(cmp.op, sample.fields[cmp.field], cmp.value)
        if verdict is None:
            return "type_error"
        if not verdict:
            return "filtered"
    if ast.field not in sample.fields:
        return "type_error"
    if ast.aggregate in NUMERIC_AGCS and not _is_number(sample.fields[ast.field]):
        return "type_error"
    return "admitted"


def aggregate_window(ast: QueryAst, values: list[Any]) -> Optional[Any]:
    if ast.aggregate == "COUNT":
        return len(values)
    if not values:
        return None
    if ast.aggregate == "SUM":
        return sum(values)
    if ast.aggregate == "AVG":
        return sum(values) / len(values)
    if ast.aggregate == "MIN":
        return min(values)
    if ast.aggregate == "MAX":
        return max(values)
    return values[-1]  # LAST


# -- incremental executor -------------------------------------------------------


@dataclass
class AdmitOutcome:
    status: str  # "admitted" | "filtered" | "type_error"
    emission: Optional[Emission] = None


class QueryInstance:
    """Incremental window state for one installed query."""

    def __init__(self, ast: QueryAst) -> None:
        validate_ast(ast)
        self.ast = ast
        self._count_buffer: deque = deque(maxlen=ast.window_size)
        self._time_buffer: list[tuple[int, Any]] = []
        self._admitted = 0

    def admit(self, sample: Sample) -> AdmitOutcome:
        if sample.stream != self.ast.stream:
            return AdmitOutcome("filtered")
        status = classify_sample(self.ast, sample)
        if status != "admitted":
            return AdmitOutcome(status)
        value = sample.fields[self.ast.field]
        self._admitted += 1
        if self.ast.window_kind == "COUNT":
            self._count_buffer.append(value)
            if self._admitted % self.ast.every == 0:
                result = aggregate_window(self.ast, list(self._count_buffer))
                return AdmitOutcome(status, Emission(sample.time, result))
        else:
            self._time_buffer.append((sample.time, value))
        return AdmitOutcome(status)

    def emit_at(self, t: int) -> Optional[Emission]:
        """TIME-window extraction at emission instant t (extent (t-n, t])."""
        if self.ast.window_kind != "TIME":
            return None
        horizon = t - self.ast.window_size
        self._time_buffer = [(ts, v) for ts, v in self._time_buffer if ts > horizon]
        values = [v for ts, v in self._time_buffer if ts <= t]
        result = aggregate_window(self.ast, values)
        if result is None:
            return None
        return Emission(t, result)


class StreamExecutor:
    """Holds independent query instances and routes samples to them."""

    def __init__(self) -> None:
        self._instances: dict[int, tuple[QueryInstance, Callable[[Emission], None]]] = {}
        self._next_id = 0

    def install(self, ast: QueryAst, emit: Callable[[Emission], None]) -> int:
        instance = QueryInstance(ast)  # validates the AST
        self._next_id += 1
        self._instances[self._next_id] = (instance, emit)
        return self._next_id

    def uninstall(self, instance_id: int) -> None:
        self._instances.pop(instance_id, None)

    def instance(self, instance_id: int) -> QueryInstance:
        return self._instances[instance_id][0]

    def on_sample(self, instance_id: int, sample: Sample) -> AdmitOutcome:
        instance, emit = self._instances[instance_id]
        outcome = instance.admit(sample)
        if outcome.emission is not None:
            emit(outcome.emission)
        return outcome

    def tick(self, instance_id: int, t: int) -> Optional[Emission]:
        instance, emit = self._instances[instance_id]
        emission = instance.emit_at(t)
        if emission is not None:
            emit(emission)
        return emission
