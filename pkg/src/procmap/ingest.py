"""Event sources: CSV logs, line-delimited stdin/TCP streams, synthetic logs.

Every record is one line ``case_id,activity,timestamp``::

    line      = field "," field "," field [CR] LF
    field     = quoted / bare
    quoted    = DQUOTE *(any char except DQUOTE, CR, LF / DQUOTE DQUOTE) DQUOTE
    bare      = *(any char except "," DQUOTE CR LF)

The timestamp field is either an integer count of milliseconds since the
epoch or an ISO-8601 date-time; date-times without a zone are read as UTC.
Case id and activity must be non-empty.  A first line whose first field is
``case_id``, ``case id``, ``caseid`` or ``case`` (any case) is treated
as a header.
"""
from __future__ import annotations

import bisect
import calendar
import enum
import io
import logging
import random
import re
import socket
import sys
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Optional

from .errors import ParseError
from .events import Event
from .graph import Snapshot

log = logging.getLogger(__name__)

_FIELD = re.compile(r'"((?:[^"\r\n]|"")*)"|([^,"\r\n]*)')
_HEADER_NAMES = {"case_id", "case id", "case", "caseid"}


class Order(enum.Enum):
    AS_IS = "as-is"
    BY_TIMESTAMP = "by-timestamp"


def split_fields(line: str, lineno: Optional[int] = None) -> List[str]:
    """Split one record into its fields, enforcing the grammar above."""
    if line.endswith("\n"):
        line = line[:-1]
        if line.endswith("\r"):
            line = line[:-1]
    fields = []
    pos = 0
    n = len(line)
    while True:
        m = _FIELD.match(line, pos)
        quoted, bare = m.group(1), m.group(2)
        fields.append(quoted.replace('""', '"') if quoted is not None else bare)
        pos = m.end()
        if pos == n:
            return fields
        if line[pos] != ",":
            raise ParseError(f"unexpected character {line[pos]!r}", lineno, len(fields))
        pos += 1


def parse_timestamp(text: str) -> int:
    """Milliseconds since the epoch for an integer or ISO-8601 timestamp."""
    text = text.strip()
    if text.isdigit():
        return int(text)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    ms = calendar.timegm(dt.timetuple()) * 1000 + dt.microsecond // 1000
    if ms < 0:
        raise ValueError("timestamp before the epoch")
    return ms


def parse_event(line: str, lineno: Optional[int] = None) -> Event:
    fields = split_fields(line, lineno)
    if len(fields) != 3:
        # the column is the first missing or first surplus field
        column = len(fields) + 1 if len(fields) < 3 else 4
        raise ParseError(f"expected 3 fields, got {len(fields)}", lineno, column)
    case_id, activity, ts = fields
    if not case_id:
        raise ParseError("empty case id", lineno, 1)
    if not activity:
        raise ParseError("empty activity", lineno, 2)
    try:
        timestamp = parse_timestamp(ts)
    except ValueError as exc:
        raise ParseError(f"bad timestamp {ts!r} ({exc})", lineno, 3) from None
    return Event(sys.intern(case_id), sys.intern(activity), timestamp)


def _is_header(line: str) -> bool:
    try:
        first = split_fields(line)[0]
    except ParseError:
        return False
    return first.strip().lower() in _HEADER_NAMES


def read_events(lines: Iterable[str], strict: bool = True, source: str = "<stream>") -> Iterator[Event]:
    """Parse an iterable of text lines, one event per non-blank line.

    In lenient mode malformed lines are logged and skipped.
    """
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if lineno == 1 and _is_header(line):
            continue
        try:
            yield parse_event(line, lineno)
        except ParseError as exc:
            if strict:
                raise ParseError(f"{source}: {exc}") from None
            log.warning("%s: skipping malformed record: %s", source, exc)


def replay(path, order: Order = Order.BY_TIMESTAMP, strict: bool = True) -> Iterator[Event]:
    """Stream the events of a CSV log file.

    ``Order.BY_TIMESTAMP`` stably sorts the whole file first, so events with
    equal timestamps keep their file order.
    """
    path = Path(path)
    try:
        fh = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        events = read_events(fh, strict=strict, source=str(path))
        if order is Order.BY_TIMESTAMP:
            events = sorted(events, key=lambda e: e.timestamp)
            yield from events
        else:
            yield from events


def stdin_source(strict: bool = True, stream: Optional[IO[str]] = None) -> Iterator[Event]:
    return read_events(stream if stream is not None else sys.stdin, strict=strict, source="<stdin>")


def tcp_source(host: str, port: int, strict: bool = True, timeout: Optional[float] = None) -> Iterator[Event]:
    """Connect to ``host:port`` and parse newline-delimited records until EOF.

    Reads block, so a slow consumer applies backpressure through TCP.
    """
    with socket.create_connection((host, port), timeout=timeout) as sock:
        with sock.makefile("r", encoding="utf-8", newline="") as fh:
            yield from read_events(fh, strict=strict, source=f"tcp:{host}:{port}")


def _quote_field(text: str) -> str:
    if "\r" in text or "\n" in text:
        raise ValueError(f"field {text!r} contains a line break")
    if "," in text or '"' in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def write_events(events: Iterable[Event], out) -> int:
    """Write events as CSV records (epoch-millisecond timestamps); returns the count."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            return write_events(events, fh)
    n = 0
    for e in events:
        out.write(f"{_quote_field(e.case_id)},{_quote_field(e.activity)},{e.timestamp}\n")
        n += 1
    return n


def format_events(events: Iterable[Event]) -> str:
    buf = io.StringIO()
    write_events(events, buf)
    return buf.getvalue()


# -- synthetic logs ---------------------------------------------------------

START = 0


@dataclass
class SyntheticModel:
    """Random-walk process model.

    ``weights`` is an (N+2)x(N+2) matrix: row/column 0 is the virtual start,
    N+1 the virtual end, and 1..N the activities in ``activities`` order.
    ``interleaving`` caps how many cases run concurrently.
    """

    activities: List[str]
    weights: List[List[float]]
    interleaving: int = 1
    seed: int = 0

    def __post_init__(self):
        n = len(self.activities)
        if n < 1:
            raise ValueError("need at least one activity")
        if len(set(self.activities)) != n:
            raise ValueError("activity names must be distinct")
        if len(self.weights) != n + 2 or any(len(row) != n + 2 for row in self.weights):
            raise ValueError(f"weights must be {n + 2}x{n + 2}")
        if self.interleaving < 1:
            raise ValueError("interleaving must be >= 1")
        for i, row in enumerate(self.weights[: n + 1]):
            if any(w < 0 for w in row) or sum(row) <= 0:
                raise ValueError(f"row {i} is not normalizable")
            if row[START] != 0:
                raise ValueError("the start state cannot be re-entered")
        if self.weights[START][n + 1] != 0:
            raise ValueError("empty cases are not allowed")
        # every activity must be able to reach the end, or walks may not halt
        end = n + 1
        can_end = {end}
        changed = True
        while changed:
            changed = False
            for i in range(1, n + 1):
                if i not in can_end and any(self.weights[i][j] > 0 and j in can_end for j in range(1, n + 2)):
                    can_end.add(i)
                    changed = True
        stuck = [self.activities[i - 1] for i in range(1, n + 1) if i not in can_end]
        if stuck:
            raise ValueError(f"activities cannot reach the end: {stuck[:5]}")

    @property
    def n_activities(self) -> int:
        return len(self.activities)

    @property
    def end_activities(self) -> frozenset:
        """Activities that are always, and only ever, the last event of a case."""
        n = self.n_activities
        ends = set()
        for i in range(1, n + 1):
            row = self.weights[i]
            if row[n + 1] > 0 and all(w == 0 for w in row[1 : n + 1]):
                ends.add(self.activities[i - 1])
        return frozenset(ends)

    @classmethod
    def zipf(
        cls,
        n_activities: int,
        interleaving: int = 10,
        seed: int = 0,
        exponent: float = 1.2,
        out_degree: int = 8,
        n_end: Optional[int] = None,
        end_weight: float = 0.08,
    ) -> "SyntheticModel":
        """Sparse model whose activity popularity follows a Zipf-like law.

        Each non-end activity links to ``out_degree`` successors weighted by
        ``1/rank**exponent`` and to one end activity with relative weight
        ``end_weight``.  End activities lead only to the virtual end.
        """
        rng = random.Random(seed)
        n = n_activities
        if n_end is None:
            n_end = max(1, n // 10)
        if n == 1:
            n_end = 1
        if not 1 <= n_end <= n:
            raise ValueError("n_end must be in [1, n_activities]")
        width = len(str(n))
        names = [f"act{i:0{width}d}" for i in range(n)]
        rank = list(range(1, n + 1))
        rng.shuffle(rank)
        popularity = [1.0 / r ** exponent for r in rank]
        ends = set(rng.sample(range(n), n_end))
        middles = [i for i in range(n) if i not in ends] or sorted(ends)
        weights = [[0.0] * (n + 2) for _ in range(n + 2)]
        for j in middles:
            weights[START][j + 1] = popularity[j]
        for i in range(n):
            row = weights[i + 1]
            if i in ends:
                row[n + 1] = 1.0
                continue
            succ = rng.sample(range(n), min(out_degree, n))
            for j in succ:
                row[j + 1] = popularity[j]
            row[rng.choice(sorted(ends)) + 1] += sum(row) * end_weight or 1.0
        return cls(names, weights, interleaving=interleaving, seed=seed)


@dataclass
class GeneratedLog:
    events: List[Event]
    dfg: Snapshot  # exact directly-follows graph of the generated walks
    model: SyntheticModel


BASE_TIMESTAMP = 1_500_000_000_000


def generate(model: SyntheticModel, n_events: int) -> GeneratedLog:
    """Emit ``n_events`` events from interleaved random walks of ``model``.

    Each step picks one of ``model.interleaving`` case slots uniformly; an
    empty slot starts a new case.  Timestamps advance by one second per
    event.  The exact directly-follows graph is counted on the side.
    """
    n = model.n_activities
    end = n + 1
    rng = random.Random(model.seed)
    cum = []
    for row in model.weights[: n + 1]:
        acc, c = 0.0, []
        for w in row:
            acc += w
            c.append(acc)
        cum.append(c)
    names = [None] + [sys.intern(a) for a in model.activities]
    slots = [None] * model.interleaving  # each: [case_id, state index]
    case_no = 0
    width = max(6, len(str(n_events)))
    node_freq: Counter = Counter()
    arc_freq: Counter = Counter()
    starts: Counter = Counter()
    ends: Counter = Counter()
    events: List[Event] = []
    rand, randrange = rng.random, rng.randrange
    ts = BASE_TIMESTAMP
    while len(events) < n_events:
        k = randrange(model.interleaving) if model.interleaving > 1 else 0
        slot = slots[k]
        if slot is None:
            case_no += 1
            slot = slots[k] = [sys.intern(f"c{case_no:0{width}d}"), START]
        state = slot[1]
        c = cum[state]
        nxt = bisect.bisect_right(c, rand() * c[-1])
        if nxt == end:
            ends[names[state]] += 1
            slots[k] = None
            continue
        act = names[nxt]
        if state == START:
            starts[act] += 1
        else:
            arc_freq[(names[state], act)] += 1
        node_freq[act] += 1
        slot[1] = nxt
        events.append(Event(slot[0], act, ts))
        ts += 1000
    dfg = Snapshot(nodes=dict(node_freq), arcs=dict(arc_freq), idx=len(events),
                   starts=dict(starts), ends=dict(ends))
    return GeneratedLog(events, dfg, model)
