"""The event record consumed by every miner."""
from typing import NamedTuple

from .errors import MalformedEvent


class Event(NamedTuple):
    case_id: str
    activity: str
    timestamp: int  # milliseconds since the epoch, UTC


def check_event(event: Event) -> None:
    """Raise MalformedEvent unless ``event`` has non-empty ids and a sane timestamp."""
    if not event.case_id:
        raise MalformedEvent("empty case id")
    if not event.activity:
        raise MalformedEvent("empty activity")
    ts = event.timestamp
    if not isinstance(ts, int) or ts < 0:
        raise MalformedEvent(f"bad timestamp {ts!r}")
