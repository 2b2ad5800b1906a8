"""Rolling stream curation over an unbounded sequence of observations."""

from __future__ import annotations

import json
from typing import Any, Iterable, Iterator, NamedTuple

import numpy as np

from .policies import PolicySpec, drops_at, enumerate_retained


class Observation(NamedTuple):
    time: int
    payload: Any


class StreamCurator:
    """Keeps the observations a retention policy says to keep.

    Observations are stamped with their ingestion index. After every ingest
    the buffer holds exactly the points ``enumerate_retained(policy, depth)``,
    in time order.

    >>> from strata.policies import DepthProportional
    >>> cur = StreamCurator(DepthProportional(2))
    >>> for i in range(9):
    ...     _ = cur.ingest(i)
    >>> [obs.time for obs in cur]
    [0, 4, 8]
    """

    def __init__(self, policy: PolicySpec):
        self.policy = policy
        self.depth: int | None = None
        self._buffer: list[Observation] = []

    def __len__(self) -> int:
        return len(self._buffer)

    def __iter__(self) -> Iterator[Observation]:
        return iter(self._buffer)

    def __getitem__(self, i: int) -> Observation:
        return self._buffer[i]

    @property
    def empty(self) -> bool:
        return self.depth is None

    def ingest(self, payload: Any) -> list[Observation]:
        """Append ``payload`` at the next time point; return what got dropped."""
        if self.depth is None:
            self.depth = 0
            self._buffer.append(Observation(0, payload))
            return []
        self.depth += 1
        self._buffer.append(Observation(self.depth, payload))
        doomed = drops_at(self.policy, self.depth)
        if not len(doomed):
            return []
        doomed = set(doomed.tolist())
        kept, dropped = [], []
        for obs in self._buffer:
            (dropped if obs.time in doomed else kept).append(obs)
        self._buffer = kept
        return dropped

    def extend(self, payloads: Iterable[Any]) -> None:
        for payload in payloads:
            self.ingest(payload)

    def times(self) -> np.ndarray:
        """Retained time points, derived from the policy rather than storage."""
        if self.depth is None:
            return np.empty(0, dtype=np.int64)
        return enumerate_retained(self.policy, self.depth)

    def time_of_index(self, i: int) -> int:
        """Deposit time of the ``i``-th buffered observation."""
        times = self.times()
        if not 0 <= i < len(times):
            raise IndexError(f"index {i} out of range for {len(times)} retained observations")
        return int(times[i])


def read_observations(lines: Iterable[str]) -> Iterator[str]:
    """Yield ``payload`` fields from JSONL lines, skipping blank lines.

    Raises ``ValueError`` naming the 1-based line number of a malformed line.
    """
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            payload = record["payload"]
        except (json.JSONDecodeError, TypeError, KeyError) as err:
            raise ValueError(f"line {lineno}: malformed observation ({err})") from None
        if not isinstance(payload, str):
            raise ValueError(f"line {lineno}: payload must be a string")
        yield payload


def write_observations(curator: StreamCurator) -> Iterator[str]:
    for obs in curator:
        yield json.dumps({"time": obs.time, "payload": obs.payload})
