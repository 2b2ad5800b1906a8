"""Hereditary stratigraphic columns.

A column is a heritable annotation. Every generation it receives a fresh
random differentia (fingerprint) stamped with the new depth, and a retention
policy decides which older differentia survive. Deposit times are never
stored: they are recovered from the policy's enumeration of retained points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .policies import PolicySpec, enumerate_retained, parse_policy

WIDTHS = (1, 8, 16, 32, 64)


@dataclass(frozen=True)
class MrcaBounds:
    """Closed generation window ``[lower, upper]`` holding the last common ancestor."""

    lower: int
    upper: int
    collision_confidence: float

    @property
    def width(self) -> int:
        return self.upper - self.lower

    def __contains__(self, generation: int) -> bool:
        return self.lower <= generation <= self.upper


class StratColumn:
    """Differentia record of one lineage under a retention policy.

    A freshly built column holds its founding stratum at time point 0. Pass
    ``deposit=False`` for an empty column whose first deposit lands at 0.
    """

    def __init__(
        self,
        policy: PolicySpec,
        width: int = 64,
        seed: int | np.random.SeedSequence | None = 0,
        id: str | None = None,
        *,
        deposit: bool = True,
    ):
        if width not in WIDTHS:
            raise ValueError(f"width must be one of {WIDTHS}, got {width}")
        self.policy = policy
        self.width = width
        self.id = id
        self.depth: int | None = None
        self.differentia = np.empty(0, dtype=np.uint64)
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        self._seq = seed
        self._rng = np.random.default_rng(seed)
        if deposit:
            self.deposit()

    def __len__(self) -> int:
        return len(self.differentia)

    def __repr__(self) -> str:
        return (
            f"StratColumn(id={self.id!r}, policy={self.policy}, width={self.width}, "
            f"depth={self.depth}, strata={len(self)})"
        )

    def times(self) -> np.ndarray:
        if self.depth is None:
            return np.empty(0, dtype=np.int64)
        return enumerate_retained(self.policy, self.depth)

    def strata(self) -> Iterator[tuple[int, int]]:
        """``(time, differentia)`` pairs, oldest first."""
        return zip(self.times().tolist(), self.differentia.tolist())

    def _draw(self) -> np.uint64:
        if self.width == 64:
            return self._rng.integers(0, 2**64, dtype=np.uint64)
        return self._rng.integers(0, 1 << self.width, dtype=np.uint64)

    def deposit(self) -> None:
        """Append one stratum and discard whatever the policy drops."""
        if self.depth is None:
            self.depth = 0
            self.differentia = np.array([self._draw()], dtype=np.uint64)
            return
        prev = self.times()
        self.depth += 1
        cur = enumerate_retained(self.policy, self.depth)
        diffs = np.append(self.differentia, self._draw())
        if len(cur) != len(diffs):
            keep = np.isin(np.append(prev, self.depth), cur, assume_unique=True)
            diffs = diffs[keep]
        self.differentia = diffs

    def clone(self, id: str | None = None) -> "StratColumn":
        """Copy with an independently forked generator and no new deposit."""
        child = StratColumn.__new__(StratColumn)
        child.policy = self.policy
        child.width = self.width
        child.id = id
        child.depth = self.depth
        child.differentia = self.differentia.copy()
        child._seq = self._seq.spawn(1)[0]
        child._rng = np.random.default_rng(child._seq)
        return child

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "policy": str(self.policy),
            "width": self.width,
            "depth": self.depth,
            "differentia": [int(d) for d in self.differentia],
        }

    @classmethod
    def from_dict(cls, record: dict) -> "StratColumn":
        col = cls(parse_policy(record["policy"]), record["width"], id=record.get("id"), deposit=False)
        col.depth = record["depth"]
        col.differentia = np.array(record["differentia"], dtype=np.uint64)
        if col.depth is not None and len(col.differentia) != len(col.times()):
            raise ValueError(
                f"column {col.id!r}: {len(col.differentia)} differentia but policy "
                f"{col.policy} retains {len(col.times())} at depth {col.depth}"
            )
        return col


def inherit(parent: StratColumn, id: str | None = None, deposit: bool = True) -> StratColumn:
    """Offspring column: a copy of ``parent`` followed by one deposit."""
    child = parent.clone(id)
    if deposit:
        child.deposit()
    return child


def _check_compatible(a: StratColumn, b: StratColumn) -> None:
    if a.policy != b.policy:
        raise ValueError(f"policy mismatch: {a.policy} vs {b.policy}")
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    if a.depth is None or b.depth is None:
        raise ValueError("cannot compare an empty column")


def first_mismatch(matches: np.ndarray) -> np.ndarray:
    """Index of the first ``False`` along the last axis (its length if none)."""
    matches = np.asarray(matches, dtype=bool)
    size = matches.shape[-1]
    return np.where(matches.all(axis=-1), size, np.argmin(matches, axis=-1))


def _bounds(common: np.ndarray, matches: np.ndarray, width: int, depth: int) -> MrcaBounds | None:
    k = int(first_mismatch(matches))
    if k == 0:
        return None
    upper = depth if k == len(common) else int(common[k]) - 1
    return MrcaBounds(int(common[k - 1]), upper, 1.0 - 2.0 ** (-width * k))


def mrca_bounds(a: StratColumn, b: StratColumn) -> MrcaBounds | None:
    """Window bounding the generation of the last common ancestor of two columns.

    The deeper column is truncated to the shallower depth and differentia are
    compared over the shared time points. ``lower`` is the last match before the
    first mismatch and ``upper`` is one before that mismatch (or the shallower
    depth when everything matches). Returns ``None`` when even the oldest shared
    stratum differs, i.e. no common ancestry.
    """
    _check_compatible(a, b)
    depth = min(a.depth, b.depth)
    ta, tb = a.times(), b.times()
    sel_a, sel_b = ta <= depth, tb <= depth
    common, ia, ib = np.intersect1d(
        ta[sel_a], tb[sel_b], assume_unique=True, return_indices=True
    )
    matches = a.differentia[sel_a][ia] == b.differentia[sel_b][ib]
    return _bounds(common, matches, a.width, depth)


def expected_spurious_matches(width: int) -> Fraction:
    """Expected run of chance matches directly after a true divergence.

    Each post-divergence stratum matches by chance with probability
    ``2**-width``, so the run length has mean ``sum(2**(-width*k)) = 1/(2**width - 1)``.
    """
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    return Fraction(1, 2**width - 1)


def read_population(lines: Iterable[str]) -> list[StratColumn]:
    columns = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            columns.append(StratColumn.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
            raise ValueError(f"line {lineno}: malformed column ({err})") from None
    return columns


def write_population(columns: Iterable[StratColumn]) -> Iterator[str]:
    for col in columns:
        yield json.dumps(col.to_dict(), sort_keys=True)
