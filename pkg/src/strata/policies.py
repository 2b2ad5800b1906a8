"""Retention policies for stream curation.

Each policy decides which time points of an append-only stream survive at a
given record depth ``n`` (the time point of the newest observation). All
policies guarantee that time point ``0`` and ``n`` are retained and that the
retained set at ``n`` can be reached from the retained set at ``n - 1`` by
appending ``n`` and deleting points (self-consistency).

Fixed resolution, depth-proportional and recency-proportional policies are
closed-form. The geometric-sequence nth-root policy and the curbed policy
built on it pass their target enumeration through a snap-down filter that
enforces self-consistency; their realized sets therefore depend on history and
are served from a per-policy checkpointed replay cache.
"""

from __future__ import annotations

import bisect
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolicySpec",
    "FixedResolution",
    "DepthProportional",
    "RecencyProportional",
    "GeomSeqNthRoot",
    "CurbedRecencyProportional",
    "parse_policy",
    "floor_pow2",
    "enumerate_target",
    "enumerate_retained",
    "drops_at",
    "crpr_active",
    "crpr_switch_depth",
    "gap_bound",
    "size_bound",
    "snap_count",
]

CRPR_MIN_M = 8
CRPR_MAX_M = 2**20


@dataclass(frozen=True)
class PolicySpec:
    """Base class for retention policy parameterizations."""

    algo = ""

    def _param(self) -> int:
        raise NotImplementedError

    def __str__(self) -> str:
        return f"{self.algo}:{self._param()}"

    @property
    def closed_form(self) -> bool:
        return True


def _check_positive(name: str, value: int) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")


@dataclass(frozen=True)
class FixedResolution(PolicySpec):
    """Retain every multiple of ``r`` plus the newest point."""

    r: int
    algo = "fixed"

    def __post_init__(self):
        _check_positive("r", self.r)

    def _param(self) -> int:
        return self.r


@dataclass(frozen=True)
class DepthProportional(PolicySpec):
    """Gap width proportional to record depth, at most ``2r + 1`` points.

    With ``tapered=True`` points phased out by a coarsening are dropped one at
    a time as new waypoints arrive instead of all at once.
    """

    r: int
    tapered: bool = False

    def __post_init__(self):
        _check_positive("r", self.r)

    @property
    def algo(self) -> str:  # type: ignore[override]
        return "dpr-tapered" if self.tapered else "dpr"

    def _param(self) -> int:
        return self.r


@dataclass(frozen=True)
class RecencyProportional(PolicySpec):
    """Gap width at recency ``k`` bounded by ``max(1, k // r)``."""

    r: int
    algo = "rpr"

    def __post_init__(self):
        _check_positive("r", self.r)

    def _param(self) -> int:
        return self.r


@dataclass(frozen=True)
class GeomSeqNthRoot(PolicySpec):
    """Constant-size record with geometric recency bands of degree ``a``."""

    a: int
    algo = "gsnr"

    def __post_init__(self):
        _check_positive("a", self.a)

    def _param(self) -> int:
        return self.a

    @property
    def closed_form(self) -> bool:
        return False


@dataclass(frozen=True)
class CurbedRecencyProportional(PolicySpec):
    """Recency-proportional resolution under a hard cap of ``m`` points."""

    m: int
    algo = "crpr"

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)):
            raise TypeError(f"m must be an integer, got {self.m!r}")
        if not CRPR_MIN_M <= self.m <= CRPR_MAX_M:
            raise ValueError(
                f"crpr requires {CRPR_MIN_M} <= m <= {CRPR_MAX_M} (m >= 8), got {self.m}"
            )

    def _param(self) -> int:
        return self.m

    @property
    def closed_form(self) -> bool:
        return False


_ALGOS = {
    "fixed": lambda k: FixedResolution(k),
    "dpr": lambda k: DepthProportional(k),
    "dpr-tapered": lambda k: DepthProportional(k, tapered=True),
    "rpr": lambda k: RecencyProportional(k),
    "gsnr": lambda k: GeomSeqNthRoot(k),
    "crpr": lambda k: CurbedRecencyProportional(k),
}
ALGO_NAMES = tuple(_ALGOS)


def parse_policy(text: str, param: int | None = None) -> PolicySpec:
    """Build a policy from ``"algo:param"`` or from ``algo`` plus ``param``.

    >>> parse_policy("dpr:2")
    DepthProportional(r=2, tapered=False)
    >>> str(parse_policy("crpr", 64))
    'crpr:64'
    """
    if param is None:
        algo, sep, raw = text.partition(":")
        if not sep:
            raise ValueError(f"policy must look like ALGO:PARAM, got {text!r}")
        try:
            param = int(raw)
        except ValueError:
            raise ValueError(f"policy parameter must be an integer, got {raw!r}") from None
    else:
        algo = text
    try:
        factory = _ALGOS[algo]
    except KeyError:
        raise ValueError(
            f"unknown policy algorithm {algo!r}; choose from {', '.join(ALGO_NAMES)}"
        ) from None
    return factory(param)


def floor_pow2(x: int) -> int:
    """Largest power of two not exceeding ``x`` (``x >= 1``)."""
    if x < 1:
        raise ValueError(f"floor_pow2 requires x >= 1, got {x}")
    return 1 << (int(x).bit_length() - 1)


# --- target enumerations ----------------------------------------------------


def _fixed(r: int, n: int) -> np.ndarray:
    times = np.arange(0, n + 1, r, dtype=np.int64)
    if n % r:
        times = np.append(times, n)
    return times


def _dpr_gap(r: int, n: int) -> int:
    return 1 if n < r else floor_pow2(n // r)


def _dpr(r: int, n: int) -> np.ndarray:
    return _fixed(_dpr_gap(r, n), n)


def _dpr_tapered(r: int, n: int) -> np.ndarray:
    g = _dpr_gap(r, n)
    base = _fixed(g, n)
    if g == 1:
        return base
    # odd multiples of the previous gap, all present when this gap phase began
    half = g // 2
    phased_out = np.arange(half, g * r, g, dtype=np.int64)
    keep = min(len(phased_out), 2 * r + 1 - len(base))
    if keep <= 0:
        return base
    return np.union1d(base, phased_out[len(phased_out) - keep :])


def _rpr_list(r: int, n: int) -> list[int]:
    out = [0]
    t = 0
    while t < n:
        w = (n - t) // r
        if w == 0:
            out.extend(range(t + 1, n + 1))
            break
        t += 1 << (w.bit_length() - 1)
        out.append(t)
    return out


def _ceil_root_pow(n: int, j: int, a: int) -> int:
    """Smallest integer ``x`` with ``x ** a >= n ** j``, i.e. ceil(n^(j/a))."""
    if j == 0 or n <= 1:
        return 1 if j == 0 else n
    if j == a:
        return n
    target = n**j
    x = max(1, int(round(math.exp(j * math.log(n) / a))))
    while x**a < target:
        x += 1
    while x > 1 and (x - 1) ** a >= target:
        x -= 1
    return x


def _gsnr_list(a: int, n: int) -> list[int]:
    if n == 0:
        return [0]
    taus = [1] + [_ceil_root_pow(n, j, a) for j in range(1, a + 1)]
    out = {0, n}
    for j in range(1, a + 1):
        lo, hi = taus[j - 1], taus[j]
        if hi <= lo:
            continue
        g = floor_pow2(max(1, (hi - lo) // 2))
        # recency in [lo, hi) <=> time in (n - hi, n - lo]
        first = max(0, n - hi + 1)
        first = -(-first // g) * g
        out.update(range(first, n - lo + 1, g))
    return sorted(out)


def crpr_switch_depth(m: int) -> int:
    """Depth at which the curbed policy hands over to the nth-root policy."""
    return (1 << (m // 3)) // 2


def crpr_active(m: int, n: int) -> PolicySpec:
    """Sub-policy the curbed policy with cap ``m`` delegates to at depth ``n``.

    Before the switch depth this is a recency-proportional policy whose
    resolution shrinks as ``ceil(log2(n + 1))`` grows; afterwards it is a
    fixed-degree nth-root policy.
    """
    if m < CRPR_MIN_M:
        raise ValueError(f"crpr requires m >= {CRPR_MIN_M}, got {m}")
    if n < crpr_switch_depth(m):
        # n.bit_length() == ceil(log2(n + 1)) for n >= 0
        return RecencyProportional(max(1, m // (n.bit_length() + 1) - 1))
    return GeomSeqNthRoot(max((m - 2) // 6, 1))


def _target_list(policy: PolicySpec, n: int) -> list[int]:
    if isinstance(policy, GeomSeqNthRoot):
        return _gsnr_list(policy.a, n)
    if isinstance(policy, CurbedRecencyProportional):
        return _target_list(crpr_active(policy.m, n), n)
    if isinstance(policy, RecencyProportional):
        return _rpr_list(policy.r, n)
    return _closed_form(policy, n).tolist()


def _closed_form(policy: PolicySpec, n: int) -> np.ndarray:
    if isinstance(policy, FixedResolution):
        return _fixed(policy.r, n)
    if isinstance(policy, DepthProportional):
        return _dpr_tapered(policy.r, n) if policy.tapered else _dpr(policy.r, n)
    if isinstance(policy, RecencyProportional):
        return np.array(_rpr_list(policy.r, n), dtype=np.int64)
    raise TypeError(f"{type(policy).__name__} has no closed-form enumeration")


def enumerate_target(policy: PolicySpec, n: int) -> np.ndarray:
    """Raw target enumeration at depth ``n``, before snap-down filtering."""
    _check_depth(n)
    return np.array(_target_list(policy, n), dtype=np.int64)


def _check_depth(n: int) -> None:
    if n < 0:
        raise ValueError(f"depth must be >= 0, got {n}")


# --- snap-down history ------------------------------------------------------


def _snap(target: list[int], prev: tuple[int, ...], n: int) -> tuple[tuple[int, ...], bool]:
    """Replace each target point by the largest available point at or below it."""
    available = set(prev)
    available.add(n)
    if all(t in available for t in target):
        return tuple(target), False
    avail = list(prev)
    avail.append(n)
    snapped = sorted({avail[bisect.bisect_right(avail, t) - 1] for t in target})
    return tuple(snapped), True


class _History:
    """Replay cache of realized retained sets for a history-dependent policy."""

    stride = 256
    recent_size = 64

    def __init__(self, policy: PolicySpec):
        self.policy = policy
        self.lock = threading.Lock()
        self.checkpoints: dict[int, tuple[int, ...]] = {0: (0,)}
        self.head_n = 0
        self.head: tuple[int, ...] = (0,)
        self.snapped_at: list[int] = []
        self.recent: OrderedDict[int, tuple[int, ...]] = OrderedDict({0: (0,)})

    def _remember(self, n: int, value: tuple[int, ...]) -> None:
        self.recent[n] = value
        self.recent.move_to_end(n)
        while len(self.recent) > self.recent_size:
            self.recent.popitem(last=False)

    def get(self, n: int) -> tuple[int, ...]:
        with self.lock:
            if n in self.recent:
                self.recent.move_to_end(n)
                return self.recent[n]
            if n >= self.head_n:
                return self._advance(n)
            return self._replay(n)

    def _advance(self, n: int) -> tuple[int, ...]:
        cur = self.head
        for k in range(self.head_n + 1, n + 1):
            cur, fired = _snap(_target_list(self.policy, k), cur, k)
            if fired:
                self.snapped_at.append(k)
            if k % self.stride == 0:
                self.checkpoints[k] = cur
            if n - k < 2:
                self._remember(k, cur)
        self.head_n, self.head = n, cur
        return cur

    def _replay(self, n: int) -> tuple[int, ...]:
        start = (n // self.stride) * self.stride
        cur = self.checkpoints[start]
        for k in range(start + 1, n + 1):
            cur, _ = _snap(_target_list(self.policy, k), cur, k)
            if n - k < 2:
                self._remember(k, cur)
        return cur


_histories: dict[PolicySpec, _History] = {}
_histories_lock = threading.Lock()


def _history(policy: PolicySpec) -> _History:
    with _histories_lock:
        hist = _histories.get(policy)
        if hist is None:
            hist = _histories[policy] = _History(policy)
        return hist


def enumerate_retained(policy: PolicySpec, n: int) -> np.ndarray:
    """Sorted time points retained at depth ``n`` under ``policy``.

    >>> enumerate_retained(RecencyProportional(2), 10).tolist()
    [0, 4, 6, 8, 9, 10]
    """
    _check_depth(n)
    if policy.closed_form:
        return _closed_form(policy, n)
    return np.array(_history(policy).get(n), dtype=np.int64)


def snap_count(policy: PolicySpec, n: int) -> int:
    """Number of depths in ``[1, n]`` at which snap-down altered the target."""
    if policy.closed_form:
        return 0
    hist = _history(policy)
    hist.get(n)
    with hist.lock:
        return bisect.bisect_right(hist.snapped_at, n)


def _drops_fixed(r: int, n: int) -> np.ndarray:
    prev = n - 1
    if prev % r and prev != 0:
        return np.array([prev], dtype=np.int64)
    return np.empty(0, dtype=np.int64)


def _drops_dpr(r: int, n: int) -> np.ndarray:
    g_prev, g = _dpr_gap(r, n - 1), _dpr_gap(r, n)
    if g == g_prev:
        return _drops_fixed(g, n)
    # coarsening: every other waypoint goes, along with the previous newest
    stale = np.arange(g_prev, n, g_prev, dtype=np.int64)
    stale = stale[stale % g != 0]
    if (n - 1) % g_prev:
        stale = np.append(stale, n - 1)
    return stale


def drops_at(policy: PolicySpec, n: int) -> np.ndarray:
    """Time points discarded when depth advances from ``n - 1`` to ``n``.

    Equal to ``(retained(n - 1) | {n}) - retained(n)``; fixed resolution and
    plain depth-proportional policies use direct formulas.
    """
    if n < 1:
        raise ValueError(f"drops_at requires n >= 1, got {n}")
    if isinstance(policy, FixedResolution):
        return _drops_fixed(policy.r, n)
    if isinstance(policy, DepthProportional) and not policy.tapered:
        return _drops_dpr(policy.r, n)
    # newest first: a history replay to n leaves n - 1 in the recent cache
    cur = enumerate_retained(policy, n)
    return np.setdiff1d(enumerate_retained(policy, n - 1), cur)


def gap_bound(policy: PolicySpec, n: int, t: int) -> int:
    """Guaranteed maximum width of the gap that starts at retained point ``t``."""
    if not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got t={t}, n={n}")
    if isinstance(policy, FixedResolution):
        return policy.r
    if isinstance(policy, DepthProportional):
        return max(1, n // policy.r)
    if isinstance(policy, RecencyProportional):
        return max(1, (n - t) // policy.r)
    if isinstance(policy, GeomSeqNthRoot):
        ratio = n ** (1.0 / policy.a) - 1.0
        return max(1, math.ceil(2 * (n - t) * ratio) + 2)
    if isinstance(policy, CurbedRecencyProportional):
        return gap_bound(crpr_active(policy.m, n), n, t)
    raise TypeError(f"unsupported policy {policy!r}")


def size_bound(policy: PolicySpec, n: int) -> int:
    """Guaranteed upper bound on the number of retained points at depth ``n``."""
    _check_depth(n)
    if isinstance(policy, FixedResolution):
        return n // policy.r + 2
    if isinstance(policy, DepthProportional):
        return 2 * policy.r + 2
    if isinstance(policy, RecencyProportional):
        return (policy.r + 1) * (max(n, 1).bit_length()) + 1
    if isinstance(policy, GeomSeqNthRoot):
        return 6 * policy.a + 4
    if isinstance(policy, CurbedRecencyProportional):
        return policy.m
    raise TypeError(f"unsupported policy {policy!r}")
