"""Detection of appear / disappear / connect / disconnect events.

Connect and disconnect are decided between index-aligned points only: at
global step k the pair (T, T') compares T.point_at(k) against T'.point_at(k).
A pair is emitted as Connect at the first common step where the points are
epsilon-connected and either no predecessor step exists or the predecessor
points were disconnected; Disconnect mirrors that on the way out.  Per pair,
connects and disconnects strictly alternate, starting with Connect.

Two detectors produce identical schedules:

* ``method="grid"`` buckets each step's points into a uniform grid with cell
  size epsilon and only tests the 27-cell neighborhood (the default);
* ``method="brute"`` evaluates the full pairwise distance matrix per step
  and is kept as the slow reference path.

Both share one arithmetic convention (squared distances, see
:mod:`trajreeb.geometry`) so their boundary decisions agree bit-for-bit.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .geometry import Point3, Trajectory, TrajectorySet, as_point


class EventKind(enum.IntEnum):
    """Ordered as processed within a step: a trajectory must exist in the
    step graph before its edges change, and edges must be resolved before
    node removal."""

    APPEAR = 0
    CONNECT = 1
    DISCONNECT = 2
    DISAPPEAR = 3

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Event:
    kind: EventKind
    step: int
    subjects: tuple[int, ...]
    location: Point3

    def __post_init__(self):
        if self.kind in (EventKind.APPEAR, EventKind.DISAPPEAR):
            if len(self.subjects) != 1:
                raise ContractError(f"{self.kind} takes one subject")
        else:
            if len(self.subjects) != 2 or self.subjects[0] >= self.subjects[1]:
                raise ContractError(f"{self.kind} takes an ordered distinct pair")

    @property
    def sort_key(self):
        return (self.step, int(self.kind), self.subjects)

    def to_dict(self) -> dict:
        return {
            "kind": str(self.kind),
            "step": self.step,
            "subjects": list(self.subjects),
            "location": [self.location.x, self.location.y, self.location.z],
        }


class EventSchedule:
    """Step-ordered event sequence; the input alphabet of the FSM."""

    def __init__(self, events):
        evs = sorted(events, key=lambda e: e.sort_key)
        self._events = tuple(evs)
        steps: dict[int, list[Event]] = {}
        for e in evs:
            steps.setdefault(e.step, []).append(e)
        self._by_step = steps

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self):
        return iter(self._events)

    def __eq__(self, other) -> bool:
        return isinstance(other, EventSchedule) and self._events == other._events

    @property
    def events(self) -> tuple[Event, ...]:
        return self._events

    @property
    def steps(self) -> list[int]:
        return sorted(self._by_step)

    def at_step(self, k: int) -> list[Event]:
        return list(self._by_step.get(k, ()))

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e.to_dict()) for e in self._events) + "\n"

    def validate(self) -> None:
        """Check the alternation invariant: per pair, Connect and Disconnect
        strictly alternate, starting with Connect."""
        state: dict[tuple[int, int], EventKind] = {}
        for e in self._events:
            if e.kind is EventKind.CONNECT:
                if state.get(e.subjects) is EventKind.CONNECT:
                    raise ContractError(f"double connect for pair {e.subjects}")
                state[e.subjects] = EventKind.CONNECT
            elif e.kind is EventKind.DISCONNECT:
                if state.get(e.subjects) is not EventKind.CONNECT:
                    raise ContractError(f"disconnect before connect for {e.subjects}")
                state[e.subjects] = EventKind.DISCONNECT


def pairwise_events(t1: Trajectory, t2: Trajectory, epsilon: float) -> list[Event]:
    """Connect/disconnect events for one pair over their common step range."""
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive")
    if t1.id == t2.id:
        raise ContractError("pairwise_events needs two distinct trajectories")
    lo = max(t1.start_step, t2.start_step)
    hi = min(t1.end_step, t2.end_step)
    if lo > hi:
        return []
    a, b = (t1, t2) if t1.id < t2.id else (t2, t1)
    pa = a.points[lo - a.start_step: hi - a.start_step + 1]
    pb = b.points[lo - b.start_step: hi - b.start_step + 1]
    d = pa - pb
    d2 = d[:, 0] * d[:, 0]
    d2 += d[:, 1] * d[:, 1]
    d2 += d[:, 2] * d[:, 2]
    conn = d2 <= epsilon * epsilon

    events = []
    subjects = (a.id, b.id)
    for i in range(conn.shape[0]):
        k = lo + i
        if conn[i] and (i == 0 or not conn[i - 1]):
            events.append(Event(EventKind.CONNECT, k, subjects, a.location_at(k)))
        elif not conn[i] and i > 0 and conn[i - 1]:
            events.append(Event(EventKind.DISCONNECT, k, subjects, a.location_at(k)))
    return events


# ---------------------------------------------------------------------------
# Whole-set detection

_CELL_BIAS = 1 << 20
_NEIGHBOR_SHIFTS = [
    dx + (dy << 21) + (dz << 42)
    for dx, dy, dz in itertools.product((-1, 0, 1), repeat=3)
    if (dz, dy, dx) > (0, 0, 0)
]


class _StepIndex:
    """Per-step views of the active trajectories of a set."""

    def __init__(self, s: TrajectorySet):
        self.trajs = {t.id: t for t in s}
        ids = np.fromiter((t.id for t in s), dtype=np.int64, count=len(s))
        self.max_id = int(ids.max())
        if self.max_id >= 1 << 31:
            raise ContractError("trajectory ids must fit in 31 bits")
        self.start_of = np.full(self.max_id + 1, np.iinfo(np.int64).max, dtype=np.int64)
        self.end_of = np.full(self.max_id + 1, -1, dtype=np.int64)
        for t in s:
            self.start_of[t.id] = t.start_step
            self.end_of[t.id] = t.end_step
        self.kmin = min(t.start_step for t in s)
        self.kmax = max(t.end_step for t in s)
        self._uniform = len({(t.start_step, len(t)) for t in s}) == 1
        if self._uniform:
            self._stack = np.stack([t.points for t in s])
            self._stack_ids = ids
            self._start = s.trajectories[0].start_step
        else:
            per_step: dict[int, list[int]] = {}
            for t in s:
                for k in range(t.start_step, t.end_step + 1):
                    per_step.setdefault(k, []).append(t.id)
            self._per_step = {k: np.asarray(v, dtype=np.int64) for k, v in per_step.items()}

    def active(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(ids, points) of trajectories active at step k."""
        if self._uniform:
            if self._start <= k <= self.kmax:
                return self._stack_ids, self._stack[:, k - self._start, :]
            return np.empty(0, dtype=np.int64), np.empty((0, 3))
        ids = self._per_step.get(k)
        if ids is None:
            return np.empty(0, dtype=np.int64), np.empty((0, 3))
        pts = np.empty((ids.shape[0], 3))
        for row, tid in enumerate(ids):
            t = self.trajs[int(tid)]
            pts[row] = t.points[k - t.start_step]
        return ids, pts

    def active_mask(self, k: int) -> np.ndarray:
        return (self.start_of <= k) & (self.end_of >= k)


def _pairs_brute(ids: np.ndarray, pts: np.ndarray, eps2: float) -> np.ndarray:
    n = ids.shape[0]
    if n < 2:
        return np.empty(0, dtype=np.int64)
    d = pts[:, None, :] - pts[None, :, :]
    d2 = d[..., 0] * d[..., 0]
    d2 += d[..., 1] * d[..., 1]
    d2 += d[..., 2] * d[..., 2]
    iu, ju = np.triu_indices(n, k=1)
    hit = d2[iu, ju] <= eps2
    return _pack_pairs(ids[iu[hit]], ids[ju[hit]])


def _ragged_windows(src_pos: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Expand per-element index windows [lo_i, hi_i) into flat (i, j) pairs."""
    cnt = hi - lo
    keep = cnt > 0
    if not keep.any():
        return None
    cnt = cnt[keep]
    ii = np.repeat(src_pos[keep], cnt)
    offsets = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    jj = np.repeat(lo[keep], cnt) + offsets
    return ii, jj


def _pairs_grid(ids: np.ndarray, pts: np.ndarray, epsilon: float, eps2: float) -> np.ndarray:
    n = ids.shape[0]
    if n < 2:
        return np.empty(0, dtype=np.int64)
    cells = np.floor(pts / epsilon).astype(np.int64) + _CELL_BIAS
    if cells.min() < 1 or cells.max() >= (1 << 21) - 1:
        # epsilon much smaller than the coordinate span: cell codes would
        # not pack into 21 bits per axis (a one-cell margin keeps the +-1
        # neighbor offsets from crossing field boundaries), so test all
        # pairs instead
        return _pairs_brute(ids, pts, eps2)
    code = cells[:, 0] + (cells[:, 1] << 21) + (cells[:, 2] << 42)
    order = np.argsort(code, kind="stable")
    sorted_code = code[order]
    positions = np.arange(n)

    cand: list[tuple[np.ndarray, np.ndarray]] = []
    # within one cell: each sorted position pairs with the rest of its cell
    hi_same = np.searchsorted(sorted_code, sorted_code, side="right")
    res = _ragged_windows(positions, positions + 1, hi_same)
    if res is not None:
        cand.append(res)
    # across the 13 forward neighbor offsets
    for shift in _NEIGHBOR_SHIFTS:
        target = sorted_code + shift
        lo = np.searchsorted(sorted_code, target, side="left")
        hi = np.searchsorted(sorted_code, target, side="right")
        res = _ragged_windows(positions, lo, hi)
        if res is not None:
            cand.append(res)
    if not cand:
        return np.empty(0, dtype=np.int64)
    ii = order[np.concatenate([c[0] for c in cand])]
    jj = order[np.concatenate([c[1] for c in cand])]
    d = pts[ii] - pts[jj]
    d2 = d[:, 0] * d[:, 0]
    d2 += d[:, 1] * d[:, 1]
    d2 += d[:, 2] * d[:, 2]
    hit = d2 <= eps2
    return _pack_pairs(ids[ii[hit]], ids[jj[hit]])


def _pack_pairs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    return np.sort((lo << 31) + hi)


def _unpack_pair(code: int) -> tuple[int, int]:
    return int(code >> 31), int(code & ((1 << 31) - 1))


def detect_all_events(s: TrajectorySet, epsilon: float, method: str = "grid") -> EventSchedule:
    """Full event schedule for a trajectory set at one epsilon.

    One Appear and one Disappear per trajectory plus the union of pairwise
    connect/disconnect events, deterministically ordered.
    """
    if len(s) == 0:
        raise ValueError("trajectory set is empty")
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive")
    if method not in ("grid", "brute"):
        raise ValueError(f"unknown detection method {method!r}")
    eps2 = epsilon * epsilon
    index = _StepIndex(s)
    events: list[Event] = []
    for t in s:
        events.append(Event(EventKind.APPEAR, t.start_step, (t.id,), as_point(t.points[0])))
        events.append(Event(EventKind.DISAPPEAR, t.end_step, (t.id,), as_point(t.points[-1])))

    prev = np.empty(0, dtype=np.int64)
    for k in range(index.kmin, index.kmax + 1):
        ids, pts = index.active(k)
        if method == "grid":
            cur = _pairs_grid(ids, pts, epsilon, eps2)
        else:
            cur = _pairs_brute(ids, pts, eps2)
        new = np.setdiff1d(cur, prev, assume_unique=True)
        gone = np.setdiff1d(prev, cur, assume_unique=True)
        for code in new:
            a, b = _unpack_pair(int(code))
            events.append(Event(EventKind.CONNECT, k, (a, b), index.trajs[a].location_at(k)))
        if gone.size:
            mask = index.active_mask(k)
            for code in gone:
                a, b = _unpack_pair(int(code))
                if mask[a] and mask[b]:
                    events.append(
                        Event(EventKind.DISCONNECT, k, (a, b), index.trajs[a].location_at(k))
                    )
        prev = cur
    return EventSchedule(events)
