import json

import numpy as np
import pytest

import trajreeb as tr
from trajreeb.events import EventKind

from oracles import pairs_at_step, random_instance


def kinds_steps(events):
    return [(str(e.kind), e.step, e.subjects) for e in events]


def test_pairwise_connect_then_disconnect(pair_set):
    t1, t2 = pair_set.trajectories
    evs = tr.pairwise_events(t1, t2, 1.5)
    assert kinds_steps(evs) == [("connect", 2, (0, 1)), ("disconnect", 4, (0, 1))]
    # location is the lower-id subject's point at the event step
    assert evs[0].location == tr.Point3(2.0, 0.0, 0.0)
    assert evs[1].location == tr.Point3(4.0, 0.0, 0.0)


def test_pairwise_identical_connect_only():
    pts = [(k, 0, 0) for k in range(5)]
    a = tr.Trajectory(0, np.asarray(pts, float))
    b = tr.Trajectory(1, np.asarray(pts, float))
    evs = tr.pairwise_events(a, b, 0.5)
    assert kinds_steps(evs) == [("connect", 0, (0, 1))]


def test_pairwise_disjoint_step_ranges():
    a = tr.Trajectory(0, np.zeros((5, 3)) + [[0, 0, 0]], start_step=0)
    b = tr.Trajectory(1, np.zeros((5, 3)), start_step=10)
    assert tr.pairwise_events(a, b, 100.0) == []


def test_pairwise_connected_at_first_common_step():
    a = tr.Trajectory(0, np.asarray([(k, 0, 0) for k in range(6)], float))
    b = tr.Trajectory(1, np.asarray([(k, 0.5, 0) for k in range(2, 5)], float),
                      start_step=2)
    evs = tr.pairwise_events(a, b, 1.0)
    assert kinds_steps(evs)[0] == ("connect", 2, (0, 1))


def test_detect_single_trajectory():
    s = tr.make_set([[(0, 0, 0), (1, 0, 0), (2, 0, 0)]])
    sched = tr.detect_all_events(s, 1.0)
    assert kinds_steps(sched) == [("appear", 0, (0,)), ("disappear", 2, (0,))]


def test_detect_pair_schedule(pair_set):
    sched = tr.detect_all_events(pair_set, 1.5)
    assert kinds_steps(sched) == [
        ("appear", 0, (0,)),
        ("appear", 0, (1,)),
        ("connect", 2, (0, 1)),
        ("disconnect", 4, (0, 1)),
        ("disappear", 5, (0,)),
        ("disappear", 5, (1,)),
    ]
    sched.validate()


def test_schedule_matches_brute_force_pair_scan():
    rng = np.random.default_rng(17)
    for _ in range(20):
        trajs, eps = random_instance(rng, n_range=(5, 20), m_range=(8, 40))
        s = tr.TrajectorySet(tuple(tr.Trajectory(t, p, st) for t, p, st in trajs))
        sched = tr.detect_all_events(s, eps, method="grid")
        # oracle: per-pair scan built from per-step full distance tables
        want = []
        for t in s:
            want.append(("appear", t.start_step, (t.id,)))
            want.append(("disappear", t.end_step, (t.id,)))
        kmin, kmax = s.step_range
        prev = set()
        for k in range(kmin, kmax + 1):
            cur = pairs_at_step(trajs, eps, k)
            for p in sorted(cur - prev):
                want.append(("connect", k, p))
            active = set(s.active_ids(k))
            for p in sorted(prev - cur):
                if p[0] in active and p[1] in active:
                    want.append(("disconnect", k, p))
            prev = cur
        kind_order = {"appear": 0, "connect": 1, "disconnect": 2, "disappear": 3}
        want.sort(key=lambda e: (e[1], kind_order[e[0]], e[2]))
        got = [(str(e.kind), e.step, e.subjects) for e in sched]
        assert got == [(k, s_, subj) for k, s_, subj in want]


def test_grid_equals_brute():
    rng = np.random.default_rng(23)
    for _ in range(15):
        trajs, eps = random_instance(rng, n_range=(5, 30), m_range=(8, 50))
        s = tr.TrajectorySet(tuple(tr.Trajectory(t, p, st) for t, p, st in trajs))
        assert tr.detect_all_events(s, eps, "grid") == tr.detect_all_events(s, eps, "brute")


def test_replay_consistency(pair_set):
    """Replaying the schedule reconstructs per-step pointwise connectivity."""
    rng = np.random.default_rng(29)
    for _ in range(10):
        trajs, eps = random_instance(rng, n_range=(4, 12), m_range=(6, 25))
        s = tr.TrajectorySet(tuple(tr.Trajectory(t, p, st) for t, p, st in trajs))
        sched = tr.detect_all_events(s, eps)
        sched.validate()
        connected = set()
        by_id = {t.id: t for t in s}
        kmin, kmax = s.step_range
        for k in range(kmin, kmax + 1):
            for e in sched.at_step(k):
                if e.kind is EventKind.CONNECT:
                    connected.add(e.subjects)
                elif e.kind is EventKind.DISCONNECT:
                    connected.discard(e.subjects)
            active = set(s.active_ids(k))
            for pair in list(connected):
                if not (pair[0] in active and pair[1] in active):
                    connected.discard(pair)  # ended by disappearance
            for a in active:
                for b in active:
                    if a < b:
                        want = tr.eps_connected(
                            by_id[a].point_at(k), by_id[b].point_at(k), eps
                        )
                        assert ((a, b) in connected) == want, (k, a, b)


def test_insertion_order_independent(pair_set):
    reordered = tr.TrajectorySet(tuple(reversed(pair_set.trajectories)))
    assert tr.detect_all_events(pair_set, 1.5) == tr.detect_all_events(reordered, 1.5)


def test_intra_step_ordering():
    # both appear at 0 and connect at 0; both disappear at 2
    s = tr.make_set([[(0, 0, 0), (1, 0, 0), (2, 0, 0)],
                     [(0, 0.5, 0), (1, 0.5, 0), (2, 0.5, 0)]])
    sched = tr.detect_all_events(s, 1.0)
    at0 = [str(e.kind) for e in sched.at_step(0)]
    assert at0 == ["appear", "appear", "connect"]
    at2 = [str(e.kind) for e in sched.at_step(2)]
    assert at2 == ["disappear", "disappear"]


def test_jsonl_dump(pair_set):
    sched = tr.detect_all_events(pair_set, 1.5)
    lines = sched.to_jsonl().strip().split("\n")
    assert len(lines) == 6
    first = json.loads(lines[0])
    assert first == {"kind": "appear", "step": 0, "subjects": [0], "location": [0.0, 0.0, 0.0]}


def test_alternation_validation_catches_corruption(pair_set):
    sched = tr.detect_all_events(pair_set, 1.5)
    bad = tr.EventSchedule(
        list(sched)
        + [tr.Event(EventKind.CONNECT, 3, (0, 1), tr.Point3(0, 0, 0))]
    )
    with pytest.raises(tr.ContractError):
        bad.validate()


def test_empty_set_rejected():
    with pytest.raises(ValueError):
        tr.detect_all_events(tr.TrajectorySet(()), 1.0)


def test_bad_epsilon_rejected(pair_set):
    with pytest.raises(ValueError, match="epsilon must be positive"):
        tr.detect_all_events(pair_set, 0.0)
