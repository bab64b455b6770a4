"""Two trajectories meeting and parting: events, Reeb graph, FSM queries.

The worked example used throughout the test suite: trajectory 0 runs along
the x-axis while trajectory 1 approaches, rides alongside for two steps,
and veers off.  Their per-step distances are 3, 2, 1, 1, 3, 3, so at
epsilon = 1.5 the pair connects at step 2 and disconnects at step 4.
"""

import trajreeb as tr

t0 = [(k, 0, 0) for k in range(6)]
t1 = [(0, 3, 0), (1, 2, 0), (2, 1, 0), (3, 1, 0), (4, 3, 0), (5, 3, 0)]
bundle = tr.make_set([t0, t1])
EPS = 1.5

print("=== event schedule ===")
schedule = tr.detect_all_events(bundle, EPS)
for e in schedule:
    print(f"  step {e.step}: {e.kind} {e.subjects} at {tuple(e.location)}")

print("\n=== Reeb graph ===")
reeb = tr.build_reeb(bundle, EPS)
for v in reeb.vertices:
    print(f"  vertex {v.id}: {v.kind} @ step {v.step}, location {tuple(v.location)} "
          f"(witness trajectory {v.witness})")
for e in reeb.edges:
    print(f"  edge {e.id}: group {sorted(e.members)} over steps {e.interval} "
          f"(vertices {e.u} -> {e.v})")

print("\n=== groups per step ===")
for k in range(6):
    groups = tr.groups_at_step(bundle, EPS, k)
    print(f"  step {k}: {[sorted(g) for g in groups]}")

print("\n=== FSM: following trajectory 0 ===")
state, loc = tr.fsm_start(reeb, 0)
print(f"  start: group {sorted(reeb.edge(state.edge_id).members)} at {tuple(loc)}")
for event in schedule:
    if event.kind is tr.EventKind.APPEAR:
        continue
    if 0 in event.subjects:
        state, loc = tr.fsm_next(reeb, state, event)
        if state.terminal:
            print(f"  {event.kind} @ {event.step}: terminal, last point {tuple(loc)}")
        else:
            group = sorted(reeb.edge(state.edge_id).members)
            print(f"  {event.kind} @ {event.step}: now in group {group}, "
                  f"transition at {tuple(loc)}")
