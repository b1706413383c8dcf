"""Post-hoc audits over an event trace.

The trace is the ground truth for the scheduler invariants: each
SubReqDispatch/SubReqComplete line carries the node's in-flight and queued
counts after the event. The audit recomputes occupancy independently from
the dispatch/complete pairing, cross-checks it against the reported counts,
enforces the in-flight cap, and checks work conservation: whenever simulated
time moves on, no node may be left with queued work and a spare slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class TraceEvent:
    time: int
    seq: int
    kind: str
    details: dict[str, str]


def parse_trace_line(line: str) -> TraceEvent:
    time_s, seq_s, kind, rest = line.rstrip("\n").split("\t", 3)
    details = {}
    for token in rest.split():
        key, _, value = token.partition("=")
        details[key] = value
    return TraceEvent(int(time_s), int(seq_s), kind, details)


@dataclass
class _NodeState:
    inflight: int = 0
    queued: int = 0
    open_subs: dict[tuple[str, str], int] = field(default_factory=dict)


def audit_trace(
    lines: list[str],
    max_inflight_by_node: dict[int, int],
    expect_drained: bool = False,
) -> list[str]:
    """Return a list of violation messages; an empty list means the trace is clean.

    Checks, per node: the in-flight count never exceeds its cap, reported
    counts match the recomputed ones, completions pair with dispatches and
    never precede the sub-request's data-ready time, and work conservation
    holds at every instant where time advances. With ``expect_drained`` the
    trace must also leave no sub-request in flight (drain-to-idle runs).
    """
    violations: list[str] = []
    nodes: dict[int, _NodeState] = {}
    prev_time: int | None = None
    last_seq = 0

    def check_conservation(t) -> None:
        for node_id, st in nodes.items():
            if st.queued > 0 and st.inflight < max_inflight_by_node[node_id]:
                violations.append(
                    f"t={t}: node {node_id} idles a slot with {st.queued} queued (inflight={st.inflight})"
                )

    for ev in (parse_trace_line(line) for line in lines):
        if ev.seq <= last_seq:
            violations.append(f"t={ev.time} seq={ev.seq}: sequence numbers not strictly increasing")
        last_seq = ev.seq
        if prev_time is not None and ev.time < prev_time:
            violations.append(f"t={ev.time} seq={ev.seq}: time went backwards from {prev_time}")
        if ev.time != prev_time:
            if prev_time is not None:
                check_conservation(prev_time)
            prev_time = ev.time
        if ev.kind not in ("SubReqDispatch", "SubReqComplete"):
            continue

        node_id = int(ev.details["node"])
        if node_id not in max_inflight_by_node:
            violations.append(f"t={ev.time}: unknown node {node_id}")
            continue
        st = nodes.setdefault(node_id, _NodeState())
        key = (ev.details["req"], ev.details["sub"])

        if ev.kind == "SubReqDispatch":
            st.inflight += 1
            if key in st.open_subs:
                violations.append(f"t={ev.time}: duplicate dispatch of req={key[0]} sub={key[1]}")
            st.open_subs[key] = int(ev.details["ready"])
        else:
            st.inflight -= 1
            ready = st.open_subs.pop(key, None)
            if ready is None:
                violations.append(f"t={ev.time}: completion without dispatch for req={key[0]} sub={key[1]}")
            elif ev.time < ready:
                violations.append(f"t={ev.time}: req={key[0]} sub={key[1]} completed before data-ready {ready}")

        st.queued = int(ev.details["queued"])
        if st.inflight != int(ev.details["inflight"]):
            violations.append(
                f"t={ev.time}: node {node_id} reported inflight={ev.details['inflight']}, recomputed {st.inflight}"
            )
        if st.inflight < 0 or st.inflight > max_inflight_by_node[node_id]:
            violations.append(
                f"t={ev.time}: node {node_id} inflight={st.inflight} outside [0, {max_inflight_by_node[node_id]}]"
            )

    if prev_time is not None:
        check_conservation(prev_time)
    if expect_drained:
        for node_id, st in nodes.items():
            for (req, sub) in st.open_subs:
                violations.append(f"node {node_id}: req={req} sub={sub} never completed")
            if st.queued:
                violations.append(f"node {node_id}: {st.queued} sub-requests left queued")
    return violations
