"""Synchronous-core baselines driven by the same far-memory nodes.

Two reference points for the comparisons:

* ``run_blocking``: an in-order core whose loads stall the pipeline until
  the memory service finishes. Per-load time is exactly the sampled latency
  plus the transfer time, so with a constant-latency node its bandwidth is
  the closed form ``size / (latency + transfer)``.
* ``run_windowed_ooo``: an out-of-order core bounded by a reorder-buffer
  window and a fixed number of MSHRs. Ops enter the window in order (at most
  ``issue_width`` per cycle), loads go to memory when an MSHR is free, and
  ops retire strictly in order. Once the MSHRs (or the window) fill, no
  further memory requests can issue, which is precisely the ceiling the
  asynchronous unit is built to lift.

Neither baseline models a cache: every load is a far-memory access of at
most one 64-byte line, and loads are independent unless the trace inserts a
Compute barrier between them (how pointer-chase dependencies are encoded).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .engine import Engine, FarMemoryNode
from .errors import BadConfig, BadParams
from .metrics import MetricsCollector, MetricsRecord

CACHE_LINE_BYTES = 64


@dataclass(frozen=True)
class MemLoad:
    addr: int
    size: int = CACHE_LINE_BYTES

    def __post_init__(self) -> None:
        if not 0 < self.size <= CACHE_LINE_BYTES:
            raise BadParams(f"baseline loads are at most {CACHE_LINE_BYTES} B, got {self.size}")


@dataclass(frozen=True)
class Compute:
    cycles: int

    def __post_init__(self) -> None:
        if self.cycles < 0:
            raise BadParams(f"compute cycles must be >= 0, got {self.cycles}")


TraceOp = MemLoad | Compute


def format_trace(ops: list[TraceOp]) -> str:
    """Newline-delimited text form: ``L <addr-hex> <size>`` / ``C <cycles>``."""
    lines = []
    for op in ops:
        if isinstance(op, MemLoad):
            lines.append(f"L {op.addr:#x} {op.size}")
        else:
            lines.append(f"C {op.cycles}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_trace(text: str) -> list[TraceOp]:
    ops: list[TraceOp] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "L" and len(fields) == 3:
            ops.append(MemLoad(int(fields[1], 16), int(fields[2])))
        elif fields[0] == "C" and len(fields) == 2:
            ops.append(Compute(int(fields[1])))
        else:
            raise BadParams(f"trace line {lineno}: cannot parse {line!r}")
    return ops


@dataclass(frozen=True)
class CoreParams:
    rob_entries: int
    mshr_entries: int
    issue_width: int
    cycle_ns: int

    def __post_init__(self) -> None:
        for name in ("rob_entries", "mshr_entries", "issue_width", "cycle_ns"):
            if getattr(self, name) < 1:
                raise BadConfig(f"{name} must be >= 1")


def run_blocking(
    trace: list[TraceOp],
    nodes: list[FarMemoryNode],
    params: CoreParams,
    seed: int = 0,
    warmup_ns: int = 0,
) -> MetricsRecord:
    """Execute the trace strictly in order, stalling on every load."""
    engine = Engine(nodes, machine=None, seed=seed, record_effects=False)
    collector = MetricsCollector(warmup_ns)

    def stepper(ctx):
        for op in trace:
            if isinstance(op, Compute):
                yield op.cycles * params.cycle_ns
                continue
            issue_time = ctx.cursor
            collector.on_issue(issue_time)
            done_at: list[int] = []

            def on_done(t: int, done_at=done_at, ctx=ctx) -> None:
                done_at.append(t)
                engine.wake(ctx)

            engine.submit_raw(op.addr, op.size, arrival=ctx.cursor, on_complete=on_done)
            while not done_at:
                yield None
            collector.on_complete(done_at[0], op.size, done_at[0] - issue_time)

    engine.register_guest(stepper, name="blocking")
    engine.run_to_completion()
    return collector.finalize(engine.now, nodes)


@dataclass
class _RobSlot:
    op: TraceOp
    issued: bool = False
    started: bool = False
    issue_time: int = 0
    done_at: int | None = None

    def done(self, now: int) -> bool:
        return self.done_at is not None and self.done_at <= now


def run_windowed_ooo(
    trace: list[TraceOp],
    nodes: list[FarMemoryNode],
    params: CoreParams,
    seed: int = 0,
    warmup_ns: int = 0,
    stats: dict | None = None,
) -> MetricsRecord:
    """Execute the trace through a ROB/MSHR-windowed out-of-order core.

    A Compute op is a barrier: it starts executing only once every older op
    has finished, and loads younger than an unfinished Compute cannot issue.
    Retirement is strictly in trace order, at most ``issue_width`` per cycle.
    When ``stats`` is given it receives rob/mshr peak occupancy and the
    retirement count for bound audits.
    """
    engine = Engine(nodes, machine=None, seed=seed, record_effects=False)
    collector = MetricsCollector(warmup_ns)
    cycle = params.cycle_ns
    rob: deque[_RobSlot] = deque()
    state = {"next_op": 0, "mshr_used": 0, "rob_peak": 0, "mshr_peak": 0, "retired": 0}

    def stepper(ctx):
        while True:
            now = ctx.cursor
            progress = False

            retired_now = 0
            while rob and retired_now < params.issue_width and rob[0].done(now):
                rob.popleft()
                state["retired"] += 1
                retired_now += 1
                progress = True

            entered = 0
            while state["next_op"] < len(trace) and len(rob) < params.rob_entries and entered < params.issue_width:
                rob.append(_RobSlot(trace[state["next_op"]]))
                state["next_op"] += 1
                entered += 1
                progress = True
            state["rob_peak"] = max(state["rob_peak"], len(rob))

            prefix_all_done = True
            compute_barrier = False
            for slot in rob:
                if isinstance(slot.op, Compute):
                    if not slot.started and prefix_all_done:
                        slot.started = True
                        slot.done_at = now + slot.op.cycles * cycle
                        progress = True
                    if not slot.done(now):
                        compute_barrier = True
                else:
                    if not slot.issued and not compute_barrier and state["mshr_used"] < params.mshr_entries:
                        slot.issued = True
                        slot.issue_time = now
                        state["mshr_used"] += 1
                        state["mshr_peak"] = max(state["mshr_peak"], state["mshr_used"])
                        assert state["mshr_used"] <= params.mshr_entries
                        collector.on_issue(now)

                        def on_done(t: int, slot=slot, ctx=ctx) -> None:
                            slot.done_at = t
                            state["mshr_used"] -= 1
                            collector.on_complete(t, slot.op.size, t - slot.issue_time)
                            engine.wake(ctx)

                        engine.submit_raw(slot.op.addr, slot.op.size, arrival=now, on_complete=on_done)
                        progress = True
                prefix_all_done = prefix_all_done and slot.done(now)

            if not rob and state["next_op"] >= len(trace):
                return

            candidates = []
            if progress:
                candidates.append(now + cycle)
            for slot in rob:
                # A running Compute lifts its barrier (and may unblock retirement)
                # at a known instant; wake then.
                if isinstance(slot.op, Compute) and slot.started and not slot.done(now):
                    candidates.append(slot.done_at)
            if rob and rob[0].done_at is not None and rob[0].done_at > now:
                candidates.append(rob[0].done_at)
            if candidates:
                yield min(candidates) - now
            else:
                # Stalled purely on outstanding memory; completion callbacks wake us.
                assert state["mshr_used"] > 0, "windowed core wedged with no outstanding work"
                yield None

    engine.register_guest(stepper, name="ooo")
    engine.run_to_completion()
    assert state["retired"] == len(trace)
    if stats is not None:
        stats.update(rob_peak=state["rob_peak"], mshr_peak=state["mshr_peak"], retired=state["retired"])
    return collector.finalize(engine.now, nodes)
