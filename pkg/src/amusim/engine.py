"""Deterministic discrete-event timing engine.

Time is integer nanoseconds. Events are processed in (time, seq) order where
seq is a global monotone counter assigned at scheduling, so equal-time events
fire in a fixed order and identical (config, seed) pairs replay identical
event traces byte for byte.

The engine services sub-requests through far-memory nodes. A node draws one
latency sample per sub-request at dispatch; latencies of concurrent
sub-requests overlap, while the data transfers serialize on the node's link
(service time = latency + size/bandwidth, with the transfer start pushed out
behind an earlier transfer still on the wire). Dispatch is gated by the
node's in-flight limit, and the wait queue is ordered by (QoS descending,
arrival ascending).

Guest workloads run as steppers: generator functions resumed by GuestStep
events. Each resumption may issue guest-API calls (each call advances the
guest's local time cursor by the machine's issue cost) and then yields either
an integer delay until its next step or ``None`` to sleep until a request
completion wakes it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush
from typing import Callable, Generator, Iterable

from .errors import BadParams, TimeRegression, UnmappedAddress
from .latency import LatencyDistribution, Scripted, sample_latency
from .machine import AmuMachine, RequestDescriptor, RequestKind, RequestState
from .patterns import ExpandedPlan

GuestStepper = Generator[int | None, None, None]

PAGE_BYTES = 4096


class SparseMemory:
    """Byte image backed by a page map; unwritten bytes read as zero."""

    def __init__(self) -> None:
        self._pages: dict[int, bytearray] = {}

    def read(self, addr: int, length: int) -> bytes:
        out = bytearray(length)
        pos = 0
        while pos < length:
            page, off = divmod(addr + pos, PAGE_BYTES)
            n = min(PAGE_BYTES - off, length - pos)
            data = self._pages.get(page)
            if data is not None:
                out[pos : pos + n] = data[off : off + n]
            pos += n
        return bytes(out)

    def write(self, addr: int, payload: bytes) -> None:
        pos = 0
        while pos < len(payload):
            page, off = divmod(addr + pos, PAGE_BYTES)
            n = min(PAGE_BYTES - off, len(payload) - pos)
            data = self._pages.setdefault(page, bytearray(PAGE_BYTES))
            data[off : off + n] = payload[pos : pos + n]
            pos += n

    def pages(self) -> dict[int, bytes]:
        """Snapshot of all touched pages (zero pages may be present)."""
        return {p: bytes(d) for p, d in self._pages.items()}


class EventKind(Enum):
    SUBREQ_DISPATCH = "SubReqDispatch"
    SUBREQ_COMPLETE = "SubReqComplete"
    GUEST_STEP = "GuestStep"
    SAMPLE = "Sample"


@dataclass
class SubRequest:
    """One granule-sized transfer routed to a single node.

    ``parent_id`` is the owning AMU request id, or 0 for raw baseline
    accesses that bypass the AMU.
    """

    parent_id: int
    index: int
    kind: RequestKind
    mem_addr: int
    spm_addr: int
    size_bytes: int
    qos: int
    node: "FarMemoryNode"
    enqueue_time: int = 0
    dispatch_time: int | None = None
    ready_time: int | None = None
    transfer_start: int | None = None
    complete_time: int | None = None
    payload: bytes | None = None
    on_complete: Callable[[int], None] | None = None


class FarMemoryNode:
    """One memory backend: address range, latency model, link, in-flight cap."""

    def __init__(
        self,
        node_id: int,
        base: int,
        limit: int,
        latency: LatencyDistribution,
        bandwidth_bytes_per_ns: float,
        max_inflight: int,
    ) -> None:
        if base < 0 or limit <= base:
            raise BadParams(f"node {node_id}: bad address range [{base}, {limit})")
        if bandwidth_bytes_per_ns <= 0:
            raise BadParams(f"node {node_id}: bandwidth must be > 0")
        if max_inflight < 1:
            raise BadParams(f"node {node_id}: max_inflight must be >= 1")
        self.node_id = node_id
        self.base = base
        self.limit = limit
        self.latency = latency
        self.bandwidth = bandwidth_bytes_per_ns
        self.max_inflight = max_inflight
        self.backing = SparseMemory()
        self.inflight = 0
        self.link_free_at = 0
        self.queue: list[tuple[int, int, int, SubRequest]] = []  # (-qos, arrival, seq, sub)
        self.busy_intervals: list[tuple[int, int]] = []
        self.load_bytes_done = 0
        self.store_bytes_done = 0
        self.raw_bytes_done = 0

    def owns(self, addr: int, size: int) -> bool:
        return self.base <= addr and addr + size <= self.limit

    def transfer_ns(self, size: int) -> int:
        if isinstance(self.bandwidth, int):
            return -(-size // self.bandwidth)
        return math.ceil(size / self.bandwidth)

    def queued(self) -> int:
        return len(self.queue)


@dataclass
class GuestContext:
    """Per-guest scheduling state: one stepper, one local time cursor."""

    name: str
    engine: "Engine"
    cursor: int = 0
    calls_this_step: int = 0
    sleeping: bool = False
    done: bool = False
    token: int = 0
    gen: GuestStepper | None = None

    def charge(self, ns: int) -> None:
        self.cursor += ns


class Engine:
    """Event loop plus the AMU request engine sitting in front of the nodes."""

    def __init__(
        self,
        nodes: Iterable[FarMemoryNode],
        machine: AmuMachine | None = None,
        seed: int = 0,
        trace: bool = False,
        record_effects: bool = True,
    ) -> None:
        self.nodes = list(nodes)
        self.machine = machine
        self.now = 0
        self.latency_rng = random.Random(f"{seed}:latency")
        self._heap: list[tuple[int, int, EventKind, object]] = []
        self._seq = 0
        self._pending_non_sample = 0
        self.trace_lines: list[str] | None = [] if trace else None
        self.effect_log: list[tuple] | None = [] if record_effects else None
        self.guests: list[GuestContext] = []
        self.on_request_issue: Callable[[int], None] | None = None
        self.on_request_complete: Callable[[int, int, int], None] | None = None
        self.on_sample: Callable[[int, int], None] | None = None
        self.sample_interval_ns = 0

    # -- event queue -------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def schedule(self, time: int, kind: EventKind, data: object) -> None:
        if time < self.now:
            raise TimeRegression(f"event at {time} scheduled at now={self.now}")
        if kind is not EventKind.SAMPLE:
            self._pending_non_sample += 1
        heappush(self._heap, (time, self._next_seq(), kind, data))

    def run_until(self, t: int) -> None:
        """Process every event with time <= t, then set now = t."""
        if t < self.now:
            raise TimeRegression(f"run_until({t}) with now={self.now}")
        while self._heap and self._heap[0][0] <= t:
            self._dispatch_one()
        self.now = t

    def run_to_completion(self) -> None:
        while self._heap:
            self._dispatch_one()

    def _dispatch_one(self) -> None:
        time, seq, kind, data = heappop(self._heap)
        assert time >= self.now, "event heap violated time order"
        self.now = time
        if kind is not EventKind.SAMPLE:
            self._pending_non_sample -= 1
        if kind is EventKind.SUBREQ_DISPATCH:
            self._handle_arrival(data)
        elif kind is EventKind.SUBREQ_COMPLETE:
            self._handle_complete(data)
        elif kind is EventKind.GUEST_STEP:
            self._handle_guest_step(data)
        else:
            self._handle_sample()

    def _emit(self, kind: EventKind, details: str) -> None:
        if self.trace_lines is not None:
            self.trace_lines.append(f"{self.now}\t{self._next_seq()}\t{kind.value}\t{details}")

    # -- node routing and service -------------------------------------------

    def route(self, mem_addr: int, size: int) -> FarMemoryNode:
        for node in self.nodes:
            if node.owns(mem_addr, size):
                return node
        raise UnmappedAddress(f"no node owns [{hex(mem_addr)}, {hex(mem_addr + size)})")

    def route_plan(self, plan: ExpandedPlan) -> list[FarMemoryNode]:
        """Resolve every sub-range to its owning node; raises UnmappedAddress."""
        return [self.route(mem, size) for mem, _, size in plan]

    def submit_request(self, desc: RequestDescriptor, plan: ExpandedPlan, arrival: int) -> None:
        """Expand an admitted AMU request into sub-requests arriving at ``arrival``."""
        assert self.machine is not None, "AMU requests need a machine"
        nodes = self.route_plan(plan)
        subs = [
            SubRequest(desc.id, i, desc.kind, mem, spm, size, desc.config.qos_label, node)
            for i, ((mem, spm, size), node) in enumerate(zip(plan, nodes))
        ]
        desc.subs_total = len(subs)
        desc.subs_remaining = len(subs)
        for sub in subs:
            self.schedule(arrival, EventKind.SUBREQ_DISPATCH, sub)

    def submit_raw(
        self,
        mem_addr: int,
        size: int,
        arrival: int,
        on_complete: Callable[[int], None],
        qos: int = 0,
    ) -> None:
        """Timing-only access path used by the baseline cores (no SPM, no AMU)."""
        node = self.route(mem_addr, size)
        sub = SubRequest(0, 0, RequestKind.LOAD, mem_addr, 0, size, qos, node, on_complete=on_complete)
        self.schedule(arrival, EventKind.SUBREQ_DISPATCH, sub)

    def _handle_arrival(self, sub: SubRequest) -> None:
        if sub.parent_id and self.machine is not None:
            desc = self.machine.requests[sub.parent_id]
            if desc.state is RequestState.PENDING:
                desc.advance(RequestState.IN_FLIGHT)
        node = sub.node
        sub.enqueue_time = self.now
        heappush(node.queue, (-sub.qos, self.now, self._next_seq(), sub))
        self._drain(node)

    def _drain(self, node: FarMemoryNode) -> None:
        while node.queue and node.inflight < node.max_inflight:
            _, _, _, sub = heappop(node.queue)
            self._dispatch_sub(node, sub)
        assert 0 <= node.inflight <= node.max_inflight, f"node {node.node_id} in-flight bound violated"
        # Work conservation: a queue can only persist when every slot is taken.
        assert not (node.queue and node.inflight < node.max_inflight)

    def _dispatch_sub(self, node: FarMemoryNode, sub: SubRequest) -> None:
        node.inflight += 1
        sub.dispatch_time = self.now
        if isinstance(node.latency, Scripted):
            lat = node.latency.next_value()
        else:
            lat = sample_latency(node.latency, self.latency_rng)
        sub.ready_time = self.now + lat
        if sub.parent_id and sub.kind is RequestKind.STORE:
            # DMA engine reads the scratchpad when service starts, not at issue.
            assert self.machine is not None
            sub.payload = self.machine.spm.read(sub.spm_addr, sub.size_bytes)
        self.schedule(sub.ready_time, EventKind.SUBREQ_COMPLETE, sub)
        self._emit(
            EventKind.SUBREQ_DISPATCH,
            f"req={sub.parent_id} sub={sub.index} node={node.node_id} mem={hex(sub.mem_addr)} "
            f"spm={hex(sub.spm_addr)} size={sub.size_bytes} qos={sub.qos} lat={lat} "
            f"ready={sub.ready_time} inflight={node.inflight} queued={node.queued()}",
        )

    def _handle_complete(self, sub: SubRequest) -> None:
        node = sub.node
        if sub.transfer_start is None:
            # First visit, at data-ready time: claim the link. Transfers are
            # granted in readiness order and serialize on the node bandwidth;
            # the round-trip latencies of other sub-requests keep overlapping.
            start = max(self.now, node.link_free_at)
            sub.transfer_start = start
            sub.complete_time = start + node.transfer_ns(sub.size_bytes)
            node.link_free_at = sub.complete_time
            node.busy_intervals.append((start, sub.complete_time))
            self.schedule(sub.complete_time, EventKind.SUBREQ_COMPLETE, sub)
            return
        node.inflight -= 1
        request_done = False
        if sub.parent_id == 0:
            node.raw_bytes_done += sub.size_bytes
            if sub.on_complete is not None:
                sub.on_complete(self.now)
        else:
            self._apply_copy(sub)
            assert self.machine is not None
            desc = self.machine.requests[sub.parent_id]
            desc.subs_remaining -= 1
            if desc.subs_remaining == 0:
                desc.advance(RequestState.COMPLETE)
                desc.complete_time = self.now
                self.machine.completion_queue.push(self.now, desc.id)
                request_done = True
                if self.on_request_complete is not None:
                    bytes_moved = desc.subs_total * desc.config.granularity_bytes
                    self.on_request_complete(self.now, bytes_moved, self.now - desc.issue_time)
                self._wake_sleepers()
        self._emit(
            EventKind.SUBREQ_COMPLETE,
            f"req={sub.parent_id} sub={sub.index} node={node.node_id} size={sub.size_bytes} "
            f"inflight={node.inflight} queued={node.queued()} last={int(request_done)}",
        )
        self._drain(node)

    def _apply_copy(self, sub: SubRequest) -> None:
        assert self.machine is not None
        node = sub.node
        off = sub.mem_addr - node.base
        if sub.kind is RequestKind.LOAD:
            data = node.backing.read(off, sub.size_bytes)
            self.machine.spm.write(sub.spm_addr, data)
            node.load_bytes_done += sub.size_bytes
            if self.effect_log is not None:
                self.effect_log.append(("load", sub.spm_addr, sub.mem_addr, sub.size_bytes))
        else:
            assert sub.payload is not None
            node.backing.write(off, sub.payload)
            node.store_bytes_done += sub.size_bytes
            if self.effect_log is not None:
                self.effect_log.append(("store", sub.spm_addr, sub.mem_addr, sub.size_bytes))

    def log_guest_spm_write(self, addr: int, payload: bytes) -> None:
        if self.effect_log is not None:
            self.effect_log.append(("spm_write", addr, bytes(payload)))

    # -- guests --------------------------------------------------------------

    def register_guest(
        self,
        make_stepper: Callable[[GuestContext], GuestStepper],
        name: str = "guest",
        start_time: int = 0,
    ) -> GuestContext:
        ctx = GuestContext(name=name, engine=self)
        ctx.gen = make_stepper(ctx)
        self.guests.append(ctx)
        self.schedule(start_time, EventKind.GUEST_STEP, (ctx, ctx.token))
        return ctx

    def wake(self, ctx: GuestContext, time: int | None = None) -> None:
        if ctx.done or not ctx.sleeping:
            return
        ctx.sleeping = False
        ctx.token += 1
        self.schedule(self.now if time is None else time, EventKind.GUEST_STEP, (ctx, ctx.token))

    def _wake_sleepers(self) -> None:
        for ctx in self.guests:
            self.wake(ctx)

    def _handle_guest_step(self, data: object) -> None:
        ctx, token = data  # type: ignore[misc]
        if ctx.done or token != ctx.token:
            return
        ctx.cursor = self.now
        ctx.calls_this_step = 0
        assert ctx.gen is not None
        try:
            delay = next(ctx.gen)
        except StopIteration:
            ctx.done = True
            self._emit(EventKind.GUEST_STEP, f"guest={ctx.name} cursor={ctx.cursor} calls={ctx.calls_this_step} end=1")
            return
        self._emit(EventKind.GUEST_STEP, f"guest={ctx.name} cursor={ctx.cursor} calls={ctx.calls_this_step} end=0")
        if delay is None:
            ctx.sleeping = True
            return
        if not isinstance(delay, int) or delay < 0:
            raise BadParams(f"guest {ctx.name} yielded {delay!r}; expected a non-negative int or None")
        ctx.token += 1
        self.schedule(ctx.cursor + delay, EventKind.GUEST_STEP, (ctx, ctx.token))

    # -- sampling --------------------------------------------------------------

    def start_sampling(self, interval_ns: int) -> None:
        if interval_ns > 0:
            self.sample_interval_ns = interval_ns
            self.schedule(self.now + interval_ns, EventKind.SAMPLE, None)

    def _handle_sample(self) -> None:
        live = self.machine.live_requests if self.machine is not None else 0
        parts = [f"live={live}"]
        for node in self.nodes:
            parts.append(f"n{node.node_id}_inflight={node.inflight}")
        self._emit(EventKind.SAMPLE, " ".join(parts))
        if self.on_sample is not None:
            self.on_sample(self.now, live)
        # Keep sampling only while real work remains, so drain runs terminate.
        if self._pending_non_sample > 0:
            self.schedule(self.now + self.sample_interval_ns, EventKind.SAMPLE, None)
