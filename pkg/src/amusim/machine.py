"""Architectural state of one simulated core's asynchronous memory unit.

Holds the scratchpad image, the configuration register files, the request
table, and the completion queue. The scratchpad is carved out of a fixed L2
capacity budget; ``spm_bytes + cache_bytes == l2_total_bytes`` is an invariant
maintained across repartitioning. The cache side is tracked as capacity only.

All state here is plain single-threaded mutable state: one ``AmuMachine`` per
simulated machine. Independent instances share nothing, so parameter sweeps
may drive separate instances in parallel.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum

from .errors import BadConfig, BadIndex, BadSize, Busy, SpmOutOfRange

PARTITION_QUANTUM = 4096

DEFAULT_MACR_COUNT = 8
DEFAULT_APR_COUNT = 4
DEFAULT_GRANULARITIES = frozenset(1 << k for k in range(3, 17))  # 8 B .. 64 KiB


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class MemAccessConfig:
    """One memory-access configuration register value.

    ``granularity_bytes`` is the transfer unit of each sub-request,
    ``count`` the number of contiguous sub-requests a plain aload/astore
    issues, ``qos_label`` the service priority at memory-node queues
    (higher wins), and ``tag`` an opaque software-defined word.
    """

    granularity_bytes: int
    qos_label: int = 0
    count: int = 1
    tag: int = 0

    def __post_init__(self) -> None:
        if not _is_pow2(self.granularity_bytes):
            raise BadConfig(f"granularity must be a power of two, got {self.granularity_bytes}")
        if self.count < 1:
            raise BadConfig(f"count must be >= 1, got {self.count}")
        if self.qos_label < 0:
            raise BadConfig(f"qos_label must be >= 0, got {self.qos_label}")

    @property
    def total_bytes(self) -> int:
        return self.granularity_bytes * self.count


class PatternKind(Enum):
    STRIDE = "stride"
    STREAM = "stream"


@dataclass(frozen=True)
class AccessPattern:
    """One access-pattern register value.

    A Stream pattern is the degenerate Stride whose memory step equals the
    transfer granularity; expansion must honour that equivalence exactly.
    ``stride_bytes`` may be negative and is ignored for Stream.
    """

    kind: PatternKind
    base_mem_addr: int
    base_spm_addr: int
    count: int
    stride_bytes: int | None = None

    def __post_init__(self) -> None:
        if self.kind is PatternKind.STRIDE and self.stride_bytes is None:
            raise BadConfig("stride pattern requires stride_bytes")
        if self.count < 0:
            raise BadConfig(f"pattern count must be >= 0, got {self.count}")


class RequestKind(Enum):
    LOAD = "load"
    STORE = "store"


class RequestState(Enum):
    PENDING = "pending"
    IN_FLIGHT = "in_flight"
    COMPLETE = "complete"
    RETIRED = "retired"


# Legal forward transitions; anything else is a lifecycle bug.
_NEXT_STATE = {
    RequestState.PENDING: RequestState.IN_FLIGHT,
    RequestState.IN_FLIGHT: RequestState.COMPLETE,
    RequestState.COMPLETE: RequestState.RETIRED,
}


@dataclass
class RequestDescriptor:
    """One asynchronous memory access request.

    ``id`` is the value an aload/astore returns to the guest (never 0, since 0 is
    getfin's in-band failure code). ``spm_addr``/``mem_addr`` are the two
    source operands of the instruction; ``config`` is a snapshot of the
    resolved configuration register and ``pattern`` a snapshot of the access
    pattern for pattern-issued requests.
    """

    id: int
    kind: RequestKind
    spm_addr: int
    mem_addr: int
    config: MemAccessConfig
    pattern: AccessPattern | None
    state: RequestState
    issue_time: int
    complete_time: int | None = None
    subs_total: int = 0
    subs_remaining: int = 0

    def advance(self, new_state: RequestState) -> None:
        if _NEXT_STATE.get(self.state) is not new_state:
            raise AssertionError(f"illegal transition {self.state} -> {new_state} for request {self.id}")
        self.state = new_state


class CompletionQueue:
    """Finished-request ids awaiting getfin.

    Drain order is completion time, ties broken by request id. Each id is
    pushed exactly once (at its descriptor's Complete transition) and popped
    exactly once (at Retired).
    """

    def __init__(self) -> None:
        self._heap: list[tuple[int, int]] = []
        self._pushed: set[int] = set()

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, complete_time: int, request_id: int) -> None:
        assert request_id != 0 and request_id not in self._pushed, f"duplicate completion push {request_id}"
        self._pushed.add(request_id)
        heapq.heappush(self._heap, (complete_time, request_id))

    def pop_oldest(self) -> int | None:
        if not self._heap:
            return None
        _, request_id = heapq.heappop(self._heap)
        return request_id


class SpmSpace:
    """Byte-addressable scratchpad image carved out of the L2 budget.

    Contents are zero-initialized. Shrinking or growing the partition keeps
    the surviving prefix ``[0, min(old, new))`` intact.
    """

    def __init__(self, capacity_bytes: int, l2_total_bytes: int) -> None:
        if capacity_bytes > l2_total_bytes:
            raise BadSize(f"spm {capacity_bytes} exceeds l2 total {l2_total_bytes}")
        self.l2_total_bytes = l2_total_bytes
        self.capacity_bytes = capacity_bytes
        self.data = bytearray(capacity_bytes)

    @property
    def cache_bytes(self) -> int:
        return self.l2_total_bytes - self.capacity_bytes

    def _check_range(self, addr: int, length: int) -> None:
        if addr < 0 or length < 0 or addr + length > self.capacity_bytes:
            raise SpmOutOfRange(f"spm range [{addr}, {addr + length}) outside capacity {self.capacity_bytes}")

    def read(self, addr: int, length: int) -> bytes:
        self._check_range(addr, length)
        return bytes(self.data[addr : addr + length])

    def write(self, addr: int, payload: bytes) -> None:
        self._check_range(addr, len(payload))
        self.data[addr : addr + len(payload)] = payload

    def resize(self, new_capacity: int) -> None:
        keep = min(self.capacity_bytes, new_capacity)
        new_data = bytearray(new_capacity)
        new_data[:keep] = self.data[:keep]
        self.data = new_data
        self.capacity_bytes = new_capacity


@dataclass(frozen=True)
class MachineParams:
    """Fixed constants of one simulated machine."""

    l2_total_bytes: int = 1 << 20
    spm_bytes: int = 256 << 10
    max_outstanding: int = 64
    issue_cost_ns: int = 1
    macr_count: int = DEFAULT_MACR_COUNT
    apr_count: int = DEFAULT_APR_COUNT
    allowed_granularities: frozenset[int] = DEFAULT_GRANULARITIES
    default_config: MemAccessConfig = field(default_factory=lambda: MemAccessConfig(64))

    def __post_init__(self) -> None:
        if self.spm_bytes > self.l2_total_bytes:
            raise BadSize("spm_bytes exceeds l2_total_bytes")
        if self.spm_bytes % PARTITION_QUANTUM or self.l2_total_bytes % PARTITION_QUANTUM:
            raise BadSize(f"capacities must be multiples of the {PARTITION_QUANTUM}-byte partition quantum")
        if self.max_outstanding < 1 or self.issue_cost_ns < 0:
            raise BadConfig("max_outstanding must be >= 1 and issue_cost_ns >= 0")


class AmuMachine:
    """All AMU-architectural state of one core.

    The request table holds every descriptor from issue through retirement;
    a request occupies its table slot (and counts against ``max_outstanding``)
    until getfin retires it.
    """

    def __init__(self, params: MachineParams | None = None) -> None:
        self.params = params or MachineParams()
        p = self.params
        self.check_config(p.default_config)
        self.spm = SpmSpace(p.spm_bytes, p.l2_total_bytes)
        self.macr: list[MemAccessConfig] = [p.default_config] * p.macr_count
        self.dcr: int = 0
        # Fresh APRs hold a benign single-element stream at address 0.
        self.apr: list[AccessPattern] = [
            AccessPattern(PatternKind.STREAM, 0, 0, 1) for _ in range(p.apr_count)
        ]
        self.requests: dict[int, RequestDescriptor] = {}
        self.completion_queue = CompletionQueue()
        self._next_id = 1
        self._live = 0

    # -- request table -------------------------------------------------

    def alloc_request_id(self) -> int:
        rid = self._next_id
        assert rid < 1 << 64, "request-id space exhausted"
        self._next_id += 1
        return rid

    @property
    def live_requests(self) -> int:
        """Requests in Pending/InFlight/Complete (not yet retired)."""
        return self._live

    def table_has_room(self) -> bool:
        return self._live < self.params.max_outstanding

    def admit(self, desc: RequestDescriptor) -> None:
        assert desc.id not in self.requests
        assert self.table_has_room(), "admit called on a full request table"
        self.requests[desc.id] = desc
        self._live += 1

    def retire(self, request_id: int) -> None:
        desc = self.requests[request_id]
        desc.advance(RequestState.RETIRED)
        self._live -= 1

    # -- scratchpad ------------------------------------------------------

    def spm_read(self, addr: int, length: int) -> bytes:
        return self.spm.read(addr, length)

    def spm_write(self, addr: int, payload: bytes) -> None:
        self.spm.write(addr, payload)

    # -- register files --------------------------------------------------

    def check_config(self, cfg: MemAccessConfig) -> None:
        if cfg.granularity_bytes not in self.params.allowed_granularities:
            raise BadConfig(f"granularity {cfg.granularity_bytes} not in the machine's legal set")

    def write_macr(self, idx: int, cfg: MemAccessConfig) -> None:
        if not 0 <= idx < len(self.macr):
            raise BadIndex(f"macr index {idx} out of range [0, {len(self.macr)})")
        self.check_config(cfg)
        self.macr[idx] = cfg

    def read_macr(self, idx: int) -> MemAccessConfig:
        if not 0 <= idx < len(self.macr):
            raise BadIndex(f"macr index {idx} out of range [0, {len(self.macr)})")
        return self.macr[idx]

    def set_default_config(self, idx: int) -> None:
        if not 0 <= idx < len(self.macr):
            raise BadIndex(f"macr index {idx} out of range [0, {len(self.macr)})")
        self.dcr = idx

    def write_apr(self, idx: int, pattern: AccessPattern) -> None:
        if not 0 <= idx < len(self.apr):
            raise BadIndex(f"apr index {idx} out of range [0, {len(self.apr)})")
        self.apr[idx] = pattern

    def read_apr(self, idx: int) -> AccessPattern:
        if not 0 <= idx < len(self.apr):
            raise BadIndex(f"apr index {idx} out of range [0, {len(self.apr)})")
        return self.apr[idx]

    # -- cache/SPM partition ----------------------------------------------

    def repartition(self, new_spm_bytes: int) -> None:
        if self._live:
            raise Busy(f"{self._live} requests outstanding; drain before repartitioning")
        if new_spm_bytes < 0 or new_spm_bytes > self.params.l2_total_bytes:
            raise BadSize(f"spm size {new_spm_bytes} outside [0, {self.params.l2_total_bytes}]")
        if new_spm_bytes % PARTITION_QUANTUM:
            raise BadSize(f"spm size {new_spm_bytes} not a multiple of the {PARTITION_QUANTUM}-byte quantum")
        self.spm.resize(new_spm_bytes)
        assert self.spm.capacity_bytes + self.spm.cache_bytes == self.params.l2_total_bytes
