"""Guest workloads: the programming models plus the comparison drivers.

Each workload is a deterministic stepper over the guest API. Workloads with
a baseline-comparable form also emit a trace of 64-byte loads touching the
identical multiset of memory addresses, so the blocking and windowed cores
can be driven over the same address stream.

Randomized shapes (gather targets, chase chains, vector inputs) come from a
dedicated workload RNG stream derived from the run seed, independent of the
latency stream, so the address pattern is invariant across latency models.

Logical coroutines in ``coroutine_multiplex`` are explicit state records
scheduled by completion ids, not host-language coroutines; the schedule is a
pure function of the completion order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .baseline import CACHE_LINE_BYTES, Compute, MemLoad, TraceOp
from .errors import BadSpec, IncomparableWorkload
from .isa import GuestApi
from .machine import AccessPattern, PatternKind, RequestKind

WORKLOAD_NAMES = (
    "seq_stream",
    "pointer_chase",
    "gather",
    "event_driven",
    "coroutine_multiplex",
    "vector_kernel",
)

_PARAM_KEYS = {
    "seq_stream": {"footprint_bytes", "ops", "outstanding", "base_addr"},
    "gather": {"footprint_bytes", "ops", "outstanding", "base_addr"},
    "pointer_chase": {"footprint_bytes", "chain_len", "base_addr"},
    "event_driven": {"footprint_bytes", "ops", "outstanding", "process_ns", "base_addr"},
    "coroutine_multiplex": {"footprint_bytes", "coroutines", "chain_len", "base_addr"},
    "vector_kernel": {"elements", "base_addr"},
}

POINTER_BYTES = 8
ELEMENT_BYTES = 4


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in WORKLOAD_NAMES:
            raise BadSpec(f"unknown workload {self.name!r}; expected one of {', '.join(WORKLOAD_NAMES)}")
        allowed = _PARAM_KEYS[self.name]
        for key in self.params:
            if key not in allowed:
                raise BadSpec(f"workload {self.name}: unknown param {key!r}")
        for key, value in self.params.items():
            if not isinstance(value, int) or value < 0:
                raise BadSpec(f"workload {self.name}: param {key} must be a non-negative int, got {value!r}")


def _geti(params: dict, key: str, default):
    return params.get(key, default)


class Workload:
    """One instantiated workload: address plan, guest stepper, baseline trace."""

    def __init__(self, spec: WorkloadSpec, seed: int, granularity: int) -> None:
        self.spec = spec
        self.name = spec.name
        self.g = granularity
        self.rng = random.Random(f"{seed}:workload")
        p = spec.params
        self.base = _geti(p, "base_addr", 0)
        self.footprint = _geti(p, "footprint_bytes", 256 << 10)
        self.outstanding = _geti(p, "outstanding", 8)
        self.process_ns = _geti(p, "process_ns", 0)
        if self.name != "vector_kernel":
            if self.footprint < self.g or self.footprint % self.g:
                raise BadSpec(f"footprint {self.footprint} must be a positive multiple of granularity {self.g}")
        self._build_plan()

    # -- address plans ------------------------------------------------------

    def _build_plan(self) -> None:
        p = self.spec.params
        granules = self.footprint // self.g
        if self.name in ("seq_stream", "event_driven"):
            self.ops = _geti(p, "ops", granules if self.name == "seq_stream" else None)
            if self.outstanding < 1:
                raise BadSpec("outstanding must be >= 1")
        elif self.name == "gather":
            self.ops = _geti(p, "ops", granules)
            if self.outstanding < 1:
                raise BadSpec("outstanding must be >= 1")
            self.addrs = [self.base + self.rng.randrange(granules) * self.g for _ in range(self.ops)]
        elif self.name == "pointer_chase":
            self.chain_len = _geti(p, "chain_len", 64)
            if self.chain_len < 1:
                raise BadSpec("chain_len must be >= 1")
            if granules < self.chain_len + 1:
                raise BadSpec(f"footprint holds {granules} granules; chain needs {self.chain_len + 1}")
            idxs = self.rng.sample(range(granules), self.chain_len + 1)
            self.chain = [self.base + i * self.g for i in idxs]
        elif self.name == "coroutine_multiplex":
            self.coroutines = _geti(p, "coroutines", 4)
            self.chain_len = _geti(p, "chain_len", 16)
            if self.coroutines < 1 or self.chain_len < 1:
                raise BadSpec("coroutines and chain_len must be >= 1")
            slice_granules = granules // self.coroutines
            if slice_granules < self.chain_len + 1:
                raise BadSpec("footprint slice too small for the per-coroutine chains")
            self.chains = []
            for c in range(self.coroutines):
                lo = c * slice_granules
                idxs = self.rng.sample(range(lo, lo + slice_granules), self.chain_len + 1)
                self.chains.append([self.base + i * self.g for i in idxs])
        elif self.name == "vector_kernel":
            self.elements = _geti(p, "elements", 1024)
            total = self.elements * ELEMENT_BYTES
            if self.elements < 1 or total % self.g:
                raise BadSpec(f"elements*{ELEMENT_BYTES} must be a positive multiple of granularity {self.g}")
            self.vec_bytes = total
            self.vec_a = [self.rng.randrange(1 << 31) for _ in range(self.elements)]
            self.vec_b = [self.rng.randrange(1 << 31) for _ in range(self.elements)]

    def seq_addr(self, i: int) -> int:
        """i-th address of the sequential wrap-around stream."""
        granules = self.footprint // self.g
        return self.base + (i % granules) * self.g

    def request_addrs(self, count: int | None = None) -> list[int]:
        """Memory addresses in issue order, one per AMU request."""
        if self.name in ("seq_stream", "event_driven"):
            n = count if count is not None else self.ops
            if n is None:
                raise BadSpec(f"{self.name} without an op count has no finite address list")
            return [self.seq_addr(i) for i in range(n)]
        if self.name == "gather":
            return list(self.addrs)
        if self.name == "pointer_chase":
            return self.chain[: self.chain_len]
        raise IncomparableWorkload(f"{self.name} has no flat address list")

    # -- initial memory image -------------------------------------------------

    def initial_memory(self) -> list[tuple[int, bytes]]:
        """(addr, bytes) writes that must precede the run, identical for the oracle."""
        writes: list[tuple[int, bytes]] = []
        if self.name == "pointer_chase":
            for i in range(self.chain_len):
                writes.append((self.chain[i], self.chain[i + 1].to_bytes(POINTER_BYTES, "little")))
        elif self.name == "coroutine_multiplex":
            for chain in self.chains:
                for i in range(self.chain_len):
                    writes.append((chain[i], chain[i + 1].to_bytes(POINTER_BYTES, "little")))
        elif self.name == "vector_kernel":
            a = b"".join(v.to_bytes(ELEMENT_BYTES, "little") for v in self.vec_a)
            b = b"".join(v.to_bytes(ELEMENT_BYTES, "little") for v in self.vec_b)
            writes.append((self.base, a))
            writes.append((self.base + self.vec_bytes, b))
        return writes

    # -- guest steppers --------------------------------------------------------

    def guest(self, api: GuestApi):
        if self.name in ("seq_stream", "gather"):
            return self._guest_windowed(api)
        if self.name == "event_driven":
            return self._guest_event_driven(api)
        if self.name == "pointer_chase":
            return self._guest_pointer_chase(api)
        if self.name == "coroutine_multiplex":
            return self._guest_coroutines(api)
        return self._guest_vector_kernel(api)

    def _check_spm(self, api: GuestApi, need: int) -> None:
        if need > api.machine.spm.capacity_bytes:
            raise BadSpec(f"workload needs {need} B of scratchpad, machine has {api.machine.spm.capacity_bytes}")

    def _guest_windowed(self, api: GuestApi):
        """K-outstanding issue loop over a precomputed address list."""
        k = self.outstanding
        self._check_spm(api, k * self.g)
        addrs = self.request_addrs()
        free = list(range(k))
        slot_of: dict[int, int] = {}
        issued = retired = 0
        while retired < len(addrs):
            while (rid := api.getfin()) != 0:
                free.append(slot_of.pop(rid))
                retired += 1
            while issued < len(addrs) and free:
                slot = free.pop()
                rid = api.aload(slot * self.g, addrs[issued])
                slot_of[rid] = slot
                issued += 1
            if retired < len(addrs):
                yield None

    def _guest_event_driven(self, api: GuestApi):
        """select()-style loop: poll completions, process each, reissue."""
        k = self.outstanding
        self._check_spm(api, k * self.g)
        limit = self.ops  # None = open loop until the run's stop condition
        free = list(range(k))
        slot_of: dict[int, int] = {}
        issued = retired = 0
        while True:
            finished = 0
            while (rid := api.getfin()) != 0:
                free.append(slot_of.pop(rid))
                retired += 1
                finished += 1
            while free and (limit is None or issued < limit):
                slot = free.pop()
                rid = api.aload(slot * self.g, self.seq_addr(issued))
                slot_of[rid] = slot
                issued += 1
            if limit is not None and retired >= limit:
                return
            if self.process_ns and finished:
                yield self.process_ns * finished
            else:
                yield None

    def _guest_pointer_chase(self, api: GuestApi):
        """Dependent chain: every address comes out of the previous load's data."""
        self._check_spm(api, self.g)
        cur = self.chain[0]
        for _ in range(self.chain_len):
            api.aload(0, cur)
            while True:
                yield None
                if api.getfin() != 0:
                    break
            cur = int.from_bytes(api.spm_read(0, POINTER_BYTES), "little")

    def _guest_coroutines(self, api: GuestApi):
        """C chains multiplexed over one AMU; completions resume their owner."""
        self._check_spm(api, self.coroutines * self.g)
        state = [{"cur": chain[0], "hops": 0, "slot": c} for c, chain in enumerate(self.chains)]
        owner: dict[int, int] = {}
        live = 0
        for c, st in enumerate(state):
            rid = api.aload(st["slot"] * self.g, st["cur"])
            owner[rid] = c
            live += 1
        while live:
            yield None
            while (rid := api.getfin()) != 0:
                c = owner.pop(rid)
                st = state[c]
                st["hops"] += 1
                st["cur"] = int.from_bytes(api.spm_read(st["slot"] * self.g, POINTER_BYTES), "little")
                if st["hops"] < self.chain_len:
                    new_id = api.aload(st["slot"] * self.g, st["cur"])
                    owner[new_id] = c
                else:
                    live -= 1

    def _guest_vector_kernel(self, api: GuestApi):
        """Pattern-load two vectors, combine elementwise in SPM, pattern-store."""
        total = self.vec_bytes
        self._check_spm(api, 3 * total)
        count = total // self.g
        a_base, b_base, c_base = self.base, self.base + total, self.base + 2 * total
        api.write_apr(0, AccessPattern(PatternKind.STREAM, a_base, 0, count))
        api.write_apr(1, AccessPattern(PatternKind.STREAM, b_base, total, count))
        pending = {api.issue_pattern(0, RequestKind.LOAD), api.issue_pattern(1, RequestKind.LOAD)}
        while pending:
            yield None
            while (rid := api.getfin()) != 0:
                pending.discard(rid)
        for i in range(self.elements):
            a = int.from_bytes(api.spm_read(i * ELEMENT_BYTES, ELEMENT_BYTES), "little")
            b = int.from_bytes(api.spm_read(total + i * ELEMENT_BYTES, ELEMENT_BYTES), "little")
            s = (a + b) & 0xFFFFFFFF
            api.spm_write(2 * total + i * ELEMENT_BYTES, s.to_bytes(ELEMENT_BYTES, "little"))
        api.write_apr(2, AccessPattern(PatternKind.STREAM, c_base, 2 * total, count))
        store_id = api.issue_pattern(2, RequestKind.STORE)
        while True:
            yield None
            if api.getfin() == store_id:
                return

    # -- baseline trace ----------------------------------------------------------

    def trace(self, count: int | None = None) -> list[TraceOp]:
        """Equivalent 64-B-per-access trace touching the same addresses."""
        if self.name in ("seq_stream", "gather", "event_driven"):
            if self.g % CACHE_LINE_BYTES:
                raise IncomparableWorkload(f"granularity {self.g} is not line-aligned")
            ops: list[TraceOp] = []
            for addr in self.request_addrs(count):
                for j in range(self.g // CACHE_LINE_BYTES):
                    ops.append(MemLoad(addr + j * CACHE_LINE_BYTES))
            return ops
        if self.name == "pointer_chase":
            if self.g % CACHE_LINE_BYTES:
                raise IncomparableWorkload(f"granularity {self.g} is not line-aligned")
            ops = []
            for hop, addr in enumerate(self.request_addrs()):
                if hop:
                    ops.append(Compute(0))  # dependency barrier: next hop needs this data
                for j in range(self.g // CACHE_LINE_BYTES):
                    ops.append(MemLoad(addr + j * CACHE_LINE_BYTES))
            return ops
        raise IncomparableWorkload(f"{self.name} has no baseline trace form")


def make_workload(spec: WorkloadSpec, seed: int, granularity: int) -> Workload:
    return Workload(spec, seed, granularity)
