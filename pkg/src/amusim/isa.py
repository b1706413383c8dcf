"""Guest-visible semantics of the asynchronous memory access instructions.

``GuestApi`` is the only way a workload touches the machine, which is what
makes interleaving tests exhaustive: every guest effect is one of these
calls. Each call consumes the machine's fixed issue cost of simulated time
(one instruction's worth, independent of memory-model state), advancing the
guest's local cursor; none of them ever blocks.

Issue semantics:

* ``aload``/``astore`` create a request moving ``granularity * count`` bytes
  between the scratchpad and far memory, hand it to the timing engine, and
  return its id immediately. When the request table is at
  ``max_outstanding`` they raise ``QueueFull`` and have no effect; the
  caller is expected to poll ``getfin`` and retry.
* ``issue_pattern`` expands an access-pattern register into sub-requests but
  returns a single id; ``getfin`` reports that id only once every
  sub-request has completed.
* ``getfin`` pops the oldest finished-but-unretired id (completion-time
  order, ties by id) or returns 0, the reserved failure code, when
  nothing has finished. It never blocks and never returns an id before the
  simulated instant that request completed.
"""

from __future__ import annotations

from .engine import Engine, GuestContext
from .errors import BadConfig, QueueFull, SpmOutOfRange
from .machine import (
    AccessPattern,
    AmuMachine,
    MemAccessConfig,
    RequestDescriptor,
    RequestKind,
    RequestState,
)
from .patterns import contiguous_plan, expand_pattern


class GuestApi:
    """Instruction-level interface one guest uses against one machine."""

    def __init__(self, engine: Engine, machine: AmuMachine, ctx: GuestContext) -> None:
        self.engine = engine
        self.machine = machine
        self.ctx = ctx

    @property
    def now(self) -> int:
        """Guest-local simulated time (event time plus issue costs so far)."""
        return self.ctx.cursor

    def _charge(self) -> None:
        self.ctx.calls_this_step += 1
        self.ctx.charge(self.machine.params.issue_cost_ns)

    def _resolve_config(self, config_idx: int | None) -> MemAccessConfig:
        idx = self.machine.dcr if config_idx is None else config_idx
        if not 0 <= idx < len(self.machine.macr):
            raise BadConfig(f"config index {idx} out of range [0, {len(self.machine.macr)})")
        cfg = self.machine.macr[idx]
        self.machine.check_config(cfg)
        return cfg

    def _issue(
        self,
        kind: RequestKind,
        spm_addr: int,
        mem_addr: int,
        cfg: MemAccessConfig,
        pattern: AccessPattern | None,
        plan,
    ) -> int:
        if not self.machine.table_has_room():
            raise QueueFull(f"request table full ({self.machine.params.max_outstanding} outstanding)")
        self.engine.route_plan(plan)  # a faulting instruction must leave no request behind
        issue_time = self.ctx.cursor
        self._charge()
        desc = RequestDescriptor(
            id=self.machine.alloc_request_id(),
            kind=kind,
            spm_addr=spm_addr,
            mem_addr=mem_addr,
            config=cfg,
            pattern=pattern,
            state=RequestState.PENDING,
            issue_time=issue_time,
        )
        self.machine.admit(desc)
        self.engine.submit_request(desc, plan, arrival=self.ctx.cursor)
        if self.engine.on_request_issue is not None:
            self.engine.on_request_issue(issue_time)
        return desc.id

    def _check_spm_span(self, spm_addr: int, total: int) -> None:
        if spm_addr < 0 or spm_addr + total > self.machine.spm.capacity_bytes:
            raise SpmOutOfRange(
                f"spm range [{spm_addr}, {spm_addr + total}) outside capacity {self.machine.spm.capacity_bytes}"
            )

    # -- instructions ---------------------------------------------------------

    def aload(self, spm_addr: int, mem_addr: int, config_idx: int | None = None) -> int:
        cfg = self._resolve_config(config_idx)
        self._check_spm_span(spm_addr, cfg.total_bytes)
        plan = contiguous_plan(mem_addr, spm_addr, cfg)
        return self._issue(RequestKind.LOAD, spm_addr, mem_addr, cfg, None, plan)

    def astore(self, spm_addr: int, mem_addr: int, config_idx: int | None = None) -> int:
        cfg = self._resolve_config(config_idx)
        self._check_spm_span(spm_addr, cfg.total_bytes)
        plan = contiguous_plan(mem_addr, spm_addr, cfg)
        return self._issue(RequestKind.STORE, spm_addr, mem_addr, cfg, None, plan)

    def issue_pattern(self, apr_idx: int, kind: RequestKind, config_idx: int | None = None) -> int:
        pattern = self.machine.read_apr(apr_idx)
        cfg = self._resolve_config(config_idx)
        plan = expand_pattern(pattern, cfg, spm_capacity=self.machine.spm.capacity_bytes)
        return self._issue(kind, pattern.base_spm_addr, pattern.base_mem_addr, cfg, pattern, plan)

    def getfin(self) -> int:
        self._charge()
        request_id = self.machine.completion_queue.pop_oldest()
        if request_id is None:
            return 0
        desc = self.machine.requests[request_id]
        assert desc.complete_time is not None and desc.complete_time <= self.ctx.cursor
        self.machine.retire(request_id)
        return request_id

    # -- scratchpad and register access (ordinary core-side instructions) ------

    def spm_read(self, addr: int, length: int) -> bytes:
        self._charge()
        return self.machine.spm_read(addr, length)

    def spm_write(self, addr: int, payload: bytes) -> None:
        self._charge()
        self.machine.spm_write(addr, payload)
        self.engine.log_guest_spm_write(addr, payload)

    def write_macr(self, idx: int, cfg: MemAccessConfig) -> None:
        self._charge()
        self.machine.write_macr(idx, cfg)

    def read_macr(self, idx: int) -> MemAccessConfig:
        self._charge()
        return self.machine.read_macr(idx)

    def set_default_config(self, idx: int) -> None:
        self._charge()
        self.machine.set_default_config(idx)

    def write_apr(self, idx: int, pattern: AccessPattern) -> None:
        self._charge()
        self.machine.write_apr(idx, pattern)

    def read_apr(self, idx: int) -> AccessPattern:
        self._charge()
        return self.machine.read_apr(idx)

    def repartition(self, new_spm_bytes: int) -> None:
        self._charge()
        self.machine.repartition(new_spm_bytes)
