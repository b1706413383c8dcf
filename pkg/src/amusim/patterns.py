"""Expansion of access patterns into flat sub-request plans.

A plan is a list of (mem_addr, spm_addr, size_bytes) triples in issue order.
Every triple transfers exactly one granule; scratchpad destinations pack
densely (base_spm + i * granularity), so triples never overlap on the SPM
side within one plan. A Stream pattern expands identically to a Stride whose
stride equals the granularity.
"""

from __future__ import annotations

from .errors import BadPattern
from .machine import AccessPattern, MemAccessConfig, PatternKind

ExpandedPlan = list[tuple[int, int, int]]


def expand_pattern(
    pattern: AccessPattern,
    cfg: MemAccessConfig,
    spm_capacity: int | None = None,
) -> ExpandedPlan:
    """Expand ``pattern`` under ``cfg`` into sub-request triples.

    Raises BadPattern for an empty pattern, for memory addresses that
    underflow zero (negative strides walking off the bottom), and, when
    ``spm_capacity`` is given, for plans that spill out of the scratchpad.
    """
    if pattern.count == 0:
        raise BadPattern("pattern count is 0")
    g = cfg.granularity_bytes
    stride = g if pattern.kind is PatternKind.STREAM else pattern.stride_bytes
    assert stride is not None
    plan: ExpandedPlan = []
    for i in range(pattern.count):
        mem = pattern.base_mem_addr + i * stride
        spm = pattern.base_spm_addr + i * g
        if mem < 0:
            raise BadPattern(f"sub-request {i} memory address {mem} is negative")
        if spm < 0 or (spm_capacity is not None and spm + g > spm_capacity):
            raise BadPattern(f"sub-request {i} spm range [{spm}, {spm + g}) outside capacity {spm_capacity}")
        plan.append((mem, spm, g))
    return plan


def contiguous_plan(mem_addr: int, spm_addr: int, cfg: MemAccessConfig) -> ExpandedPlan:
    """Plan for a plain aload/astore: cfg.count granules, contiguous on both sides."""
    stream = AccessPattern(PatternKind.STREAM, mem_addr, spm_addr, cfg.count)
    return expand_pattern(stream, cfg)
