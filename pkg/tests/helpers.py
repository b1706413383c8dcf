"""Shared test utilities, chiefly the zero-latency functional oracle.

The oracle replays the run's effect log (data movements in the order they
were applied, plus the guest's direct scratchpad writes) against flat byte
images with no timing model at all. A run is functionally correct when its
final scratchpad and memory images are byte-identical to the oracle's.

Caveat the oracle inherits from its definition: it reads its own images at
replay time, so a guest that rewrites a scratchpad range while a store of
that range is still in flight is outside its scope (the simulator snapshots
store data at service start; tests for that behavior assert it directly).
"""

from __future__ import annotations

from amusim import AmuMachine, Engine, FarMemoryNode, GuestApi, MetricsCollector, SparseMemory
from amusim.engine import PAGE_BYTES


class FunctionalOracle:
    def __init__(self, spm_capacity: int, initial_memory: list[tuple[int, bytes]] = ()) -> None:
        self.spm = bytearray(spm_capacity)
        self.mem = SparseMemory()
        for addr, data in initial_memory:
            self.mem.write(addr, data)

    def replay(self, effect_log: list[tuple]) -> None:
        for entry in effect_log:
            if entry[0] == "load":
                _, spm_addr, mem_addr, size = entry
                self.spm[spm_addr : spm_addr + size] = self.mem.read(mem_addr, size)
            elif entry[0] == "store":
                _, spm_addr, mem_addr, size = entry
                self.mem.write(mem_addr, bytes(self.spm[spm_addr : spm_addr + size]))
            else:
                _, addr, payload = entry
                self.spm[addr : addr + len(payload)] = payload


def absolute_memory_image(nodes: list[FarMemoryNode]) -> SparseMemory:
    """Union of all node backings, re-based to absolute addresses."""
    image = SparseMemory()
    for node in nodes:
        for page, data in node.backing.pages().items():
            image.write(node.base + page * PAGE_BYTES, data)
    return image


def images_match(machine: AmuMachine, nodes: list[FarMemoryNode], oracle: FunctionalOracle) -> bool:
    if bytes(machine.spm.data) != bytes(oracle.spm):
        return False
    sim_mem = absolute_memory_image(nodes)
    zero = bytes(PAGE_BYTES)
    sim_pages = sim_mem.pages()
    oracle_pages = oracle.mem.pages()
    for page in sim_pages.keys() | oracle_pages.keys():
        if sim_pages.get(page, zero) != oracle_pages.get(page, zero):
            return False
    return True


def single_node(latency, limit=1 << 26, bandwidth=64, max_inflight=64, node_id=0, base=0) -> FarMemoryNode:
    return FarMemoryNode(node_id, base, limit, latency, bandwidth, max_inflight)


def build_rig(latency, machine=None, seed=1, trace=True, **node_kw):
    """One machine + one node + one engine, ready for a scripted guest."""
    machine = machine or AmuMachine()
    node = single_node(latency, **node_kw)
    engine = Engine([node], machine, seed=seed, trace=trace)
    return machine, node, engine


def run_scripted(engine, machine, script):
    """Register ``script(api)`` as the only guest and drain the engine."""
    holder = {}

    def make(ctx):
        api = GuestApi(engine, machine, ctx)
        holder["api"] = api
        return script(api)

    ctx = engine.register_guest(make, name="script")
    engine.run_to_completion()
    return holder["api"], ctx


def attach_collector(engine, warmup_ns=0) -> MetricsCollector:
    collector = MetricsCollector(warmup_ns)
    engine.on_request_issue = collector.on_issue
    engine.on_request_complete = collector.on_complete
    engine.on_sample = collector.on_sample
    return collector
