"""Experiment execution: single runs, system comparisons, parameter sweeps.

Every artifact (metrics.json, trace.tsv, compare.csv, sweep.csv) is a pure
function of the config contents and the seed. CSV headers are fixed; fields
are never reordered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .baseline import run_blocking, run_windowed_ooo
from .config import RunConfig, SWEEP_AXES
from .engine import Engine, FarMemoryNode
from .errors import BadAxis, BadConfig, SchemaError
from .isa import GuestApi
from .latency import scale_latency
from .machine import AmuMachine, MemAccessConfig
from .metrics import MetricsCollector, MetricsRecord
from .workloads import Workload, make_workload

COMPARE_HEADER = "system,bw,mean_lat,p99_lat,mean_inflight"
SWEEP_HEADER = "axis,value,system,bw,mean_lat,p99_lat,mean_inflight"
COMPARE_SYSTEMS = ("blocking", "ooo", "amu")


@dataclass
class RunResult:
    metrics: MetricsRecord
    engine: Engine
    machine: AmuMachine
    workload: Workload
    trace_lines: list[str] | None


def build_nodes(config: RunConfig) -> list[FarMemoryNode]:
    return [spec.build() for spec in config.nodes]


def write_initial_memory(nodes: list[FarMemoryNode], writes: list[tuple[int, bytes]]) -> None:
    for addr, data in writes:
        pos = 0
        while pos < len(data):
            for node in nodes:
                if node.base <= addr + pos < node.limit:
                    n = min(len(data) - pos, node.limit - (addr + pos))
                    node.backing.write(addr + pos - node.base, data[pos : pos + n])
                    pos += n
                    break
            else:
                raise SchemaError(f"workload initial memory at {hex(addr + pos)} is unmapped")


_OP_COUNT_PARAM = {
    "seq_stream": "ops",
    "gather": "ops",
    "event_driven": "ops",
    "pointer_chase": "chain_len",
}


def _effective_workload(config: RunConfig) -> Workload:
    spec = config.workload
    if config.machine.default_config.count != 1:
        raise SchemaError("machine.count: workloads size requests via granularity_bytes; count must be 1")
    if config.op_count is not None:
        key = _OP_COUNT_PARAM.get(spec.name)
        if key is None:
            raise SchemaError(f"stop.op_count: not applicable to workload {spec.name}")
        spec = replace(spec, params={**spec.params, key: config.op_count})
    workload = make_workload(spec, config.seed, config.granularity)
    if config.duration_ns is None and spec.name == "event_driven" and workload.ops is None:
        raise SchemaError("stop: event_driven without an op count needs a duration_ns stop")
    return workload


def run_amu(config: RunConfig, trace: bool = False) -> RunResult:
    """Execute the AMU system once under the given config."""
    machine = AmuMachine(config.machine)
    nodes = build_nodes(config)
    workload = _effective_workload(config)
    engine = Engine(nodes, machine, seed=config.seed, trace=trace)
    collector = MetricsCollector(config.warmup_ns)
    engine.on_request_issue = collector.on_issue
    engine.on_request_complete = collector.on_complete
    engine.on_sample = collector.on_sample
    write_initial_memory(nodes, workload.initial_memory())
    engine.register_guest(
        lambda ctx: workload.guest(GuestApi(engine, machine, ctx)), name=workload.name
    )
    engine.start_sampling(config.sample_interval_ns)
    if config.duration_ns is not None:
        engine.run_until(config.duration_ns)
    else:
        engine.run_to_completion()
    metrics = collector.finalize(engine.now, nodes)
    return RunResult(metrics, engine, machine, workload, engine.trace_lines)


def run_baseline(config: RunConfig, system: str, stats: dict | None = None) -> MetricsRecord:
    """Run one baseline core over the workload's equivalent trace."""
    if config.baseline is None:
        raise SchemaError("baseline: required to run a baseline core")
    workload = _effective_workload(config)
    trace_ops = workload.trace()
    nodes = build_nodes(config)
    if system == "blocking":
        return run_blocking(trace_ops, nodes, config.baseline, seed=config.seed, warmup_ns=config.warmup_ns)
    assert system == "ooo"
    return run_windowed_ooo(
        trace_ops, nodes, config.baseline, seed=config.seed, warmup_ns=config.warmup_ns, stats=stats
    )


def cmd_run(config: RunConfig, out_dir: str | Path, trace: bool = False) -> MetricsRecord:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_amu(config, trace=trace)
    (out / "metrics.json").write_text(json.dumps(result.metrics.to_dict(), indent=2) + "\n")
    if trace:
        assert result.trace_lines is not None
        (out / "trace.tsv").write_text("".join(line + "\n" for line in result.trace_lines))
    return result.metrics


def _fmt(value: float) -> str:
    return format(value, ".6g")


def _row(metrics: MetricsRecord) -> str:
    return (
        f"{_fmt(metrics.achieved_bw_bytes_per_ns)},{_fmt(metrics.latency_mean_ns)},"
        f"{metrics.latency_p99_ns},{_fmt(metrics.mean_inflight)}"
    )


def cmd_compare(config: RunConfig) -> tuple[str, dict[str, MetricsRecord]]:
    """Run blocking, windowed-OoO, and AMU over identical address streams.

    Returns the CSV text and the per-system metrics. The three systems see
    identical node parameters and the same seed; the workload must have a
    baseline trace form.
    """
    if config.baseline is None:
        raise SchemaError("baseline: required for compare")
    _effective_workload(config).trace()  # raises IncomparableWorkload up front
    records = {
        "blocking": run_baseline(config, "blocking"),
        "ooo": run_baseline(config, "ooo"),
        "amu": run_amu(config).metrics,
    }
    lines = [COMPARE_HEADER]
    for system in COMPARE_SYSTEMS:
        lines.append(f"{system},{_row(records[system])}")
    return "\n".join(lines) + "\n", records


def _apply_axis(config: RunConfig, axis: str, value) -> tuple[RunConfig, str]:
    """Rewrite the config for one sweep point; returns (config, system to run)."""
    if axis == "outstanding":
        if config.workload.name not in ("seq_stream", "gather", "event_driven"):
            raise BadAxis(f"outstanding does not apply to workload {config.workload.name}")
        spec = replace(config.workload, params={**config.workload.params, "outstanding": int(value)})
        return replace(config, workload=spec), "amu"
    if axis == "granularity":
        cfg = config.machine.default_config
        try:
            new_cfg = MemAccessConfig(int(value), cfg.qos_label, cfg.count, cfg.tag)
        except BadConfig as exc:
            raise BadAxis(f"granularity {value}: {exc}") from exc
        machine = replace(config.machine, default_config=new_cfg)
        return replace(config, machine=machine), "amu"
    if axis == "mshr":
        if config.baseline is None:
            raise BadAxis("mshr sweep needs a baseline section")
        return replace(config, baseline=replace(config.baseline, mshr_entries=int(value))), "ooo"
    if axis == "latency_scale":
        nodes = tuple(replace(n, latency=scale_latency(n.latency, value)) for n in config.nodes)
        return replace(config, nodes=nodes), "amu"
    raise BadAxis(f"unknown axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")


def cmd_sweep(config: RunConfig, axis: str, values) -> str:
    """One run per axis value, same seed everywhere; rows ordered by value position."""
    if axis not in SWEEP_AXES:
        raise BadAxis(f"unknown axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    lines = [SWEEP_HEADER]
    for value in values:
        point, system = _apply_axis(config, axis, value)
        if system == "amu":
            metrics = run_amu(point).metrics
        else:
            metrics = run_baseline(point, system)
        lines.append(f"{axis},{_fmt(value)},{system},{_row(metrics)}")
    return "\n".join(lines) + "\n"
