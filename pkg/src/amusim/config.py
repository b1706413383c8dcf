"""Run-configuration loading and validation.

Configs are plain JSON. Validation is strict: unknown keys are rejected and
every error names the offending key path (e.g. ``machine.spm_bytes``), so a
typo fails loudly instead of silently running with a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .baseline import CoreParams
from .engine import FarMemoryNode
from .errors import AmuSimError, BadConfig, BadSize, ParseError, SchemaError
from .latency import Bimodal, Constant, LatencyDistribution, LogNormal, Uniform
from .machine import AmuMachine, MachineParams, MemAccessConfig
from .workloads import WorkloadSpec

_MACHINE_KEYS = {
    "l2_total_bytes",
    "spm_bytes",
    "max_outstanding",
    "issue_cost_ns",
    "granularity_bytes",
    "count",
    "qos_label",
}
_NODE_KEYS = {"id", "base", "limit", "latency", "bandwidth_bytes_per_ns", "max_inflight"}
_TOP_KEYS = {"seed", "machine", "nodes", "workload", "baseline", "stop", "warmup_ns", "sample_interval_ns", "sweep"}
_STOP_KEYS = {"duration_ns", "op_count"}
_BASELINE_KEYS = {"rob_entries", "mshr_entries", "issue_width", "cycle_ns"}
_SWEEP_KEYS = {"axis", "values"}

SWEEP_AXES = ("outstanding", "granularity", "mshr", "latency_scale")


@dataclass(frozen=True)
class NodeSpec:
    node_id: int
    base: int
    limit: int
    latency: LatencyDistribution
    bandwidth_bytes_per_ns: float
    max_inflight: int

    def build(self) -> FarMemoryNode:
        return FarMemoryNode(
            self.node_id, self.base, self.limit, self.latency, self.bandwidth_bytes_per_ns, self.max_inflight
        )


@dataclass(frozen=True)
class RunConfig:
    seed: int
    machine: MachineParams
    nodes: tuple[NodeSpec, ...]
    workload: WorkloadSpec
    baseline: CoreParams | None = None
    duration_ns: int | None = None
    op_count: int | None = None
    warmup_ns: int = 0
    sample_interval_ns: int = 0
    sweep_axis: str | None = None
    sweep_values: tuple = ()

    @property
    def granularity(self) -> int:
        return self.machine.default_config.granularity_bytes


def _require_keys(obj: dict, allowed: set[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}{key}: unknown key")


_REQUIRED = object()


def _as_int(obj: dict, key: str, path: str, default=_REQUIRED, minimum=0):
    if key not in obj:
        if default is _REQUIRED:
            raise SchemaError(f"{path}{key}: required")
        return default
    value = obj[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise SchemaError(f"{path}{key}: expected an int >= {minimum}, got {value!r}")
    return value


def parse_latency(obj, path: str) -> LatencyDistribution:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError(f"{path}: expected an object with a 'kind' key")
    kind = obj["kind"]
    try:
        if kind == "constant":
            _require_keys(obj, {"kind", "value"}, path + ".")
            return Constant(_as_int(obj, "value", path + "."))
        if kind == "uniform":
            _require_keys(obj, {"kind", "lo", "hi"}, path + ".")
            return Uniform(_as_int(obj, "lo", path + "."), _as_int(obj, "hi", path + "."))
        if kind == "bimodal":
            _require_keys(obj, {"kind", "p_low", "low", "high"}, path + ".")
            p = obj.get("p_low")
            if not isinstance(p, (int, float)):
                raise SchemaError(f"{path}.p_low: expected a number")
            return Bimodal(float(p), parse_latency(obj.get("low"), path + ".low"), parse_latency(obj.get("high"), path + ".high"))
        if kind == "lognormal":
            _require_keys(obj, {"kind", "mu", "sigma", "clamp_lo", "clamp_hi"}, path + ".")
            for key in ("mu", "sigma"):
                if not isinstance(obj.get(key), (int, float)):
                    raise SchemaError(f"{path}.{key}: expected a number")
            return LogNormal(
                float(obj["mu"]),
                float(obj["sigma"]),
                _as_int(obj, "clamp_lo", path + "."),
                _as_int(obj, "clamp_hi", path + "."),
            )
    except AmuSimError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{path}: {exc}") from exc
    raise SchemaError(f"{path}.kind: unknown latency kind {kind!r}")


def validate_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise SchemaError("top level: expected a JSON object")
    _require_keys(raw, _TOP_KEYS, "")

    seed = _as_int(raw, "seed", "", default=1)

    mobj = raw.get("machine", {})
    if not isinstance(mobj, dict):
        raise SchemaError("machine: expected an object")
    _require_keys(mobj, _MACHINE_KEYS, "machine.")
    try:
        default_cfg = MemAccessConfig(
            granularity_bytes=_as_int(mobj, "granularity_bytes", "machine.", default=64, minimum=1),
            qos_label=_as_int(mobj, "qos_label", "machine.", default=0),
            count=_as_int(mobj, "count", "machine.", default=1, minimum=1),
        )
        machine = MachineParams(
            l2_total_bytes=_as_int(mobj, "l2_total_bytes", "machine.", default=1 << 20, minimum=1),
            spm_bytes=_as_int(mobj, "spm_bytes", "machine.", default=256 << 10),
            max_outstanding=_as_int(mobj, "max_outstanding", "machine.", default=64, minimum=1),
            issue_cost_ns=_as_int(mobj, "issue_cost_ns", "machine.", default=1),
            default_config=default_cfg,
        )
        AmuMachine(machine)  # surfaces granularity-set and partition errors now
    except (BadConfig, BadSize) as exc:
        raise SchemaError(f"machine: {exc}") from exc

    nodes_raw = raw.get("nodes")
    if not isinstance(nodes_raw, list) or not nodes_raw:
        raise SchemaError("nodes: expected a non-empty list")
    nodes = []
    for i, nobj in enumerate(nodes_raw):
        path = f"nodes[{i}]."
        if not isinstance(nobj, dict):
            raise SchemaError(f"nodes[{i}]: expected an object")
        _require_keys(nobj, _NODE_KEYS, path)
        if "latency" not in nobj:
            raise SchemaError(f"{path}latency: required")
        bw = nobj.get("bandwidth_bytes_per_ns", 64)
        if not isinstance(bw, (int, float)) or isinstance(bw, bool) or bw <= 0:
            raise SchemaError(f"{path}bandwidth_bytes_per_ns: expected a number > 0")
        spec = NodeSpec(
            node_id=_as_int(nobj, "id", path, default=i),
            base=_as_int(nobj, "base", path, default=0),
            limit=_as_int(nobj, "limit", path, minimum=1),
            latency=parse_latency(nobj["latency"], path + "latency"),
            bandwidth_bytes_per_ns=bw,
            max_inflight=_as_int(nobj, "max_inflight", path, default=64, minimum=1),
        )
        if spec.limit <= spec.base:
            raise SchemaError(f"{path}limit: must exceed base")
        for prev in nodes:
            if spec.base < prev.limit and prev.base < spec.limit:
                raise SchemaError(f"{path}base: address range overlaps node {prev.node_id}")
        nodes.append(spec)

    wobj = raw.get("workload")
    if not isinstance(wobj, dict):
        raise SchemaError("workload: expected an object")
    _require_keys(wobj, {"name", "params"}, "workload.")
    params = wobj.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError("workload.params: expected an object")
    try:
        workload = WorkloadSpec(str(wobj.get("name")), dict(params))
    except AmuSimError as exc:
        raise SchemaError(f"workload: {exc}") from exc

    baseline = None
    if "baseline" in raw:
        bobj = raw["baseline"]
        if not isinstance(bobj, dict):
            raise SchemaError("baseline: expected an object")
        _require_keys(bobj, _BASELINE_KEYS, "baseline.")
        try:
            baseline = CoreParams(
                rob_entries=_as_int(bobj, "rob_entries", "baseline.", default=192, minimum=1),
                mshr_entries=_as_int(bobj, "mshr_entries", "baseline.", default=16, minimum=1),
                issue_width=_as_int(bobj, "issue_width", "baseline.", default=4, minimum=1),
                cycle_ns=_as_int(bobj, "cycle_ns", "baseline.", default=1, minimum=1),
            )
        except BadConfig as exc:
            raise SchemaError(f"baseline: {exc}") from exc

    duration_ns = op_count = None
    if "stop" in raw:
        sobj = raw["stop"]
        if not isinstance(sobj, dict):
            raise SchemaError("stop: expected an object")
        _require_keys(sobj, _STOP_KEYS, "stop.")
        if len(sobj) != 1:
            raise SchemaError("stop: give exactly one of duration_ns / op_count")
        duration_ns = _as_int(sobj, "duration_ns", "stop.", default=None)
        op_count = _as_int(sobj, "op_count", "stop.", default=None, minimum=1)

    sweep_axis = None
    sweep_values: tuple = ()
    if "sweep" in raw:
        swobj = raw["sweep"]
        if not isinstance(swobj, dict):
            raise SchemaError("sweep: expected an object")
        _require_keys(swobj, _SWEEP_KEYS, "sweep.")
        sweep_axis = swobj.get("axis")
        if sweep_axis not in SWEEP_AXES:
            raise SchemaError(f"sweep.axis: expected one of {', '.join(SWEEP_AXES)}")
        values = swobj.get("values")
        if not isinstance(values, list):
            raise SchemaError("sweep.values: expected a list")
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
                raise SchemaError(f"sweep.values: expected positive numbers, got {v!r}")
        sweep_values = tuple(values)

    return RunConfig(
        seed=seed,
        machine=machine,
        nodes=tuple(nodes),
        workload=workload,
        baseline=baseline,
        duration_ns=duration_ns,
        op_count=op_count,
        warmup_ns=_as_int(raw, "warmup_ns", "", default=0),
        sample_interval_ns=_as_int(raw, "sample_interval_ns", "", default=0),
        sweep_axis=sweep_axis,
        sweep_values=sweep_values,
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return validate_config(raw)
