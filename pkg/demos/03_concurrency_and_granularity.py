"""The two levers on far-memory bandwidth: outstanding requests and granularity.

Sweep one lever at a time with everything else held fixed. Bandwidth rises
linearly with the number of outstanding requests until a capacity binds
(Little's law), and rises with transfer granularity until the per-request
transfer time starts to rival the latency.
"""

from amusim import validate_config
from amusim.harness import cmd_sweep

BASE = {
    "seed": 7,
    "machine": {"granularity_bytes": 64},
    "nodes": [{"limit": 1 << 26, "latency": {"kind": "constant", "value": 2000}}],
    "workload": {"name": "event_driven", "params": {"footprint_bytes": 4 << 20, "outstanding": 8}},
    "stop": {"duration_ns": 400_000},
    "warmup_ns": 40_000,
}

print("== outstanding-request sweep (g = 64 B, L = 2000 ns) ==")
print(cmd_sweep(validate_config(BASE), "outstanding", [1, 2, 4, 8, 16, 32, 64]))

print("== granularity sweep (K = 8, L = 2000 ns) ==")
print(cmd_sweep(validate_config(BASE), "granularity", [64, 128, 256, 512, 1024, 2048, 4096]))

print("== latency-scale sweep (K = 8, g = 64 B) ==")
print(cmd_sweep(validate_config(BASE), "latency_scale", [0.5, 1, 2, 4]))
