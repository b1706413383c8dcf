"""Run metrics: bandwidth, latency percentiles, occupancy, Little's law.

A request is "in flight" from its issue instant to its completion instant;
``mean_inflight`` is the time-weighted average of that count over the
measurement window ``[warmup, end]``. Throughput, latency statistics, and
bytes moved count only requests that complete inside the window. The
Little's-law residual |mean_inflight - throughput * mean_latency| /
mean_inflight is the self-consistency check a steady-state run must pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class MetricsRecord:
    bytes_moved: int
    wall_time_ns: int
    achieved_bw_bytes_per_ns: float
    latency_mean_ns: float
    latency_p50_ns: int
    latency_p99_ns: int
    mean_inflight: float
    littles_law_residual: float
    requests_completed: int
    per_node_utilization: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "bytes_moved": self.bytes_moved,
            "wall_time_ns": self.wall_time_ns,
            "achieved_bw_bytes_per_ns": self.achieved_bw_bytes_per_ns,
            "latency_mean_ns": self.latency_mean_ns,
            "latency_p50_ns": self.latency_p50_ns,
            "latency_p99_ns": self.latency_p99_ns,
            "mean_inflight": self.mean_inflight,
            "littles_law_residual": self.littles_law_residual,
            "requests_completed": self.requests_completed,
            "per_node_utilization": self.per_node_utilization,
        }


def nearest_rank(sorted_values: list[int], q: float) -> int:
    if not sorted_values:
        return 0
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


class MetricsCollector:
    """Accumulates issue/completion records; finalize() computes the record.

    Issue and completion callbacks may arrive slightly out of time order
    (guest-local cursors run ahead of the event clock), so deltas are kept
    as (time, +-1) pairs and sorted once at finalize.
    """

    def __init__(self, warmup_ns: int = 0) -> None:
        self.warmup_ns = warmup_ns
        self._deltas: list[tuple[int, int]] = []
        self._completions: list[tuple[int, int, int]] = []  # (time, bytes, latency)
        self.samples: list[tuple[int, int]] = []

    def on_issue(self, time: int) -> None:
        self._deltas.append((time, 1))

    def on_complete(self, time: int, size_bytes: int, latency_ns: int) -> None:
        self._deltas.append((time, -1))
        self._completions.append((time, size_bytes, latency_ns))

    def on_sample(self, time: int, live: int) -> None:
        self.samples.append((time, live))

    def _mean_inflight(self, end: int) -> float:
        lo = self.warmup_ns
        if end <= lo:
            return 0.0
        area = 0
        live = 0
        last = lo
        for time, delta in sorted(self._deltas):
            t = min(max(time, lo), end)
            area += live * (t - last)
            last = t
            live += delta
        area += live * (end - last)
        return area / (end - lo)

    def finalize(self, end: int, nodes=()) -> MetricsRecord:
        lo = self.warmup_ns
        window = max(end - lo, 0)
        done = [(t, b, l) for (t, b, l) in self._completions if lo <= t <= end]
        bytes_moved = sum(b for _, b, _ in done)
        latencies = sorted(l for _, _, l in done)
        mean_lat = sum(latencies) / len(latencies) if latencies else 0.0
        mean_inflight = self._mean_inflight(end)
        throughput = len(done) / window if window else 0.0
        if mean_inflight > 0:
            residual = abs(mean_inflight - throughput * mean_lat) / mean_inflight
        else:
            residual = 0.0
        util = {}
        for node in nodes:
            busy = sum(min(b, end) - max(a, lo) for a, b in node.busy_intervals if b > lo and a < end)
            util[str(node.node_id)] = busy / window if window else 0.0
        return MetricsRecord(
            bytes_moved=bytes_moved,
            wall_time_ns=window,
            achieved_bw_bytes_per_ns=bytes_moved / window if window else 0.0,
            latency_mean_ns=mean_lat,
            latency_p50_ns=nearest_rank(latencies, 0.50),
            latency_p99_ns=nearest_rank(latencies, 0.99),
            mean_inflight=mean_inflight,
            littles_law_residual=residual,
            requests_completed=len(done),
            per_node_utilization=util,
        )
