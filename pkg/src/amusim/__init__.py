"""amusim: a deterministic functional-plus-timing simulator of an in-core
asynchronous memory access unit (AMU) working against far memory.

The package models the unit's instruction semantics (aload/astore, pattern
issue, getfin), its register files and scratchpad, a discrete-event timing
engine with configurable far-memory latency distributions, and blocking /
windowed out-of-order baseline cores for apples-to-apples comparisons.
"""

from .baseline import CACHE_LINE_BYTES, Compute, CoreParams, MemLoad, run_blocking, run_windowed_ooo
from .config import NodeSpec, RunConfig, load_config, validate_config
from .engine import Engine, EventKind, FarMemoryNode, SparseMemory, SubRequest
from .errors import (
    AmuSimError,
    BadAxis,
    BadConfig,
    BadIndex,
    BadParams,
    BadPattern,
    BadSize,
    BadSpec,
    Busy,
    ConfigError,
    IncomparableWorkload,
    ParseError,
    QueueFull,
    SchemaError,
    SpmOutOfRange,
    TimeRegression,
    UnmappedAddress,
)
from .harness import cmd_compare, cmd_run, cmd_sweep, run_amu, run_baseline
from .isa import GuestApi
from .latency import Bimodal, Constant, LogNormal, Scripted, Uniform, sample_latency
from .machine import (
    AccessPattern,
    AmuMachine,
    CompletionQueue,
    MachineParams,
    MemAccessConfig,
    PatternKind,
    RequestDescriptor,
    RequestKind,
    RequestState,
    SpmSpace,
)
from .metrics import MetricsCollector, MetricsRecord
from .patterns import ExpandedPlan, contiguous_plan, expand_pattern
from .workloads import Workload, WorkloadSpec, make_workload

__version__ = "0.1.0"
