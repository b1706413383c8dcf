"""Exception hierarchy for the simulator.

Guest-visible issue failures (QueueFull, SpmOutOfRange, BadConfig, BadPattern)
are raised from GuestApi calls; everything else signals misuse of the
simulator's own surfaces (bad configs, bad event times, bad trace files).
getfin is the one deliberate exception to exception-style errors: it returns
0 in-band when no request has finished, matching the instruction contract.
"""


class AmuSimError(Exception):
    """Base class for every error raised by this package."""


class SpmOutOfRange(AmuSimError):
    """A scratchpad access falls outside the current SPM partition."""


class BadIndex(AmuSimError):
    """Register-file index out of bounds (MACR or APR)."""


class BadConfig(AmuSimError):
    """A memory-access configuration is invalid or unresolvable."""


class BadPattern(AmuSimError):
    """An access pattern cannot be expanded (zero count, bad addresses)."""


class BadSize(AmuSimError):
    """A repartition size is not representable (quantum, total capacity)."""


class Busy(AmuSimError):
    """Operation requires a quiescent request table but requests are live."""


class QueueFull(AmuSimError):
    """The AMU request table is at max_outstanding; caller must poll and retry."""


class TimeRegression(AmuSimError):
    """An event was scheduled in the simulated past."""


class BadParams(AmuSimError):
    """Latency-distribution parameters are invalid."""


class UnmappedAddress(AmuSimError):
    """No far-memory node owns the requested address range."""


class BadSpec(AmuSimError):
    """A workload specification failed validation."""


class BadAxis(AmuSimError):
    """Sweep axis does not apply to the given configuration."""


class IncomparableWorkload(AmuSimError):
    """Workload has no baseline trace form, so compare cannot run."""


class ConfigError(AmuSimError):
    """Base class for run-configuration problems."""


class ParseError(ConfigError):
    """Config file is not valid JSON."""


class SchemaError(ConfigError):
    """Config contents violate the schema; message names the key path."""
