"""Block-level two-level memory simulator.

Each file owns a private buffer of ``U_i`` blocks in main memory. A trace
of ``(file, block)`` references is replayed against those buffers and
every transfer from external storage is counted as one call.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum

from .model import Allocation, CacheAllocError, InfeasibleAllocationError, Workload, check_feasible


class Interleaving(Enum):
    CONCATENATED = "concat"
    ROUND_ROBIN = "round-robin"


class FetchPolicy(Enum):
    CHUNKED_SEQUENTIAL = "chunked"
    LRU_BLOCK = "lru-block"


class CostModelMismatchError(CacheAllocError, AssertionError):
    pass


@dataclass(frozen=True)
class TraceDerivation:
    scan_counts: tuple
    interleaving: Interleaving


@dataclass(frozen=True)
class AccessTrace:
    references: tuple
    derivation: TraceDerivation

    def __len__(self):
        return len(self.references)


@dataclass(frozen=True)
class SimulationResult:
    per_file_calls: tuple
    total_calls: int
    policy: FetchPolicy
    blocks_transferred: int


@dataclass(frozen=True)
class CostModelCheck:
    simulated_total: int
    predicted_f1: int
    fully_cached_count: int

    @property
    def consistent(self) -> bool:
        return self.simulated_total == self.predicted_f1 + self.fully_cached_count


def generate_trace(workload: Workload, interleaving: Interleaving = Interleaving.CONCATENATED) -> AccessTrace:
    """Full sequential scans: file i contributes N_i runs of blocks 0..W_i-1."""
    sizes = workload.sizes
    scans = workload.scan_counts
    refs = []
    if interleaving is Interleaving.CONCATENATED:
        for f, (w, n) in enumerate(zip(sizes, scans)):
            for _ in range(n):
                refs.extend((f, b) for b in range(w))
    elif interleaving is Interleaving.ROUND_ROBIN:
        for rnd in range(max(scans)):
            for f, (w, n) in enumerate(zip(sizes, scans)):
                if rnd < n:
                    refs.extend((f, b) for b in range(w))
    else:
        raise ValueError(f"unknown interleaving {interleaving!r}")
    return AccessTrace(tuple(refs), TraceDerivation(scans, interleaving))


def _check_inputs(workload, alloc, trace):
    if not alloc.integral:
        raise ValueError("simulation needs an integral allocation")
    violations = check_feasible(workload, alloc)
    if violations:
        raise InfeasibleAllocationError(violations)
    sizes = workload.sizes
    for f, b in trace.references:
        if not (0 <= f < len(sizes) and 0 <= b < sizes[f]):
            raise ValueError(f"trace reference ({f}, {b}) lies outside the workload")


def simulate(workload: Workload, alloc: Allocation, trace: AccessTrace,
             policy: FetchPolicy = FetchPolicy.CHUNKED_SEQUENTIAL) -> SimulationResult:
    _check_inputs(workload, alloc, trace)
    sizes = workload.sizes
    caps = [int(u) for u in alloc.buffers]
    calls = [0] * len(sizes)
    moved = 0

    if policy is FetchPolicy.CHUNKED_SEQUENTIAL:
        # resident[f] = [lo, hi): the one chunk currently in file f's buffer
        resident = [(0, 0)] * len(sizes)
        for f, b in trace.references:
            lo, hi = resident[f]
            if lo <= b < hi:
                continue
            end = min(b + caps[f], sizes[f])
            resident[f] = (b, end)
            calls[f] += 1
            moved += end - b
    elif policy is FetchPolicy.LRU_BLOCK:
        buffers = [OrderedDict() for _ in sizes]
        for f, b in trace.references:
            buf = buffers[f]
            if b in buf:
                buf.move_to_end(b)
                continue
            if len(buf) >= caps[f]:
                buf.popitem(last=False)
            buf[b] = None
            calls[f] += 1
            moved += 1
    else:
        raise ValueError(f"unknown policy {policy!r}")

    return SimulationResult(tuple(calls), sum(calls), policy, moved)


def predicted_calls(workload: Workload, alloc: Allocation) -> int:
    """Sum of N_i * ceil(W_i/U_i) * y_i, the chunked cost of uncached files."""
    total = 0
    for w, n, u in zip(workload.sizes, workload.scan_counts, alloc.buffers):
        u = int(u)
        if u < w:
            total += n * -(-w // u)
    return total


def validate_cost_model(workload: Workload, alloc: Allocation,
                        interleaving: Interleaving = Interleaving.CONCATENATED) -> CostModelCheck:
    """Reconcile a chunked simulation with the analytic call count.

    A fully cached file costs nothing analytically but one initial load in
    the simulator, so the two must differ by exactly the number of such files.
    """
    trace = generate_trace(workload, interleaving)
    result = simulate(workload, alloc, trace, FetchPolicy.CHUNKED_SEQUENTIAL)
    full = sum(1 for w, u in zip(workload.sizes, alloc.buffers) if int(u) == w)
    check = CostModelCheck(result.total_calls, predicted_calls(workload, alloc), full)
    if not check.consistent:
        raise CostModelMismatchError(
            f"simulated {check.simulated_total} calls, expected "
            f"{check.predicted_f1} + {check.fully_cached_count}"
        )
    return check
