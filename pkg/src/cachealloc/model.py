"""Domain types and objective evaluators for per-file cache-buffer sizing.

A workload is a set of external files, each of ``size_blocks`` blocks and
scanned ``scan_count`` times, sharing ``free_memory`` blocks of main memory.
An allocation assigns every file a private cache buffer; the objectives
measure the external-memory calls that allocation implies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

REL_TOL = 1e-9


class CacheAllocError(Exception):
    """Base class for errors raised by this package."""


class BudgetTooSmallError(CacheAllocError, ValueError):
    """Free memory cannot give every file its one-block minimum buffer."""

    def __init__(self, free_memory, file_count):
        self.free_memory = free_memory
        self.file_count = file_count
        super().__init__(
            f"budget below file count: free_memory={free_memory} < {file_count} files"
        )


class InfeasibleAllocationError(CacheAllocError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"infeasible allocation: {detail}")


def _is_whole(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, int):
        return True
    return isinstance(x, float) and x.is_integer()


@dataclass(frozen=True)
class FileSpec:
    name: str
    size_blocks: int
    scan_count: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("file name must be a non-empty string")
        for attr in ("size_blocks", "scan_count"):
            value = getattr(self, attr)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"{attr} of {self.name!r} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{attr} of {self.name!r} must be >= 1, got {value}")


@dataclass(frozen=True)
class Workload:
    files: tuple
    free_memory: int

    def __post_init__(self):
        object.__setattr__(self, "files", tuple(self.files))
        if not self.files:
            raise ValueError("workload needs at least one file")
        if isinstance(self.free_memory, bool) or not isinstance(self.free_memory, int):
            raise ValueError(f"free_memory must be an integer, got {self.free_memory!r}")
        names = [f.name for f in self.files]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate file names: {', '.join(dupes)}")
        if self.free_memory < len(self.files):
            raise BudgetTooSmallError(self.free_memory, len(self.files))

    @classmethod
    def from_vectors(cls, sizes, free_memory, scan_counts=None, names=None):
        """Build a workload from parallel W and N vectors (N defaults to all ones)."""
        sizes = list(sizes)
        if scan_counts is None:
            scan_counts = [1] * len(sizes)
        if names is None:
            names = [f"file{i}" for i in range(len(sizes))]
        files = [FileSpec(n, int(w), int(c)) for n, w, c in zip(names, sizes, scan_counts)]
        return cls(tuple(files), int(free_memory))

    @property
    def count(self) -> int:
        return len(self.files)

    @property
    def sizes(self) -> tuple:
        return tuple(f.size_blocks for f in self.files)

    @property
    def scan_counts(self) -> tuple:
        return tuple(f.scan_count for f in self.files)

    @property
    def total_size(self) -> int:
        return sum(self.sizes)

    @property
    def budget(self) -> int:
        # Memory beyond the total file size cannot be used by any buffer.
        return min(self.free_memory, self.total_size)


@dataclass(frozen=True)
class Allocation:
    buffers: tuple

    def __post_init__(self):
        object.__setattr__(self, "buffers", tuple(self.buffers))

    @classmethod
    def of_integers(cls, values):
        return cls(tuple(int(v) for v in values))

    @property
    def integral(self) -> bool:
        return all(_is_whole(u) for u in self.buffers)

    def __len__(self):
        return len(self.buffers)

    def __iter__(self):
        return iter(self.buffers)

    def __getitem__(self, i):
        return self.buffers[i]


@dataclass(frozen=True)
class Violation:
    constraint: str  # "length" | "lower" | "upper" | "budget"
    index: int | None
    detail: str

    def __str__(self):
        where = "" if self.index is None else f" at index {self.index}"
        return f"{self.constraint} violation{where}: {self.detail}"


@dataclass(frozen=True)
class ObjectiveReport:
    f1: float
    f2: float
    f3: float
    f4: float
    per_file_ratio: tuple = field(default=())
    per_file_utilization: tuple = field(default=())
    cached_flags: tuple = field(default=())


@dataclass(frozen=True)
class ComparisonStandards:
    """Ideal and worst points of the per-file criteria space ``U_i -> max``.

    ``standard_a`` is every buffer as large as its file, ``standard_b`` the
    one-block floor.
    """

    standard_a: tuple
    standard_b: tuple

    @classmethod
    def for_workload(cls, workload: Workload) -> "ComparisonStandards":
        return cls(
            tuple(float(w) for w in workload.sizes),
            tuple(1.0 for _ in workload.files),
        )

    def distance_to_ideal(self, alloc: Allocation) -> float:
        return math.sqrt(sum((a - u) ** 2 for a, u in zip(self.standard_a, alloc)))


class Objective(Enum):
    F1 = "f1"
    F2 = "f2"
    F3 = "f3"
    F4 = "f4"

    def evaluate(self, workload: Workload, alloc: Allocation) -> float:
        return _EVALUATORS[self](workload, alloc)


def _close(a, b) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=0.0)


def check_feasible(workload: Workload, alloc: Allocation) -> list:
    """Return every breached constraint; an empty list means feasible.

    Integral allocations are held to the budget exactly, real ones to a
    relative tolerance of 1e-9.
    """
    sizes = workload.sizes
    if len(alloc.buffers) != len(sizes):
        return [
            Violation(
                "length",
                None,
                f"allocation has {len(alloc.buffers)} entries for {len(sizes)} files",
            )
        ]
    exact = alloc.integral
    violations = []
    for i, (u, w) in enumerate(zip(alloc.buffers, sizes)):
        if not isinstance(u, (int, float)) or isinstance(u, bool) or not math.isfinite(u):
            violations.append(Violation("lower", i, f"buffer {u!r} is not a finite number"))
            continue
        if u < 1 and (exact or not _close(u, 1.0)):
            violations.append(Violation("lower", i, f"buffer {u} < 1"))
        if u > w and (exact or not _close(u, w)):
            violations.append(Violation("upper", i, f"buffer {u} > file size {w}"))
    if violations:
        return violations
    total = sum(alloc.buffers)
    target = workload.budget
    if (total != target) if exact else not _close(total, target):
        violations.append(Violation("budget", None, f"sum {total} != {target}"))
    return violations


def _require_feasible(workload, alloc):
    violations = check_feasible(workload, alloc)
    if violations:
        raise InfeasibleAllocationError(violations)


def cached_flags(workload: Workload, alloc: Allocation) -> tuple:
    """y_i = signum(W_i - U_i), which is 0 for a fully cached file and 1 otherwise."""
    exact = alloc.integral
    flags = []
    for u, w in zip(alloc.buffers, workload.sizes):
        full = (u == w) if exact else _close(u, w)
        flags.append(0 if full else 1)
    return tuple(flags)


def _terms(workload, alloc):
    ratios = tuple(w / u for w, u in zip(workload.sizes, alloc.buffers))
    return ratios, cached_flags(workload, alloc)


def evaluate_f1(workload: Workload, alloc: Allocation) -> float:
    """Total external-memory calls, sum of N_i * W_i/U_i over uncached files."""
    _require_feasible(workload, alloc)
    ratios, ys = _terms(workload, alloc)
    return float(sum(r * n * y for r, n, y in zip(ratios, workload.scan_counts, ys)))


def evaluate_f2(workload: Workload, alloc: Allocation) -> float:
    _require_feasible(workload, alloc)
    ratios, _ = _terms(workload, alloc)
    return float(max(ratios))


def evaluate_f3(workload: Workload, alloc: Allocation) -> float:
    _require_feasible(workload, alloc)
    ratios, ys = _terms(workload, alloc)
    return float(max(n * y * r for r, n, y in zip(ratios, workload.scan_counts, ys)))


def evaluate_f4(workload: Workload, alloc: Allocation) -> float:
    """Squared distance from the allocation to the all-files-cached point."""
    _require_feasible(workload, alloc)
    return float(sum((w - u) ** 2 for w, u in zip(workload.sizes, alloc.buffers)))


def evaluate_all(workload: Workload, alloc: Allocation) -> ObjectiveReport:
    _require_feasible(workload, alloc)
    ratios, ys = _terms(workload, alloc)
    ns = workload.scan_counts
    return ObjectiveReport(
        f1=float(sum(r * n * y for r, n, y in zip(ratios, ns, ys))),
        f2=float(max(ratios)),
        f3=float(max(n * y * r for r, n, y in zip(ratios, ns, ys))),
        f4=float(sum((w - u) ** 2 for w, u in zip(workload.sizes, alloc.buffers))),
        per_file_ratio=ratios,
        per_file_utilization=tuple(u / w for u, w in zip(alloc.buffers, workload.sizes)),
        cached_flags=ys,
    )


_EVALUATORS = {
    Objective.F1: evaluate_f1,
    Objective.F2: evaluate_f2,
    Objective.F3: evaluate_f3,
    Objective.F4: evaluate_f4,
}
