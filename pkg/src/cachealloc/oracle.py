"""Exhaustive integer enumeration: ground truth for small workloads."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .model import Allocation, BudgetTooSmallError, CacheAllocError, Objective, Workload

ENUMERATION_LIMIT = 10**7


class EnumerationTooLargeError(CacheAllocError):
    def __init__(self, bound, limit=ENUMERATION_LIMIT):
        self.bound = bound
        self.limit = limit
        super().__init__(f"enumeration bound {bound} exceeds oracle limit {limit}")


class CriteriaMode(Enum):
    SYSTEM1 = "system1"  # minimize every W_i/U_i
    SYSTEM3 = "system3"  # maximize every U_i


@dataclass(frozen=True)
class OracleResult:
    objective: Objective
    optimal_value: float
    optima: tuple
    instances_enumerated: int


@dataclass(frozen=True)
class ParetoFront:
    points: tuple
    criteria_mode: CriteriaMode


def enumeration_bound(workload: Workload) -> int:
    return math.prod(min(w, workload.free_memory) for w in workload.sizes)


def enumerate_feasible(workload: Workload, limit: int = ENUMERATION_LIMIT) -> Iterator[Allocation]:
    """Yield every integral feasible allocation in lexicographic order."""
    count = workload.count
    if workload.free_memory < count:
        raise BudgetTooSmallError(workload.free_memory, count)
    bound = enumeration_bound(workload)
    if bound > limit:
        raise EnumerationTooLargeError(bound, limit)
    return _compositions(workload.sizes, workload.budget)


def _compositions(sizes, total):
    count = len(sizes)
    # tail_cap[i]: most blocks files i.. can hold together
    tail_cap = [0] * (count + 1)
    for i in range(count - 1, -1, -1):
        tail_cap[i] = tail_cap[i + 1] + sizes[i]
    prefix = [0] * count

    def rec(i, remaining):
        if i == count - 1:
            prefix[i] = remaining
            yield Allocation(tuple(prefix))
            return
        rest = count - i - 1
        lo = max(1, remaining - tail_cap[i + 1])
        hi = min(sizes[i], remaining - rest)
        for u in range(lo, hi + 1):
            prefix[i] = u
            yield from rec(i + 1, remaining - u)

    yield from rec(0, total)


def brute_force_optimum(workload: Workload, objective: Objective) -> OracleResult:
    """Scan every feasible integral allocation, keeping all ties at 1e-9 relative."""
    best = math.inf
    optima = []
    seen = 0
    for alloc in enumerate_feasible(workload):
        seen += 1
        value = objective.evaluate(workload, alloc)
        if math.isclose(value, best, rel_tol=1e-9, abs_tol=1e-12):
            optima.append(alloc)
            best = min(best, value)
        elif value < best:
            best = value
            optima = [alloc]
    return OracleResult(objective, best, tuple(optima), seen)


def _criteria(points: np.ndarray, sizes: np.ndarray, mode: CriteriaMode) -> np.ndarray:
    # Returned matrix is "smaller is better" in every column.
    if mode is CriteriaMode.SYSTEM1:
        return sizes / points
    return -points


def nondominated(crit: np.ndarray, chunk: int = 128) -> np.ndarray:
    """Boolean mask of rows no other row dominates ("smaller is better" columns)."""
    keep = np.ones(len(crit), dtype=bool)
    for start in range(0, len(crit), chunk):
        block = crit[start:start + chunk]
        # le[j, k]: row k is at least as good as row start+j in every column
        le = np.all(crit[None, :, :] <= block[:, None, :], axis=2)
        lt = np.any(crit[None, :, :] < block[:, None, :], axis=2)
        keep[start:start + chunk] = ~np.any(le & lt, axis=1)
    return keep


def pareto_front(workload: Workload, mode: CriteriaMode) -> ParetoFront:
    """Nondominated feasible integral points, by pairwise comparison."""
    allocs = list(enumerate_feasible(workload))
    points = np.array([a.buffers for a in allocs], dtype=float)
    keep = nondominated(_criteria(points, np.array(workload.sizes, dtype=float), mode))
    return ParetoFront(tuple(a for a, k in zip(allocs, keep) if k), mode)
