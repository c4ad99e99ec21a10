"""Closed-form buffer allocators and the repairs that make them feasible.

Each strategy has an analytic optimum over the budget equality alone.
Those optima can leave a buffer below one block or above its file, so
:func:`clamp_redistribute` pins offending coordinates to their bound and
re-solves the same closed form on the rest.
"""
from __future__ import annotations

import math
from enum import Enum

from .model import Allocation, BudgetTooSmallError, Objective, Workload


class StrategyKind(Enum):
    TOTAL_CALLS = "total-calls"
    MINIMAX_RATIO = "minimax-ratio"
    WEIGHTED_MINIMAX = "weighted-minimax"
    NEAREST_IDEAL = "nearest-ideal"

    @property
    def objective(self) -> Objective:
        """The objective this strategy's closed form optimizes."""
        return _OBJECTIVE_OF[self]

    @classmethod
    def for_objective(cls, objective: Objective) -> "StrategyKind":
        return next(s for s, o in _OBJECTIVE_OF.items() if o is objective)


_OBJECTIVE_OF = {
    StrategyKind.TOTAL_CALLS: Objective.F1,
    StrategyKind.MINIMAX_RATIO: Objective.F2,
    StrategyKind.WEIGHTED_MINIMAX: Objective.F3,
    StrategyKind.NEAREST_IDEAL: Objective.F4,
}


def _weights(strategy, sizes, scans):
    if strategy is StrategyKind.TOTAL_CALLS:
        return [math.sqrt(n * w) for w, n in zip(sizes, scans)]
    if strategy is StrategyKind.MINIMAX_RATIO:
        return list(sizes)
    if strategy is StrategyKind.WEIGHTED_MINIMAX:
        return [n * w for w, n in zip(sizes, scans)]
    raise ValueError(f"{strategy} is not a proportional strategy")


def solve_closed_form(strategy: StrategyKind, sizes, scans, budget) -> list:
    """Unconstrained optimum of ``strategy`` for the given files and budget.

    Proportional strategies split the budget by weight (sqrt(N*W), W, or
    N*W); nearest-ideal removes an equal share of the shortfall from
    every file.
    """
    if strategy is StrategyKind.NEAREST_IDEAL:
        shortfall = sum(sizes) - budget
        return [w - shortfall / len(sizes) for w in sizes]
    weights = _weights(strategy, sizes, scans)
    total = sum(weights)
    return [budget * x / total for x in weights]


def closed_form(workload: Workload, strategy: StrategyKind) -> list:
    """Raw closed-form buffers for the whole workload, before any repair."""
    return solve_closed_form(strategy, workload.sizes, workload.scan_counts, workload.budget)


def clamp_redistribute(workload: Workload, raw, strategy: StrategyKind) -> Allocation:
    """Pin bound-violating buffers and re-solve the closed form on the others.

    When a round has violations on both sides, only the side the final
    solution must keep is pinned: if the clipped sum falls short of the
    budget the level has to rise, so upper pins are permanent and lower
    ones are not (and vice versa). Every round pins at least one file, so
    the loop ends within H rounds.
    """
    sizes = workload.sizes
    scans = workload.scan_counts
    count = len(sizes)
    budget = workload.budget
    if workload.free_memory < count:
        raise BudgetTooSmallError(workload.free_memory, count)
    values = [float(x) for x in raw]
    if len(values) != count:
        raise ValueError(f"raw allocation has {len(values)} entries for {count} files")
    if not math.isclose(sum(values), budget, rel_tol=1e-9):
        raise ValueError(f"raw allocation sums to {sum(values)}, expected {budget}")

    free = list(range(count))
    while free:
        excess = sum(max(values[i] - sizes[i], 0.0) for i in free)
        deficit = sum(max(1.0 - values[i], 0.0) for i in free)
        if excess == 0.0 and deficit == 0.0:
            break
        pin_upper = excess >= deficit
        pin_lower = deficit >= excess
        still_free = []
        for i in free:
            if pin_upper and values[i] > sizes[i]:
                values[i] = float(sizes[i])
            elif pin_lower and values[i] < 1.0:
                values[i] = 1.0
            else:
                still_free.append(i)
        free = still_free
        if not free:
            break
        pinned = set(range(count)).difference(free)
        remaining = budget - sum(values[i] for i in pinned)
        solved = solve_closed_form(
            strategy, [sizes[i] for i in free], [scans[i] for i in free], remaining
        )
        for i, u in zip(free, solved):
            values[i] = u
    return Allocation(tuple(values))


def allocate(workload: Workload, strategy: StrategyKind) -> Allocation:
    """Real-valued optimal buffers for ``strategy``, repaired to be feasible."""
    if workload.free_memory < workload.count:
        raise BudgetTooSmallError(workload.free_memory, workload.count)
    if workload.free_memory >= workload.total_size:
        # Every file fits: full caching is optimal for all four objectives.
        return Allocation(tuple(float(w) for w in workload.sizes))
    return clamp_redistribute(workload, closed_form(workload, strategy), strategy)


def allocate_total_calls(workload: Workload) -> Allocation:
    return allocate(workload, StrategyKind.TOTAL_CALLS)


def allocate_minimax_ratio(workload: Workload) -> Allocation:
    return allocate(workload, StrategyKind.MINIMAX_RATIO)


def allocate_weighted_minimax(workload: Workload) -> Allocation:
    return allocate(workload, StrategyKind.WEIGHTED_MINIMAX)


def allocate_nearest_ideal(workload: Workload) -> Allocation:
    return allocate(workload, StrategyKind.NEAREST_IDEAL)


def round_to_integers(workload: Workload, real_alloc: Allocation) -> Allocation:
    """Largest-remainder rounding that keeps the exact budget and the bounds.

    Floors every entry (never below 1), then hands out the leftover blocks
    one at a time by descending fractional part, lower index first on ties,
    skipping files already at their size.
    """
    sizes = workload.sizes
    reals = [float(u) for u in real_alloc.buffers]
    ints = [min(w, max(1, math.floor(u))) for u, w in zip(reals, sizes)]
    leftover = workload.budget - sum(ints)
    order = sorted(range(len(reals)), key=lambda i: (-(reals[i] - ints[i]), i))
    while leftover > 0:
        progressed = False
        for i in order:
            if leftover == 0:
                break
            if ints[i] < sizes[i]:
                ints[i] += 1
                leftover -= 1
                progressed = True
        if not progressed:
            raise ValueError("allocation cannot absorb the budget within file sizes")
    while leftover < 0:
        # Only reachable when tolerance-level overshoot pushed a floor past the budget.
        for i in reversed(order):
            if leftover == 0:
                break
            if ints[i] > 1:
                ints[i] -= 1
                leftover += 1
    return Allocation.of_integers(ints)
