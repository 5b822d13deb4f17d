"""Minimum-state resilient supervisor synthesis.

The search climbs candidate state sizes.  For each size it enumerates all
behavior-preserving supervisors of exactly that reachable size (all-SAT
with blocking clauses over the reachable transition function), runs the
non-attackability check on each, and returns the canonically smallest
resilient candidate at the first size that has one.  Exhausting every
smaller size is what makes the returned supervisor minimum-state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .automata import (PartialDFA, canonical_key, complete,
                       dual_marked_product, reachable_states)
from .control import (AttackConstraint, ControlConstraint, Supervisor,
                      closed_loop, validate_damage)
from .attack import non_attackable
from .sat import SatSolver
from .satenc import blocking_clause, decode_model, encode, solve_instance


@dataclass
class ObfuscationOptions:
    bisect: bool = False
    dedupe_isomorphic: bool = True
    enumeration_limit: Optional[int] = None  # SAT models per size


@dataclass
class ObfuscationRequest:
    plant: PartialDFA
    supervisor: Supervisor
    target_constraint: ControlConstraint
    attack: AttackConstraint
    damage: PartialDFA
    n_max: Optional[int] = None  # default: reachable size of the supervisor
    options: ObfuscationOptions = field(default_factory=ObfuscationOptions)


@dataclass
class SizeTrace:
    n: int
    candidates: int   # exact-size behavior-preserving supervisors
    tested: int       # non-attackability checks run
    resilient: int    # candidates that passed


@dataclass
class ObfuscationResult:
    found: bool
    supervisor: Optional[Supervisor]
    size: Optional[int]
    n_max: int
    candidates_tested: int
    trace: list[SizeTrace]
    solver_stats: dict
    truncated: bool = False


@dataclass
class EnumerationStats:
    models: int = 0
    truncated: bool = False
    solver: Optional[SatSolver] = None


def iter_size_candidates(plant: PartialDFA, sup_aut: PartialDFA,
                         constraint: ControlConstraint, n: int,
                         limit: Optional[int] = None,
                         stats: Optional[EnumerationStats] = None
                         ) -> Iterator[PartialDFA]:
    """Stream the behavior-preserving supervisors of exact reachable size
    ``n`` in solver order.

    Every model is blocked on its reachable transition function before
    re-solving; models whose reachable part is smaller than ``n`` are
    blocked but not yielded (they were enumerated at their own size).
    ``limit`` caps the number of SAT models taken from the solver.
    """
    if stats is None:
        stats = EnumerationStats()
    product = dual_marked_product(complete(plant), complete(sup_aut))
    cnf, vt = encode(n, product, constraint)
    backend = solve_instance(cnf)
    stats.solver = backend
    while backend.solve():
        stats.models += 1
        model = backend.model()
        decoded = decode_model(model, vt)
        backend.add_clause(blocking_clause(model, vt, decoded.rows))
        if len(decoded.rows) == n:
            yield decoded.automaton
        if limit is not None and stats.models >= limit:
            stats.truncated = True
            return


def behavior_preserving_supervisors(plant: PartialDFA, sup_aut: PartialDFA,
                                    constraint: ControlConstraint, n: int,
                                    dedupe_isomorphic: bool = True,
                                    limit: Optional[int] = None):
    """All behavior-preserving supervisors of exact reachable size ``n``,
    canonically sorted; returns (supervisors, truncated)."""
    stats = EnumerationStats()
    seen = set()
    out = []
    for cand in iter_size_candidates(plant, sup_aut, constraint, n, limit, stats):
        key = canonical_key(cand)
        if dedupe_isomorphic:
            if key in seen:
                continue
            seen.add(key)
        out.append((key, cand))
    out.sort(key=lambda kc: kc[0])
    return [c for _, c in out], stats.truncated


def is_size_feasible(plant: PartialDFA, sup_aut: PartialDFA,
                     constraint: ControlConstraint, n: int) -> bool:
    product = dual_marked_product(complete(plant), complete(sup_aut))
    cnf, _ = encode(n, product, constraint)
    return solve_instance(cnf).solve()


def min_preserving_size(plant: PartialDFA, sup_aut: PartialDFA,
                        constraint: ControlConstraint,
                        n_max: int) -> Optional[int]:
    """Smallest feasible size in [1, n_max], by bisection.

    Sound because feasibility is monotone in the bound: a smaller
    supervisor padded with an unreachable state stays a model.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    product = dual_marked_product(complete(plant), complete(sup_aut))

    def feasible(n):
        cnf, _ = encode(n, product, constraint)
        return solve_instance(cnf).solve()

    if not feasible(n_max):
        return None
    lo, hi = 1, n_max
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1
    return hi


def obfuscate(req: ObfuscationRequest,
              progress: Optional[Callable[[SizeTrace], None]] = None
              ) -> ObfuscationResult:
    """Search sizes 1..n_max for a minimum-state behavior-preserving,
    non-attackable supervisor over the target constraint."""
    plant = req.plant
    sup_aut = req.supervisor.automaton
    constraint = req.target_constraint
    req.attack.check_against(constraint)
    report = validate_damage(req.damage, closed_loop(plant, req.supervisor),
                             plant=plant)
    if not report.ok:
        raise ValueError("damage validation failed: " + "; ".join(report.problems))

    n_max = req.n_max if req.n_max is not None else len(reachable_states(sup_aut))
    if n_max < 1:
        raise ValueError("n_max must be at least 1")

    opts = req.options
    trace: list[SizeTrace] = []
    solver_stats = {"decisions": 0, "conflicts": 0, "propagations": 0,
                    "solves": 0, "models": 0}
    tested_total = 0
    truncated = False
    n_start = 1
    if opts.bisect:
        first = min_preserving_size(plant, sup_aut, constraint, n_max)
        if first is None:
            return ObfuscationResult(False, None, None, n_max, 0, trace,
                                     solver_stats, False)
        n_start = first

    for n in range(n_start, n_max + 1):
        stats = EnumerationStats()
        seen = set()
        row = SizeTrace(n, 0, 0, 0)
        winner = None  # (canonical key, supervisor)
        for cand in iter_size_candidates(plant, sup_aut, constraint, n,
                                         opts.enumeration_limit, stats):
            key = canonical_key(cand)
            if opts.dedupe_isomorphic:
                if key in seen:
                    continue
                seen.add(key)
            row.candidates += 1
            candidate = Supervisor(cand, constraint)
            row.tested += 1
            tested_total += 1
            verdict = non_attackable(plant, candidate, req.damage, req.attack,
                                     validate=False)
            if verdict.non_attackable:
                row.resilient += 1
                if winner is None or key < winner[0]:
                    winner = (key, candidate)
        if stats.solver is not None:
            for k in ("decisions", "conflicts", "propagations", "solves"):
                solver_stats[k] += stats.solver.stats[k]
        solver_stats["models"] += stats.models
        truncated = truncated or stats.truncated
        trace.append(row)
        if progress is not None:
            progress(row)
        if winner is not None:
            return ObfuscationResult(True, winner[1], n, n_max, tested_total,
                                     trace, solver_stats, truncated)
    return ObfuscationResult(False, None, None, n_max, tested_total, trace,
                             solver_stats, truncated)
