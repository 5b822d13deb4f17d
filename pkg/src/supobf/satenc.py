"""CNF encoding of bounded behavior-preserving supervisor existence.

The encoding searches for an ``n``-state supervisor (plus an implicit dump
state with index ``n``) whose completion separates the two marked
languages of a dual-marked product automaton, while satisfying the
controllability and observability constraints of the target control
constraint.

Variables:

* transition variables ``t(i, e, j)``: candidate state ``i`` moves to
  ``j`` on event ``e``.  Only observable events at non-dump rows are real
  solver variables; unobservable events are compile-time self-loop
  constants and the dump row is constantly absorbing.
* reachability variables ``r(i, y)``: lower bounds on reachability of the
  pair (candidate state ``i``, product state ``y``) in the synchronization
  of the candidate's completion with the product.

Clause groups:

* transition-function clauses: per row, at-most-one (pairwise) and
  at-least-one successor over ``j in [0, n]``;
* controllability clauses: uncontrollable observable events must have a
  non-dump successor;
* separation clauses: reachability propagation from the initial pair,
  no dump row on A-marked product states, no live row on B-marked ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .automata import AutomatonError, DualMarkedDFA, PartialDFA
from .control import ControlConstraint
from .sat import BackendError, SatSolver

Clause = list[int]


@dataclass
class CnfInstance:
    num_vars: int
    clauses: list[Clause] = field(default_factory=list)

    def extend(self, clauses: Iterable[Clause]) -> None:
        for cl in clauses:
            lits = set(cl)
            if any(-l in lits for l in lits):
                raise AutomatonError("tautological clause")
            if any(abs(l) > self.num_vars or l == 0 for l in cl):
                raise AutomatonError("literal outside allocated variables")
            self.clauses.append(list(cl))


class VarTable:
    """Variable numbering for one encoding instance.

    Transition variables are allocated first (row, then alphabet order,
    then successor), reachability variables after (row, then product-state
    order), so emitted DIMACS files are reproducible.
    """

    def __init__(self, n: int, alphabet, constraint: ControlConstraint,
                 num_product_states: int = 0):
        if n < 1:
            raise AutomatonError("state bound must be at least 1")
        constraint.check_events(alphabet)
        self.n = n
        self.alphabet = alphabet
        self.constraint = constraint
        self.num_product_states = num_product_states
        self.observable = [e for e in alphabet.events if e in constraint.observable]
        self.unobservable = [e for e in alphabet.events
                             if e not in constraint.observable]
        self._t: dict[tuple[int, str, int], int] = {}
        nxt = 1
        for i in range(n):
            for e in self.observable:
                for j in range(n + 1):
                    self._t[(i, e, j)] = nxt
                    nxt += 1
        self._r_base = nxt
        nxt += (n + 1) * num_product_states
        self.num_vars = nxt - 1

    def trans_var(self, i: int, event: str, j: int) -> Union[int, bool]:
        """Variable index for t(i, event, j), or a boolean constant for the
        unobservable rows and the dump row."""
        if i == self.n:
            return j == self.n
        if event not in self.constraint.observable:
            return i == j
        return self._t[(i, event, j)]

    def reach_var(self, i: int, y: int) -> int:
        if not (0 <= i <= self.n and 0 <= y < self.num_product_states):
            raise AutomatonError(f"r({i},{y}) out of range")
        return self._r_base + i * self.num_product_states + y

    def iter_trans_vars(self):
        for (i, e, j), v in self._t.items():
            yield i, e, j, v

    def iter_reach_vars(self):
        for i in range(self.n + 1):
            for y in range(self.num_product_states):
                yield i, y, self.reach_var(i, y)


def transition_function_clauses(vt: VarTable) -> list[Clause]:
    """Per observable row: pairwise at-most-one and at-least-one successor,
    making the completed candidate's map a total function."""
    out = []
    n = vt.n
    for i in range(n):
        for e in vt.observable:
            row = [vt.trans_var(i, e, j) for j in range(n + 1)]
            for a in range(len(row)):
                for b in range(a + 1, len(row)):
                    out.append([-row[a], -row[b]])
            out.append(list(row))
    return out


def controllability_clauses(vt: VarTable) -> list[Clause]:
    """Uncontrollable observable events need a live (non-dump) successor
    in every row; unobservable ones are self-loop constants already."""
    out = []
    events = [e for e in vt.observable if e not in vt.constraint.controllable]
    for i in range(vt.n):
        for e in events:
            out.append([vt.trans_var(i, e, j) for j in range(vt.n)])
    return out


def separation_clauses(vt: VarTable, product: DualMarkedDFA) -> list[Clause]:
    """Reachability propagation plus the two marking prohibitions.

    For every candidate row pair (i, j), product edge y1 -e-> y2:
    ``r(i,y1) ∧ t(i,e,j) → r(j,y2)``, with constant transition variables
    folded away; then ``¬r(n, y)`` on A-marked states and ``¬r(i, y)`` for
    live rows on B-marked states.
    """
    if vt.num_product_states != product.n_states:
        raise AutomatonError("variable table sized for a different product")
    n = vt.n
    out = [[vt.reach_var(0, product.initial)]]
    for y1 in range(product.n_states):
        for e in product.alphabet.events:
            y2 = product.trans[(y1, e)]
            for i in range(n + 1):
                for j in range(n + 1):
                    t = vt.trans_var(i, e, j)
                    if t is False or (i == j and y1 == y2):
                        continue  # impossible edge, or a tautology
                    if t is True:
                        out.append([-vt.reach_var(i, y1), vt.reach_var(j, y2)])
                    else:
                        out.append([-vt.reach_var(i, y1), -t, vt.reach_var(j, y2)])
    for y in sorted(product.mark_a):
        out.append([-vt.reach_var(n, y)])
    for y in sorted(product.mark_b):
        for i in range(n):
            out.append([-vt.reach_var(i, y)])
    return out


def encode(n: int, product: DualMarkedDFA,
           constraint: ControlConstraint) -> tuple[CnfInstance, VarTable]:
    """Full instance: satisfiable iff an ``n``-bounded behavior-preserving
    supervisor over ``constraint`` exists."""
    vt = VarTable(n, product.alphabet, constraint, product.n_states)
    cnf = CnfInstance(vt.num_vars)
    cnf.extend(transition_function_clauses(vt))
    cnf.extend(controllability_clauses(vt))
    cnf.extend(separation_clauses(vt, product))
    return cnf, vt


@dataclass(frozen=True)
class DecodedSupervisor:
    """Candidate read back from a model: the reachable part only, with
    states renamed ``s<original row>``."""

    automaton: PartialDFA
    rows: tuple[int, ...]  # original candidate rows, ascending


def decode_model(model: dict[int, bool], vt: VarTable) -> DecodedSupervisor:
    """Translate a model into a partial supervisor automaton.

    Successors into the dump row become undefined transitions; unobservable
    events self-loop everywhere (the variable table carries the target
    constraint); only rows reachable from row 0 are kept.
    """
    n = vt.n
    trans_full: dict[tuple[int, str], int] = {}
    for i in range(n):
        for e in vt.observable:
            hits = [j for j in range(n + 1) if model[vt.trans_var(i, e, j)]]
            if len(hits) != 1:
                raise BackendError(f"row ({i},{e}) has {len(hits)} successors")
            if hits[0] < n:
                trans_full[(i, e)] = hits[0]
    rows = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for e in vt.observable:
            j = trans_full.get((i, e))
            if j is not None and j not in rows:
                rows.add(j)
                frontier.append(j)
    order = sorted(rows)
    remap = {i: k for k, i in enumerate(order)}
    trans = {(remap[i], e): remap[j]
             for (i, e), j in trans_full.items() if i in rows}
    for k in range(len(order)):
        for e in vt.unobservable:
            trans[(k, e)] = k
    aut = PartialDFA(vt.alphabet, tuple(f"s{i}" for i in order), trans, 0, None)
    return DecodedSupervisor(aut, tuple(order))


def blocking_clause(model: dict[int, bool], vt: VarTable,
                    rows: Iterable[int]) -> Clause:
    """Clause forbidding every model that repeats this model's transition
    function on the given (reachable) candidate rows."""
    out = []
    for i in rows:
        for e in vt.observable:
            hit = next(j for j in range(vt.n + 1) if model[vt.trans_var(i, e, j)])
            out.append(-vt.trans_var(i, e, hit))
    return out


def solve_instance(cnf: CnfInstance, backend: Optional[SatSolver] = None):
    """Load an instance into a backend (default: the in-tree solver) and
    return the loaded backend, ready for solve()/blocking."""
    backend = backend or SatSolver()
    backend.reserve(cnf.num_vars)
    for cl in cnf.clauses:
        backend.add_clause(cl)
    return backend


def export_dimacs(cnf: CnfInstance, vt: Optional[VarTable] = None) -> str:
    """Standard DIMACS text; with a variable table, one comment line per
    allocated variable (``c t <row> <event> <row>`` / ``c r <row> <y>``)."""
    lines = []
    if vt is not None:
        for i, e, j, v in vt.iter_trans_vars():
            lines.append(f"c t {i} {e} {j} = {v}")
        for i, y, v in vt.iter_reach_vars():
            lines.append(f"c r {i} {y} = {v}")
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    for cl in cnf.clauses:
        lines.append(" ".join(str(l) for l in cl) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfInstance:
    num_vars = 0
    num_clauses = None
    clauses: list[Clause] = []
    pending: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(pending)
                pending = []
            else:
                pending.append(lit)
    if pending:
        clauses.append(pending)
    if num_clauses is not None and num_clauses != len(clauses):
        raise ValueError(f"header announced {num_clauses} clauses, found {len(clauses)}")
    cnf = CnfInstance(num_vars)
    cnf.extend(clauses)
    return cnf
