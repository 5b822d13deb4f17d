"""Deterministic partial finite automata: alphabets, completion, products.

All values are immutable after construction; functions return fresh
automata and never mutate their inputs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


class AutomatonError(ValueError):
    """Structurally invalid alphabet, automaton or operation input."""


def _check_event_name(name: str) -> None:
    if not name or any(ch.isspace() for ch in name) or "#" in name:
        raise AutomatonError(f"bad event name: {name!r}")


@dataclass(frozen=True)
class Alphabet:
    """Ordered event set with controllability/observability/attack flags.

    Invariants: controllable events are observable, attackable events are
    controllable and attacker-observable, attacker-observable events are
    observable.
    """

    events: tuple[str, ...]
    controllable: frozenset[str] = frozenset()
    observable: frozenset[str] = frozenset()
    attackable: frozenset[str] = frozenset()
    attacker_observable: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.events:
            raise AutomatonError("alphabet must be nonempty")
        for e in self.events:
            _check_event_name(e)
        if len(set(self.events)) != len(self.events):
            raise AutomatonError("duplicate event names")
        evs = set(self.events)
        for label, group in (
            ("controllable", self.controllable),
            ("observable", self.observable),
            ("attackable", self.attackable),
            ("attacker-observable", self.attacker_observable),
        ):
            unknown = group - evs
            if unknown:
                raise AutomatonError(f"{label} events not in alphabet: {sorted(unknown)}")
        if not self.controllable <= self.observable:
            raise AutomatonError("controllable events must be observable")
        if not self.attackable <= self.attacker_observable:
            raise AutomatonError("attackable events must be attacker-observable")
        if not self.attackable <= self.controllable:
            raise AutomatonError("attackable events must be controllable")
        if not self.attacker_observable <= self.observable:
            raise AutomatonError("attacker-observable events must be observable")

    @classmethod
    def make(cls, events, controllable=(), observable=None, attackable=(),
             attacker_observable=None) -> "Alphabet":
        """Convenience constructor; observability defaults to all events."""
        events = tuple(events)
        if observable is None:
            observable = events
        if attacker_observable is None:
            attacker_observable = attackable
        return cls(events, frozenset(controllable), frozenset(observable),
                   frozenset(attackable), frozenset(attacker_observable))

    @property
    def uncontrollable(self) -> frozenset[str]:
        return frozenset(self.events) - self.controllable

    @property
    def unobservable(self) -> frozenset[str]:
        return frozenset(self.events) - self.observable

    def index(self, event: str) -> int:
        return self.events.index(event)


@dataclass(frozen=True)
class PartialDFA:
    """Deterministic partial automaton over an :class:`Alphabet`.

    States are integers ``0 .. len(names)-1``; ``names`` holds display
    names.  ``marked is None`` means every state is marked (the common,
    non-marking case).  The transition map must not be mutated after
    construction.
    """

    alphabet: Alphabet
    names: tuple[str, ...]
    trans: dict = field(default_factory=dict)  # (state, event) -> state
    initial: int = 0
    marked: Optional[frozenset[int]] = None

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise AutomatonError("automaton needs at least one state")
        if not 0 <= self.initial < n:
            raise AutomatonError(f"initial state {self.initial} out of range")
        evs = set(self.alphabet.events)
        for (src, ev), dst in self.trans.items():
            if not (0 <= src < n and 0 <= dst < n):
                raise AutomatonError(f"transition ({src},{ev},{dst}) out of range")
            if ev not in evs:
                raise AutomatonError(f"transition on unknown event {ev!r}")
        if self.marked is not None and not all(0 <= q < n for q in self.marked):
            raise AutomatonError("marked state out of range")

    @property
    def n_states(self) -> int:
        return len(self.names)

    def step(self, state: int, event: str) -> Optional[int]:
        return self.trans.get((state, event))

    def run(self, seq: Iterable[str]) -> Optional[int]:
        """State reached from the initial state, or None if the run dies."""
        state = self.initial
        for ev in seq:
            if ev not in self.alphabet.events:
                raise AutomatonError(f"unknown event {ev!r}")
            state = self.trans.get((state, ev))
            if state is None:
                return None
        return state

    def enabled(self, state: int) -> frozenset[str]:
        return frozenset(ev for (src, ev) in self.trans if src == state)

    def is_marked(self, state: int) -> bool:
        return self.marked is None or state in self.marked


@dataclass(frozen=True)
class CompleteDFA:
    """Completion of a partial automaton: a total map plus an absorbing,
    non-marked dump state.  The marked language equals the closed language
    of the original automaton."""

    inner: PartialDFA
    dump: int

    def __post_init__(self):
        p = self.inner
        for q in range(p.n_states):
            for ev in p.alphabet.events:
                if (q, ev) not in p.trans:
                    raise AutomatonError("completion is not total")
        for ev in p.alphabet.events:
            if p.trans[(self.dump, ev)] != self.dump:
                raise AutomatonError("dump state is not absorbing")
        if p.marked != frozenset(range(p.n_states)) - {self.dump}:
            raise AutomatonError("completion must mark exactly the non-dump states")

    @property
    def alphabet(self) -> Alphabet:
        return self.inner.alphabet

    @property
    def n_states(self) -> int:
        return self.inner.n_states

    def step(self, state: int, event: str) -> int:
        return self.inner.trans[(state, event)]


@dataclass(frozen=True)
class DualMarkedDFA:
    """Reachable product of two completions with two marking sets.

    ``mark_a`` holds pairs where both components are alive; ``mark_b``
    holds pairs where the first component is alive and the second is
    dumped.  The transition map is total on the retained (reachable)
    states.
    """

    alphabet: Alphabet
    names: tuple[str, ...]
    pairs: tuple[tuple[int, int], ...]
    trans: dict  # (state, event) -> state, total on reachable part
    initial: int
    mark_a: frozenset[int]
    mark_b: frozenset[int]

    def __post_init__(self):
        if self.mark_a & self.mark_b:
            raise AutomatonError("mark_a and mark_b must be disjoint")

    @property
    def n_states(self) -> int:
        return len(self.names)

    def step(self, state: int, event: str) -> int:
        return self.trans[(state, event)]


def complete(p: PartialDFA) -> CompleteDFA:
    """Add an absorbing dump state and redirect every undefined transition
    to it; the original states become the marked set."""
    n = p.n_states
    trans = dict(p.trans)
    for q in range(n):
        for ev in p.alphabet.events:
            trans.setdefault((q, ev), n)
    for ev in p.alphabet.events:
        trans[(n, ev)] = n
    inner = PartialDFA(p.alphabet, p.names + ("dump",), trans, p.initial,
                       frozenset(range(n)))
    return CompleteDFA(inner, n)


def strip_dump(c: CompleteDFA) -> PartialDFA:
    """Recover the partial automaton by deleting the dump state and all
    transitions touching it."""
    p = c.inner
    keep = [q for q in range(p.n_states) if q != c.dump]
    remap = {q: i for i, q in enumerate(keep)}
    trans = {(remap[src], ev): remap[dst]
             for (src, ev), dst in p.trans.items()
             if src != c.dump and dst != c.dump}
    names = tuple(p.names[q] for q in keep)
    return PartialDFA(p.alphabet, names, trans, remap[p.initial], None)


def totalize(p: PartialDFA, sink_name: str = "sink") -> PartialDFA:
    """Make the transition map total by adding a non-marked absorbing sink,
    preserving the original marked set.  Used for damage automata."""
    if is_total(p):
        return p
    while sink_name in p.names:
        sink_name += "'"
    n = p.n_states
    trans = dict(p.trans)
    for q in range(n):
        for ev in p.alphabet.events:
            trans.setdefault((q, ev), n)
    for ev in p.alphabet.events:
        trans[(n, ev)] = n
    marked = p.marked if p.marked is not None else frozenset(range(n))
    return PartialDFA(p.alphabet, p.names + (sink_name,), trans, p.initial,
                      frozenset(marked))


def is_total(p: PartialDFA) -> bool:
    return all((q, ev) in p.trans
               for q in range(p.n_states) for ev in p.alphabet.events)


def _merge_alphabets(a: Alphabet, b: Alphabet) -> Alphabet:
    if a == b:
        return a
    events = list(a.events) + [e for e in b.events if e not in a.events]
    return Alphabet(tuple(events),
                    a.controllable | b.controllable,
                    a.observable | b.observable,
                    a.attackable | b.attackable,
                    a.attacker_observable | b.attacker_observable)


def sync_product(a: PartialDFA, b: PartialDFA) -> PartialDFA:
    """Synchronous product, retaining only the reachable pairs.

    Shared events move both components, private events move one.  The
    result is marked only if at least one operand carries a marked set,
    in which case a pair is marked when both components are.
    """
    alphabet = _merge_alphabets(a.alphabet, b.alphabet)
    a_events = set(a.alphabet.events)
    b_events = set(b.alphabet.events)

    start = (a.initial, b.initial)
    index = {start: 0}
    order = [start]
    trans = {}
    queue = deque([start])
    while queue:
        pa, pb = queue.popleft()
        src = index[(pa, pb)]
        for ev in alphabet.events:
            if ev in a_events and ev in b_events:
                na, nb = a.step(pa, ev), b.step(pb, ev)
                if na is None or nb is None:
                    continue
            elif ev in a_events:
                na, nb = a.step(pa, ev), pb
                if na is None:
                    continue
            else:
                na, nb = pa, b.step(pb, ev)
                if nb is None:
                    continue
            dst = (na, nb)
            if dst not in index:
                index[dst] = len(order)
                order.append(dst)
                queue.append(dst)
            trans[(src, ev)] = index[dst]

    names = tuple(f"({a.names[pa]},{b.names[pb]})" for pa, pb in order)
    if a.marked is None and b.marked is None:
        marked = None
    else:
        marked = frozenset(i for i, (pa, pb) in enumerate(order)
                           if a.is_marked(pa) and b.is_marked(pb))
    return PartialDFA(alphabet, names, trans, 0, marked)


def dual_marked_product(gbar: CompleteDFA, sbar: CompleteDFA) -> DualMarkedDFA:
    """Reachable product of a completed plant and a completed supervisor,
    marking pairs that witness the two languages to be separated."""
    if gbar.alphabet.events != sbar.alphabet.events:
        raise AutomatonError("operands must share an alphabet")
    alphabet = gbar.alphabet
    start = (gbar.inner.initial, sbar.inner.initial)
    index = {start: 0}
    order = [start]
    trans = {}
    queue = deque([start])
    while queue:
        pg, ps = queue.popleft()
        src = index[(pg, ps)]
        for ev in alphabet.events:
            dst = (gbar.step(pg, ev), sbar.step(ps, ev))
            if dst not in index:
                index[dst] = len(order)
                order.append(dst)
                queue.append(dst)
            trans[(src, ev)] = index[dst]

    names = tuple(f"({gbar.inner.names[pg]},{sbar.inner.names[ps]})"
                  for pg, ps in order)
    mark_a = frozenset(i for i, (pg, ps) in enumerate(order)
                       if pg != gbar.dump and ps != sbar.dump)
    mark_b = frozenset(i for i, (pg, ps) in enumerate(order)
                       if pg != gbar.dump and ps == sbar.dump)
    return DualMarkedDFA(alphabet, names, tuple(order), trans, 0, mark_a, mark_b)


def language_equal(a: PartialDFA, b: PartialDFA):
    """Decide L(a) = L(b) for automata over the same alphabet.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is
    a shortest string in the symmetric difference (found by breadth-first
    search over the product of the two completions).
    """
    if a.alphabet.events != b.alphabet.events:
        raise AutomatonError("operands must share an alphabet")
    start = (a.initial, b.initial)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (pa, pb), path = queue.popleft()
        for ev in a.alphabet.events:
            na = a.step(pa, ev) if pa is not None else None
            nb = b.step(pb, ev) if pb is not None else None
            if na is None and nb is None:
                continue
            if na is None or nb is None:
                return False, path + (ev,)
            if (na, nb) not in seen:
                seen.add((na, nb))
                queue.append(((na, nb), path + (ev,)))
    return True, None


def accepts(a: PartialDFA, seq: Sequence[str], marked: bool = False) -> bool:
    """Membership of ``seq`` in L(a), or in L_m(a) when ``marked`` is set."""
    state = a.run(seq)
    if state is None:
        return False
    return a.is_marked(state) if marked else True


def reachable_states(p: PartialDFA) -> list[int]:
    """Reachable states in breadth-first order."""
    seen = {p.initial}
    order = [p.initial]
    queue = deque([p.initial])
    while queue:
        q = queue.popleft()
        for ev in p.alphabet.events:
            nxt = p.step(q, ev)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def canonical_key(p: PartialDFA) -> tuple:
    """Canonical form of the reachable part under breadth-first renumbering.

    Two automata over the same alphabet get the same key exactly when the
    reachable parts are isomorphic (respecting the initial state).  Keys
    are totally ordered, so they double as a deterministic sort key.
    """
    order = reachable_states(p)
    remap = {q: i for i, q in enumerate(order)}
    edges = []
    for i, q in enumerate(order):
        for k, ev in enumerate(p.alphabet.events):
            dst = p.step(q, ev)
            if dst is not None:
                edges.append((i, k, remap[dst]))
    edges.sort()
    return (len(order), tuple(edges))


def _dot_quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def to_dot(obj, title: str = "automaton") -> str:
    """Graphviz rendering of a partial, complete or dual-marked automaton."""
    lines = [f"digraph {_dot_quote(title)} {{", "  rankdir=LR;",
             "  __init__ [shape=point];"]
    if isinstance(obj, CompleteDFA):
        p, dump = obj.inner, obj.dump
        marks_a, marks_b = set(), set()
    elif isinstance(obj, DualMarkedDFA):
        p, dump = None, None
        names, trans, initial = obj.names, obj.trans, obj.initial
        marks_a, marks_b = obj.mark_a, obj.mark_b
    else:
        p, dump = obj, None
        marks_a, marks_b = set(), set()
    if p is not None:
        names, trans, initial = p.names, p.trans, p.initial
    for i, name in enumerate(names):
        attrs = []
        if p is not None and p.marked is not None and i in p.marked:
            attrs.append("shape=doublecircle")
        else:
            attrs.append("shape=circle")
        if dump is not None and i == dump:
            attrs.append("style=dashed")
        if i in marks_a:
            attrs.append('style=filled fillcolor=palegreen')
        if i in marks_b:
            attrs.append('style=filled fillcolor=lightcoral')
        lines.append(f"  n{i} [label={_dot_quote(name)} {' '.join(attrs)}];")
    lines.append(f"  __init__ -> n{initial};")
    grouped = {}
    for (src, ev), dst in sorted(trans.items(), key=lambda kv: (kv[0][0], kv[1], kv[0][1])):
        grouped.setdefault((src, dst), []).append(ev)
    for (src, dst), evs in grouped.items():
        lines.append(f"  n{src} -> n{dst} [label={_dot_quote(','.join(evs))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
