"""Non-attackability verification for command-eavesdropping attackers.

Pipeline: annotate the supervisor with the control command issued after
each observable transition, build the generalized product of plant,
annotated supervisor and damage automaton (with success/failure verdict
sinks for attack moves), project events down to what the attacker sees,
determinize with epsilon closure, and label each knowledge set with the
attack events that are guaranteed to succeed from it.

The attacker sees a pair per supervisor-observable event: the event itself
when it is attacker-observable (else an epsilon placeholder) and the fresh
control command.  Supervisor-unobservable events produce no observation at
all and are handled by epsilon closure.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .automata import AutomatonError, PartialDFA, is_total
from .control import (AttackConstraint, Supervisor, closed_loop,
                      control_command, validate_damage)

Command = tuple[str, ...]          # sorted event tuple
ObsEvent = tuple[Optional[str], Command]   # (seen event or None, command)


@dataclass(frozen=True)
class AnnotatedSupervisor:
    """Supervisor with observable transitions tagged by the command of the
    destination state; unobservable transitions stay bare self-loops."""

    supervisor: Supervisor
    commands: tuple[Command, ...]              # per state
    obs_trans: dict                            # (x, event) -> (x', command)
    uo_trans: dict                             # (x, event) -> x'

    @property
    def n_states(self) -> int:
        return self.supervisor.n_states


def annotate_supervisor(s: Supervisor) -> AnnotatedSupervisor:
    aut = s.automaton
    commands = tuple(tuple(sorted(control_command(s, x)))
                     for x in range(aut.n_states))
    obs_trans = {}
    uo_trans = {}
    for (x, ev), x2 in aut.trans.items():
        if ev in s.constraint.observable:
            obs_trans[(x, ev)] = (x2, commands[x2])
        else:
            uo_trans[(x, ev)] = x2
    return AnnotatedSupervisor(s, commands, obs_trans, uo_trans)


@dataclass(frozen=True)
class GPAutomaton:
    """Generalized product over core states (plant, supervisor, damage).

    ``trans`` holds the closed-loop moves keyed by (core, (event, view))
    where view is the attacker observation (an :data:`ObsEvent`) or None
    for supervisor-unobservable events.  ``attack`` records, per (core,
    attackable event) with the event plant-possible and supervisor-
    disabled, whether firing it inflicts damage (success sink) or not
    (failure sink).
    """

    names: tuple[str, ...]
    cores: tuple[tuple[int, int, int], ...]
    trans: dict
    attack: dict       # (core, event) -> bool (True = success)
    initial: int
    attack_events: tuple[str, ...]

    @property
    def n_states(self) -> int:
        return len(self.cores)


def generalized_product(g: PartialDFA, sa: AnnotatedSupervisor,
                        h: PartialDFA, ac: AttackConstraint) -> GPAutomaton:
    """Reachable part of the three-way product with attack verdicts."""
    sup = sa.supervisor
    if g.alphabet.events != h.alphabet.events or \
            g.alphabet.events != sup.automaton.alphabet.events:
        raise AutomatonError("plant, supervisor and damage must share an alphabet")
    if not is_total(h):
        raise AutomatonError("damage automaton must be total")
    if h.marked is None:
        raise AutomatonError("damage automaton needs an explicit marked set")
    ac.check_against(sup.constraint)

    observable = sup.constraint.observable
    start = (g.initial, sup.automaton.initial, h.initial)
    index = {start: 0}
    order = [start]
    trans = {}
    attack = {}
    queue = deque([start])
    while queue:
        q, x, z = queue.popleft()
        src = index[(q, x, z)]
        for ev in g.alphabet.events:
            q2 = g.step(q, ev)
            if q2 is None:
                continue
            z2 = h.step(z, ev)
            x2 = sup.automaton.step(x, ev)
            if x2 is not None:
                if ev in observable:
                    seen = ev if ev in ac.attacker_observable else None
                    key = (ev, (seen, sa.commands[x2]))
                else:
                    key = (ev, None)
                dst = (q2, x2, z2)
                if dst not in index:
                    index[dst] = len(order)
                    order.append(dst)
                    queue.append(dst)
                trans[(src, key)] = index[dst]
            elif ev in ac.attackable:
                attack[(src, ev)] = h.is_marked(z2)

    names = tuple(f"({g.names[q]},{sup.automaton.names[x]},{h.names[z]})"
                  for q, x, z in order)
    return GPAutomaton(names, tuple(order), trans, attack, 0,
                       tuple(e for e in g.alphabet.events if e in ac.attackable))


@dataclass(frozen=True)
class AttackerView:
    """The product with events projected to attacker observations: bare
    supervisor-unobservable moves become epsilon transitions, observable
    ones keep their (seen event, command) pair and may turn
    nondeterministic."""

    n_states: int
    initial: int
    eps: dict          # state -> tuple of epsilon successors
    moves: dict        # (state, ObsEvent) -> tuple of successors


def project_attacker_view(gp: GPAutomaton) -> AttackerView:
    eps: dict[int, list[int]] = {}
    moves: dict[tuple[int, ObsEvent], list[int]] = {}
    for (src, (ev, view)), dst in gp.trans.items():
        if view is None:
            eps.setdefault(src, []).append(dst)
        else:
            moves.setdefault((src, view), []).append(dst)
    return AttackerView(gp.n_states, gp.initial,
                        {k: tuple(sorted(set(v))) for k, v in eps.items()},
                        {k: tuple(sorted(set(v))) for k, v in moves.items()})


@dataclass(frozen=True)
class SubsetAutomaton:
    """Determinized attacker view.  ``labels[i]`` is the set of attack
    events that succeed from knowledge set ``i``: some member state turns
    the event into damage and no other member turns it into a detected
    failure."""

    subsets: tuple[frozenset[int], ...]
    trans: dict        # (subset index, ObsEvent) -> subset index
    labels: tuple[frozenset[str], ...]
    initial: int = 0


def _closure(states, eps) -> frozenset[int]:
    seen = set(states)
    stack = list(states)
    while stack:
        v = stack.pop()
        for w in eps.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def determinize_and_label(view: AttackerView, gp: GPAutomaton) -> SubsetAutomaton:
    """Subset construction with epsilon closure, in breadth-first order,
    plus the per-subset attack labels."""
    init = _closure([view.initial], view.eps)
    index = {init: 0}
    order = [init]
    trans = {}
    queue = deque([init])
    while queue:
        cur = queue.popleft()
        src = index[cur]
        events = sorted({obs for (v, obs) in view.moves if v in cur},
                        key=lambda o: (o[0] or "", o[1]))
        for obs in events:
            targets = set()
            for v in cur:
                targets.update(view.moves.get((v, obs), ()))
            nxt = _closure(targets, view.eps)
            if not nxt:
                continue
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            trans[(src, obs)] = index[nxt]

    labels = []
    for cur in order:
        lab = set()
        for ev in gp.attack_events:
            success = any(gp.attack.get((v, ev)) is True for v in cur)
            failure = any(gp.attack.get((v, ev)) is False for v in cur)
            if success and not failure:
                lab.add(ev)
        labels.append(frozenset(lab))
    return SubsetAutomaton(tuple(order), trans, tuple(labels))


@dataclass(frozen=True)
class AttackWitness:
    observations: tuple[ObsEvent, ...]
    subset: frozenset[int]
    subset_names: tuple[str, ...]
    event: str


@dataclass(frozen=True)
class AttackVerdict:
    non_attackable: bool
    witness: Optional[AttackWitness] = None
    subset_automaton: Optional[SubsetAutomaton] = None


def non_attackable(g: PartialDFA, s: Supervisor, h: PartialDFA,
                   ac: AttackConstraint, validate: bool = True) -> AttackVerdict:
    """True verdict iff every reachable attacker knowledge set has an empty
    attack label.  On the false verdict, the witness carries a shortest
    observation sequence to a labeled set and the labeled event."""
    if validate:
        report = validate_damage(h, closed_loop(g, s), plant=g)
        if not report.ok:
            raise AutomatonError("; ".join(report.problems))
    gp = generalized_product(g, annotate_supervisor(s), h, ac)
    sub = determinize_and_label(project_attacker_view(gp), gp)

    # transition insertion order follows the construction's breadth-first
    # search, so the first edge into a subset lies on a shortest path
    parents: dict[int, tuple[int, ObsEvent]] = {}
    for (src, obs), dst in sub.trans.items():
        if dst != sub.initial:
            parents.setdefault(dst, (src, obs))
    for i, lab in enumerate(sub.labels):
        if lab:
            path = []
            cur = i
            while cur != sub.initial:
                src, obs = parents[cur]
                path.append(obs)
                cur = src
            path.reverse()
            subset = sub.subsets[i]
            witness = AttackWitness(tuple(path), subset,
                                    tuple(gp.names[v] for v in sorted(subset)),
                                    min(lab))
            return AttackVerdict(False, witness, sub)
    return AttackVerdict(True, None, sub)


@dataclass(frozen=True)
class OracleResult:
    attackable: bool
    conclusive: bool
    exhausted: bool
    witness: Optional[tuple[tuple[str, ...], str]] = None
    strings_seen: int = 0


def attackable_by_search(g: PartialDFA, s: Supervisor, h: PartialDFA,
                         ac: AttackConstraint, len_bound: int,
                         budget: int = 200_000) -> OracleResult:
    """Bounded brute-force attackability check, used as a test oracle.

    Enumerates closed-loop strings up to ``len_bound``, replays the
    attacker observation of each, groups strings by observation and looks
    for a string and attackable event such that the continuation is
    damaging while every observation-equivalent, plant-possible
    continuation is damaging too.

    The verdict is conclusive when a witness was found or the whole
    closed-loop language was exhausted within the bound and budget; for
    cyclic loops at large bounds the search is truncated and reported
    inconclusive.
    """
    if len_bound < 1:
        raise AutomatonError("length bound must be at least 1")
    if not is_total(h) or h.marked is None:
        raise AutomatonError("damage automaton must be total and marked")
    sup = s.automaton
    observable = s.constraint.observable
    commands = tuple(tuple(sorted(sup.enabled(x))) for x in range(sup.n_states))

    # nodes are (plant, supervisor, damage, observation); several strings
    # can share a node and are interchangeable for the check
    start = (g.initial, sup.initial, h.initial, ())
    rep: dict[tuple, tuple[str, ...]] = {start: ()}
    groups: dict[tuple, set[tuple[int, int, int]]] = {(): {start[:3]}}
    frontier = [start]
    exhausted = True
    seen_count = 1
    for _ in range(len_bound):
        if not frontier:
            break
        nxt_frontier = []
        for (q, x, z, obs) in frontier:
            string = rep[(q, x, z, obs)]
            for ev in g.alphabet.events:
                q2 = g.step(q, ev)
                x2 = sup.step(x, ev)
                if q2 is None or x2 is None:
                    continue
                z2 = h.step(z, ev)
                if ev in observable:
                    seen = ev if ev in ac.attacker_observable else None
                    obs2 = obs + ((seen, commands[x2]),)
                else:
                    obs2 = obs
                node = (q2, x2, z2, obs2)
                if node in rep:
                    continue
                if seen_count >= budget:
                    exhausted = False
                    continue
                rep[node] = string + (ev,)
                groups.setdefault(obs2, set()).add((q2, x2, z2))
                nxt_frontier.append(node)
                seen_count += 1
        frontier = nxt_frontier
    if frontier:
        # strings of exactly len_bound length remained extensible
        for (q, x, z, obs) in frontier:
            for ev in g.alphabet.events:
                if g.step(q, ev) is not None and sup.step(x, ev) is not None:
                    exhausted = False
                    break
            if not exhausted:
                break

    attack_events = [e for e in g.alphabet.events if e in ac.attackable]
    for node, string in sorted(rep.items(), key=lambda kv: (len(kv[1]), kv[1])):
        q, x, z, obs = node
        cls = groups[obs]
        for ev in attack_events:
            if g.step(q, ev) is None:
                continue
            if sup.step(x, ev) is not None:
                continue
            if not h.is_marked(h.step(z, ev)):
                continue
            # every observation-equivalent, plant-possible continuation
            # must be damaging as well
            refuted = False
            for (q2, x2, z2) in cls:
                if g.step(q2, ev) is not None and not h.is_marked(h.step(z2, ev)):
                    refuted = True
                    break
            if not refuted:
                return OracleResult(True, True, exhausted, (string, ev), seen_count)
    return OracleResult(False, exhausted, exhausted, None, seen_count)


def subset_to_dot(sub: SubsetAutomaton, gp: GPAutomaton,
                  title: str = "attacker-view") -> str:
    """Graphviz rendering of the determinized attacker view; labeled
    knowledge sets are highlighted."""
    def fmt_obs(obs: ObsEvent) -> str:
        seen, cmd = obs
        return f"({seen or 'ε'},{{{','.join(cmd)}}})"

    lines = [f'digraph "{title}" {{', "  rankdir=LR;", "  __init__ [shape=point];"]
    for i, subset in enumerate(sub.subsets):
        label = "{" + ",".join(gp.names[v] for v in sorted(subset)) + "}"
        if sub.labels[i]:
            label += "\\nattack: " + ",".join(sorted(sub.labels[i]))
            lines.append(f'  n{i} [label="{label}" style=filled fillcolor=lightcoral];')
        else:
            lines.append(f'  n{i} [label="{label}"];')
    lines.append(f"  __init__ -> n{sub.initial};")
    for (src, obs), dst in sorted(sub.trans.items(),
                                  key=lambda kv: (kv[0][0], kv[1], str(kv[0][1]))):
        lines.append(f'  n{src} -> n{dst} [label="{fmt_obs(obs)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
