"""Supervisor obfuscation toolkit for discrete-event systems.

Verifies whether a supervised plant can be attacked by a covert,
command-eavesdropping actuator-enablement attacker, and synthesizes a
minimum-state supervisor that preserves the closed-loop behavior while
defeating every such attacker.
"""

from .automata import (Alphabet, AutomatonError, CompleteDFA, DualMarkedDFA,
                       PartialDFA, accepts, canonical_key, complete,
                       dual_marked_product, is_total, language_equal,
                       reachable_states, strip_dump, sync_product, to_dot,
                       totalize)
from .control import (AttackConstraint, ControlConstraint, DamageReport,
                      Supervisor, Violation, check_supervisor, closed_loop,
                      control_command, validate_damage)
from .attack import (AnnotatedSupervisor, AttackVerdict, AttackWitness,
                     GPAutomaton, OracleResult, SubsetAutomaton,
                     annotate_supervisor, attackable_by_search,
                     determinize_and_label, generalized_product,
                     non_attackable, project_attacker_view, subset_to_dot)
from .obfuscate import (ObfuscationOptions, ObfuscationRequest,
                        ObfuscationResult, SizeTrace,
                        behavior_preserving_supervisors, min_preserving_size,
                        obfuscate)
from .problemfile import (ParseError, ProblemFile, emit_automaton_section,
                          emit_problem, load_problem, parse_problem)
from .sat import BackendError, SatSolver
from .satenc import (CnfInstance, DecodedSupervisor, VarTable,
                     blocking_clause, controllability_clauses, decode_model,
                     encode, export_dimacs, parse_dimacs, separation_clauses,
                     solve_instance, transition_function_clauses)

__version__ = "0.1.0"
