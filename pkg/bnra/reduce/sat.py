"""
3SAT as 1-register coverability

A chain of states 0..n broadcasts one literal per variable with the agent's
own value; the clause chain n, 1', ..., m' advances by receiving one literal of
each clause with that same value. Repeater states answer a literal forever.
"""
from itertools import product
from typing import List, Optional, Tuple

import structlog
from pydantic import BaseModel, field_validator, model_validator

from bnra.config import settings
from bnra.core.protocol import Action, Protocol, br, dedupe_transitions, rec
from bnra.core.semantics import Run
from bnra.cover1.abstraction import decide_cover1
from bnra.cover1.concretize import concretize
from bnra.exceptions import BudgetExceededException, DocumentParseException

logger = structlog.get_logger(__name__)

Clause = Tuple[int, int, int]


class Cnf3(BaseModel):
    """A 3-CNF formula; literal k > 0 is x_k, k < 0 is its negation"""
    variables: int
    clauses: Tuple[Clause, ...]

    @field_validator("variables")
    @classmethod
    def check_variables(cls, v):
        if v < 1:
            raise ValueError("a formula needs at least one variable")
        return v

    @model_validator(mode="after")
    def check_literals(self) -> "Cnf3":
        if not self.clauses:
            raise ValueError("a formula needs at least one clause")
        for clause in self.clauses:
            for literal in clause:
                if literal == 0 or abs(literal) > self.variables:
                    raise ValueError(f"literal {literal} out of range 1..{self.variables}")
        return self

    class Config:
        frozen = True


def literal_name(literal: int) -> str:
    return f"x{literal}" if literal > 0 else f"not_x{-literal}"


def sat_to_protocol(formula: Cnf3) -> Tuple[Protocol, str]:
    """Protocol whose clause chain end m' is coverable iff the formula is satisfiable"""
    n, m = formula.variables, len(formula.clauses)
    literals = [sign * variable for variable in range(1, n + 1) for sign in (1, -1)]
    chain = [str(i) for i in range(n + 1)]
    clause_states = [chain[-1]] + [f"{j}'" for j in range(1, m + 1)]
    repeaters = {literal: f"lit_{literal_name(literal)}" for literal in literals}

    transitions = []
    for variable in range(1, n + 1):
        for literal in (variable, -variable):
            transitions.append(br(chain[variable - 1], literal_name(literal), 1, chain[variable]))
    for j, clause in enumerate(formula.clauses, start=1):
        for literal in clause:
            transitions.append(rec(clause_states[j - 1], literal_name(literal), 1, Action.EQ, clause_states[j]))
    for literal in literals:
        transitions.append(rec(chain[0], literal_name(literal), 1, Action.DOWN, repeaters[literal]))
        transitions.append(br(repeaters[literal], literal_name(literal), 1, repeaters[literal]))

    protocol = Protocol(
        name=f"sat_{n}_{m}",
        states=tuple(chain + clause_states[1:] + list(repeaters.values())),
        initial_state=chain[0],
        messages=tuple(literal_name(literal) for literal in literals),
        registers=1,
        transitions=dedupe_transitions(transitions)
    )
    logger.debug("reduction_built", reduction="sat", states=len(protocol.states))
    return protocol, clause_states[-1]


def satisfying_assignment(formula: Cnf3) -> Optional[Tuple[bool, ...]]:
    """
    First satisfying assignment in truth-table order, or None

    Raises:
        BudgetExceededException: above sat_max_variables variables
    """
    if formula.variables > settings.sat_max_variables:
        raise BudgetExceededException("sat variables", settings.sat_max_variables)
    for assignment in product((False, True), repeat=formula.variables):
        if all(
            any(assignment[abs(literal) - 1] == (literal > 0) for literal in clause)
            for clause in formula.clauses
        ):
            return assignment
    return None


def brute_force_sat(formula: Cnf3) -> bool:
    return satisfying_assignment(formula) is not None


def sat_witness_run(formula: Cnf3, budget: Optional[int] = None) -> Optional[Run]:
    """A concrete run covering the clause chain end, or None for unsatisfiable formulas"""
    protocol, target = sat_to_protocol(formula)
    result = decide_cover1(protocol, target)
    if not result.coverable:
        return None
    return concretize(protocol, result.run, budget)


def parse_dimacs(text: str) -> Cnf3:
    """
    Parse 'p cnf n m' followed by clauses of three literals terminated by 0

    Lines starting with 'c' are comments. A clause may span several lines.

    Raises:
        DocumentParseException: with the offending line number
    """
    variables: Optional[int] = None
    expected = 0
    clauses: List[Clause] = []
    pending: List[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DocumentParseException("expected 'p cnf <variables> <clauses>'", number, 1)
            try:
                variables, expected = int(parts[2]), int(parts[3])
            except ValueError:
                raise DocumentParseException("header counts must be integers", number, 1)
            continue
        if variables is None:
            raise DocumentParseException("clause before the 'p cnf' header", number, 1)
        for column, token in enumerate(line.split(), start=1):
            try:
                literal = int(token)
            except ValueError:
                raise DocumentParseException(f"not a literal: {token}", number, column)
            if literal != 0:
                pending.append(literal)
                continue
            if len(pending) != 3:
                raise DocumentParseException(f"clause has {len(pending)} literals, expected 3", number, column)
            clauses.append((pending[0], pending[1], pending[2]))
            pending = []
    if variables is None:
        raise DocumentParseException("missing 'p cnf' header", 0, 0)
    if pending:
        raise DocumentParseException("last clause is not terminated by 0", 0, 0)
    if len(clauses) != expected:
        raise DocumentParseException(f"header announces {expected} clauses, found {len(clauses)}", 0, 0)
    try:
        return Cnf3(variables=variables, clauses=tuple(clauses))
    except ValueError as exc:
        raise DocumentParseException(str(exc), 0, 0)


def format_dimacs(formula: Cnf3) -> str:
    lines = [f"p cnf {formula.variables} {len(formula.clauses)}"]
    lines.extend(" ".join(str(literal) for literal in clause) + " 0" for clause in formula.clauses)
    return "\n".join(lines) + "\n"
