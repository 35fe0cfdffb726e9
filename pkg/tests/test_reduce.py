"""
Tests for the reductions and protocol transforms
"""
import pytest

from bnra.config import settings
from bnra.core.protocol import Action, br, is_signature_protocol, loc, rec
from bnra.core.semantics import replay
from bnra.cover1.abstraction import abstract_run_bound, covers_abstract, decide_cover1, replay_abstract
from bnra.cover1.concretize import concretize
from bnra.exceptions import (
    BudgetExceededException,
    DocumentParseException,
    InvalidRunException,
    RegisterBoundExceededException,
    UnknownStateException,
)
from bnra.explore.search import ExploreParams, ExploreStatus, bounded_cover, bounded_target
from bnra.format.dsl import parse_protocol
from bnra.models import LcsDocument, LcsRuleDocument, MinskyDocument
from bnra.reduce.generators import random_cnf3, random_protocol, random_signature_protocol
from bnra.reduce.lcs import LcsPath, lcs_reach_bounded, lcs_to_protocol, lcs_witness_to_run, lossy_step
from bnra.reduce.local_equality import (
    eliminate_local_equality,
    eliminate_with_target,
    lifted_targets,
    slotted_state,
)
from bnra.reduce.minsky import Execution, minsky_exec_to_run, minsky_run_bounded, minsky_to_protocol
from bnra.reduce.sat import (
    Cnf3,
    brute_force_sat,
    format_dimacs,
    parse_dimacs,
    sat_to_protocol,
    sat_witness_run,
    satisfying_assignment,
)
from tests.conftest import ECHO_TEXT

SAT_SEEDS = range(200)


def lcs(rules, locations=("l0", "l1", "l2"), final="l2"):
    return LcsDocument.model_validate({
        "locations": list(locations),
        "alphabet": ["a", "b"],
        "rules": [{"from": s, "op": op, "symbol": x, "to": t} for s, op, x, t in rules],
        "initial": "l0",
        "final": final,
    })


def minsky(rules, locations=("l0", "l1", "lf")):
    return MinskyDocument.model_validate({
        "locations": list(locations),
        "rules": [{"from": s, "op": op, "counter": c, "to": t} for s, op, c, t in rules],
        "initial": "l0",
        "final": "lf",
    })


def random_formula(seed):
    return random_cnf3(seed=seed, variables=1 + seed % 3, clauses=1 + (seed // 3) % 3)


class TestSat:

    def test_single_clause_is_coverable(self):
        formula = Cnf3(variables=1, clauses=((1, 1, 1),))
        protocol, target = sat_to_protocol(formula)
        assert target == "1'"
        assert protocol.registers == 1
        run = sat_witness_run(formula)
        assert replay(protocol, run).covers(target)

    def test_contradiction_is_not_coverable(self):
        formula = Cnf3(variables=1, clauses=((1, 1, 1), (-1, -1, -1)))
        protocol, target = sat_to_protocol(formula)
        assert not brute_force_sat(formula)
        assert not decide_cover1(protocol, target).coverable
        assert sat_witness_run(formula) is None

    def test_protocol_shape(self):
        formula = Cnf3(variables=2, clauses=((1, -2, 2), (-1, -1, 2)))
        protocol, target = sat_to_protocol(formula)
        assert target == "2'"
        assert protocol.initial_state == "0"
        assert {"0", "1", "2", "1'", "2'"} <= set(protocol.states)
        assert len(protocol.states) == 3 + 2 + 4
        assert set(protocol.messages) == {"x1", "not_x1", "x2", "not_x2"}

    @pytest.mark.parametrize("formula", [
        Cnf3(variables=2, clauses=((1, 2, 2), (-1, -1, -2))),
        Cnf3(variables=2, clauses=((1, 1, 1), (-1, -2, -2))),
        random_cnf3(seed=0, variables=2, clauses=2),
        random_cnf3(seed=1, variables=2, clauses=2),
    ])
    def test_decider_agrees_with_truth_tables(self, formula):
        protocol, target = sat_to_protocol(formula)
        assert decide_cover1(protocol, target).coverable == brute_force_sat(formula)

    def test_assignment_satisfies_every_clause(self):
        formula = Cnf3(variables=2, clauses=((1, 2, 2), (-1, -1, -2)))
        assignment = satisfying_assignment(formula)
        assert assignment == (False, True)

    def test_variable_budget(self, monkeypatch):
        monkeypatch.setattr(settings, "sat_max_variables", 1)
        with pytest.raises(BudgetExceededException):
            brute_force_sat(Cnf3(variables=2, clauses=((1, 2, 2),)))

    def test_literal_out_of_range(self):
        with pytest.raises(ValueError):
            Cnf3(variables=1, clauses=((1, 2, 1),))


class TestSatAgreement:

    @pytest.mark.parametrize("seed", SAT_SEEDS)
    def test_decider_agrees_with_brute_force(self, seed):
        formula = random_formula(seed)
        protocol, target = sat_to_protocol(formula)
        result = decide_cover1(protocol, target)
        assert result.coverable == brute_force_sat(formula)
        if result.coverable:
            assert len(result.run) <= abstract_run_bound(protocol)
            assert covers_abstract(replay_abstract(protocol, result.run), target)

    def test_witnesses_concretize(self):
        positives, concrete = 0, 0
        for seed in SAT_SEEDS:
            formula = random_formula(seed)
            protocol, target = sat_to_protocol(formula)
            result = decide_cover1(protocol, target)
            if not result.coverable:
                continue
            positives += 1
            try:
                run = concretize(protocol, result.run, settings.concretize_budget)
            except BudgetExceededException:
                continue
            assert replay(protocol, run).covers(target)
            concrete += 1
        assert positives > 0
        assert concrete >= 0.95 * positives


class TestDimacs:

    def test_comments_and_split_clauses(self):
        formula = parse_dimacs("c example\np cnf 2 2\n1 -2 2 0\n-1 -1\n2 0\n")
        assert formula.variables == 2
        assert formula.clauses == ((1, -2, 2), (-1, -1, 2))

    def test_format_is_parseable(self):
        formula = Cnf3(variables=3, clauses=((1, -2, 3), (-3, -3, 2)))
        assert parse_dimacs(format_dimacs(formula)) == formula

    def test_short_clause(self):
        with pytest.raises(DocumentParseException) as exc:
            parse_dimacs("p cnf 2 1\n1 2 0\n")
        assert exc.value.details == {"line": 2, "column": 3}

    def test_clause_before_header(self):
        with pytest.raises(DocumentParseException) as exc:
            parse_dimacs("1 2 3 0\n")
        assert exc.value.details["line"] == 1

    def test_clause_count_mismatch(self):
        with pytest.raises(DocumentParseException):
            parse_dimacs("p cnf 1 2\n1 1 1 0\n")

    def test_literal_out_of_range(self):
        with pytest.raises(DocumentParseException):
            parse_dimacs("p cnf 1 1\n1 2 1 0\n")


class TestLcs:

    def test_lossy_steps(self):
        push = LcsRuleDocument(source="l0", op="push", symbol="a", target="l1")
        pop = LcsRuleDocument(source="l0", op="pop", symbol="a", target="l1")
        assert lossy_step(push, ("b",)) == ("b", "a")
        assert lossy_step(pop, ("b", "a", "b")) == ("b",)
        assert lossy_step(pop, ("b",)) is None

    def test_shortest_path(self):
        system = lcs([("l0", "push", "a", "l1"), ("l1", "pop", "a", "l2"), ("l0", "pop", "a", "l2")])
        path = lcs_reach_bounded(system)
        assert path == LcsPath((0, 1), ((), ("a",), ()))

    def test_unreachable_final(self):
        system = lcs([("l0", "pop", "a", "l2")])
        assert lcs_reach_bounded(system) is None

    def test_no_rules_leaves_final_uncovered(self):
        system = lcs([])
        assert lcs_reach_bounded(system) is None
        protocol, target = lcs_to_protocol(system)
        result = bounded_cover(protocol, target, ExploreParams(agents=3, max_depth=6))
        assert result.status == ExploreStatus.NOT_FOUND

    def test_step_bound(self):
        system = lcs([("l0", "push", "a", "l1"), ("l1", "pop", "a", "l2")])
        assert lcs_reach_bounded(system, max_steps=1) is None
        assert lcs_reach_bounded(system, max_channel=0) is None

    def test_protocol_is_signature(self):
        protocol, target = lcs_to_protocol(lcs([("l0", "push", "a", "l1"), ("l1", "pop", "a", "l2")]))
        assert is_signature_protocol(protocol)
        assert protocol.registers == 2
        assert target == "fin_l2"

    def test_witness_run_covers_final(self):
        system = lcs([("l0", "push", "a", "l1"), ("l1", "pop", "a", "l2")])
        protocol, target = lcs_to_protocol(system)
        run = lcs_witness_to_run(protocol, system, lcs_reach_bounded(system))
        assert len(run.agents) == 3
        assert replay(protocol, run).covers(target)

    def test_copies_kept_letters(self):
        system = lcs([
            ("l0", "push", "b", "l1"),
            ("l1", "push", "a", "l1"),
            ("l1", "pop", "b", "l2"),
        ])
        path = LcsPath((0, 1, 2), ((), ("b",), ("b", "a"), ("a",)))
        protocol, target = lcs_to_protocol(system)
        run = lcs_witness_to_run(protocol, system, path)
        assert replay(protocol, run).covers(target)

    def test_inconsistent_path(self):
        system = lcs([("l0", "push", "a", "l1"), ("l1", "pop", "a", "l2")])
        protocol, _ = lcs_to_protocol(system)
        with pytest.raises(InvalidRunException):
            lcs_witness_to_run(protocol, system, LcsPath((0, 1), ((), ("b",), ())))


class TestMinsky:

    def test_increment_then_decrement(self):
        machine = minsky([("l0", "inc", 1, "l1"), ("l1", "dec", 1, "lf")])
        execution = minsky_run_bounded(machine)
        assert execution.rules == (0, 1)
        assert execution.max_counter == 1
        protocol, target = minsky_to_protocol(machine)
        run = minsky_exec_to_run(protocol, machine, execution)
        assert len(run.agents) == 3
        assert replay(protocol, run).all_in(target)

    def test_zero_test_uses_one_agent_per_counter(self):
        machine = minsky([("l0", "testz", 2, "lf")])
        execution = minsky_run_bounded(machine)
        assert execution.max_counter == 0
        protocol, target = minsky_to_protocol(machine)
        run = minsky_exec_to_run(protocol, machine, execution)
        assert len(run.agents) == 3
        assert replay(protocol, run).all_in(target)

    def test_second_counter(self):
        machine = minsky([
            ("l0", "inc", 2, "l1"),
            ("l1", "inc", 2, "l0"),
            ("l0", "dec", 2, "l1"),
            ("l1", "testz", 1, "lf"),
        ])
        execution = minsky_run_bounded(machine)
        protocol, target = minsky_to_protocol(machine)
        run = minsky_exec_to_run(protocol, machine, execution)
        assert replay(protocol, run).all_in(target)

    def test_blocked_machine(self):
        machine = minsky([("l0", "dec", 1, "lf")])
        assert minsky_run_bounded(machine) is None

    @pytest.mark.parametrize("agents", [2, 3])
    def test_failed_zero_test_blocks_target(self, agents):
        machine = minsky([("l0", "inc", 1, "l1"), ("l1", "testz", 1, "lf")])
        assert minsky_run_bounded(machine) is None
        protocol, target = minsky_to_protocol(machine)
        result = bounded_target(protocol, target, ExploreParams(agents=agents, max_depth=10))
        assert result.status == ExploreStatus.NOT_FOUND

    def test_counter_bound(self):
        machine = minsky([("l0", "inc", 1, "l1"), ("l1", "dec", 1, "lf")])
        assert minsky_run_bounded(machine, max_counter=0) is None

    def test_execution_must_follow_rules(self):
        machine = minsky([("l0", "inc", 1, "l1"), ("l1", "dec", 1, "lf")])
        protocol, _ = minsky_to_protocol(machine)
        bogus = Execution((0, 1), (("l0", 0, 0), ("l1", 5, 0), ("lf", 4, 0)))
        with pytest.raises(InvalidRunException):
            minsky_exec_to_run(protocol, machine, bogus)


class TestLocalEquality:

    def test_slot_names(self):
        assert slotted_state("q0", (1, 2)) == "q.q0@m12"

    def test_no_local_equality_left(self):
        result = eliminate_local_equality(parse_protocol(ECHO_TEXT))
        assert result.initial_state == "q.q0@m12"
        assert not any(t.is_local and t.op.action == Action.EQ for t in result.transitions)
        assert br("q.q3@m11", "dummy", 1, "q.q4@m11") in result.transitions
        assert not result.local_tests

    def test_disequality_tests_survive(self):
        protocol = parse_protocol(ECHO_TEXT.replace("loc(1,2,=)", "loc(1,2,!=)"))
        result = eliminate_local_equality(protocol)
        assert loc("q.q3@m12", 1, 2, Action.NEQ, "q.q4@m12") in result.transitions
        assert result.local_tests

    def test_any_reception_keeps_its_slot(self):
        protocol = parse_protocol(ECHO_TEXT.replace("rec(a,2,down) q3", "rec(a,2,any) q3"))
        result = eliminate_local_equality(protocol)
        ignored = [t for t in result.transitions if t.is_reception and t.op.action == Action.ANY]
        assert len(ignored) == 4
        assert rec("q.q1@m12", "a", 2, Action.ANY, "q.q3@m12") in ignored
        assert rec("q.q1@m11", "a", 1, Action.ANY, "q.q3@m11") in ignored

    def test_dummy_message_avoids_clashes(self):
        protocol = parse_protocol(ECHO_TEXT.replace("messages m a", "messages m a dummy"))
        assert eliminate_local_equality(protocol).messages[-1] == "dummy_"

    def test_register_bound(self, monkeypatch):
        monkeypatch.setattr(settings, "local_equality_max_registers", 1)
        with pytest.raises(RegisterBoundExceededException):
            eliminate_local_equality(parse_protocol(ECHO_TEXT))

    def test_lifted_targets(self):
        targets = lifted_targets(parse_protocol(ECHO_TEXT), "q4")
        assert len(targets) == 4
        with pytest.raises(UnknownStateException):
            lifted_targets(parse_protocol(ECHO_TEXT), "nowhere")

    def test_coverability_is_preserved(self):
        protocol = parse_protocol(ECHO_TEXT)
        original = bounded_cover(protocol, "q4", ExploreParams(agents=2, max_depth=4))
        assert original.status == ExploreStatus.FOUND
        transformed, target = eliminate_with_target(protocol, "q4")
        assert target == "q4@any"
        lifted = bounded_cover(transformed, target, ExploreParams(agents=2, max_depth=6))
        assert lifted.status == ExploreStatus.FOUND
        assert replay(transformed, lifted.run).covers(target)


class TestGenerators:

    def test_same_seed_same_protocol(self):
        assert random_protocol(seed=7) == random_protocol(seed=7)
        assert random_cnf3(seed=7) == random_cnf3(seed=7)

    def test_signature_protocols(self):
        for seed in range(5):
            assert is_signature_protocol(random_signature_protocol(seed=seed, registers=3))

    def test_signature_needs_two_registers(self):
        with pytest.raises(ValueError):
            random_signature_protocol(seed=0, registers=1)
