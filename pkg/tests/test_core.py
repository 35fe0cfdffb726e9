"""
Tests for protocols, configurations, steps and runs
"""
import pytest

from bnra.core.configuration import (
    CanonicalMode,
    Configuration,
    LocalConfiguration,
    canonicalize,
    initial_configuration,
    is_initial,
)
from bnra.core.local import (
    LocalRun,
    LocalStep,
    local_segment,
    local_visits,
    project_local_run,
    replay_local,
    v_input,
    v_output,
)
from bnra.core.protocol import (
    Action,
    Protocol,
    br,
    get_index,
    is_signature_protocol,
    loc,
    rec,
    require_registers,
    validate_protocol,
)
from bnra.core.semantics import (
    PartialRun,
    Run,
    StepDescriptor,
    UnmatchedReception,
    apply_step,
    double_run,
    enabled_steps,
    final_configuration,
    replay,
    replay_partial,
)
from bnra.core.words import show, subword, word
from bnra.exceptions import (
    InvalidAgentCountException,
    InvalidRunException,
    NotEnabledException,
    WrongRegisterCountException,
)
from tests.conftest import BR_M1, BR_M2, BR_M3, BR_M4, REC_M1, REC_M2, REC_M3, REC_M4


class TestProtocol:
    """Structural checks"""
    
    def test_running_examples_are_well_formed(self, mirror, collector):
        assert validate_protocol(mirror) == []
        assert validate_protocol(collector) == []
    
    def test_unknown_state_is_reported(self):
        protocol = Protocol(
            states=("q0",),
            initial_state="q0",
            messages=("m",),
            transitions=(br("q0", "m", 1, "q9"),)
        )
        problems = validate_protocol(protocol)
        assert len(problems) == 1
        assert "unknown state q9" in problems[0]
    
    def test_register_out_of_range(self):
        protocol = Protocol(
            states=("q0",),
            initial_state="q0",
            messages=("m",),
            registers=1,
            transitions=(rec("q0", "m", 2, Action.EQ, "q0"),)
        )
        assert any("register index out of range" in p for p in validate_protocol(protocol))
    
    def test_local_tests_need_the_flag(self):
        transition = loc("q0", 1, 2, Action.EQ, "q0")
        protocol = Protocol(states=("q0",), initial_state="q0", registers=2, transitions=(transition,))
        assert any("local tests are not enabled" in p for p in validate_protocol(protocol))
        enabled = protocol.model_copy(update={"local_tests": True})
        assert validate_protocol(enabled) == []
    
    def test_signature_check(self, mirror, collector):
        assert is_signature_protocol(collector)
        # mirror broadcasts m3 from register 2
        assert not is_signature_protocol(mirror)
    
    def test_require_registers(self, mirror):
        with pytest.raises(WrongRegisterCountException) as exc_info:
            require_registers(mirror, 1)
        assert exc_info.value.exit_code == 2
    
    def test_index_lookups(self, mirror):
        index = get_index(mirror)
        assert index.broadcasts_from("q0") == [BR_M1, BR_M2]
        assert index.receptions_from("q0", "m2") == [REC_M2]
        assert index.index_of(BR_M2) == 1
        assert REC_M1 in index


class TestConfiguration:
    """Initial configurations and canonical forms"""
    
    def test_initial_values_are_distinct(self, mirror):
        configuration = initial_configuration(mirror, 3)
        assert configuration.agents == (0, 1, 2)
        assert len(configuration.values_used()) == 6
        assert is_initial(mirror, configuration)
    
    def test_zero_agents_rejected(self, mirror):
        with pytest.raises(InvalidAgentCountException):
            initial_configuration(mirror, 0)
    
    def test_shared_value_is_not_initial(self, mirror):
        configuration = Configuration((0, 1), (
            LocalConfiguration("q0", (1, 2)),
            LocalConfiguration("q0", (2, 3)),
        ))
        assert not is_initial(mirror, configuration)
    
    def test_canonical_values_only(self):
        a = Configuration((0, 1), (LocalConfiguration("q1", (7, 9)), LocalConfiguration("q0", (9, 4))))
        b = Configuration((0, 1), (LocalConfiguration("q1", (2, 5)), LocalConfiguration("q0", (5, 8))))
        assert canonicalize(a) == canonicalize(b)
        assert canonicalize(a).entries[1].values == (1, 2)
    
    def test_canonical_values_and_agents(self):
        a = Configuration((0, 1), (LocalConfiguration("q1", (0,)), LocalConfiguration("q0", (1,))))
        b = Configuration((0, 1), (LocalConfiguration("q0", (5,)), LocalConfiguration("q1", (6,))))
        assert canonicalize(a) != canonicalize(b)
        mode = CanonicalMode.VALUES_AND_AGENTS
        assert canonicalize(a, mode) == canonicalize(b, mode)
    
    def test_covers_and_all_in(self):
        configuration = Configuration((0, 1), (LocalConfiguration("q4", (0,)), LocalConfiguration("q4", (1,))))
        assert configuration.covers("q4")
        assert configuration.all_in("q4")
        assert not configuration.covers("q0")


class TestSemantics:
    """Steps and replay"""
    
    def test_example_run_replays_and_covers_q4(self, mirror, example_run):
        final = replay(mirror, example_run)
        assert final.state_of(1) == "q4"
        assert final.covers("q4")
    
    def test_broadcast_without_receivers(self, mirror):
        initial = initial_configuration(mirror, 2)
        after = apply_step(mirror, initial, StepDescriptor.of(0, BR_M1))
        assert after.states() == ["q1", "q0"]
    
    def test_down_reception_stores_value(self, mirror):
        initial = initial_configuration(mirror, 2)
        after = apply_step(mirror, initial, StepDescriptor.of(0, BR_M2, {1: REC_M2}))
        assert after.local(1) == LocalConfiguration("q2", (0, 3))
    
    def test_equality_reception_fails_on_other_value(self, mirror):
        configuration = Configuration((0, 1), (
            LocalConfiguration("q3", (5, 6)),
            LocalConfiguration("q3", (7, 8)),
        ))
        with pytest.raises(NotEnabledException) as exc_info:
            apply_step(mirror, configuration, StepDescriptor.of(0, BR_M4, {1: REC_M4}))
        assert "test = fails" in exc_info.value.reason
    
    def test_agent_cannot_receive_its_own_broadcast(self, mirror):
        initial = initial_configuration(mirror, 2)
        with pytest.raises(NotEnabledException):
            apply_step(mirror, initial, StepDescriptor.of(0, BR_M2, {0: REC_M2}))
    
    def test_enabled_steps_cross_product(self, mirror):
        steps = enabled_steps(mirror, initial_configuration(mirror, 2))
        # each of two agents: br m1 alone, br m2 alone or br m2 with the other receiving
        assert len(steps) == 6
        assert StepDescriptor.of(0, BR_M2, {1: REC_M2}) in steps
    
    def test_invalid_step_index_is_one_based(self, mirror, example_run):
        broken = Run(example_run.initial, (example_run.steps[0], example_run.steps[2]))
        with pytest.raises(InvalidRunException) as exc_info:
            replay(mirror, broken)
        assert exc_info.value.index == 2
    
    def test_non_initial_start_rejected(self, mirror):
        start = Configuration((0,), (LocalConfiguration("q1", (0, 1)),))
        with pytest.raises(InvalidRunException) as exc_info:
            replay(mirror, Run(start))
        assert exc_info.value.index == 0
    
    def test_empty_run(self, mirror):
        initial = initial_configuration(mirror, 1)
        assert replay(mirror, Run(initial)) == initial
    
    def test_double_run_covers_the_same_states(self, mirror, example_run):
        doubled = double_run(example_run)
        final = replay(mirror, doubled)
        assert len(doubled.agents) == 4
        assert sorted(final.states()) == sorted(replay(mirror, example_run).states() * 2)
    
    def test_partial_run_checks_carried_value(self, mirror):
        initial = initial_configuration(mirror, 1)
        partial = PartialRun(initial, (UnmatchedReception.of("m2", 42, {0: REC_M2}),))
        assert replay_partial(mirror, partial).local(0) == LocalConfiguration("q2", (42, 1))
        wrong = PartialRun(
            Configuration((0,), (LocalConfiguration("q0", (0, 1)),)),
            (
                UnmatchedReception.of("m2", 42, {0: REC_M2}),
                StepDescriptor.of(0, BR_M3),
                UnmatchedReception.of("m4", 7, {0: REC_M4}),
            )
        )
        with pytest.raises(InvalidRunException) as exc_info:
            replay_partial(mirror, wrong)
        assert exc_info.value.index == 3
    
    def test_replay_rejects_unmatched_receptions(self, mirror):
        initial = initial_configuration(mirror, 1)
        run = Run(initial, (UnmatchedReception.of("m2", 42, {0: REC_M2}),))
        with pytest.raises(InvalidRunException):
            replay(mirror, run)


class TestLocalRuns:
    """Projections and value inputs/outputs"""
    
    def test_projection_replays_locally(self, mirror, example_run):
        local = project_local_run(example_run, 0)
        assert [step.transition for step in local.steps] == [BR_M2, REC_M3, BR_M4]
        assert replay_local(mirror, local).state == "q3"
        assert local_visits(project_local_run(example_run, 1), "q4")
    
    def test_value_inputs_and_outputs(self, example_run):
        # agent 0 owns value 0, agent 1 owns 2 and 3
        assert v_output(example_run, 0) == ("m2", "m4")
        assert v_output(example_run, 3) == ("m3",)
        receiver = project_local_run(example_run, 1)
        assert v_input(receiver, 0) == ("m2", "m4")
        assert v_output(receiver, 3) == ("m3",)
    
    def test_partial_run_inputs_count_unmatched_only(self, mirror):
        initial = initial_configuration(mirror, 1)
        partial = PartialRun(initial, (
            UnmatchedReception.of("m2", 9, {0: REC_M2}),
            StepDescriptor.of(0, BR_M3),
        ))
        assert v_input(partial, 9) == ("m2",)
        assert v_output(partial, 1) == ("m3",)
    
    def test_local_segment_starts_mid_run(self, example_run):
        local = project_local_run(example_run, 0)
        segment = local_segment(local, 1, 3)
        assert segment.start.state == "q1"
        assert len(segment) == 2
    
    def test_local_replay_rejects_missing_value(self, mirror):
        run = LocalRun(LocalConfiguration("q0", (0, 1)), (LocalStep(REC_M2),))
        with pytest.raises(InvalidRunException):
            replay_local(mirror, run)
    
    def test_final_configuration_without_checks(self, example_run):
        assert final_configuration(example_run).state_of(1) == "q4"


class TestWords:
    
    def test_subword(self):
        assert subword(word("rdy.go"), word("rdy rdy go"))
        assert not subword(word("go rdy"), word("rdy go"))
        assert subword((), ("a",))
    
    def test_show(self):
        assert show(()) == "ε"
        assert show(("a", "b")) == "a·b"
