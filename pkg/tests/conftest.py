"""
Shared fixtures: the two running-example protocols, their runs and trees
"""
import pytest

from bnra.core.configuration import Configuration, LocalConfiguration
from bnra.core.local import LocalRun, LocalStep
from bnra.core.protocol import Action, br, rec
from bnra.core.semantics import Run, StepDescriptor
from bnra.format.dsl import parse_protocol
from bnra.trees.model import Decomposition, InitialValueAnnotation, boss, follower

MIRROR_TEXT = """\
# two registers, covering q4 needs a reception of the agent's own first value
protocol mirror
registers 2
messages m1 m2 m3 m4
states q0 q1 q2 q3 q4 q5
init q0
trans q0 br(m1,1) q1
trans q0 br(m2,1) q1
trans q0 rec(m2,1,down) q2
trans q1 rec(m3,2,down) q3
trans q2 br(m3,2) q3
trans q3 br(m4,1) q3
trans q3 rec(m4,1,=) q4
trans q4 br(m4,1) q4
trans q2 rec(m1,1,=) q5
"""

COLLECTOR_TEXT = """\
protocol collector
registers 3
messages rdy go hlt
states q0 q1 q2 q3 q4 q5 q6 q7
init q0
trans q0 br(rdy,1) q0
trans q0 rec(rdy,2,down) q1
trans q1 rec(rdy,3,down) q2
trans q2 rec(go,2,=) q3
trans q3 rec(hlt,3,=) q4
trans q0 rec(rdy,2,any) q5
trans q5 br(rdy,1) q5
trans q5 br(go,1) q6
trans q5 br(hlt,1) q7
"""

ONE_REGISTER_TEXT = """\
protocol relay
registers 1
messages a b
states q0 q1 q2 q3
init q0
trans q0 br(a,1) q1
trans q0 rec(a,1,down) q2
trans q2 br(b,1) q2
trans q1 rec(b,1,=) q3
"""


ECHO_TEXT = """\
protocol echo
registers 2
messages m a
states q0 q1 q2 q3 q4
init q0
localtests on
trans q0 br(m,1) q1
trans q0 rec(m,2,down) q2
trans q2 br(a,2) q2
trans q1 rec(a,2,down) q3
trans q3 loc(1,2,=) q4
"""

DISEQUALITY_TEXT = """\
protocol answer
registers 1
messages a b
states q0 q1 q2 q3 q4
init q0
trans q0 br(a,1) q1
trans q0 rec(a,1,down) q2
trans q2 br(b,1) q3
trans q1 rec(b,1,!=) q4
"""


@pytest.fixture
def mirror_text():
    return MIRROR_TEXT


@pytest.fixture
def collector_text():
    return COLLECTOR_TEXT


@pytest.fixture
def mirror():
    return parse_protocol(MIRROR_TEXT)


@pytest.fixture
def collector():
    return parse_protocol(COLLECTOR_TEXT)


@pytest.fixture
def relay():
    """1-register protocol where q3 needs a second agent to echo the first value"""
    return parse_protocol(ONE_REGISTER_TEXT)


# mirror transitions
BR_M1 = br("q0", "m1", 1, "q1")
BR_M2 = br("q0", "m2", 1, "q1")
REC_M2 = rec("q0", "m2", 1, Action.DOWN, "q2")
REC_M3 = rec("q1", "m3", 2, Action.DOWN, "q3")
BR_M3 = br("q2", "m3", 2, "q3")
BR_M4 = br("q3", "m4", 1, "q3")
REC_M4 = rec("q3", "m4", 1, Action.EQ, "q4")
BR_M4_LOOP = br("q4", "m4", 1, "q4")
REC_M1 = rec("q2", "m1", 1, Action.EQ, "q5")

# collector transitions
BR_RDY = br("q0", "rdy", 1, "q0")
REC_RDY_DOWN_2 = rec("q0", "rdy", 2, Action.DOWN, "q1")
REC_RDY_DOWN_3 = rec("q1", "rdy", 3, Action.DOWN, "q2")
REC_GO = rec("q2", "go", 2, Action.EQ, "q3")
REC_HLT = rec("q3", "hlt", 3, Action.EQ, "q4")
REC_RDY_ANY = rec("q0", "rdy", 2, Action.ANY, "q5")
BR_RDY_LOOP = br("q5", "rdy", 1, "q5")
BR_GO = br("q5", "go", 1, "q6")
BR_HLT = br("q5", "hlt", 1, "q7")


def local(state, *values):
    return LocalConfiguration(state, tuple(values))


@pytest.fixture
def example_run():
    """Two agents: 0 broadcasts m2, 1 answers with m3, 0 echoes its value with m4"""
    initial = Configuration((0, 1), (local("q0", 0, 1), local("q0", 2, 3)))
    return Run(initial, (
        StepDescriptor.of(0, BR_M2, {1: REC_M2}),
        StepDescriptor.of(1, BR_M3, {0: REC_M3}),
        StepDescriptor.of(0, BR_M4, {1: REC_M4}),
    ))


@pytest.fixture
def signature_run():
    """Agent 1 collects rdy from agents 2 and 3, then go from 2 and hlt from 3"""
    initial = Configuration((1, 2, 3), (
        local("q0", 1, 11, 12),
        local("q0", 2, 21, 22),
        local("q0", 3, 31, 32),
    ))
    return Run(initial, (
        StepDescriptor.of(2, BR_RDY, {1: REC_RDY_DOWN_2}),
        StepDescriptor.of(3, BR_RDY, {1: REC_RDY_DOWN_3, 2: REC_RDY_ANY}),
        StepDescriptor.of(2, BR_RDY_LOOP, {3: REC_RDY_ANY}),
        StepDescriptor.of(2, BR_GO, {1: REC_GO}),
        StepDescriptor.of(3, BR_HLT, {1: REC_HLT}),
    ))


def _a2_run(length):
    steps = (
        LocalStep(BR_RDY),
        LocalStep(REC_RDY_ANY, 3),
        LocalStep(BR_RDY_LOOP),
        LocalStep(BR_GO),
    )
    return LocalRun(local("q0", 2, 21, 22), steps[:length])


def _a3_run(length):
    steps = (
        LocalStep(BR_RDY),
        LocalStep(REC_RDY_ANY, 2),
        LocalStep(BR_HLT),
    )
    return LocalRun(local("q0", 3, 31, 32), steps[:length])


@pytest.fixture
def signature_tree():
    """Six boss nodes; the grandchild under agent 3 repeats its sibling's job"""
    root_run = LocalRun(local("q0", 1, 11, 12), (
        LocalStep(REC_RDY_DOWN_2, 2),
        LocalStep(REC_RDY_DOWN_3, 3),
        LocalStep(REC_GO, 2),
        LocalStep(REC_HLT, 3),
    ))
    leaf = boss(_a3_run(1), 3, ("rdy",))
    mu2 = boss(_a2_run(4), 2, ("rdy", "rdy", "go"), [leaf])
    mu5 = boss(_a2_run(3), 2, ("rdy", "rdy"), [leaf])
    mu3 = boss(_a3_run(3), 3, ("rdy", "hlt"), [mu5])
    return boss(root_run, 1, (), [mu2, mu3])


@pytest.fixture
def general_tree():
    """
    Boss root over the mirror protocol whose m4 reception on its own value is supplied by a follower

    root: br m2, rec m3 (2), rec m4 (1), br m4
      0: boss v=2 bw m3, child boss v=3 bw m2
      1: follower v=1 fw m2 fm m4
    """
    root_run = LocalRun(local("q0", 1, 40), (
        LocalStep(BR_M2),
        LocalStep(REC_M3, 2),
        LocalStep(REC_M4, 1),
        LocalStep(BR_M4_LOOP),
    ))
    supplier = boss(LocalRun(local("q0", 3, 30), (LocalStep(BR_M2),)), 3, ("m2",))
    answer = boss(
        LocalRun(local("q0", 20, 2), (LocalStep(REC_M2, 3), LocalStep(BR_M3))),
        2, ("m3",), [supplier],
        assignments=((3, 0),)
    )
    echo = follower(
        LocalRun(local("q0", 10, 11), (LocalStep(REC_M2, 1), LocalStep(BR_M3), LocalStep(BR_M4))),
        1, ("m2",), "m4"
    )
    annotation = InitialValueAnnotation(
        value=1,
        decomposition=Decomposition((("m2",), ("m4",)), ("m4",)),
        split=(2,),
        followers=((1, 1),)
    )
    return boss(
        root_run, 1, (), [answer, echo],
        annotations=(annotation,),
        assignments=((2, 0),)
    )
