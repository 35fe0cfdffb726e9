"""
Tests for the command-line interface
"""
import json
from dataclasses import replace

import pytest
from click.testing import CliRunner

from bnra.core.semantics import Run
from bnra.format.codec import serialize_run, serialize_tree
from bnra.format.dsl import parse_protocol
from bnra.main import cli, run_cli
from bnra.reduce.sat import parse_dimacs
from tests.conftest import ECHO_TEXT, MIRROR_TEXT, COLLECTOR_TEXT, ONE_REGISTER_TEXT, DISEQUALITY_TEXT


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path):
    """Write protocol texts into the temporary directory by name"""
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    write.dir = tmp_path
    return write


def invoke(runner, *args):
    result = runner.invoke(cli, [str(arg) for arg in args])
    payload = json.loads(result.stdout) if result.stdout.strip() else None
    return result, payload


class TestCheck:

    def test_valid_protocol(self, runner, files):
        result, payload = invoke(runner, "check", files("mirror.txt", MIRROR_TEXT))
        assert result.exit_code == 0
        assert payload["verdict"] == "ok"
        assert payload["stats"]["name"] == "mirror"
        assert payload["stats"]["transitions"] == 9
        assert payload["stats"]["signature"] is False

    def test_signature_protocol(self, runner, files):
        _, payload = invoke(runner, "check", files("collector.txt", COLLECTOR_TEXT))
        assert payload["stats"]["signature"] is True

    def test_parse_error(self, runner, files):
        path = files("bad.txt", MIRROR_TEXT.replace("trans q0 br(m1,1) q1", "trans q0 br(m9,1) q1"))
        result, payload = invoke(runner, "check", path)
        assert result.exit_code == 2
        assert payload is None
        assert "ProtocolParseException" in result.stderr

    def test_missing_file(self, runner, files):
        result, _ = invoke(runner, "check", files.dir / "absent.txt")
        assert result.exit_code == 2


class TestExplore:

    def test_found_witness_replays(self, runner, files):
        protocol = files("mirror.txt", MIRROR_TEXT)
        witness = files.dir / "run.json"
        result, payload = invoke(runner, "explore", protocol, "-t", "q4", "-n", "2", "-d", "5", "--witness", witness)
        assert result.exit_code == 0
        assert payload["verdict"] == "found"
        assert payload["witness"]["kind"] == "run"
        assert len(payload["witness"]["steps"]) == 3

        result, payload = invoke(runner, "replay", protocol, witness, "--covers", "q4")
        assert result.exit_code == 0
        assert payload["verdict"] == "valid"
        assert payload["stats"] == {"steps": 3, "agents": 2}

    def test_not_found(self, runner, files):
        result, payload = invoke(runner, "explore", files("mirror.txt", MIRROR_TEXT), "-t", "q5", "-n", "2", "-d", "4")
        assert result.exit_code == 1
        assert payload["verdict"] == "not-found-within-bounds"
        assert payload["witness"] is None

    def test_budget(self, runner, files):
        result, payload = invoke(
            runner, "explore", files("mirror.txt", MIRROR_TEXT), "-t", "q4", "-n", "2", "-d", "5", "--max-states", "2"
        )
        assert result.exit_code == 3
        assert payload["verdict"] == "budget-exceeded"

    def test_unknown_target(self, runner, files):
        result, _ = invoke(runner, "explore", files("mirror.txt", MIRROR_TEXT), "-t", "q9", "-n", "2", "-d", "5")
        assert result.exit_code == 2


class TestCover1:

    def test_two_registers_rejected(self, runner, files):
        result, payload = invoke(runner, "cover1", files("mirror.txt", MIRROR_TEXT), "-t", "q4")
        assert result.exit_code == 2
        assert payload is None
        assert "WrongRegisterCountException" in result.stderr

    def test_coverable_with_concrete_run(self, runner, files):
        protocol = files("relay.txt", ONE_REGISTER_TEXT)
        abstract = files.dir / "abstract.json"
        concrete = files.dir / "run.json"
        result, payload = invoke(
            runner, "cover1", protocol, "-t", "q3", "--witness", abstract, "--run", concrete, "--concretize", "8"
        )
        assert result.exit_code == 0
        assert payload["verdict"] == "coverable"
        assert set(payload["witness"]) == {"abstract", "run"}
        assert payload["stats"]["agents"] == 2

        result, payload = invoke(runner, "replay-abstract", protocol, abstract, "--covers", "q3")
        assert result.exit_code == 0
        assert payload["verdict"] == "valid"

        result, payload = invoke(runner, "replay", protocol, concrete, "--covers", "q3")
        assert result.exit_code == 0

    def test_disequality_run_replays_as_given(self, runner, files):
        protocol = files("answer.txt", DISEQUALITY_TEXT)
        concrete = files.dir / "run.json"
        result, payload = invoke(runner, "cover1", protocol, "-t", "q4", "--run", concrete)
        assert result.exit_code == 0
        assert payload["verdict"] == "coverable"

        result, payload = invoke(runner, "replay", protocol, concrete, "--covers", "q4")
        assert result.exit_code == 0
        assert payload["verdict"] == "valid"

    def test_abstract_run_must_cover(self, runner, files):
        protocol = files("relay.txt", ONE_REGISTER_TEXT)
        abstract = files.dir / "abstract.json"
        invoke(runner, "cover1", protocol, "-t", "q2", "--witness", abstract)
        result, payload = invoke(runner, "replay-abstract", protocol, abstract, "--covers", "q3")
        assert result.exit_code == 1
        assert payload["verdict"] == "invalid"


class TestSatPipeline:

    def test_unsatisfiable_formula(self, runner, files):
        cnf = files("unsat.cnf", "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n")
        protocol = files.dir / "sat.txt"
        result, payload = invoke(runner, "reduce", "sat", cnf, "--out", protocol)
        assert result.exit_code == 0
        assert payload["stats"]["target"] == "2'"

        result, payload = invoke(runner, "cover1", protocol, "-t", "2'")
        assert result.exit_code == 1
        assert payload["verdict"] == "not-coverable"

    def test_satisfiable_formula_witness(self, runner, files):
        cnf = files("sat.cnf", "p cnf 1 1\n1 1 1 0\n")
        protocol = files.dir / "sat.txt"
        run = files.dir / "run.json"
        result, payload = invoke(runner, "reduce", "sat", cnf, "--out", protocol, "--witness-run", run)
        assert result.exit_code == 0
        assert payload["verdict"] == "found"

        result, payload = invoke(runner, "replay", protocol, run, "--covers", "1'")
        assert result.exit_code == 0
        assert payload["verdict"] == "valid"

    def test_malformed_dimacs(self, runner, files):
        result, _ = invoke(runner, "reduce", "sat", files("bad.cnf", "p cnf 1 1\n1 0\n"), "--out", files.dir / "p.txt")
        assert result.exit_code == 2
        assert "DocumentParseException" in result.stderr


class TestMachineReductions:

    def test_minsky_witness(self, runner, files):
        machine = files("m.json", json.dumps({
            "locations": ["l0", "l1", "lf"],
            "rules": [
                {"from": "l0", "op": "inc", "counter": 1, "to": "l1"},
                {"from": "l1", "op": "dec", "counter": 1, "to": "lf"},
            ],
            "initial": "l0",
            "final": "lf",
        }))
        protocol, run = files.dir / "minsky.txt", files.dir / "run.json"
        result, payload = invoke(runner, "reduce", "minsky", machine, "--out", protocol, "--witness-run", run)
        assert result.exit_code == 0
        assert payload["stats"]["agents"] == 3

        result, _ = invoke(runner, "replay", protocol, run, "--all-in", "q_f")
        assert result.exit_code == 0

    def test_lcs_without_path(self, runner, files):
        system = files("l.json", json.dumps({
            "locations": ["l0", "l1"],
            "alphabet": ["a"],
            "rules": [{"from": "l0", "op": "pop", "symbol": "a", "to": "l1"}],
            "initial": "l0",
            "final": "l1",
        }))
        protocol, run = files.dir / "lcs.txt", files.dir / "run.json"
        result, payload = invoke(runner, "reduce", "lcs", system, "--out", protocol, "--witness-run", run)
        assert result.exit_code == 1
        assert payload["verdict"] == "not-found-within-bounds"
        assert protocol.exists()
        assert not run.exists()

    def test_unknown_location(self, runner, files):
        system = files("l.json", json.dumps({
            "locations": ["l0"],
            "alphabet": ["a"],
            "rules": [],
            "initial": "l0",
            "final": "l1",
        }))
        result, _ = invoke(runner, "reduce", "lcs", system, "--out", files.dir / "lcs.txt")
        assert result.exit_code == 2


class TestReplay:

    def test_invalid_step_index(self, runner, files, mirror, example_run):
        broken = Run(example_run.initial, example_run.steps[1:])
        run = files("run.json", serialize_run(mirror, broken))
        result, payload = invoke(runner, "replay", files("mirror.txt", MIRROR_TEXT), run)
        assert result.exit_code == 1
        assert payload["verdict"] == "invalid"
        assert payload["stats"]["index"] == 1

    def test_all_in_fails(self, runner, files, mirror, example_run):
        run = files("run.json", serialize_run(mirror, example_run))
        result, payload = invoke(runner, "replay", files("mirror.txt", MIRROR_TEXT), run, "--all-in", "q4")
        assert result.exit_code == 1
        assert payload["verdict"] == "invalid"

    def test_malformed_run_document(self, runner, files):
        result, _ = invoke(runner, "replay", files("mirror.txt", MIRROR_TEXT), files("run.json", "{not json"))
        assert result.exit_code == 2


class TestTree:

    def test_validate_and_minimize(self, runner, files, collector, signature_tree):
        protocol = files("collector.txt", COLLECTOR_TEXT)
        tree = files("tree.json", serialize_tree(collector, signature_tree))
        result, payload = invoke(runner, "tree", "validate", protocol, tree)
        assert result.exit_code == 0
        assert payload["stats"]["nodes"] == 6

        result, payload = invoke(runner, "tree", "minimize", protocol, tree)
        assert result.exit_code == 0
        assert payload["stats"] == {"nodes_before": 6, "nodes_after": 5}

    def test_witness(self, runner, files, collector, signature_tree):
        protocol = files("collector.txt", COLLECTOR_TEXT)
        tree = files("tree.json", serialize_tree(collector, signature_tree))
        result, payload = invoke(runner, "tree", "witness", protocol, tree, "-t", "q4")
        assert result.exit_code == 0
        assert payload["verdict"] == "coverable"
        result, payload = invoke(runner, "tree", "witness", protocol, tree, "-t", "q7")
        assert result.exit_code == 1

    def test_invalid_tree(self, runner, files, collector, signature_tree):
        bare = replace(signature_tree, children=())
        tree = files("tree.json", serialize_tree(collector, bare))
        result, payload = invoke(runner, "tree", "validate", files("collector.txt", COLLECTOR_TEXT), tree)
        assert result.exit_code == 1
        assert payload["verdict"] == "invalid"
        assert {violation["condition"] for violation in payload["witness"]} == {"iii"}

    def test_to_run(self, runner, files, collector, signature_tree):
        protocol = files("collector.txt", COLLECTOR_TEXT)
        run = files.dir / "run.json"
        tree = files("tree.json", serialize_tree(collector, signature_tree))
        result, payload = invoke(runner, "tree", "to-run", protocol, tree, "--out", run)
        assert result.exit_code == 0
        assert payload["stats"] == {"agents": 6, "steps": len(payload["witness"]["steps"]), "partial": False}

        result, _ = invoke(runner, "replay", protocol, run, "--covers", "q4")
        assert result.exit_code == 0

    def test_from_run(self, runner, files, collector, signature_run):
        protocol = files("collector.txt", COLLECTOR_TEXT)
        run = files("run.json", serialize_run(collector, signature_run))
        tree = files.dir / "tree.json"
        result, payload = invoke(runner, "tree", "from-run", protocol, run, "-a", "1", "-v", "1", "--out", tree)
        assert result.exit_code == 0
        assert payload["stats"]["nodes"] == 6

        result, _ = invoke(runner, "tree", "validate", protocol, tree)
        assert result.exit_code == 0


class TestTransform:

    def test_eliminate_local_equality(self, runner, files):
        out = files.dir / "out.txt"
        result, payload = invoke(runner, "transform", "eliminate-local-eq", files("echo.txt", ECHO_TEXT), "-t", "q4", "--out", out)
        assert result.exit_code == 0
        assert payload["stats"]["target"] == "q4@any"
        transformed = parse_protocol(out.read_text(encoding="utf-8"))
        assert "q4@any" in transformed.states

    def test_remove_disequality(self, runner, files):
        text = ONE_REGISTER_TEXT.replace("rec(b,1,=)", "rec(b,1,!=)")
        out = files.dir / "out.txt"
        result, _ = invoke(runner, "transform", "remove-diseq", files("relay.txt", text), "--out", out)
        assert result.exit_code == 0
        assert "!=" not in out.read_text(encoding="utf-8")

    def test_final_message(self, runner, files):
        out = files.dir / "out.txt"
        result, payload = invoke(runner, "transform", "final-message", files("mirror.txt", MIRROR_TEXT), "-t", "q4", "--out", out)
        assert result.exit_code == 0
        message = payload["stats"]["message"]
        assert message in parse_protocol(out.read_text(encoding="utf-8")).messages


class TestGenerate:

    def test_same_seed_same_output(self, runner):
        first = runner.invoke(cli, ["generate", "protocol", "--seed", "3"])
        second = runner.invoke(cli, ["generate", "protocol", "--seed", "3"])
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        assert len(parse_protocol(first.stdout).states) == 4

    def test_cnf(self, runner):
        result = runner.invoke(cli, ["generate", "cnf", "--seed", "5", "--variables", "4", "--clauses", "2"])
        formula = parse_dimacs(result.stdout)
        assert formula.variables == 4
        assert len(formula.clauses) == 2

    def test_signature_needs_two_registers(self, runner):
        result = runner.invoke(cli, ["generate", "signature", "--registers", "1"])
        assert result.exit_code == 2


class TestRunCli:

    def test_returns_exit_codes(self, files, capsys):
        assert run_cli(["check", files("mirror.txt", MIRROR_TEXT)]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "ok"
        assert run_cli(["explore", files("mirror.txt", MIRROR_TEXT), "-t", "q5", "-n", "2", "-d", "2"]) == 1

    def test_usage_errors(self, capsys):
        assert run_cli(["explore"]) == 2
        assert run_cli(["no-such-command"]) == 2
        assert "Usage" in capsys.readouterr().err

    def test_version(self, capsys):
        assert run_cli(["--version"]) == 0
        assert "bnra" in capsys.readouterr().out
