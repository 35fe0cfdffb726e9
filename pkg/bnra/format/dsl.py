"""
Line-oriented protocol DSL

    protocol NAME
    registers R
    messages m1 m2 ...
    states q0 q1 ...
    init q0
    localtests on
    trans q br(m,i) q'
    trans q rec(m,i,=|!=|down|any) q'
    trans q loc(i,j,=|!=) q'

One declaration per line, '#' starts a comment.
"""
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from bnra.core.protocol import Action, Operation, Protocol, Transition, validate_protocol
from bnra.exceptions import ProtocolParseException

_IDENT = r"[^\s(),#]+"
_OP = re.compile(
    rf"^(?P<kind>br|rec|loc)\(\s*(?P<args>[^()]*)\)$"
)
_IDENT_RE = re.compile(rf"^{_IDENT}$")
_ACTIONS = {"=": Action.EQ, "!=": Action.NEQ, "down": Action.DOWN, "any": Action.ANY}


@dataclass(frozen=True)
class ProtocolDocument:
    """Parsed protocol with the source line of every transition"""
    protocol: Protocol
    locations: Tuple[int, ...]
    text: str


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.diagnostics: List[Dict[str, Any]] = []
        self.name = "protocol"
        self.registers: Optional[int] = None
        self.messages: List[str] = []
        self.states: List[str] = []
        self.initial: Optional[str] = None
        self.local_tests = False
        self.transitions: List[Transition] = []
        self.locations: List[int] = []
        self._pending: List[Tuple[int, int, str, str, str, str]] = []
    
    def error(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append({"line": line, "column": column, "message": message})
    
    def parse(self) -> ProtocolDocument:
        for number, raw in enumerate(self.text.splitlines(), start=1):
            self._parse_line(number, raw.rstrip("\r"))
        for line, column, source, op_text, target, op_column in self._pending:
            self._resolve(line, column, source, op_text, target, op_column)
        if self.registers is None:
            self.error(1, 1, "missing 'registers' declaration")
        if self.initial is None:
            self.error(1, 1, "missing 'init' declaration")
        if self.diagnostics:
            raise ProtocolParseException(self.diagnostics)
        protocol = Protocol(
            name=self.name,
            states=tuple(self.states),
            initial_state=self.initial,
            messages=tuple(self.messages),
            registers=self.registers,
            transitions=tuple(self.transitions),
            local_tests=self.local_tests
        )
        problems = validate_protocol(protocol)
        if problems:
            raise ProtocolParseException([
                {"line": self._line_of(problem), "column": 1, "message": problem}
                for problem in problems
            ])
        return ProtocolDocument(protocol, tuple(self.locations), self.text)
    
    def _line_of(self, problem: str) -> int:
        match = re.match(r"transition (\d+) ", problem)
        if match and int(match.group(1)) < len(self.locations):
            return self.locations[int(match.group(1))]
        return 1
    
    def _parse_line(self, number: int, raw: str) -> None:
        content = raw.split("#", 1)[0]
        if not content.strip():
            return
        column = len(content) - len(content.lstrip()) + 1
        parts = content.split()
        keyword, args = parts[0], parts[1:]
        
        if keyword == "protocol":
            if len(args) != 1:
                self.error(number, column, "expected 'protocol NAME'")
            else:
                self.name = args[0]
        elif keyword == "registers":
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) < 1:
                self.error(number, column, "expected a positive register count")
            else:
                self.registers = int(args[0])
        elif keyword == "messages":
            self.messages.extend(self._idents(number, content, args))
        elif keyword == "states":
            self.states.extend(self._idents(number, content, args))
        elif keyword == "init":
            if len(args) != 1:
                self.error(number, column, "expected 'init STATE'")
            else:
                self.initial = args[0]
        elif keyword == "localtests":
            if args not in (["on"], ["off"]):
                self.error(number, column, "expected 'localtests on|off'")
            else:
                self.local_tests = args[0] == "on"
        elif keyword == "trans":
            match = re.match(rf"^\s*trans\s+({_IDENT})\s+(\S+)\s+({_IDENT})\s*$", content)
            if not match:
                self.error(number, column, "expected 'trans SOURCE OP TARGET'")
                return
            source, op_text, target = match.groups()
            self._pending.append(
                (number, match.start(1) + 1, source, op_text, target, match.start(2) + 1)
            )
        else:
            self.error(number, column, f"unknown declaration '{keyword}'")
    
    def _idents(self, number: int, content: str, args: List[str]) -> List[str]:
        good = []
        for arg in args:
            if _IDENT_RE.match(arg):
                good.append(arg)
            else:
                self.error(number, content.find(arg) + 1, f"invalid identifier '{arg}'")
        return good
    
    def _resolve(self, line, column, source, op_text, target, op_column) -> None:
        for state, offset in ((source, column), (target, None)):
            if state not in self.states:
                where = offset if offset is not None else op_column + len(op_text) + 1
                self.error(line, where, f"unknown state '{state}'")
        operation = self._operation(line, op_column, op_text)
        if operation is None:
            return
        if operation.message is not None and operation.message not in self.messages:
            self.error(line, op_column, f"unknown message '{operation.message}'")
            return
        self.transitions.append(Transition(source=source, op=operation, target=target))
        self.locations.append(line)
    
    def _operation(self, line: int, column: int, text: str) -> Optional[Operation]:
        match = _OP.match(text)
        if not match:
            self.error(line, column, f"malformed operation '{text}'")
            return None
        kind = match.group("kind")
        args = [arg.strip() for arg in match.group("args").split(",")]
        expected = {"br": 2, "rec": 3, "loc": 3}[kind]
        if len(args) != expected:
            self.error(line, column, f"{kind} takes {expected} arguments")
            return None
        registers = args[1:2] if kind != "loc" else args[:2]
        if not all(register.isdigit() for register in registers):
            self.error(line, column, "register index must be a number")
            return None
        if kind == "br":
            return Operation.br(args[0], int(args[1]))
        action = _ACTIONS.get(args[2])
        if action is None:
            self.error(line, column + text.find(args[2]), f"unknown action '{args[2]}'")
            return None
        if kind == "rec":
            return Operation.rec(args[0], int(args[1]), action)
        if action not in (Action.EQ, Action.NEQ):
            self.error(line, column, "local tests take = or !=")
            return None
        return Operation.loc(int(args[0]), int(args[1]), action)


def parse_protocol_document(text: str) -> ProtocolDocument:
    """
    Parse protocol text keeping source locations
    
    Raises:
        ProtocolParseException: with one (line, column, message) diagnostic per problem
    """
    return _Parser(text).parse()


def parse_protocol(text: str) -> Protocol:
    return parse_protocol_document(text).protocol


def print_protocol(protocol: Protocol) -> str:
    """Deterministic DSL rendering; parse(print(p)) == p"""
    lines = [
        f"protocol {protocol.name}",
        f"registers {protocol.registers}",
        "messages " + " ".join(protocol.messages) if protocol.messages else "messages",
        "states " + " ".join(protocol.states),
        f"init {protocol.initial_state}",
    ]
    if protocol.local_tests:
        lines.append("localtests on")
    lines.extend(f"trans {transition}" for transition in protocol.transitions)
    return "\n".join(lines) + "\n"
