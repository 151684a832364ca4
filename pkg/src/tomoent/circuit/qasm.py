"""OpenQASM 2.0 subset: one quantum register, one classical register and the
gates of :class:`~tomoent.circuit.core.GateKind`.

Angles may be arithmetic expressions over numbers and ``pi`` using
``+ - * /`` and parentheses. Emitted angles use 17 significant digits, so
``parse_qasm(emit_qasm(c)) == c`` exactly.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .core import Circuit, Gate, GateKind, tomography_circuits

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,()\[\]+\-*/])
    """,
    re.VERBOSE,
)

_GATE_NAMES = {
    "h": GateKind.H, "x": GateKind.X, "s": GateKind.S, "sdg": GateKind.SDG,
    "u3": GateKind.U3, "cx": GateKind.CNOT, "swap": GateKind.SWAP,
}
_N_PARAMS = {GateKind.U3: 3}


class QasmError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message, self.line, self.col = message, line, col


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise QasmError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            toks.append(_Tok(kind if kind != "sym" else text, text, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, source: str):
        self.toks = _tokenize(source)
        self.i = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.gates: list[tuple[Gate, _Tok]] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise QasmError(message, tok.line, tok.col)

    def take(self, kind: str, what: str | None = None) -> _Tok:
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            self.error(f"expected {what or repr(kind)}, found {found!r}")
        self.i += 1
        return tok

    def accept(self, kind: str) -> bool:
        if self.tok.kind == kind:
            self.i += 1
            return True
        return False

    # expressions
    def expr(self) -> float:
        value = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.take(self.tok.kind).kind
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.take(self.tok.kind)
            rhs = self.unary()
            if op.kind == "/" and rhs == 0:
                self.error("division by zero", op)
            value = value * rhs if op.kind == "*" else value / rhs
        return value

    def unary(self) -> float:
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return float(tok.text)
        if tok.kind == "id":
            if tok.text != "pi":
                self.error(f"unknown identifier {tok.text!r} in expression")
            self.i += 1
            return math.pi
        if self.accept("("):
            value = self.expr()
            self.take(")", "')'")
            return value
        self.error(f"expected a number, 'pi' or '(', found {tok.text or 'end of input'!r}")

    # statements
    def program(self) -> Circuit:
        head = self.take("id", "'OPENQASM'")
        if head.text != "OPENQASM":
            self.error("a program must start with 'OPENQASM 2.0;'", head)
        version = self.take("number", "a version number")
        if version.text not in ("2", "2.0"):
            self.error(f"unsupported OpenQASM version {version.text}", version)
        self.take(";", "';'")
        while self.tok.kind != "eof":
            self.statement()
        if self.qreg is None:
            self.error("no quantum register declared")
        circuit = Circuit(self.qreg[1], self.creg[1] if self.creg else 0)
        for gate, tok in self.gates:
            try:
                circuit.append(gate)
            except (ValueError, IndexError) as exc:
                self.error(str(exc), tok)
        return circuit

    def statement(self):
        tok = self.take("id", "a statement")
        name = tok.text
        if name == "include":
            inc = self.take("string", "a file name")
            if inc.text != '"qelib1.inc"':
                self.error(f"only qelib1.inc may be included, not {inc.text}", inc)
        elif name in ("qreg", "creg"):
            self.register(name, tok)
        elif name == "measure":
            q = self.qubit()
            self.take("arrow", "'->'")
            c = self.clbit()
            self.gates.append((Gate(GateKind.MEASURE, (q,), clbit=c), tok))
        elif name == "barrier":
            qubits = self.qubit_list(allow_register=True)
            self.gates.append((Gate(GateKind.BARRIER, tuple(qubits)), tok))
        elif name in _GATE_NAMES:
            self.gate(_GATE_NAMES[name], tok)
        else:
            self.error(f"unsupported statement or gate {name!r}", tok)
        self.take(";", "';'")

    def register(self, kind: str, tok: _Tok):
        if (self.qreg if kind == "qreg" else self.creg) is not None:
            self.error(f"only one {kind} is supported", tok)
        if self.gates:
            self.error(f"{kind} must be declared before any operation", tok)
        name = self.take("id", "a register name").text
        self.take("[", "'['")
        size_tok = self.take("number", "a register size")
        if not size_tok.text.isdigit() or int(size_tok.text) < 1:
            self.error("register size must be a positive integer", size_tok)
        self.take("]", "']'")
        if kind == "qreg":
            self.qreg = (name, int(size_tok.text))
        else:
            self.creg = (name, int(size_tok.text))

    def _indexed(self, reg: tuple[str, int] | None, what: str, allow_register=False) -> list[int]:
        tok = self.take("id", f"a {what} register")
        if reg is None:
            self.error(f"no {what} register declared", tok)
        if tok.text != reg[0]:
            self.error(f"unknown {what} register {tok.text!r}", tok)
        if not self.accept("["):
            if allow_register:
                return list(range(reg[1]))
            self.error(f"expected '[' after {tok.text}")
        idx = self.take("number", "an index")
        if not idx.text.isdigit():
            self.error("index must be a non-negative integer", idx)
        if int(idx.text) >= reg[1]:
            self.error(f"index {idx.text} out of range for {reg[0]}[{reg[1]}]", idx)
        self.take("]", "']'")
        return [int(idx.text)]

    def qubit(self) -> int:
        return self._indexed(self.qreg, "quantum")[0]

    def clbit(self) -> int:
        return self._indexed(self.creg, "classical")[0]

    def qubit_list(self, allow_register=False) -> list[int]:
        qubits = self._indexed(self.qreg, "quantum", allow_register)
        while self.accept(","):
            qubits += self._indexed(self.qreg, "quantum", allow_register)
        return qubits

    def gate(self, kind: GateKind, tok: _Tok):
        params = []
        if self.accept("("):
            params.append(self.expr())
            while self.accept(","):
                params.append(self.expr())
            self.take(")", "')'")
        if len(params) != _N_PARAMS.get(kind, 0):
            self.error(f"{tok.text} takes {_N_PARAMS.get(kind, 0)} parameter(s), got {len(params)}", tok)
        qubits = self.qubit_list()
        try:
            gate = Gate(kind, tuple(qubits), tuple(params))
        except ValueError as exc:
            self.error(str(exc), tok)
        self.gates.append((gate, tok))


def parse_qasm(source: str) -> Circuit:
    return _Parser(source).program()


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_qasm(circuit: Circuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for g in circuit.gates:
        args = ",".join(f"q[{q}]" for q in g.targets)
        if g.kind is GateKind.MEASURE:
            lines.append(f"measure {args} -> c[{g.clbit}];")
        elif g.params:
            lines.append(f"{g.kind.value}({','.join(_fmt(p) for p in g.params)}) {args};")
        else:
            lines.append(f"{g.kind.value} {args};")
    return "\n".join(lines) + "\n"


def emit_suite(prep: Circuit, qubits, axes=("x", "y", "z")) -> dict[str, str]:
    """QASM text of every tomography circuit, keyed ``meas_<setting>.qasm`` in lexicographic order."""
    return {f"meas_{''.join(s)}.qasm": emit_qasm(c) for s, c in tomography_circuits(prep, qubits, axes).items()}
