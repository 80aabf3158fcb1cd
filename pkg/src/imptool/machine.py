"""Stack machine: instruction set, executable semantics, and the compiler.

The machine is a program counter, a store, and an integer stack (top first).
It halts cleanly as soon as the pc leaves [0, len(program)); a negative pc
halts exactly like running off the end.  Popping an empty stack is an error,
reported on the step it occurs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .smallstep import star_closure
from .syntax import (
    AExp,
    And,
    Assign,
    BExp,
    BoolLit,
    Com,
    If,
    Less,
    Not,
    NumLit,
    Plus,
    Seq,
    Skip,
    State,
    Var,
    While,
)


# --- instructions -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LoadI:
    value: int


@dataclass(frozen=True, slots=True)
class Load:
    name: str


@dataclass(frozen=True, slots=True)
class Add:
    pass


@dataclass(frozen=True, slots=True)
class Store:
    name: str


@dataclass(frozen=True, slots=True)
class Jmp:
    offset: int


@dataclass(frozen=True, slots=True)
class JmpLess:
    offset: int


@dataclass(frozen=True, slots=True)
class JmpGe:
    offset: int


Instr = Union[LoadI, Load, Add, Store, Jmp, JmpLess, JmpGe]
Program = Sequence[Instr]


@dataclass(frozen=True, slots=True)
class MachineConfig:
    pc: int
    state: State
    stack: tuple[int, ...] = ()  # top of stack first


class StopReason(Enum):
    OUT_OF_PROGRAM = "out-of-program"
    STACK_UNDERFLOW = "stack-underflow"
    FUEL_EXHAUSTED = "fuel-exhausted"


@dataclass(frozen=True, slots=True)
class Halted:
    final: MachineConfig
    steps_taken: int


@dataclass(frozen=True, slots=True)
class StuckOrExhausted:
    last: MachineConfig
    steps_taken: int
    reason: StopReason


MachineOutcome = Union[Halted, StuckOrExhausted]


class StackUnderflowError(Exception):
    def __init__(self, config: MachineConfig) -> None:
        super().__init__(f"instruction at pc={config.pc} pops an empty stack")
        self.config = config


# --- execution -----------------------------------------------------------------


def exec1(prog: Program, cfg: MachineConfig) -> Optional[MachineConfig]:
    """One machine step; None when the pc is outside the program."""
    pc = cfg.pc
    if pc < 0 or pc >= len(prog):
        return None
    instr = prog[pc]
    t = type(instr)
    s = cfg.state
    stk = cfg.stack
    if t is LoadI:
        return MachineConfig(pc + 1, s, (instr.value,) + stk)
    if t is Load:
        return MachineConfig(pc + 1, s, (s.read(instr.name),) + stk)
    if t is Add:
        if len(stk) < 2:
            raise StackUnderflowError(cfg)
        return MachineConfig(pc + 1, s, (stk[1] + stk[0],) + stk[2:])
    if t is Store:
        if not stk:
            raise StackUnderflowError(cfg)
        return MachineConfig(pc + 1, s.update(instr.name, stk[0]), stk[1:])
    if t is Jmp:
        return MachineConfig(pc + 1 + instr.offset, s, stk)
    if t is JmpLess:
        if len(stk) < 2:
            raise StackUnderflowError(cfg)
        taken = stk[1] < stk[0]
        return MachineConfig(pc + 1 + (instr.offset if taken else 0), s, stk[2:])
    if t is JmpGe:
        if len(stk) < 2:
            raise StackUnderflowError(cfg)
        taken = stk[1] >= stk[0]
        return MachineConfig(pc + 1 + (instr.offset if taken else 0), s, stk[2:])
    raise TypeError(f"not an instruction: {instr!r}")


def _stop_reason(prog: Program, cfg: MachineConfig) -> Optional[StopReason]:
    """Why this config cannot take a step, or None if it can."""
    pc = cfg.pc
    if pc < 0 or pc >= len(prog):
        return StopReason.OUT_OF_PROGRAM
    t = type(prog[pc])
    depth = len(cfg.stack)
    if (t is Add or t is JmpLess or t is JmpGe) and depth < 2:
        return StopReason.STACK_UNDERFLOW
    if t is Store and depth < 1:
        return StopReason.STACK_UNDERFLOW
    return None


def machine_trace(prog: Program, cfg: MachineConfig, fuel: int) -> list[MachineConfig]:
    """The chain of configurations reached within fuel steps."""

    def step(c: MachineConfig) -> Optional[MachineConfig]:
        if _stop_reason(prog, c) is not None:
            return None
        return exec1(prog, c)

    return star_closure(step, cfg, fuel)


def execute(prog: Program, cfg: MachineConfig, fuel: int) -> MachineOutcome:
    """Run until clean halt, stack underflow, or fuel exhaustion."""
    trace = machine_trace(prog, cfg, fuel)
    last = trace[-1]
    steps = len(trace) - 1
    reason = _stop_reason(prog, last)
    if reason is StopReason.OUT_OF_PROGRAM:
        return Halted(last, steps)
    if reason is StopReason.STACK_UNDERFLOW:
        return StuckOrExhausted(last, steps, reason)
    return StuckOrExhausted(last, steps, StopReason.FUEL_EXHAUSTED)


def exec_n(prog: Program, cfg: MachineConfig, n: int) -> Union[MachineConfig, StuckOrExhausted]:
    """Exactly n steps; on an early stop, reports steps completed and why."""
    current = cfg
    for done in range(n):
        reason = _stop_reason(prog, current)
        if reason is not None:
            return StuckOrExhausted(current, done, reason)
        current = exec1(prog, current)
    return current


def steps_to_halt(prog: Program, cfg: MachineConfig, fuel: int) -> Optional[int]:
    """Steps until a clean halt, or None if the run does not halt in fuel."""
    outcome = execute(prog, cfg, fuel)
    if type(outcome) is Halted:
        return outcome.steps_taken
    return None


def trace_records(prog: Program, trace: Sequence[MachineConfig]) -> list[dict]:
    """JSON-ready records for a machine trace, one per configuration."""
    records: list[dict] = []
    prev: Optional[MachineConfig] = None
    for step, cfg in enumerate(trace):
        record = {"step": step, "pc": cfg.pc, "stack": list(cfg.stack)}
        if prev is not None and prev.state != cfg.state:
            for name in sorted(prev.state.bound_names() | cfg.state.bound_names()):
                if prev.state.read(name) != cfg.state.read(name):
                    record["changed_binding"] = {"name": name, "value": cfg.state.read(name)}
                    break
        records.append(record)
        prev = cfg
    return records


# --- compiler -------------------------------------------------------------------


def acomp(a: AExp) -> list[Instr]:
    """Compile an arithmetic expression to code leaving its value on top."""
    t = type(a)
    if t is NumLit:
        return [LoadI(a.value)]
    if t is Var:
        return [Load(a.name)]
    if t is Plus:
        return acomp(a.left) + acomp(a.right) + [Add()]
    raise TypeError(f"not an arithmetic expression: {a!r}")


def bcomp(b: BExp, jump_if: bool, offset: int) -> list[Instr]:
    """Compile a condition to code that jumps `offset` past its own end when
    the condition evaluates to `jump_if`, and falls through otherwise.

    Conjunctions short-circuit; only forward jumps are ever requested.
    """
    if offset < 0:
        raise ValueError("bcomp offsets must be non-negative")
    t = type(b)
    if t is BoolLit:
        return [Jmp(offset)] if b.value == jump_if else []
    if t is Not:
        return bcomp(b.inner, not jump_if, offset)
    if t is And:
        code_right = bcomp(b.right, jump_if, offset)
        skip = len(code_right) if jump_if else len(code_right) + offset
        return bcomp(b.left, False, skip) + code_right
    if t is Less:
        jump = JmpLess(offset) if jump_if else JmpGe(offset)
        return acomp(b.left) + acomp(b.right) + [jump]
    raise TypeError(f"not a boolean expression: {b!r}")


def ccomp(c: Com) -> list[Instr]:
    """Compile a command.  Compiled code ends with the pc one past the end."""
    code: list[Instr] = []
    stack: list[Com] = [c]
    while stack:
        node = stack.pop()
        t = type(node)
        if t is Seq:
            stack.append(node.second)
            stack.append(node.first)
        elif t is Skip:
            pass
        elif t is Assign:
            code += acomp(node.rhs)
            code.append(Store(node.target))
        elif t is If:
            code_then = ccomp(node.then_branch)
            code_else = ccomp(node.else_branch)
            code += bcomp(node.cond, False, len(code_then) + 1)
            code += code_then
            code.append(Jmp(len(code_else)))
            code += code_else
        elif t is While:
            body = ccomp(node.body)
            cond = bcomp(node.cond, False, len(body) + 1)
            code += cond
            code += body
            code.append(Jmp(-(len(cond) + len(body) + 1)))
        else:
            raise TypeError(f"not a command: {node!r}")
    return code


def jumps_in_range(prog: Program) -> bool:
    """True iff every jump lands inside [0, len(prog)]."""
    size = len(prog)
    for i, instr in enumerate(prog):
        t = type(instr)
        if t is Jmp or t is JmpLess or t is JmpGe:
            target = i + 1 + instr.offset
            if target < 0 or target > size:
                return False
    return True
