"""Hoare-logic tooling for IMP: evaluable assertions, weakest preconditions
for loop-free code, verification conditions for annotated programs, and
bounded semantic checking of triples.

Assertions are quantifier-free formulas over program variables, evaluated
directly on states.  Entailment and triple validity are decided by
exhaustively enumerating states within a bound, so a Valid verdict always
means valid-within-bound and a counterexample is always a genuine state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Iterator, Optional, Union

from .bigstep import Terminated, big_step
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
    aval,
    vars_of,
)

if TYPE_CHECKING:
    from .parser import SourceSpan

# Snapshot variables introduced by total-correctness VCs use this prefix;
# the parser rejects it in user programs so they can never collide.
SNAPSHOT_PREFIX = "__z"

# Entailment refuses to enumerate more states than this.
ENUMERATION_LIMIT = 10**7


# --- assertions -----------------------------------------------------------------


class CmpOp(Enum):
    LT = "<"
    LE = "<="
    EQ = "="


@dataclass(frozen=True, slots=True)
class ATrue:
    pass


@dataclass(frozen=True, slots=True)
class AFalse:
    pass


@dataclass(frozen=True, slots=True)
class ACmp:
    op: CmpOp
    left: AExp
    right: AExp


@dataclass(frozen=True, slots=True)
class ANot:
    inner: "Assertion"


@dataclass(frozen=True, slots=True)
class AAnd:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True, slots=True)
class AOr:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True, slots=True)
class AImp:
    premise: "Assertion"
    conclusion: "Assertion"


Assertion = Union[ATrue, AFalse, ACmp, ANot, AAnd, AOr, AImp]


def eval_assertion(a: Assertion, s: State) -> bool:
    t = type(a)
    if t is ATrue:
        return True
    if t is AFalse:
        return False
    if t is ACmp:
        lv = aval(a.left, s)
        rv = aval(a.right, s)
        if a.op is CmpOp.LT:
            return lv < rv
        if a.op is CmpOp.LE:
            return lv <= rv
        return lv == rv
    if t is ANot:
        return not eval_assertion(a.inner, s)
    if t is AAnd:
        return eval_assertion(a.left, s) and eval_assertion(a.right, s)
    if t is AOr:
        return eval_assertion(a.left, s) or eval_assertion(a.right, s)
    if t is AImp:
        return (not eval_assertion(a.premise, s)) or eval_assertion(a.conclusion, s)
    raise TypeError(f"not an assertion: {a!r}")


def assertion_vars(a: Assertion) -> set[str]:
    """Identifiers occurring in an assertion."""
    seen: set[str] = set()
    stack: list[Assertion] = [a]
    while stack:
        node = stack.pop()
        t = type(node)
        if t is ACmp:
            seen |= vars_of(node.left)
            seen |= vars_of(node.right)
        elif t is ANot:
            stack.append(node.inner)
        elif t is AAnd or t is AOr:
            stack.append(node.left)
            stack.append(node.right)
        elif t is AImp:
            stack.append(node.premise)
            stack.append(node.conclusion)
    return seen


def bexp_to_assertion(b: BExp) -> Assertion:
    """The assertion holding exactly where the boolean expression is true."""
    t = type(b)
    if t is BoolLit:
        return ATrue() if b.value else AFalse()
    if t is Not:
        return ANot(bexp_to_assertion(b.inner))
    if t is And:
        return AAnd(bexp_to_assertion(b.left), bexp_to_assertion(b.right))
    if t is Less:
        return ACmp(CmpOp.LT, b.left, b.right)
    raise TypeError(f"not a boolean expression: {b!r}")


# --- substitution ----------------------------------------------------------------


def subst_aexp(a: AExp, name: str, replacement: AExp) -> AExp:
    t = type(a)
    if t is Var:
        return replacement if a.name == name else a
    if t is NumLit:
        return a
    if t is Plus:
        return Plus(subst_aexp(a.left, name, replacement), subst_aexp(a.right, name, replacement))
    raise TypeError(f"not an arithmetic expression: {a!r}")


def subst_assertion(a: Assertion, name: str, replacement: AExp) -> Assertion:
    """Substitute an arithmetic expression for a variable in an assertion."""
    t = type(a)
    if t is ATrue or t is AFalse:
        return a
    if t is ACmp:
        return ACmp(a.op, subst_aexp(a.left, name, replacement), subst_aexp(a.right, name, replacement))
    if t is ANot:
        return ANot(subst_assertion(a.inner, name, replacement))
    if t is AAnd:
        return AAnd(subst_assertion(a.left, name, replacement), subst_assertion(a.right, name, replacement))
    if t is AOr:
        return AOr(subst_assertion(a.left, name, replacement), subst_assertion(a.right, name, replacement))
    if t is AImp:
        return AImp(subst_assertion(a.premise, name, replacement), subst_assertion(a.conclusion, name, replacement))
    raise TypeError(f"not an assertion: {a!r}")


# --- bounded entailment -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Valid:
    pass


@dataclass(frozen=True, slots=True)
class CounterexampleFound:
    state: State


@dataclass(frozen=True, slots=True)
class Unknown:
    detail: str = ""


Verdict = Union[Valid, CounterexampleFound, Unknown]


def state_space_size(variables: Iterable[str], bound: int) -> int:
    return (2 * bound + 1) ** len(set(variables))


def enumerate_states(variables: Iterable[str], bound: int) -> Iterator[State]:
    """All states giving each listed variable a value in [-bound, bound] and
    every other identifier 0, in lexicographic order over the sorted names
    with values ascending."""
    ordered = sorted(set(variables))
    values = range(-bound, bound + 1)
    for combo in itertools.product(values, repeat=len(ordered)):
        yield State(zip(ordered, combo))


def entails(p: Assertion, q: Assertion, variables: Iterable[str], bound: int) -> Verdict:
    """Does p entail q on every enumerated state?

    Returns the first falsifying state in enumeration order, or Unknown when
    the state space would exceed the enumeration limit.
    """
    names = sorted(set(variables))
    if state_space_size(names, bound) > ENUMERATION_LIMIT:
        return Unknown(f"state space exceeds {ENUMERATION_LIMIT} states")
    for s in enumerate_states(names, bound):
        if eval_assertion(p, s) and not eval_assertion(q, s):
            return CounterexampleFound(s)
    return Valid()


def check_valid(formula: Assertion, variables: Iterable[str], bound: int) -> Verdict:
    """Validity of a formula over the enumerated states."""
    return entails(ATrue(), formula, variables, bound)


# --- weakest preconditions ----------------------------------------------------------


def wp_loop_free(c: Com, post: Assertion) -> Assertion:
    """Weakest precondition of a loop-free command.

    Raises ValueError if the command contains a while loop.
    """
    t = type(c)
    if t is Skip:
        return post
    if t is Assign:
        return subst_assertion(post, c.target, c.rhs)
    if t is Seq:
        chain: list[Com] = []
        node: Com = c
        while type(node) is Seq:
            chain.append(node.first)
            node = node.second
        chain.append(node)
        for part in reversed(chain):
            post = wp_loop_free(part, post)
        return post
    if t is If:
        cond = bexp_to_assertion(c.cond)
        return AAnd(
            AImp(cond, wp_loop_free(c.then_branch, post)),
            AImp(ANot(cond), wp_loop_free(c.else_branch, post)),
        )
    if t is While:
        raise ValueError("wp_loop_free: command contains a while loop")
    raise TypeError(f"not a command: {c!r}")


# --- annotated commands ----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AnnSkip:
    pass


@dataclass(frozen=True, slots=True)
class AnnAssign:
    target: str
    rhs: AExp


@dataclass(frozen=True, slots=True)
class AnnSeq:
    first: "AnnotatedCom"
    second: "AnnotatedCom"


@dataclass(frozen=True, slots=True)
class AnnIf:
    cond: BExp
    then_branch: "AnnotatedCom"
    else_branch: "AnnotatedCom"


@dataclass(frozen=True, slots=True)
class AnnWhile:
    cond: BExp
    body: "AnnotatedCom"
    invariant: Optional[Assertion] = None
    measure: Optional[AExp] = None
    span: "Optional[SourceSpan]" = None


AnnotatedCom = Union[AnnSkip, AnnAssign, AnnSeq, AnnIf, AnnWhile]


def erase(c: AnnotatedCom) -> Com:
    """Drop annotations, yielding the plain command."""
    t = type(c)
    if t is AnnSkip:
        return Skip()
    if t is AnnAssign:
        return Assign(c.target, c.rhs)
    if t is AnnSeq:
        chain: list[AnnotatedCom] = []
        node: AnnotatedCom = c
        while type(node) is AnnSeq:
            chain.append(node.first)
            node = node.second
        out = erase(node)
        for part in reversed(chain):
            out = Seq(erase(part), out)
        return out
    if t is AnnIf:
        return If(c.cond, erase(c.then_branch), erase(c.else_branch))
    if t is AnnWhile:
        return While(c.cond, erase(c.body))
    raise TypeError(f"not an annotated command: {c!r}")


def annotate(c: Com) -> AnnotatedCom:
    """Lift a plain command; loops get empty annotations."""
    t = type(c)
    if t is Skip:
        return AnnSkip()
    if t is Assign:
        return AnnAssign(c.target, c.rhs)
    if t is Seq:
        chain: list[Com] = []
        node: Com = c
        while type(node) is Seq:
            chain.append(node.first)
            node = node.second
        out = annotate(node)
        for part in reversed(chain):
            out = AnnSeq(annotate(part), out)
        return out
    if t is If:
        return AnnIf(c.cond, annotate(c.then_branch), annotate(c.else_branch))
    if t is While:
        return AnnWhile(c.cond, annotate(c.body))
    raise TypeError(f"not a command: {c!r}")


# --- verification conditions -------------------------------------------------------------


class Mode(Enum):
    PARTIAL = "partial"
    TOTAL = "total"


class MissingAnnotationError(Exception):
    def __init__(self, message: str, span: "Optional[SourceSpan]" = None) -> None:
        if span is not None:
            message = f"{span.start_line}:{span.start_col}: {message}"
        super().__init__(message)
        self.span = span


@dataclass(frozen=True, slots=True)
class VerificationCondition:
    label: str
    formula: Assertion


@dataclass(frozen=True)
class VcResult:
    conditions: tuple[VerificationCondition, ...]
    precondition: Assertion


def vcgen(c: AnnotatedCom, post: Assertion, mode: Mode) -> VcResult:
    """Verification conditions and computed precondition for an annotated
    command against a postcondition.

    Every loop needs an invariant; in total mode also a measure.  Each loop
    in total mode gets a fresh snapshot variable `__z0`, `__z1`, ... that
    freezes the measure across one body iteration.
    """
    conditions: list[VerificationCondition] = []
    counters = {"snapshot": 0, "loop": 0}

    def pre(node: AnnotatedCom, post: Assertion) -> Assertion:
        t = type(node)
        if t is AnnSkip:
            return post
        if t is AnnAssign:
            return subst_assertion(post, node.target, node.rhs)
        if t is AnnSeq:
            chain: list[AnnotatedCom] = []
            walk: AnnotatedCom = node
            while type(walk) is AnnSeq:
                chain.append(walk.first)
                walk = walk.second
            chain.append(walk)
            for part in reversed(chain):
                post = pre(part, post)
            return post
        if t is AnnIf:
            cond = bexp_to_assertion(node.cond)
            return AAnd(
                AImp(cond, pre(node.then_branch, post)),
                AImp(ANot(cond), pre(node.else_branch, post)),
            )
        if t is AnnWhile:
            ordinal = counters["loop"]
            counters["loop"] += 1
            if node.span is not None:
                label = f"loop@{node.span.start_line}:{node.span.start_col}"
            else:
                label = f"loop#{ordinal}"
            inv = node.invariant
            if inv is None:
                raise MissingAnnotationError(
                    f"{label}: loop needs an invariant annotation", node.span
                )
            cond = bexp_to_assertion(node.cond)
            if mode is Mode.TOTAL:
                if node.measure is None:
                    raise MissingAnnotationError(
                        f"{label}: total-correctness check needs a measure annotation",
                        node.span,
                    )
                snapshot = Var(f"{SNAPSHOT_PREFIX}{counters['snapshot']}")
                counters["snapshot"] += 1
                body_post = AAnd(inv, ACmp(CmpOp.LT, node.measure, snapshot))
                body_pre = pre(node.body, body_post)
                conditions.append(
                    VerificationCondition(
                        f"{label}: invariant preserved and measure decreases",
                        AImp(
                            AAnd(AAnd(inv, cond), ACmp(CmpOp.EQ, node.measure, snapshot)),
                            body_pre,
                        ),
                    )
                )
                conditions.append(
                    VerificationCondition(
                        f"{label}: measure non-negative",
                        AImp(inv, ACmp(CmpOp.LE, NumLit(0), node.measure)),
                    )
                )
            else:
                body_pre = pre(node.body, inv)
                conditions.append(
                    VerificationCondition(
                        f"{label}: invariant preserved",
                        AImp(AAnd(inv, cond), body_pre),
                    )
                )
            conditions.append(
                VerificationCondition(
                    f"{label}: exit establishes postcondition",
                    AImp(AAnd(inv, ANot(cond)), post),
                )
            )
            return inv
        raise TypeError(f"not an annotated command: {node!r}")

    precondition = pre(c, post)
    return VcResult(tuple(conditions), precondition)


# --- semantic triple checking ---------------------------------------------------------------


def check_triple(
    pre_assertion: Assertion,
    command: Com,
    post_assertion: Assertion,
    variables: Iterable[str],
    bound: int,
    fuel: int,
    mode: Mode = Mode.PARTIAL,
) -> Verdict:
    """Check a triple semantically by running the command from every
    enumerated initial state satisfying the precondition.

    In partial mode fuel exhaustion is never a counterexample, only tallied;
    in total mode termination within fuel is part of the claim.
    """
    names = sorted(set(variables))
    if state_space_size(names, bound) > ENUMERATION_LIMIT:
        return Unknown(f"state space exceeds {ENUMERATION_LIMIT} states")
    exhausted = 0
    for s in enumerate_states(names, bound):
        if not eval_assertion(pre_assertion, s):
            continue
        outcome = big_step(command, s, fuel)
        if type(outcome) is Terminated:
            if not eval_assertion(post_assertion, outcome.final):
                return CounterexampleFound(s)
        elif mode is Mode.TOTAL:
            return CounterexampleFound(s)
        else:
            exhausted += 1
    if exhausted:
        return Unknown(f"{exhausted} initial state(s) ran out of fuel")
    return Valid()


# --- verification reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class ReportEntry:
    label: str
    formula: Assertion
    verdict: Verdict


@dataclass(frozen=True)
class VerificationReport:
    mode: Mode
    bound: int
    precondition: Assertion
    vcs: tuple[ReportEntry, ...]
    triple_verdict: Verdict

    @property
    def all_valid(self) -> bool:
        return all(type(entry.verdict) is Valid for entry in self.vcs) and (
            type(self.triple_verdict) is Valid
        )

    def to_json_dict(self) -> dict:
        from .parser import pretty_assertion

        return {
            "mode": self.mode.value,
            "bound": self.bound,
            "precondition_text": pretty_assertion(self.precondition),
            "vcs": [
                {
                    "label": entry.label,
                    "formula_text": pretty_assertion(entry.formula),
                    **_verdict_json(entry.verdict),
                }
                for entry in self.vcs
            ],
            "triple_verdict": _verdict_json(self.triple_verdict),
        }


def _verdict_json(v: Verdict) -> dict:
    t = type(v)
    if t is Valid:
        return {"verdict": "valid"}
    if t is CounterexampleFound:
        return {"verdict": "counterexample", "counterexample": dict(v.state.items())}
    return {"verdict": "unknown", "detail": v.detail}


def verify(
    annotated: AnnotatedCom,
    precondition: Assertion,
    postcondition: Assertion,
    bound: int,
    fuel: int,
    mode: Mode,
) -> VerificationReport:
    """Full pipeline: VCs via vcgen, each checked by bounded entailment, plus
    a semantic check of the whole triple.

    The first report entry checks that the stated precondition establishes
    the computed one; each VC is checked over its own variables, so snapshot
    variables are enumerated where they occur.
    """
    result = vcgen(annotated, postcondition, mode)
    entries = [
        ReportEntry(
            "entry: precondition establishes computed precondition",
            AImp(precondition, result.precondition),
            entails(
                precondition,
                result.precondition,
                assertion_vars(precondition) | assertion_vars(result.precondition),
                bound,
            ),
        )
    ]
    for vc in result.conditions:
        entries.append(
            ReportEntry(vc.label, vc.formula, check_valid(vc.formula, assertion_vars(vc.formula), bound))
        )
    command = erase(annotated)
    triple_vars = vars_of(command) | assertion_vars(precondition) | assertion_vars(postcondition)
    triple = check_triple(precondition, command, postcondition, triple_vars, bound, fuel, mode)
    return VerificationReport(mode, bound, result.precondition, tuple(entries), triple)
