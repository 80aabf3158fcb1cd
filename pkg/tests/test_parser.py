import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import aexps, assertions, bexps, coms, names
from imptool.hoare import (
    AAnd,
    ACmp,
    AFalse,
    AImp,
    AnnAssign,
    AnnWhile,
    AOr,
    ATrue,
    CmpOp,
    erase,
)
from imptool.machine import Add, Jmp, JmpGe, JmpLess, Load, LoadI, Store
from imptool.parser import (
    ParseError,
    parse_aexp,
    parse_annotated_com,
    parse_asm,
    parse_assertion,
    parse_bexp,
    parse_com,
    pretty_aexp,
    pretty_annotated_com,
    pretty_asm,
    pretty_assertion,
    pretty_bexp,
    pretty_com,
)
from imptool.syntax import (
    And,
    Assign,
    BoolLit,
    If,
    Less,
    NumLit,
    Not,
    Plus,
    Seq,
    Skip,
    Var,
    While,
)


class TestParseCom:
    def test_skip(self):
        assert parse_com("skip") == Skip()

    def test_assign(self):
        assert parse_com("x := x + 1") == Assign("x", Plus(Var("x"), NumLit(1)))

    def test_while(self):
        got = parse_com("while (i < 3) { i := i + 1 }")
        assert got == While(
            Less(Var("i"), NumLit(3)), Assign("i", Plus(Var("i"), NumLit(1)))
        )

    def test_if_else(self):
        got = parse_com("if (x < 0) { y := 1 } else { y := 2 }")
        assert got == If(
            Less(Var("x"), NumLit(0)),
            Assign("y", NumLit(1)),
            Assign("y", NumLit(2)),
        )

    def test_seq_is_right_associative(self):
        got = parse_com("skip; x := 1; skip")
        assert got == Seq(Skip(), Seq(Assign("x", NumLit(1)), Skip()))

    def test_plus_is_left_associative(self):
        assert parse_aexp("x + 1 + 2") == Plus(Plus(Var("x"), NumLit(1)), NumLit(2))

    def test_parenthesized_aexp(self):
        assert parse_aexp("x + (1 + 2)") == Plus(Var("x"), Plus(NumLit(1), NumLit(2)))

    def test_negative_literal(self):
        assert parse_aexp("x + -1") == Plus(Var("x"), NumLit(-1))

    def test_and_is_left_associative(self):
        got = parse_bexp("true && false && x < 1")
        assert got == And(
            And(BoolLit(True), BoolLit(False)), Less(Var("x"), NumLit(1))
        )

    def test_not_binds_tightest(self):
        got = parse_bexp("!true && false")
        assert got == And(Not(BoolLit(True)), BoolLit(False))

    def test_parenthesized_bexp(self):
        got = parse_bexp("!(true && false)")
        assert got == Not(And(BoolLit(True), BoolLit(False)))

    def test_comparison_inside_parens_stays_arithmetic_grouping(self):
        # '(' may open either a bexp or an aexp; backtracking resolves it
        assert parse_bexp("(x + 1) < y") == Less(Plus(Var("x"), NumLit(1)), Var("y"))
        assert parse_bexp("(x < y)") == Less(Var("x"), Var("y"))

    def test_comments_and_whitespace(self):
        text = "// setup\nx := 1;  // write\nskip\n"
        assert parse_com(text) == Seq(Assign("x", NumLit(1)), Skip())


class TestParseErrors:
    @pytest.mark.parametrize(
        "text",
        [
            "",
            "x :=",
            "x := := 1",
            "skip skip",
            "while (x < 1) { }",
            "if (x < 1) { skip }",  # else is mandatory
            "x < y < z",
            "x + - 1",  # '-' only directly attached to digits
            "while := 1",  # keyword as identifier
            "__tmp := 1",  # reserved prefix
            "x := (1",
            "{ skip }",
        ],
    )
    def test_rejected(self, text):
        with pytest.raises(ParseError):
            parse_com(text)

    def test_error_carries_position_and_expectations(self):
        with pytest.raises(ParseError) as exc:
            parse_com("x := := 1")
        err = exc.value
        assert (err.span.start_line, err.span.start_col) == (1, 6)
        assert err.expected
        assert "1:6" in str(err)

    def test_error_on_second_line(self):
        with pytest.raises(ParseError) as exc:
            parse_com("x := 1;\ny := ;")
        assert exc.value.span.start_line == 2

    @pytest.mark.parametrize(
        "text",
        ["x := := 1", "skip skip", "x := (1", "while (x < 1) { }", "x :="],
    )
    def test_error_span_lies_within_input(self, text):
        lines = text.split("\n")
        with pytest.raises(ParseError) as exc:
            parse_com(text)
        span = exc.value.span
        assert 1 <= span.start_line <= len(lines)
        assert 1 <= span.start_col <= len(lines[span.start_line - 1]) + 1
        assert (span.start_line, span.start_col) <= (span.end_line, span.end_col)


class TestAnnotations:
    def test_full_annotation(self):
        got = parse_annotated_com(
            "while (0 < x) invariant (true) measure (x) { x := x + -1 }"
        )
        assert got == AnnWhile(
            Less(NumLit(0), Var("x")),
            AnnAssign("x", Plus(Var("x"), NumLit(-1))),
            invariant=ATrue(),
            measure=Var("x"),
            span=got.span,
        )
        assert got.invariant == ATrue()
        assert got.measure == Var("x")
        assert got.span.start_line == 1

    def test_invariant_without_measure(self):
        got = parse_annotated_com("while (0 < x) invariant (x = x) { skip }")
        assert got.invariant == ACmp(CmpOp.EQ, Var("x"), Var("x"))
        assert got.measure is None

    def test_unannotated_loop_records_absence(self):
        got = parse_annotated_com("while (0 < x) { skip }")
        assert got.invariant is None
        assert got.measure is None

    def test_plain_parser_rejects_annotations(self):
        with pytest.raises(ParseError):
            parse_com("while (0 < x) invariant (true) { skip }")

    def test_erase_drops_annotations(self):
        ann = parse_annotated_com("while (0 < x) invariant (true) { skip }")
        assert erase(ann) == While(Less(NumLit(0), Var("x")), Skip())

    def test_annotated_round_trip(self):
        text = "x := 0; while (x < 3) invariant (x <= 3) measure (3 + -1) { x := x + 1 }"
        ann = parse_annotated_com(text)
        assert parse_annotated_com(pretty_annotated_com(ann)) == ann

    def test_measure_requires_invariant(self):
        with pytest.raises(ParseError):
            parse_annotated_com("while (0 < x) measure (x) { skip }")


class TestAssertions:
    def test_precedence(self):
        got = parse_assertion("x < 1 && true -> x = 0 || false")
        assert got == AImp(
            AAnd(ACmp(CmpOp.LT, Var("x"), NumLit(1)), ATrue()),
            AOr(ACmp(CmpOp.EQ, Var("x"), NumLit(0)), AFalse()),
        )

    def test_implication_is_right_associative(self):
        got = parse_assertion("true -> true -> false")
        assert got == AImp(ATrue(), AImp(ATrue(), parse_assertion("false")))

    def test_le_and_eq_operators(self):
        assert parse_assertion("x <= 0") == ACmp(CmpOp.LE, Var("x"), NumLit(0))
        assert parse_assertion("x = 0") == ACmp(CmpOp.EQ, Var("x"), NumLit(0))


class TestPretty:
    def test_com_goldens(self):
        assert pretty_com(Skip()) == "skip"
        assert pretty_com(Assign("x", NumLit(1))) == "x := 1"
        assert (
            pretty_com(parse_com("x := 1; y := x")) == "x := 1; y := x"
        )
        loop = While(Less(Var("i"), NumLit(3)), Assign("i", Plus(Var("i"), NumLit(1))))
        assert pretty_com(loop) == "while (i < 3) { i := i + 1 }"

    def test_aexp_parenthesization(self):
        assert pretty_aexp(Plus(Plus(NumLit(1), NumLit(2)), NumLit(3))) == "1 + 2 + 3"
        assert pretty_aexp(Plus(NumLit(1), Plus(NumLit(2), NumLit(3)))) == "1 + (2 + 3)"

    def test_bexp_goldens(self):
        assert pretty_bexp(Less(Var("x"), NumLit(0))) == "x < 0"
        assert pretty_bexp(Not(Less(Var("x"), NumLit(0)))) == "!(x < 0)"
        assert pretty_bexp(Not(BoolLit(True))) == "!true"

    def test_assertion_goldens(self):
        a = AImp(ACmp(CmpOp.LT, Var("x"), NumLit(0)), ACmp(CmpOp.LE, Var("x"), NumLit(0)))
        assert pretty_assertion(a) == "x < 0 -> x <= 0"

    def test_left_nested_seq_flattens(self):
        # concrete syntax has no way to spell left nesting; printing flattens
        left = Seq(Seq(Assign("a", NumLit(1)), Skip()), Assign("b", NumLit(2)))
        text = pretty_com(left)
        assert text == "a := 1; skip; b := 2"
        assert parse_com(text) == Seq(Assign("a", NumLit(1)), Seq(Skip(), Assign("b", NumLit(2))))


@given(aexps())
def test_aexp_round_trip(a):
    assert parse_aexp(pretty_aexp(a)) == a


@given(bexps())
def test_bexp_round_trip(b):
    assert parse_bexp(pretty_bexp(b)) == b


@given(assertions())
def test_assertion_round_trip(a):
    assert parse_assertion(pretty_assertion(a)) == a


@given(coms(loops=True))
def test_com_round_trip(c):
    assert parse_com(pretty_com(c)) == c


INSTRS = st.lists(
    st.one_of(
        st.builds(LoadI, st.integers(-99, 99)),
        st.builds(Load, names),
        st.just(Add()),
        st.builds(Store, names),
        st.builds(Jmp, st.integers(-20, 20)),
        st.builds(JmpLess, st.integers(-20, 20)),
        st.builds(JmpGe, st.integers(-20, 20)),
    ),
    max_size=30,
)


class TestAsm:
    def test_parse_golden(self):
        assert parse_asm("LOADI 5\nSTORE x") == [LoadI(5), Store("x")]
        assert parse_asm("JMP -7") == [Jmp(-7)]

    def test_comments_and_blank_lines(self):
        text = "// header\n\nLOAD x\nADD // inline\n"
        assert parse_asm(text) == [Load("x"), Add()]

    @pytest.mark.parametrize(
        "text,line",
        [
            ("FOO 1", 1),
            ("LOADI x", 1),
            ("LOAD 5", 1),
            ("ADD 1", 1),
            ("LOADI 1\nJMP x", 2),
            ("JMP", 1),
        ],
    )
    def test_rejected_with_line(self, text, line):
        with pytest.raises(ParseError) as exc:
            parse_asm(text)
        assert exc.value.span.start_line == line

    def test_pretty_golden(self):
        out = pretty_asm([LoadI(0), Load("i"), JmpGe(5)])
        assert out == "LOADI 0\nLOAD i\nJMPGE 5\n"

    @given(INSTRS)
    def test_round_trip(self, prog):
        assert parse_asm(pretty_asm(prog)) == prog
