"""Value, state and configuration tests."""
import pytest

from chorus.runtime import (
    BOTTOM, AtomV, BottomV, EvalError, IntV, NameV, UnknownProcess,
    complete_graph, eval_expr, format_value, initial_config, knows,
    mutually_knows, parse_value_literal,
)
from chorus.syntax import (
    AtomLit, BinOp, CalculusMode, IntLit, NameLit, SELF, parse,
)

MC = CalculusMode.MC
DMC = CalculusMode.DMC


def test_eval_literals():
    assert eval_expr(IntLit(4), BOTTOM) == IntV(4)
    assert eval_expr(AtomLit("ok"), BOTTOM) == AtomV("ok")
    assert eval_expr(NameLit("q"), BOTTOM) == NameV("q")


def test_eval_self_reference():
    assert eval_expr(SELF, IntV(9)) == IntV(9)
    assert eval_expr(BinOp("+", SELF, IntLit(1)), IntV(9)) == IntV(10)


def test_eval_arithmetic():
    assert eval_expr(BinOp("-", IntLit(7), IntLit(2)), BOTTOM) == IntV(5)


def test_eval_arithmetic_on_non_integers_fails():
    with pytest.raises(EvalError):
        eval_expr(BinOp("+", AtomLit("x"), IntLit(1)), BOTTOM)
    with pytest.raises(EvalError):
        eval_expr(BinOp("+", SELF, IntLit(1)), BOTTOM)  # ⊥ + 1


def test_format_value():
    assert format_value(IntV(3)) == "3"
    assert format_value(AtomV("title")) == "title"
    assert format_value(BOTTOM) == "⊥"


def test_parse_value_literal():
    assert parse_value_literal("42") == IntV(42)
    assert parse_value_literal("-3") == IntV(-3)
    assert parse_value_literal("title") == AtomV("title")
    assert parse_value_literal("⊥") == BottomV()


def test_graph_helpers():
    g = frozenset({("p", "q"), ("q", "p"), ("p", "r")})
    assert knows(g, "p", "r")
    assert mutually_knows(g, "p", "q")
    assert not mutually_knows(g, "p", "r")
    assert complete_graph(["a", "b"]) == frozenset({("a", "b"), ("b", "a")})


def test_initial_config_defaults_to_bottom():
    c = parse("p.1 -> q; 0", MC)
    cfg = initial_config(c, MC)
    assert cfg.lookup("p") == BOTTOM
    assert cfg.lookup("q") == BOTTOM
    assert cfg.graph == frozenset()  # no graph premises in static modes


def test_initial_config_overrides():
    c = parse("p.1 -> q; 0", MC)
    cfg = initial_config(c, MC, {"p": IntV(5)})
    assert cfg.lookup("p") == IntV(5)


def test_initial_config_rejects_unknown_override():
    c = parse("p.1 -> q; 0", MC)
    with pytest.raises(UnknownProcess):
        initial_config(c, MC, {"zz": IntV(1)})


def test_initial_graph_complete_over_free_processes():
    c = parse("p start w; p: w <-> q; 0", DMC)
    cfg = initial_config(c, DMC)
    assert cfg.graph == complete_graph(["p", "q"])
    # the bound child is not in the initial state either
    with pytest.raises(UnknownProcess):
        cfg.lookup("w")


def test_configuration_immutable_updates():
    c = parse("p.1 -> q; 0", MC)
    cfg = initial_config(c, MC)
    cfg2 = cfg.updated(state={"p": IntV(1), "q": IntV(2)})
    assert cfg.lookup("p") == BOTTOM
    assert cfg2.lookup("q") == IntV(2)
    assert cfg2.state == tuple(sorted(cfg2.state))
