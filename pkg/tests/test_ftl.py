import os
import numpy as np
import pytest

from hypothesis import given, strategies as st

from ftlearn import CHILDSNACK_PATH, exceptions
from ftlearn.data.traces import load_trace_dir, parse_plan, plan_to_trace
from ftlearn.logic.ftl import (
    Atom,
    Binary,
    Connector,
    Formula,
    Not,
    QuantifiedVariable,
    Quantifier,
    Top,
    Unary,
    check_tl,
    formula_from_json,
    formula_to_json,
    holds,
    satisfied_traces,
    score,
    truth_vector,
)
from ftlearn.logic.grammar import KNOWN_FORMULAS, parse_formula

from conftest import FIXTURES, read, toy_state, toy_trace

P = Atom("p", ())
Q = Atom("q", ())


def states(*letters):
    """One state per string, holding the nullary fluents named by its letters."""
    return tuple(frozenset(("p" if c == "p" else "q", ()) for c in s) for s in letters)


TRUTH_CASES = [
    dict(node=Unary(Connector.NEXT, P), trace=["", "p", ""], expected=[True, False, False]),
    dict(node=Unary(Connector.YESTERDAY, P), trace=["p", "", ""], expected=[False, True, False]),
    dict(node=Unary(Connector.EVENTUALLY, P), trace=["", "p", ""], expected=[True, True, False]),
    dict(node=Unary(Connector.ALWAYS, P), trace=["", "p", "p"], expected=[False, True, True]),
    dict(node=Unary(Connector.ONCE, P), trace=["", "p", ""], expected=[False, True, True]),
    dict(node=Unary(Connector.HISTORICALLY, P), trace=["p", "p", ""], expected=[True, True, False]),
    dict(node=Binary(Connector.UNTIL, P, Q), trace=["p", "p", "q"], expected=[True, True, True]),
    dict(node=Binary(Connector.UNTIL, P, Q), trace=["p", "", "q"], expected=[False, False, True]),
    dict(node=Binary(Connector.UNTIL, P, Q), trace=["p", "p", "p"], expected=[False, False, False]),
    dict(node=Binary(Connector.IMPLIES, P, Q), trace=["p", "", "pq"], expected=[False, True, True]),
    dict(node=Not(Top()), trace=["", ""], expected=[False, False]),
]


@pytest.mark.parametrize("case", TRUTH_CASES)
def test_truth_vector(case):
    out = truth_vector(case["node"], states(*case["trace"]), {})
    assert out.tolist() == case["expected"]


letters = st.lists(st.sampled_from(["", "p", "q", "pq"]), min_size=1, max_size=8)


@given(letters)
def test_derived_identities(trace):
    s = states(*trace)

    def tv(node):
        return truth_vector(node, s, {})

    eventually = tv(Unary(Connector.EVENTUALLY, P))
    assert np.array_equal(eventually, tv(Binary(Connector.UNTIL, Top(), P)))
    assert np.array_equal(tv(Unary(Connector.ALWAYS, P)), ~tv(Unary(Connector.EVENTUALLY, Not(P))))
    assert np.array_equal(
        tv(Unary(Connector.HISTORICALLY, P)), ~tv(Unary(Connector.ONCE, Not(P)))
    )
    # p U q == q | (p & X (p U q))
    until = tv(Binary(Connector.UNTIL, P, Q))
    step = tv(Q) | (tv(P) & np.append(until[1:], False))
    assert np.array_equal(until, step)
    assert np.array_equal(tv(Binary(Connector.OR, P, Q)), ~(~tv(P) & ~tv(Q)))


@given(letters, st.integers(min_value=0, max_value=7))
def test_check_tl_reads_truth_vector(trace, i):
    s = states(*trace)
    if i >= len(s):
        with pytest.raises(IndexError):
            check_tl(s, {}, i, P)
    else:
        assert check_tl(s, {}, i, Unary(Connector.ONCE, P)) == any(
            ("p", ()) in state for state in s[: i + 1]
        )


def test_check_tl_unbound():
    with pytest.raises(exceptions.FormulaError):
        check_tl(states("p"), {}, 0, Atom("on", ("x",)))


def solution_traces(domain, locator):
    return [
        t
        for agent in ("gs", "ngf", "ngl")
        for split in ("train", "test")
        for t in load_trace_dir(os.path.join(CHILDSNACK_PATH, agent, split), domain, locator)
    ]


def test_all_children_served(childsnack, childsnack_locator):
    formula = parse_formula(KNOWN_FORMULAS["all_children_served"], childsnack)
    traces = solution_traces(childsnack, childsnack_locator)
    assert len(traces) == 27
    assert all(satisfied_traces(formula, traces))
    p01 = childsnack_locator.get("p01")
    truncated = plan_to_trace(
        p01, parse_plan(read(os.path.join(FIXTURES, "p01_truncated.plan"))), childsnack
    )
    assert not holds(truncated, formula)


def test_sandwich_until_on_tray(childsnack, gs_train):
    formula = parse_formula(KNOWN_FORMULAS["sandwich_until_on_tray"], childsnack)
    assert satisfied_traces(formula, gs_train) == [t.positive for t in gs_train]
    assert score(formula, gs_train) == 3.0


def test_allergic_served_last(childsnack, childsnack_locator):
    formula = parse_formula(KNOWN_FORMULAS["allergic_served_last"], childsnack)
    traces = solution_traces(childsnack, childsnack_locator)
    assert satisfied_traces(formula, traces) == [t.name.startswith("ngl/") for t in traces]


def test_tray_returns_to_kitchen(childsnack, gs_train):
    formula = parse_formula(KNOWN_FORMULAS["tray_returns_to_kitchen"], childsnack)
    assert all(satisfied_traces(formula, gs_train.positives))


def test_spanner_formula(spanner, spanner_train):
    formula = parse_formula(KNOWN_FORMULAS["spanner_kept_forever"], spanner)
    assert satisfied_traces(formula, spanner_train) == [t.positive for t in spanner_train]


TOY = toy_trace("toy", 1.0, ["red a", "on a c"], ["red b", "open c"])


def quantified(kind1, kind2, core):
    return Formula(
        (
            QuantifiedVariable(kind1, "x", "item"),
            QuantifiedVariable(kind2, "y", "item"),
        ),
        core,
    )


@pytest.mark.parametrize("kind", [Quantifier.FORALL, Quantifier.EXISTS])
def test_quantifier_commutation(kind):
    core = Binary(
        Connector.OR,
        Unary(Connector.EVENTUALLY, Atom("red", ("x",))),
        Atom("red", ("y",)),
    )
    swapped = Formula(tuple(reversed(quantified(kind, kind, core).quantifiers)), core)
    assert holds(TOY, quantified(kind, kind, core)) == holds(TOY, swapped)


def test_subtype_closed_quantification():
    everything = Formula(
        (QuantifiedVariable(Quantifier.EXISTS, "x", "object"),),
        Atom("open", ("x",)),
    )
    assert not holds(TOY, everything)
    eventually = Formula(everything.quantifiers, Unary(Connector.EVENTUALLY, Atom("open", ("x",))))
    assert holds(TOY, eventually)
    assert not holds(TOY, eventually, strict_types=True)


def test_empty_domain():
    empty = toy_trace("empty", 1.0, ["red a"])
    boxes = [o for o, t in empty.instance.objects.items() if t == "box"]
    assert boxes == ["c"]
    forall = Formula((QuantifiedVariable(Quantifier.FORALL, "x", "item"),), Atom("red", ("x",)))
    assert not holds(empty, forall)
    # strict quantification over the root type finds no object
    root_forall = Formula((QuantifiedVariable(Quantifier.FORALL, "x", "object"),), Atom("red", ("x",)))
    root_exists = Formula((QuantifiedVariable(Quantifier.EXISTS, "x", "object"),), Top())
    assert holds(empty, root_forall, strict_types=True)
    assert not holds(empty, root_exists, strict_types=True)


def test_check_cap():
    formula = quantified(Quantifier.FORALL, Quantifier.FORALL, Atom("red", ("x",)))
    with pytest.raises(exceptions.ResourceLimitError):
        holds(TOY, formula, cap=3)


def test_formula_errors():
    with pytest.raises(exceptions.FormulaError):
        Formula((), Atom("red", ("x",)))
    with pytest.raises(exceptions.FormulaError):
        Formula(
            (
                QuantifiedVariable(Quantifier.FORALL, "x", "item"),
                QuantifiedVariable(Quantifier.EXISTS, "x", "box"),
            ),
            Top(),
        )
    with pytest.raises(ValueError):
        Unary(Connector.AND, Top())


def test_json_roundtrip():
    formula = parse_formula(KNOWN_FORMULAS["tray_returns_to_kitchen"])
    assert formula_from_json(formula_to_json(formula)) == formula


def test_score_sums_weights(toy_ts):
    formula = Formula(
        (QuantifiedVariable(Quantifier.EXISTS, "x", "item"),),
        Unary(Connector.EVENTUALLY, Atom("red", ("x",))),
    )
    assert satisfied_traces(formula, toy_ts) == [True, True, True, True]
    assert score(formula, toy_ts) == 1.0
    assert toy_state("red a") == {("red", ("a",))}
