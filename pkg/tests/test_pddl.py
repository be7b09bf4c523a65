import os
import pytest

from hypothesis import given, strategies as st

from ftlearn import CHILDSNACK_PATH, exceptions
from ftlearn.data.pddl import (
    Fluent,
    PDDLGrammar,
    TypeTree,
    apply,
    parse_domain,
    parse_instance,
    write_domain,
    write_instance,
)

from conftest import read


def instance(domain, name):
    return parse_instance(read(os.path.join(CHILDSNACK_PATH, "instances", f"{name}.pddl")), domain)


def test_childsnack_domain(childsnack):
    assert childsnack.name == "childsnack"
    assert len(childsnack.predicates) == 13
    assert childsnack.predicates["served"].arity == 1
    assert childsnack.predicates["ontray"].arg_types == ("sandwich", "tray")
    assert childsnack.types.subtype_of("kitchen", "place")
    assert not childsnack.types.subtype_of("place", "kitchen")
    assert set(childsnack.schemas) == {
        "make_sandwich_no_gluten",
        "make_sandwich",
        "put_on_tray",
        "serve_sandwich_no_gluten",
        "serve_sandwich",
        "move_tray",
    }


def test_childsnack_instance(childsnack):
    p03 = instance(childsnack, "p03")
    # 3 children, breads, contents, sandwiches and tables, one tray and the kitchen
    assert len(p03.objects) == 17
    assert p03.objects_of("place") == ("kitchen", "table1", "table2", "table3")
    assert p03.objects_of("place", strict=True) == ("table1", "table2", "table3")
    assert len(p03.goal) == 3
    assert Fluent("at", ("tray1", "kitchen")) in p03.init


def test_serve_operator(childsnack):
    p01 = instance(childsnack, "p01")
    state = p01.init
    for action, objects in [
        ("make_sandwich_no_gluten", ("sandw1", "bread1", "content1")),
        ("put_on_tray", ("sandw1", "tray1", "kitchen")),
        ("move_tray", ("tray1", "kitchen", "table1")),
    ]:
        state = apply(state, childsnack.ground(action, objects, p01))
    serve = childsnack.ground("serve_sandwich_no_gluten", ("sandw1", "child1", "tray1", "table1"), p01)
    after = apply(state, serve)
    assert after - state == {Fluent("served", ("child1",))}
    assert state - after == {Fluent("ontray", ("sandw1", "tray1"))}


def test_not_applicable(childsnack):
    p01 = instance(childsnack, "p01")
    op = childsnack.ground("put_on_tray", ("sandw1", "tray1", "kitchen"), p01)
    with pytest.raises(exceptions.NotApplicableError):
        apply(p01.init, op)


def test_ground_type_mismatch(childsnack):
    p01 = instance(childsnack, "p01")
    with pytest.raises(exceptions.PlanError):
        childsnack.ground("move_tray", ("child1", "kitchen", "table1"), p01)
    with pytest.raises(exceptions.PlanError):
        childsnack.ground("move_tray", ("tray1", "kitchen"), p01)


def test_roundtrip(childsnack):
    again = parse_domain(write_domain(childsnack))
    assert again.predicates == childsnack.predicates
    assert again.schemas == childsnack.schemas
    assert again.types == childsnack.types
    p02 = instance(childsnack, "p02")
    assert parse_instance(write_instance(p02), childsnack) == p02


BAD_DOMAINS = [
    dict(
        text="(define (domain d) (:requirements :strips :equality))",
        error=exceptions.PDDLSemanticError,
    ),
    dict(
        text="(define (domain d) (:predicates (p ?x - thing)))",
        error=exceptions.PDDLSemanticError,
    ),
    dict(
        text="(define (domain d) (:predicates (p ?x) (p ?y)))",
        error=exceptions.PDDLSemanticError,
    ),
    dict(
        text=(
            "(define (domain d) (:predicates (p ?x))"
            " (:action a :parameters (?x) :precondition (not (p ?x)) :effect (p ?x)))"
        ),
        error=exceptions.PDDLSemanticError,
    ),
    dict(
        text="(define (domain d) (:constants k))",
        error=exceptions.PDDLSemanticError,
    ),
    dict(text="(define (domain d) (:predicates (p ?x))", error=exceptions.PDDLSyntaxError),
]


@pytest.mark.parametrize("case", BAD_DOMAINS)
def test_bad_domains(case):
    with pytest.raises(case["error"]):
        parse_domain(case["text"])


def test_syntax_error_position():
    with pytest.raises(exceptions.PDDLSyntaxError) as info:
        parse_domain("(define (domain d)\n  (:predicates (p ?x)\n")
    assert info.value.line is not None


def test_symbol_lists():
    expr = PDDLGrammar().parse("(a  b ; comment (\n\t(C ?d-e)\n)")
    assert expr.items[:2] == ["a", "b"]
    assert expr[2].items == ["c", "?d-e"]
    assert (expr.line, expr.col) == (1, 1)


def test_spanner_domain(spanner):
    assert spanner.name == "spanner"
    assert len(spanner.predicates) > 1
    assert set(spanner.types.children("locatable")) == {"man", "nut", "spanner"}


def test_instance_errors(childsnack):
    with pytest.raises(exceptions.PDDLSemanticError):
        parse_instance("(define (problem x) (:domain other) (:objects a - child))", childsnack)
    with pytest.raises(exceptions.PDDLSemanticError):
        parse_instance(
            "(define (problem x) (:domain childsnack) (:objects a - child)"
            " (:init (served b)) (:goal (served a)))",
            childsnack,
        )
    with pytest.raises(exceptions.PDDLSemanticError):
        parse_instance(
            "(define (problem x) (:domain childsnack) (:objects a - child t - tray)"
            " (:init (at a t)) (:goal (served a)))",
            childsnack,
        )


names = st.sampled_from(["a", "b", "c", "d", "e"])


@st.composite
def type_trees(draw):
    parent = {"object": None}
    for name in draw(st.lists(names, unique=True)):
        parent[name] = draw(st.sampled_from(sorted(parent)))
    return TypeTree(parent)


@given(type_trees(), st.data())
def test_subtype_partial_order(tree, data):
    t1, t2, t3 = (data.draw(st.sampled_from(tree.types)) for _ in range(3))
    assert tree.subtype_of(t1, t1)
    assert tree.subtype_of(t1, tree.root)
    if tree.subtype_of(t1, t2) and tree.subtype_of(t2, t1):
        assert t1 == t2
    if tree.subtype_of(t1, t2) and tree.subtype_of(t2, t3):
        assert tree.subtype_of(t1, t3)


def test_cyclic_types():
    with pytest.raises(exceptions.PDDLSemanticError):
        TypeTree({"object": None, "a": "b", "b": "a"})
