import pytest

from math import comb

from ftlearn.data.pddl import TypeTree
from ftlearn.logic.ftl import Quantifier
from ftlearn.logic.shapes import (
    ShapeConfig,
    chain_from_id,
    gen_chains,
    gen_configs,
    gen_quantifier_prefixes,
    gen_type_tuples,
)

FORALL, EXISTS = Quantifier.FORALL, Quantifier.EXISTS


def catalan(n):
    return comb(2 * n, n) // (n + 1)


@pytest.mark.parametrize("r", range(6))
def test_chain_count(r):
    chains = list(gen_chains(r))
    assert len(chains) == catalan(r)
    assert len({c.chain_id for c in chains}) == len(chains)


def test_chain_order_and_ids():
    assert [c.chain_id for c in gen_chains(0)] == ["P"]
    assert [c.chain_id for c in gen_chains(1)] == ["(P,P)"]
    assert [c.chain_id for c in gen_chains(2)] == ["((P,P),P)", "(P,(P,P))"]


@pytest.mark.parametrize("r", range(5))
def test_chain_structure(r):
    for chain in gen_chains(r):
        assert chain.n == r and chain.m == r + 1
        children = sorted(chain.left + chain.right)
        # every node but the root is the child of exactly one connector
        assert children == list(range(1, 2 * r + 1))
        for i in chain.connectors:
            assert chain.left[i] > i and chain.right[i] > i
        assert chain_from_id(chain.chain_id) == chain


def test_chain_indices():
    chain = chain_from_id("((P,P),P)")
    assert chain.left == (1, 2)
    assert chain.right == (4, 3)
    assert list(chain.predicate_nodes) == [2, 3, 4]
    assert chain.is_connector(1) and not chain.is_connector(2)


@pytest.mark.parametrize("text", ["", "Q", "(P,P", "(P;P)", "(P,P))", "((P,P)"])
def test_bad_chain_ids(text):
    with pytest.raises(ValueError):
        chain_from_id(text)


def test_prefixes():
    assert gen_quantifier_prefixes(2) == [
        (FORALL, FORALL),
        (FORALL, EXISTS),
        (EXISTS, EXISTS),
    ]
    with pytest.raises(ValueError):
        gen_quantifier_prefixes(0)
    with pytest.raises(ValueError):
        list(gen_chains(-1))


def test_type_tuples():
    types = TypeTree.flat("a", "b")
    tuples = list(gen_type_tuples(types, 2, (FORALL, FORALL)))
    assert tuples == [
        ("a", "a"),
        ("a", "b"),
        ("a", "object"),
        ("b", "b"),
        ("b", "object"),
        ("object", "object"),
    ]
    mixed = list(gen_type_tuples(["a", "b"], 2, (FORALL, EXISTS)))
    assert len(mixed) == 4
    assert ("b", "a") in mixed


def test_config_count(childsnack):
    n_types = len(childsnack.types.types)
    configs = list(gen_configs(childsnack, 2, 2))
    per_chain = comb(n_types + 1, 2) * 2 + n_types * n_types
    assert len(configs) == catalan(2) * per_chain
    assert str(configs[0]).startswith("((P,P),P) [forall:")


def test_config_validation():
    chain = chain_from_id("P")
    with pytest.raises(ValueError):
        ShapeConfig(chain, (EXISTS, FORALL), ("a", "b"))
    with pytest.raises(ValueError):
        ShapeConfig(chain, (FORALL,), ("a", "b"))
    cfg = ShapeConfig(chain, (FORALL, EXISTS), ("a", "b"))
    assert cfg.q == 2 and cfg.b == 1
