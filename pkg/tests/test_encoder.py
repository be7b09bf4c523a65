import json
import itertools
import pytest

from pysat.formula import IDPool
from pysat.solvers import Solver

from ftlearn import exceptions
from ftlearn.data.pddl import Domain, Predicate
from ftlearn.data.traces import ScoredSet
from ftlearn.logic.ftl import (
    Atom,
    Binary,
    Connector,
    Not,
    Quantifier,
    Unary,
    free_variables,
    iter_nodes,
)
from ftlearn.logic.shapes import ShapeConfig, chain_from_id, gen_configs
from ftlearn.process.bench import brute_force_best
from ftlearn.process.encoder import (
    CHAINED_BANS,
    Encoder,
    EncoderOptions,
    Family,
    VarMap,
    decode,
    encode,
    exactly_one,
)
from ftlearn.process.learner import find_formula
from ftlearn.process.maxsat import Status, solve

from conftest import TOY_TYPES, toy_trace

FORALL, EXISTS = Quantifier.FORALL, Quantifier.EXISTS


@pytest.mark.parametrize("n", range(1, 9))
def test_exactly_one(n):
    lits = list(range(1, n + 1))
    clauses = exactly_one(lits, IDPool(start_from=n + 1))
    with Solver(bootstrap_with=clauses) as solver:
        for values in itertools.product([False, True], repeat=n):
            assumptions = [lit if v else -lit for lit, v in zip(lits, values)]
            assert solver.solve(assumptions=assumptions) == (sum(values) == 1)


def test_exactly_one_empty():
    with pytest.raises(ValueError):
        exactly_one([])


OPTION_VARIANTS = [
    dict(id="default", options=EncoderOptions()),
    dict(id="recursive", options=EncoderOptions(unroll="recursive")),
    dict(id="strict-types", options=EncoderOptions(strict_types=True)),
    dict(id="strict-eq4", options=EncoderOptions(strict_eq4=True)),
    dict(id="no-types", options=EncoderOptions().without(Family.TYPES)),
    dict(id="no-discriminative", options=EncoderOptions().without(Family.DISCRIMINATIVE)),
    dict(id="no-redundancy", options=EncoderOptions().without(Family.REDUNDANCY)),
    dict(id="no-visibility", options=EncoderOptions().without(Family.VISIBILITY)),
]


def assert_optimum_matches_brute_force(domain, ts, configs, options):
    for cfg in configs:
        result = find_formula(cfg, domain, ts, options)
        best = brute_force_best(cfg, domain, ts, options)
        if best is None:
            assert result.failed, f"{cfg}: solver found {result.formula}"
        else:
            assert not result.failed, f"{cfg}: brute force reaches {best}"
            assert result.status is Status.OPTIMUM
            assert result.train_score == best, str(cfg)


@pytest.mark.parametrize("case", OPTION_VARIANTS, ids=[c["id"] for c in OPTION_VARIANTS])
def test_optimum_small_configs(toy_domain, toy_ts, case):
    configs = [cfg for r in range(2) for cfg in gen_configs(toy_domain, r, 1)]
    assert_optimum_matches_brute_force(toy_domain, toy_ts, configs, case["options"])


@pytest.mark.slow
@pytest.mark.parametrize("case", OPTION_VARIANTS[:2], ids=[c["id"] for c in OPTION_VARIANTS[:2]])
def test_optimum_exhaustive(toy_domain, toy_ts, case):
    configs = [cfg for r in range(3) for q in (1, 2) for cfg in gen_configs(toy_domain, r, q)]
    assert_optimum_matches_brute_force(toy_domain, toy_ts, configs, case["options"])


def config(chain_id, *quantified):
    prefix = tuple(kind for kind, _ in quantified)
    types = tuple(t for _, t in quantified)
    return ShapeConfig(chain_from_id(chain_id), prefix, types)


def test_visibility_uses_every_variable(toy_domain, toy_ts):
    cfg = config("(P,P)", (FORALL, "item"), (EXISTS, "box"))
    result = find_formula(cfg, toy_domain, toy_ts)
    assert not result.failed
    assert free_variables(result.formula.core) == {"x1", "x2"}


def test_redundancy_bans(toy_domain, toy_ts):
    for chain_id in ("((P,P),P)", "(P,(P,P))"):
        cfg = config(chain_id, (EXISTS, "item"))
        result = find_formula(cfg, toy_domain, toy_ts)
        if result.failed:
            continue
        for node in iter_nodes(result.formula.core):
            if isinstance(node, (Not, Unary)) and isinstance(node.child, (Not, Unary)):
                op = Connector.NOT if isinstance(node, Not) else node.op
                inner = Connector.NOT if isinstance(node.child, Not) else node.child.op
                assert not (op is inner and op in CHAINED_BANS)
            if isinstance(node, Binary):
                assert not (isinstance(node.left, Atom) and node.left == node.right)


def test_unreachable_right_subtree_does_not_count(toy_domain):
    # forall x1:item. exists x2:box with a unary root must still place x2
    # below the left child; only "every item ends up on a box" separates
    ts = ScoredSet(
        (
            toy_trace("both", 1.0, ["on a c"], ["on b c"]),
            toy_trace("one", -1.0, ["on a c"], ["red b"]),
        )
    )
    cfg = config("(P,P)", (FORALL, "item"), (EXISTS, "box"))
    options = EncoderOptions(ops=("F", "G", "X"))
    result = find_formula(cfg, toy_domain, ts, options)
    assert not result.failed
    assert free_variables(result.formula.core) == {"x1", "x2"}
    assert isinstance(result.formula.core, Unary)


def test_without_discriminative_allows_one_sided_sets(toy_domain, toy_ts):
    positives = ScoredSet(toy_ts.positives)
    cfg = config("(P,P)", (EXISTS, "item"))
    with pytest.raises(exceptions.UsageError):
        encode(cfg, toy_domain, positives)
    options = EncoderOptions().without("discriminative")
    result = find_formula(cfg, toy_domain, positives, options)
    assert result.train_score == 3.0


def test_infeasible_config(toy_domain, toy_ts):
    # no predicate takes an object of the root type
    cfg = config("P", (FORALL, "object"))
    assert not Encoder(cfg, toy_domain, toy_ts).feasible()
    assert find_formula(cfg, toy_domain, toy_ts).status is Status.UNSATISFIABLE


def test_env_cap(toy_domain, toy_ts):
    cfg = config("P", (FORALL, "item"), (EXISTS, "item"))
    with pytest.raises(exceptions.ResourceLimitError):
        encode(cfg, toy_domain, toy_ts, EncoderOptions(env_cap=10))


def test_weights_are_scaled():
    ts = ScoredSet(
        (
            toy_trace("a", 0.5, ["red a"]),
            toy_trace("b", 1.5, ["red b"]),
            toy_trace("c", -1.0, ["open c"]),
        )
    )
    domain = Domain("toy", TOY_TYPES, {"red": Predicate("red", ("item",))})
    cfg = config("P", (EXISTS, "item"))
    wcnf, vm = encode(cfg, domain, ts, EncoderOptions(score_decimals=1))
    assert vm.weights == (5, 15, -10)
    assert vm.gcd == 5
    assert sorted(wcnf.wght) == [1, 2, 3]
    outcome = solve(wcnf)
    assert vm.implied_score(outcome.cost) == 2.0
    assert decode(outcome.model, vm).core.predicate == "red"


def test_varmap_roundtrip(toy_domain, toy_ts):
    cfg = config("(P,P)", (FORALL, "item"), (EXISTS, "box"))
    wcnf, vm = encode(cfg, toy_domain, toy_ts)
    outcome = solve(wcnf)
    again = VarMap.from_json(json.loads(json.dumps(vm.to_json())))
    assert decode(outcome.model, again) == decode(outcome.model, vm)
    census = vm.census()
    assert census["c"] == 11
    assert census["s"] == len(toy_ts)
    assert sum(census.values()) == vm.n_vars


def test_varmap_gaps(toy_domain, toy_ts):
    doc = encode(config("P", (EXISTS, "item")), toy_domain, toy_ts)[1].to_json()
    doc["variables"] = doc["variables"][1:]
    with pytest.raises(exceptions.SolverOutputError):
        VarMap.from_json(doc)


def test_decode_error(toy_domain, toy_ts):
    _, vm = encode(config("(P,P)", (EXISTS, "item")), toy_domain, toy_ts)
    with pytest.raises(exceptions.DecodeError):
        decode([], vm)


def test_high_arity_warning(toy_ts):
    domain = Domain(
        "toy",
        TOY_TYPES,
        {
            "red": Predicate("red", ("item",)),
            "between": Predicate("between", ("item", "item", "box")),
        },
    )
    with pytest.warns(UserWarning):
        encoder = Encoder(config("P", (EXISTS, "item")), domain, toy_ts)
    assert [p.name for p in encoder.predicates] == ["red"]


def test_zero_connectors_have_no_alphabet(toy_domain, toy_ts):
    encoder = Encoder(config("P", (EXISTS, "item")), toy_domain, toy_ts)
    assert encoder.ops == ()
    assert encoder.chain.n == 0


OPTION_ERRORS = [
    dict(ops=()),
    dict(ops=("~",)),
    dict(unroll="lazy"),
    dict(score_decimals=-1),
    dict(env_cap=0),
]


@pytest.mark.parametrize("kwargs", OPTION_ERRORS)
def test_option_errors(kwargs):
    with pytest.raises(ValueError):
        EncoderOptions(**kwargs)


def test_option_normalization():
    options = EncoderOptions(ops=("U", "&", Connector.NOT))
    assert options.ops == (Connector.NOT, Connector.AND, Connector.UNTIL)
