import os
import pytest

from ftlearn import CHILDSNACK_PATH, SPANNER_PATH
from ftlearn.data.pddl import Fluent, Instance, Predicate, Domain, TypeTree, parse_domain
from ftlearn.data.traces import InstanceLocator, InstantiatedTrace, ScoredSet, load_trace_dir

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run long acceptance tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long running acceptance test")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def read(path):
    with open(path, "r", encoding="utf-8") as file:
        return file.read()


@pytest.fixture(scope="session")
def childsnack():
    return parse_domain(read(os.path.join(CHILDSNACK_PATH, "domain.pddl")))


@pytest.fixture(scope="session")
def spanner():
    return parse_domain(read(os.path.join(SPANNER_PATH, "domain.pddl")))


@pytest.fixture(scope="session")
def childsnack_locator(childsnack):
    return InstanceLocator(childsnack, CHILDSNACK_PATH)


def load_agent(domain, locator, root, agent, split, score):
    return load_trace_dir(os.path.join(root, agent, split), domain, locator, score=score)


@pytest.fixture(scope="session")
def gs_train(childsnack, childsnack_locator):
    """GS training traces against the NGF and NGL ones."""
    pos = load_agent(childsnack, childsnack_locator, CHILDSNACK_PATH, "gs", "train", 1.0)
    neg = load_agent(childsnack, childsnack_locator, CHILDSNACK_PATH, "ngf", "train", -1.0)
    neg += load_agent(childsnack, childsnack_locator, CHILDSNACK_PATH, "ngl", "train", -1.0)
    return ScoredSet(tuple(pos + neg))


@pytest.fixture(scope="session")
def spanner_train(spanner):
    locator = InstanceLocator(spanner, SPANNER_PATH)
    pos = load_agent(spanner, locator, SPANNER_PATH, "all", "train", 1.0)
    neg = load_agent(spanner, locator, SPANNER_PATH, "sme", "train", -1.0)
    neg += load_agent(spanner, locator, SPANNER_PATH, "sgl", "train", -1.0)
    return ScoredSet(tuple(pos + neg))


# ---------------------------------------------------------------------------
# a three object, two type toy task
# ---------------------------------------------------------------------------

TOY_TYPES = TypeTree({"object": None, "item": "object", "box": "object"})
TOY_OBJECTS = {"a": "item", "b": "item", "c": "box"}


@pytest.fixture(scope="session")
def toy_domain():
    predicates = {
        "on": Predicate("on", ("item", "box")),
        "red": Predicate("red", ("item",)),
        "open": Predicate("open", ("box",)),
    }
    return Domain("toy", TOY_TYPES, predicates, {}, (":strips", ":typing"))


def toy_state(*fluents):
    return frozenset(Fluent(f.split()[0], tuple(f.split()[1:])) for f in fluents)


def toy_trace(name, score, *states):
    instance = Instance(name, "toy", TOY_TYPES, dict(TOY_OBJECTS), states[0], frozenset())
    return InstantiatedTrace(name, instance, tuple(toy_state(*s) for s in states), score)


@pytest.fixture(scope="session")
def toy_ts():
    return ScoredSet(
        (
            toy_trace("t1", 2.0, ["red a", "on a c"], ["on a c", "open c"], ["open c"]),
            toy_trace("t2", 1.0, ["red b"], ["red b", "on b c"], ["open c", "on b c"]),
            toy_trace("t3", -1.0, ["on a c"], ["red a"], ["red a", "open c"]),
            toy_trace("t4", -1.0, ["open c"], [], ["red b"]),
        )
    )
