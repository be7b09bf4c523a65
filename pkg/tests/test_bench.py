import pandas as pd
import pytest

from ftlearn import exceptions
from ftlearn.data.traces import ScoredSet
from ftlearn.logic.grammar import parse_formula
from ftlearn.process.bench import (
    REPORT_COLUMNS,
    accuracy,
    best_per_cell,
    brute_force_best,
    evaluate,
    gen_setcover_instance,
    set_type,
    setcover_has_cover,
    write_report,
)
from ftlearn.process.learner import Learner, learn
from ftlearn.logic.shapes import gen_configs


def test_accuracy(toy_ts):
    assert accuracy([True, True, False, False], toy_ts) == 100.0
    assert accuracy([True, False, True, False], toy_ts) == 50.0
    assert accuracy([False, False, False, False], toy_ts) == 50.0


def test_evaluate(toy_domain, toy_ts):
    formulas = learn(toy_domain, toy_ts, 1, 1)
    report = evaluate(formulas + ["exists x:item. F red(x)"], toy_ts, toy_domain)
    assert list(report.columns) == REPORT_COLUMNS
    assert len(report) == len(formulas) + 1
    assert report["accuracy"].iloc[0] == 100.0
    assert report["test_score"].iloc[0] == 3.0
    last = report.iloc[-1]
    assert last["accuracy"] == 50.0
    assert last["test_score"] == 1.0
    assert pd.isna(last["train_score"])


def test_evaluate_errors(toy_domain, toy_ts):
    with pytest.raises(exceptions.UsageError):
        evaluate(["exists x:item. red(x)"], ScoredSet(()))
    with pytest.raises(exceptions.DomainMismatchError):
        evaluate([parse_formula("exists x:item. blue(x)")], toy_ts, toy_domain)


def test_best_per_cell_and_report(tmp_path):
    rows = [
        ("a", 50.0, 0.0, 1.0, 0, 1, 2),
        ("b", 75.0, 1.0, 1.0, 0, 1, 2),
        ("c", 90.0, 2.0, 2.0, 1, 1, 2),
        ("d", 60.0, 2.0, 2.0, 1, 2, 3),
    ]
    report = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    cells = best_per_cell(report)
    assert cells.loc[0, (2, 1)] == 75.0
    assert cells.loc[1, (2, 1)] == 90.0
    assert cells.loc[1, (3, 2)] == 60.0
    assert best_per_cell(report.iloc[:0]).empty

    md_path = write_report(report, str(tmp_path / "report.csv"))
    assert md_path == str(tmp_path / "report.md")
    assert pd.read_csv(tmp_path / "report.csv")["formula"].tolist() == ["a", "b", "c", "d"]
    assert "| formula" in (tmp_path / "report.md").read_text()


def test_setcover_instance():
    domain, ts, r, q, threshold = gen_setcover_instance(3, [[1, 2], [2, 3], [3]], 2)
    assert (r, q, threshold) == (2, 2, 3)
    assert domain.types.root == "set"
    assert domain.types.subtype_of(set_type(2), "set")
    assert list(domain.predicates) == ["in"]
    assert [t.name for t in ts] == ["e1", "e2", "e3", "mock"]
    assert [t.score for t in ts] == [1.0, 1.0, 1.0, -1.0]
    e2 = ts.traces[1]
    assert {f.args[0] for f in e2.states[0]} == {"s_1", "s_2"}
    assert e2.instance.objects["s_3"] == set_type(3)
    assert e2.instance.objects["d"] == "set"


SETCOVER_ERRORS = [
    dict(n=0, subsets=[[1]], k=1),
    dict(n=2, subsets=[], k=1),
    dict(n=2, subsets=[[1]], k=0),
    dict(n=2, subsets=[[1, 3]], k=1),
]


@pytest.mark.parametrize("case", SETCOVER_ERRORS)
def test_setcover_errors(case):
    with pytest.raises(exceptions.UsageError):
        gen_setcover_instance(**case)


COVERS = [
    dict(n=1, subsets=[[1]], k=1, expected=True),
    dict(n=2, subsets=[[1], [2]], k=1, expected=False),
    dict(n=2, subsets=[[1], [2]], k=2, expected=True),
    dict(n=2, subsets=[[1, 2], [2]], k=1, expected=True),
    dict(n=3, subsets=[[1, 2], [3], [2]], k=1, expected=False),
    dict(n=3, subsets=[[1, 2], [3], [2]], k=2, expected=True),
]


@pytest.mark.parametrize("case", COVERS)
def test_setcover_has_cover(case):
    assert setcover_has_cover(case["n"], case["subsets"], case["k"]) == case["expected"]


def reaches_threshold(n, subsets, k):
    domain, ts, r, q, threshold = gen_setcover_instance(n, subsets, k)
    learner = Learner(domain, ts, r, q, min_score=threshold, first_perfect=True)
    return bool(learner.execute())


@pytest.mark.parametrize("case", COVERS[:4])
def test_setcover_correspondence(case):
    assert reaches_threshold(case["n"], case["subsets"], case["k"]) == case["expected"]


@pytest.mark.slow
@pytest.mark.parametrize("case", COVERS[4:])
def test_setcover_correspondence_three_sets(case):
    assert reaches_threshold(case["n"], case["subsets"], case["k"]) == case["expected"]


def test_brute_force_bound(toy_domain, toy_ts):
    cfg = next(iter(gen_configs(toy_domain, 2, 1)))
    with pytest.raises(exceptions.ResourceLimitError):
        brute_force_best(cfg, toy_domain, toy_ts, bound=10)
