"""Evaluation reports, the set cover task generator and the brute-force oracle."""

import logging
import os
import pandas as pd

from itertools import combinations, product
from tqdm import tqdm

from ftlearn import exceptions
from ftlearn.data.pddl import Domain, Fluent, Instance, Predicate, TypeTree
from ftlearn.data.traces import InstantiatedTrace, ScoredSet
from ftlearn.logic.ftl import (
    Atom,
    Binary,
    Connector,
    Formula,
    Not,
    QuantifiedVariable,
    Unary,
    check_against_domain,
    satisfied_traces,
)
from ftlearn.logic.grammar import parse_formula, to_text
from ftlearn.process.encoder import CHAINED_BANS, Encoder, EncoderOptions, Family, var_name

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["formula", "accuracy", "test_score", "train_score", "r", "q", "n_instances"]
SETCOVER_ROOT = "set"
SETCOVER_DOMAIN = "setcover"
DEFAULT_BRUTE_FORCE_BOUND = 10**6


def _as_row(item, domain):
    if isinstance(item, str):
        formula = parse_formula(item, domain)
        return formula, dict(train_score=None, r=formula.size, q=formula.q, n_instances=None)
    if isinstance(item, Formula):
        return item, dict(train_score=None, r=item.size, q=item.q, n_instances=None)
    return item.formula, dict(
        train_score=item.train_score, r=item.r, q=item.q, n_instances=item.n_instances
    )


def accuracy(satisfied, ts):
    """Percentage of traces classified correctly: positives satisfied and
    negatives not."""
    correct = sum(sat == t.positive for sat, t in zip(satisfied, ts))
    return 100.0 * correct / len(ts)


def evaluate(formulas, test, domain=None, strict_types=False, verbose=False):
    """Classify a test set with every formula.

    Args:
        formulas (iterable): :class:`LearnedFormula`, :class:`Formula` or text
        test (ScoredSet): preprocessed test traces
        domain (Domain): if given, formulas are checked against its vocabulary
        strict_types (bool): quantifier semantics, as used during learning
        verbose (bool): show a progress bar

    Returns:
        pandas.DataFrame with one row per formula
    """
    if not len(test):
        raise exceptions.UsageError("Cannot evaluate on an empty test set.")
    formulas = list(formulas)
    rows = []
    for item in tqdm(formulas, disable=not verbose, total=len(formulas), desc="evaluating"):
        formula, meta = _as_row(item, domain)
        if domain is not None:
            try:
                check_against_domain(formula, domain)
            except exceptions.FormulaError as e:
                raise exceptions.DomainMismatchError(f"{to_text(formula)}: {e}") from None
        satisfied = satisfied_traces(formula, test, strict_types)
        rows.append(
            dict(
                formula=to_text(formula),
                accuracy=accuracy(satisfied, test),
                test_score=float(sum(t.score for t, sat in zip(test, satisfied) if sat)),
                **meta,
            )
        )
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def best_per_cell(report):
    """Best accuracy per cell: rows are connector budgets, columns are
    (number of training instances, quantifier budget)."""
    if report.empty:
        return pd.DataFrame()
    frame = report.fillna({"n_instances": 0})
    return frame.pivot_table(
        index="r", columns=["n_instances", "q"], values="accuracy", aggfunc="max"
    )


def write_report(report, csv_path):
    """Write the report as CSV and a Markdown twin next to it."""
    report.to_csv(csv_path, index=False)
    md_path = os.path.splitext(csv_path)[0] + ".md"
    with open(md_path, "w", encoding="utf-8") as file:
        file.write(report.to_markdown(index=False))
        file.write("\n\n")
        cells = best_per_cell(report)
        if not cells.empty:
            file.write(cells.to_markdown())
            file.write("\n")
    logger.info(f"Wrote {csv_path} and {md_path}")
    return md_path


# ---------------------------------------------------------------------------
# set cover
# ---------------------------------------------------------------------------


def set_type(i):
    return f"{SETCOVER_ROOT}_{i}"


def gen_setcover_instance(n, subsets, k):
    """Learning task whose best score reveals whether a set cover exists.

    Each set ``S_i`` becomes an object ``s_i`` of its own type ``set_i``
    below ``set``; a further object ``d`` of type ``set`` serves the mock
    trace. Element ``j`` yields a positive single-state trace whose state
    holds ``in(s_i)`` for every set containing ``j``; the mock trace holds
    ``in(d)`` and scores -1.

    Args:
        n (int): size of the universe ``1..n``
        subsets (list of iterables of int): the sets
        k (int): cover size

    Returns:
        tuple of (Domain, ScoredSet, r, q, threshold)
    """
    subsets = [frozenset(s) for s in subsets]
    m = len(subsets)
    if n < 1 or m < 1 or k < 1:
        raise exceptions.UsageError(
            f"Invalid set cover instance: n={n}, m={m}, k={k}. All must be >= 1."
        )
    for s in subsets:
        outside = sorted(e for e in s if not 1 <= e <= n)
        if outside:
            raise exceptions.UsageError(f"Elements {outside} lie outside 1..{n}.")
    parent = {SETCOVER_ROOT: None}
    parent.update({set_type(i): SETCOVER_ROOT for i in range(1, m + 1)})
    types = TypeTree(parent)
    domain = Domain(
        SETCOVER_DOMAIN,
        types,
        {"in": Predicate("in", (SETCOVER_ROOT,))},
        {},
        (":strips", ":typing"),
    )
    objects = {f"s_{i}": set_type(i) for i in range(1, m + 1)}
    objects["d"] = SETCOVER_ROOT
    traces = []
    for j in range(1, n + 1):
        state = frozenset(Fluent("in", (f"s_{i}",)) for i, s in enumerate(subsets, 1) if j in s)
        instance = Instance(f"e{j}", SETCOVER_DOMAIN, types, dict(objects), state, state)
        traces.append(InstantiatedTrace(f"e{j}", instance, (state,), 1.0))
    mock = frozenset({Fluent("in", ("d",))})
    instance = Instance("mock", SETCOVER_DOMAIN, types, dict(objects), mock, mock)
    traces.append(InstantiatedTrace("mock", instance, (mock,), -1.0))
    return domain, ScoredSet(tuple(traces)), m - 1, k, n


def setcover_has_cover(n, subsets, k):
    """Whether at most ``k`` of the subsets cover ``1..n``."""
    universe = set(range(1, n + 1))
    for size in range(0, min(k, len(subsets)) + 1):
        for chosen in combinations(subsets, size):
            if universe <= set().union(*chosen):
                return True
    return False


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------


def _build(chain, ops, atoms, node):
    if chain.is_connector(node):
        op = ops[node]
        child = _build(chain, ops, atoms, chain.left[node])
        if op is Connector.NOT:
            return Not(child)
        if op.unary:
            return Unary(op, child)
        return Binary(op, child, _build(chain, ops, atoms, chain.right[node]))
    pred, arity, j1, j2 = atoms[node - chain.n]
    return Atom(pred, tuple(var_name(j) for j in (j1, j2)[:arity]))


def _reachable(chain, ops):
    seen, stack = set(), [chain.root]
    while stack:
        node = stack.pop()
        seen.add(node)
        if chain.is_connector(node):
            stack.append(chain.left[node])
            if ops[node].binary:
                stack.append(chain.right[node])
    return seen


def _banned(chain, ops, atoms, enabled):
    if Family.REDUNDANCY not in enabled:
        return False
    for i in chain.connectors:
        left, right = chain.left[i], chain.right[i]
        if chain.is_connector(left):
            if ops[i] in CHAINED_BANS and ops[i] is ops[left]:
                return True
        elif not chain.is_connector(right) and ops[i].binary:
            if atoms[left - chain.n] == atoms[right - chain.n]:
                return True
    return False


def _visible(chain, ops, atoms, q):
    used = set()
    for node in _reachable(chain, ops):
        if not chain.is_connector(node):
            _, arity, j1, j2 = atoms[node - chain.n]
            used.update((j1, j2)[:arity])
    return used >= set(range(q))


def brute_force_best(cfg, domain, ts, options=None, bound=DEFAULT_BRUTE_FORCE_BOUND):
    """Best score over every labeling of a configuration.

    Labelings range over the same connector alphabet, predicates and slot
    assignments as the encoding, and are subject to the same enabled
    quality constraints.

    Returns:
        float, or None if no labeling qualifies
    """
    options = options or EncoderOptions()
    encoder = Encoder(cfg, domain, ts, options)
    chain = cfg.chain
    enabled = options.families
    atom_labels = [
        (p.name, p.arity, j1, j2) for p in encoder.predicates for j1, j2 in encoder.combos[p.name]
    ]
    space = len(encoder.ops) ** chain.n * len(atom_labels) ** chain.m
    if space > bound:
        raise exceptions.ResourceLimitError(
            f"{cfg} has {space:d} labelings, above the bound of {bound:d}."
        )
    if not atom_labels:
        return None
    quantifiers = tuple(
        QuantifiedVariable(kind, var_name(j), typ)
        for j, (kind, typ) in enumerate(zip(cfg.prefix, cfg.types))
    )
    traces = list(ts)
    cache = {}
    best = None
    for ops in product(encoder.ops, repeat=chain.n):
        for atoms in product(atom_labels, repeat=chain.m):
            if _banned(chain, ops, atoms, enabled):
                continue
            if Family.VISIBILITY in enabled and not _visible(chain, ops, atoms, cfg.q):
                continue
            formula = Formula(quantifiers, _build(chain, ops, atoms, chain.root))
            if formula not in cache:
                cache[formula] = satisfied_traces(formula, traces, options.strict_types)
            satisfied = cache[formula]
            if Family.DISCRIMINATIVE in enabled:
                pos = any(sat for sat, t in zip(satisfied, traces) if t.positive)
                neg = any(not sat for sat, t in zip(satisfied, traces) if not t.positive)
                if not (pos and neg):
                    continue
            value = float(sum(t.score for t, sat in zip(traces, satisfied) if sat))
            if best is None or value > best:
                best = value
    logger.debug(f"Brute force over {cfg}: {len(cache):d} distinct formulas, best {best}")
    return best
