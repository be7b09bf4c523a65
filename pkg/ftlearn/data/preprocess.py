"""Vocabulary transformations applied to a domain and its traces before learning.

Both transformations return a new domain plus a new scored set; inputs are
never modified. The pipeline order is fixed: splitting first, goal
predicates second, so that goal predicates obey the arity bound too.
"""

import logging

from dataclasses import replace
from itertools import combinations

from ftlearn import exceptions
from ftlearn.data.pddl import Fluent, Predicate
from ftlearn.data.traces import ScoredSet

logger = logging.getLogger(__name__)

GOAL_SUFFIX = "_goal"


def split_name(name, positions, arity):
    """Name of the projection of ``name`` onto 1-based ``positions``."""
    if arity < 10:
        return name + "_" + "".join(str(i) for i in positions)
    return name + "_" + "_".join(str(i) for i in positions)


def _projections(pred, k):
    """Yield ``(split predicate, 0-based positions)`` for one predicate."""
    for positions in combinations(range(pred.arity), k):
        name = split_name(pred.name, [i + 1 for i in positions], pred.arity)
        yield Predicate(name, tuple(pred.arg_types[i] for i in positions)), positions


def _rename_check(original, new_predicates):
    clashes = sorted(set(original) & set(new_predicates))
    if clashes:
        raise exceptions.PDDLSemanticError(
            f"Derived predicate names collide with existing ones: {clashes}."
        )


def _rewrite(ts, transform_instance, transform_state):
    instances = {}
    traces = []
    for trace in ts:
        name = trace.instance.name
        if name not in instances:
            instances[name] = transform_instance(trace.instance)
        instance = instances[name]
        states = tuple(transform_state(trace.instance, s) for s in trace.states)
        traces.append(replace(trace, instance=instance, states=states))
    return ScoredSet(tuple(traces))


def split_predicates(d, ts, k):
    """Replace every predicate of arity above ``k`` by its projections.

    For ``k=2`` a predicate ``p`` of arity n yields ``p_ij`` for all
    ``1 <= i < j <= n``, for ``k=1`` it yields ``p_i``. Fluents are replaced
    by all their projections, in traces as well as in the initial and goal
    states of the instances. Action schemas are kept as they are.

    Args:
        d (Domain): the domain
        ts (ScoredSet): traces over ``d``
        k (int): maximal arity, 1 or 2

    Returns:
        tuple of (Domain, ScoredSet)
    """
    if k not in (1, 2):
        raise ValueError(f"Invalid split arity: {k}. Must be 1 or 2.")
    predicates, kept, split = {}, {}, {}
    for name in sorted(d.predicates):
        pred = d.predicates[name]
        if pred.arity <= k:
            kept[name] = pred
            continue
        split[name] = list(_projections(pred, k))
        for new, _ in split[name]:
            if new.name in predicates:
                raise exceptions.PDDLSemanticError(
                    f"Split predicate name '{new.name}' is produced twice."
                )
            predicates[new.name] = new
    _rename_check(kept, predicates)
    predicates.update(kept)
    logger.info(
        f"Split {len(split):d} predicates of arity > {k} into "
        f"{sum(len(v) for v in split.values()):d} predicates"
    )

    def project(state):
        out = set()
        for f in state:
            if f.predicate not in split:
                out.add(f)
                continue
            for new, positions in split[f.predicate]:
                out.add(Fluent(new.name, tuple(f.args[i] for i in positions)))
        return frozenset(out)

    def transform_instance(i):
        return replace(i, init=project(i.init), goal=project(i.goal))

    domain = replace(d, predicates=dict(sorted(predicates.items())))
    return domain, _rewrite(ts, transform_instance, lambda i, s: project(s))


def add_goal_predicates(d, ts):
    """Add a goal copy ``p_goal`` of every predicate and inject the latent state.

    The latent state of an instance holds ``p_goal(o...)`` for every goal
    fluent ``p(o...)``; it is added to every state of every trace of that
    instance.

    Returns:
        tuple of (Domain, ScoredSet)
    """
    goal_preds = {
        p.name + GOAL_SUFFIX: Predicate(p.name + GOAL_SUFFIX, p.arg_types)
        for p in d.predicates.values()
    }
    _rename_check(d.predicates, goal_preds)
    predicates = dict(sorted({**d.predicates, **goal_preds}.items()))

    def latent(i):
        return frozenset(Fluent(f.predicate + GOAL_SUFFIX, f.args) for f in i.goal)

    latent_states = {}

    def transform_state(i, s):
        if i.name not in latent_states:
            latent_states[i.name] = latent(i)
        return s | latent_states[i.name]

    domain = replace(d, predicates=predicates)
    return domain, _rewrite(ts, lambda i: i, transform_state)


def preprocess(d, ts, split_arity=2, goal_predicates=True):
    """Run the preprocessing pipeline.

    Args:
        d (Domain): the domain
        ts (ScoredSet): traces over ``d``
        split_arity (int or None): 1, 2, or None to skip splitting
        goal_predicates (bool): add goal predicates and latent states

    Returns:
        tuple of (Domain, ScoredSet)
    """
    if split_arity is not None:
        d, ts = split_predicates(d, ts, split_arity)
    if goal_predicates:
        d, ts = add_goal_predicates(d, ts)
    return d, ts
