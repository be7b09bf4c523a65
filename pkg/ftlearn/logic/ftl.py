"""First-order temporal logic over finite traces.

A :class:`Formula` is a block of typed quantifiers over a quantifier-free
temporal core built from :class:`Atom`, :class:`Top`, :class:`Not`,
:class:`Unary` and :class:`Binary` nodes. Core formulas are evaluated
position-wise on a trace: :func:`truth_vector` returns one boolean per
state, with the usual finite-trace conventions (``X`` is false at the last
position, ``Y`` is false at the first one).
"""

import logging
import numpy as np

from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

from ftlearn import exceptions

logger = logging.getLogger(__name__)

DEFAULT_CHECK_CAP = 10**7


class Connector(Enum):
    """Logical connectors. The value is the concrete syntax symbol."""

    NOT = "!"
    AND = "&"
    OR = "|"
    IMPLIES = "->"
    UNTIL = "U"
    NEXT = "X"
    EVENTUALLY = "F"
    ALWAYS = "G"
    YESTERDAY = "Y"
    ONCE = "O"
    HISTORICALLY = "H"

    @property
    def binary(self):
        return self in BINARY

    @property
    def unary(self):
        return not self.binary

    @classmethod
    def from_symbol(cls, symbol):
        for op in cls:
            if op.value == symbol or op.name == symbol.upper():
                return op
        raise ValueError(f"Invalid connector: {symbol}. Must be one of {[o.value for o in cls]}")


BINARY = frozenset({Connector.AND, Connector.OR, Connector.IMPLIES, Connector.UNTIL})
PAST = frozenset({Connector.YESTERDAY, Connector.ONCE, Connector.HISTORICALLY})
ALL_CONNECTORS = tuple(Connector)


class Quantifier(Enum):
    FORALL = "forall"
    EXISTS = "exists"


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class Unary:
    op: Connector
    child: "Node"

    def __post_init__(self):
        if self.op.binary or self.op is Connector.NOT:
            raise ValueError(f"Connector {self.op.value} is not a temporal unary connector.")


@dataclass(frozen=True)
class Binary:
    op: Connector
    left: "Node"
    right: "Node"

    def __post_init__(self):
        if not self.op.binary:
            raise ValueError(f"Connector {self.op.value} is not binary.")


Node = Union[Top, Atom, Not, Unary, Binary]


@dataclass(frozen=True)
class QuantifiedVariable:
    kind: Quantifier
    var: str
    type: str


@dataclass(frozen=True)
class Formula:
    """A prenex formula ``Q1 x1:t1. ... Qq xq:tq. core``."""

    quantifiers: Tuple[QuantifiedVariable, ...]
    core: Node

    def __post_init__(self):
        names = [q.var for q in self.quantifiers]
        if len(set(names)) != len(names):
            raise exceptions.FormulaError(f"Variable quantified twice in {names}.")
        unbound = sorted(free_variables(self.core) - set(names))
        if unbound:
            raise exceptions.FormulaError(f"Unbound variables: {unbound}.")

    def __str__(self):
        from ftlearn.logic.grammar import to_text

        return to_text(self)

    @property
    def q(self):
        return len(self.quantifiers)

    @property
    def b(self):
        """Number of universal quantifiers."""
        return sum(q.kind is Quantifier.FORALL for q in self.quantifiers)

    @property
    def universals_first(self):
        kinds = [q.kind for q in self.quantifiers]
        return kinds == sorted(kinds, key=lambda k: k is Quantifier.EXISTS)

    @property
    def size(self):
        """Number of connectors in the core."""
        return connector_count(self.core)


# ---------------------------------------------------------------------------
# structural helpers
# ---------------------------------------------------------------------------


def children(node):
    if isinstance(node, (Not, Unary)):
        return (node.child,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    return ()


def iter_nodes(node):
    """Pre-order traversal of a core formula."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children(current)))


def free_variables(node):
    return {a for n in iter_nodes(node) if isinstance(n, Atom) for a in n.args}


def atoms(node):
    return [n for n in iter_nodes(node) if isinstance(n, Atom)]


def connector_count(node):
    return sum(isinstance(n, (Not, Unary, Binary)) for n in iter_nodes(node))


def check_against_domain(formula, domain):
    """Validate predicates, arities and variable types of a formula.

    A variable fits a predicate slot when either type is a subtype of the
    other.
    """
    types = {q.var: q.type for q in formula.quantifiers}
    for q in formula.quantifiers:
        if q.type not in domain.types:
            raise exceptions.FormulaError(f"Unknown type '{q.type}'.")
    for atom in atoms(formula.core):
        pred = domain.predicates.get(atom.predicate)
        if pred is None:
            raise exceptions.FormulaError(f"Unknown predicate '{atom.predicate}'.")
        if pred.arity != len(atom.args):
            raise exceptions.FormulaError(
                f"Predicate '{pred.name}' has arity {pred.arity}, "
                f"got {len(atom.args)} arguments."
            )
        for var, slot in zip(atom.args, pred.arg_types):
            vtype = types[var]
            if not (
                domain.types.subtype_of(vtype, slot) or domain.types.subtype_of(slot, vtype)
            ):
                raise exceptions.FormulaError(
                    f"Variable '{var}' of type '{vtype}' cannot fill slot type "
                    f"'{slot}' of '{pred.name}'."
                )
    return formula


# ---------------------------------------------------------------------------
# semantics
# ---------------------------------------------------------------------------


def _states(trace):
    return trace.states if hasattr(trace, "states") else tuple(trace)


def truth_vector(node, states, env):
    """Truth value of a core formula at every position of a state sequence.

    Args:
        node (Node): core formula
        states (sequence of State): the trace
        env (dict): variable -> object, must bind every variable of ``node``

    Returns:
        numpy.ndarray of bool, one entry per state
    """
    n = len(states)
    if isinstance(node, Top):
        return np.ones(n, dtype=bool)
    if isinstance(node, Atom):
        try:
            args = tuple(env[a] for a in node.args)
        except KeyError as e:
            raise exceptions.FormulaError(f"Unbound variable {e}.") from None
        fluent = (node.predicate, args)
        return np.fromiter((fluent in s for s in states), dtype=bool, count=n)
    if isinstance(node, Not):
        return ~truth_vector(node.child, states, env)
    if isinstance(node, Unary):
        v = truth_vector(node.child, states, env)
        op = node.op
        out = np.zeros(n, dtype=bool)
        if op is Connector.NEXT:
            out[:-1] = v[1:]
        elif op is Connector.YESTERDAY:
            out[1:] = v[:-1]
        elif op is Connector.EVENTUALLY:
            out = np.logical_or.accumulate(v[::-1])[::-1]
        elif op is Connector.ALWAYS:
            out = np.logical_and.accumulate(v[::-1])[::-1]
        elif op is Connector.ONCE:
            out = np.logical_or.accumulate(v)
        elif op is Connector.HISTORICALLY:
            out = np.logical_and.accumulate(v)
        return out
    if isinstance(node, Binary):
        a = truth_vector(node.left, states, env)
        b = truth_vector(node.right, states, env)
        if node.op is Connector.AND:
            return a & b
        if node.op is Connector.OR:
            return a | b
        if node.op is Connector.IMPLIES:
            return ~a | b
        out = np.zeros(n, dtype=bool)
        nxt = False
        for i in range(n - 1, -1, -1):
            nxt = bool(b[i] or (a[i] and nxt))
            out[i] = nxt
        return out
    raise TypeError(f"Not a formula node: {node!r}")


def check_tl(t, e, i, phi):
    """Truth of core formula ``phi`` at position ``i`` of trace ``t`` under
    environment ``e``."""
    states = _states(t)
    if not 0 <= i < len(states):
        raise IndexError(f"Position {i} outside trace of length {len(states)}.")
    unbound = sorted(free_variables(phi) - set(e))
    if unbound:
        raise exceptions.FormulaError(f"Unbound variables: {unbound}.")
    return bool(truth_vector(phi, states, e)[i])


def domains(it, formula, strict_types=False):
    """Object domain of every quantified variable in the trace's instance."""
    return [it.instance.objects_of(q.type, strict=strict_types) for q in formula.quantifiers]


def holds(it, psi, strict_types=False, cap=DEFAULT_CHECK_CAP):
    """Whether an instantiated trace satisfies a formula.

    Quantifiers range over the objects whose type is the quantified type
    or one of its subtypes (exactly the quantified type if
    ``strict_types``). An empty domain makes a universal quantifier true
    and an existential one false.

    Args:
        it (InstantiatedTrace): the trace
        psi (Formula): the formula
        strict_types (bool): exact instead of subtype-closed quantification
        cap (int): maximal number of environment-position checks

    Returns:
        bool
    """
    doms = domains(it, psi, strict_types)
    n_envs = int(np.prod([len(d) for d in doms], dtype=object)) if doms else 1
    if n_envs * len(it.states) > cap:
        raise exceptions.ResourceLimitError(
            f"Checking '{it.name}' needs {n_envs * len(it.states):d} environment-"
            f"position checks, above the cap of {cap:d}."
        )
    states = it.states
    cache = {}

    def core_at_start(env):
        key = tuple(sorted(env.items()))
        if key not in cache:
            cache[key] = bool(truth_vector(psi.core, states, env)[0])
        return cache[key]

    def expand(idx, env):
        if idx == len(psi.quantifiers):
            return core_at_start(env)
        q = psi.quantifiers[idx]
        branches = (expand(idx + 1, {**env, q.var: o}) for o in doms[idx])
        if q.kind is Quantifier.FORALL:
            return all(branches)
        return any(branches)

    return expand(0, {})


def satisfied_traces(psi, ts, strict_types=False, cap=DEFAULT_CHECK_CAP):
    """List of booleans, one per trace of ``ts`` in order."""
    return [holds(t, psi, strict_types, cap) for t in ts]


def score(psi, ts, strict_types=False, cap=DEFAULT_CHECK_CAP):
    """Sum of the scores of the traces satisfying ``psi``."""
    return float(
        sum(t.score for t, sat in zip(ts, satisfied_traces(psi, ts, strict_types, cap)) if sat)
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def node_to_json(node):
    if isinstance(node, Top):
        return {"type": "true"}
    if isinstance(node, Atom):
        return {"type": "atom", "predicate": node.predicate, "args": list(node.args)}
    if isinstance(node, Not):
        return {"type": "op", "op": Connector.NOT.value, "args": [node_to_json(node.child)]}
    if isinstance(node, Unary):
        return {"type": "op", "op": node.op.value, "args": [node_to_json(node.child)]}
    return {
        "type": "op",
        "op": node.op.value,
        "args": [node_to_json(node.left), node_to_json(node.right)],
    }


def node_from_json(doc):
    kind = doc.get("type")
    if kind == "true":
        return Top()
    if kind == "atom":
        return Atom(doc["predicate"], tuple(doc.get("args", ())))
    if kind == "op":
        op = Connector.from_symbol(doc["op"])
        args = [node_from_json(a) for a in doc["args"]]
        if op is Connector.NOT:
            return Not(*args)
        if op.binary:
            return Binary(op, *args)
        return Unary(op, *args)
    raise exceptions.FormulaError(f"Invalid formula node document: {doc}")


def formula_to_json(formula):
    return {
        "quantifiers": [
            {"kind": q.kind.value, "var": q.var, "type": q.type} for q in formula.quantifiers
        ],
        "core": node_to_json(formula.core),
    }


def formula_from_json(doc):
    quantifiers = tuple(
        QuantifiedVariable(Quantifier(q["kind"]), q["var"], q["type"])
        for q in doc.get("quantifiers", ())
    )
    return Formula(quantifiers, node_from_json(doc["core"]))
