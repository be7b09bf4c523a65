"""Weighted partial MaxSAT encoding of a single search configuration.

Given a :class:`ShapeConfig` (chain, quantifier prefix, type tuple) and a
scored set of preprocessed traces, the :class:`Encoder` builds a WCNF whose
models are exactly the labelings of the chain by connectors, predicates and
variables, together with the truth values those labelings induce on every
trace, position and environment. Soft clauses reward satisfied positive and
unsatisfied negative traces, so the optimum labels the chain with a formula
of maximal score.

Solver variables are allocated through a :class:`VarMap` in a fixed order
(connector, predicate and slot choices first, then trace satisfaction,
reachability and truth values, auxiliaries last), which makes variable
numbering and thereby solver behaviour reproducible.
"""

import logging
import warnings
import numpy as np

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import FrozenSet, Tuple

from pysat.card import CardEnc, EncType
from pysat.formula import IDPool, WCNF

from ftlearn import exceptions
from ftlearn.logic.ftl import (
    ALL_CONNECTORS,
    Atom,
    Binary,
    Connector,
    Formula,
    Not,
    QuantifiedVariable,
    Quantifier,
    Unary,
)
from ftlearn.logic.shapes import SLOTS, ShapeConfig, chain_from_id

logger = logging.getLogger(__name__)

DEFAULT_ENV_CAP = 10**6
PAIRWISE_LIMIT = 5
UNROLL_MODES = ("expanded", "recursive")
CHAINED_BANS = (
    Connector.NOT,
    Connector.EVENTUALLY,
    Connector.ALWAYS,
    Connector.ONCE,
    Connector.HISTORICALLY,
)
DECISION_KINDS = ("c", "pi", "chi", "s")


class Family(Enum):
    """Droppable groups of hard clauses."""

    TYPES = "types"
    DISCRIMINATIVE = "discriminative"
    REDUNDANCY = "redundancy"
    VISIBILITY = "visibility"


@dataclass(frozen=True)
class EncoderOptions:
    """Options of the encoding.

    Args:
        ops (tuple of Connector): connector alphabet
        strict_types (bool): quantify over objects of exactly the given type,
            and fill predicate slots only with variables of exactly the slot type
        strict_eq4 (bool): restrict variable slots to universally quantified
            variables
        score_decimals (int): decimals kept when turning scores into weights
        unroll (str): "expanded" spells temporal operators out over index
            ranges, "recursive" uses one-step recurrences
        env_cap (int): maximal sum over traces of environments times length
        families (frozenset of Family): enabled quality constraint families
    """

    ops: Tuple[Connector, ...] = ALL_CONNECTORS
    strict_types: bool = False
    strict_eq4: bool = False
    score_decimals: int = 0
    unroll: str = "expanded"
    env_cap: int = DEFAULT_ENV_CAP
    families: FrozenSet[Family] = field(default_factory=lambda: frozenset(Family))

    def __post_init__(self):
        ops = {Connector.from_symbol(o) if isinstance(o, str) else o for o in self.ops}
        if not ops:
            raise ValueError("The connector alphabet must not be empty.")
        object.__setattr__(self, "ops", tuple(op for op in ALL_CONNECTORS if op in ops))
        object.__setattr__(self, "families", frozenset(Family(f) for f in self.families))
        if self.unroll not in UNROLL_MODES:
            raise ValueError(f"Invalid unroll mode: {self.unroll}. Must be one of {UNROLL_MODES}")
        if self.score_decimals < 0:
            raise ValueError(f"Invalid score decimals: {self.score_decimals}. Must be >= 0.")
        if self.env_cap < 1:
            raise ValueError(f"Invalid environment cap: {self.env_cap}. Must be >= 1.")

    def without(self, *families):
        """Copy with the given constraint families disabled."""
        return replace(self, families=self.families - {Family(f) for f in families})


def var_name(j):
    """Name of the ``j``-th (0-based) quantified variable."""
    return f"x{j + 1}"


def exactly_one(lits, pool=None):
    """Clauses satisfied by exactly the assignments making one literal true.

    At-most-one is encoded pairwise for up to five literals and by a
    sequential counter above.

    Args:
        lits (list of int): the literals
        pool (IDPool): source of auxiliary variables for the counter

    Returns:
        list of clauses
    """
    lits = list(lits)
    if not lits:
        raise ValueError("exactly_one needs at least one literal.")
    clauses = [lits]
    if len(lits) > 1:
        if pool is None:
            pool = IDPool(start_from=max(abs(lit) for lit in lits) + 1)
        encoding = EncType.pairwise if len(lits) <= PAIRWISE_LIMIT else EncType.seqcounter
        clauses.extend(CardEnc.atmost(lits, bound=1, vpool=pool, encoding=encoding).clauses)
    return clauses


def _iff_or(add, guard, out, lits):
    """``guard -> (out <-> OR lits)``; an empty disjunction is false."""
    pre = [] if guard is None else [-guard]
    add(pre + [-out] + list(lits))
    for lit in lits:
        add(pre + [out, -lit])


def _iff_and(add, guard, out, lits):
    """``guard -> (out <-> AND lits)``; an empty conjunction is true."""
    pre = [] if guard is None else [-guard]
    add(pre + [out] + [-lit for lit in lits])
    for lit in lits:
        add(pre + [-out, lit])


class VarMap:
    """Bijection between the semantic roles of an encoding and solver
    variables, plus the bookkeeping needed to turn solver costs back into
    scores.

    Keys are tuples: ``("c", i, op)``, ``("pi", node, predicate)``,
    ``("chi", j, slot, node)`` with ``j=None`` for an unused slot,
    ``("s", t)``, ``("reach", node)``, ``("y", node, t, k, e)`` and
    ``("aux", ...)``. Variables introduced by cardinality encodings carry no
    key.
    """

    def __init__(self, cfg, ops, predicates, slots, weights=(), decimals=0, gcd=1, traces=()):
        self.cfg = cfg
        self.ops = tuple(ops)
        self.predicates = dict(predicates)
        self.slots = {v: tuple(js) for v, js in slots.items()}
        self.weights = tuple(int(w) for w in weights)
        self.decimals = decimals
        self.gcd = gcd
        self.traces = tuple(traces)
        self.pool = IDPool()

    def var(self, *key):
        return self.pool.id(key)

    def lookup(self, *key):
        """Variable of a key, or None if it was never allocated."""
        return self.pool.obj2id.get(key)

    def c(self, i, op):
        return self.var("c", i, op.name)

    def pi(self, node, predicate):
        return self.var("pi", node, predicate)

    def chi(self, j, v, node):
        return self.var("chi", j, v, node)

    def s(self, t):
        return self.var("s", t)

    def reach(self, node):
        return self.var("reach", node)

    def y(self, node, t, k, e):
        return self.var("y", node, t, k, e)

    def aux(self, *key):
        return self.var("aux", *key)

    @property
    def n_vars(self):
        return self.pool.top

    @property
    def positive_total(self):
        return sum(w for w in self.weights if w > 0)

    @property
    def offset(self):
        """Weight of the negative traces, all of which are paid for by a
        formula satisfying every trace."""
        return sum(-w for w in self.weights if w < 0)

    def census(self):
        """Number of variables per role."""
        counts = Counter(key[0] for key in self.pool.obj2id)
        counts["card"] = self.pool.top - len(self.pool.obj2id)
        return dict(counts)

    def implied_score(self, cost):
        """Score of a model with the given solver cost, unscaled."""
        return (self.positive_total - cost * self.gcd) / 10**self.decimals

    def scaled_score(self, satisfied):
        """Integer score of a satisfaction vector under the encoded weights."""
        return sum(w for w, sat in zip(self.weights, satisfied) if sat)

    def trace_values(self, model):
        """Value of ``s(t)`` for every trace in a model."""
        true = {lit for lit in model if lit > 0}
        return [self.lookup("s", t) in true for t in range(len(self.traces))]

    def to_json(self):
        """The ``varmap.json`` sidecar document."""
        variables = sorted(
            [idx, *key] for key, idx in self.pool.obj2id.items() if key[0] in DECISION_KINDS
        )
        return {
            "chain": self.cfg.chain.chain_id,
            "prefix": [k.value for k in self.cfg.prefix],
            "types": list(self.cfg.types),
            "ops": [op.value for op in self.ops],
            "predicates": self.predicates,
            "slots": {str(v): list(js) for v, js in self.slots.items()},
            "decimals": self.decimals,
            "gcd": self.gcd,
            "weights": list(self.weights),
            "traces": list(self.traces),
            "variables": variables,
        }

    @classmethod
    def from_json(cls, doc):
        """Rebuild the decodable part of a VarMap from its sidecar document."""
        cfg = ShapeConfig(
            chain_from_id(doc["chain"]),
            tuple(Quantifier(k) for k in doc["prefix"]),
            tuple(doc["types"]),
        )
        vm = cls(
            cfg,
            [Connector.from_symbol(o) for o in doc["ops"]],
            doc["predicates"],
            {int(v): js for v, js in doc["slots"].items()},
            doc.get("weights", ()),
            doc.get("decimals", 0),
            doc.get("gcd", 1),
            doc.get("traces", ()),
        )
        for expected, (idx, *key) in enumerate(sorted(doc["variables"]), start=1):
            if idx != expected:
                raise exceptions.SolverOutputError(
                    "Decision variables of a varmap must be numbered 1..n without gaps."
                )
            vm.var(*key)
        return vm


class Encoder:
    """Compiler of one search configuration into weighted partial CNF.

    Parameters
    ----------
      cfg : ShapeConfig
        Chain, quantifier prefix and type tuple fixing the formula skeleton.
      domain : Domain
        The preprocessed domain. Only predicates of arity at most two are
        used as atom labels.
      ts : ScoredSet
        Preprocessed scored traces over ``domain``.
      options : EncoderOptions
        Encoding options. If :obj:`None`, the defaults are used.
    """

    def __init__(self, cfg, domain, ts, options=None):
        self.cfg = cfg
        self.domain = domain
        self.ts = ts
        self.options = options or EncoderOptions()
        self.chain = cfg.chain
        self.traces = tuple(ts)
        # A chain without connectors has no use for an alphabet.
        self.ops = self.options.ops if self.chain.n else ()
        self.predicates = self._vocabulary()
        self.slots = self._slot_candidates()
        self.combos = {p.name: self._combos(p) for p in self.predicates}
        self._envs = None

    def _enabled(self, family):
        return family in self.options.families

    def _vocabulary(self):
        preds = sorted(self.domain.predicates.values(), key=lambda p: p.name)
        excluded = [p.name for p in preds if p.arity > SLOTS]
        if excluded:
            warnings.warn(
                f"Predicates of arity above {SLOTS} are not used as atoms: {excluded}. "
                "Split them during preprocessing to make them available."
            )
        return tuple(p for p in preds if p.arity <= SLOTS)

    def _slot_candidates(self):
        bound = self.cfg.b if self.options.strict_eq4 else self.cfg.q
        slots = {}
        for v in range(1, SLOTS + 1):
            js = list(range(bound))
            if not js or any(p.arity < v for p in self.predicates):
                js.append(None)
            slots[v] = tuple(js)
        return slots

    def compatible(self, j, slot_type):
        """Whether quantified variable ``j`` may fill a slot of ``slot_type``."""
        vtype = self.cfg.types[j]
        if self.options.strict_types:
            return vtype == slot_type
        return self.domain.types.subtype_of(vtype, slot_type)

    def _slot_ok(self, pred, v, j):
        if v > pred.arity:
            return j is None
        if j is None:
            return False
        if self._enabled(Family.TYPES):
            return self.compatible(j, pred.arg_types[v - 1])
        return True

    def _combos(self, pred):
        """Variable assignments ``(j1, j2)`` a predicate node labeled with
        ``pred`` may take."""
        return [
            (j1, j2)
            for j1 in self.slots[1]
            for j2 in self.slots[2]
            if self._slot_ok(pred, 1, j1) and self._slot_ok(pred, 2, j2)
        ]

    def feasible(self):
        """Cheap necessary condition for the existence of any labeling.

        False if no predicate can be placed at all, or if visibility is
        enforced and some quantified variable fits no predicate slot.
        """
        usable = [p for p in self.predicates if self.combos[p.name]]
        if not usable:
            logger.debug(f"{self.cfg}: no predicate can label a predicate node")
            return False
        if self._enabled(Family.VISIBILITY):
            for j in range(self.cfg.q):
                if not any(j in combo for p in usable for combo in self.combos[p.name]):
                    logger.debug(f"{self.cfg}: variable {var_name(j)} fits no predicate slot")
                    return False
        return True

    @property
    def environments(self):
        """Per trace, the list of environments as object tuples.

        Environments are ordered universal part first, so that all
        environments sharing a universal assignment are contiguous.
        """
        if self._envs is None:
            envs = []
            total = 0
            for trace in self.traces:
                doms = [
                    trace.instance.objects_of(t, strict=self.options.strict_types)
                    for t in self.cfg.types
                ]
                envs.append((doms, list(product(*doms))))
                total += len(envs[-1][1]) * len(trace)
                if total > self.options.env_cap:
                    raise exceptions.ResourceLimitError(
                        f"{self.cfg} needs more than {self.options.env_cap:d} "
                        "environment-position pairs."
                    )
            self._envs = envs
        return self._envs

    def encode(self):
        """Build the WCNF.

        Returns:
            tuple of (pysat.formula.WCNF, VarMap)
        """
        if self._enabled(Family.DISCRIMINATIVE) and not (
            self.ts.positives and self.ts.negatives
        ):
            raise exceptions.UsageError(
                "Learning needs at least one positive and one negative trace."
            )
        weights, gcd = self._weights()
        vm = VarMap(
            self.cfg,
            self.ops,
            {p.name: p.arity for p in self.predicates},
            self.slots,
            weights,
            self.options.score_decimals,
            gcd,
            [t.name for t in self.traces],
        )
        wcnf = WCNF()
        add = wcnf.append
        self._allocate(vm)
        self._syntax(vm, add)
        self._arity(vm, add)
        if self._enabled(Family.TYPES):
            self._types(vm, add)
        self._atoms(vm, add)
        self._connectors(vm, add)
        self._satisfaction(vm, add)
        if self._enabled(Family.DISCRIMINATIVE):
            self._discriminative(vm, add)
        if self._enabled(Family.REDUNDANCY):
            self._redundancy(vm, add)
        if self._enabled(Family.VISIBILITY):
            self._visibility(vm, add)
        for t, w in enumerate(weights):
            if w > 0:
                wcnf.append([vm.s(t)], weight=w // gcd)
            elif w < 0:
                wcnf.append([-vm.s(t)], weight=-w // gcd)
        wcnf.nv = max(wcnf.nv, vm.n_vars)
        logger.debug(
            f"Encoded {self.cfg}: {wcnf.nv:d} variables, {len(wcnf.hard):d} hard and "
            f"{len(wcnf.soft):d} soft clauses"
        )
        return wcnf, vm

    def _weights(self):
        scale = 10**self.options.score_decimals
        weights = [int(np.rint(t.score * scale)) for t in self.traces]
        nonzero = [abs(w) for w in weights if w]
        gcd = int(np.gcd.reduce(nonzero)) if nonzero else 1
        return weights, gcd

    def _allocate(self, vm):
        chain = self.chain
        for i in chain.connectors:
            for op in self.ops:
                vm.c(i, op)
        for node in chain.predicate_nodes:
            for p in self.predicates:
                vm.pi(node, p.name)
        for node in chain.predicate_nodes:
            for v, js in self.slots.items():
                for j in js:
                    vm.chi(j, v, node)
        for t in range(len(self.traces)):
            vm.s(t)
        if self._enabled(Family.VISIBILITY):
            for node in chain.nodes:
                vm.reach(node)
        for node in chain.nodes:
            for t, (trace, (_, envs)) in enumerate(zip(self.traces, self.environments)):
                for k in range(len(trace)):
                    for e in range(len(envs)):
                        vm.y(node, t, k, e)

    def _syntax(self, vm, add):
        for i in self.chain.connectors:
            for clause in exactly_one([vm.c(i, op) for op in self.ops], vm.pool):
                add(clause)
        for node in self.chain.predicate_nodes:
            if not self.predicates:
                add([])
                continue
            for clause in exactly_one([vm.pi(node, p.name) for p in self.predicates], vm.pool):
                add(clause)
            for v, js in self.slots.items():
                for clause in exactly_one([vm.chi(j, v, node) for j in js], vm.pool):
                    add(clause)

    def _arity(self, vm, add):
        for node in self.chain.predicate_nodes:
            for p in self.predicates:
                for v, js in self.slots.items():
                    if v > p.arity:
                        add([-vm.pi(node, p.name), vm.chi(None, v, node)])
                    elif None in js:
                        add([-vm.pi(node, p.name), -vm.chi(None, v, node)])

    def _types(self, vm, add):
        for node in self.chain.predicate_nodes:
            for p in self.predicates:
                for v in range(1, p.arity + 1):
                    for j in self.slots[v]:
                        if j is not None and not self.compatible(j, p.arg_types[v - 1]):
                            add([-vm.pi(node, p.name), -vm.chi(j, v, node)])

    def _atoms(self, vm, add):
        for t, (trace, (_, envs)) in enumerate(zip(self.traces, self.environments)):
            for node in self.chain.predicate_nodes:
                for p in self.predicates:
                    for j1, j2 in self.combos[p.name]:
                        guard = [-vm.pi(node, p.name), -vm.chi(j1, 1, node), -vm.chi(j2, 2, node)]
                        used = (j1, j2)[: p.arity]
                        for e, env in enumerate(envs):
                            fluent = (p.name, tuple(env[j] for j in used))
                            for k, state in enumerate(trace.states):
                                y = vm.y(node, t, k, e)
                                add(guard + [y if fluent in state else -y])

    def _connectors(self, vm, add):
        for i in self.chain.connectors:
            for op in self.ops:
                guard = vm.c(i, op)
                for t, (trace, (_, envs)) in enumerate(zip(self.traces, self.environments)):
                    for e in range(len(envs)):
                        self._connector(vm, add, guard, op, i, t, e, len(trace))

    def _connector(self, vm, add, guard, op, i, t, e, length):
        left, right = self.chain.left[i], self.chain.right[i]
        recursive = self.options.unroll == "recursive"

        def y(node, k):
            return vm.y(node, t, k, e)

        for k in range(length):
            out = y(i, k)
            if op is Connector.NOT:
                _iff_and(add, guard, out, [-y(left, k)])
            elif op is Connector.AND:
                _iff_and(add, guard, out, [y(left, k), y(right, k)])
            elif op is Connector.OR:
                _iff_or(add, guard, out, [y(left, k), y(right, k)])
            elif op is Connector.IMPLIES:
                _iff_or(add, guard, out, [-y(left, k), y(right, k)])
            elif op is Connector.NEXT:
                _iff_or(add, guard, out, [y(left, k + 1)] if k + 1 < length else [])
            elif op is Connector.YESTERDAY:
                _iff_or(add, guard, out, [y(left, k - 1)] if k > 0 else [])
            elif op is Connector.UNTIL:
                self._until(vm, add, guard, i, t, e, k, length, recursive)
            else:
                future = op in (Connector.EVENTUALLY, Connector.ALWAYS)
                iff = _iff_or if op in (Connector.EVENTUALLY, Connector.ONCE) else _iff_and
                if recursive:
                    step = k + 1 if future else k - 1
                    lits = [y(left, k)] + ([y(i, step)] if 0 <= step < length else [])
                else:
                    positions = range(k, length) if future else range(k + 1)
                    lits = [y(left, j) for j in positions]
                iff(add, guard, out, lits)

    def _until(self, vm, add, guard, i, t, e, k, length, recursive):
        left, right = self.chain.left[i], self.chain.right[i]
        out = vm.y(i, t, k, e)
        if recursive:
            now = vm.y(right, t, k, e)
            if k == length - 1:
                _iff_or(add, guard, out, [now])
                return
            hold, later = vm.y(left, t, k, e), vm.y(i, t, k + 1, e)
            add([-guard, -out, now, hold])
            add([-guard, -out, now, later])
            add([-guard, out, -now])
            add([-guard, out, -hold, -later])
            return
        witnesses = []
        for k2 in range(k, length):
            a = vm.aux("until", i, t, e, k, k2)
            lits = [vm.y(right, t, k2, e)] + [vm.y(left, t, j, e) for j in range(k, k2)]
            _iff_and(add, None, a, lits)
            witnesses.append(a)
        _iff_or(add, guard, out, witnesses)

    def _satisfaction(self, vm, add):
        b, q = self.cfg.b, self.cfg.q
        root = self.chain.root
        for t, (doms, envs) in enumerate(self.environments):
            s = vm.s(t)
            universal = list(product(*doms[:b]))
            existential = list(product(*doms[b:]))
            if not universal:
                add([s])
                continue
            index = {env: idx for idx, env in enumerate(envs)}
            if b == q:
                _iff_and(add, None, s, [vm.y(root, t, 0, index[u]) for u in universal])
            elif b == 0:
                _iff_or(add, None, s, [vm.y(root, t, 0, index[x]) for x in existential])
            else:
                blocks = []
                for ui, u in enumerate(universal):
                    a = vm.aux("forall", t, ui)
                    _iff_or(add, None, a, [vm.y(root, t, 0, index[u + x]) for x in existential])
                    blocks.append(a)
                _iff_and(add, None, s, blocks)

    def _discriminative(self, vm, add):
        add([vm.s(t) for t, trace in enumerate(self.traces) if trace.positive])
        add([-vm.s(t) for t, trace in enumerate(self.traces) if not trace.positive])

    def _redundancy(self, vm, add):
        chain = self.chain
        binary = [op for op in self.ops if op.binary]
        for i in chain.connectors:
            left, right = chain.left[i], chain.right[i]
            if chain.is_connector(left):
                for op in CHAINED_BANS:
                    if op in self.ops:
                        add([-vm.c(i, op), -vm.c(left, op)])
            if chain.is_connector(left) or chain.is_connector(right):
                continue
            for op in binary:
                for p in self.predicates:
                    for j1, j2 in self.combos[p.name]:
                        add(
                            [
                                -vm.c(i, op),
                                -vm.pi(left, p.name),
                                -vm.pi(right, p.name),
                                -vm.chi(j1, 1, left),
                                -vm.chi(j1, 1, right),
                                -vm.chi(j2, 2, left),
                                -vm.chi(j2, 2, right),
                            ]
                        )

    def _visibility(self, vm, add):
        chain = self.chain
        add([vm.reach(chain.root)])
        for i in chain.connectors:
            here = vm.reach(i)
            left, right = vm.reach(chain.left[i]), vm.reach(chain.right[i])
            _iff_and(add, None, left, [here])
            binary = [vm.c(i, op) for op in self.ops if op.binary]
            add([-right, here])
            add([-right] + binary)
            for c in binary:
                add([right, -here, -c])
        for j in range(self.cfg.q):
            witnesses = []
            for node in chain.predicate_nodes:
                for v, js in self.slots.items():
                    if j in js:
                        w = vm.aux("visible", j, v, node)
                        add([-w, vm.reach(node)])
                        add([-w, vm.chi(j, v, node)])
                        witnesses.append(w)
            add(witnesses)


def encode(cfg, domain, ts, opts=None):
    """Shortcut for ``Encoder(cfg, domain, ts, opts).encode()``."""
    return Encoder(cfg, domain, ts, opts).encode()


def decode(model, vm, cfg=None):
    """Read the formula labeling the chain out of a solver model.

    Args:
        model (iterable of int): signed literals, as returned by pysat solvers
        vm (VarMap): the variable map of the encoding
        cfg (ShapeConfig): defaults to the configuration stored in ``vm``

    Returns:
        Formula
    """
    cfg = cfg or vm.cfg
    chain = cfg.chain
    true = {lit for lit in model if lit > 0}

    def pick(options, key, what):
        chosen = [o for o in options if vm.lookup(*key(o)) in true]
        if len(chosen) != 1:
            raise exceptions.DecodeError(f"{len(chosen):d} values selected for {what}.")
        return chosen[0]

    def build(node):
        if chain.is_connector(node):
            op = pick(vm.ops, lambda o: ("c", node, o.name), f"connector node {node}")
            child = build(chain.left[node])
            if op is Connector.NOT:
                return Not(child)
            if op.unary:
                return Unary(op, child)
            return Binary(op, child, build(chain.right[node]))
        pred = pick(sorted(vm.predicates), lambda p: ("pi", node, p), f"predicate node {node}")
        args = []
        for v in range(1, vm.predicates[pred] + 1):
            j = pick(vm.slots[v], lambda j: ("chi", j, v, node), f"slot {v} of node {node}")
            if j is None:
                raise exceptions.DecodeError(f"Slot {v} of node {node} is used but unset.")
            args.append(var_name(j))
        return Atom(pred, tuple(args))

    quantifiers = tuple(
        QuantifiedVariable(kind, var_name(j), typ)
        for j, (kind, typ) in enumerate(zip(cfg.prefix, cfg.types))
    )
    return Formula(quantifiers, build(chain.root))
