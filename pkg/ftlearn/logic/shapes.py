"""Enumerators for formula skeletons.

A :class:`TLChain` is an unlabeled full binary tree. Its inner nodes are
connector nodes, its leaves are predicate nodes, each predicate node owning
two variable slots. Node indices are shared: connectors are numbered
``0..n-1`` in pre-order, predicate nodes ``n..2n`` from left to right, so
that the root always has index 0.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Tuple

from ftlearn.logic.ftl import Quantifier

SLOTS = 2


@dataclass(frozen=True)
class TLChain:
    n: int
    left: Tuple[int, ...]
    right: Tuple[int, ...]
    chain_id: str

    @property
    def m(self):
        return self.n + 1

    @property
    def root(self):
        return 0

    @property
    def connectors(self):
        return range(self.n)

    @property
    def predicate_nodes(self):
        return range(self.n, 2 * self.n + 1)

    @property
    def nodes(self):
        return range(2 * self.n + 1)

    def is_connector(self, node):
        return node < self.n

    def __str__(self):
        return self.chain_id


@dataclass(frozen=True)
class ShapeConfig:
    chain: TLChain
    prefix: Tuple[Quantifier, ...]
    types: Tuple[str, ...]

    def __post_init__(self):
        if len(self.prefix) != len(self.types):
            raise ValueError("Quantifier prefix and type tuple differ in length.")
        kinds = list(self.prefix)
        if kinds != sorted(kinds, key=lambda k: k is Quantifier.EXISTS):
            raise ValueError("Universal quantifiers must precede existential ones.")

    @property
    def q(self):
        return len(self.prefix)

    @property
    def b(self):
        return sum(k is Quantifier.FORALL for k in self.prefix)

    def __str__(self):
        quants = " ".join(f"{k.value}:{t}" for k, t in zip(self.prefix, self.types))
        return f"{self.chain.chain_id} [{quants}]"


@lru_cache(maxsize=None)
def _shapes(r):
    """All full binary trees with ``r`` inner nodes as nested pairs."""
    if r == 0:
        return (None,)
    out = []
    for left_size in range(r - 1, -1, -1):
        for left in _shapes(left_size):
            for right in _shapes(r - 1 - left_size):
                out.append((left, right))
    return tuple(out)


def _shape_id(shape):
    if shape is None:
        return "P"
    return f"({_shape_id(shape[0])},{_shape_id(shape[1])})"


def _count(shape):
    return 0 if shape is None else 1 + _count(shape[0]) + _count(shape[1])


def chain_from_shape(shape):
    n = _count(shape)
    left, right = [], []
    next_leaf = [n]

    def build(s):
        if s is None:
            next_leaf[0] += 1
            return next_leaf[0] - 1
        idx = len(left)
        left.append(None)
        right.append(None)
        left[idx] = build(s[0])
        right[idx] = build(s[1])
        return idx

    build(shape)
    return TLChain(n, tuple(left), tuple(right), _shape_id(shape))


def chain_from_id(chain_id):
    """Inverse of ``TLChain.chain_id``, e.g. ``"((P,P),P)"``."""
    text = chain_id.replace(" ", "")
    pos = [0]

    def read():
        if text.startswith("P", pos[0]):
            pos[0] += 1
            return None
        if not text.startswith("(", pos[0]):
            raise ValueError(f"Invalid chain id: {chain_id}")
        pos[0] += 1
        left = read()
        if not text.startswith(",", pos[0]):
            raise ValueError(f"Invalid chain id: {chain_id}")
        pos[0] += 1
        right = read()
        if not text.startswith(")", pos[0]):
            raise ValueError(f"Invalid chain id: {chain_id}")
        pos[0] += 1
        return (left, right)

    shape = read()
    if pos[0] != len(text):
        raise ValueError(f"Invalid chain id: {chain_id}")
    return chain_from_shape(shape)


def gen_chains(r):
    """Yield every TL chain with exactly ``r`` connectors.

    The order is canonical: larger left subtrees first, recursively.
    """
    if r < 0:
        raise ValueError(f"Invalid connector budget: {r}. Must be >= 0.")
    for shape in _shapes(r):
        yield chain_from_shape(shape)


def gen_quantifier_prefixes(q):
    """The ``q + 1`` prefixes of ``b`` universals then ``q - b`` existentials,
    for ``b = q .. 0``."""
    if q < 1:
        raise ValueError(f"Invalid quantifier budget: {q}. Must be >= 1.")
    return [
        (Quantifier.FORALL,) * b + (Quantifier.EXISTS,) * (q - b) for b in range(q, -1, -1)
    ]


def gen_type_tuples(d, q, prefix):
    """Yield type tuples for a prefix, one per permutation class of each
    same-kind quantifier block.

    Args:
        d (Domain or TypeTree or sequence of str): source of the types
        q (int): number of quantifiers
        prefix (tuple of Quantifier): the quantifier kinds
    """
    if hasattr(d, "types") and hasattr(d.types, "types"):
        types = d.types.types
    elif hasattr(d, "types"):
        types = d.types
    else:
        types = tuple(sorted(d))
    if len(prefix) != q:
        raise ValueError(f"Prefix length {len(prefix)} does not match q={q}.")
    b = sum(k is Quantifier.FORALL for k in prefix)
    blocks = product(
        combinations_with_replacement(types, b),
        combinations_with_replacement(types, q - b),
    )
    for universal, existential in blocks:
        yield universal + existential


def gen_configs(d, r, q):
    """Cross product of chains, prefixes and type tuples for fixed budgets."""
    for chain in gen_chains(r):
        for prefix in gen_quantifier_prefixes(q):
            for types in gen_type_tuples(d, q, prefix):
                yield ShapeConfig(chain, prefix, types)
