import logging
import pyparsing as pp

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, NamedTuple, Optional, Tuple

from ftlearn import exceptions

logger = logging.getLogger(__name__)

ROOT_TYPE = "object"
SUPPORTED_REQUIREMENTS = (":strips", ":typing")


class Fluent(NamedTuple):
    """A ground atom, i.e. a predicate name applied to a tuple of objects."""

    predicate: str
    args: Tuple[str, ...]

    def __str__(self):
        return " ".join((self.predicate, *self.args))

    @classmethod
    def from_string(cls, text):
        """Parse the whitespace separated form ``"pred obj1 obj2"``."""
        tokens = text.strip().lower().split()
        if not tokens:
            raise exceptions.TraceError("Empty fluent string.")
        return cls(tokens[0], tuple(tokens[1:]))


# A state is a set of fluents.
State = FrozenSet[Fluent]


@dataclass(frozen=True)
class TypeTree:
    """Tree of type symbols given as a child -> parent map.

    The root is the only type mapped to ``None``. Object classes are never
    stored, they are materialized on demand from an object -> type map, see
    :meth:`Instance.objects_of`.
    """

    parent: Dict[str, Optional[str]]

    def __post_init__(self):
        roots = [t for t, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise exceptions.PDDLSemanticError(
                f"A type tree needs exactly one root, found {sorted(roots)}."
            )
        ancestors = {}
        for t in self.parent:
            chain, node = [], t
            while node is not None:
                if node in chain:
                    raise exceptions.PDDLSemanticError(
                        f"Cyclic type declaration involving '{t}'."
                    )
                if node not in self.parent:
                    raise exceptions.PDDLSemanticError(f"Undeclared type '{node}'.")
                chain.append(node)
                node = self.parent[node]
            ancestors[t] = tuple(chain)
        object.__setattr__(self, "_ancestors", ancestors)
        object.__setattr__(self, "_root", roots[0])

    def __contains__(self, t):
        return t in self.parent

    @property
    def root(self):
        return self._root

    @property
    def types(self):
        """All type symbols in canonical (sorted) order."""
        return tuple(sorted(self.parent))

    def ancestors(self, t):
        """Return ``t`` followed by its ancestors up to the root."""
        self._check(t)
        return self._ancestors[t]

    def children(self, t):
        self._check(t)
        return tuple(sorted(c for c, p in self.parent.items() if p == t))

    def subtype_of(self, t1, t2):
        self._check(t1)
        self._check(t2)
        return t2 in self._ancestors[t1]

    def _check(self, t):
        if t not in self.parent:
            raise exceptions.PDDLSemanticError(f"Unknown type '{t}'.")

    @classmethod
    def flat(cls, *types, root=ROOT_TYPE):
        """Tree with all given types as direct children of the root."""
        parent = {root: None}
        parent.update({t: root for t in types if t != root})
        return cls(parent)


def subtype_of(t1, t2, tt):
    """True iff ``t1`` equals ``t2`` or descends from it in ``tt``."""
    return tt.subtype_of(t1, t2)


@dataclass(frozen=True)
class Predicate:
    name: str
    arg_types: Tuple[str, ...] = ()

    @property
    def arity(self):
        return len(self.arg_types)

    def __str__(self):
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Atom:
    """A lifted atom whose arguments are schema parameters (``?x``)."""

    predicate: str
    args: Tuple[str, ...] = ()

    def ground(self, binding):
        return Fluent(self.predicate, tuple(binding[a] for a in self.args))


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: Tuple[Tuple[str, str], ...]
    pre: FrozenSet[Atom] = frozenset()
    add: FrozenSet[Atom] = frozenset()
    delete: FrozenSet[Atom] = frozenset()


@dataclass(frozen=True)
class Operator:
    """A grounded action schema."""

    schema: str
    binding: Tuple[str, ...]
    pre: FrozenSet[Fluent]
    add: FrozenSet[Fluent]
    delete: FrozenSet[Fluent]

    def __str__(self):
        return "(" + " ".join((self.schema, *self.binding)) + ")"


@dataclass(frozen=True)
class Domain:
    name: str
    types: TypeTree
    predicates: Dict[str, Predicate] = field(default_factory=dict)
    schemas: Dict[str, ActionSchema] = field(default_factory=dict)
    requirements: Tuple[str, ...] = ()

    def __str__(self):
        return (
            f"Domain '{self.name}': {len(self.types.types)} types, "
            f"{len(self.predicates)} predicates, {len(self.schemas)} schemas"
        )

    def predicate(self, name):
        try:
            return self.predicates[name]
        except KeyError:
            raise exceptions.PDDLSemanticError(
                f"Unknown predicate '{name}' in domain '{self.name}'."
            ) from None

    def ground(self, schema_name, objects, instance):
        """Bind the parameters of a schema to objects of an instance.

        Args:
            schema_name (str): name of the action schema
            objects (tuple): objects in parameter order
            instance (Instance): instance the objects belong to

        Returns:
            Operator
        """
        schema = self.schemas.get(schema_name)
        if schema is None:
            raise exceptions.PlanError(f"Unknown action schema '{schema_name}'.")
        if len(objects) != len(schema.params):
            raise exceptions.PlanError(
                f"Action '{schema_name}' expects {len(schema.params)} arguments, "
                f"got {len(objects)}."
            )
        binding = {}
        for (var, ptype), obj in zip(schema.params, objects):
            if obj not in instance.objects:
                raise exceptions.PlanError(
                    f"Unknown object '{obj}' in instance '{instance.name}'."
                )
            otype = instance.objects[obj]
            if not self.types.subtype_of(otype, ptype):
                raise exceptions.PlanError(
                    f"Object '{obj}' of type '{otype}' does not fit parameter "
                    f"{var} - {ptype} of '{schema_name}'."
                )
            binding[var] = obj
        return Operator(
            schema=schema_name,
            binding=tuple(objects),
            pre=frozenset(a.ground(binding) for a in schema.pre),
            add=frozenset(a.ground(binding) for a in schema.add),
            delete=frozenset(a.ground(binding) for a in schema.delete),
        )


@dataclass(frozen=True)
class Instance:
    name: str
    domain_name: str
    types: TypeTree
    objects: Dict[str, str] = field(default_factory=dict)
    init: State = frozenset()
    goal: State = frozenset()

    def __str__(self):
        return (
            f"Instance '{self.name}' of '{self.domain_name}': "
            f"{len(self.objects)} objects, {len(self.init)} init fluents, "
            f"{len(self.goal)} goal fluents"
        )

    def type_of(self, obj):
        try:
            return self.objects[obj]
        except KeyError:
            raise exceptions.PDDLSemanticError(
                f"Unknown object '{obj}' in instance '{self.name}'."
            ) from None

    def objects_of(self, t, strict=False):
        """Objects whose type is ``t`` (or a subtype of it unless ``strict``)."""
        if t not in self.types:
            raise exceptions.FormulaError(
                f"Type '{t}' is unknown in instance '{self.name}'."
            )
        if strict:
            return tuple(sorted(o for o, ot in self.objects.items() if ot == t))
        return tuple(
            sorted(o for o, ot in self.objects.items() if self.types.subtype_of(ot, t))
        )


def check_fluent(fluent, domain, objects):
    """Validate a fluent against predicate signatures and an object map.

    Returns an error message or ``None``.
    """
    pred = domain.predicates.get(fluent.predicate)
    if pred is None:
        return f"unknown predicate '{fluent.predicate}'"
    if pred.arity != len(fluent.args):
        return (
            f"predicate '{pred.name}' has arity {pred.arity}, "
            f"got {len(fluent.args)} arguments"
        )
    for obj, slot in zip(fluent.args, pred.arg_types):
        if obj not in objects:
            return f"unknown object '{obj}'"
        if not domain.types.subtype_of(objects[obj], slot):
            return (
                f"object '{obj}' of type '{objects[obj]}' does not fit slot "
                f"type '{slot}' of '{pred.name}'"
            )
    return None


def applicable(s, o):
    """True iff the preconditions of operator ``o`` hold in state ``s``."""
    return o.pre <= s


def apply(s, o):
    """Successor state ``(s - del(o)) | add(o)``."""
    if not applicable(s, o):
        missing = ", ".join(sorted(str(f) for f in o.pre - s))
        raise exceptions.NotApplicableError(f"{o} is not applicable, missing {missing}")
    return (s - o.delete) | o.add


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


class _SExpr:
    """Parenthesized token list together with its source position."""

    __slots__ = ("items", "line", "col")

    def __init__(self, items, line, col):
        self.items = items
        self.line = line
        self.col = col

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, idx):
        return self.items[idx]

    @property
    def head(self):
        return self.items[0] if self.items and isinstance(self.items[0], str) else None


class PDDLGrammar:
    """S-expression grammar for PDDL files with ``;`` line comments.

    Symbols are lower-cased while parsing.
    """

    def __init__(self):
        symbol = pp.Regex(r"[^();\s]+")
        symbol.set_parse_action(lambda t: t[0].lower())
        sexpr = pp.Forward()
        group = pp.Group(pp.Suppress("(") + pp.ZeroOrMore(symbol | sexpr) + pp.Suppress(")"))
        group.set_parse_action(
            lambda s, loc, t: _SExpr(list(t[0]), pp.lineno(loc, s), pp.col(loc, s))
        )
        sexpr <<= group
        sexpr.ignore(";" + pp.rest_of_line)
        self.sexpr = sexpr

    def parse(self, text):
        try:
            return self.sexpr.parse_string(text, parse_all=True)[0]
        except pp.ParseException as e:
            raise exceptions.PDDLSyntaxError(e.msg, e.lineno, e.col) from None


_GRAMMAR = None


def _read(text):
    global _GRAMMAR
    if _GRAMMAR is None:
        _GRAMMAR = PDDLGrammar()
    return _GRAMMAR.parse(text)


def _fail(msg, where):
    raise exceptions.PDDLSemanticError(
        msg, getattr(where, "line", None), getattr(where, "col", None)
    )


def _header(root, kind):
    """Check ``(define (kind NAME) ...)`` and return NAME."""
    if root.head != "define" or len(root) < 2 or not isinstance(root[1], _SExpr):
        _fail("Expected '(define (...) ...)'", root)
    head = root[1]
    if head.head != kind or len(head) != 2 or not isinstance(head[1], str):
        _fail(f"Expected '({kind} <name>)'", head)
    return head[1]


def _typed_list(expr, start=0):
    """Read ``a b - t c`` into ``[(a, t), (b, t), (c, object)]``."""
    names, out = [], []
    items = list(expr)[start:]
    idx = 0
    while idx < len(items):
        item = items[idx]
        if not isinstance(item, str):
            _fail("Unexpected nested expression in typed list", item)
        if item == "-":
            if idx + 1 >= len(items):
                _fail("Missing type after '-'", expr)
            ptype = items[idx + 1]
            if not isinstance(ptype, str):
                _fail("'either' types are not supported", ptype)
            out.extend((n, ptype) for n in names)
            names = []
            idx += 2
            continue
        names.append(item)
        idx += 1
    out.extend((n, ROOT_TYPE) for n in names)
    return out


def _type_tree(section):
    parent = {ROOT_TYPE: None}
    implicit = set()
    for name, ptype in _typed_list(section, start=1):
        if name == ROOT_TYPE:
            _fail(f"'{ROOT_TYPE}' cannot be given a parent type", section)
        if name in parent and name not in implicit and parent[name] != ptype:
            _fail(f"Type '{name}' declared twice with different parents", section)
        parent[name] = ptype
        implicit.discard(name)
        if ptype not in parent:
            parent[ptype] = ROOT_TYPE
            implicit.add(ptype)
    return TypeTree(parent)


def _requirements(section):
    reqs = []
    for req in list(section)[1:]:
        if req not in SUPPORTED_REQUIREMENTS:
            _fail(f"Unsupported requirement '{req}'", section)
        reqs.append(req)
    return tuple(sorted(set(reqs)))


def _conjunction(expr, negative_ok):
    """Flatten a conjunction of (possibly negated) atoms.

    Returns a list of ``(positive, sexpr)`` pairs.
    """
    if isinstance(expr, str):
        _fail(f"Expected an atom or conjunction, got '{expr}'", expr)
    if len(expr) == 0:
        return []
    head = expr.head
    if head == "and":
        out = []
        for sub in list(expr)[1:]:
            out.extend(_conjunction(sub, negative_ok))
        return out
    if head == "not":
        if not negative_ok:
            _fail("Negative preconditions and goals are not supported", expr)
        if len(expr) != 2 or isinstance(expr[1], str) or expr[1].head in ("and", "not"):
            _fail("'not' must wrap a single atom", expr)
        return [(False, expr[1])]
    if head in ("or", "imply", "exists", "forall", "when", "=", "increase") or head is None:
        _fail(f"Unsupported construct '{head}'", expr)
    return [(True, expr)]


def _atom_args(expr):
    args = list(expr)[1:]
    for a in args:
        if not isinstance(a, str):
            _fail("Atom arguments must be symbols", expr)
    return tuple(args)


def _check_atom(domain_preds, types, expr, args, arg_types):
    pred = domain_preds.get(expr.head)
    if pred is None:
        _fail(f"Undeclared predicate '{expr.head}'", expr)
    if pred.arity != len(args):
        _fail(
            f"Predicate '{pred.name}' has arity {pred.arity}, got {len(args)} arguments",
            expr,
        )
    for a, at, slot in zip(args, arg_types, pred.arg_types):
        if not types.subtype_of(at, slot):
            _fail(
                f"Argument '{a}' of type '{at}' does not fit slot type '{slot}' of "
                f"'{pred.name}'",
                expr,
            )


def _action(section, types, predicates):
    items = list(section)
    if len(items) < 2 or not isinstance(items[1], str):
        _fail("Action without a name", section)
    name = items[1]
    fields = {}
    idx = 2
    while idx < len(items):
        key = items[idx]
        if not isinstance(key, str) or not key.startswith(":") or idx + 1 >= len(items):
            _fail(f"Malformed action '{name}'", section)
        if key not in (":parameters", ":precondition", ":effect"):
            _fail(f"Unsupported action field '{key}' in '{name}'", section)
        fields[key] = items[idx + 1]
        idx += 2
    empty = _SExpr([], section.line, section.col)
    if isinstance(fields.get(":parameters", empty), str):
        _fail(f"Malformed parameter list of action '{name}'", section)
    params = _typed_list(fields.get(":parameters", empty))
    ptypes = {}
    for var, ptype in params:
        if not var.startswith("?"):
            _fail(f"Parameter '{var}' of '{name}' must start with '?'", section)
        if ptype not in types:
            _fail(f"Undeclared type '{ptype}' in action '{name}'", section)
        if var in ptypes:
            _fail(f"Duplicate parameter '{var}' in action '{name}'", section)
        ptypes[var] = ptype

    def lift(expr, negative_ok):
        pos, neg = set(), set()
        for positive, atom in _conjunction(expr, negative_ok):
            args = _atom_args(atom)
            for a in args:
                if a not in ptypes:
                    _fail(f"Undeclared parameter '{a}' in action '{name}'", atom)
            _check_atom(predicates, types, atom, args, [ptypes[a] for a in args])
            (pos if positive else neg).add(Atom(atom.head, args))
        return frozenset(pos), frozenset(neg)

    pre, _ = lift(fields.get(":precondition", empty), negative_ok=False)
    add, delete = lift(fields.get(":effect", empty), negative_ok=True)
    return ActionSchema(name, tuple(params), pre, add, delete)


def parse_domain(text):
    """Parse a typed STRIPS domain.

    Args:
        text (str): PDDL source of a domain file

    Returns:
        Domain
    """
    root = _read(text)
    name = _header(root, "domain")
    requirements = ()
    types = TypeTree({ROOT_TYPE: None})
    predicates, schemas = {}, {}
    for section in list(root)[2:]:
        if isinstance(section, str):
            _fail(f"Unexpected symbol '{section}'", root)
        head = section.head
        if head == ":requirements":
            requirements = _requirements(section)
        elif head == ":types":
            types = _type_tree(section)
        elif head == ":predicates":
            for decl in list(section)[1:]:
                if isinstance(decl, str) or decl.head is None:
                    _fail("Malformed predicate declaration", section)
                if decl.head in predicates:
                    _fail(f"Duplicate predicate '{decl.head}'", decl)
                slots = _typed_list(decl, start=1)
                for _, slot in slots:
                    if slot not in types:
                        _fail(f"Undeclared type '{slot}' in predicate '{decl.head}'", decl)
                predicates[decl.head] = Predicate(decl.head, tuple(t for _, t in slots))
        elif head == ":action":
            schema = _action(section, types, predicates)
            if schema.name in schemas:
                _fail(f"Duplicate action '{schema.name}'", section)
            schemas[schema.name] = schema
        else:
            _fail(f"Unsupported domain section '{head}'", section)
    domain = Domain(name, types, predicates, schemas, requirements)
    logger.debug(str(domain))
    return domain


def parse_instance(text, d):
    """Parse a problem file against a domain.

    Args:
        text (str): PDDL source of a problem file
        d (Domain): the domain the problem refers to

    Returns:
        Instance
    """
    root = _read(text)
    name = _header(root, "problem")
    objects = {}
    init, goal = frozenset(), frozenset()
    domain_name = None
    for section in list(root)[2:]:
        if isinstance(section, str):
            _fail(f"Unexpected symbol '{section}'", root)
        head = section.head
        if head == ":domain":
            if len(section) != 2 or section[1] != d.name:
                _fail(f"Problem '{name}' does not refer to domain '{d.name}'", section)
            domain_name = section[1]
        elif head == ":requirements":
            _requirements(section)
        elif head == ":objects":
            for obj, otype in _typed_list(section, start=1):
                if otype not in d.types:
                    _fail(f"Object '{obj}' has undeclared type '{otype}'", section)
                if obj in objects:
                    _fail(f"Duplicate object '{obj}'", section)
                objects[obj] = otype
        elif head in (":init", ":goal"):
            exprs = list(section)[1:]
            if head == ":goal" and len(exprs) != 1:
                _fail("':goal' takes exactly one expression", section)
            fluents = set()
            for expr in exprs:
                for _, atom in _conjunction(expr, negative_ok=False):
                    fluent = Fluent(atom.head, _atom_args(atom))
                    error = check_fluent(fluent, d, objects)
                    if error:
                        _fail(f"Invalid fluent ({fluent}): {error}", atom)
                    fluents.add(fluent)
            if head == ":init":
                init = frozenset(fluents)
            else:
                goal = frozenset(fluents)
        else:
            _fail(f"Unsupported problem section '{head}'", section)
    if domain_name is None:
        _fail(f"Problem '{name}' lacks a ':domain' section", root)
    instance = Instance(name, d.name, d.types, objects, init, goal)
    logger.debug(str(instance))
    return instance


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _fluent_text(f):
    return "(" + " ".join((f.predicate, *f.args)) + ")"


def _atom_text(a):
    return "(" + " ".join((a.predicate, *a.args)) + ")"


def _conj_text(parts):
    if not parts:
        return "()"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


def write_domain(d):
    """Serialize a domain to PDDL text accepted by :func:`parse_domain`."""
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append(f"  (:requirements {' '.join(d.requirements)})")
    subtypes = [t for t in d.types.types if t != d.types.root]
    if subtypes:
        lines.append("  (:types")
        by_parent = {}
        for t in subtypes:
            by_parent.setdefault(d.types.parent[t], []).append(t)
        for ptype in sorted(by_parent):
            lines.append(f"    {' '.join(by_parent[ptype])} - {ptype}")
        lines.append("  )")
    lines.append("  (:predicates")
    for name in sorted(d.predicates):
        pred = d.predicates[name]
        slots = [f"?x{i + 1} - {t}" for i, t in enumerate(pred.arg_types)]
        lines.append("    (" + " ".join([name, *slots]) + ")")
    lines.append("  )")
    for name in sorted(d.schemas):
        schema = d.schemas[name]
        params = " ".join(f"{v} - {t}" for v, t in schema.params)
        pre = sorted(_atom_text(a) for a in schema.pre)
        eff = sorted(_atom_text(a) for a in schema.add)
        eff += sorted(f"(not {_atom_text(a)})" for a in schema.delete)
        lines.append(f"  (:action {name}")
        lines.append(f"    :parameters ({params})")
        lines.append(f"    :precondition {_conj_text(pre)}")
        lines.append(f"    :effect {_conj_text(eff)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def write_instance(i):
    """Serialize an instance to PDDL text accepted by :func:`parse_instance`."""
    lines = [f"(define (problem {i.name})", f"  (:domain {i.domain_name})"]
    by_type = {}
    for obj in sorted(i.objects):
        by_type.setdefault(i.objects[obj], []).append(obj)
    lines.append("  (:objects")
    for otype in sorted(by_type):
        lines.append(f"    {' '.join(by_type[otype])} - {otype}")
    lines.append("  )")
    lines.append("  (:init")
    lines.extend(f"    {_fluent_text(f)}" for f in sorted(i.init))
    lines.append("  )")
    lines.append(f"  (:goal {_conj_text(sorted(_fluent_text(f) for f in i.goal))})")
    lines.append(")")
    return "\n".join(lines) + "\n"
