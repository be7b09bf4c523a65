import glob
import json
import logging
import math
import os
import re

from dataclasses import dataclass, replace
from typing import Tuple

from ftlearn import exceptions
from ftlearn.data.pddl import (
    Fluent,
    Instance,
    State,
    apply,
    check_fluent,
    parse_instance,
)

logger = logging.getLogger(__name__)

TRACE_SUFFIX = ".trace.json"
PLAN_SUFFIX = ".plan"


@dataclass(frozen=True)
class InstantiatedTrace:
    """A state sequence together with the instance it was produced in.

    The ``name`` identifies the trace in score files and reports, by
    default it is the file name the trace was read from.
    """

    name: str
    instance: Instance
    states: Tuple[State, ...]
    score: float = 1.0

    def __post_init__(self):
        if not self.states:
            raise exceptions.TraceError(f"Trace '{self.name}' has no states.")
        if not math.isfinite(self.score):
            raise exceptions.TraceError(
                f"Trace '{self.name}' has a non-finite score ({self.score})."
            )
        for k, state in enumerate(self.states):
            for f in state:
                for obj in f.args:
                    if obj not in self.instance.objects:
                        raise exceptions.TraceError(
                            f"Trace '{self.name}', state {k}: unknown object '{obj}' "
                            f"in fluent ({f})."
                        )

    def __len__(self):
        return len(self.states)

    def __str__(self):
        return (
            f"Trace '{self.name}' on '{self.instance.name}': "
            f"{len(self.states)} states, score {self.score:g}"
        )

    @property
    def positive(self):
        return self.score >= 0


def _canonical_key(t):
    states = tuple(tuple(sorted(str(f) for f in s)) for s in t.states)
    return t.name, t.instance.name, t.score, states


@dataclass(frozen=True)
class ScoredSet:
    """A set of scored traces, partitioned by the sign of their score."""

    traces: Tuple[InstantiatedTrace, ...]

    def __post_init__(self):
        names = [t.name for t in self.traces]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise exceptions.TraceError(f"Duplicate trace ids: {dupes}.")

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __str__(self):
        return (
            f"ScoredSet: {len(self.positives)} positive, "
            f"{len(self.negatives)} negative traces"
        )

    @property
    def positives(self):
        return tuple(t for t in self.traces if t.score >= 0)

    @property
    def negatives(self):
        return tuple(t for t in self.traces if t.score < 0)

    @property
    def instances(self):
        """Distinct instances in order of first appearance."""
        seen = {}
        for t in self.traces:
            seen.setdefault(t.instance.name, t.instance)
        return tuple(seen.values())

    def sorted(self):
        """Copy with traces in canonical order (name, instance, score, states)."""
        return ScoredSet(tuple(sorted(self.traces, key=_canonical_key)))

    def __add__(self, other):
        return ScoredSet(self.traces + other.traces)


def load_trace(doc, d, i, name=None):
    """Build a trace from a parsed ``.trace.json`` document.

    Args:
        doc (dict): document with keys ``instance``, ``states`` and
            optionally ``score`` (defaults to +1)
        d (Domain): domain the fluents are checked against
        i (Instance): the instance named in the document
        name (str): trace id, defaults to ``doc["name"]`` or the instance name

    Returns:
        InstantiatedTrace
    """
    if not isinstance(doc, dict) or "states" not in doc or "instance" not in doc:
        raise exceptions.TraceError("A trace document needs 'instance' and 'states'.")
    if str(doc["instance"]).lower() != i.name:
        raise exceptions.TraceError(
            f"Trace refers to instance '{doc['instance']}', got '{i.name}'."
        )
    name = name or doc.get("name") or i.name
    states = []
    for k, raw in enumerate(doc["states"]):
        state = set()
        for text in raw:
            fluent = Fluent.from_string(text)
            error = check_fluent(fluent, d, i.objects)
            if error:
                raise exceptions.TraceError(
                    f"Trace '{name}', state {k}: invalid fluent ({text}): {error}."
                )
            state.add(fluent)
        states.append(frozenset(state))
    try:
        score = float(doc.get("score", 1.0))
    except (TypeError, ValueError):
        raise exceptions.TraceError(f"Trace '{name}' has an invalid score.") from None
    return InstantiatedTrace(name, i, tuple(states), score)


def dump_trace(trace):
    """Inverse of :func:`load_trace` (fluents sorted within each state)."""
    return {
        "name": trace.name,
        "instance": trace.instance.name,
        "score": trace.score,
        "states": [[str(f) for f in sorted(s)] for s in trace.states],
    }


_PLAN_STEP = re.compile(r"^\s*(?:\d+(?:\.\d+)?\s*:\s*)?\(([^()]*)\)")


def parse_plan(text):
    """Read an IPC plan, one ``(action obj ...)`` per line.

    Lines may carry a ``step:`` prefix and a trailing ``[cost]``; ``;``
    starts a comment.

    Returns:
        list of (action name, tuple of objects)
    """
    plan = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split(";", 1)[0].strip()
        if not line:
            continue
        match = _PLAN_STEP.match(line)
        if not match or not match.group(1).split():
            raise exceptions.PlanError(f"Cannot read plan line {lineno}: '{line}'.")
        tokens = match.group(1).lower().split()
        plan.append((tokens[0], tuple(tokens[1:])))
    return plan


def plan_to_trace(i, plan, d, name=None, score=1.0):
    """Replay a plan from the initial state of an instance.

    The goal need not be reached by the plan.

    Args:
        i (Instance): the instance
        plan (list): ground actions as returned by :func:`parse_plan`
        d (Domain): domain holding the action schemas
        name (str): trace id, defaults to the instance name
        score (float): score of the trace

    Returns:
        InstantiatedTrace with ``len(plan) + 1`` states
    """
    states = [i.init]
    for k, (action, objects) in enumerate(plan):
        try:
            op = d.ground(action, tuple(objects), i)
            states.append(apply(states[-1], op))
        except exceptions.PlanError as e:
            raise type(e)(str(e), step=k) from None
    return InstantiatedTrace(name or i.name, i, tuple(states), score)


def assign_scores(traces, labeling):
    """Attach scores to traces.

    Args:
        traces (iterable of InstantiatedTrace): traces to score
        labeling (dict): trace id -> real score; traces without an entry keep
            their current score

    Returns:
        ScoredSet
    """
    traces = list(traces)
    known = {t.name for t in traces}
    unknown = sorted(set(labeling) - known)
    if unknown:
        raise exceptions.TraceError(f"Scores given for unknown traces: {unknown}.")
    return ScoredSet(
        tuple(replace(t, score=float(labeling.get(t.name, t.score))) for t in traces)
    )


def load_scores(path):
    """Read a ``scores.json`` map from trace id to score.

    Keys are trace ids as produced by :func:`load_trace_dir`; a trailing
    ``.plan`` or ``.trace.json`` is ignored.
    """
    with open(path, "r") as file:
        scores = json.load(file)
    if not isinstance(scores, dict):
        raise exceptions.TraceError(f"'{path}' does not hold a name -> score map.")
    return {_trace_id(k): float(v) for k, v in scores.items()}


def _trace_id(filename):
    base = filename.replace(os.sep, "/")
    for suffix in (TRACE_SUFFIX, PLAN_SUFFIX):
        if base.endswith(suffix):
            return base[: -len(suffix)]
    return base


class InstanceLocator:
    """Finds and caches problem files by the problem name they declare.

    Args:
        domain (Domain): the domain the instances belong to
        roots (list): directories searched recursively for ``*.pddl`` files
    """

    _PROBLEM = re.compile(r"\(\s*define\s*\(\s*problem\s+([^\s()]+)", re.IGNORECASE)

    def __init__(self, domain, roots):
        self.domain = domain
        self.roots = [roots] if isinstance(roots, str) else list(roots)
        self.files = {}
        self.cache = {}
        self._index()

    def _index(self):
        for root in self.roots:
            pattern = os.path.join(root, "**", "*.pddl")
            for path in sorted(glob.glob(pattern, recursive=True)):
                with open(path, "r", encoding="utf-8") as file:
                    match = self._PROBLEM.search(file.read())
                if match:
                    self.files.setdefault(match.group(1).lower(), path)
        logger.debug(f"Indexed {len(self.files):d} problem files under {self.roots}")

    def get(self, name):
        name = name.lower()
        if name not in self.cache:
            if name not in self.files:
                raise exceptions.TraceError(
                    f"No problem file for instance '{name}' under {self.roots}."
                )
            with open(self.files[name], "r", encoding="utf-8") as file:
                self.cache[name] = parse_instance(file.read(), self.domain)
        return self.cache[name]


def load_trace_dir(directory, d, locator, score=1.0, label=None):
    """Load all traces of a directory.

    ``*.trace.json`` files are read with :func:`load_trace`; ``<name>.plan``
    files are replayed in the instance called ``<name>``. Every trace gets
    ``score``, replacing a score stored in the document. Trace ids are
    ``<label>/<name>`` where the label defaults to the last two components
    of the directory path, so that e.g. ``gs/train/p01`` and
    ``ngf/train/p01`` stay apart.

    Returns:
        list of InstantiatedTrace sorted by trace id
    """
    if not os.path.isdir(directory):
        raise exceptions.TraceError(f"'{directory}' is not a directory.")
    if label is None:
        parts = os.path.normpath(os.path.abspath(directory)).split(os.sep)
        label = "/".join(p for p in parts[-2:] if p)
    traces = []
    for path in sorted(os.listdir(directory)):
        full = os.path.join(directory, path)
        if path.endswith(TRACE_SUFFIX):
            with open(full, "r", encoding="utf-8") as file:
                try:
                    doc = json.load(file)
                except json.JSONDecodeError as e:
                    raise exceptions.TraceError(f"'{full}' is not valid JSON: {e}")
            doc["score"] = score
            instance = locator.get(str(doc.get("instance", "")))
            traces.append(load_trace(doc, d, instance, name=f"{label}/{_trace_id(path)}"))
        elif path.endswith(PLAN_SUFFIX):
            instance = locator.get(_trace_id(path))
            with open(full, "r", encoding="utf-8") as file:
                plan = parse_plan(file.read())
            try:
                trace = plan_to_trace(
                    instance, plan, d, name=f"{label}/{_trace_id(path)}", score=score
                )
            except exceptions.PlanError as e:
                raise exceptions.PlanError(f"{full}: {e}") from None
            traces.append(trace)
    logger.info(f"Loaded {len(traces):d} traces from {directory}")
    return traces
