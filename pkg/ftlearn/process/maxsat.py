"""Weighted partial MaxSAT solving.

:class:`MaxSATSolver` runs a linear SAT-UNSAT search on top of a CDCL
solver from python-sat: every soft clause gets a relaxation literal, and
after each model a totalizer bound forces the next model to be strictly
cheaper, until the hard clauses plus the bound become unsatisfiable.
:class:`ExternalSolver` hands the task to any program speaking the DIMACS
WCNF format of the MaxSAT Evaluations.
"""

import logging
import os
import shlex
import subprocess
import tempfile
import threading
import time
import numpy as np

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from pysat.card import ITotalizer
from pysat.formula import WCNF
from pysat.solvers import Solver, SolverNames

from ftlearn import exceptions

logger = logging.getLogger(__name__)

DEFAULT_ENGINE = "minisat22"


class Status(Enum):
    OPTIMUM = "optimum"
    BOUNDED = "satisfiable-bounded"
    UNSATISFIABLE = "unsatisfiable"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Outcome:
    """Result of a MaxSAT call.

    ``model`` holds signed literals; ``cost`` is the sum of the weights of
    the soft clauses it falsifies. Both are present or both absent.
    """

    status: Status
    model: Optional[Tuple[int, ...]] = None
    cost: Optional[int] = None
    time_ms: float = 0.0

    def __post_init__(self):
        if (self.model is None) != (self.cost is None):
            raise ValueError("An outcome has either both a model and a cost, or neither.")

    @property
    def has_model(self):
        return self.model is not None


def _true_set(model):
    return {lit for lit in model if lit > 0}


def _satisfied(clause, true):
    return any((lit in true) if lit > 0 else (-lit not in true) for lit in clause)


def violated_hard(wcnf, model):
    """Hard clauses of ``wcnf`` falsified by ``model`` (absent variables are false)."""
    true = _true_set(model)
    return [c for c in wcnf.hard if not _satisfied(c, true)]


def cost_of(wcnf, model):
    """Sum of the weights of the soft clauses falsified by ``model``."""
    true = _true_set(model)
    return int(sum(w for c, w in zip(wcnf.soft, wcnf.wght) if not _satisfied(c, true)))


class MaxSATSolver:
    """Embedded weighted partial MaxSAT solver.

    Args:
        engine (str): name of the python-sat SAT solver used as oracle
        seed (int): 0 keeps the soft clauses in input order, any other value
            permutes the order in which they are relaxed
        time_limit (float): wall clock budget in seconds for one :meth:`solve`
        conflict_limit (int): conflict budget of every oracle call
    """

    def __init__(self, engine=DEFAULT_ENGINE, seed=0, time_limit=None, conflict_limit=None):
        self.engine = engine
        self.seed = seed
        self.time_limit = time_limit
        self.conflict_limit = conflict_limit
        known = [
            n for names in vars(SolverNames).values() if isinstance(names, tuple) for n in names
        ]
        if self.engine not in known:
            raise ValueError(f"Invalid engine: {self.engine}. Must be one of {sorted(known)}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError(f"Invalid time limit: {self.time_limit}. Must be > 0.")
        if self.conflict_limit is not None and self.conflict_limit <= 0:
            raise ValueError(f"Invalid conflict limit: {self.conflict_limit}. Must be > 0.")

    def _order(self, n):
        if self.seed == 0:
            return list(range(n))
        return [int(i) for i in np.random.default_rng(self.seed).permutation(n)]

    def _start_timer_thread(self, oracle):
        """Interrupt the oracle once the time limit has passed."""
        self.timer_event = threading.Event()

        def watch():
            if not self.timer_event.wait(self.time_limit):
                oracle.interrupt()

        self.timer_thread = threading.Thread(target=watch)
        self.timer_thread.daemon = True
        self.timer_thread.start()

    def _stop_timer_thread(self):
        if getattr(self, "timer_event", None) is not None:
            self.timer_event.set()
            self.timer_thread.join()
            self.timer_event = None
            self.timer_thread = None

    def _call(self, oracle):
        """One oracle call: True, False, or None if a budget ran out."""
        if self.time_limit is None and self.conflict_limit is None:
            return oracle.solve()
        if self.conflict_limit is not None:
            oracle.conf_budget(self.conflict_limit)
        return oracle.solve_limited(expect_interrupt=self.time_limit is not None)

    def solve(self, wcnf):
        """Minimize the weight of falsified soft clauses subject to the hard ones.

        Args:
            wcnf (pysat.formula.WCNF): the task

        Returns:
            Outcome
        """
        start = time.perf_counter()
        best, best_cost, status = None, None, None
        with Solver(name=self.engine, bootstrap_with=wcnf.hard) as oracle:
            top = max([wcnf.nv] + [abs(lit) for c in wcnf.soft for lit in c])
            relax = []
            for idx in self._order(len(wcnf.soft)):
                clause, weight = wcnf.soft[idx], int(wcnf.wght[idx])
                if weight <= 0:
                    raise ValueError(f"Invalid soft clause weight: {weight}. Must be >= 1.")
                if len(clause) == 1:
                    relax.extend([-clause[0]] * weight)
                    continue
                top += 1
                oracle.add_clause(list(clause) + [top])
                relax.extend([top] * weight)
            bound = None
            if self.time_limit is not None:
                self._start_timer_thread(oracle)
            try:
                while True:
                    answer = self._call(oracle)
                    if answer is None:
                        status = Status.BOUNDED if best is not None else Status.TIMEOUT
                        break
                    if not answer:
                        status = Status.OPTIMUM if best is not None else Status.UNSATISFIABLE
                        break
                    model = tuple(oracle.get_model())
                    cost = cost_of(wcnf, model)
                    logger.debug(f"Model of cost {cost:d}")
                    if best_cost is None or cost < best_cost:
                        best, best_cost = model, cost
                    if best_cost == 0:
                        status = Status.OPTIMUM
                        break
                    if bound is None:
                        bound = ITotalizer(lits=relax, ubound=best_cost, top_id=top)
                        for clause in bound.cnf.clauses:
                            oracle.add_clause(clause)
                    oracle.add_clause([-bound.rhs[best_cost - 1]])
            finally:
                self._stop_timer_thread()
                if bound is not None:
                    bound.delete()
        if best is not None:
            broken = violated_hard(wcnf, best)
            if broken:
                raise AssertionError(f"Model violates {len(broken):d} hard clauses.")
        elapsed = (time.perf_counter() - start) * 1000
        logger.debug(f"MaxSAT {status.value} with cost {best_cost} in {elapsed:.1f} ms")
        return Outcome(status, best, best_cost, elapsed)


def solve(f, time_limit=None, conflict_limit=None, seed=0, engine=DEFAULT_ENGINE):
    """Shortcut for ``MaxSATSolver(...).solve(f)``."""
    return MaxSATSolver(engine, seed, time_limit, conflict_limit).solve(f)


def top_weight(wcnf):
    return 1 + int(sum(wcnf.wght))


def export_wcnf(f):
    """Classic DIMACS WCNF text of a task, hard clauses first.

    Returns:
        bytes
    """
    top = top_weight(f)
    lines = [f"p wcnf {f.nv} {len(f.hard) + len(f.soft)} {top}"]
    lines += [" ".join(str(x) for x in [top, *c, 0]) for c in f.hard]
    lines += [" ".join(str(x) for x in [int(w), *c, 0]) for c, w in zip(f.soft, f.wght)]
    return ("\n".join(lines) + "\n").encode("ascii")


def import_wcnf(data):
    """Parse DIMACS WCNF (classic or the ``h``-prefixed new format)."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    try:
        return WCNF(from_string=text)
    except (ValueError, IndexError) as e:
        raise exceptions.SolverOutputError(f"Malformed WCNF: {e}") from None


def import_model(data):
    """Read the assignment of solver output ``v`` lines.

    Both the signed-literal form (``v 1 -2``) and the bitstring form of
    recent MaxSAT Evaluations (``v 10``) are understood.

    Returns:
        tuple of signed literals
    """
    text = data.decode("ascii", errors="replace") if isinstance(data, bytes) else data
    tokens = []
    for line in text.splitlines():
        if line.startswith("v "):
            tokens.extend(line[2:].split())
    if len(tokens) == 1 and tokens[0] and set(tokens[0]) <= {"0", "1"}:
        return tuple(i + 1 if bit == "1" else -(i + 1) for i, bit in enumerate(tokens[0]))
    try:
        lits = [int(tok) for tok in tokens]
    except ValueError:
        raise exceptions.SolverOutputError(f"Malformed model line: {' '.join(tokens)}") from None
    return tuple(lit for lit in lits if lit != 0)


_STATUS_LINES = {
    "OPTIMUM FOUND": Status.OPTIMUM,
    "SATISFIABLE": Status.BOUNDED,
    "UNSATISFIABLE": Status.UNSATISFIABLE,
    "UNKNOWN": Status.TIMEOUT,
}


def parse_solver_output(data):
    """Status, reported cost and model of a MaxSAT Evaluation style output."""
    text = data.decode("ascii", errors="replace") if isinstance(data, bytes) else data
    status, cost = None, None
    for line in text.splitlines():
        if line.startswith("s "):
            key = line[2:].strip().upper()
            if key not in _STATUS_LINES:
                raise exceptions.SolverOutputError(f"Unknown status line: '{line}'.")
            status = _STATUS_LINES[key]
        elif line.startswith("o "):
            try:
                cost = int(line[2:].split()[0])
            except (ValueError, IndexError):
                raise exceptions.SolverOutputError(f"Malformed cost line: '{line}'.") from None
    model = import_model(text)
    return status, cost, model or None


class ExternalSolver:
    """Adapter running a MaxSAT solver binary.

    Args:
        cmd_template (str): command line with a ``{wcnf}`` placeholder for
            the task file, e.g. ``"open-wbo {wcnf}"``
        timeout (float): seconds after which the process is killed
    """

    def __init__(self, cmd_template, timeout=None):
        self.cmd_template = cmd_template
        self.timeout = timeout
        if "{wcnf}" not in self.cmd_template:
            raise ValueError(
                f"Invalid command template: {self.cmd_template}. Must contain '{{wcnf}}'."
            )

    def solve(self, wcnf):
        start = time.perf_counter()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "task.wcnf")
            with open(path, "wb") as file:
                file.write(export_wcnf(wcnf))
            cmd = shlex.split(self.cmd_template.format(wcnf=shlex.quote(path)))
            logger.debug(f"Running {cmd}")
            try:
                proc = subprocess.run(cmd, capture_output=True, timeout=self.timeout)
                output, timed_out = proc.stdout, False
            except subprocess.TimeoutExpired as e:
                output, timed_out = e.stdout or b"", True
            except OSError as e:
                raise exceptions.SolverOutputError(f"Cannot run '{cmd[0]}': {e}") from None
        status, reported, model = parse_solver_output(output)
        elapsed = (time.perf_counter() - start) * 1000
        if status is None:
            if not timed_out:
                raise exceptions.SolverOutputError("Solver output holds no status line.")
            status = Status.TIMEOUT
        if status in (Status.UNSATISFIABLE, Status.TIMEOUT) and model is None:
            return Outcome(status, time_ms=elapsed)
        if model is None:
            raise exceptions.SolverOutputError(f"Status '{status.value}' without a model.")
        broken = violated_hard(wcnf, model)
        if broken:
            raise exceptions.SolverOutputError(
                f"External model violates {len(broken):d} hard clauses."
            )
        cost = cost_of(wcnf, model)
        if reported is not None and reported != cost:
            logger.warning(f"Solver reported cost {reported:d}, recomputed {cost:d}")
        if status is Status.TIMEOUT or timed_out:
            status = Status.BOUNDED
        return Outcome(status, model, cost, elapsed)
