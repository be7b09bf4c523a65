import json
import logging
import os
import time

from dataclasses import dataclass
from multiprocess import Pool
from typing import Optional, Tuple
from tqdm import tqdm

from ftlearn import exceptions
from ftlearn.logic.ftl import Formula, satisfied_traces, score
from ftlearn.logic.grammar import parse_formula, to_text
from ftlearn.logic.shapes import ShapeConfig, gen_configs
from ftlearn.process.encoder import Encoder, EncoderOptions, decode
from ftlearn.process.maxsat import MaxSATSolver, Status

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a single configuration. ``formula`` is None for FAIL."""

    config: ShapeConfig
    status: Status
    formula: Optional[Formula] = None
    train_score: Optional[float] = None
    cost: Optional[int] = None
    solve_time_ms: float = 0.0

    @property
    def failed(self):
        return self.formula is None


@dataclass(frozen=True)
class LearnedFormula:
    """A formula found by the learner, with the configuration it came from."""

    formula: Formula
    text: str
    train_score: float
    r: int
    q: int
    chain_id: str
    prefix: Tuple[str, ...]
    types: Tuple[str, ...]
    status: str
    solve_time_ms: float
    n_instances: int

    def to_json(self):
        return {
            "formula": self.text,
            "train_score": self.train_score,
            "r": self.r,
            "q": self.q,
            "chain_id": self.chain_id,
            "prefix": list(self.prefix),
            "types": list(self.types),
            "status": self.status,
            "solve_time_ms": round(self.solve_time_ms, 3),
            "n_instances": self.n_instances,
        }

    @classmethod
    def from_json(cls, doc, domain=None):
        formula = parse_formula(doc["formula"], domain)
        return cls(
            formula,
            doc["formula"],
            float(doc["train_score"]),
            int(doc.get("r", formula.size)),
            int(doc.get("q", formula.q)),
            doc.get("chain_id", ""),
            tuple(doc.get("prefix", [q.kind.value for q in formula.quantifiers])),
            tuple(doc.get("types", [q.type for q in formula.quantifiers])),
            doc.get("status", Status.OPTIMUM.value),
            float(doc.get("solve_time_ms", 0.0)),
            int(doc.get("n_instances", 0)),
        )


def _verify(formula, ts, vm, model, cost, strict_types):
    """Check a decoded formula against the model checker."""
    satisfied = satisfied_traces(formula, ts, strict_types)
    if satisfied != vm.trace_values(model):
        raise exceptions.EncodingMismatchError(
            f"Trace satisfaction of '{to_text(formula)}' differs between model and checker."
        )
    implied = vm.positive_total - cost * vm.gcd
    if vm.scaled_score(satisfied) != implied:
        raise exceptions.EncodingMismatchError(
            f"Checker score of '{to_text(formula)}' is {vm.scaled_score(satisfied)}, "
            f"the solver implies {implied} (scaled)."
        )


def find_formula(cfg, domain, ts, options=None, solver=None):
    """Search the best formula of one configuration.

    Args:
        cfg (ShapeConfig): chain, prefix and types
        domain (Domain): preprocessed domain
        ts (ScoredSet): preprocessed traces, with at least one positive and one
            negative trace
        options (EncoderOptions): encoding options
        solver (MaxSATSolver or ExternalSolver): defaults to an embedded solver

    Returns:
        SearchResult
    """
    options = options or EncoderOptions()
    encoder = Encoder(cfg, domain, ts, options)
    if not encoder.feasible():
        return SearchResult(cfg, Status.UNSATISFIABLE)
    wcnf, vm = encoder.encode()
    outcome = (solver or MaxSATSolver()).solve(wcnf)
    if not outcome.has_model:
        return SearchResult(cfg, outcome.status, solve_time_ms=outcome.time_ms)
    formula = decode(outcome.model, vm, cfg)
    _verify(formula, ts, vm, outcome.model, outcome.cost, options.strict_types)
    train = score(formula, ts, options.strict_types)
    logger.debug(f"{cfg}: {to_text(formula)} scores {train:g} ({outcome.status.value})")
    return SearchResult(cfg, outcome.status, formula, train, outcome.cost, outcome.time_ms)


class Learner:
    """Learner of formulas over a scored trace set.

    All connector budgets ``0..max_ops`` and quantifier budgets
    ``1..max_quantifiers`` are searched, each over every chain, prefix and
    type tuple. Formulas are deduplicated on their text and ranked by train
    score, then by budget and text.

    Parameters
    ----------
      domain : Domain
        The preprocessed domain.
      ts : ScoredSet
        Preprocessed training traces. Both the positive and the negative
        partition must be non-empty. They are put in canonical order, so
        the result does not depend on the order of the input.
      max_ops : int
        Maximal number of connectors.
      max_quantifiers : int
        Maximal number of quantifiers.
      options : EncoderOptions
        Encoding options. If :obj:`None`, the defaults are used.
      solver : MaxSATSolver or ExternalSolver
        Solver used for every configuration. If :obj:`None`, an embedded
        solver with ``timeout_per_config`` as time limit is used.
      timeout_per_config : float
        Time limit in seconds of a single solver call.
      timeout : float
        Global time limit in seconds. Formulas found until then are kept.
      min_score : float
        Only formulas with at least this train score are kept.
      first_perfect : bool
        Stop at the first formula satisfying every positive and no
        negative trace.
      verbose : bool
        If True, a progress bar is shown.
    """

    def __init__(
        self,
        domain,
        ts,
        max_ops,
        max_quantifiers,
        options=None,
        solver=None,
        timeout_per_config=None,
        timeout=None,
        min_score=None,
        first_perfect=False,
        verbose=False,
    ):
        self.domain = domain
        self.ts = ts.sorted()
        self.max_ops = max_ops
        self.max_quantifiers = max_quantifiers
        self.options = options or EncoderOptions()
        self.timeout_per_config = timeout_per_config
        self.solver = solver or MaxSATSolver(time_limit=timeout_per_config)
        self.timeout = timeout
        self.min_score = min_score
        self.first_perfect = first_perfect
        self.verbose = verbose
        if self.max_ops < 0:
            raise exceptions.UsageError(f"Invalid connector budget: {max_ops}. Must be >= 0.")
        if self.max_quantifiers < 1:
            raise exceptions.UsageError(
                f"Invalid quantifier budget: {max_quantifiers}. Must be >= 1."
            )
        if not self.ts.positives or not self.ts.negatives:
            raise exceptions.UsageError(
                "Learning needs at least one positive and one negative trace, got "
                f"{len(self.ts.positives)} positive and {len(self.ts.negatives)} negative."
            )
        self.perfect_score = sum(t.score for t in self.ts.positives)
        self.n_instances = len(self.ts.instances)
        self.configs = [
            (r, q, cfg)
            for r in range(self.max_ops + 1)
            for q in range(1, self.max_quantifiers + 1)
            for cfg in gen_configs(self.domain, r, q)
        ]
        self.results = {}
        self.formulas = []
        self.skipped = 0
        self.complete = False
        logger.info(f"Prepared {len(self.configs):d} configurations")

    @property
    def attempted(self):
        return len(self.results)

    @property
    def failed(self):
        return sum(result is None or result.failed for result in self.results.values())

    @property
    def timed_out(self):
        """Configurations whose solver call stopped at its time limit."""
        return sum(
            result is not None and result.status in (Status.TIMEOUT, Status.BOUNDED)
            for result in self.results.values()
        )

    def _search(self, idx):
        _, _, cfg = self.configs[idx]
        try:
            return find_formula(cfg, self.domain, self.ts, self.options, self.solver)
        except exceptions.ResourceLimitError as e:
            logger.warning(f"Skipping {cfg}: {e}")
            return None

    def _is_perfect(self, result):
        return result is not None and not result.failed and (
            result.train_score >= self.perfect_score
        )

    def _deadline(self):
        return None if self.timeout is None else time.monotonic() + self.timeout

    def execute(self):
        """Search all configurations and rank the formulas found."""
        deadline = self._deadline()
        self.complete = True
        for idx in tqdm(
            range(len(self.configs)),
            disable=not self.verbose,
            total=len(self.configs),
            desc="searching configurations",
        ):
            if deadline is not None and time.monotonic() > deadline:
                logger.warning(f"Global timeout after {self.attempted:d} configurations")
                self.complete = False
                break
            self.results[idx] = self._search(idx)
            if self.first_perfect and self._is_perfect(self.results[idx]):
                break
        self._rank()
        return self.formulas

    def _rank(self):
        seen = set()
        formulas = []
        self.skipped = sum(result is None for result in self.results.values())
        for idx in sorted(self.results):
            result = self.results[idx]
            if result is None or result.failed:
                continue
            if self.min_score is not None and result.train_score < self.min_score:
                continue
            text = to_text(result.formula)
            if text in seen:
                continue
            seen.add(text)
            r, q, cfg = self.configs[idx]
            formulas.append(
                LearnedFormula(
                    result.formula,
                    text,
                    result.train_score,
                    r,
                    q,
                    cfg.chain.chain_id,
                    tuple(k.value for k in cfg.prefix),
                    cfg.types,
                    result.status.value,
                    result.solve_time_ms,
                    self.n_instances,
                )
            )
        self.formulas = sorted(formulas, key=lambda f: (-f.train_score, f.r, f.q, f.text))
        logger.info(
            f"Found {len(self.formulas):d} formulas in {self.attempted:d} configurations "
            f"({self.failed:d} without formula)"
        )


class LearnerParallel(Learner):
    """Learner distributing the configurations over worker processes.

    The set and ranking of formulas equals that of :class:`Learner`, except
    when ``first_perfect`` or a global timeout stops the search early.

    Parameters
    ----------
      args: dict
        Learner arguments, see class definition of Learner
      n_procs : int, optional
        The number of worker processes.
    """

    def __init__(self, *args, n_procs=os.cpu_count(), **kwargs):
        super().__init__(*args, **kwargs)
        self.n_procs = n_procs

    def execute(self):
        """Main function to distribute configurations to worker processes."""
        deadline = self._deadline()
        self.complete = True
        with Pool(
            processes=self.n_procs,
            initializer=worker_initializer,
            initargs=(self,),
        ) as pool:
            for idx, result in tqdm(
                pool.imap_unordered(worker_task, range(len(self.configs)), chunksize=1),
                disable=not self.verbose,
                total=len(self.configs),
                desc="searching configurations",
                smoothing=0.1,
            ):
                self.results[idx] = result
                if self.first_perfect and self._is_perfect(result):
                    pool.terminate()
                    break
                if deadline is not None and time.monotonic() > deadline:
                    logger.warning(f"Global timeout after {self.attempted:d} configurations")
                    self.complete = False
                    pool.terminate()
                    break
        self._rank()
        return self.formulas


class _PersistentWorker:
    def __init__(self, learner):
        """Initialize the worker process with its own copy of the learner."""
        self.learner = learner

    def search(self, idx):
        return idx, self.learner._search(idx)


def worker_initializer(learner):
    """Initializer for worker processes: creates a PersistentWorker instance."""
    global worker_instance
    worker_instance = _PersistentWorker(learner)


def worker_task(idx):
    """Function that each worker process will call for each configuration."""
    global worker_instance
    return worker_instance.search(idx)


def learn(d, ts, r, q, opts=None, workers=1, **kwargs):
    """Run the learner and return the ranked list of :class:`LearnedFormula`.

    Args:
        d (Domain): preprocessed domain
        ts (ScoredSet): preprocessed training traces
        r (int): maximal number of connectors
        q (int): maximal number of quantifiers
        opts (EncoderOptions): encoding options
        workers (int): number of worker processes, 1 runs sequentially
        **kwargs: further :class:`Learner` arguments
    """
    if workers > 1:
        learner = LearnerParallel(d, ts, r, q, opts, n_procs=workers, **kwargs)
    else:
        learner = Learner(d, ts, r, q, opts, **kwargs)
    return learner.execute()


def save_formulas(path, formulas):
    """Write ``formulas.json``."""
    with open(path, "w", encoding="utf-8") as file:
        json.dump([f.to_json() for f in formulas], file, indent=2)


def load_formulas(path, domain=None):
    """Read ``formulas.json`` back into :class:`LearnedFormula` objects."""
    with open(path, "r", encoding="utf-8") as file:
        try:
            docs = json.load(file)
        except json.JSONDecodeError as e:
            raise exceptions.FormulaError(f"'{path}' is not valid JSON: {e}") from None
    if not isinstance(docs, list):
        raise exceptions.FormulaError(f"'{path}' does not hold a list of formulas.")
    return [LearnedFormula.from_json(doc, domain) for doc in docs]
