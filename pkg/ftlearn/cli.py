"""Command line interface.

Subcommands: ``learn``, ``check``, ``eval``, ``trace``, ``gen-setcover`` and
``export-wcnf``. Every option can also be given in a TOML file passed with
``--config``: top-level keys are long option names (``max_ops = 3``), the
``[maxsat]`` table holds ``external_cmd``, ``engine`` and ``seed``. Options
given on the command line win over the file. Relative input paths in the
file are resolved against the file's directory.

Exit codes: 0 success, 1 ``check`` evaluated to false, 2 usage error, 3
invalid input, 4 resource limit or timeout (partial output is written).
"""

import argparse
import json
import logging
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from ftlearn import exceptions
from ftlearn.data.pddl import parse_domain, parse_instance, write_domain, write_instance
from ftlearn.data.traces import (
    TRACE_SUFFIX,
    InstanceLocator,
    ScoredSet,
    assign_scores,
    dump_trace,
    load_scores,
    load_trace,
    load_trace_dir,
    parse_plan,
    plan_to_trace,
)
from ftlearn.data.preprocess import preprocess
from ftlearn.logic.ftl import Connector, Quantifier, holds
from ftlearn.logic.grammar import parse_formula
from ftlearn.logic.shapes import ShapeConfig, chain_from_id
from ftlearn.process.bench import evaluate, gen_setcover_instance, write_report
from ftlearn.process.encoder import Encoder, EncoderOptions, UNROLL_MODES
from ftlearn.process.learner import Learner, LearnerParallel, load_formulas, save_formulas
from ftlearn.process.maxsat import DEFAULT_ENGINE, ExternalSolver, MaxSATSolver, export_wcnf

logger = logging.getLogger("ftlearn")

PATH_KEYS = ("domain", "positive", "negative", "instances", "scores", "formulas", "trace",
             "instance", "plan")
LIST_KEYS = ("positive", "negative", "instances")
VARMAP_FILE = "varmap.json"


def _configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logger.setLevel(level)
    for handler in [h for h in logger.handlers if getattr(h, "_ftlearn", False)]:
        logger.removeHandler(handler)
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler._ftlearn = True
    logger.addHandler(stream_handler)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_task_args(parser):
    parser.add_argument("--domain", help="PDDL domain file")
    parser.add_argument(
        "--positive", action="append", help="directory of positive traces or plans (+1)"
    )
    parser.add_argument(
        "--negative", action="append", help="directory of negative traces or plans (-1)"
    )
    parser.add_argument("--scores", help="JSON map from trace id to score")
    parser.add_argument(
        "--instances",
        action="append",
        help="directory searched for problem files (default: the domain's directory)",
    )
    _add_preprocess_args(parser)


def _add_preprocess_args(parser):
    parser.add_argument(
        "--split-arity", default="2", help="split predicates above this arity: 1, 2 or none"
    )
    parser.add_argument(
        "--goal-predicates", default="on", help="add goal predicates: on or off"
    )
    parser.add_argument(
        "--strict-types", action="store_true", help="quantify over exact types only"
    )


def _add_encoder_args(parser):
    parser.add_argument("--ops", help="comma separated connector alphabet, e.g. '&,|,U,F'")
    parser.add_argument(
        "--strict-eq4", action="store_true", help="only universal variables fill atom slots"
    )
    parser.add_argument("--score-decimals", type=int, default=0)
    parser.add_argument("--unroll", default="expanded", choices=UNROLL_MODES)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ftlearn", description="Learn temporal formulas separating PDDL traces."
    )
    parser.add_argument("--config", help="TOML file with option values")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--seed", type=int, default=0, help="MaxSAT solver seed")
    sub = parser.add_subparsers(dest="command")

    learn = sub.add_parser("learn", help="learn formulas from scored traces")
    _add_task_args(learn)
    _add_encoder_args(learn)
    learn.add_argument("--max-ops", type=int, help="maximal number of connectors")
    learn.add_argument("--max-quantifiers", type=int, help="maximal number of quantifiers")
    learn.add_argument("--workers", type=int, default=1)
    learn.add_argument("--timeout-per-config", type=float)
    learn.add_argument("--timeout", type=float, help="global time limit in seconds")
    learn.add_argument("--min-score", type=float)
    learn.add_argument("--first-perfect", action="store_true")
    learn.add_argument("--engine", default=DEFAULT_ENGINE, help="python-sat solver name")
    learn.add_argument("--external-cmd", help="external MaxSAT command with {wcnf}")
    learn.add_argument("--out", default="formulas.json")
    learn.set_defaults(handler=_learn)

    check = sub.add_parser("check", help="evaluate a formula on one trace")
    check.add_argument("--domain")
    check.add_argument("--trace", help=f"{TRACE_SUFFIX} document or plan file")
    check.add_argument("--instance", help="problem file (required for plans)")
    check.add_argument("--formula")
    _add_preprocess_args(check)
    check.set_defaults(handler=_check)

    evaluation = sub.add_parser("eval", help="evaluate learned formulas on a test set")
    _add_task_args(evaluation)
    evaluation.add_argument("--formulas", help="formulas.json written by learn")
    evaluation.add_argument("--train-instances", type=int)
    evaluation.add_argument("--out", default="report.csv")
    evaluation.set_defaults(handler=_eval)

    trace = sub.add_parser("trace", help="replay a plan into a trace document")
    trace.add_argument("--domain")
    trace.add_argument("--instance")
    trace.add_argument("--plan")
    trace.add_argument("--score", type=float, default=1.0)
    trace.add_argument("--name")
    trace.add_argument("--out")
    trace.set_defaults(handler=_trace)

    setcover = sub.add_parser("gen-setcover", help="write a set cover learning task")
    setcover.add_argument("--universe", type=int)
    setcover.add_argument("--sets", help="sets separated by ';', elements by ','")
    setcover.add_argument("--k", type=int)
    setcover.add_argument("--out")
    setcover.set_defaults(handler=_gen_setcover)

    wcnf = sub.add_parser("export-wcnf", help="write the encoding of one configuration")
    _add_task_args(wcnf)
    _add_encoder_args(wcnf)
    wcnf.add_argument("--chain", help="chain id such as '((P,P),P)'")
    wcnf.add_argument("--prefix", help="comma separated quantifiers, e.g. forall,exists")
    wcnf.add_argument("--types", help="comma separated types")
    wcnf.add_argument("--out", default="task.wcnf")
    wcnf.set_defaults(handler=_export_wcnf)
    return parser


def _load_config(path):
    try:
        with open(path, "rb") as file:
            doc = tomllib.load(file)
    except tomllib.TOMLDecodeError as e:
        raise exceptions.UsageError(f"Invalid config file {path}: {e}") from None
    values = {k: v for k, v in doc.items() if k != "maxsat"}
    values.update(doc.get("maxsat", {}))
    values = {k.replace("-", "_"): v for k, v in values.items()}
    base = os.path.dirname(os.path.abspath(path))
    for key in PATH_KEYS:
        if key not in values:
            continue
        if key in LIST_KEYS and isinstance(values[key], str):
            values[key] = [values[key]]
        if isinstance(values[key], list):
            values[key] = [os.path.join(base, p) for p in values[key]]
        else:
            values[key] = os.path.join(base, values[key])
    return values


def _apply_config(parser, argv, values):
    """Install config values as defaults of the subcommand parsers."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    known = {a.dest for a in parser._actions}
    for subparser in sub.choices.values():
        known |= {a.dest for a in subparser._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        raise exceptions.UsageError(f"Unknown config keys: {unknown}.")
    parser.set_defaults(**{k: v for k, v in values.items() if k in ("verbose", "seed")})
    for subparser in sub.choices.values():
        dests = {a.dest for a in subparser._actions}
        subparser.set_defaults(**{k: v for k, v in values.items() if k in dests})
    for key in values:
        if f"--{key.replace('_', '-')}" in argv:
            logger.info(f"Command line overrides config value of '{key}'")


def _normalize(args):
    if hasattr(args, "split_arity"):
        args.split_arity = str(args.split_arity).lower()
        if args.split_arity not in ("1", "2", "none"):
            raise exceptions.UsageError(
                f"Invalid split arity: {args.split_arity}. Must be one of 1, 2, none."
            )
    if hasattr(args, "goal_predicates"):
        value = args.goal_predicates
        if isinstance(value, bool):
            value = "on" if value else "off"
        args.goal_predicates = str(value).lower()
        if args.goal_predicates not in ("on", "off"):
            raise exceptions.UsageError(
                f"Invalid goal predicates switch: {value}. Must be on or off."
            )
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, [], "")]
    if missing:
        flags = ", ".join(f"--{n.replace('_', '-')}" for n in missing)
        raise exceptions.UsageError(f"'{args.command}' needs {flags}.")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _read(path):
    with open(path, "r", encoding="utf-8") as file:
        return file.read()


def _read_domain(path):
    domain = parse_domain(_read(path))
    logger.info(f"Parsed {domain}")
    return domain


def _preprocess(args, domain, ts):
    split = None if args.split_arity == "none" else int(args.split_arity)
    return preprocess(domain, ts, split, args.goal_predicates == "on")


def _load_task(args):
    domain = _read_domain(args.domain)
    roots = args.instances or [os.path.dirname(os.path.abspath(args.domain))]
    locator = InstanceLocator(domain, roots)
    traces = []
    for directory in args.positive or []:
        traces += load_trace_dir(directory, domain, locator, score=1.0)
    for directory in args.negative or []:
        traces += load_trace_dir(directory, domain, locator, score=-1.0)
    ts = ScoredSet(tuple(traces))
    if args.scores:
        ts = assign_scores(ts, load_scores(args.scores))
    logger.info(f"Loaded {ts}")
    return _preprocess(args, domain, ts)


def _encoder_options(args):
    kwargs = dict(
        strict_types=args.strict_types,
        strict_eq4=args.strict_eq4,
        score_decimals=args.score_decimals,
        unroll=args.unroll,
    )
    if args.ops:
        ops = args.ops if isinstance(args.ops, list) else args.ops.split(",")
        try:
            kwargs["ops"] = tuple(Connector.from_symbol(o.strip()) for o in ops if o.strip())
        except ValueError as e:
            raise exceptions.UsageError(str(e)) from None
    return EncoderOptions(**kwargs)


def _split_list(value):
    return [v.strip() for v in (value if isinstance(value, list) else value.split(",")) if v]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _learn(args):
    _require(args, "domain", "max_ops", "max_quantifiers", "out")
    if not args.positive and not args.negative:
        raise exceptions.UsageError("'learn' needs --positive and --negative trace directories.")
    domain, ts = _load_task(args)
    if args.external_cmd:
        solver = ExternalSolver(args.external_cmd, timeout=args.timeout_per_config)
    else:
        solver = MaxSATSolver(args.engine, args.seed, args.timeout_per_config)
    kwargs = dict(
        options=_encoder_options(args),
        solver=solver,
        timeout_per_config=args.timeout_per_config,
        timeout=args.timeout,
        min_score=args.min_score,
        first_perfect=args.first_perfect,
        verbose=args.verbose > 0,
    )
    if args.workers > 1:
        learner = LearnerParallel(
            domain, ts, args.max_ops, args.max_quantifiers, n_procs=args.workers, **kwargs
        )
    else:
        learner = Learner(domain, ts, args.max_ops, args.max_quantifiers, **kwargs)
    formulas = learner.execute()
    save_formulas(args.out, formulas)
    print(
        f"{len(formulas)} formulas from {learner.attempted} configurations "
        f"written to {args.out}"
    )
    if not learner.complete or learner.skipped or learner.timed_out:
        logger.warning(
            f"Search incomplete: {len(learner.configs) - learner.attempted} configurations "
            f"not attempted, {learner.skipped} skipped at the environment cap, "
            f"{learner.timed_out} stopped at the time limit"
        )
        return 4
    return 0


def _check(args):
    _require(args, "domain", "trace", "formula")
    domain = _read_domain(args.domain)
    if args.trace.endswith(TRACE_SUFFIX):
        doc = json.loads(_read(args.trace))
        if args.instance:
            instance = parse_instance(_read(args.instance), domain)
        else:
            roots = [os.path.dirname(os.path.abspath(p)) for p in (args.trace, args.domain)]
            instance = InstanceLocator(domain, roots).get(str(doc.get("instance", "")))
        trace = load_trace(doc, domain, instance)
    else:
        _require(args, "instance")
        instance = parse_instance(_read(args.instance), domain)
        trace = plan_to_trace(instance, parse_plan(_read(args.trace)), domain)
    domain, ts = _preprocess(args, domain, ScoredSet((trace,)))
    formula = parse_formula(args.formula, domain)
    result = holds(ts.traces[0], formula, args.strict_types)
    print("true" if result else "false")
    return 0 if result else 1


def _eval(args):
    _require(args, "domain", "formulas", "out")
    if not args.positive and not args.negative:
        raise exceptions.UsageError("'eval' needs --positive or --negative trace directories.")
    domain, ts = _load_task(args)
    formulas = load_formulas(args.formulas)
    report = evaluate(formulas, ts, domain, args.strict_types, verbose=args.verbose > 0)
    if args.train_instances is not None:
        report["n_instances"] = args.train_instances
    write_report(report, args.out)
    print(report.to_markdown(index=False))
    return 0


def _trace(args):
    _require(args, "domain", "instance", "plan", "out")
    domain = _read_domain(args.domain)
    instance = parse_instance(_read(args.instance), domain)
    trace = plan_to_trace(
        instance, parse_plan(_read(args.plan)), domain, name=args.name, score=args.score
    )
    with open(args.out, "w", encoding="utf-8") as file:
        json.dump(dump_trace(trace), file, indent=2)
    print(f"{len(trace)} states written to {args.out}")
    return 0


def parse_sets(text):
    """``"1,2;2"`` -> ``[[1, 2], [2]]``."""
    try:
        return [[int(e) for e in part.split(",") if e.strip()] for part in text.split(";")]
    except ValueError:
        raise exceptions.UsageError(f"Invalid set list: '{text}'.") from None


def _gen_setcover(args):
    _require(args, "universe", "sets", "k", "out")
    subsets = parse_sets(args.sets)
    domain, ts, r, q, threshold = gen_setcover_instance(args.universe, subsets, args.k)
    for sub in ("instances", "positive", "negative"):
        os.makedirs(os.path.join(args.out, sub), exist_ok=True)
    with open(os.path.join(args.out, "domain.pddl"), "w", encoding="utf-8") as file:
        file.write(write_domain(domain))
    for instance in ts.instances:
        path = os.path.join(args.out, "instances", f"{instance.name}.pddl")
        with open(path, "w", encoding="utf-8") as file:
            file.write(write_instance(instance))
    for trace in ts:
        sub = "positive" if trace.positive else "negative"
        path = os.path.join(args.out, sub, trace.name + TRACE_SUFFIX)
        with open(path, "w", encoding="utf-8") as file:
            json.dump(dump_trace(trace), file, indent=2)
    task = [
        'domain = "domain.pddl"',
        'positive = ["positive"]',
        'negative = ["negative"]',
        'split_arity = "none"',
        'goal_predicates = "off"',
        f"max_ops = {r}",
        f"max_quantifiers = {q}",
        f"min_score = {threshold}",
    ]
    with open(os.path.join(args.out, "task.toml"), "w", encoding="utf-8") as file:
        file.write("\n".join(task) + "\n")
    print(
        f"Set cover task written to {args.out}: r={r}, q={q}, threshold={threshold}. "
        f"Run: ftlearn --config {os.path.join(args.out, 'task.toml')} learn"
    )
    return 0


def _export_wcnf(args):
    _require(args, "domain", "chain", "prefix", "types", "out")
    domain, ts = _load_task(args)
    try:
        cfg = ShapeConfig(
            chain_from_id(args.chain),
            tuple(Quantifier(p.lower()) for p in _split_list(args.prefix)),
            tuple(t.lower() for t in _split_list(args.types)),
        )
    except ValueError as e:
        raise exceptions.UsageError(str(e)) from None
    wcnf, vm = Encoder(cfg, domain, ts, _encoder_options(args)).encode()
    with open(args.out, "wb") as file:
        file.write(export_wcnf(wcnf))
    varmap = os.path.join(os.path.dirname(os.path.abspath(args.out)), VARMAP_FILE)
    with open(varmap, "w", encoding="utf-8") as file:
        json.dump(vm.to_json(), file)
    print(f"{wcnf.nv} variables, {len(wcnf.hard) + len(wcnf.soft)} clauses written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def run(argv=None):
    """Run the command line interface and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        _configure_logging(pre.verbose)
        if pre.config:
            _apply_config(parser, argv, _load_config(pre.config))
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        if args.command is None:
            parser.print_help()
            return 2
        return args.handler(_normalize(args))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except exceptions.FTLearnError as e:
        logger.error(f"error: {e}")
        return exceptions.exit_code_for(e)
    except ValueError as e:
        logger.error(f"error: {e}")
        return 2
    except OSError as e:
        logger.error(f"error: {e}")
        return 3


def main():
    sys.exit(run())
