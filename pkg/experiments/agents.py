#!/usr/bin/env python
# coding: utf-8

import ftlearn as ftl
import logging
import os
import warnings
from datetime import datetime

from ftlearn.data.traces import InstanceLocator, ScoredSet, load_trace_dir
from ftlearn.process.bench import write_report

logger = logging.getLogger("ftlearn")
logger.setLevel(logging.INFO)
stream_handler = logging.StreamHandler()
logger.addHandler(stream_handler)

warnings.filterwarnings("ignore")

output_dir = f"results/{datetime.now().strftime('%H%M%S')}"

# benchmark layouts: agents, whether a test split exists, preprocessing
benchmarks = {
    "childsnack": {
        "path": ftl.CHILDSNACK_PATH,
        "agents": ["gs", "ngf", "ngl"],
        "test_split": True,
        "split_arity": 2,
        "ops": None,
    },
    "spanner": {
        "path": ftl.SPANNER_PATH,
        "agents": ["all", "sme", "sgl"],
        "test_split": False,
        "split_arity": 1,
        "ops": ("X", "F", "G", "Y", "O", "H"),
    },
}


class AgentExperiment:
    def __init__(self, benchmark, agent, max_ops, max_quantifiers, n_train, output_dir):
        """
        Learn formulas separating one agent's traces from the other agents'.

        Args:
            benchmark (str): The benchmark name, a key of ``benchmarks``.
            agent (str): The agent whose traces are scored +1.
            max_ops (int): The connector budget.
            max_quantifiers (int): The quantifier budget.
            n_train (int): Number of training instances per agent (None for all).
            output_dir (str): The output path to save the results.
        """
        self.params = benchmarks[benchmark]
        self.benchmark = benchmark
        self.agent = agent
        self.max_ops = max_ops
        self.max_quantifiers = max_quantifiers
        self.n_train = n_train
        self.output_dir = output_dir
        self.domain = ftl.parse_domain(self._read(os.path.join(self.params["path"], "domain.pddl")))
        self.locator = InstanceLocator(self.domain, self.params["path"])

    @staticmethod
    def _read(path):
        with open(path, "r", encoding="utf-8") as file:
            return file.read()

    def _load(self, split):
        traces = []
        for agent in self.params["agents"]:
            score = 1.0 if agent == self.agent else -1.0
            directory = os.path.join(self.params["path"], agent, split)
            loaded = load_trace_dir(directory, self.domain, self.locator, score=score)
            if split == "train" and self.n_train is not None:
                loaded = loaded[: self.n_train]
            traces += loaded
        return ScoredSet(tuple(traces))

    def run(self):
        train = self._load("train")
        test = self._load("test") if self.params["test_split"] else train
        domain, train = ftl.preprocess(self.domain, train, self.params["split_arity"])
        _, test = ftl.preprocess(self.domain, test, self.params["split_arity"])

        options = ftl.EncoderOptions()
        if self.params["ops"] is not None:
            options = ftl.EncoderOptions(ops=self.params["ops"])
        learner = ftl.LearnerParallel(
            domain,
            train,
            self.max_ops,
            self.max_quantifiers,
            options,
            n_procs=os.cpu_count(),
            verbose=True,
        )
        formulas = learner.execute()
        report = ftl.evaluate(formulas, test, domain)

        os.makedirs(self.output_dir, exist_ok=True)
        csv_path = os.path.join(
            self.output_dir,
            f"{self.benchmark}_{self.agent}_r{self.max_ops}_q{self.max_quantifiers}.csv",
        )
        write_report(report, csv_path)
        logger.info(
            f"{self.benchmark}/{self.agent}: {len(formulas)} formulas from "
            f"{learner.attempted} of {len(learner.configs)} configurations"
        )
        if not report.empty:
            logger.info(report.head(5).to_markdown(index=False))


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Learn formulas for one planning agent.")
    parser.add_argument(
        "--benchmark", type=str, default="childsnack", choices=sorted(benchmarks)
    )
    parser.add_argument("--agent", type=str, default="gs", help="The positive agent")
    parser.add_argument("--max_ops", type=int, default=2, help="The connector budget")
    parser.add_argument(
        "--max_quantifiers", type=int, default=2, help="The quantifier budget"
    )
    parser.add_argument(
        "--n_train", type=int, default=None, help="Training instances per agent"
    )
    parser.add_argument(
        "--output_dir", type=str, default=output_dir, help="The output directory"
    )
    args = parser.parse_args()

    if args.agent not in benchmarks[args.benchmark]["agents"]:
        parser.error(f"Unknown agent '{args.agent}' for {args.benchmark}")

    experiment = AgentExperiment(
        args.benchmark,
        args.agent,
        args.max_ops,
        args.max_quantifiers,
        args.n_train,
        args.output_dir,
    )
    experiment.run()
