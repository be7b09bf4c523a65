import os

# get default paths for the bundled benchmark domains
package_dir = os.path.dirname(os.path.abspath(__file__))
BENCHMARK_PATH = os.path.join(package_dir, "data", "benchmarks")
CHILDSNACK_PATH = os.path.join(BENCHMARK_PATH, "childsnack")
SPANNER_PATH = os.path.join(BENCHMARK_PATH, "spanner")

# import sub-modules & functions
from ftlearn.data.pddl import Domain, Instance, TypeTree, parse_domain, parse_instance
from ftlearn.data.traces import InstantiatedTrace, ScoredSet, load_trace_dir, plan_to_trace
from ftlearn.data.preprocess import preprocess

from ftlearn.logic.ftl import Formula, holds, satisfied_traces, score
from ftlearn.logic.grammar import parse_formula, to_text
from ftlearn.logic.shapes import ShapeConfig, gen_configs

from ftlearn.process.encoder import Encoder, EncoderOptions, decode, encode
from ftlearn.process.maxsat import ExternalSolver, MaxSATSolver
from ftlearn.process.learner import Learner, LearnerParallel, find_formula, learn
from ftlearn.process.bench import evaluate, gen_setcover_instance
