#!/usr/bin/env python
# coding: utf-8

import ftlearn as ftl
import logging
import numpy as np
import os
import pandas as pd
import time

from ftlearn.process.bench import setcover_has_cover

logger = logging.getLogger("ftlearn")
logger.setLevel(logging.INFO)
stream_handler = logging.StreamHandler()
logger.addHandler(stream_handler)

output_dir = "results/setcover"


def random_subsets(rng, n, m):
    """``m`` non-empty random subsets of ``1..n``."""
    subsets = []
    for _ in range(m):
        mask = rng.random(n) < 0.5
        if not mask.any():
            mask[rng.integers(n)] = True
        subsets.append(sorted(int(e) + 1 for e in np.flatnonzero(mask)))
    return subsets


def run(n, m, k, n_runs, seed):
    """Compare the learner's verdict with an exhaustive cover search."""
    rng = np.random.default_rng(seed)
    rows = []
    for run_idx in range(n_runs):
        subsets = random_subsets(rng, n, m)
        domain, ts, r, q, threshold = ftl.gen_setcover_instance(n, subsets, k)
        start = time.perf_counter()
        learner = ftl.Learner(domain, ts, r, q, min_score=threshold, first_perfect=True)
        found = bool(learner.execute())
        elapsed = time.perf_counter() - start
        expected = setcover_has_cover(n, subsets, k)
        if found != expected:
            logger.error(f"Mismatch on {subsets} (k={k}): learner {found}, exhaustive {expected}")
        rows.append(
            dict(
                run=run_idx,
                n=n,
                m=m,
                k=k,
                subsets=";".join(",".join(map(str, s)) for s in subsets),
                cover=expected,
                learned=found,
                configs=learner.attempted,
                seconds=round(elapsed, 3),
            )
        )
    return pd.DataFrame(rows)


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Check learning against set cover.")
    parser.add_argument("--n", type=int, default=3, help="The universe size")
    parser.add_argument("--m", type=int, default=3, help="The number of sets")
    parser.add_argument("--k", type=int, default=2, help="The cover size")
    parser.add_argument("--n_runs", type=int, default=10, help="Random instances")
    parser.add_argument("--seed", type=int, default=0, help="The random seed")
    parser.add_argument(
        "--output_dir", type=str, default=output_dir, help="The output directory"
    )
    args = parser.parse_args()

    df = run(args.n, args.m, args.k, args.n_runs, args.seed)
    os.makedirs(args.output_dir, exist_ok=True)
    out_path = os.path.join(args.output_dir, f"setcover_n{args.n}_m{args.m}_k{args.k}.csv")
    df.to_csv(out_path, index=False)
    agreement = 100.0 * (df["cover"] == df["learned"]).mean()
    logger.info(f"Agreement {agreement:.1f}% over {len(df)} instances, written to {out_path}")
