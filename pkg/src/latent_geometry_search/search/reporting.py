import logging
from typing import Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# keeps log-scale curves finite once the optimum 0 is found
LOG_OFFSET = 1e-3


def _extend_to_budget(frame: pd.DataFrame, budget: int) -> pd.DataFrame:
    """Carries each run's final best-so-far forward to `budget` iterations."""
    pieces = []
    for (method, seed), run in frame.groupby(["method", "seed"], sort=False):
        best = run.set_index("iteration")["best_so_far"].reindex(range(budget)).ffill()
        pieces.append(pd.DataFrame({"method": method, "seed": seed, "iteration": range(budget), "best_so_far": best.to_numpy()}))
    return pd.concat(pieces, ignore_index=True)


def summarize_traces(frame: pd.DataFrame, optimum: Optional[float] = None) -> pd.DataFrame:
    """
    Per method: number of runs, median number of queries until each run reached its
    own final best, mean final best and, when the optimum is known, the median
    number of queries to reach it (inf for runs that never do) and the hit rate.
    """
    rows = []
    for method, runs in frame.groupby("method", sort=False):
        to_best, to_optimum, finals = [], [], []
        for _, run in runs.groupby("seed", sort=False):
            best = run.sort_values("iteration")["best_so_far"].to_numpy()
            finals.append(best[-1])
            to_best.append(int(np.argmax(best <= best[-1])) + 1)
            if optimum is not None:
                hits = np.flatnonzero(best <= optimum)
                to_optimum.append(int(hits[0]) + 1 if hits.size else np.inf)
        row = {
            "method": method,
            "runs": len(finals),
            "median_queries_to_best": float(np.median(to_best)),
            "mean_final_best": float(np.mean(finals)),
        }
        if optimum is not None:
            row["median_queries_to_optimum"] = float(np.median(to_optimum))
            row["optimum_hit_rate"] = float(np.mean(np.isfinite(to_optimum)))
        rows.append(row)
    return pd.DataFrame(rows)


def trace_curves(frame: pd.DataFrame, budget: Optional[int] = None) -> pd.DataFrame:
    """
    Mean and standard deviation of best-so-far over seeds, per method and iteration,
    with log10(mean + 1e-3) for log-scale plots.
    """
    budget = budget or int(frame["iteration"].max()) + 1
    extended = _extend_to_budget(frame, budget)
    curves = (
        extended.groupby(["method", "iteration"], sort=False)["best_so_far"]
        .agg(mean_best="mean", std_best="std")
        .reset_index()
    )
    curves["std_best"] = curves["std_best"].fillna(0.0)
    curves["log10_mean_best"] = np.log10(curves["mean_best"] + LOG_OFFSET)
    return curves
