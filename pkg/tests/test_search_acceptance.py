import pytest

from latent_geometry_search.geometry.product_manifold import Signature
from latent_geometry_search.search.bo_engine import run_many
from latent_geometry_search.search.models import traces_to_frame
from latent_geometry_search.search.objectives import TableObjective
from latent_geometry_search.search.reporting import summarize_traces, trace_curves
from latent_geometry_search.search.search_space import build_graph, enumerate_signatures
from latent_geometry_search.search.synthetic_bench import generate_objective
from latent_geometry_search.utils.config import SearchSettings

TRUTHS = [
    "E,E,E,E,E,E,E,E,E,E,E,E,E",
    "H,H,H,H,H,H,H,H,H,H,H,H,H",
    "E,E,E,E,E,E,H,H,H,H,S,S,S",
    "E,E,H,H,H,H,H,S,S,S,S,S,S",
]
BUDGET = 60


@pytest.fixture(scope="module")
def slice_runs(gh_table):
    nodes = enumerate_signatures(13, fixed_size=13)
    graph = build_graph(nodes, gh_table)
    settings = SearchSettings(methods=["gh-bo", "naive-bo", "unweighted-bo", "random"], budget=BUDGET, seeds=list(range(10)))
    frames = []
    for truth in TRUTHS:
        objective = TableObjective(generate_objective(Signature.parse(truth), nodes, seed=0))
        frames.append(traces_to_frame(run_many(graph, objective, settings, stop_value=None, workers=1)))
    return frames


def _mean_curves(frame):
    return trace_curves(frame, BUDGET).pivot(index="iteration", columns="method", values="mean_best")


@pytest.mark.slow
def test_gh_bo_reaches_optimum_faster_than_random(slice_runs):
    faster = 0
    for frame in slice_runs:
        summary = summarize_traces(frame, optimum=0.0).set_index("method")
        if summary.loc["gh-bo", "median_queries_to_optimum"] < summary.loc["random", "median_queries_to_optimum"]:
            faster += 1
    assert faster >= 3


@pytest.mark.slow
def test_gh_bo_curve_against_naive_bo(slice_runs):
    ends_below, smaller_area = 0, 0
    for frame in slice_runs:
        curves = _mean_curves(frame)
        assert len(curves) == BUDGET
        gh, naive = curves["gh-bo"], curves["naive-bo"]
        # both share the seeded initial design
        assert (gh.iloc[:3] == naive.iloc[:3]).all()
        assert gh.is_monotonic_decreasing and naive.is_monotonic_decreasing
        if gh.iloc[-1] <= naive.iloc[-1] + 1e-12:
            ends_below += 1
        if gh.sum() <= naive.sum() + 1e-12:
            smaller_area += 1
    assert ends_below >= 3
    assert smaller_area >= 3


@pytest.mark.slow
def test_gh_weights_help_over_unweighted_graph(slice_runs):
    smaller_area = 0
    for frame in slice_runs:
        curves = _mean_curves(frame)
        assert curves["unweighted-bo"].is_monotonic_decreasing
        if curves["gh-bo"].sum() <= curves["unweighted-bo"].sum() + 1e-12:
            smaller_area += 1
    assert smaller_area >= 2
