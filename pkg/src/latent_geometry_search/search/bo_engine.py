"""
Bayesian optimization over the nodes of a GraphSpace.

The surrogate is a Gaussian process whose covariance is the diffusion kernel
s^2 U exp(-beta Lambda) U^T of the graph Laplacian L = U Lambda U^T. Observations
are standardized before fitting; beta and s^2 are refit by grid marginal
likelihood; the next query maximizes expected improvement among unobserved nodes.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh
from scipy.special import erfc

from ..geometry.product_manifold import Signature
from ..utils.config import SearchSettings
from ..utils.errors import ConvergenceError, FactorizationError, PreconditionError
from ..utils.logging_setup import clear_log_context, set_log_context
from ..utils.parallel import parallel_map
from ..utils.rng import SplitMix64
from .models import RunTrace
from .search_space import GraphSpace, GraphVariant, laplacian

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
EI_STD_FLOOR = 1e-12
TIE_TOL = 1e-12


class SearchMethod(str, Enum):
    GH_BO = "gh-bo"
    NAIVE_BO = "naive-bo"
    UNWEIGHTED_BO = "unweighted-bo"
    RANDOM = "random"

    @property
    def variant(self) -> Optional[GraphVariant]:
        return {
            SearchMethod.GH_BO: GraphVariant.GH_WEIGHTED,
            SearchMethod.NAIVE_BO: GraphVariant.COMPLETE_UNWEIGHTED,
            SearchMethod.UNWEIGHTED_BO: GraphVariant.UNWEIGHTED_PRUNED,
        }.get(self)


def eig_sym(m) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix: (U, Lambda) with Lambda ascending."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise PreconditionError(f"Expected a square matrix, got shape {m.shape}")
    asymmetry = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asymmetry > SYMMETRY_TOL:
        raise PreconditionError(f"Matrix is not symmetric (max |m - m^T| = {asymmetry:.3e})")
    try:
        eigenvalues, eigenvectors = eigh(m)
    except LinAlgError as e:
        raise ConvergenceError(f"Symmetric eigensolver did not converge: {e}") from e
    return eigenvectors, eigenvalues


@dataclass(frozen=True, eq=False)
class Eigensystem:
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    @staticmethod
    def of_graph(g: GraphSpace) -> "Eigensystem":
        U, lam = eig_sym(laplacian(g))
        # round-off can leave the zero eigenvalue slightly negative
        return Eigensystem(eigenvectors=U, eigenvalues=np.maximum(lam, 0.0))


@dataclass(frozen=True, eq=False)
class DiffusionKernel:
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    beta: float
    signal_scale: float = 1.0

    @staticmethod
    def from_eigensystem(eig: Eigensystem, beta: float, signal_scale: float = 1.0) -> "DiffusionKernel":
        return DiffusionKernel(eig.eigenvectors, eig.eigenvalues, beta, signal_scale)


def kernel_matrix(k: DiffusionKernel, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Rows x cols block of s^2 U diag(exp(-beta Lambda)) U^T."""
    U = k.eigenvectors
    decay = np.exp(-k.beta * k.eigenvalues)
    return k.signal_scale * (U[list(rows)] * decay) @ U[list(cols)].T


@dataclass
class GpState:
    indices: List[int] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    noise_variance: float = 1e-6

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise PreconditionError("Observed node indices must be unique")
        if len(self.indices) != len(self.values):
            raise PreconditionError("Every observed index needs exactly one value")

    def add(self, index: int, value: float):
        if index in self.indices:
            raise PreconditionError(f"Node {index} is already observed")
        self.indices.append(index)
        self.values.append(float(value))

    @property
    def standardization(self) -> Tuple[float, float]:
        y = np.asarray(self.values, dtype=np.float64)
        mean = float(y.mean())
        std = float(y.std())
        if len(np.unique(y)) < 2 or not std > 0:
            std = 1.0
        return mean, std

    def standardized(self) -> np.ndarray:
        mean, std = self.standardization
        return (np.asarray(self.values, dtype=np.float64) - mean) / std


def _factorize(matrix: np.ndarray):
    try:
        return cho_factor(matrix, lower=True)
    except LinAlgError:
        pass
    jitter = 1e-8 * max(float(np.mean(np.diag(matrix))), 1.0)
    try:
        logger.debug(f"Cholesky failed; retrying with extra jitter {jitter:.1e}")
        return cho_factor(matrix + jitter * np.eye(matrix.shape[0]), lower=True)
    except LinAlgError as e:
        raise FactorizationError(f"GP covariance is not positive definite even with jitter: {e}") from e


def log_marginal_likelihood(eig: Eigensystem, state: GpState, beta: float) -> Tuple[float, float]:
    """
    Gaussian log marginal likelihood of the standardized observations with s^2 at its
    closed-form maximizer s^2 = y^T (K_beta + noise I)^-1 y / t. Returns (lml, s^2);
    lml is -inf when y is identically zero.
    """
    y = state.standardized()
    t = len(y)
    K = kernel_matrix(DiffusionKernel.from_eigensystem(eig, beta), state.indices, state.indices)
    factor = _factorize(K + state.noise_variance * np.eye(t))
    quad = float(y @ cho_solve(factor, y))
    signal_scale = quad / t
    if not signal_scale > 0:
        return -math.inf, 0.0
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    lml = -0.5 * t - 0.5 * t * math.log(signal_scale) - 0.5 * log_det - 0.5 * t * math.log(2.0 * math.pi)
    return lml, signal_scale


def beta_grid(settings: SearchSettings) -> np.ndarray:
    return np.geomspace(settings.beta_min, settings.beta_max, settings.beta_count)


def fit_hyperparameters(eig: Eigensystem, state: GpState, grid: Sequence[float]) -> DiffusionKernel:
    """
    Grid search over beta; ties (including the all-constant case) go to the smaller beta.
    """
    if len(state.indices) < 2:
        raise PreconditionError("Fitting the kernel needs at least two observations")
    best_beta, best_lml, best_scale = float(grid[0]), -math.inf, 0.0
    for beta in sorted(float(b) for b in grid):
        lml, scale = log_marginal_likelihood(eig, state, beta)
        if lml > best_lml:
            best_beta, best_lml, best_scale = beta, lml, scale
    if best_lml == -math.inf:
        best_beta = float(min(grid))
        best_scale = 1.0
    logger.debug(f"Fitted beta={best_beta:.4g}, s2={best_scale:.4g} (lml {best_lml:.4f})")
    return DiffusionKernel.from_eigensystem(eig, best_beta, best_scale)


def _posterior_standardized(k: DiffusionKernel, state: GpState, query: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    y = state.standardized()
    K = kernel_matrix(k, state.indices, state.indices) + state.noise_variance * np.eye(len(y))
    factor = _factorize(K)
    cross = kernel_matrix(k, query, state.indices)
    mean = cross @ cho_solve(factor, y)
    prior = k.signal_scale * np.einsum("ij,j,ij->i", k.eigenvectors[list(query)], np.exp(-k.beta * k.eigenvalues), k.eigenvectors[list(query)])
    variance = prior - np.einsum("ij,ji->i", cross, cho_solve(factor, cross.T))
    return mean, np.sqrt(np.maximum(variance, 0.0))


def gp_posterior(k: DiffusionKernel, state: GpState, query: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation at the query nodes, on the original scale."""
    if not state.indices:
        raise PreconditionError("The posterior needs at least one observation")
    mean, std = _posterior_standardized(k, state, query)
    shift, scale = state.standardization
    return shift + scale * mean, scale * std


def _standard_normal_cdf(z):
    return 0.5 * erfc(-z / math.sqrt(2.0))


def _standard_normal_pdf(z):
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def expected_improvement(mean, std, f_best: float) -> np.ndarray:
    """EI for minimization: sigma * (G Phi(G) + phi(G)), G = (f_best - mu) / sigma."""
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    if np.any(std < 0):
        raise PreconditionError("Standard deviations must be non-negative")
    ei = np.zeros_like(mean)
    usable = std >= EI_STD_FLOOR
    gamma = (f_best - mean[usable]) / std[usable]
    ei[usable] = std[usable] * (gamma * _standard_normal_cdf(gamma) + _standard_normal_pdf(gamma))
    return np.maximum(ei, 0.0)


def graph_for_method(g: GraphSpace, method: SearchMethod) -> GraphSpace:
    variant = SearchMethod(method).variant
    if variant is None or g.variant is variant:
        return g
    return g.with_variant(variant)


def _random_search(g: GraphSpace, objective, budget: int, rng: SplitMix64, trace: RunTrace, stop_value):
    for index in rng.sample(range(g.size), budget):
        row = trace.record(index, str(g.nodes[index]), float(objective(g.nodes[index])))
        logger.debug(f"Query {row.iteration}: {row.signature} -> {row.objective:.6g}")
        if stop_value is not None and row.objective <= stop_value:
            trace.stopped_early = True
            return


def _bo_search(g: GraphSpace, objective, settings: SearchSettings, rng: SplitMix64, trace: RunTrace, stop_value):
    eig = Eigensystem.of_graph(g)
    grid = beta_grid(settings)
    state = GpState(noise_variance=settings.noise_variance)

    def query(index: int) -> bool:
        row = trace.record(index, str(g.nodes[index]), float(objective(g.nodes[index])))
        state.add(index, row.objective)
        logger.debug(f"Query {row.iteration}: {row.signature} -> {row.objective:.6g} (best {row.best_so_far:.6g})")
        if stop_value is not None and row.objective <= stop_value:
            trace.stopped_early = True
            return True
        return False

    for index in rng.sample(range(g.size), settings.n_init):
        if query(index):
            return

    kernel = None
    while len(trace.rows) < settings.budget:
        if len(state.indices) < 2:
            kernel = DiffusionKernel.from_eigensystem(eig, float(min(grid)))
        elif kernel is None or not settings.freeze_beta:
            kernel = fit_hyperparameters(eig, state, grid)

        observed = set(state.indices)
        candidates = [i for i in range(g.size) if i not in observed]
        mean, std = _posterior_standardized(kernel, state, candidates)
        f_best = float(np.min(state.standardized()))
        ei = expected_improvement(mean, std, f_best)
        top = np.flatnonzero(ei >= ei.max() - TIE_TOL)
        choice = top[rng.randbelow(len(top))] if len(top) > 1 else top[0]
        if query(candidates[int(choice)]):
            return


def run_search(
    g: GraphSpace,
    objective: Callable[[Signature], float],
    method: SearchMethod,
    budget: int,
    seed: int,
    n_init: int = 3,
    settings: Optional[SearchSettings] = None,
    stop_value: Optional[float] = None,
) -> RunTrace:
    """
    One search run of `budget` queries. Random search samples nodes uniformly without
    replacement; the BO methods start from n_init seeded-uniform nodes and then query
    the unobserved node of largest expected improvement (uniform tie-break within
    1e-12). gh-bo runs on the GH-weighted graph, unweighted-bo on the pruned unweighted
    graph and naive-bo on the complete graph over the same nodes.
    """
    method = SearchMethod(method)
    settings = settings or SearchSettings()
    settings = replace(settings, budget=budget, n_init=n_init)
    if not 1 <= n_init <= budget:
        raise PreconditionError(f"Need budget >= n_init >= 1, got budget={budget}, n_init={n_init}")
    if budget > g.size:
        raise PreconditionError(f"Budget {budget} exceeds the {g.size} nodes of the search space")

    graph = graph_for_method(g, method)
    rng = SplitMix64(seed)
    trace = RunTrace(method=method.value, seed=seed)
    if method is SearchMethod.RANDOM:
        _random_search(graph, objective, budget, rng, trace, stop_value)
    else:
        _bo_search(graph, objective, settings, rng, trace, stop_value)
    logger.info(f"{trace.run_id}: {len(trace.rows)} queries, best {trace.best:.6g}")
    return trace


def _run_task(task) -> RunTrace:
    g, objective, method, seed, settings, stop_value = task
    set_log_context("search", f"{SearchMethod(method).value}-{seed}")
    try:
        return run_search(g, objective, method, settings.budget, seed, settings.n_init, settings, stop_value)
    finally:
        clear_log_context()


def run_many(
    g: GraphSpace,
    objective: Callable[[Signature], float],
    settings: SearchSettings,
    stop_value: Optional[float] = None,
    workers: Optional[int] = None,
) -> List[RunTrace]:
    """Every (method, seed) run, method-major, each with independent state."""
    tasks = [(g, objective, SearchMethod(m), seed, settings, stop_value) for m in settings.methods for seed in settings.seeds]
    return parallel_map(_run_task, tasks, workers)
