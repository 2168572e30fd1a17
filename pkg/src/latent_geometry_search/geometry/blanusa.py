"""
Blanuša's isometric embedding of the hyperbolic plane into E^6.

The map consumes points in the (R^2, g_-1) chart, where the metric is
dx^2 + e^{2x} dy^2. Its constants (the normalizing integral A, the derivative
bounds G1, G2, the frequency c and eps) depend only on the bump function chi and
are computed once by compute_constants.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicHermiteSpline

from ..utils.errors import ConvergenceError, MissingConstantsError, PreconditionError
from ..utils.rng import SplitMix64

logger = logging.getLogger(__name__)

INTEGER_TOL = 1e-12
REFINEMENT_TOL = 1e-5
DERIVATIVE_SPAN = 2.0
JACOBIAN_STEP = 1e-5
# frequency behind the published GH table; 2 max(G1, G2) itself evaluates to about 11.165
PUBLISHED_FREQUENCY = 10.255014502464228


def chi(t):
    """sin(pi t) * exp(-1 / sin^2(pi t)), extended by 0 at the integers."""
    t = np.asarray(t, dtype=np.float64)
    s = np.sin(np.pi * t)
    at_integer = np.abs(t - np.round(t)) < INTEGER_TOL
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        values = s * np.exp(-1.0 / (s * s))
    values = np.where(at_integer, 0.0, values)
    return values if values.ndim else float(values)


def _simpson_integral(n: int) -> float:
    grid = np.linspace(0.0, 1.0, n + 1)
    return float(simpson(chi(grid), x=grid))


@dataclass(frozen=True)
class BlanusaEmbedding:
    A: float
    G1: float
    G2: float
    c: float
    eps: float
    quadrature_res: int
    grid_step: float
    # interpolant of t -> int_0^t chi on [0, 1]
    antiderivative_spline: CubicHermiteSpline = field(repr=False, compare=False)

    def antiderivative(self, x):
        """
        int_0^x chi(t) dt for any real x. chi is odd with period 2 and symmetric about 1/2,
        so the integral is even with period 2 and only the [0, 1] table is needed.
        """
        x = np.abs(np.asarray(x, dtype=np.float64))
        reduced = np.mod(x, 2.0)
        reduced = np.where(reduced > 1.0, 2.0 - reduced, reduced)
        return self.antiderivative_spline(reduced)

    def psi1(self, x):
        return np.sqrt(np.maximum(self.antiderivative(1.0 + np.asarray(x, dtype=np.float64)), 0.0) / self.A)

    def psi2(self, x):
        return np.sqrt(np.maximum(self.antiderivative(x), 0.0) / self.A)

    def as_dict(self) -> dict:
        return {
            "A": self.A,
            "G1": self.G1,
            "G2": self.G2,
            "c": self.c,
            "eps": self.eps,
            "quadrature_res": self.quadrature_res,
            "grid_step": self.grid_step,
        }


def _max_central_difference(values: np.ndarray, step: float) -> float:
    return float(np.max(np.abs(values[2:] - values[:-2])) / (2.0 * step))


def compute_constants(
        quadrature_res: int = 20000, grid_step: float = 1e-5, frequency: Optional[float] = None,
) -> BlanusaEmbedding:
    """
    Computes A by composite Simpson quadrature (checked against a run at twice the
    resolution), tabulates the antiderivative of chi, and takes G1, G2 as the largest
    central finite difference of sinh(x) * psi_i(x) over [-2, 2].

    c defaults to 2 max(G1, G2). An explicit frequency replaces it (for instance
    PUBLISHED_FREQUENCY); it must keep eps = (G1^2 + G2^2) / c^2 below 1.
    """
    if quadrature_res < 1000:
        raise PreconditionError(f"quadrature_res must be >= 1000, got {quadrature_res}")
    if not 0 < grid_step <= 1e-4:
        raise PreconditionError(f"grid_step must lie in (0, 1e-4], got {grid_step}")
    if frequency is not None and not frequency > 0:
        raise PreconditionError(f"frequency must be positive, got {frequency}")

    A = _simpson_integral(quadrature_res)
    refined = _simpson_integral(2 * quadrature_res)
    change = abs(refined - A) / abs(refined)
    if not A > 0 or change > REFINEMENT_TOL:
        raise ConvergenceError(f"Quadrature for A did not converge: {A} vs {refined} at double resolution")
    logger.debug(f"A = {A:.10f} (relative change on refinement {change:.2e})")

    grid = np.linspace(0.0, 1.0, quadrature_res + 1)
    integrand = chi(grid)
    table = cumulative_simpson(integrand, x=grid, initial=0.0)
    table *= A / table[-1]
    spline = CubicHermiteSpline(grid, table, integrand)

    partial = BlanusaEmbedding(
        A=A, G1=0.0, G2=0.0, c=1.0, eps=0.0,
        quadrature_res=quadrature_res, grid_step=grid_step, antiderivative_spline=spline,
    )
    count = int(round(2 * DERIVATIVE_SPAN / grid_step))
    xs = np.linspace(-DERIVATIVE_SPAN, DERIVATIVE_SPAN, count + 1)
    step = xs[1] - xs[0]
    G1 = _max_central_difference(np.sinh(xs) * partial.psi1(xs), step)
    G2 = _max_central_difference(np.sinh(xs) * partial.psi2(xs), step)

    c = 2.0 * max(G1, G2)
    if frequency is not None:
        if frequency < c:
            logger.warning(f"Frequency {frequency} is below 2 max(G1, G2) = {c:.6f}")
        c = float(frequency)
    eps = (G1 * G1 + G2 * G2) / (c * c)
    if not eps < 1.0:
        raise PreconditionError(f"Frequency {c} gives eps = {eps:.6f}, the map needs eps < 1")
    logger.info(f"Embedding constants: A={A:.6f}, G1={G1:.6f}, G2={G2:.6f}, c={c:.6f}, eps={eps:.6f}")
    return BlanusaEmbedding(
        A=A, G1=G1, G2=G2, c=c, eps=eps,
        quadrature_res=quadrature_res, grid_step=grid_step, antiderivative_spline=spline,
    )


def h(emb: BlanusaEmbedding, u, v) -> np.ndarray:
    """sinh(u)/c * (psi1(u) cos(cv), psi1(u) sin(cv), psi2(u) cos(cv), psi2(u) sin(cv)), stacked on the last axis."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    scale = np.sinh(u) / emb.c
    p1 = emb.psi1(u)
    p2 = emb.psi2(u)
    cos_v = np.cos(emb.c * v)
    sin_v = np.sin(emb.c * v)
    return np.stack([scale * p1 * cos_v, scale * p1 * sin_v, scale * p2 * cos_v, scale * p2 * sin_v], axis=-1)


def psi(x, y):
    """(asinh(y e^x), log sqrt(e^{-2x} + y^2)), as two arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.arcsinh(y * np.exp(x)), 0.5 * np.log(np.exp(-2.0 * x) + y * y)


def blanusa_map(emb: Optional[BlanusaEmbedding], p) -> np.ndarray:
    """
    Maps points of (R^2, g_-1) (last axis of length 2) into E^6. eps is the constant
    of the embedding, so the integral in the first coordinate is sqrt(1 - eps^2) * asinh(y e^x).
    """
    if emb is None:
        raise MissingConstantsError("Embedding constants have not been computed")
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != 2:
        raise PreconditionError(f"Expected points with 2 coordinates, got shape {p.shape}")
    s, l = psi(p[..., 0], p[..., 1])
    first = np.sqrt(1.0 - emb.eps * emb.eps) * s
    return np.concatenate([first[..., None], l[..., None], h(emb, s, l)], axis=-1)


@dataclass
class PullbackReport:
    samples: int
    max_relative_deviation: float
    min_eigenvalue: float
    positive_definite: bool
    worst_point: tuple

    def lines(self):
        return [
            f"samples: {self.samples}",
            f"pullback positive definite: {self.positive_definite} (min eigenvalue {self.min_eigenvalue:.6e})",
            f"max relative deviation from dx^2 + e^(2x) dy^2: {self.max_relative_deviation:.6e} at {self.worst_point}",
            "note: eps enters the first coordinate as a constant, so the deviation is a measurement, not a pass/fail bound",
        ]


def _sample_disk(samples: int, radius: float, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    r = radius * np.sqrt(rng.uniform_array(samples, 0.0, 1.0))
    t = rng.uniform_array(samples, 0.0, 2.0 * np.pi)
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def pullback_report(emb: BlanusaEmbedding, samples: int = 100, seed: int = 0, radius: float = 1.0) -> PullbackReport:
    """
    Isometry diagnostic: numeric Jacobian J of blanusa_map by central differences,
    pullback metric J^T J compared with diag(1, e^{2x}) in relative Frobenius norm.
    """
    if samples < 1:
        raise PreconditionError(f"samples must be >= 1, got {samples}")
    points = _sample_disk(samples, radius, seed)
    columns = []
    for k in range(2):
        delta = np.zeros(2)
        delta[k] = JACOBIAN_STEP
        columns.append((blanusa_map(emb, points + delta) - blanusa_map(emb, points - delta)) / (2.0 * JACOBIAN_STEP))
    jacobian = np.stack(columns, axis=-1)
    pullback = np.einsum("nik,nil->nkl", jacobian, jacobian)

    target = np.zeros_like(pullback)
    target[:, 0, 0] = 1.0
    target[:, 1, 1] = np.exp(2.0 * points[:, 0])
    deviation = np.linalg.norm(pullback - target, axis=(1, 2)) / np.linalg.norm(target, axis=(1, 2))
    eigenvalues = np.linalg.eigvalsh(pullback)

    worst = int(np.argmax(deviation))
    report = PullbackReport(
        samples=samples,
        max_relative_deviation=float(deviation[worst]),
        min_eigenvalue=float(eigenvalues.min()),
        positive_definite=bool(np.all(eigenvalues > 0)),
        worst_point=tuple(float(v) for v in points[worst]),
    )
    logger.info(f"Pullback diagnostic over {samples} points: max deviation {report.max_relative_deviation:.4e}, PD={report.positive_definite}")
    return report
