import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latent_geometry_search.geometry.model_spaces import (
    ModelSpace, SpaceKind, exp0_gminus1, exp_map, geodesic_dist, gminus1_distance, gminus1_to_uhp,
    hyperboloid_to_poincare, lorentz_inner, origin, poincare_to_uhp, to_time_last, uhp_to_gminus1,
)
from latent_geometry_search.utils.errors import DimensionError, DomainError, PreconditionError

E = ModelSpace.default(SpaceKind.EUCLIDEAN)
H = ModelSpace.default(SpaceKind.HYPERBOLOID)
S = ModelSpace.default(SpaceKind.HYPERSPHERE)

coordinate = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
planar = st.tuples(coordinate, coordinate).filter(lambda v: math.hypot(*v) <= 1.0)


def random_point(space, rng, scale=1.0):
    v = rng.uniform(-scale, scale, size=2)
    if space.kind is SpaceKind.EUCLIDEAN:
        return v
    if space.kind is SpaceKind.HYPERBOLOID:
        return exp_map(space, origin(space), np.concatenate([[0.0], v]))
    return exp_map(space, origin(space), np.concatenate([v, [0.0]]))


def test_invalid_curvature_rejected():
    with pytest.raises(ValueError):
        ModelSpace(SpaceKind.HYPERBOLOID, 1.0)
    with pytest.raises(ValueError):
        ModelSpace(SpaceKind.EUCLIDEAN, -1.0)


@pytest.mark.parametrize("x, y, expected", [
    ((1, 0, 0), (1, 0, 0), -1.0),
    ((1, 0, 0), (0, 1, 0), 0.0),
    ((2, 1, 1), (1, 2, 3), 3.0),
])
def test_lorentz_inner(x, y, expected):
    assert lorentz_inner(x, y) == expected


def test_lorentz_inner_length_mismatch():
    with pytest.raises(DimensionError):
        lorentz_inner((1, 0, 0), (1, 0))


def test_exp_map_examples():
    np.testing.assert_array_equal(exp_map(E, (1, 2), (3, 4)), [4, 6])
    np.testing.assert_allclose(exp_map(H, (1, 0, 0), (0, 0.7, 0)), [math.cosh(0.7), math.sinh(0.7), 0], atol=1e-15)
    np.testing.assert_allclose(exp_map(S, (0, 0, 1), (0.5, 0, 0)), [math.sin(0.5), 0, math.cos(0.5)], atol=1e-15)


def test_zero_tangent_returns_base():
    base = exp_map(H, origin(H), (0, 0.3, -0.2))
    np.testing.assert_array_equal(exp_map(H, base, (0, 0, 0)), base)


def test_tangent_off_tangent_space_rejected():
    with pytest.raises(PreconditionError):
        exp_map(H, (1, 0, 0), (0.5, 0.1, 0))
    with pytest.raises(PreconditionError):
        exp_map(S, (0, 0, 1), (0, 0, 0.2))


def test_point_off_manifold_rejected():
    with pytest.raises(PreconditionError):
        geodesic_dist(S, (0, 0, 1.1), (0, 0, 1))
    with pytest.raises(PreconditionError):
        geodesic_dist(H, (-1, 0, 0), (1, 0, 0))


def test_geodesic_dist_examples():
    assert geodesic_dist(E, (0, 0), (3, 4)) == 5.0
    assert geodesic_dist(H, (1, 0, 0), (math.cosh(0.7), math.sinh(0.7), 0)) == pytest.approx(0.7, abs=1e-12)
    assert geodesic_dist(S, (0, 0, 1), (math.sin(0.5), 0, math.cos(0.5))) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(planar, st.sampled_from([SpaceKind.HYPERBOLOID, SpaceKind.HYPERSPHERE, SpaceKind.EUCLIDEAN]))
def test_exp_dist_round_trip(v, kind):
    space = ModelSpace.default(kind)
    rng = np.random.default_rng(abs(hash(v)) % 2**32)
    base = random_point(space, rng)
    # project an ambient vector onto the tangent space at base
    if kind is SpaceKind.EUCLIDEAN:
        tangent = np.array(v)
        expected = math.hypot(*v)
    elif kind is SpaceKind.HYPERBOLOID:
        ambient = np.array([0.0, v[0], v[1]])
        tangent = ambient + lorentz_inner(base, ambient) * base
        expected = math.sqrt(max(lorentz_inner(tangent, tangent), 0.0))
    else:
        ambient = np.array([v[0], v[1], 0.0])
        tangent = ambient - np.dot(base, ambient) * base
        expected = float(np.linalg.norm(tangent))
    moved = exp_map(space, base, tangent)
    assert geodesic_dist(space, base, moved) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("kind", list(SpaceKind))
def test_self_distance_is_exactly_zero(kind, rng):
    space = ModelSpace.default(kind)
    for _ in range(200):
        x = random_point(space, rng, scale=2.0)
        assert geodesic_dist(space, x, x) == 0.0
    assert gminus1_distance((0.3, -1.2), (0.3, -1.2)) == 0.0


def test_small_distances_keep_precision():
    for d in (1e-10, 1e-7, 1e-4):
        assert geodesic_dist(H, (1, 0, 0), (math.cosh(d), math.sinh(d), 0)) == pytest.approx(d, rel=1e-6)
        assert geodesic_dist(S, (0, 0, 1), (math.sin(d), 0, math.cos(d))) == pytest.approx(d, rel=1e-6)
    assert geodesic_dist(S, (0, 0, 1), (0, 0, -1)) == pytest.approx(math.pi, abs=1e-15)


@pytest.mark.parametrize("kind", list(SpaceKind))
def test_metric_on_random_triples(kind, rng):
    space = ModelSpace.default(kind)
    for _ in range(1000):
        x, y, z = (random_point(space, rng) for _ in range(3))
        dxy = geodesic_dist(space, x, y)
        assert dxy == geodesic_dist(space, y, x)
        assert dxy <= geodesic_dist(space, x, z) + geodesic_dist(space, z, y) + 1e-9


def test_hyperboloid_to_poincare():
    np.testing.assert_array_equal(hyperboloid_to_poincare((0, 0, 1)), [0, 0])
    np.testing.assert_allclose(
        hyperboloid_to_poincare((math.sinh(1), 0, math.cosh(1))), [math.sinh(1) / (1 + math.cosh(1)), 0]
    )
    with pytest.raises(DomainError):
        hyperboloid_to_poincare((0, 0, -1))


def test_poincare_output_inside_disk(rng):
    points = np.stack([random_point(H, rng, scale=2.0) for _ in range(100)])
    disk = hyperboloid_to_poincare(to_time_last(points))
    assert np.all(np.linalg.norm(disk, axis=1) < 1)


def test_poincare_to_uhp():
    np.testing.assert_allclose(poincare_to_uhp((0, 0)), [0, 1])
    np.testing.assert_allclose(poincare_to_uhp((0.5, 0)), [0, 3])
    with pytest.raises(DomainError):
        poincare_to_uhp((0.6, 0.8))


def test_uhp_output_upper(rng):
    r = np.sqrt(rng.uniform(0, 0.99, 100))
    t = rng.uniform(0, 2 * np.pi, 100)
    uhp = poincare_to_uhp(np.stack([r * np.cos(t), r * np.sin(t)], axis=1))
    assert np.all(uhp[:, 1] > 0)


def test_uhp_to_gminus1():
    np.testing.assert_array_equal(uhp_to_gminus1((0, 1)), [0, 0])
    np.testing.assert_allclose(uhp_to_gminus1((2, math.e)), [-1, 2])
    with pytest.raises(DomainError):
        uhp_to_gminus1((0, 0))


def test_gminus1_inverse_round_trip(rng):
    p = rng.uniform(-2, 2, size=(50, 2))
    np.testing.assert_allclose(uhp_to_gminus1(gminus1_to_uhp(p)), p, atol=1e-12)


def test_exp0_gminus1_origin():
    result = exp0_gminus1((0, 0))
    np.testing.assert_array_equal(result, [0, 0])
    assert not np.signbit(result).any()


def test_exp0_gminus1_matches_stepwise_chain():
    sheet = np.array([math.sinh(0.5), 0.0, math.cosh(0.5)])
    expected = uhp_to_gminus1(poincare_to_uhp(hyperboloid_to_poincare(sheet)))
    np.testing.assert_allclose(exp0_gminus1((0.5, 0)), expected, atol=1e-12)


def _path_length(points):
    """Length of a polyline under dx^2 + e^{2x} dy^2, midpoint rule."""
    dx = np.diff(points[:, 0])
    dy = np.diff(points[:, 1])
    mid_x = 0.5 * (points[1:, 0] + points[:-1, 0])
    return float(np.sum(np.sqrt(dx * dx + np.exp(2 * mid_x) * dy * dy)))


def test_exp0_gminus1_is_radial_geodesic(rng):
    for _ in range(20):
        r = math.sqrt(rng.uniform(0, 1))
        t = rng.uniform(0, 2 * math.pi)
        v = np.array([r * math.cos(t), r * math.sin(t)])
        path = exp0_gminus1(np.linspace(0, 1, 2001)[:, None] * v)
        assert _path_length(path) == pytest.approx(r, abs=1e-3)
        assert gminus1_distance((0, 0), path[-1]) == pytest.approx(r, abs=1e-7)


def test_transform_chain_preserves_distance(rng):
    for _ in range(50):
        x, y = random_point(H, rng), random_point(H, rng)
        chart = uhp_to_gminus1(poincare_to_uhp(hyperboloid_to_poincare(to_time_last(np.stack([x, y])))))
        assert gminus1_distance(chart[0], chart[1]) == pytest.approx(float(geodesic_dist(H, x, y)), abs=1e-9)
