import numpy as np
import pytest

from gyronet import ball
from gyronet.errors import DegenerateMidpoint, DimensionMismatch, NumericalError

import oracles

DIMS = (2, 16, 50)


def sample_points(rng, n, dim, max_norm=0.9, c=1.0):
    """Uniform directions with radii bounded away from the boundary."""
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = max_norm * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / dim)
    return g * r / np.sqrt(c)


# ---------------------------------------------------------------------------
# frozen values (computed once with the mpmath transcriptions in oracles.py)


def test_mobius_add_collinear_value():
    out = ball.mobius_add(np.array([0.3, 0.0]), np.array([0.4, 0.0]))
    assert np.allclose(out, [0.625, 0.0], atol=1e-15)


def test_mobius_add_general_value():
    out = ball.mobius_add(np.array([0.1, 0.2]), np.array([-0.3, 0.4]))
    assert np.allclose(out, [-0.13483146067415730, 0.58426966292134831], atol=1e-14)


def test_mobius_scalar_doubling_value():
    out = ball.mobius_scalar(2.0, np.array([0.5, 0.0]))
    assert np.allclose(out, [0.8, 0.0], atol=1e-15)


def test_mobius_scalar_half_value():
    out = ball.mobius_scalar(0.5, np.array([0.3, 0.4]))
    assert np.allclose(out, [0.16076951545867362, 0.21435935394489817], atol=1e-14)


def test_distance_from_origin_value():
    d = ball.distance(np.zeros(2), np.array([0.5, 0.0]))
    assert d == pytest.approx(1.0986122886681098, abs=1e-14)


def test_distance_general_value():
    d = ball.distance(np.array([0.1, 0.2]), np.array([-0.3, 0.4]))
    assert d == pytest.approx(1.0154342565303058, abs=1e-14)


def test_exp_map0_value():
    out = ball.exp_map0(np.array([1.0, 0.0]))
    assert np.allclose(out, [0.7615941559557649, 0.0], atol=1e-15)


def test_exp_map_base_value():
    out = ball.exp_map(np.array([0.2, 0.1]), np.array([0.3, -0.2]))
    assert np.allclose(out, [0.48641559117838844, -0.06417491824016707], atol=1e-14)


def test_log_map_base_value():
    out = ball.log_map(np.array([0.2, 0.1]), np.array([-0.1, 0.5]))
    assert np.allclose(out, [-0.36882840485823188, 0.39084801111842482], atol=1e-14)


def test_parallel_transport_value():
    out = ball.parallel_transport_from_origin(np.array([0.5, 0.0]), np.array([1.0, 0.0]))
    assert np.allclose(out, [0.75, 0.0], atol=1e-15)


def test_midpoint_two_point_value():
    m = ball.midpoint(np.array([[0.2, 0.0], [0.6, 0.0]]))
    assert np.allclose(m, [0.42020410288672876, 0.0], atol=1e-14)


def test_midpoint_weighted_value():
    m = ball.midpoint(
        np.array([[0.2, 0.1], [-0.4, 0.3], [0.1, -0.5]]),
        weights=[1.0, 2.0, 0.5],
    )
    assert np.allclose(m, [-0.14026376765151663, 0.10092817674738137], atol=1e-14)


def test_mobius_matvec_value():
    mat = np.array([[0.5, -0.25, 1.0], [0.1, 0.3, -0.2]])
    x = np.array([0.2, -0.1, 0.3])
    out = ball.mobius_matvec(mat, x)
    assert np.allclose(out, [0.41848146837430974, -0.06892635949694513], atol=1e-14)


def test_gyration_value_preserves_norm():
    a, b, x = np.array([0.3, 0.1]), np.array([-0.2, 0.4]), np.array([0.5, -0.1])
    out = ball.gyration(a, b, x)
    assert np.allclose(out, [0.452, -0.236], atol=1e-13)
    assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(x), abs=1e-13)


# ---------------------------------------------------------------------------
# algebraic identities on seeded random points


@pytest.mark.parametrize("dim", DIMS)
def test_left_cancellation(dim):
    rng = np.random.default_rng(7 + dim)
    u = sample_points(rng, 200, dim)
    v = sample_points(rng, 200, dim)
    got = ball.mobius_add(-u, ball.mobius_add(u, v))
    assert np.max(np.abs(got - v)) < 1e-9


@pytest.mark.parametrize("dim", DIMS)
def test_gyroassociativity(dim):
    rng = np.random.default_rng(11 + dim)
    u, v, w = (sample_points(rng, 200, dim) for _ in range(3))
    lhs = ball.mobius_add(u, ball.mobius_add(v, w))
    rhs = ball.mobius_add(ball.mobius_add(u, v), ball.gyration(u, v, w))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.parametrize("dim", DIMS)
def test_gyrocommutativity(dim):
    rng = np.random.default_rng(13 + dim)
    u = sample_points(rng, 200, dim)
    v = sample_points(rng, 200, dim)
    lhs = ball.mobius_add(u, v)
    rhs = ball.gyration(u, v, ball.mobius_add(v, u))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.parametrize("dim", DIMS)
def test_gyration_is_isometry_of_norms(dim):
    rng = np.random.default_rng(17 + dim)
    a, b, x = (sample_points(rng, 200, dim) for _ in range(3))
    out = ball.gyration(a, b, x)
    assert np.max(np.abs(np.linalg.norm(out, axis=1) - np.linalg.norm(x, axis=1))) < 1e-9


def test_gyration_collinear_is_identity():
    rng = np.random.default_rng(19)
    a = sample_points(rng, 50, 5, max_norm=0.5)
    x = sample_points(rng, 50, 5)
    got = ball.gyration(a, 0.7 * a, x)
    assert np.max(np.abs(got - x)) < 1e-9


@pytest.mark.parametrize("dim", DIMS)
def test_scalar_distributive(dim):
    rng = np.random.default_rng(23 + dim)
    u = sample_points(rng, 200, dim)
    r1, r2 = 0.7, -1.3
    lhs = ball.mobius_scalar(r1 + r2, u)
    rhs = ball.mobius_add(ball.mobius_scalar(r1, u), ball.mobius_scalar(r2, u))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.parametrize("dim", DIMS)
def test_scalar_associative(dim):
    rng = np.random.default_rng(29 + dim)
    u = sample_points(rng, 200, dim)
    lhs = ball.mobius_scalar(0.6 * 1.7, u)
    rhs = ball.mobius_scalar(0.6, ball.mobius_scalar(1.7, u))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_scalar_matches_repeated_addition():
    rng = np.random.default_rng(31)
    u = sample_points(rng, 100, 3, max_norm=0.5)
    three = ball.mobius_add(u, ball.mobius_add(u, u))
    assert np.max(np.abs(ball.mobius_scalar(3.0, u) - three)) < 1e-9


@pytest.mark.parametrize("dim", DIMS)
def test_distance_symmetry_and_triangle(dim):
    rng = np.random.default_rng(37 + dim)
    u, v, w = (sample_points(rng, 200, dim) for _ in range(3))
    duv = ball.distance(u, v)
    assert np.max(np.abs(duv - ball.distance(v, u))) < 1e-9
    assert np.all(duv <= ball.distance(u, w) + ball.distance(w, v) + 1e-9)
    assert ball.distance(u[0], u[0]) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("dim", DIMS)
def test_exp_log_roundtrip(dim):
    rng = np.random.default_rng(41 + dim)
    u = sample_points(rng, 200, dim, max_norm=0.7)
    x = sample_points(rng, 200, dim, max_norm=0.7)
    assert np.max(np.abs(ball.exp_map(u, ball.log_map(u, x)) - x)) < 1e-9
    # tangent norms capped at 1 so exp stays clear of the projection margin
    v = rng.standard_normal((200, dim))
    v *= rng.uniform(0.05, 1.0, size=(200, 1)) / np.linalg.norm(v, axis=1, keepdims=True)
    assert np.max(np.abs(ball.log_map(u, ball.exp_map(u, v)) - v)) < 1e-9


def test_exp_log_at_origin_match_dedicated_forms():
    rng = np.random.default_rng(43)
    x = sample_points(rng, 100, 4)
    v = rng.standard_normal((100, 4))
    assert np.max(np.abs(ball.log_map(np.zeros(4), x) - ball.log_map0(x))) < 1e-12
    assert np.max(np.abs(ball.exp_map(np.zeros(4), v) - ball.exp_map0(v))) < 1e-12


def test_exp_map_zero_tangent_and_log_map_same_point():
    u = np.array([0.3, -0.2, 0.1])
    assert np.allclose(ball.exp_map(u, np.zeros(3)), u)
    assert np.allclose(ball.log_map(u, u), np.zeros(3), atol=1e-12)


def test_distance_via_log_map_norm():
    rng = np.random.default_rng(47)
    u = sample_points(rng, 100, 6)
    x = sample_points(rng, 100, 6)
    lam = ball.conformal_factor(u)
    tangent_norm = np.linalg.norm(ball.log_map(u, x), axis=1)
    assert np.max(np.abs(lam * tangent_norm - ball.distance(u, x))) < 1e-9


# ---------------------------------------------------------------------------
# midpoint


def test_midpoint_single_point_identity():
    rng = np.random.default_rng(53)
    x = sample_points(rng, 1, 5, max_norm=0.95)
    m = ball.midpoint(x, weights=[1.0])
    assert np.max(np.abs(m - x[0])) < 1e-12
    # the identity is specific to weight 1; other weights move the point
    assert np.max(np.abs(ball.midpoint(x, weights=[2.7]) - x[0])) > 1e-3


def test_midpoint_symmetric_pair_is_origin():
    x = np.array([0.4, 0.3])
    m = ball.midpoint(np.stack([x, -x]))
    assert np.allclose(m, 0.0, atol=1e-15)


def test_midpoint_two_points_is_geodesic_midpoint():
    rng = np.random.default_rng(59)
    for _ in range(20):
        a, b = sample_points(rng, 2, 3)
        m = ball.midpoint(np.stack([a, b]))
        half = ball.mobius_scalar(0.5, ball.mobius_add(-a, b))
        assert np.max(np.abs(m - ball.mobius_add(a, half))) < 1e-10
        assert ball.distance(a, m) == pytest.approx(ball.distance(m, b), abs=1e-10)


def test_midpoint_two_points_minimizes_frechet_variance():
    a, b = np.array([0.2, 0.3]), np.array([-0.4, 0.1])
    m = ball.midpoint(np.stack([a, b]))
    frechet = oracles.frechet_two_point(a, b, (1.0, 1.0), 1.0)
    assert np.max(np.abs(m - frechet)) < 1e-7


def test_midpoint_on_geodesic_distances_add():
    rng = np.random.default_rng(61)
    a, b = sample_points(rng, 2, 7)
    m = ball.midpoint(np.stack([a, b]))
    total = ball.distance(a, m) + ball.distance(m, b)
    assert total == pytest.approx(ball.distance(a, b), abs=1e-9)


def test_midpoint_gyration_covariance():
    rng = np.random.default_rng(67)
    pts = sample_points(rng, 5, 4)
    w = rng.uniform(0.5, 2.0, size=5)
    a, b = sample_points(rng, 2, 4)
    lhs = ball.midpoint(ball.gyration(a, b, pts), weights=w)
    rhs = ball.gyration(a, b, ball.midpoint(pts, weights=w))
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_midpoint_left_translation_covariance():
    rng = np.random.default_rng(101)
    for trial in range(10):
        pts = sample_points(rng, 6, 4)
        a = sample_points(rng, 1, 4)[0]
        lhs = ball.midpoint(ball.mobius_add(a, pts))
        rhs = ball.mobius_add(a, ball.midpoint(pts))
        assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_midpoint_weight_scale_invariance():
    rng = np.random.default_rng(71)
    pts = sample_points(rng, 4, 3)
    w = rng.uniform(0.5, 2.0, size=4)
    assert np.max(np.abs(ball.midpoint(pts, w) - ball.midpoint(pts, 3.0 * w))) > 0.0
    # not scale invariant by design: the -1 in the denominator sees raw weights


def test_midpoint_degenerate_denominator_raises():
    x = np.array([[0.5, 0.0]])
    # gamma^2 = 4/3, so weight 3/8 makes the denominator exactly zero
    with pytest.raises(DegenerateMidpoint):
        ball.midpoint(x, weights=[0.375])


# ---------------------------------------------------------------------------
# matvec / pointwise


def test_mobius_matvec_rotation_is_exact_rotation():
    theta = 0.7
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    x = np.array([0.3, 0.4])
    assert np.allclose(ball.mobius_matvec(rot, x), rot @ x, atol=1e-12)


def test_mobius_matvec_association():
    rng = np.random.default_rng(73)
    m1 = rng.standard_normal((3, 4))
    m2 = rng.standard_normal((4, 5))
    x = sample_points(rng, 6, 5)
    lhs = ball.mobius_matvec(m1, ball.mobius_matvec(m2, x))
    rhs = ball.mobius_matvec(m1 @ m2, x)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_mobius_matvec_scalar_matrix_matches_scalar_product():
    rng = np.random.default_rng(79)
    x = sample_points(rng, 10, 4)
    got = ball.mobius_matvec(1.8 * np.eye(4), x)
    assert np.max(np.abs(got - ball.mobius_scalar(1.8, x))) < 1e-12


def test_mobius_matvec_zero_cases():
    mat = np.zeros((2, 3))
    assert np.allclose(ball.mobius_matvec(mat, np.array([0.1, 0.2, 0.3])), np.zeros(2))
    assert np.allclose(ball.mobius_matvec(np.ones((2, 3)), np.zeros(3)), np.zeros(2))


def test_mobius_pointwise_identity():
    rng = np.random.default_rng(83)
    x = sample_points(rng, 20, 5)
    assert np.max(np.abs(ball.mobius_pointwise(lambda t: t, x) - x)) < 1e-12


# ---------------------------------------------------------------------------
# curvature handling, projection, errors


def test_c_zero_is_euclidean():
    rng = np.random.default_rng(89)
    u = rng.standard_normal((10, 3))
    v = rng.standard_normal((10, 3))
    assert np.allclose(ball.mobius_add(u, v, c=0.0), u + v)
    assert np.allclose(ball.mobius_scalar(1.5, u, c=0.0), 1.5 * u)
    assert np.allclose(ball.distance(u, v, c=0.0), np.linalg.norm(u - v, axis=1))
    assert np.allclose(ball.exp_map(u, v, c=0.0), u + v)
    assert np.allclose(ball.log_map(u, v, c=0.0), v - u)
    assert np.allclose(ball.gyration(u, v, u, c=0.0), u)
    assert np.allclose(ball.parallel_transport_from_origin(u, v, c=0.0), v)
    assert np.allclose(ball.midpoint(u[:4], c=0.0), np.mean(u[:4], axis=0))


def test_general_curvature_rescaling():
    # d_c(u, v) = d_1(sqrt(c) u, sqrt(c) v) / sqrt(c)
    c = 2.5
    u, v = np.array([0.2, 0.1]), np.array([-0.3, 0.2])
    lhs = ball.distance(u, v, c=c)
    rhs = ball.distance(np.sqrt(c) * u, np.sqrt(c) * v, c=1.0) / np.sqrt(c)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_small_curvature_limit():
    # At tiny positive c the gyro operations approach their flat-space
    # counterparts; the geodesic distance approaches TWICE the Euclidean
    # distance because the conformal factor at the origin is 2.  (The exact
    # c = 0 branch of distance() is the plain Euclidean metric instead, so
    # the parametrization is intentionally discontinuous there.)
    rng = np.random.default_rng(97)
    c = 1e-10
    u = rng.standard_normal((50, 4))
    v = rng.standard_normal((50, 4))
    u *= rng.uniform(0.05, 0.5, (50, 1)) / np.linalg.norm(u, axis=1, keepdims=True)
    v *= rng.uniform(0.05, 0.5, (50, 1)) / np.linalg.norm(v, axis=1, keepdims=True)
    assert np.max(np.abs(ball.mobius_add(u, v, c=c) - (u + v))) < 1e-6
    assert np.max(np.abs(ball.mobius_scalar(1.7, u, c=c) - 1.7 * u)) < 1e-6
    d = ball.distance(u, v, c=c)
    assert np.max(np.abs(d - 2.0 * np.linalg.norm(u - v, axis=1))) < 1e-6
    assert np.max(np.abs(ball.exp_map0(v, c=c) - v)) < 1e-6
    assert np.max(np.abs(ball.log_map0(u, c=c) - u)) < 1e-6


def test_project_to_ball():
    inside = np.array([0.3, 0.4])
    assert ball.project_to_ball(inside) is inside
    out = ball.project_to_ball(np.array([3.0, 4.0]))
    assert np.linalg.norm(out) == pytest.approx(1.0 - ball.EPS_BALL, abs=1e-12)
    far = np.array([[3.0, 4.0]])
    assert np.linalg.norm(ball.project_to_ball(far, c=4.0)) == pytest.approx(
        (1.0 - ball.EPS_BALL) / 2.0, abs=1e-12
    )


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatch):
        ball.mobius_add(np.zeros(2), np.zeros(3))
    with pytest.raises(DimensionMismatch):
        ball.mobius_matvec(np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        ball.midpoint(np.zeros((2, 2)), weights=[1.0])


def test_invalid_curvature_raises():
    with pytest.raises(NumericalError):
        ball.mobius_add(np.zeros(2), np.zeros(2), c=-1.0)


def test_factor_outside_ball_raises():
    with pytest.raises(NumericalError):
        ball.conformal_factor(np.array([1.0, 1.0]))
    assert ball.conformal_factor(np.zeros(3)) == pytest.approx(2.0)
    assert ball.lorentz_factor(np.array([0.6, 0.0])) == pytest.approx(1.25)
