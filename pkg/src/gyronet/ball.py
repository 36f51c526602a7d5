"""Mobius gyrovector operations on the Poincare ball.

All functions operate on the last axis of float64 arrays, so a single point
``(n,)`` and a stack of points ``(N, n)`` are both accepted.  The curvature
parameter ``c >= 0`` selects the ball of radius ``1/sqrt(c)``; ``c = 0``
degenerates to plain Euclidean space and every operation falls back to its
Euclidean counterpart.

Outputs that are meant to be ball points are projected back into the open
ball with a relative margin of ``EPS_BALL`` so that downstream ``artanh``
calls stay finite.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateMidpoint, DimensionMismatch, NumericalError

# Projection margin: points are kept at sqrt(c)*||x|| <= 1 - EPS_BALL.
EPS_BALL = 1e-5
# Norms below this count as "exactly zero" for direction-dependent formulas.
EPS_ZERO = 1e-15
# Weighted-midpoint denominators below this magnitude are degenerate.
EPS_DEN = 1e-12

DEFAULT_C = 1.0


def _as_array(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        raise DimensionMismatch("expected at least a 1-D point, got a scalar")
    return a


def _check_curvature(c: float) -> float:
    c = float(c)
    if not np.isfinite(c) or c < 0.0:
        raise NumericalError(f"curvature must be finite and >= 0, got {c}")
    return c


def _check_same_dim(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[-1] != v.shape[-1]:
        raise DimensionMismatch(
            f"operands have incompatible point dimensions {u.shape[-1]} and {v.shape[-1]}"
        )


def _sqnorm(x: np.ndarray) -> np.ndarray:
    return np.sum(x * x, axis=-1, keepdims=True)


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(_sqnorm(x))


def _artanh(x):
    # Clamp against roundoff at the projection margin; valid ball points
    # always satisfy |x| <= 1 - EPS_BALL before this is reached.
    return np.arctanh(np.clip(x, -1.0 + EPS_BALL, 1.0 - EPS_BALL))


def _scalarize(x: np.ndarray, batched: bool):
    return x if batched else float(x)


def project_to_ball(x, c: float = DEFAULT_C, eps: float = EPS_BALL) -> np.ndarray:
    """Rescale ``x`` onto the ball of radius ``(1 - eps)/sqrt(c)`` if it lies outside.

    Points already inside the margin are returned unchanged (not copied).
    With ``c = 0`` there is no boundary and ``x`` is returned as is.
    """
    x = _as_array(x)
    c = _check_curvature(c)
    if c == 0.0:
        return x
    maxnorm = (1.0 - eps) / np.sqrt(c)
    norm = _norm(x)
    if np.all(norm <= maxnorm):
        return x
    scale = np.where(norm > maxnorm, maxnorm / np.maximum(norm, EPS_ZERO), 1.0)
    return x * scale


def conformal_factor(x, c: float = DEFAULT_C):
    """lambda_x = 2 / (1 - c ||x||^2), the metric's conformal factor."""
    x = _as_array(x)
    c = _check_curvature(c)
    den = 1.0 - c * _sqnorm(x)[..., 0]
    if np.any(den <= 0.0):
        raise NumericalError("point lies on or outside the ball boundary")
    return _scalarize(2.0 / den, x.ndim > 1)


def lorentz_factor(x, c: float = DEFAULT_C):
    """gamma_x = 1 / sqrt(1 - c ||x||^2)."""
    x = _as_array(x)
    c = _check_curvature(c)
    den = 1.0 - c * _sqnorm(x)[..., 0]
    if np.any(den <= 0.0):
        raise NumericalError("point lies on or outside the ball boundary")
    return _scalarize(1.0 / np.sqrt(den), x.ndim > 1)


def mobius_add(u, v, c: float = DEFAULT_C) -> np.ndarray:
    """Mobius addition u (+) v.

    Parameters
    ----------
    u, v
        Ball points with matching last dimension; leading axes broadcast.
    c
        Curvature, >= 0.

    Returns
    -------
    ndarray
        ((1 + 2c<u,v> + c||v||^2) u + (1 - c||u||^2) v) /
        (1 + 2c<u,v> + c^2 ||u||^2 ||v||^2), projected into the ball.
        For c = 0 this is plain vector addition.
    """
    u = _as_array(u)
    v = _as_array(v)
    _check_same_dim(u, v)
    c = _check_curvature(c)
    if c == 0.0:
        return u + v
    uv = np.sum(u * v, axis=-1, keepdims=True)
    uu = _sqnorm(u)
    vv = _sqnorm(v)
    num = (1.0 + 2.0 * c * uv + c * vv) * u + (1.0 - c * uu) * v
    den = 1.0 + 2.0 * c * uv + c * c * uu * vv
    return project_to_ball(num / den, c)


def mobius_scalar(r: float, u, c: float = DEFAULT_C) -> np.ndarray:
    """Mobius scalar multiplication r (x) u.

    r (x) u = tanh(r * artanh(sqrt(c) ||u||)) * u / (sqrt(c) ||u||); the
    origin is a fixed point for every r, and r = 0 maps everything to the
    origin.  For c = 0 this is ordinary scalar multiplication.
    """
    u = _as_array(u)
    c = _check_curvature(c)
    r = float(r)
    if c == 0.0:
        return r * u
    sc = np.sqrt(c)
    norm = _norm(u)
    safe = np.maximum(norm, EPS_ZERO)
    factor = np.tanh(r * _artanh(sc * norm)) / (sc * safe)
    out = np.where(norm > EPS_ZERO, factor * u, 0.0)
    return project_to_ball(out, c)


def gyration(a, b, x, c: float = DEFAULT_C) -> np.ndarray:
    """gyr[a, b] x = (-(a (+) b)) (+) (a (+) (b (+) x)).

    The Thomas gyration; an isometry fixing the origin.  Identity when a and
    b are collinear, and for c = 0.
    """
    a = _as_array(a)
    b = _as_array(b)
    x = _as_array(x)
    c = _check_curvature(c)
    if c == 0.0:
        return x
    ab = mobius_add(a, b, c)
    inner = mobius_add(a, mobius_add(b, x, c), c)
    return mobius_add(-ab, inner, c)


def distance(u, v, c: float = DEFAULT_C):
    """Geodesic distance d_c(u, v) = (2/sqrt(c)) artanh(sqrt(c) ||(-u) (+) v||).

    Falls back to the Euclidean distance ||u - v|| for c = 0.
    """
    u = _as_array(u)
    v = _as_array(v)
    _check_same_dim(u, v)
    c = _check_curvature(c)
    batched = max(u.ndim, v.ndim) > 1
    if c == 0.0:
        return _scalarize(_norm(u - v)[..., 0], batched)
    sc = np.sqrt(c)
    diff = mobius_add(-u, v, c)
    d = (2.0 / sc) * _artanh(sc * _norm(diff)[..., 0])
    return _scalarize(d, batched)


def exp_map(u, v, c: float = DEFAULT_C) -> np.ndarray:
    """Exponential map of tangent vector ``v`` at base point ``u``.

    exp_u(v) = u (+) tanh(sqrt(c) lambda_u ||v|| / 2) v / (sqrt(c) ||v||),
    with exp_u(0) = u.  For c = 0 this is u + v.
    """
    u = _as_array(u)
    v = _as_array(v)
    _check_same_dim(u, v)
    c = _check_curvature(c)
    if c == 0.0:
        return u + v
    sc = np.sqrt(c)
    norm = _norm(v)
    safe = np.maximum(norm, EPS_ZERO)
    lam = 2.0 / (1.0 - c * _sqnorm(u))
    factor = np.tanh(sc * lam * norm / 2.0) / (sc * safe)
    step = np.where(norm > EPS_ZERO, factor * v, 0.0)
    return mobius_add(u, step, c)


def exp_map0(v, c: float = DEFAULT_C) -> np.ndarray:
    """Exponential map at the origin: tanh(sqrt(c) ||v||) v / (sqrt(c) ||v||)."""
    v = _as_array(v)
    c = _check_curvature(c)
    if c == 0.0:
        return v
    sc = np.sqrt(c)
    norm = _norm(v)
    safe = np.maximum(norm, EPS_ZERO)
    factor = np.tanh(sc * norm) / (sc * safe)
    return project_to_ball(np.where(norm > EPS_ZERO, factor * v, 0.0), c)


def log_map(u, x, c: float = DEFAULT_C) -> np.ndarray:
    """Logarithm map: the tangent vector at ``u`` pointing to ``x``.

    log_u(x) = (2 / (sqrt(c) lambda_u)) artanh(sqrt(c) ||d||) d / ||d||
    with d = (-u) (+) x; log_u(u) = 0.  For c = 0 this is x - u.
    """
    u = _as_array(u)
    x = _as_array(x)
    _check_same_dim(u, x)
    c = _check_curvature(c)
    if c == 0.0:
        return x - u
    sc = np.sqrt(c)
    d = mobius_add(-u, x, c)
    norm = _norm(d)
    safe = np.maximum(norm, EPS_ZERO)
    lam = 2.0 / (1.0 - c * _sqnorm(u))
    factor = (2.0 / (sc * lam)) * _artanh(sc * norm) / safe
    return np.where(norm > EPS_ZERO, factor * d, 0.0)


def log_map0(x, c: float = DEFAULT_C) -> np.ndarray:
    """Logarithm map at the origin: artanh(sqrt(c) ||x||) x / (sqrt(c) ||x||)."""
    x = _as_array(x)
    c = _check_curvature(c)
    if c == 0.0:
        return x
    sc = np.sqrt(c)
    norm = _norm(x)
    safe = np.maximum(norm, EPS_ZERO)
    factor = _artanh(sc * norm) / (sc * safe)
    return np.where(norm > EPS_ZERO, factor * x, 0.0)


def parallel_transport_from_origin(u, v, c: float = DEFAULT_C) -> np.ndarray:
    """Transport tangent vector ``v`` from the origin to base point ``u``.

    P_{0 -> u}(v) = (lambda_0 / lambda_u) v = (1 - c ||u||^2) v.
    """
    u = _as_array(u)
    v = _as_array(v)
    _check_same_dim(u, v)
    c = _check_curvature(c)
    return (1.0 - c * _sqnorm(u)) * v


def midpoint(points, weights=None, c: float = DEFAULT_C) -> np.ndarray:
    """Weighted gyromidpoint of a stack of ball points.

    Parameters
    ----------
    points
        Array ``(k, n)`` (or a sequence of 1-D points) with k >= 1.
    weights
        Length-k nonnegative weights, not all zero; defaults to all ones.
    c
        Curvature.

    Returns
    -------
    ndarray
        (1/2) (x) [ sum_i 2 w_i gamma_i^2 x_i / sum_i (2 w_i gamma_i^2 - 1) ].
        A single point maps to itself exactly; symmetric points with equal
        weights map to the origin.

    Raises
    ------
    DegenerateMidpoint
        If the scalar denominator has magnitude below ``EPS_DEN``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise DimensionMismatch(f"expected a (k, n) stack of points, got shape {pts.shape}")
    k = pts.shape[0]
    if weights is None:
        w = np.ones(k)
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != k:
            raise DimensionMismatch(f"{k} points but {w.shape[0]} weights")
    if np.any(w < 0.0) or not np.any(w > 0.0):
        raise NumericalError("weights must be nonnegative and not all zero")
    c = _check_curvature(c)
    if c == 0.0:
        gamma2 = np.ones((k, 1))
    else:
        gamma2 = 1.0 / (1.0 - c * _sqnorm(pts))
    coeff = 2.0 * w[:, None] * gamma2
    num = np.sum(coeff * pts, axis=0)
    den = float(np.sum(coeff - 1.0))
    if abs(den) < EPS_DEN:
        raise DegenerateMidpoint(den)
    ratio = num / den
    if c == 0.0:
        return 0.5 * ratio
    return mobius_scalar(0.5, project_to_ball(ratio, c), c)


def mobius_matvec(mat, x, c: float = DEFAULT_C) -> np.ndarray:
    """Mobius matrix-vector product M (x) x = exp_0(M log_0(x)).

    ``mat`` has shape (m, n) and acts on the last axis of ``x``.  Zero inputs
    and zero images both map to the origin of the target ball.
    """
    mat = np.asarray(mat, dtype=np.float64)
    x = _as_array(x)
    if mat.ndim != 2:
        raise DimensionMismatch(f"matrix must be 2-D, got shape {mat.shape}")
    if mat.shape[1] != x.shape[-1]:
        raise DimensionMismatch(
            f"matrix columns {mat.shape[1]} do not match point dimension {x.shape[-1]}"
        )
    c = _check_curvature(c)
    if c == 0.0:
        return x @ mat.T
    return exp_map0(log_map0(x, c) @ mat.T, c)


def mobius_pointwise(f: Callable[[np.ndarray], np.ndarray], x, c: float = DEFAULT_C) -> np.ndarray:
    """Mobius version of a map f: exp_0(f(log_0(x))).

    ``f`` receives and returns tangent-space arrays; for c = 0 the function
    is applied directly.
    """
    x = _as_array(x)
    c = _check_curvature(c)
    if c == 0.0:
        return np.asarray(f(x), dtype=np.float64)
    return exp_map0(np.asarray(f(log_map0(x, c)), dtype=np.float64), c)
