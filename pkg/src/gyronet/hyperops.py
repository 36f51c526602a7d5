"""Differentiable ball operations on autodiff tensors.

Batched mirror of :mod:`gyronet.ball`: points live along the last axis and
every function is assembled from recorded primitives, so gradients flow
through the tape.  The curvature c is a plain non-negative float and is
never trained.  c=0 short-circuits to the flat formulas.

Zero-norm inputs are guarded with the same floors as the reference module;
the guards create measure-zero kinks (gradient checks sample away from
them).
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .ball import EPS_BALL, EPS_ZERO


def sqnorm(x: Tensor) -> Tensor:
    return ad.reduce_sum(x * x, axis=-1, keepdims=True)


def inner(u: Tensor, v: Tensor) -> Tensor:
    return ad.reduce_sum(u * v, axis=-1, keepdims=True)


def project(x: Tensor, c: float) -> Tensor:
    """Pull points onto the ball of radius (1 - eps)/sqrt(c).

    Inside points pass through with an identity gradient; outside points are
    radially rescaled.
    """
    if c == 0.0:
        return x
    max_norm = (1.0 - EPS_BALL) / np.sqrt(c)
    n = ad.maximum(ad.norm(x), EPS_ZERO)
    scale = ad.minimum(1.0, max_norm / n)
    return x * scale


def mobius_add(u: Tensor, v: Tensor, c: float) -> Tensor:
    if c == 0.0:
        return u + v
    uu = sqnorm(u)
    vv = sqnorm(v)
    uv = inner(u, v)
    num = (uv * (2.0 * c) + vv * c + 1.0) * u + (1.0 - uu * c) * v
    den = uv * (2.0 * c) + uu * vv * (c * c) + 1.0
    return project(num / den, c)


def mobius_scalar(r, u: Tensor, c: float) -> Tensor:
    """r (x) u with r a float or a broadcastable tensor."""
    if c == 0.0:
        return u * r
    sc = np.sqrt(c)
    n = ad.maximum(ad.norm(u), EPS_ZERO)
    t = ad.tanh(ad.artanh(n * sc) * r)
    return project(u * (t / (n * sc)), c)


def expmap0(v: Tensor, c: float) -> Tensor:
    if c == 0.0:
        return v
    sc = np.sqrt(c)
    n = ad.maximum(ad.norm(v), EPS_ZERO)
    return project(v * (ad.tanh(n * sc) / (n * sc)), c)


def logmap0(x: Tensor, c: float) -> Tensor:
    if c == 0.0:
        return x
    sc = np.sqrt(c)
    n = ad.maximum(ad.norm(x), EPS_ZERO)
    return x * (ad.artanh(n * sc) / (n * sc))


def gamma_sq(x: Tensor, c: float) -> Tensor:
    """Squared Lorentz factor 1 / (1 - c * |x|^2), shape (..., 1)."""
    return 1.0 / (1.0 - sqnorm(x) * c)


def distance(u: Tensor, v: Tensor, c: float) -> Tensor:
    if c == 0.0:
        return ad.norm(v - u)
    sc = np.sqrt(c)
    d = ad.norm(mobius_add(-u, v, c))
    return ad.artanh(d * sc) * (2.0 / sc)


def mobius_apply(fn, x: Tensor, c: float) -> Tensor:
    """Lift a tangent-space map to the ball: exp_0(fn(log_0(x)))."""
    return expmap0(fn(logmap0(x, c)), c)


def midpoint(x: Tensor, c: float, weights: Tensor | None = None, axis: int = 0) -> Tensor:
    """Weighted gyromidpoint along ``axis`` (differentiable batch form).

    Computes (1/2) (x) [sum(2 w g^2 x) / sum(2 w g^2 - 1)]; note the -1 is
    per term, not weight-scaled, so the denominator can cross zero for small
    weights.  Callers that need an error on degeneracy check it themselves
    (the graph layer does); here it is only floored away from exact zero.
    """
    g2 = gamma_sq(x, c) if c != 0.0 else Tensor(np.ones(x.shape[:-1] + (1,)))
    if weights is None:
        wg2 = g2 * 2.0
    else:
        wg2 = g2 * weights * 2.0
    num = ad.reduce_sum(x * wg2, axis=axis)
    den = ad.reduce_sum(wg2 - 1.0, axis=axis)
    sign = Tensor(np.where(den.data < 0.0, -1.0, 1.0))
    safe = ad.maximum(den * sign, EPS_ZERO) * sign
    return mobius_scalar(0.5, project(num / safe, c), c)
