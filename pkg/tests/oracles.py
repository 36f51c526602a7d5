"""Independent reference implementations used to pin expected test values.

Everything here is deliberately written from the mathematical definitions,
without importing the package under test: mpmath transcriptions of the
gyrovector formulas at 50 decimal digits, a golden-section Frechet-variance
minimizer, Floyd-Warshall distances, a brute-force four-point condition
scanner, a quadruple-loop convolution, and central finite differences.
"""

from __future__ import annotations

import itertools

import numpy as np
from mpmath import mp, mpf, atanh, sqrt, tanh, asinh

mp.dps = 50


# ---------------------------------------------------------------------------
# high-precision gyrovector formulas


def _sq(u):
    return sum(x * x for x in u)


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def to_mp(u):
    return [mpf(repr(float(x))) for x in np.asarray(u, dtype=float).ravel()]


def to_np(u):
    return np.array([float(x) for x in u])


def mp_mobius_add(u, v, c):
    u, v, c = to_mp(u), to_mp(v), mpf(repr(float(c)))
    uv, uu, vv = _dot(u, v), _sq(u), _sq(v)
    den = 1 + 2 * c * uv + c * c * uu * vv
    return to_np([((1 + 2 * c * uv + c * vv) * a + (1 - c * uu) * b) / den for a, b in zip(u, v)])


def mp_mobius_scalar(r, u, c):
    u, c, r = to_mp(u), mpf(repr(float(c))), mpf(repr(float(r)))
    n = sqrt(_sq(u))
    if n == 0:
        return to_np(u)
    f = tanh(r * atanh(sqrt(c) * n)) / (sqrt(c) * n)
    return to_np([f * a for a in u])


def mp_distance(u, v, c):
    cm = mpf(repr(float(c)))
    d = to_mp(mp_mobius_add(-np.asarray(u, dtype=float), v, c))
    return float(2 / sqrt(cm) * atanh(sqrt(cm) * sqrt(_sq(d))))


def mp_exp0(v, c):
    v, c = to_mp(v), mpf(repr(float(c)))
    n = sqrt(_sq(v))
    if n == 0:
        return to_np(v)
    f = tanh(sqrt(c) * n) / (sqrt(c) * n)
    return to_np([f * a for a in v])


def mp_log0(x, c):
    x, c = to_mp(x), mpf(repr(float(c)))
    n = sqrt(_sq(x))
    if n == 0:
        return to_np(x)
    f = atanh(sqrt(c) * n) / (sqrt(c) * n)
    return to_np([f * a for a in x])


def mp_exp(u, v, c):
    um, vm, cm = to_mp(u), to_mp(v), mpf(repr(float(c)))
    n = sqrt(_sq(vm))
    if n == 0:
        return to_np(um)
    lam = 2 / (1 - cm * _sq(um))
    f = tanh(sqrt(cm) * lam * n / 2) / (sqrt(cm) * n)
    return mp_mobius_add(u, to_np([f * a for a in vm]), c)


def mp_log(u, x, c):
    cm = mpf(repr(float(c)))
    um = to_mp(u)
    d = to_mp(mp_mobius_add(-np.asarray(u, dtype=float), x, c))
    n = sqrt(_sq(d))
    if n == 0:
        return np.zeros(len(um))
    lam = 2 / (1 - cm * _sq(um))
    f = 2 / (sqrt(cm) * lam) * atanh(sqrt(cm) * n) / n
    return to_np([f * a for a in d])


def mp_midpoint(points, weights, c):
    cm = mpf(repr(float(c)))
    pts = [to_mp(p) for p in points]
    ws = [mpf(repr(float(w))) for w in weights]
    g2 = [1 / (1 - cm * _sq(p)) for p in pts]
    den = sum(2 * w * g - 1 for w, g in zip(ws, g2))
    num = [sum(2 * w * g * p[i] for w, g, p in zip(ws, g2, pts)) for i in range(len(pts[0]))]
    return mp_mobius_scalar(0.5, to_np([a / den for a in num]), c), float(den)


def mp_mlr_logit(p, a, x, c):
    cm = mpf(repr(float(c)))
    z = to_mp(mp_mobius_add(-np.asarray(p, dtype=float), x, c))
    am = to_mp(a)
    na = sqrt(_sq(am))
    arg = 2 * sqrt(cm) * _dot(z, am) / ((1 - cm * _sq(z)) * na)
    return float(2 * na / sqrt(cm) * asinh(arg))


def frechet_two_point(a, b, weights, c, tol=1e-14):
    """Golden-section minimizer of sum_i w_i d(p, x_i)^2 along the a->b geodesic."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def point(t):
        return mp_exp(a, t * mp_log(a, b, c), c)

    def objective(t):
        p = point(t)
        return weights[0] * mp_distance(p, a, c) ** 2 + weights[1] * mp_distance(p, b, c) ** 2

    phi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 1.0
    x1, x2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = objective(x2)
    return point(0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# graphs


def floyd_warshall(n, edges):
    """All-pairs shortest hop counts; unreachable pairs stay at +inf."""
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v in edges:
        d[u, v] = d[v, u] = 1.0
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def brute_delta(dist):
    """Four-point condition by direct enumeration over all quadruples."""
    n = dist.shape[0]
    best = 0.0
    for u, v, w, x in itertools.combinations(range(n), 4):
        s = sorted(
            (
                dist[u, v] + dist[w, x],
                dist[u, w] + dist[v, x],
                dist[u, x] + dist[v, w],
            )
        )
        best = max(best, (s[2] - s[1]) / 2.0)
    return best


# ---------------------------------------------------------------------------
# dense numerics


def naive_conv2d(x, kernel, stride=1, padding=0):
    """Cross-correlation with zero padding, quadruple loop, NHWC layout."""
    b, h, w, cin = x.shape
    kh, kw, cin2, cout = kernel.shape
    assert cin == cin2
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding), (0, 0)))
        h, w = h + 2 * padding, w + 2 * padding
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    out = np.zeros((b, oh, ow, cout))
    for bi in range(b):
        for i in range(oh):
            for j in range(ow):
                patch = x[bi, i * stride : i * stride + kh, j * stride : j * stride + kw, :]
                for co in range(cout):
                    out[bi, i, j, co] = np.sum(patch * kernel[:, :, :, co])
    return out


def central_diff(fn, arrays, h=1e-5):
    """Central-difference gradients of a scalar-valued fn of numpy arrays."""
    grads = []
    for k, a in enumerate(arrays):
        g = np.zeros_like(a, dtype=float)
        flat = a.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = float(fn(*arrays))
            flat[i] = orig - h
            fm = float(fn(*arrays))
            flat[i] = orig
            gf[i] = (fp - fm) / (2.0 * h)
        grads.append(g)
    return grads
