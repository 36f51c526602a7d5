"""Seeded finite-difference gradient checks for every differentiable
primitive and layer.

Each named entry in CHECKS builds a small random instance and returns a
scalar-valued function plus its leaf tensors; run_check feeds the pair to
autodiff.grad_check.  The CLI gradcheck subcommand and the acceptance
suite both iterate this registry, so it is the single source of truth for
what "every primitive and every layer" means.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from . import hyperops as hp
from . import layers as ly
from .autodiff import Tensor
from .graphs import Graph

DEFAULT_TOL = 1e-4


class _StaticRng:
    """Hands out the same uniform field every draw.

    Train-mode dropout re-samples its mask per forward, which would break
    finite differencing; with this stub the mask is frozen and the layer
    becomes a fixed linear map.
    """

    def __init__(self, seed: int):
        self._field = np.random.default_rng(seed).random(4096)

    def random(self, shape):
        size = int(np.prod(shape))
        return self._field[:size].reshape(shape)


def _rng(seed: int):
    return np.random.default_rng(seed)


def _pts(rng, n: int, dim: int, radius: float = 0.4) -> np.ndarray:
    """Points of norm <= radius, safely inside the unit ball."""
    x = rng.standard_normal((n, dim))
    x /= np.maximum(np.linalg.norm(x, axis=1, keepdims=True), 1e-12)
    return x * rng.uniform(0.05, radius, (n, 1))


def _away_from(x: np.ndarray, gap: float) -> np.ndarray:
    """Shift values at least ``gap`` away from zero (kink avoidance)."""
    return x + gap * np.sign(np.where(x == 0.0, 1.0, x))


def _ssum(t: Tensor) -> Tensor:
    return ad.reduce_sum(ad.tanh(t * 0.3))


# --- autodiff primitives ---------------------------------------------------


def _c_add(seed):
    r = _rng(seed)
    return (lambda a, b: _ssum(ad.add(a, b)),
            [Tensor(r.standard_normal((3, 4))), Tensor(r.standard_normal(4))])


def _c_neg(seed):
    return (lambda a: _ssum(ad.neg(a)), [Tensor(_rng(seed).standard_normal((3, 4)))])


def _c_mul(seed):
    r = _rng(seed)
    return (lambda a, b: _ssum(ad.mul(a, b)),
            [Tensor(r.standard_normal((3, 4))), Tensor(r.standard_normal((3, 1)))])


def _c_div(seed):
    r = _rng(seed)
    den = _away_from(r.standard_normal((3, 4)), 0.5)
    return (lambda a, b: _ssum(ad.div(a, b)),
            [Tensor(r.standard_normal((3, 4))), Tensor(den)])


def _c_matmul(seed):
    r = _rng(seed)
    return (lambda a, b: _ssum(ad.matmul(a, b)),
            [Tensor(r.standard_normal((2, 3))), Tensor(r.standard_normal((3, 4)))])


def _c_tanh(seed):
    return (lambda a: ad.reduce_sum(ad.tanh(a)), [Tensor(_rng(seed).standard_normal((3, 4)))])


def _c_sinh(seed):
    return (lambda a: _ssum(ad.sinh(a)), [Tensor(_rng(seed).standard_normal((3, 4)) * 0.8)])


def _c_asinh(seed):
    return (lambda a: _ssum(ad.asinh(a)), [Tensor(_rng(seed).standard_normal((3, 4)))])


def _c_artanh(seed):
    return (lambda a: _ssum(ad.artanh(a)), [Tensor(_rng(seed).uniform(-0.7, 0.7, (3, 4)))])


def _c_sqrt(seed):
    return (lambda a: _ssum(ad.sqrt(a)), [Tensor(_rng(seed).uniform(0.3, 2.0, (3, 4)))])


def _c_exp(seed):
    return (lambda a: _ssum(ad.exp(a)), [Tensor(_rng(seed).uniform(-1.0, 1.0, (3, 4)))])


def _c_log(seed):
    return (lambda a: _ssum(ad.log(a)), [Tensor(_rng(seed).uniform(0.3, 3.0, (3, 4)))])


def _c_maximum(seed):
    r = _rng(seed)
    a = r.standard_normal((3, 4))
    b = a + _away_from(r.standard_normal((3, 4)), 0.1)
    return (lambda u, v: _ssum(ad.maximum(u, v)), [Tensor(a), Tensor(b)])


def _c_minimum(seed):
    r = _rng(seed)
    a = r.standard_normal((3, 4))
    b = a + _away_from(r.standard_normal((3, 4)), 0.1)
    return (lambda u, v: _ssum(ad.minimum(u, v)), [Tensor(a), Tensor(b)])


def _c_relu(seed):
    x = _away_from(_rng(seed).standard_normal((3, 4)), 0.1)
    return (lambda a: _ssum(ad.relu(a)), [Tensor(x)])


def _c_reduce_sum(seed):
    return (lambda a: ad.tanh(ad.reduce_sum(a) * 0.1),
            [Tensor(_rng(seed).standard_normal((3, 4)))])


def _c_mean(seed):
    return (lambda a: _ssum(ad.mean(a, axis=0)), [Tensor(_rng(seed).standard_normal((4, 3)))])


def _c_reduce_max(seed):
    r = _rng(seed)
    x = r.standard_normal((3, 5))
    x += np.arange(15).reshape(3, 5) * 1e-3  # break ties so the argmax is stable
    return (lambda a: _ssum(ad.reduce_max(a, axis=1)), [Tensor(x)])


def _c_norm(seed):
    x = _pts(_rng(seed), 4, 3, radius=0.8) + 0.05
    return (lambda a: _ssum(ad.norm(a)), [Tensor(x)])


def _c_gather_rows(seed):
    idx = np.array([2, 0, 3, 2])
    return (lambda a: _ssum(ad.gather_rows(a, idx)),
            [Tensor(_rng(seed).standard_normal((4, 3)))])


def _c_segment_sum(seed):
    seg = np.array([0, 0, 1, 2, 1])
    return (lambda a: _ssum(ad.segment_sum(a, seg, 3)),
            [Tensor(_rng(seed).standard_normal((5, 3)))])


def _c_reshape(seed):
    return (lambda a: _ssum(ad.reshape(a, (2, 6))),
            [Tensor(_rng(seed).standard_normal((3, 4)))])


def _c_transpose(seed):
    return (lambda a: _ssum(ad.transpose(a)), [Tensor(_rng(seed).standard_normal((3, 4)))])


def _c_concat(seed):
    r = _rng(seed)
    return (lambda a, b: _ssum(ad.concat([a, b], axis=1)),
            [Tensor(r.standard_normal((3, 2))), Tensor(r.standard_normal((3, 3)))])


def _c_pad2d(seed):
    return (lambda a: _ssum(ad.pad2d(a, 1, 1)),
            [Tensor(_rng(seed).standard_normal((2, 3, 3, 2)))])


# --- ball operations on tensors --------------------------------------------


def _c_project(seed):
    x = _pts(_rng(seed), 4, 3, radius=0.6)
    return (lambda a: _ssum(hp.project(a, 1.0)), [Tensor(x)])


def _c_mobius_add(seed):
    r = _rng(seed)
    return (lambda u, v: _ssum(hp.mobius_add(u, v, 1.0)),
            [Tensor(_pts(r, 4, 3)), Tensor(_pts(r, 4, 3))])


def _c_mobius_scalar(seed):
    x = _pts(_rng(seed), 4, 3)
    return (lambda u: _ssum(hp.mobius_scalar(0.7, u, 1.0)), [Tensor(x)])


def _c_expmap0(seed):
    v = _rng(seed).standard_normal((4, 3)) * 0.3
    return (lambda a: _ssum(hp.expmap0(a, 1.0)), [Tensor(v)])


def _c_logmap0(seed):
    x = _pts(_rng(seed), 4, 3, radius=0.5)
    return (lambda a: _ssum(hp.logmap0(a, 1.0)), [Tensor(x)])


def _c_gamma_sq(seed):
    x = _pts(_rng(seed), 4, 3, radius=0.6)
    return (lambda a: _ssum(hp.gamma_sq(a, 1.0)), [Tensor(x)])


def _c_distance(seed):
    r = _rng(seed)
    u = _pts(r, 4, 3)
    v = _pts(r, 4, 3) + 0.05  # keep the pairs apart; d is kinked at u = v
    return (lambda a, b: _ssum(hp.distance(a, b, 1.0)), [Tensor(u), Tensor(v)])


def _c_midpoint(seed):
    r = _rng(seed)
    x = _pts(r, 5, 3)
    w = r.uniform(0.5, 1.5, (5, 1))
    return (lambda a, ww: _ssum(hp.midpoint(a, 1.0, weights=ww)),
            [Tensor(x), Tensor(w)])


# --- layers -----------------------------------------------------------------


def _c_linear(seed):
    r = _rng(seed)
    layer = ly.Linear(3, 2, r)
    layer.bias.data[:] = r.standard_normal(2) * 0.1
    x = Tensor(r.standard_normal((4, 3)))
    return (lambda w, b, xx: _ssum(layer(xx)),
            [layer.weight.value, layer.bias.value, x])


def _c_hyp_linear(seed):
    r = _rng(seed)
    layer = ly.HypLinear(3, 2, c=1.0, rng=r)
    layer.bias.data[:] = r.standard_normal(2) * 0.1
    x = Tensor(_pts(r, 4, 3, radius=0.5))
    return (lambda w, b, xx: _ssum(layer(xx)),
            [layer.weight.value, layer.bias.value, x])


def _c_hyp_mlr(seed):
    r = _rng(seed)
    layer = ly.HypMLR(3, 3, c=1.0, rng=r)
    layer.p_raw.data[:] = r.uniform(-0.3, 0.3, (3, 3))
    x = Tensor(_pts(r, 4, 3, radius=0.5))
    return (lambda p, a, xx: ad.reduce_sum(ad.tanh(layer(xx) * 0.1)),
            [layer.p_raw.value, layer.a.value, x])


def _c_conv2d(seed):
    r = _rng(seed)
    k = Tensor(r.standard_normal((2, 2, 2, 2)) * 0.4)
    x = Tensor(r.standard_normal((1, 3, 3, 2)))
    return (lambda kk, xx: _ssum(ly.conv2d(xx, kk, stride=1, padding=1)), [k, x])


def _c_hyp_conv2d(seed):
    r = _rng(seed)
    layer = ly.HypConv2d(2, 2, 2, c=1.0, rng=r)
    x = Tensor(_pts(r, 9, 2, radius=0.5).reshape(1, 3, 3, 2))
    return (lambda kk, xx: _ssum(layer(xx)), [layer.kernel.value, x])


def _c_max_pool2d(seed):
    r = _rng(seed)
    x = r.standard_normal((1, 4, 4, 2))
    x += np.arange(x.size).reshape(x.shape) * 1e-3
    return (lambda xx: _ssum(ly.max_pool2d(xx, 2)), [Tensor(x)])


def _c_hyp_max_pool(seed):
    r = _rng(seed)
    x = _pts(r, 16, 2, radius=0.5)
    x *= 1.0 + np.arange(16)[:, None] * 1e-3  # separate the window norms
    x = Tensor(x.reshape(1, 4, 4, 2))
    return (lambda xx: _ssum(ly.HypMaxPool2d(2, c=1.0)(xx)), [x])


def _c_hyp_avg_pool(seed):
    x = Tensor(_pts(_rng(seed), 8, 2, radius=0.5).reshape(1, 2, 4, 2))
    return (lambda xx: _ssum(ly.HypAvgPool2d(2, c=1.0)(xx)), [x])


def _c_dropout(seed):
    layer = ly.Dropout(0.4, _StaticRng(seed))
    x = Tensor(_rng(seed).standard_normal((3, 4)))
    return (lambda xx: _ssum(layer(xx)), [x])


def _c_hyp_dropout(seed):
    layer = ly.HypDropout(0.4, 1.0, _StaticRng(seed))
    x = Tensor(_pts(_rng(seed), 4, 3, radius=0.5))
    return (lambda xx: _ssum(layer(xx)), [x])


def _c_batch_norm(seed):
    r = _rng(seed)
    layer = ly.BatchNorm(3)
    layer.gamma.data[:] = r.uniform(0.5, 1.5, 3)
    layer.beta.data[:] = r.standard_normal(3) * 0.2
    x = Tensor(r.standard_normal((6, 3)))
    return (lambda g, b, xx: _ssum(layer(xx)), [layer.gamma.value, layer.beta.value, x])


def _c_hyp_batch_norm(seed):
    r = _rng(seed)
    layer = ly.HypBatchNorm(3, c=1.0)
    x = Tensor(_pts(r, 6, 3, radius=0.5))
    return (lambda g, b, xx: _ssum(layer(xx)), [layer.g.value, layer.beta.value, x])


_GRAPH = Graph(5, np.array([[0, 1], [1, 2], [2, 3], [3, 4], [0, 4], [1, 3]]))


def _c_gcn_conv(seed):
    r = _rng(seed)
    layer = ly.GCNConv(3, 2, r)
    op = ly.GraphOperator(_GRAPH)
    x = Tensor(r.standard_normal((5, 3)) * 0.5)
    return (lambda w, xx: _ssum(layer(xx, op)), [layer.weight.value, x])


def _c_hyp_gcn_conv(seed):
    r = _rng(seed)
    layer = ly.HypGCNConv(3, 2, c=1.0, rng=r)
    op = ly.GraphOperator(_GRAPH)
    x = Tensor(_pts(r, 5, 3, radius=0.4))
    return (lambda w, a, xx: _ssum(layer(xx, op)),
            [layer.weight.value, layer.alpha.value, x])


def _c_cross_entropy(seed):
    r = _rng(seed)
    logits = Tensor(r.standard_normal((5, 4)))
    labels = r.integers(0, 4, 5)
    return (lambda lg: ly.cross_entropy(lg, labels), [logits])


CHECKS = {
    "add": _c_add,
    "neg": _c_neg,
    "mul": _c_mul,
    "div": _c_div,
    "matmul": _c_matmul,
    "tanh": _c_tanh,
    "sinh": _c_sinh,
    "asinh": _c_asinh,
    "artanh": _c_artanh,
    "sqrt": _c_sqrt,
    "exp": _c_exp,
    "log": _c_log,
    "maximum": _c_maximum,
    "minimum": _c_minimum,
    "relu": _c_relu,
    "reduce_sum": _c_reduce_sum,
    "mean": _c_mean,
    "reduce_max": _c_reduce_max,
    "norm": _c_norm,
    "gather_rows": _c_gather_rows,
    "segment_sum": _c_segment_sum,
    "reshape": _c_reshape,
    "transpose": _c_transpose,
    "concat": _c_concat,
    "pad2d": _c_pad2d,
    "project": _c_project,
    "mobius_add": _c_mobius_add,
    "mobius_scalar": _c_mobius_scalar,
    "expmap0": _c_expmap0,
    "logmap0": _c_logmap0,
    "gamma_sq": _c_gamma_sq,
    "distance": _c_distance,
    "midpoint": _c_midpoint,
    "linear": _c_linear,
    "hyp_linear": _c_hyp_linear,
    "hyp_mlr": _c_hyp_mlr,
    "conv2d": _c_conv2d,
    "hyp_conv2d": _c_hyp_conv2d,
    "max_pool2d": _c_max_pool2d,
    "hyp_max_pool": _c_hyp_max_pool,
    "hyp_avg_pool": _c_hyp_avg_pool,
    "dropout": _c_dropout,
    "hyp_dropout": _c_hyp_dropout,
    "batch_norm": _c_batch_norm,
    "hyp_batch_norm": _c_hyp_batch_norm,
    "gcn_conv": _c_gcn_conv,
    "hyp_gcn_conv": _c_hyp_gcn_conv,
    "cross_entropy": _c_cross_entropy,
}


def run_check(name: str, seed: int = 0, tol: float = DEFAULT_TOL):
    """Run one named check; returns the GradCheckResult."""
    try:
        builder = CHECKS[name]
    except KeyError:
        raise ValueError(f"unknown check {name!r}; choose from {sorted(CHECKS)}")
    fn, inputs = builder(seed)
    return ad.grad_check(fn, inputs, tol=tol)


def run_suite(names=None, seeds=(0,), tol: float = DEFAULT_TOL):
    """Run checks over a seed sweep.

    Yields (name, seed, GradCheckResult) in registry order.
    """
    for name in (names if names is not None else CHECKS):
        for seed in seeds:
            yield name, seed, run_check(name, seed, tol)
