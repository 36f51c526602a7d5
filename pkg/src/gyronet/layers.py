"""Network layers: ball-valued blocks and their flat-space baselines.

Every layer is a small object holding :class:`~gyronet.autodiff.Parameter`
leaves; ``params()`` feeds the optimizer and ``__call__`` builds the forward
graph on the active tape.  Stateful layers (dropout, batch norm) carry a
``training`` flag toggled by :func:`set_training`.

Feature tensors are (batch, dim); image fields are NHWC with the channel
vector of each pixel treated as one ball point in hyperbolic mode.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from . import hyperops as hp
from .autodiff import Parameter, Tensor
from .ball import EPS_DEN, EPS_ZERO
from .errors import DegenerateMidpoint, DimensionMismatch
from .graphs import sym_norm_coeffs


def glorot_uniform(rng, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, (fan_in, fan_out) if shape is None else shape)


def orthogonal_init(rng, rows: int, cols: int) -> np.ndarray:
    """Orthonormal columns (rows if the matrix is wide), QR sign-fixed."""
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def set_training(layers, flag: bool) -> None:
    for layer in layers:
        if hasattr(layer, "training"):
            layer.training = flag


# ---------------------------------------------------------------------------
# dense layers


class Linear:
    def __init__(self, in_dim: int, out_dim: int, rng, name: str = "linear"):
        self.weight = Parameter(glorot_uniform(rng, in_dim, out_dim), f"{name}.weight")
        self.bias = Parameter(np.zeros(out_dim), f"{name}.bias")

    def params(self):
        return [self.weight, self.bias]

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight.value + self.bias.value


class HypLinear:
    """(W (x) x) (+) exp_0(b); the bias lives in ambient coordinates."""

    def __init__(self, in_dim: int, out_dim: int, c: float, rng, name: str = "hyp_linear"):
        self.c = c
        self.weight = Parameter(glorot_uniform(rng, in_dim, out_dim), f"{name}.weight")
        self.bias = Parameter(np.zeros(out_dim), f"{name}.bias")

    def params(self):
        return [self.weight, self.bias]

    def __call__(self, x: Tensor) -> Tensor:
        h = hp.expmap0(hp.logmap0(x, self.c) @ self.weight.value, self.c)
        return hp.mobius_add(h, hp.expmap0(self.bias.value, self.c), self.c)


class HypMLR:
    """Signed-distance logits to K gyroplanes.

    logit_k = (2 |a_k| / sqrt(c)) asinh(2 sqrt(c) <z, a_k/|a_k|> / (1 - c|z|^2))
    with z = (-p_k) (+) x.  The whole batch is evaluated through Gram-matrix
    algebra (never materializing per-class displacement vectors), which keeps
    memory at O(batch * K).  p_k is stored ambient and mapped by exp_0.
    """

    def __init__(self, in_dim: int, num_classes: int, c: float, rng, name: str = "hyp_mlr"):
        if num_classes < 2:
            raise DimensionMismatch("need at least two classes")
        self.c = c
        self.p_raw = Parameter(np.zeros((num_classes, in_dim)), f"{name}.p")
        self.a = Parameter(
            glorot_uniform(rng, in_dim, num_classes, shape=(num_classes, in_dim)), f"{name}.a"
        )
        self.clamp_events = 0  # forwards that hit the |a| floor

    def params(self):
        return [self.p_raw, self.a]

    def __call__(self, x: Tensor) -> Tensor:
        c = self.c
        a = self.a.value
        if np.any(np.sqrt(np.sum(a.data * a.data, axis=-1)) < EPS_ZERO):
            self.clamp_events += 1
        na = ad.reshape(ad.maximum(ad.norm(a), EPS_ZERO), (1, -1))  # (1, K)
        if c == 0.0:
            # flat limit: logit_k = 4 <x - p_k, a_k>
            xa = x @ ad.transpose(a)
            pa = ad.reshape(hp.inner(self.p_raw.value, a), (1, -1))
            return (xa - pa) * 4.0
        sc = np.sqrt(c)
        p = hp.expmap0(self.p_raw.value, c)  # (K, n)
        pp = ad.reshape(hp.sqnorm(p), (1, -1))
        pa = ad.reshape(hp.inner(p, a), (1, -1))
        xx = hp.sqnorm(x)  # (N, 1)
        xa = x @ ad.transpose(a)  # (N, K)
        xp = x @ ad.transpose(p)  # (N, K)
        # z = (-p) (+) x expanded through the Mobius-addition coefficients
        A = xp * (-2.0 * c) + xx * c + 1.0
        B = 1.0 - pp * c
        D = xp * (-2.0 * c) + pp * xx * (c * c) + 1.0
        za = (B * xa - A * pa) / D
        zz = (A * A * pp - A * B * xp * 2.0 + B * B * xx) / (D * D)
        denom = ad.maximum(1.0 - zz * c, EPS_ZERO)
        return na * (2.0 / sc) * ad.asinh(za * (2.0 * sc) / (na * denom))


# ---------------------------------------------------------------------------
# dropout


class Dropout:
    def __init__(self, p: float, rng):
        if not 0.0 <= p < 1.0:
            raise ValueError("drop probability must lie in [0, 1)")
        self.p = p
        self.rng = rng
        self.training = True

    def params(self):
        return []

    def mask(self, shape) -> Tensor:
        keep = self.rng.random(shape) >= self.p
        return Tensor(keep / (1.0 - self.p))

    def __call__(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        return x * self.mask(x.shape)


class HypDropout(Dropout):
    """exp_0(dropout(log_0(x))); identity in eval mode or at p = 0."""

    def __init__(self, p: float, c: float, rng):
        super().__init__(p, rng)
        self.c = c

    def __call__(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        return hp.expmap0(hp.logmap0(x, self.c) * self.mask(x.shape), self.c)


# ---------------------------------------------------------------------------
# batch normalization


class BatchNorm:
    def __init__(self, dim: int, momentum: float = 0.1, eps: float = 1e-5, name: str = "bn"):
        self.gamma = Parameter(np.ones(dim), f"{name}.gamma")
        self.beta = Parameter(np.zeros(dim), f"{name}.beta")
        self.momentum = momentum
        self.eps = eps
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self.training = True

    def params(self):
        return [self.gamma, self.beta]

    def __call__(self, x: Tensor) -> Tensor:
        if self.training:
            if x.shape[0] < 1:
                raise ValueError("batch norm needs a non-empty batch in train mode")
            mu = ad.mean(x, axis=0, keepdims=True)
            var = ad.mean((x - mu) * (x - mu), axis=0, keepdims=True)
            m = self.momentum
            self.running_mean = (1 - m) * self.running_mean + m * mu.data[0]
            self.running_var = (1 - m) * self.running_var + m * var.data[0]
        else:
            mu = Tensor(self.running_mean[None, :])
            var = Tensor(self.running_var[None, :])
        xhat = (x - mu) / ad.sqrt(var + self.eps)
        return xhat * self.gamma.value + self.beta.value


class HypBatchNorm:
    """Midpoint-centered normalization on the ball.

    Train mode: mu = equal-weight midpoint of the batch, sigma = mean
    geodesic distance to mu (the first-order dispersion; set
    ``variance_mode="frechet"`` for mean squared distance instead), then
    y = gamma (x) [(sigma^2 + eps)^{-1/2} (x) ((-mu) (+) x)] (+) exp_0(beta)
    with gamma = exp(g) kept positive.  ``center_order="point_to_mean"``
    flips the centering operands to (-x) (+) mu.  Running statistics are an
    EMA of log_0(mu) and sigma, used verbatim in eval mode.
    """

    def __init__(
        self,
        dim: int,
        c: float,
        momentum: float = 0.1,
        eps: float = 1e-5,
        center_order: str = "mean_to_point",
        variance_mode: str = "dispersion",
        name: str = "hyp_bn",
    ):
        if center_order not in ("mean_to_point", "point_to_mean"):
            raise ValueError(f"unknown center_order {center_order!r}")
        if variance_mode not in ("dispersion", "frechet"):
            raise ValueError(f"unknown variance_mode {variance_mode!r}")
        self.c = c
        self.g = Parameter(np.zeros(()), f"{name}.g")
        self.beta = Parameter(np.zeros(dim), f"{name}.beta")
        self.momentum = momentum
        self.eps = eps
        self.center_order = center_order
        self.variance_mode = variance_mode
        self.running_mean = np.zeros(dim)  # tangent vector at the origin
        self.running_sigma = 1.0
        self.training = True

    def params(self):
        return [self.g, self.beta]

    def _center(self, x: Tensor, mu: Tensor) -> Tensor:
        if self.center_order == "mean_to_point":
            return hp.mobius_add(-mu, x, self.c)
        return hp.mobius_add(-x, mu, self.c)

    def __call__(self, x: Tensor) -> Tensor:
        c = self.c
        if self.training:
            if x.shape[0] < 1:
                raise ValueError("batch norm needs a non-empty batch in train mode")
            mu = hp.midpoint(x, c, axis=0)
            z = self._center(x, mu)
            if c == 0.0:
                d = ad.norm(z)
            else:
                sc = np.sqrt(c)
                d = ad.artanh(ad.norm(z) * sc) * (2.0 / sc)
            if self.variance_mode == "frechet":
                sigma = ad.sqrt(ad.mean(d * d) + EPS_ZERO)
            else:
                sigma = ad.mean(d)
            m = self.momentum
            mu_tan = hp.logmap0(mu, c)
            self.running_mean = (1 - m) * self.running_mean + m * mu_tan.data
            self.running_sigma = (1 - m) * self.running_sigma + m * float(sigma.data)
        else:
            mu = hp.expmap0(Tensor(self.running_mean), c)
            z = self._center(x, mu)
            sigma = Tensor(self.running_sigma)
        scale = ad.exp(self.g.value) / ad.sqrt(sigma * sigma + self.eps)
        out = hp.mobius_scalar(scale, z, c)
        return hp.mobius_add(out, hp.expmap0(self.beta.value, c), c)


# ---------------------------------------------------------------------------
# 2-D convolution and pooling


def _as_pair(k):
    return (k, k) if np.isscalar(k) else (int(k[0]), int(k[1]))


def _window_rows(shape, k, stride):
    """Flat row indices of every window: (N*Ho*Wo*kh*kw,) plus output dims."""
    n, h, w, _ = shape
    kh, kw = _as_pair(k)
    sh, sw = _as_pair(stride)
    ho = (h - kh) // sh + 1
    wo = (w - kw) // sw + 1
    if ho < 1 or wo < 1 or kh > h or kw > w:
        raise DimensionMismatch(f"window {(kh, kw)} does not fit field {(h, w)}")
    hh = np.arange(ho)[:, None] * sh + np.arange(kh)[None, :]  # (Ho, kh)
    ww = np.arange(wo)[:, None] * sw + np.arange(kw)[None, :]  # (Wo, kw)
    pix = hh[:, None, :, None] * w + ww[None, :, None, :]  # (Ho, Wo, kh, kw)
    idx = np.arange(n)[:, None, None, None, None] * (h * w) + pix[None]
    return idx.ravel(), ho, wo, kh * kw


def conv2d(x: Tensor, kernel: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of an NHWC tensor with a (kh, kw, cin, cout) kernel."""
    kh, kw, cin, cout = kernel.shape
    if x.ndim != 4 or x.shape[3] != cin:
        raise DimensionMismatch(f"expected NHWC input with {cin} channels, got {x.shape}")
    if padding:
        x = ad.pad2d(x, padding, padding)
    n, h, w, _ = x.shape
    idx, ho, wo, _ = _window_rows(x.shape, (kh, kw), stride)
    cols = ad.gather_rows(ad.reshape(x, (n * h * w, cin)), idx)
    cols = ad.reshape(cols, (n * ho * wo, kh * kw * cin))
    out = cols @ ad.reshape(kernel, (kh * kw * cin, cout))
    return ad.reshape(out, (n, ho, wo, cout))


def max_pool2d(x: Tensor, k, stride=None) -> Tensor:
    stride = k if stride is None else stride
    n, h, w, ch = x.shape
    idx, ho, wo, kk = _window_rows(x.shape, k, stride)
    wins = ad.gather_rows(ad.reshape(x, (n * h * w, ch)), idx)
    wins = ad.reshape(wins, (n * ho * wo, kk, ch))
    return ad.reshape(ad.reduce_max(wins, axis=1), (n, ho, wo, ch))


class Conv2d:
    def __init__(self, cin, cout, k, rng, stride=1, padding=0, name="conv"):
        self.stride, self.padding = stride, padding
        self.kernel = Parameter(
            orthogonal_init(rng, k * k * cin, cout).reshape(k, k, cin, cout), f"{name}.kernel"
        )

    def params(self):
        return [self.kernel]

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.kernel.value, self.stride, self.padding)


class HypConv2d(Conv2d):
    """Pointwise lift of cross-correlation: exp_0(conv2d(log_0(f))).

    Zero padding in tangent space is exactly padding the field with origin
    points.
    """

    def __init__(self, cin, cout, k, c, rng, stride=1, padding=0, name="hyp_conv"):
        super().__init__(cin, cout, k, rng, stride, padding, name)
        self.c = c

    def __call__(self, x: Tensor) -> Tensor:
        t = conv2d(hp.logmap0(x, self.c), self.kernel.value, self.stride, self.padding)
        return hp.expmap0(t, self.c)


class MaxPool2d:
    def __init__(self, k, stride=None):
        self.k, self.stride = k, stride

    def params(self):
        return []

    def __call__(self, x: Tensor) -> Tensor:
        return max_pool2d(x, self.k, self.stride)


class HypMaxPool2d(MaxPool2d):
    """Channel-wise window max taken in log_0 coordinates."""

    def __init__(self, k, c: float, stride=None):
        super().__init__(k, stride)
        self.c = c

    def __call__(self, x: Tensor) -> Tensor:
        return hp.expmap0(max_pool2d(hp.logmap0(x, self.c), self.k, self.stride), self.c)


class HypAvgPool2d:
    """Equal-weight gyromidpoint over each window."""

    def __init__(self, k, c: float, stride=None):
        self.k = k
        self.stride = k if stride is None else stride
        self.c = c

    def params(self):
        return []

    def __call__(self, x: Tensor) -> Tensor:
        n, h, w, ch = x.shape
        idx, ho, wo, kk = _window_rows(x.shape, self.k, self.stride)
        wins = ad.gather_rows(ad.reshape(x, (n * h * w, ch)), idx)
        wins = ad.reshape(wins, (n * ho * wo, kk, ch))
        return ad.reshape(hp.midpoint(wins, self.c, axis=1), (n, ho, wo, ch))


# ---------------------------------------------------------------------------
# graph convolutions


class GraphOperator:
    """Precomputed propagation structure: directed (src, dst, coeff) triples
    over A+I with symmetric normalization, plus per-node coefficient sums for
    the normalized aggregation mode."""

    def __init__(self, graph):
        src, dst, coeff = sym_norm_coeffs(graph)
        order = np.lexsort((src, dst))  # deterministic per-node summation order
        self.src = src[order]
        self.dst = dst[order]
        self.coeff = coeff[order][:, None]
        self.n = graph.n
        self.coeff_sum = np.bincount(self.dst, weights=self.coeff[:, 0], minlength=self.n)


class GCNConv:
    """Flat baseline: g(D^{-1/2}(A+I)D^{-1/2} X W)."""

    def __init__(self, in_dim, out_dim, rng, nonlinearity="relu", name="gcn_conv"):
        if nonlinearity not in ("relu", "identity"):
            raise ValueError(f"unknown nonlinearity {nonlinearity!r}")
        self.weight = Parameter(glorot_uniform(rng, in_dim, out_dim), f"{name}.weight")
        self.nonlinearity = nonlinearity

    def params(self):
        return [self.weight]

    def __call__(self, x: Tensor, op: GraphOperator) -> Tensor:
        h = x @ self.weight.value
        msg = ad.gather_rows(h, op.src) * Tensor(op.coeff)
        agg = ad.segment_sum(msg, op.dst, op.n)
        return ad.relu(agg) if self.nonlinearity == "relu" else agg


class HypGCNConv:
    """Message passing with gyromidpoint aggregation.

    Messages are W (x) h_w; each node aggregates incoming messages with the
    weighted midpoint over coefficients c_vw and rescales by the learnable
    scalar alpha (restoring the degree of freedom the midpoint normalizes
    away).  ``aggregation_mode="paper"`` keeps the raw denominator
    sum(2 c_vw gamma^2 - 1), which can approach zero for hub nodes with
    near-origin features and then raises DegenerateMidpoint.  ``"normalized"``
    rescales each node's coefficients to sum to one and weights the -1 terms
    accordingly, bounding the denominator below by one.
    """

    def __init__(
        self,
        in_dim,
        out_dim,
        c,
        rng,
        aggregation_mode: str = "paper",
        nonlinearity: str = "identity",
        name: str = "hyp_gcn_conv",
    ):
        if aggregation_mode not in ("paper", "normalized"):
            raise ValueError(f"unknown aggregation_mode {aggregation_mode!r}")
        if nonlinearity not in ("relu", "identity"):
            raise ValueError(f"unknown nonlinearity {nonlinearity!r}")
        self.c = c
        self.weight = Parameter(glorot_uniform(rng, in_dim, out_dim), f"{name}.weight")
        self.alpha = Parameter(np.asarray(2.0), f"{name}.alpha")
        self.aggregation_mode = aggregation_mode
        self.nonlinearity = nonlinearity

    def params(self):
        return [self.weight, self.alpha]

    def __call__(self, h: Tensor, op: GraphOperator) -> Tensor:
        c = self.c
        msg = hp.expmap0(hp.logmap0(h, c) @ self.weight.value, c)
        g2 = hp.gamma_sq(msg, c) if c != 0.0 else Tensor(np.ones((op.n, 1)))
        if self.aggregation_mode == "paper":
            coeff = Tensor(op.coeff)
            ones = 1.0
        else:
            coeff = Tensor(op.coeff / op.coeff_sum[op.dst, None])
            ones = coeff
        wg2 = ad.gather_rows(g2 * 2.0, op.src) * coeff  # (E, 1)
        num = ad.segment_sum(ad.gather_rows(msg, op.src) * wg2, op.dst, op.n)
        den = ad.segment_sum(wg2 - ones, op.dst, op.n)
        if np.min(np.abs(den.data)) < EPS_DEN:
            raise DegenerateMidpoint(float(np.min(np.abs(den.data))))
        m = hp.mobius_scalar(self.alpha.value * 0.5, hp.project(num / den, c), c)
        if self.nonlinearity == "relu":
            return hp.mobius_apply(ad.relu, m, c)
        return m


# ---------------------------------------------------------------------------
# loss and metrics


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log softmax probability of the true class."""
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.shape != (n,):
        raise DimensionMismatch(f"expected {n} labels, got shape {labels.shape}")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    shift = Tensor(np.max(logits.data, axis=1, keepdims=True))  # constant, exact at optimum
    s = logits - shift
    logp = s - ad.log(ad.reduce_sum(ad.exp(s), axis=1, keepdims=True))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    return -ad.mean(ad.reduce_sum(logp * Tensor(onehot), axis=1))


def accuracy(logits, labels) -> float:
    """Fraction of argmax hits; ties resolve to the lowest class index."""
    data = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    pred = np.argmax(data, axis=1)
    return float(np.mean(pred == np.asarray(labels)))
