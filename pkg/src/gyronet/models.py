"""Model assembly: graph classifiers (flat and hyperbolic) and a small
hyperbolic CNN, plus the featurization that moves raw data into the ball."""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import hyperops as hp
from . import layers as ly
from .autodiff import Tensor

KINDS = ("gcn", "hypgcn", "hypcnn")
HEADS = ("none", "euclid_mlr", "hyp_mlr")


@dataclass
class ModelSpec:
    kind: str
    in_dim: int
    hidden_dim: int
    num_classes: int
    head: str = "hyp_mlr"
    use_linear_before_head: bool = True
    nonlinearity: str = "identity"
    c: float = 1.0
    dropout: float = 0.0

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError("kind must be one of %s" % (KINDS,))
        if self.head not in HEADS:
            raise ValueError("head must be one of %s" % (HEADS,))
        if self.in_dim < 1 or self.hidden_dim < 1 or self.num_classes < 1:
            raise ValueError("dimensions must be positive")
        if self.kind == "hypcnn" and self.head != "hyp_mlr":
            raise ValueError("the CNN fixture only supports the hyp_mlr head")


def featurize(features: np.ndarray, c: float) -> np.ndarray:
    """Standardize columns, scale to max row norm 0.9/sqrt(c), map by exp_0.

    This is how raw Euclidean features enter the ball.  At c = 0 the exp map
    is the identity and no rescaling is applied.
    """
    x = np.asarray(features, dtype=np.float64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    z = (x - mean) / np.where(std > 0.0, std, 1.0)
    if c == 0.0:
        return z
    maxnorm = np.linalg.norm(z, axis=-1).max()
    if maxnorm > 0.0:
        z = z * (0.9 / np.sqrt(c) / maxnorm)
    t = hp.expmap0(Tensor(z), c)
    return t.data


def standardize(features: np.ndarray) -> np.ndarray:
    """Column-wise standardization for the flat models."""
    x = np.asarray(features, dtype=np.float64)
    std = x.std(axis=0)
    return (x - x.mean(axis=0)) / np.where(std > 0.0, std, 1.0)


class GraphModel:
    """Two graph convolutions, dropout, an optional width-preserving linear
    layer, and a classification head.

    The nonlinearity sits between the two convolutions; the second
    convolution always outputs raw features (or logits when head="none",
    in which case it maps straight to the class count).
    """

    def __init__(self, spec: ModelSpec, rng, drop_rng=None):
        spec.validate()
        self.spec = spec
        self.c = spec.c
        drop_rng = drop_rng if drop_rng is not None else rng
        out2 = spec.num_classes if spec.head == "none" else spec.hidden_dim
        hyp = spec.kind == "hypgcn"
        if hyp:
            self.conv1 = ly.HypGCNConv(spec.in_dim, spec.hidden_dim, spec.c, rng,
                                       nonlinearity=spec.nonlinearity)
            self.conv2 = ly.HypGCNConv(spec.hidden_dim, out2, spec.c, rng)
            self.drop = ly.HypDropout(spec.dropout, spec.c, drop_rng)
            self.linear = (ly.HypLinear(spec.hidden_dim, spec.hidden_dim, spec.c, rng)
                           if spec.use_linear_before_head and spec.head != "none" else None)
        else:
            self.conv1 = ly.GCNConv(spec.in_dim, spec.hidden_dim, rng,
                                    nonlinearity=spec.nonlinearity)
            self.conv2 = ly.GCNConv(spec.hidden_dim, out2, rng, nonlinearity="identity")
            self.drop = ly.Dropout(spec.dropout, drop_rng)
            self.linear = (ly.Linear(spec.hidden_dim, spec.hidden_dim, rng)
                           if spec.use_linear_before_head and spec.head != "none" else None)
        self.hyp = hyp
        if spec.head == "hyp_mlr":
            self.mlr = ly.HypMLR(spec.hidden_dim, spec.num_classes, spec.c, rng)
        elif spec.head == "euclid_mlr":
            self.mlr = ly.Linear(spec.hidden_dim, spec.num_classes, rng)
        else:
            self.mlr = None
        self.layers = [l for l in (self.conv1, self.conv2, self.drop, self.linear, self.mlr)
                       if l is not None]

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(getattr(layer, "params", list)())
        return out

    def set_training(self, flag: bool):
        ly.set_training(self.layers, flag)

    def forward(self, x: Tensor, op) -> Tensor:
        h = self.conv1(x, op)
        h = self.conv2(h, op)
        if self.spec.head == "none":
            return hp.logmap0(h, self.c) if self.hyp else h
        h = self.drop(h)
        if self.linear is not None:
            h = self.linear(h)
        if self.spec.head == "hyp_mlr":
            if not self.hyp:
                h = hp.expmap0(h, self.c)
            return self.mlr(h)
        if self.hyp:
            h = hp.logmap0(h, self.c)
        return self.mlr(h)

    __call__ = forward


class HypCNN:
    """Toy hyperbolic CNN: conv, batch norm, max pool, conv, global average
    pool, MLR.  Inputs are NHWC fields of ball points."""

    def __init__(self, spec: ModelSpec, rng, use_bn: bool = True):
        spec.validate()
        self.spec = spec
        self.c = spec.c
        channels = spec.hidden_dim
        self.conv1 = ly.HypConv2d(spec.in_dim, channels, 3, spec.c, rng)
        self.bn = ly.HypBatchNorm(channels, spec.c) if use_bn else None
        self.pool = ly.HypMaxPool2d(2, spec.c)
        self.conv2 = ly.HypConv2d(channels, channels, 3, spec.c, rng)
        self.mlr = ly.HypMLR(channels, spec.num_classes, spec.c, rng)
        self.layers = [l for l in (self.conv1, self.bn, self.pool, self.conv2, self.mlr)
                       if l is not None]

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(getattr(layer, "params", list)())
        return out

    def set_training(self, flag: bool):
        ly.set_training(self.layers, flag)

    def forward(self, x: Tensor, op=None) -> Tensor:
        h = self.conv1(x)
        if self.bn is not None:
            shape = h.shape
            flat = ad.reshape(h, (shape[0] * shape[1] * shape[2], shape[3]))
            flat = self.bn(flat)
            h = ad.reshape(flat, shape)
        h = self.pool(h)
        h = self.conv2(h)
        hh, ww = h.shape[1], h.shape[2]
        h = ly.HypAvgPool2d((hh, ww), self.c)(h)
        h = ad.reshape(h, (h.shape[0], h.shape[3]))
        return self.mlr(h)

    __call__ = forward


def build_model(spec: ModelSpec, seed: int = 0):
    """Construct a model with seeded initialization.

    Weight matrices use Glorot-uniform scaling, convolution kernels are
    orthogonal, biases and MLR base points start at zero, the aggregation
    scale starts at 2 and batch-norm at identity.
    """
    rng = np.random.default_rng(seed)
    drop_rng = np.random.default_rng(seed + 0x9E3779B9)
    if spec.kind == "hypcnn":
        return HypCNN(spec, rng)
    return GraphModel(spec, rng, drop_rng)
