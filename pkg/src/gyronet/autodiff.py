"""Minimal reverse-mode automatic differentiation on float64 numpy arrays.

A :class:`Tape` records every primitive applied while it is active (it is a
context manager); :func:`backward` replays the records in reverse and
accumulates gradients into the leaf tensors that were created with
``requires_grad=True``.  Gradients accumulate across backward calls, so two
passes over the same tape yield exactly twice the gradient; :func:`adam_step`
consumes and clears them.

The primitive set is intentionally small: broadcasting arithmetic, matmul,
the hyperbolic/area functions the gyrovector formulas need (tanh, artanh,
sinh, asinh), exp/log/sqrt, elementwise max/min, reductions, row gather and
segment-sum (the message-passing pair), reshape/pad, and a row-norm with a
guarded kernel.  Everything higher-level is composed from these.

Conventions shared with the rest of the package: ``artanh`` clamps its input
to [-1 + 1e-5, 1 - 1e-5] and passes zero gradient outside the clamp; ties in
max/min route the gradient to the first (left) argument; ``norm`` treats rows
with norm below 1e-15 as having zero direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NumericalError

EPS_BALL = 1e-5
EPS_ZERO = 1e-15

_TAPES: list["Tape"] = []


class Tensor:
    """A float64 array plus gradient metadata.

    ``requires_grad`` marks a leaf whose ``.grad`` is populated by
    :func:`backward`.  Tensors returned by primitives carry gradient flow
    implicitly (they sit on the tape) but their ``.grad`` stays ``None``.
    """

    __slots__ = ("data", "requires_grad", "grad", "_on_path")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._on_path = self.requires_grad

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # arithmetic sugar; every dunder routes through the recorded primitives
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


@dataclass
class _Record:
    out: Tensor
    inputs: tuple
    backward: object  # callable taking the output adjoint, returning input adjoints


@dataclass
class Tape:
    """Ordered record of primitives; supports repeated backward replays."""

    records: list = field(default_factory=list)

    def __enter__(self):
        _TAPES.append(self)
        return self

    def __exit__(self, *exc):
        _TAPES.pop()
        return False

    def backward(self, loss: Tensor):
        backward(self, loss)


def _record(out: Tensor, inputs: tuple, backward_fn) -> Tensor:
    if _TAPES and any(isinstance(t, Tensor) and t._on_path for t in inputs):
        out._on_path = True
        _TAPES[-1].records.append(_Record(out, inputs, backward_fn))
    return out


def backward(tape: Tape, loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable requires_grad leaf.

    ``loss`` must be scalar-sized.  The tape is left intact, so calling this
    twice accumulates exactly twice the gradient.
    """
    if loss.size != 1:
        raise DimensionMismatch(f"backward needs a scalar loss, got shape {loss.shape}")
    if not np.isfinite(loss.data).all():
        raise NumericalError("loss is not finite")
    adjoints: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    if loss.requires_grad:
        loss.grad = (loss.grad if loss.grad is not None else 0.0) + np.ones_like(loss.data)
    for rec in reversed(tape.records):
        g = adjoints.pop(id(rec.out), None)
        if g is None:
            continue
        for t, gi in zip(rec.inputs, rec.backward(g)):
            if gi is None or not isinstance(t, Tensor) or not t._on_path:
                continue
            key = id(t)
            if key in adjoints:
                adjoints[key] = adjoints[key] + gi
            else:
                adjoints[key] = gi
    # adjoints now holds only tensors that were never produced by a record
    # on this tape, i.e. the leaves
    for rec in tape.records:
        for t in rec.inputs:
            if isinstance(t, Tensor) and t.requires_grad:
                g = adjoints.pop(id(t), None)
                if g is not None:
                    t.grad = (t.grad if t.grad is not None else 0.0) + g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# primitives


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out = Tensor(a.data + b.data)
    sa, sb = a.data.shape, b.data.shape
    return _record(out, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def neg(a) -> Tensor:
    a = _wrap(a)
    out = Tensor(-a.data)
    return _record(out, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out = Tensor(a.data * b.data)
    sa, sb = a.data.shape, b.data.shape
    da, db = a.data, b.data
    return _record(out, (a, b), lambda g: (_unbroadcast(g * db, sa), _unbroadcast(g * da, sb)))


def div(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out = Tensor(a.data / b.data)
    sa, sb = a.data.shape, b.data.shape
    da, db = a.data, b.data

    def bwd(g):
        return (_unbroadcast(g / db, sa), _unbroadcast(-g * da / (db * db), sb))

    return _record(out, (a, b), bwd)


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatch("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"matmul shapes {a.shape} and {b.shape} do not align")
    out = Tensor(a.data @ b.data)
    da, db = a.data, b.data
    return _record(out, (a, b), lambda g: (g @ db.T, da.T @ g))


def tanh(a) -> Tensor:
    a = _wrap(a)
    y = np.tanh(a.data)
    out = Tensor(y)
    return _record(out, (a,), lambda g: (g * (1.0 - y * y),))


def sinh(a) -> Tensor:
    a = _wrap(a)
    out = Tensor(np.sinh(a.data))
    da = a.data
    return _record(out, (a,), lambda g: (g * np.cosh(da),))


def asinh(a) -> Tensor:
    a = _wrap(a)
    out = Tensor(np.arcsinh(a.data))
    da = a.data
    return _record(out, (a,), lambda g: (g / np.sqrt(1.0 + da * da),))


def artanh(a) -> Tensor:
    """artanh with the ball-margin clamp; zero gradient outside the clamp."""
    a = _wrap(a)
    clamped = np.clip(a.data, -1.0 + EPS_BALL, 1.0 - EPS_BALL)
    inside = (a.data > -1.0 + EPS_BALL) & (a.data < 1.0 - EPS_BALL)
    out = Tensor(np.arctanh(clamped))
    return _record(out, (a,), lambda g: (g * inside / (1.0 - clamped * clamped),))


def sqrt(a) -> Tensor:
    a = _wrap(a)
    y = np.sqrt(a.data)
    out = Tensor(y)
    return _record(out, (a,), lambda g: (g * 0.5 / np.maximum(y, EPS_ZERO),))


def exp(a) -> Tensor:
    a = _wrap(a)
    y = np.exp(a.data)
    out = Tensor(y)
    return _record(out, (a,), lambda g: (g * y,))


def log(a) -> Tensor:
    a = _wrap(a)
    out = Tensor(np.log(a.data))
    da = a.data
    return _record(out, (a,), lambda g: (g / da,))


def maximum(a, b) -> Tensor:
    """Elementwise max; on ties the gradient goes to the first argument."""
    a, b = _wrap(a), _wrap(b)
    mask = a.data >= b.data
    out = Tensor(np.where(mask, a.data, b.data))
    sa, sb = a.data.shape, b.data.shape
    return _record(
        out, (a, b), lambda g: (_unbroadcast(g * mask, sa), _unbroadcast(g * ~mask, sb))
    )


def minimum(a, b) -> Tensor:
    """Elementwise min; on ties the gradient goes to the first argument."""
    a, b = _wrap(a), _wrap(b)
    mask = a.data <= b.data
    out = Tensor(np.where(mask, a.data, b.data))
    sa, sb = a.data.shape, b.data.shape
    return _record(
        out, (a, b), lambda g: (_unbroadcast(g * mask, sa), _unbroadcast(g * ~mask, sb))
    )


def relu(a) -> Tensor:
    return maximum(a, 0.0)


def reduce_sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    out = Tensor(np.sum(a.data, axis=axis, keepdims=keepdims))
    shape = a.data.shape

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        gk = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gk, shape).copy(),)

    return _record(out, (a,), bwd)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    if axis is None:
        n = a.data.size
    else:
        n = a.data.shape[axis]
    return mul(reduce_sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def reduce_max(a, axis: int, keepdims: bool = False) -> Tensor:
    """Max along one axis; ties send the gradient to the first index."""
    a = _wrap(a)
    idx = np.argmax(a.data, axis=axis)
    y = np.take_along_axis(a.data, np.expand_dims(idx, axis), axis=axis)
    out = Tensor(y if keepdims else y.squeeze(axis))
    shape = a.data.shape

    def bwd(g):
        gi = g if keepdims else np.expand_dims(g, axis)
        full = np.zeros(shape)
        np.put_along_axis(full, np.expand_dims(idx, axis), gi, axis=axis)
        return (full,)

    return _record(out, (a,), bwd)


def norm(a, keepdims: bool = True) -> Tensor:
    """Euclidean norm along the last axis with a guarded gradient at zero."""
    a = _wrap(a)
    y = np.sqrt(np.sum(a.data * a.data, axis=-1, keepdims=True))
    out = Tensor(y if keepdims else y[..., 0])
    da = a.data

    def bwd(g):
        gk = g if keepdims else g[..., None]
        return (gk * da / np.maximum(y, EPS_ZERO),)

    return _record(out, (a,), bwd)


def gather_rows(a, idx) -> Tensor:
    """Select rows of a 2-D tensor; backward scatter-adds into the source."""
    a = _wrap(a)
    if a.ndim != 2:
        raise DimensionMismatch("gather_rows expects a 2-D tensor")
    idx = np.asarray(idx, dtype=np.intp)
    out = Tensor(a.data[idx])
    n = a.data.shape[0]
    return _record(out, (a,), lambda g: (_segment_sum_data(g, idx, n),))


def _segment_sum_data(x: np.ndarray, seg: np.ndarray, num: int) -> np.ndarray:
    out = np.empty((num, x.shape[1]))
    for j in range(x.shape[1]):
        out[:, j] = np.bincount(seg, weights=x[:, j], minlength=num)
    return out


def segment_sum(a, seg, num_segments: int) -> Tensor:
    """Sum rows of a 2-D tensor into ``num_segments`` buckets by id."""
    a = _wrap(a)
    if a.ndim != 2:
        raise DimensionMismatch("segment_sum expects a 2-D tensor")
    seg = np.asarray(seg, dtype=np.intp)
    if seg.shape[0] != a.shape[0]:
        raise DimensionMismatch("one segment id per row required")
    out = Tensor(_segment_sum_data(a.data, seg, num_segments))
    return _record(out, (a,), lambda g: (g[seg],))


def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    old = a.data.shape
    out = Tensor(a.data.reshape(shape))
    return _record(out, (a,), lambda g: (g.reshape(old),))


def transpose(a) -> Tensor:
    """Swap the two axes of a matrix."""
    a = _wrap(a)
    if a.ndim != 2:
        raise DimensionMismatch("transpose expects a 2-D tensor")
    out = Tensor(a.data.T)
    return _record(out, (a,), lambda g: (g.T,))


def concat(parts, axis: int = -1) -> Tensor:
    """Join tensors along one axis; backward slices the gradient apart."""
    parts = tuple(_wrap(p) for p in parts)
    if not parts:
        raise DimensionMismatch("concat needs at least one tensor")
    out = Tensor(np.concatenate([p.data for p in parts], axis=axis))
    sizes = [p.data.shape[axis] for p in parts]
    bounds = np.cumsum([0] + sizes)

    def bwd(g):
        moved = np.moveaxis(g, axis, 0)
        return tuple(
            np.moveaxis(moved[bounds[i] : bounds[i + 1]], 0, axis) for i in range(len(parts))
        )

    return _record(out, parts, bwd)


def pad2d(a, pad_h: int, pad_w: int) -> Tensor:
    """Zero-pad the H and W axes of an NHWC tensor."""
    a = _wrap(a)
    if a.ndim != 4:
        raise DimensionMismatch("pad2d expects an NHWC tensor")
    out = Tensor(np.pad(a.data, ((0, 0), (pad_h, pad_h), (pad_w, pad_w), (0, 0))))
    h, w = a.data.shape[1], a.data.shape[2]

    def bwd(g):
        return (g[:, pad_h : pad_h + h, pad_w : pad_w + w, :],)

    return _record(out, (a,), bwd)


# ---------------------------------------------------------------------------
# optimizer


class Parameter:
    """Named leaf tensor with Adam state."""

    def __init__(self, value, name: str = ""):
        self.value = Tensor(value, requires_grad=True)
        self.name = name
        self.m = np.zeros_like(self.value.data)
        self.v = np.zeros_like(self.value.data)
        self.steps = 0

    @property
    def data(self) -> np.ndarray:
        return self.value.data

    def __repr__(self):
        return f"Parameter({self.name or 'unnamed'}, shape={self.value.shape})"


def adam_step(
    params,
    lr: float,
    betas=(0.9, 0.999),
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """One classic Adam update; weight decay is added to the raw gradient.

    Parameters with no accumulated gradient are treated as having gradient
    zero.  All gradients are cleared afterwards.
    """
    b1, b2 = betas
    for p in params:
        g = p.value.grad if p.value.grad is not None else np.zeros_like(p.value.data)
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for parameter {p.name!r}")
        if weight_decay:
            g = g + weight_decay * p.value.data
        p.steps += 1
        p.m = b1 * p.m + (1.0 - b1) * g
        p.v = b2 * p.v + (1.0 - b2) * (g * g)
        mhat = p.m / (1.0 - b1 ** p.steps)
        vhat = p.v / (1.0 - b2 ** p.steps)
        p.value.data -= lr * mhat / (np.sqrt(vhat) + eps)
        p.value.grad = None


def zero_grads(params) -> None:
    for p in params:
        p.value.grad = None


# ---------------------------------------------------------------------------
# gradient checking


@dataclass
class GradCheckResult:
    passed: bool
    max_rel_err: float
    per_input: list


def grad_check(fn, inputs, tol: float = 1e-4, h: float = 1e-5) -> GradCheckResult:
    """Compare tape gradients of a scalar function against central differences.

    ``fn`` receives the given leaf tensors and must return a scalar Tensor.
    The relative error per element is |a - f| / max(1, |a|, |f|).
    """
    inputs = [t if isinstance(t, Tensor) else Tensor(t, requires_grad=True) for t in inputs]
    for t in inputs:
        t.requires_grad = True
        t._on_path = True
        t.grad = None
    with Tape() as tape:
        out = fn(*inputs)
    backward(tape, out)
    report = []
    worst = 0.0
    for t in inputs:
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        fd = np.zeros_like(t.data)
        flat = t.data.reshape(-1)
        fdf = fd.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = float(fn(*inputs).data)
            flat[i] = orig - h
            fm = float(fn(*inputs).data)
            flat[i] = orig
            fdf[i] = (fp - fm) / (2.0 * h)
        denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(fd)))
        err = float(np.max(np.abs(analytic - fd) / denom)) if t.size else 0.0
        report.append(err)
        worst = max(worst, err)
    return GradCheckResult(passed=worst <= tol, max_rel_err=worst, per_input=report)
