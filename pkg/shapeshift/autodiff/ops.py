"""Public differentiable operations on DiffArray values.

Binary operations broadcast numpy-style by inserting explicit
``broadcast_to`` nodes, so every recorded primitive sees equal shapes.
Python numbers and tensors are accepted wherever an array is and enter the
graph as constants.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import torch

from .array import DiffArray, as_tensor
from .graph import apply
from ..utils.errors import ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass
class SampleStats:
    clamped_queries: int = 0

    def reset(self):
        self.clamped_queries = 0


# Counts sample points that fell outside [0, 1] and were clamped.
stats = SampleStats()


def constant(value):
    return value if isinstance(value, DiffArray) else DiffArray(as_tensor(value))


def _binary(op, a, b):
    a, b = constant(a), constant(b)
    if a.shape != b.shape:
        try:
            shape = list(torch.broadcast_shapes(tuple(a.shape), tuple(b.shape)))
        except RuntimeError as e:
            raise ShapeMismatchError(f"{op}: cannot broadcast {a.shape} with {b.shape}") from e
        a, b = broadcast_to(a, shape), broadcast_to(b, shape)
    return apply(op, a, b)


def add(a, b):
    return _binary('add', a, b)


def sub(a, b):
    return _binary('sub', a, b)


def mul(a, b):
    return _binary('mul', a, b)


def div(a, b):
    return _binary('div', a, b)


def neg(a):
    return apply('neg', constant(a))


def scale(a, factor):
    return apply('scale', constant(a), factor=float(factor))


def square(a):
    return apply('square', constant(a))


def sqrt(a):
    return apply('sqrt', constant(a))


def abs(a):
    return apply('abs', constant(a))


def leaky_relu(a, slope):
    return apply('leaky_relu', constant(a), slope=float(slope))


def sigmoid(a):
    return apply('sigmoid', constant(a))


def clamp(a, lo, hi):
    return apply('clamp', constant(a), lo=float(lo), hi=float(hi))


def sum(a, axis=None, keepdims=False):
    return apply('sum', constant(a), axis=axis, keepdims=keepdims)


def mean(a, axis=None, keepdims=False):
    a = constant(a)
    if axis is None:
        count = a.numel
    else:
        axes = (axis,) if isinstance(axis, int) else axis
        count = math.prod(a.shape[ax] for ax in axes)
    return scale(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def norm2(a, axis=None, keepdims=False):
    return apply('norm2', constant(a), axis=axis, keepdims=keepdims)


def matmul(a, b):
    return apply('matmul', constant(a), constant(b))


def reshape(a, shape):
    a = constant(a)
    shape = [int(s) for s in shape]
    if shape == a.shape:
        return a
    return apply('reshape', a, shape=shape)


def permute(a, dims):
    dims = [int(d) for d in dims]
    if dims == list(range(len(dims))):
        return constant(a)
    return apply('permute', constant(a), dims=dims)


def broadcast_to(a, shape):
    a = constant(a)
    shape = [int(s) for s in shape]
    if shape == a.shape:
        return a
    return apply('broadcast_to', a, shape=shape)


def sum_to(a, shape):
    a = constant(a)
    shape = [int(s) for s in shape]
    if shape == a.shape:
        return a
    return apply('sum_to', a, shape=shape)


def concat(arrays, axis=-1):
    arrays = [constant(a) for a in arrays]
    return apply('concat', *arrays, axis=axis)


def getitem(a, index):
    if not isinstance(index, tuple):
        index = (index,)
    return apply('getitem', constant(a), index=index)


def embed(a, shape, index):
    return apply('embed', constant(a), shape=[int(s) for s in shape], index=index)


def take_rows(a, index):
    return apply('take_rows', constant(a), index=torch.as_tensor(index, dtype=torch.long))


def scatter_rows(a, index, num_rows):
    return apply('scatter_rows', constant(a), index=torch.as_tensor(index, dtype=torch.long),
                 num_rows=int(num_rows))


def conv(x, w, stride=1, padding=0, dims=2):
    return apply('conv', constant(x), constant(w), stride=int(stride), padding=int(padding), dims=int(dims))


def conv_input_grad(g, w, input_shape, stride=1, padding=0, dims=2):
    return apply('conv_input_grad', constant(g), constant(w), input_shape=[int(s) for s in input_shape],
                 stride=int(stride), padding=int(padding), dims=int(dims))


def conv_weight_grad(x, g, weight_shape, stride=1, padding=0, dims=2):
    return apply('conv_weight_grad', constant(x), constant(g), weight_shape=[int(s) for s in weight_shape],
                 stride=int(stride), padding=int(padding), dims=int(dims))


def _with_bias(y, bias, dims):
    if bias is None:
        return y
    return add(y, reshape(bias, [1, constant(bias).shape[0]] + [1] * dims))


def conv2d(x, w, bias=None, stride=1, padding=0):
    """2D strided convolution, channels-first ``(B, C, H, W)``."""
    return _with_bias(conv(x, w, stride=stride, padding=padding, dims=2), bias, 2)


def conv3d(x, w, bias=None, stride=1, padding=0):
    """3D strided convolution, channels-first ``(B, C, D, H, W)``."""
    return _with_bias(conv(x, w, stride=stride, padding=padding, dims=3), bias, 3)


def linear(x, w, bias=None):
    """x @ w^T + bias over the last axis; ``w`` is ``(out, in)``."""
    y = matmul(x, permute(w, [1, 0]))
    if bias is None:
        return y
    return add(y, bias)


def _grid_sample(grid, points, dims):
    grid, points = constant(grid), constant(points)
    if grid.ndim != dims + 2 or points.ndim != 3 or points.shape[-1] != dims:
        raise ShapeMismatchError(
            f"sampling a {dims}D grid needs grid (B, *k, m) and points (B, N, {dims}), "
            f"got {grid.shape} and {points.shape}")
    batch, extents, channels = grid.shape[0], grid.shape[1:-1], grid.shape[-1]
    if points.shape[0] != batch:
        raise ShapeMismatchError(f"grid batch {batch} != points batch {points.shape[0]}")
    num_points = points.shape[1]

    outside = int(((points.data < 0) | (points.data > 1)).any(dim=-1).sum())
    if outside:
        stats.clamped_queries += outside
        logger.debug(f"clamped {outside} sample points to the unit box")

    cells = math.prod(extents)
    strides = [math.prod(extents[ax + 1:]) for ax in range(dims)]
    flat = reshape(grid, [batch * cells, channels])
    offset = (torch.arange(batch, dtype=torch.long) * cells).reshape(batch, 1)

    lower, upper, frac = [], [], []
    for ax, k in enumerate(extents):
        coord = getitem(points, (slice(None), slice(None), ax))
        u = clamp(sub(scale(coord, k), 0.5), 0.0, k - 1)
        base = torch.clamp(torch.floor(u.data), 0, max(k - 2, 0)).to(torch.long)
        lower.append(base)
        upper.append(torch.clamp(base + 1, max=k - 1))
        frac.append(sub(u, constant(base.to(u.dtype))))

    out = None
    for corner in itertools.product((0, 1), repeat=dims):
        index = offset.clone()
        weight = None
        for ax, bit in enumerate(corner):
            index = index + (upper[ax] if bit else lower[ax]) * strides[ax]
            w = frac[ax] if bit else sub(1.0, frac[ax])
            weight = w if weight is None else mul(weight, w)
        term = mul(take_rows(flat, index), reshape(weight, [batch, num_points, 1]))
        out = term if out is None else add(out, term)
    return out


def bilinear_sample(grid, points):
    """Interpolate a channel-last grid ``(B, k, k, m)`` at points ``(B, N, 2)`` in [0, 1]^2.

    Cell i of an axis with k cells is centred at (i + 0.5) / k. Points are
    clamped into the box spanned by the outermost centres.
    """
    return _grid_sample(grid, points, 2)


def trilinear_sample(grid, points):
    """3D counterpart of :func:`bilinear_sample` on ``(B, k, k, k, m)`` grids."""
    return _grid_sample(grid, points, 3)
