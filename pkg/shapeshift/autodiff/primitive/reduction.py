import torch

from . import register_primitive
from .base import Primitive
from ... import autodiff


def _ops():
    return autodiff.ops


def normalize_axes(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


def keepdims_shape(shape, axes):
    return [1 if i in axes else s for i, s in enumerate(shape)]


@register_primitive('sum')
class Sum(Primitive):
    """Sum over ``axis``; the adjoint broadcasts the upstream gradient back."""

    @staticmethod
    def forward(a, axis=None, keepdims=False):
        axes = normalize_axes(axis, a.dim())
        if not axes:
            return a.clone()
        return a.sum(dim=axes, keepdim=keepdims)

    @staticmethod
    def vjp(grad, inputs, output, needs, axis=None, keepdims=False):
        ops = _ops()
        shape = inputs[0].shape
        axes = normalize_axes(axis, len(shape))
        grad = ops.reshape(grad, keepdims_shape(shape, axes))
        return (ops.broadcast_to(grad, shape),)


@register_primitive('norm2')
class Norm2(Primitive):
    """Euclidean norm over ``axis``.

    The derivative a / |a| is taken as 0 where the norm vanishes; the
    denominator gets +1 only at those entries so the expression stays
    differentiable everywhere else.
    """

    @staticmethod
    def forward(a, axis=None, keepdims=False):
        axes = normalize_axes(axis, a.dim())
        return torch.sqrt((a * a).sum(dim=axes, keepdim=keepdims))

    @staticmethod
    def vjp(grad, inputs, output, needs, axis=None, keepdims=False):
        ops = _ops()
        a = inputs[0]
        axes = normalize_axes(axis, a.ndim)
        kept = keepdims_shape(a.shape, axes)
        norm = ops.reshape(output, kept)
        zero_mask = ops.constant((norm.data == 0).to(norm.data.dtype))
        safe = ops.add(norm, zero_mask)
        unit = ops.div(a, ops.broadcast_to(safe, a.shape))
        grad = ops.broadcast_to(ops.reshape(grad, kept), a.shape)
        return (ops.mul(grad, unit),)
