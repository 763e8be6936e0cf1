import torch

from . import register_primitive
from .base import Primitive
from ... import autodiff
from ...utils.errors import ShapeMismatchError


def _ops():
    return autodiff.ops


def reduce_to_shape(value, shape):
    """Sum ``value`` over the axes along which ``shape`` was broadcast."""
    shape = tuple(shape)
    extra = value.dim() - len(shape)
    if extra < 0:
        raise ShapeMismatchError(f"cannot reduce {list(value.shape)} to {list(shape)}")
    if extra:
        value = value.sum(dim=tuple(range(extra)))
    axes = tuple(i for i, (s, t) in enumerate(zip(value.shape, shape)) if t == 1 and s != 1)
    if axes:
        value = value.sum(dim=axes, keepdim=True)
    if tuple(value.shape) != shape:
        raise ShapeMismatchError(f"cannot reduce {list(value.shape)} to {list(shape)}")
    return value


@register_primitive('reshape')
class Reshape(Primitive):
    @staticmethod
    def forward(a, shape):
        try:
            return a.reshape(tuple(shape))
        except RuntimeError as e:
            raise ShapeMismatchError(str(e)) from e

    @staticmethod
    def vjp(grad, inputs, output, needs, shape):
        return (_ops().reshape(grad, inputs[0].shape),)


@register_primitive('permute')
class Permute(Primitive):
    @staticmethod
    def forward(a, dims):
        if sorted(dims) != list(range(a.dim())):
            raise ShapeMismatchError(f"permutation {list(dims)} does not match rank {a.dim()}")
        return a.permute(*dims).contiguous()

    @staticmethod
    def vjp(grad, inputs, output, needs, dims):
        inverse = [0] * len(dims)
        for i, d in enumerate(dims):
            inverse[d] = i
        return (_ops().permute(grad, inverse),)


@register_primitive('broadcast_to')
class BroadcastTo(Primitive):
    """Numpy-style broadcast; the adjoint sums over the broadcast axes."""

    @staticmethod
    def forward(a, shape):
        try:
            return torch.broadcast_to(a, tuple(shape)).contiguous()
        except RuntimeError as e:
            raise ShapeMismatchError(str(e)) from e

    @staticmethod
    def vjp(grad, inputs, output, needs, shape):
        return (_ops().sum_to(grad, inputs[0].shape),)


@register_primitive('sum_to')
class SumTo(Primitive):
    @staticmethod
    def forward(a, shape):
        return reduce_to_shape(a, shape)

    @staticmethod
    def vjp(grad, inputs, output, needs, shape):
        return (_ops().broadcast_to(grad, inputs[0].shape),)


@register_primitive('concat')
class Concat(Primitive):
    @staticmethod
    def forward(*arrays, axis):
        try:
            return torch.cat(arrays, dim=axis)
        except RuntimeError as e:
            raise ShapeMismatchError(str(e)) from e

    @staticmethod
    def vjp(grad, inputs, output, needs, axis):
        ops = _ops()
        axis = axis % output.ndim
        grads, start = [], 0
        for x, need in zip(inputs, needs):
            stop = start + x.shape[axis]
            if need:
                index = (slice(None),) * axis + (slice(start, stop),)
                grads.append(ops.getitem(grad, index))
            else:
                grads.append(None)
            start = stop
        return tuple(grads)


@register_primitive('getitem')
class GetItem(Primitive):
    """Basic indexing (ints and slices); the adjoint embeds into zeros."""

    @staticmethod
    def forward(a, index):
        return a[index].contiguous()

    @staticmethod
    def vjp(grad, inputs, output, needs, index):
        return (_ops().embed(grad, inputs[0].shape, index),)


@register_primitive('embed')
class Embed(Primitive):
    """zeros(shape) with ``a`` written at ``index``; adjoint of getitem."""

    @staticmethod
    def forward(a, shape, index):
        out = a.new_zeros(tuple(shape))
        try:
            out[index] = a
        except RuntimeError as e:
            raise ShapeMismatchError(str(e)) from e
        return out

    @staticmethod
    def vjp(grad, inputs, output, needs, shape, index):
        return (_ops().getitem(grad, index),)
