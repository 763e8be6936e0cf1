import torch

from . import register_primitive
from .base import Primitive
from ... import autodiff
from ...utils.errors import ShapeMismatchError


def _ops():
    return autodiff.ops


@register_primitive('take_rows')
class TakeRows(Primitive):
    """a[index] along the first axis; ``index`` is a fixed integer tensor of any shape."""

    @staticmethod
    def forward(a, index):
        if index.numel() and (int(index.min()) < 0 or int(index.max()) >= a.shape[0]):
            raise ShapeMismatchError(f"row index out of range for {a.shape[0]} rows")
        return a[index]

    @staticmethod
    def vjp(grad, inputs, output, needs, index):
        return (_ops().scatter_rows(grad, index, inputs[0].shape[0]),)


@register_primitive('scatter_rows')
class ScatterRows(Primitive):
    """Sum rows of ``a`` into ``num_rows`` slots given by ``index``; adjoint of take_rows."""

    @staticmethod
    def forward(a, index, num_rows):
        trailing = a.shape[index.dim():]
        out = a.new_zeros((num_rows, *trailing))
        return out.index_add_(0, index.reshape(-1), a.reshape(-1, *trailing))

    @staticmethod
    def vjp(grad, inputs, output, needs, index, num_rows):
        return (_ops().take_rows(grad, index),)
