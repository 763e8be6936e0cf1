import torch

from . import register_primitive
from .base import Primitive
from ... import autodiff
from ...utils.errors import ShapeMismatchError


def _ops():
    return autodiff.ops


def _swap_last(ops, x):
    dims = list(range(x.ndim))
    dims[-1], dims[-2] = dims[-2], dims[-1]
    return ops.permute(x, dims)


@register_primitive('matmul')
class Matmul(Primitive):
    """a @ b with batch broadcasting; grads g @ b^T and a^T @ g (summed over broadcast batch axes)."""

    @staticmethod
    def forward(a, b):
        if a.dim() < 2 or b.dim() < 2 or a.shape[-1] != b.shape[-2]:
            raise ShapeMismatchError(f"matmul of {list(a.shape)} and {list(b.shape)}")
        return torch.matmul(a, b)

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        a, b = inputs
        grad_a = grad_b = None
        if needs[0]:
            grad_a = ops.sum_to(ops.matmul(grad, _swap_last(ops, b)), a.shape)
        if needs[1]:
            grad_b = ops.sum_to(ops.matmul(_swap_last(ops, a), grad), b.shape)
        return grad_a, grad_b
