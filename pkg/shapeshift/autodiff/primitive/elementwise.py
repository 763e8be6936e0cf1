import torch

from . import register_primitive
from .base import Primitive, check_same_shape
from ... import autodiff


def _ops():
    return autodiff.ops


@register_primitive('add')
class Add(Primitive):
    """a + b; d/da = d/db = 1."""

    @staticmethod
    def forward(a, b):
        check_same_shape('add', a, b)
        return a + b

    @staticmethod
    def vjp(grad, inputs, output, needs):
        return grad, grad


@register_primitive('sub')
class Sub(Primitive):
    """a - b; d/da = 1, d/db = -1."""

    @staticmethod
    def forward(a, b):
        check_same_shape('sub', a, b)
        return a - b

    @staticmethod
    def vjp(grad, inputs, output, needs):
        return grad, (_ops().neg(grad) if needs[1] else None)


@register_primitive('mul')
class Mul(Primitive):
    """a * b; d/da = b, d/db = a."""

    @staticmethod
    def forward(a, b):
        check_same_shape('mul', a, b)
        return a * b

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        a, b = inputs
        return (ops.mul(grad, b) if needs[0] else None,
                ops.mul(grad, a) if needs[1] else None)


@register_primitive('div')
class Div(Primitive):
    """a / b; d/da = 1/b, d/db = -a/b^2 = -out/b."""

    @staticmethod
    def forward(a, b):
        check_same_shape('div', a, b)
        return a / b

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        a, b = inputs
        grad_a = ops.div(grad, b) if needs[0] else None
        grad_b = ops.neg(ops.div(ops.mul(grad, output), b)) if needs[1] else None
        return grad_a, grad_b


@register_primitive('neg')
class Neg(Primitive):
    @staticmethod
    def forward(a):
        return -a

    @staticmethod
    def vjp(grad, inputs, output, needs):
        return (_ops().neg(grad),)


@register_primitive('scale')
class Scale(Primitive):
    """a * c for a Python constant c; derivative c."""

    @staticmethod
    def forward(a, factor):
        return a * factor

    @staticmethod
    def vjp(grad, inputs, output, needs, factor):
        return (_ops().scale(grad, factor),)


@register_primitive('square')
class Square(Primitive):
    """a^2; derivative 2a."""

    @staticmethod
    def forward(a):
        return a * a

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        return (ops.scale(ops.mul(grad, inputs[0]), 2.0),)


@register_primitive('sqrt')
class Sqrt(Primitive):
    """sqrt(a); derivative 1 / (2 sqrt(a))."""

    @staticmethod
    def forward(a):
        return torch.sqrt(a)

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        return (ops.div(grad, ops.scale(output, 2.0)),)


@register_primitive('abs')
class Abs(Primitive):
    """|a|; derivative sign(a) (0 at 0)."""

    @staticmethod
    def forward(a):
        return torch.abs(a)

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        return (ops.mul(grad, ops.constant(torch.sign(inputs[0].data))),)


@register_primitive('leaky_relu')
class LeakyRelu(Primitive):
    """a if a > 0 else slope * a; derivative 1 or slope (piecewise constant)."""

    @staticmethod
    def forward(a, slope):
        return torch.where(a > 0, a, a * slope)

    @staticmethod
    def vjp(grad, inputs, output, needs, slope):
        ops = _ops()
        a = inputs[0].data
        mask = torch.where(a > 0, torch.ones_like(a), torch.full_like(a, slope))
        return (ops.mul(grad, ops.constant(mask)),)


@register_primitive('sigmoid')
class Sigmoid(Primitive):
    """1 / (1 + exp(-a)); derivative s (1 - s)."""

    @staticmethod
    def forward(a):
        return torch.sigmoid(a)

    @staticmethod
    def vjp(grad, inputs, output, needs):
        ops = _ops()
        one_minus = ops.sub(ops.constant(torch.ones_like(output.data)), output)
        return (ops.mul(grad, ops.mul(output, one_minus)),)


@register_primitive('clamp')
class Clamp(Primitive):
    """min(max(a, lo), hi); derivative 1 inside [lo, hi], 0 outside."""

    @staticmethod
    def forward(a, lo, hi):
        return torch.clamp(a, min=lo, max=hi)

    @staticmethod
    def vjp(grad, inputs, output, needs, lo, hi):
        ops = _ops()
        a = inputs[0].data
        mask = ((a >= lo) & (a <= hi)).to(a.dtype)
        return (ops.mul(grad, ops.constant(mask)),)
