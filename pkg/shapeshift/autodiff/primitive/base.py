from ...utils.errors import ShapeMismatchError


class Primitive:
    """A differentiable operation.

    ``forward`` maps raw tensors to a raw tensor. ``vjp`` receives the
    upstream gradient, the operands and the output as DiffArrays and returns
    one gradient per operand (``None`` where ``needs`` is false). ``vjp`` is
    written with DiffArray operations only, so a recorded backward pass is
    itself differentiable.
    """

    name = None

    @staticmethod
    def forward(*values, **attrs):
        raise NotImplementedError

    @staticmethod
    def vjp(grad, inputs, output, needs, **attrs):
        raise NotImplementedError


def check_same_shape(name, a, b):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{name} expects equal shapes, got {list(a.shape)} and {list(b.shape)}")
