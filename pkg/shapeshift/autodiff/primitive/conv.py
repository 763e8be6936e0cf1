"""Strided convolution and its two adjoints.

The three primitives close under differentiation: the adjoint of each one
is expressed with the other two, so any number of backward passes can be
recorded. Layout is channels-first, ``(B, C, *spatial)`` with 2 or 3
spatial axes; weights are ``(C_out, C_in, *kernel)``. Bias is added by the
caller with a broadcast add.
"""
import torch
import torch.nn.functional as F

from . import register_primitive
from .base import Primitive
from ... import autodiff
from ...utils.errors import ShapeMismatchError

_CONV = {2: F.conv2d, 3: F.conv3d}
_CONV_INPUT = {2: torch.nn.grad.conv2d_input, 3: torch.nn.grad.conv3d_input}
_CONV_WEIGHT = {2: torch.nn.grad.conv2d_weight, 3: torch.nn.grad.conv3d_weight}


def _ops():
    return autodiff.ops


def _check(x, w, dims):
    if dims not in _CONV:
        raise ShapeMismatchError(f"convolution supports 2 or 3 spatial axes, got {dims}")
    if x.dim() != dims + 2 or w.dim() != dims + 2:
        raise ShapeMismatchError(
            f"conv{dims}d expects rank-{dims + 2} input and weight, got {list(x.shape)} and {list(w.shape)}")
    if x.shape[1] != w.shape[1]:
        raise ShapeMismatchError(f"conv{dims}d: input has {x.shape[1]} channels, weight expects {w.shape[1]}")


@register_primitive('conv')
class Conv(Primitive):
    """y = conv(x, w); dy/dx is conv_input_grad, dy/dw is conv_weight_grad."""

    @staticmethod
    def forward(x, w, stride, padding, dims):
        _check(x, w, dims)
        try:
            return _CONV[dims](x, w, stride=stride, padding=padding)
        except RuntimeError as e:
            raise ShapeMismatchError(str(e)) from e

    @staticmethod
    def vjp(grad, inputs, output, needs, stride, padding, dims):
        ops = _ops()
        x, w = inputs
        attrs = dict(stride=stride, padding=padding, dims=dims)
        grad_x = ops.conv_input_grad(grad, w, x.shape, **attrs) if needs[0] else None
        grad_w = ops.conv_weight_grad(x, grad, w.shape, **attrs) if needs[1] else None
        return grad_x, grad_w


@register_primitive('conv_input_grad')
class ConvInputGrad(Primitive):
    """Transposed convolution of ``g`` with ``w`` back to ``input_shape``; bilinear in (g, w)."""

    @staticmethod
    def forward(g, w, input_shape, stride, padding, dims):
        return _CONV_INPUT[dims](list(input_shape), w, g, stride=stride, padding=padding)

    @staticmethod
    def vjp(grad, inputs, output, needs, input_shape, stride, padding, dims):
        ops = _ops()
        g, w = inputs
        attrs = dict(stride=stride, padding=padding, dims=dims)
        grad_g = ops.conv(grad, w, **attrs) if needs[0] else None
        grad_w = ops.conv_weight_grad(grad, g, w.shape, **attrs) if needs[1] else None
        return grad_g, grad_w


@register_primitive('conv_weight_grad')
class ConvWeightGrad(Primitive):
    """Correlation of input ``x`` with output gradient ``g``; bilinear in (x, g)."""

    @staticmethod
    def forward(x, g, weight_shape, stride, padding, dims):
        return _CONV_WEIGHT[dims](x, list(weight_shape), g, stride=stride, padding=padding)

    @staticmethod
    def vjp(grad, inputs, output, needs, weight_shape, stride, padding, dims):
        ops = _ops()
        x, g = inputs
        attrs = dict(stride=stride, padding=padding, dims=dims)
        grad_x = ops.conv_input_grad(g, grad, x.shape, **attrs) if needs[0] else None
        grad_g = ops.conv(x, grad, **attrs) if needs[1] else None
        return grad_x, grad_g
