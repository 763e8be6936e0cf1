import math

import torch

from ... import autodiff
from ...autodiff import ops
from ...utils.errors import ShapeMismatchError
from ...utils.rng import substream


def init_params(spec):
    """Uniform in +-sqrt(1/fan_in) for every weight and bias, drawn from the "init" substream."""
    rng = substream(spec.seed, f"init.{spec.role}")
    params = {}
    for prefix, layers in (('layers', spec.layers), ('heads', spec.heads)):
        for i, layer in enumerate(layers):
            bound = math.sqrt(1.0 / layer.fan_in(spec.dims))
            for name, shape in ((f'{prefix}.{i}.weight', layer.weight_shape(spec.dims)),
                                (f'{prefix}.{i}.bias', [layer.out_channels])):
                values = rng.uniform(-bound, bound, size=shape)
                params[name] = torch.as_tensor(values, dtype=torch.get_default_dtype())
    return params


class Network:
    """Parameters plus a forward pass described by a NetSpec.

    ``params`` is a dict of plain tensors. Calling the network with
    ``params=None`` uses them as constants (frozen); passing the dict
    returned by ``graph.bind(network.params, prefix)`` makes them trainable
    inputs of the active graph.
    """

    def __init__(self, spec, params=None):
        self.spec = spec
        if params is None:
            params = init_params(spec)
        expected = spec.parameter_shapes()
        if set(params) != set(expected):
            raise ShapeMismatchError(
                f"{spec.role}: parameter names do not match the spec "
                f"(missing {sorted(set(expected) - set(params))}, extra {sorted(set(params) - set(expected))})")
        for name, shape in expected.items():
            if list(params[name].shape) != list(shape):
                raise ShapeMismatchError(f"{spec.role}: {name} has shape {list(params[name].shape)}, spec says {shape}")
        self.params = {name: autodiff.as_tensor(params[name]) for name in expected}

    def __call__(self, x, params=None):
        return self.forward(x, self.params if params is None else params)

    def forward(self, x, params):
        raise NotImplementedError

    def num_parameters(self):
        return self.spec.num_parameters()

    def named_parameters(self):
        return list(self.params.items())

    def with_params(self, params):
        return type(self)(self.spec, {name: autodiff.as_tensor(v) for name, v in params.items()})

    def zeros_like(self):
        return self.with_params({name: torch.zeros_like(v) for name, v in self.params.items()})

    def _apply_layer(self, x, layer, params, name):
        weight, bias = params[f'{name}.weight'], params[f'{name}.bias']
        if layer.kind == 'conv':
            conv = ops.conv2d if self.spec.dims == 2 else ops.conv3d
            x = conv(x, weight, bias, stride=layer.stride, padding=layer.padding)
        else:
            x = ops.linear(x, weight, bias)
        return _activate(x, layer.activation, self.spec.slope)

    def run_layers(self, x, params, layers=None, prefix='layers'):
        layers = self.spec.layers if layers is None else layers
        outputs = []
        for i, layer in enumerate(layers):
            x = self._apply_layer(x, layer, params, f'{prefix}.{i}')
            outputs.append(x)
        return outputs


def _activate(x, activation, slope):
    if activation == 'leaky_relu':
        return ops.leaky_relu(x, slope)
    if activation == 'sigmoid':
        return ops.sigmoid(x)
    if activation == 'none':
        return x
    raise ValueError(f"unknown activation {activation!r}")


def channels_first(x):
    """(B, *k, m) -> (B, m, *k)."""
    x = ops.constant(x)
    return ops.permute(x, [0, x.ndim - 1] + list(range(1, x.ndim - 1)))


def channels_last(x):
    """(B, m, *k) -> (B, *k, m)."""
    x = ops.constant(x)
    return ops.permute(x, [0] + list(range(2, x.ndim)) + [1])


def as_batch(x, dims, channels=None):
    """Accept a single grid or a batch; returns (DiffArray with batch axis, was_batched)."""
    x = ops.constant(x)
    rank = dims + (1 if channels is not None else 0)
    if x.ndim == rank:
        return ops.reshape(x, [1] + x.shape), False
    if x.ndim == rank + 1:
        return x, True
    raise ShapeMismatchError(f"expected rank {rank} or {rank + 1}, got shape {x.shape}")
