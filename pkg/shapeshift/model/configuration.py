"""Architecture descriptors.

A :class:`NetSpec` fully determines a network's parameter shapes; it is
stored as JSON inside every checkpoint so a run can always be rebuilt.
"""
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import List

from ..utils.constants import LEAKY_SLOPE

ROLES = ('encoder', 'regular-encoder', 'decoder', 'generator', 'discriminator')


@dataclass
class LayerSpec:
    kind: str  # conv | linear
    in_channels: int
    out_channels: int
    kernel: int = 1
    stride: int = 1
    padding: int = 0
    activation: str = 'leaky_relu'  # leaky_relu | sigmoid | none

    def weight_shape(self, dims):
        if self.kind == 'conv':
            return [self.out_channels, self.in_channels] + [self.kernel] * dims
        return [self.out_channels, self.in_channels]

    def fan_in(self, dims):
        if self.kind == 'conv':
            return self.in_channels * self.kernel ** dims
        return self.in_channels

    def num_parameters(self, dims):
        return math.prod(self.weight_shape(dims)) + self.out_channels


@dataclass
class NetSpec:
    role: str
    dims: int
    layers: List[LayerSpec]
    in_extent: int = 0
    out_extent: int = 0
    seed: int = 0
    slope: float = LEAKY_SLOPE
    taps: List[int] = field(default_factory=list)
    heads: List[LayerSpec] = field(default_factory=list)

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown network role {self.role!r}")
        self.layers = [LayerSpec(**l) if isinstance(l, dict) else l for l in self.layers]
        self.heads = [LayerSpec(**l) if isinstance(l, dict) else l for l in self.heads]

    @property
    def in_channels(self):
        return self.layers[0].in_channels

    @property
    def out_channels(self):
        if self.heads:
            return sum(h.out_channels for h in self.heads)
        return self.layers[-1].out_channels

    def parameter_shapes(self):
        shapes = {}
        for prefix, layers in (('layers', self.layers), ('heads', self.heads)):
            for i, layer in enumerate(layers):
                shapes[f'{prefix}.{i}.weight'] = layer.weight_shape(self.dims)
                shapes[f'{prefix}.{i}.bias'] = [layer.out_channels]
        return shapes

    def num_parameters(self):
        return sum(math.prod(shape) for shape in self.parameter_shapes().values())

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, values):
        return cls(**values)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def encoder_channels(depth, m, base=16):
    """16, 32, 64, ... per stride-2 stage, capped at m."""
    return [min(base * 2 ** i, m) for i in range(depth)]


def _check_depth(n, k):
    depth = int(round(math.log2(n / k))) if n >= k >= 1 else -1
    if depth < 1 or 2 ** depth * k != n:
        raise ValueError(f"input extent {n} is not k={k} times a power of two")
    return depth


def _strided_stages(depth, m, base):
    layers, previous = [], 1
    for channels in encoder_channels(depth, m, base):
        layers.append(LayerSpec('conv', previous, channels, kernel=4, stride=2, padding=1))
        previous = channels
    return layers


def encoder_spec(dims, n, k, m, base=16, seed=0):
    """log2(n/k) stride-2 kernel-4 convs, then a 1x1 projection to m channels."""
    depth = _check_depth(n, k)
    layers = _strided_stages(depth, m, base)
    layers.append(LayerSpec('conv', layers[-1].out_channels, m, activation='none'))
    return NetSpec('encoder', dims, layers, in_extent=n, out_extent=k, seed=seed)


def regular_encoder_spec(dims, n, k, m, base=16, seed=0):
    """Same stride-2 trunk; the last four stages are pooled and mapped to m/4 each."""
    if m % 4:
        raise ValueError(f"regular encoding needs m divisible by 4, got m={m}")
    depth = _check_depth(n, k)
    if depth < 4:
        raise ValueError(f"regular encoding needs at least four encoder stages, got {depth}")
    layers = _strided_stages(depth, m, base)
    taps = list(range(depth - 4, depth))
    heads = [LayerSpec('linear', layers[t].out_channels, m // 4, activation='none') for t in taps]
    return NetSpec('regular-encoder', dims, layers, in_extent=n, out_extent=1, seed=seed,
                   taps=taps, heads=heads)


def decoder_spec(dims, m, hidden=(512, 256, 128), seed=0):
    widths = [m + dims] + list(hidden)
    layers = [LayerSpec('linear', a, b) for a, b in zip(widths[:-1], widths[1:])]
    layers.append(LayerSpec('linear', widths[-1], 1, activation='sigmoid'))
    return NetSpec('decoder', dims, layers, seed=seed)


def generator_spec(dims, m, channels=256, kernel=3, seed=0):
    """Five stride-1 convs preserving the grid extent; the last one is linear."""
    _check_odd(kernel)
    widths = [m] + [channels] * 4 + [m]
    layers = [LayerSpec('conv', a, b, kernel=kernel, padding=kernel // 2)
              for a, b in zip(widths[:-1], widths[1:])]
    layers[-1].activation = 'none'
    return NetSpec('generator', dims, layers, seed=seed)


def discriminator_spec(dims, m, channels=256, kernel=3, seed=0):
    """Four stride-1 convs ending in one unbounded score per grid cell."""
    _check_odd(kernel)
    widths = [m] + [channels] * 3 + [1]
    layers = [LayerSpec('conv', a, b, kernel=kernel, padding=kernel // 2)
              for a, b in zip(widths[:-1], widths[1:])]
    layers[-1].activation = 'none'
    return NetSpec('discriminator', dims, layers, seed=seed)


def _check_odd(kernel):
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"translator kernels must be odd to preserve the grid extent, got {kernel}")
