from . import register_network
from .base import Network
from ...autodiff import ops
from ...utils.errors import ShapeMismatchError


@register_network('decoder')
class Decoder(Network):
    """Implicit decoder: MLP over concat(code, p) ending in a sigmoid."""

    def forward(self, x, params):
        y = self.run_layers(ops.constant(x), params)[-1]
        return ops.reshape(y, y.shape[:-1])

    def decode(self, code, points, params=None):
        """Occupancy in (0, 1) for codes (..., m) at points (..., d); points are clamped to [0, 1]."""
        code, points = ops.constant(code), ops.constant(points)
        m = self.spec.in_channels - self.spec.dims
        if code.shape[-1] != m or points.shape[-1] != self.spec.dims:
            raise ShapeMismatchError(
                f"decoder expects codes of length {m} and {self.spec.dims}D points, "
                f"got {code.shape} and {points.shape}")
        if code.shape[:-1] != points.shape[:-1]:
            raise ShapeMismatchError(f"code batch {code.shape[:-1]} != point batch {points.shape[:-1]}")
        points = ops.clamp(points, 0.0, 1.0)
        return self(ops.concat([code, points], axis=-1), params)
