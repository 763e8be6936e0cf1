from . import register_network
from .base import Network, as_batch, channels_first, channels_last
from ...autodiff import ops
from ...utils.errors import ShapeMismatchError


def _check_latent(spec, z):
    if z.shape[-1] != spec.in_channels:
        raise ShapeMismatchError(f"{spec.role} expects {spec.in_channels} channels, got latent {z.shape}")


@register_network('generator')
class Generator(Network):
    """Latent grid -> latent grid of the same shape."""

    def forward(self, z, params):
        z, batched = as_batch(z, self.spec.dims, channels=True)
        _check_latent(self.spec, z)
        y = channels_last(self.run_layers(channels_first(z), params)[-1])
        return y if batched else ops.reshape(y, y.shape[1:])


@register_network('discriminator')
class Discriminator(Network):
    """WGAN critic: one unbounded score per latent cell, (B, *k)."""

    def forward(self, z, params):
        z, batched = as_batch(z, self.spec.dims, channels=True)
        _check_latent(self.spec, z)
        y = self.run_layers(channels_first(z), params)[-1]
        y = ops.reshape(y, [y.shape[0]] + y.shape[2:])
        return y if batched else ops.reshape(y, y.shape[1:])
