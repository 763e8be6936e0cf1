from . import register_network
from .base import Network, as_batch, channels_last
from ...autodiff import ops
from ...utils.errors import ShapeMismatchError


def _check_input(spec, x):
    extents = x.shape[1:]
    if len(extents) != spec.dims or any(e != spec.in_extent for e in extents):
        raise ShapeMismatchError(
            f"{spec.role} expects {spec.dims}D input of extent {spec.in_extent}, got {extents}")


@register_network('encoder')
class Encoder(Network):
    """Occupancy grid (B, n, ..., n) -> latent grid (B, k, ..., k, m)."""

    def forward(self, x, params):
        x, batched = as_batch(x, self.spec.dims)
        _check_input(self.spec, x)
        x = ops.reshape(x, [x.shape[0], 1] + x.shape[1:])
        z = channels_last(self.run_layers(x, params)[-1])
        return z if batched else ops.reshape(z, z.shape[1:])


@register_network('regular-encoder')
class RegularEncoder(Network):
    """Flat code of four m/4 pieces, one per pooled late stage, shaped as a 1-cell latent grid."""

    def forward(self, x, params):
        spec = self.spec
        x, batched = as_batch(x, spec.dims)
        _check_input(spec, x)
        x = ops.reshape(x, [x.shape[0], 1] + x.shape[1:])
        stages = self.run_layers(x, params)
        spatial = list(range(2, 2 + spec.dims))
        pieces = []
        for j, (tap, head) in enumerate(zip(spec.taps, spec.heads)):
            pooled = ops.mean(stages[tap], axis=spatial)
            pieces.append(self._apply_layer(pooled, head, params, f'heads.{j}'))
        code = ops.concat(pieces, axis=-1)
        z = ops.reshape(code, [code.shape[0]] + [1] * spec.dims + [code.shape[-1]])
        return z if batched else ops.reshape(z, z.shape[1:])
