"""Encoder + implicit decoder, the frozen backbone of translation."""
from ..autodiff import ops
from ..utils.errors import ShapeMismatchError
from ..utils.rng import derive_seed
from .configuration import decoder_spec, encoder_spec, regular_encoder_spec
from .latent import LatentGrid
from .network import build_network
from .network.base import as_batch


def sample_latent(latent, points):
    """Interpolate codes from a latent batch (B, *k, m) at points (B, N, d)."""
    latent = ops.constant(latent)
    dims = latent.ndim - 2
    if dims == 2:
        return ops.bilinear_sample(latent, points)
    if dims == 3:
        return ops.trilinear_sample(latent, points)
    raise ShapeMismatchError(f"latent batch must have 2 or 3 spatial axes, got shape {latent.shape}")


class ShapeAutoencoder:
    def __init__(self, encoder, decoder):
        if encoder.spec.dims != decoder.spec.dims:
            raise ShapeMismatchError("encoder and decoder disagree on dims")
        self.encoder = encoder
        self.decoder = decoder

    @classmethod
    def from_arguments(cls, model_args, seed=0):
        make_encoder = regular_encoder_spec if model_args.encoding == 'regular' else encoder_spec
        encoder = build_network(make_encoder(
            model_args.dims, model_args.n, model_args.k, model_args.m,
            base=model_args.encoder_base_channels, seed=derive_seed(seed, "init", 0)))
        decoder = build_network(decoder_spec(
            model_args.dims, model_args.m, model_args.decoder_hidden, seed=derive_seed(seed, "init", 1)))
        return cls(encoder, decoder)

    @property
    def dims(self):
        return self.encoder.spec.dims

    @property
    def encoding(self):
        return 'regular' if self.encoder.spec.role == 'regular-encoder' else 'position-aware'

    @property
    def latent_shape(self):
        spec = self.encoder.spec
        return [spec.out_extent] * spec.dims + [spec.out_channels]

    @property
    def networks(self):
        return {'encoder': self.encoder, 'decoder': self.decoder}

    def encode(self, grids, params=None):
        return self.encoder(grids, None if params is None else params['encoder'])

    def decode_field(self, latent, points, params=None):
        """decode(interpolate(latent, p), p) for every query point."""
        latent, batched = as_batch(latent, self.dims, channels=True)
        points = ops.constant(points)
        if not batched:
            points = ops.reshape(points, [1] + points.shape)
        codes = sample_latent(latent, points)
        values = self.decoder.decode(codes, points, None if params is None else params['decoder'])
        return values if batched else ops.reshape(values, values.shape[1:])

    def __call__(self, grids, points, params=None):
        return self.decode_field(self.encode(grids, params), points, params)

    def encode_grid(self, grid, name=""):
        """Encode one occupancy grid into a stored LatentGrid (no graph)."""
        z = self.encode(grid)
        return LatentGrid(z.data.clone(), name)
