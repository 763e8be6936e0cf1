import logging

import torch

from ..autodiff import Graph, adam_step, gradient, ops
from ..autodiff.optim import AdamState
from ..utils.errors import NonFiniteError
from ..utils.rng import substream
from .losses import batch_l1

logger = logging.getLogger(__name__)


def pretrain_identity(generator, latents, steps, lr=1e-3, batch_size=32, seed=0):
    """Supervised warm-up pulling a generator towards the identity map.

    ``latents`` is a tensor (N, *k, m). Returns a new generator; the input is
    left untouched.
    """
    latents = torch.as_tensor(latents, dtype=torch.get_default_dtype())
    rng = substream(seed, "identity-warmup")
    params, state = generator.params, AdamState()
    for step in range(steps):
        index = rng.choice(len(latents), size=min(batch_size, len(latents)), replace=False)
        batch = latents[torch.as_tensor(index, dtype=torch.long)]
        with Graph() as graph:
            bound = graph.bind(params, "generator.")
            batch_codes = ops.constant(batch)
            loss = batch_l1(generator(batch_codes, bound), batch_codes)
            grads = gradient(loss, list(bound.values()))
        if not torch.isfinite(loss.data).all():
            raise NonFiniteError("identity warm-up diverged", component="identity")
        params, state = adam_step(params, dict(zip(bound, (g.data for g in grads))), state, lr, group="generator")
        if step % 100 == 0:
            logger.debug(f"identity warm-up step {step}: loss {loss.item():.6f}")
    return generator.with_params(params)
