"""Training objectives for the autoencoder and the latent translator.

Critics are passed as callables mapping a latent batch (B, *k, m) to
per-cell scores (B, *k); a higher score means "looks like the target
domain". Everything here is written with DiffArray ops so the losses can
be differentiated with respect to whatever parameters the callables close
over.
"""
import contextlib
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import torch

from ..autodiff import Graph, current_graph, gradient, ops
from ..utils.constants import DIRECTION_1TO2, DIRECTION_2TO1


def recon_loss(predictions, targets, weights):
    """Weighted squared error: mean(((pred - target) * weight) ** 2)."""
    predictions = ops.constant(predictions)
    if predictions.numel == 0:
        raise ValueError("reconstruction loss of an empty batch")
    return ops.mean(ops.square(ops.mul(ops.sub(predictions, targets), weights)))


def critic_scores(critic, latents):
    """Per-sample critic score: mean over the critic's cells, shape (B,)."""
    scores = ops.constant(critic(latents))
    if scores.ndim == 1:
        return scores
    return ops.mean(scores, axis=list(range(1, scores.ndim)))


def wgan_terms(critic, real, fake):
    """Return ``(critic_term, generator_term)``.

    The critic minimizes mean D(fake) - mean D(real); the generator minimizes
    -mean D(fake).
    """
    if ops.constant(real).shape[0] == 0 or ops.constant(fake).shape[0] == 0:
        raise ValueError("WGAN terms of an empty batch")
    fake_score = ops.mean(critic_scores(critic, fake))
    real_score = ops.mean(critic_scores(critic, real))
    return ops.sub(fake_score, real_score), ops.neg(fake_score)


def _interpolate(real, fake, rng=None, eps=None):
    real, fake = ops.constant(real).data, ops.constant(fake).data
    if real.shape != fake.shape:
        raise ValueError(f"real {list(real.shape)} and fake {list(fake.shape)} batches differ")
    batch = real.shape[0]
    if eps is None:
        rng = rng if rng is not None else np.random.default_rng()
        eps = rng.random(batch)
    eps = torch.as_tensor(eps, dtype=real.dtype).reshape([batch] + [1] * (real.dim() - 1))
    return eps * real + (1 - eps) * fake


def gradient_penalty(critic, real, fake, alpha=10.0, rng=None, eps=None):
    """alpha * mean_b (||grad_x D(x_hat_b)|| - 1) ** 2 on random interpolates.

    x_hat = eps * real + (1 - eps) * fake with one eps per sample, drawn from
    ``rng`` unless given. x_hat is a fresh graph input, so no gradient flows
    back into whatever produced ``fake``. When called inside an active graph
    the penalty stays differentiable with respect to the critic parameters.
    """
    x_hat_value = _interpolate(real, fake, rng, eps)
    graph = current_graph()
    scope = contextlib.nullcontext(graph) if graph is not None else Graph()
    with scope as graph:
        x_hat = graph.input(f"gradient_penalty.x_hat.{len(graph)}", x_hat_value)
        # Samples are independent, so d(sum_b score_b)/d x_hat_b is sample b's gradient.
        total = ops.sum(critic_scores(critic, x_hat))
        (grad,) = gradient(total, [x_hat], as_graph=True)
        norms = ops.norm2(grad, axis=list(range(1, grad.ndim)))
        return ops.scale(ops.mean(ops.square(ops.sub(norms, 1.0))), alpha)


def batch_l1(a, b):
    """Mean over the batch axis of the summed absolute difference."""
    diff = ops.abs(ops.sub(a, b))
    return ops.mean(ops.sum(diff, axis=list(range(1, diff.ndim))))


def feature_preservation_loss(generator, latents):
    """Batch mean of the L1 distance between G(z) and z for target-domain codes."""
    latents = ops.constant(latents)
    return batch_l1(generator(latents), latents)


def cycle_loss(g12, g21, z1, z2):
    """Round-trip L1 in both directions: E|g21(g12(z1)) - z1| + E|g12(g21(z2)) - z2|."""
    z1, z2 = ops.constant(z1), ops.constant(z2)
    return ops.add(batch_l1(g21(g12(z1)), z1), batch_l1(g12(g21(z2)), z2))


@dataclass
class LossBreakdown:
    """Weighted loss components; ``total`` is their sum."""

    components: Dict[str, float] = field(default_factory=dict)

    @property
    def total(self):
        return float(sum(self.components.values()))

    def as_row(self):
        row = {"loss": self.total}
        row.update(self.components)
        return row

    def first_nonfinite(self):
        for name, value in self.components.items():
            if not np.isfinite(value):
                return name
        return None


def _direction_terms(generator, critic, source, target, weights, rng, suffix, player):
    fake = generator(source)
    wgan, adversarial = wgan_terms(critic, target, fake)
    if player == "critic":
        terms = {f"wgan_{suffix}": wgan,
                 f"gp_{suffix}": gradient_penalty(critic, target, fake, alpha=weights.alpha, rng=rng)}
    else:
        terms = {f"adv_{suffix}": adversarial}
    terms[f"fp_{suffix}"] = ops.scale(feature_preservation_loss(generator, target), weights.beta)
    return terms


def total_translation_loss(g12, g21, critic1, critic2, z1, z2, weights, rng=None, player="critic"):
    """Full translator objective on one batch of each domain.

    ``g12``/``g21`` map domain 1 to 2 and back, ``critic2`` judges domain-2
    codes and ``critic1`` domain-1 codes. ``weights`` carries ``alpha``,
    ``beta`` and ``gamma``. Returns ``(total, components)`` where components
    maps a name to an already weighted DiffArray and total is their sum.

    With ``player="generator"`` each WGAN term and its penalty are replaced
    by the generator's side, ``adv_* = -mean D(fake)``; the penalty has no
    generator gradient and is left out.
    """
    if player not in ("critic", "generator"):
        raise ValueError(f"player must be 'critic' or 'generator', got {player!r}")
    components = {}
    components.update(_direction_terms(g12, critic2, z1, z2, weights, rng, DIRECTION_1TO2, player))
    components.update(_direction_terms(g21, critic1, z2, z1, weights, rng, DIRECTION_2TO1, player))
    components["cycle"] = ops.scale(cycle_loss(g12, g21, z1, z2), weights.gamma)
    total = None
    for value in components.values():
        total = value if total is None else ops.add(total, value)
    return total, components
