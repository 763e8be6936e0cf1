import csv
import hashlib
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import torch
from tqdm import tqdm

from ..autodiff import AdamState, Graph, adam_step, gradient, ops
from ..data import OccupancyGrid, as_grid
from ..extract import evaluate_field, threshold
from ..model import (Checkpoint, LatentGrid, build_network, discriminator_spec, generator_spec, load_checkpoint,
                     save_checkpoint)
from ..utils.constants import (COORDINATE_CONVENTION, CRITIC_SIGN_CONVENTION, DIRECTION_1TO2, DIRECTION_2TO1,
                               DIRECTIONS)
from ..utils.errors import NonFiniteError, ShapeMismatchError
from ..utils.logging import log, log_trainable_params
from ..utils.rng import derive_seed, substream
from .ae_trainer import autoencoder_from_checkpoint, configure_determinism
from .losses import LossBreakdown, gradient_penalty, total_translation_loss, wgan_terms
from .pretrain import pretrain_identity

logger = logging.getLogger(__name__)

TRANSLATOR_CHECKPOINT = "translator.safetensors"
TRANSLATOR_LOSS_LOG = "translator_loss.csv"
COMPONENTS = ("wgan_1to2", "gp_1to2", "fp_1to2", "wgan_2to1", "gp_2to1", "fp_2to1", "cycle")
# logged from the last critic update of a step
CRITIC_COMPONENTS = ("wgan_1to2", "gp_1to2", "wgan_2to1", "gp_2to1")
NETWORK_NAMES = ("g12", "g21", "critic1", "critic2")


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class TranslatorState:
    """Generators for both directions and one critic per target domain.

    ``critic2`` scores domain-2 codes and drives ``g12``; ``critic1`` scores
    domain-1 codes and drives ``g21``.
    """

    networks: Dict[str, object]
    optim: Dict[str, AdamState] = field(default_factory=dict)
    epoch: int = 0
    step: int = 0
    metadata: Dict[str, object] = field(default_factory=dict)

    @classmethod
    def initialize(cls, dims, m, model_args, seed=0):
        networks = {}
        for index, name in enumerate(NETWORK_NAMES):
            make_spec = generator_spec if name.startswith("g") else discriminator_spec
            width = model_args.generator_channels if name.startswith("g") else model_args.critic_channels
            spec = make_spec(dims, m, width, model_args.translator_kernel, seed=derive_seed(seed, "init", 2 + index))
            networks[name] = build_network(spec)
        return cls(networks, {name: AdamState() for name in NETWORK_NAMES})

    @classmethod
    def load(cls, path):
        checkpoint = load_checkpoint(path, kind='translator')
        meta = checkpoint.metadata
        optim = {name: checkpoint.optim.get(name, AdamState()) for name in NETWORK_NAMES}
        return cls(checkpoint.networks, optim, int(meta.get('epoch', 0)), int(meta.get('step', 0)), meta)

    def generator(self, direction):
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {', '.join(DIRECTIONS)}, got {direction!r}")
        return self.networks["g12" if direction == DIRECTION_1TO2 else "g21"]

    def save(self, path):
        return save_checkpoint(path, Checkpoint('translator', self.networks, self.metadata, self.optim))


class TranslatorTrainer:
    """WGAN-GP training of both translation directions over frozen latent codes.

    Each generator step is preceded by ``n_critic`` critic steps on freshly
    drawn batches. The autoencoder is never touched: only its latents are
    read, and its checkpoint hash is recorded in every translator checkpoint.
    """

    def __init__(self, state, latents1, latents2, config, output_dir, ae_path=None):
        self.state = state
        self.config = config
        self.output_dir = output_dir
        self.latents = (torch.as_tensor(latents1, dtype=torch.get_default_dtype()),
                        torch.as_tensor(latents2, dtype=torch.get_default_dtype()))
        if any(len(z) == 0 for z in self.latents):
            raise ValueError("translator training needs latents from both domains")
        if self.latents[0].shape[1:] != self.latents[1].shape[1:]:
            raise ShapeMismatchError(f"domain latents differ in shape: {list(self.latents[0].shape[1:])} "
                                     f"vs {list(self.latents[1].shape[1:])}")
        self.ae_path = ae_path
        self.ae_hash = file_sha256(ae_path) if ae_path else None
        self.last_critic = dict.fromkeys(CRITIC_COMPONENTS, 0.0)

    def lr_at(self, epoch):
        trans = self.config.trans
        return max(trans.learning_rate * 0.5 ** (epoch // trans.lr_halving_interval), trans.lr_floor)

    @property
    def steps_per_epoch(self):
        return math.ceil(max(len(z) for z in self.latents) / self.config.trans.batch_size)

    def _epoch_batches(self, epoch):
        size = self.config.trans.batch_size
        orders = [substream(self.config.run.seed, "batches", epoch, d).permutation(len(z))
                  for d, z in enumerate(self.latents)]
        for j in range(self.steps_per_epoch):
            yield tuple(z[torch.as_tensor(np.take(order, np.arange(j * size, j * size + min(size, len(z))),
                                                  mode='wrap'))]
                        for z, order in zip(self.latents, orders))

    def _random_batches(self, rng):
        # real and fake critic batches must match in size
        size = min([self.config.trans.batch_size] + [len(z) for z in self.latents])
        return tuple(z[torch.as_tensor(rng.choice(len(z), size=size, replace=False))]
                     for z in self.latents)

    @staticmethod
    def _check_finite(terms, what):
        for name, value in terms.items():
            if not math.isfinite(value):
                raise NonFiniteError(f"{what}: loss component {name} became non-finite", component=name)

    def _update(self, names, bound, loss, lr):
        handles = [(name, key, value) for name in names for key, value in bound[name].items()]
        grads = gradient(loss, [value for _, _, value in handles])
        for name in names:
            network = self.state.networks[name]
            group = {key: g.data for (owner, key, _), g in zip(handles, grads) if owner == name}
            new_params, self.state.optim[name] = adam_step(network.params, group, self.state.optim[name], lr,
                                                          group=name)
            self.state.networks[name] = network.with_params(new_params)

    def critic_step(self, z1, z2, lr, rng):
        nets = self.state.networks
        fake2, fake1 = nets["g12"](z1).data, nets["g21"](z2).data
        alpha = self.config.trans.alpha
        names = ("critic1", "critic2")
        with Graph() as graph:
            bound = {name: graph.bind(nets[name].params, f"{name}.") for name in names}
            critic1 = lambda z: nets["critic1"](z, bound["critic1"])
            critic2 = lambda z: nets["critic2"](z, bound["critic2"])
            terms = {
                "wgan_1to2": wgan_terms(critic2, z2, fake2)[0],
                "gp_1to2": gradient_penalty(critic2, z2, fake2, alpha, rng),
                "wgan_2to1": wgan_terms(critic1, z1, fake1)[0],
                "gp_2to1": gradient_penalty(critic1, z1, fake1, alpha, rng),
            }
            values = {name: value.item() for name, value in terms.items()}
            self._check_finite(values, "critic step")
            loss = ops.add(ops.add(terms["wgan_1to2"], terms["gp_1to2"]),
                           ops.add(terms["wgan_2to1"], terms["gp_2to1"]))
            self._update(names, bound, loss, lr)
        return values

    def generator_step(self, z1, z2, lr):
        nets = self.state.networks
        names = ("g12", "g21")
        with Graph() as graph:
            bound = {name: graph.bind(nets[name].params, f"{name}.") for name in names}
            loss, terms = total_translation_loss(
                lambda z: nets["g12"](z, bound["g12"]), lambda z: nets["g21"](z, bound["g21"]),
                nets["critic1"], nets["critic2"], z1, z2, self.config.trans, player="generator")
            values = {name: value.item() for name, value in terms.items()}
            self._check_finite(values, "generator step")
            self._update(names, bound, loss, lr)
        return values

    def training_step(self, z1, z2, lr):
        """n_critic critic updates, then one generator update; returns the logged breakdown."""
        seed, step = self.config.run.seed, self.state.step
        for c in range(self.config.trans.n_critic):
            c1, c2 = self._random_batches(substream(seed, "critic-batches", step, c))
            critic_values = self.critic_step(c1, c2, lr, substream(seed, "gp-eps", step, c))
            self.last_critic = {name: critic_values[name] for name in CRITIC_COMPONENTS}
        values = self.generator_step(z1, z2, lr)
        self.state.step += 1
        components = {name: self.last_critic[name] if name in CRITIC_COMPONENTS else values[name]
                      for name in COMPONENTS}
        return LossBreakdown(components)

    def checkpoint_metadata(self, lr):
        model = self.config.model
        return {
            'config': self.config.to_dict(),
            'epoch': self.state.epoch,
            'step': self.state.step,
            'lr': lr,
            'precision': self.config.run.precision,
            'preset': self.config.run.preset,
            'critic_kernel': model.translator_kernel,
            'sign_convention': CRITIC_SIGN_CONVENTION,
            'coordinates': COORDINATE_CONVENTION,
            'ae_checkpoint': self.ae_path,
            'ae_sha256': self.ae_hash,
        }

    def save(self, lr):
        self.state.metadata = self.checkpoint_metadata(lr)
        return self.state.save(os.path.join(self.output_dir, TRANSLATOR_CHECKPOINT))

    def train(self):
        trans = self.config.trans
        os.makedirs(self.output_dir, exist_ok=True)
        log_path = os.path.join(self.output_dir, TRANSLATOR_LOSS_LOG)
        new_log = not os.path.isfile(log_path) or self.state.epoch == 0
        fields = ("epoch", "step", "loss", "lr") + COMPONENTS
        lr = self.lr_at(self.state.epoch)
        with open(log_path, "w" if new_log else "a", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fields)
            if new_log:
                writer.writeheader()
            progress = tqdm(range(self.state.epoch, trans.epochs), desc="translator", initial=self.state.epoch,
                            total=trans.epochs, disable=not logger.isEnabledFor(logging.INFO))
            for epoch in progress:
                self.state.epoch = epoch
                lr = self.lr_at(epoch)
                for z1, z2 in self._epoch_batches(epoch):
                    breakdown = self.training_step(z1, z2, lr)
                    writer.writerow(dict(epoch=epoch, step=self.state.step, lr=lr, **breakdown.as_row()))
                f.flush()
                self.state.epoch = epoch + 1
                progress.set_postfix(loss=f"{breakdown.total:.4f}")
                logger.info(f"epoch {epoch}: " + ", ".join(f"{k} {v:.5f}" for k, v in breakdown.as_row().items()))
                if trans.save_every and self.state.epoch % trans.save_every == 0:
                    self.save(lr)
        return self.save(lr)


def warm_up_generators(state, latents1, latents2, config):
    """Optional identity warm-up of both generators on the pooled latents."""
    steps = config.trans.identity_warmup_steps
    pooled = torch.cat([torch.as_tensor(latents1), torch.as_tensor(latents2)])
    for index, name in enumerate(("g12", "g21")):
        state.networks[name] = pretrain_identity(
            state.networks[name], pooled, steps, lr=config.trans.learning_rate,
            batch_size=config.trans.batch_size, seed=derive_seed(config.run.seed, "warmup", index))
    log(f"identity warm-up: {steps} steps per generator")
    return state


def train_translator(ae_checkpoint, latents1, latents2, config, output_dir, resume=None):
    """Train both translation directions on pre-encoded latents; returns the checkpoint path.

    ``latents1``/``latents2`` are tensors (N, *k, m) produced by
    ``encode_dataset`` from ``ae_checkpoint``.
    """
    configure_determinism(config.run)
    autoencoder = autoencoder_from_checkpoint(ae_checkpoint)
    expected = autoencoder.latent_shape
    for domain, latents in (("domain1", latents1), ("domain2", latents2)):
        if list(latents.shape[1:]) != expected:
            raise ShapeMismatchError(f"{domain} latents have shape {list(latents.shape[1:])}, "
                                     f"the autoencoder produces {expected}")
    if resume:
        state = TranslatorState.load(resume)
        log(f"resuming translator training from {resume} at epoch {state.epoch}")
    else:
        state = TranslatorState.initialize(autoencoder.dims, expected[-1], config.model, seed=config.run.seed)
        if config.trans.identity_warmup_steps:
            state = warm_up_generators(state, latents1, latents2, config)
    for name, network in state.networks.items():
        log_trainable_params(network, name)
    ae_path = ae_checkpoint if isinstance(ae_checkpoint, str) else None
    trainer = TranslatorTrainer(state, latents1, latents2, config, output_dir, ae_path=ae_path)
    return trainer.train()


@dataclass
class Translation:
    latent: LatentGrid
    field: np.ndarray
    grid: OccupancyGrid


def translate(state, autoencoder, shape, direction, resolution=None):
    """encode -> generator of ``direction`` -> dense decode -> threshold at 0.5."""
    if isinstance(state, str):
        state = TranslatorState.load(state)
    if isinstance(autoencoder, str):
        autoencoder = autoencoder_from_checkpoint(autoencoder)
    generator = state.generator(direction)
    grid = as_grid(shape)
    z = autoencoder.encode(grid.as_float())
    translated = LatentGrid(generator(z).data.clone(), grid.name)
    field = evaluate_field(autoencoder, translated.values, resolution or grid.extents[0])
    return Translation(translated, field, OccupancyGrid(threshold(field), grid.name))
