import csv
import logging
import os

import numpy as np
import torch
from torch.utils.data import DataLoader
from tqdm import tqdm

from ..autodiff import AdamState, Graph, adam_step, gradient
from ..data import make_ae_data_module, resample_nearest
from ..eval.metrics import iou, mse
from ..extract import evaluate_field, threshold
from ..model import Checkpoint, ShapeAutoencoder, load_checkpoint, save_checkpoint
from ..utils.constants import COORDINATE_CONVENTION
from ..utils.errors import NonFiniteError
from ..utils.logging import log, log_trainable_params
from ..utils.rng import derive_seed
from .losses import recon_loss

logger = logging.getLogger(__name__)

AE_CHECKPOINT = "autoencoder.safetensors"
AE_LOSS_LOG = "ae_loss.csv"
LOSS_FIELDS = ("epoch", "step", "loss", "lr", "resolution")


def autoencoder_from_checkpoint(checkpoint):
    if isinstance(checkpoint, str):
        checkpoint = load_checkpoint(checkpoint, kind='autoencoder')
    return ShapeAutoencoder(checkpoint.networks['encoder'], checkpoint.networks['decoder'])


def configure_determinism(run_args):
    if run_args.deterministic:
        torch.use_deterministic_algorithms(True)
        torch.set_num_threads(1)


class AutoencoderTrainer:
    """Fixed-length Adam training of encoder + decoder on pooled domains.

    Both networks are updated as separate parameter groups; a non-finite
    gradient skips its group. A non-finite loss aborts the run before
    anything is written, so the last checkpoint on disk stays the last good
    one.
    """

    def __init__(self, autoencoder, shapes, config, output_dir, optim=None, epoch=0, step=0):
        self.autoencoder = autoencoder
        self.config = config
        self.output_dir = output_dir
        self.optim = optim or {name: AdamState() for name in autoencoder.networks}
        self.epoch = epoch
        self.step = step
        data_module = make_ae_data_module(shapes, config.ae, seed=config.run.seed)
        self.train_dataset = data_module['train_dataset']
        self.data_collator = data_module['data_collator']

    @classmethod
    def from_checkpoint(cls, path, shapes, config, output_dir):
        checkpoint = load_checkpoint(path, kind='autoencoder')
        meta = checkpoint.metadata
        log(f"resuming autoencoder training from {path} at epoch {meta.get('epoch', 0)}")
        return cls(autoencoder_from_checkpoint(checkpoint), shapes, config, output_dir,
                   optim=checkpoint.optim, epoch=int(meta.get('epoch', 0)), step=int(meta.get('step', 0)))

    def lr_at(self, epoch):
        lr = self.config.ae.learning_rate
        return lr * 0.5 if epoch >= self.config.ae.lr_halving_epoch else lr

    def resolution_at(self, epoch):
        schedule = self.config.ae_resolutions()
        stage = min(epoch * len(schedule) // max(self.config.ae.epochs, 1), len(schedule) - 1)
        return schedule[stage]

    def get_train_dataloader(self, epoch):
        run = self.config.run
        generator = torch.Generator()
        generator.manual_seed(derive_seed(run.seed, "shuffle", epoch))
        return DataLoader(
            self.train_dataset,
            batch_size=self.config.ae.batch_size,
            shuffle=True,
            generator=generator,
            num_workers=0 if run.deterministic else run.num_workers,
            collate_fn=self.data_collator,
        )

    def training_step(self, batch, lr):
        networks = self.autoencoder.networks
        with Graph() as graph:
            params = {name: graph.bind(net.params, f"{name}.") for name, net in networks.items()}
            predictions = self.autoencoder(batch['grid'], batch['points'], params)
            loss = recon_loss(predictions, batch['targets'], batch['weights'])
            if not torch.isfinite(loss.data).all():
                raise NonFiniteError(
                    f"reconstruction loss became non-finite at epoch {self.epoch} step {self.step}",
                    component="recon")
            handles = [(name, key, value) for name, bound in params.items() for key, value in bound.items()]
            grads = gradient(loss, [value for _, _, value in handles])

        updated = {}
        for name, net in networks.items():
            group = {key: g.data for (owner, key, _), g in zip(handles, grads) if owner == name}
            new_params, self.optim[name] = adam_step(net.params, group, self.optim[name], lr, group=name)
            updated[name] = net.with_params(new_params)
        self.autoencoder = ShapeAutoencoder(updated['encoder'], updated['decoder'])
        self.step += 1
        return loss.item()

    def checkpoint(self):
        return Checkpoint(
            'autoencoder',
            self.autoencoder.networks,
            metadata={
                'config': self.config.to_dict(),
                'epoch': self.epoch,
                'step': self.step,
                'lr': self.lr_at(self.epoch),
                'precision': self.config.run.precision,
                'preset': self.config.run.preset,
                'encoding': self.autoencoder.encoding,
                'coordinates': COORDINATE_CONVENTION,
            },
            optim=self.optim,
        )

    def save(self, path=None):
        path = path or os.path.join(self.output_dir, AE_CHECKPOINT)
        return save_checkpoint(path, self.checkpoint())

    def train(self):
        ae_config = self.config.ae
        os.makedirs(self.output_dir, exist_ok=True)
        log_path = os.path.join(self.output_dir, AE_LOSS_LOG)
        new_log = not os.path.isfile(log_path) or self.epoch == 0
        with open(log_path, "w" if new_log else "a", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=LOSS_FIELDS)
            if new_log:
                writer.writeheader()
            progress = tqdm(range(self.epoch, ae_config.epochs), desc="autoencoder", initial=self.epoch,
                            total=ae_config.epochs, disable=not logger.isEnabledFor(logging.INFO))
            for epoch in progress:
                self.epoch = epoch
                lr, resolution = self.lr_at(epoch), self.resolution_at(epoch)
                self.train_dataset.set_epoch(epoch, resolution)
                losses = []
                for batch in self.get_train_dataloader(epoch):
                    loss = self.training_step(batch, lr)
                    losses.append(loss)
                    writer.writerow(dict(epoch=epoch, step=self.step, loss=loss, lr=lr, resolution=resolution))
                f.flush()
                self.epoch = epoch + 1
                progress.set_postfix(loss=f"{np.mean(losses):.5f}", res=resolution)
                logger.info(f"epoch {epoch}: mean loss {np.mean(losses):.6f} (lr {lr:g}, resolution {resolution})")
                if ae_config.save_every and self.epoch % ae_config.save_every == 0:
                    self.save()
        return self.save()


def train_autoencoder(shapes, config, output_dir, resume=None):
    """Train the shape autoencoder on ``shapes`` (both domains pooled) and return the checkpoint path."""
    configure_determinism(config.run)
    if resume:
        trainer = AutoencoderTrainer.from_checkpoint(resume, shapes, config, output_dir)
    else:
        autoencoder = ShapeAutoencoder.from_arguments(config.model, seed=config.run.seed)
        trainer = AutoencoderTrainer(autoencoder, shapes, config, output_dir)
    for name, network in trainer.autoencoder.networks.items():
        log_trainable_params(network, name)
    return trainer.train()


def encode_dataset(checkpoint, shapes, out_dir):
    """Write one latent file per shape; shapes whose extents do not fit the encoder are skipped.

    Returns the written paths.
    """
    autoencoder = autoencoder_from_checkpoint(checkpoint)
    expected = autoencoder.encoder.spec.in_extent
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for grid in shapes:
        if grid.dims != autoencoder.dims or any(e != expected for e in grid.extents):
            logger.error(f"skipping {grid.name}: extents {grid.extents} do not match the encoder "
                         f"({autoencoder.dims}D, extent {expected})")
            continue
        latent = autoencoder.encode_grid(grid.as_float(), grid.name)
        path = os.path.join(out_dir, f"{grid.name}.safetensors")
        latent.save(path)
        paths.append(path)
    log(f"encoded {len(paths)} of {len(shapes)} shapes into {out_dir}")
    return paths


def evaluate_reconstruction(checkpoint, shapes, resolution=None):
    """Per-shape MSE and IoU of the thresholded reconstruction against the input at ``resolution``."""
    autoencoder = autoencoder_from_checkpoint(checkpoint)
    rows = []
    for grid in tqdm(shapes, desc="reconstruction", disable=not logger.isEnabledFor(logging.INFO)):
        res = resolution or grid.extents[0]
        latent = autoencoder.encode_grid(grid.as_float(), grid.name)
        field = evaluate_field(autoencoder, latent.values, res)
        target = resample_nearest(grid, res)
        output = threshold(field)
        rows.append(dict(name=grid.name, mse=mse(output, target), iou=iou(output, target)))
    return rows
