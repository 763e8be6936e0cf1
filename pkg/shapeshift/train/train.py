import logging
import os

import torch
import transformers

from ..autodiff import set_precision
from ..data import generate_synthetic_pair, load_domain_pair
from ..model import load_latents, stack_latents
from ..utils import (AeConfig, DataArguments, ModelArguments, RunArguments, RunConfig, TransConfig, log,
                     logger_setting)
from ..utils.constants import DOMAIN_NAMES
from .ae_trainer import train_autoencoder
from .translator_trainer import train_translator

logger = logging.getLogger(__name__)


def load_training_shapes(config, split="train"):
    """(domain1, domain2) shapes from ``data.data_path`` or, failing that, the synthetic recipe."""
    data = config.data
    if data.data_path:
        return load_domain_pair(data.data_path, split, dims=config.model.dims)
    pair = generate_synthetic_pair(data.recipe, data.count, data.extent or config.model.n,
                                   config.run.seed, data.test_fraction)
    return tuple(pair.split_shapes(domain, split) for domain in DOMAIN_NAMES)


def load_latent_pair(latents_dir, split="train"):
    latents = []
    for domain in DOMAIN_NAMES:
        grids = load_latents(os.path.join(latents_dir, domain), split)
        if not grids:
            raise ValueError(f"no {split} latents under {os.path.join(latents_dir, domain)}")
        latents.append(stack_latents(grids).to(torch.get_default_dtype()))
    return tuple(latents)


def train_ae(config, resume=None):
    logger_setting(config.run.output_dir)
    set_precision(config.run.precision)
    domain1, domain2 = load_training_shapes(config)
    log(f"autoencoder data: {len(domain1)} + {len(domain2)} shapes, extent {config.model.n}")
    return train_autoencoder(list(domain1) + list(domain2), config, config.run.output_dir, resume=resume)


def train_translate(config, ae_path, latents_dir, resume=None):
    logger_setting(config.run.output_dir)
    set_precision(config.run.precision)
    latents1, latents2 = load_latent_pair(latents_dir)
    log(f"translator data: {len(latents1)} + {len(latents2)} latent grids of shape {list(latents1.shape[1:])}")
    return train_translator(ae_path, latents1, latents2, config, config.run.output_dir, resume=resume)


def train():
    # load argument
    parser = transformers.HfArgumentParser((ModelArguments, DataArguments, RunArguments, AeConfig, TransConfig))
    model_arguments, data_arguments, run_arguments, ae_config, trans_config = parser.parse_args_into_dataclasses()
    config = RunConfig(model_arguments, data_arguments, run_arguments, ae_config, trans_config)
    train_ae(config)


if __name__ == "__main__":
    train()
