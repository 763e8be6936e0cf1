"""Functional Adam over named parameter dicts."""
import logging
from dataclasses import dataclass, field
from typing import Dict

import torch

from .array import as_tensor

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    step: int = 0
    exp_avg: Dict[str, torch.Tensor] = field(default_factory=dict)
    exp_avg_sq: Dict[str, torch.Tensor] = field(default_factory=dict)

    def state_dict(self, prefix=""):
        tensors = {}
        for name, value in self.exp_avg.items():
            tensors[f"{prefix}exp_avg.{name}"] = value
        for name, value in self.exp_avg_sq.items():
            tensors[f"{prefix}exp_avg_sq.{name}"] = value
        return tensors

    @classmethod
    def from_state_dict(cls, tensors, step, prefix=""):
        state = cls(step=int(step))
        for key, value in tensors.items():
            if not key.startswith(prefix):
                continue
            kind, _, name = key[len(prefix):].partition(".")
            if kind == "exp_avg":
                state.exp_avg[name] = value
            elif kind == "exp_avg_sq":
                state.exp_avg_sq[name] = value
        return state


def adam_step(params, grads, state, lr, betas=(0.9, 0.999), eps=1e-8, group="params"):
    """One Adam update; returns ``(new_params, new_state)`` and never mutates its inputs.

    If any gradient in the group is non-finite the whole step is skipped and
    the inputs are returned unchanged.
    """
    if set(params) != set(grads):
        raise ValueError(f"{group}: parameter and gradient names differ")
    grads = {name: as_tensor(g) for name, g in grads.items()}
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ValueError(f"{group}: gradient for {name} has shape {list(g.shape)}, "
                             f"parameter has {list(params[name].shape)}")
    bad = sorted(name for name, g in grads.items() if not torch.isfinite(g).all())
    if bad:
        logger.warning(f"skipping Adam step for {group}: non-finite gradient in {', '.join(bad)}")
        return params, state

    beta1, beta2 = betas
    step = state.step + 1
    bias1 = 1 - beta1 ** step
    bias2 = 1 - beta2 ** step
    new_params, exp_avg, exp_avg_sq = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        m = state.exp_avg.get(name, torch.zeros_like(p)) * beta1 + g * (1 - beta1)
        v = state.exp_avg_sq.get(name, torch.zeros_like(p)) * beta2 + g * g * (1 - beta2)
        new_params[name] = p - lr * (m / bias1) / (torch.sqrt(v / bias2) + eps)
        exp_avg[name], exp_avg_sq[name] = m, v
    return new_params, AdamState(step=step, exp_avg=exp_avg, exp_avg_sq=exp_avg_sq)
