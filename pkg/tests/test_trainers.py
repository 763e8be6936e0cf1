import csv
import math

import numpy as np
import pytest
import torch

from shapeshift.data import OccupancyGrid, generate_synthetic_pair
from shapeshift.model import Checkpoint, ShapeAutoencoder, load_checkpoint, load_latents, save_checkpoint
from shapeshift.train import (AE_LOSS_LOG, COMPONENTS, TRANSLATOR_LOSS_LOG, AutoencoderTrainer, TranslatorState,
                              TranslatorTrainer, batch_l1, encode_dataset, evaluate_reconstruction, file_sha256,
                              train_autoencoder, train_translator, translate)
from shapeshift.utils import RunConfig
from shapeshift.utils.errors import ShapeMismatchError


def _config(**sections):
    values = {
        "model": dict(dims=2, n=16, k=2, m=8, encoder_base_channels=4, decoder_hidden=[16, 8],
                      generator_channels=8, critic_channels=8),
        "data": dict(recipe="squares-disks", count=4),
        "run": dict(seed=3, precision="float64"),
        "ae": dict(epochs=2, batch_size=4, learning_rate=1e-3, lr_halving_epoch=1, resolution_schedule=[8, 16],
                   max_points_per_shape=64, save_every=0),
        "trans": dict(epochs=2, batch_size=4, n_critic=2, save_every=0),
    }
    for section, overrides in sections.items():
        values[section] = {**values[section], **overrides}
    return RunConfig.from_dict(values)


def _shapes(count=4):
    pair = generate_synthetic_pair("squares-disks", count=count, extent=16, seed=0)
    return pair.domain1 + pair.domain2


def _read_log(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _params(path, kind):
    return {f"{net}.{key}": value for net, network in load_checkpoint(path, kind=kind).networks.items()
            for key, value in network.params.items()}


def test_autoencoder_schedules(tmp_path):
    trainer = AutoencoderTrainer(ShapeAutoencoder.from_arguments(_config().model), _shapes(),
                                 _config(ae=dict(epochs=4)), str(tmp_path))
    assert [trainer.lr_at(e) for e in range(3)] == [1e-3, 5e-4, 5e-4]
    assert [trainer.resolution_at(e) for e in range(4)] == [8, 8, 16, 16]


def test_resolution_schedule_is_cut_at_input_extent():
    config = _config(ae=dict(resolution_schedule=[8, 16, 64, 256]))
    assert config.ae_resolutions() == [8, 16]


def test_autoencoder_training_run(tmp_path, float64):
    config = _config()
    path = train_autoencoder(_shapes(), config, str(tmp_path))
    checkpoint = load_checkpoint(path, kind="autoencoder")
    assert checkpoint.metadata["epoch"] == 2
    assert checkpoint.metadata["step"] == 4
    assert checkpoint.metadata["encoding"] == "position-aware"
    rows = _read_log(tmp_path / AE_LOSS_LOG)
    assert [int(r["step"]) for r in rows] == [1, 2, 3, 4]
    assert all(math.isfinite(float(r["loss"])) for r in rows)
    assert [int(r["resolution"]) for r in rows] == [8, 8, 16, 16]


def test_autoencoder_resume_continues_step_counter(tmp_path, float64):
    first = train_autoencoder(_shapes(), _config(), str(tmp_path))
    resumed = train_autoencoder(_shapes(), _config(ae=dict(epochs=3)), str(tmp_path), resume=first)
    meta = load_checkpoint(resumed, kind="autoencoder").metadata
    assert (meta["epoch"], meta["step"]) == (3, 6)
    assert [int(r["step"]) for r in _read_log(tmp_path / AE_LOSS_LOG)] == [1, 2, 3, 4, 5, 6]


def test_autoencoder_training_is_deterministic(tmp_path, float64):
    a = _params(train_autoencoder(_shapes(), _config(), str(tmp_path / "a")), "autoencoder")
    b = _params(train_autoencoder(_shapes(), _config(), str(tmp_path / "b")), "autoencoder")
    assert a.keys() == b.keys()
    assert all(torch.equal(a[k], b[k]) for k in a)
    c = _params(train_autoencoder(_shapes(), _config(run=dict(seed=4)), str(tmp_path / "c")), "autoencoder")
    assert not all(torch.equal(a[k], c[k]) for k in a)


def _saved_autoencoder(tmp_path, config=None):
    autoencoder = ShapeAutoencoder.from_arguments((config or _config()).model, seed=1)
    path = save_checkpoint(str(tmp_path / "ae.safetensors"), Checkpoint("autoencoder", autoencoder.networks))
    return autoencoder, path


def test_encode_dataset_skips_wrong_extents(tmp_path):
    _, path = _saved_autoencoder(tmp_path)
    shapes = _shapes(2) + [OccupancyGrid(np.ones((8, 8), dtype=bool), "small")]
    written = encode_dataset(path, shapes, str(tmp_path / "latents"))
    assert len(written) == 4
    latents = load_latents(str(tmp_path / "latents"))
    assert sorted(l.name for l in latents) == sorted(g.name for g in shapes[:4])
    assert all(list(l.values.shape) == [2, 2, 8] for l in latents)


def test_reconstruction_report(tmp_path):
    _, path = _saved_autoencoder(tmp_path)
    rows = evaluate_reconstruction(path, _shapes(1), resolution=8)
    assert [r["name"] for r in rows] == ["domain1_0000", "domain2_0000"]
    assert all(0.0 <= r["mse"] <= 1.0 and 0.0 <= r["iou"] <= 1.0 for r in rows)


def _translator(config, n=6, seed=0):
    gen = torch.Generator().manual_seed(seed)
    z1, z2 = torch.randn(n, 2, 2, 8, generator=gen), torch.randn(n, 2, 2, 8, generator=gen)
    state = TranslatorState.initialize(2, 8, config.model, seed=config.run.seed)
    return state, z1, z2


def test_translator_learning_rate_schedule(tmp_path):
    config = _config()
    state, z1, z2 = _translator(config)
    trainer = TranslatorTrainer(state, z1, z2, config, str(tmp_path))
    assert [trainer.lr_at(e) for e in (0, 99, 100, 200, 300, 1000)] == [2e-3, 2e-3, 1e-3, 5e-4, 5e-4, 5e-4]


def test_translator_step_breakdown(tmp_path, float64):
    config = _config()
    state, z1, z2 = _translator(config)
    trainer = TranslatorTrainer(state, z1, z2, config, str(tmp_path))
    before = {k: v.clone() for k, v in state.networks["critic2"].params.items()}
    breakdown = trainer.training_step(z1[:4], z2[:4], 1e-3)
    assert tuple(breakdown.components) == COMPONENTS
    assert breakdown.first_nonfinite() is None
    assert breakdown.total == pytest.approx(sum(breakdown.components.values()), rel=1e-6)
    assert breakdown.components["gp_1to2"] >= 0.0
    assert state.step == 1
    assert state.optim["critic2"].step == 2 and state.optim["g12"].step == 1
    assert any(not torch.equal(before[k], v) for k, v in state.networks["critic2"].params.items())


def test_translator_training_is_deterministic(tmp_path, float64):
    logs = []
    for run in ("a", "b"):
        config = _config(run=dict(output_dir=str(tmp_path / run)))
        state, z1, z2 = _translator(config)
        TranslatorTrainer(state, z1, z2, config, str(tmp_path / run)).train()
        logs.append((tmp_path / run / TRANSLATOR_LOSS_LOG).read_text())
    assert logs[0] == logs[1]
    rows = list(csv.DictReader(logs[0].splitlines()))
    assert len(rows) == 2 * 2
    assert set(COMPONENTS) <= set(rows[0])


def test_translator_rejects_bad_inputs(tmp_path):
    config = _config()
    state, z1, _ = _translator(config)
    with pytest.raises(ValueError):
        state.generator("3to1")
    with pytest.raises(ShapeMismatchError):
        TranslatorTrainer(state, z1, torch.randn(4, 2, 2, 4), config, str(tmp_path))
    with pytest.raises(ValueError):
        TranslatorTrainer(state, z1, torch.zeros(0, 2, 2, 8), config, str(tmp_path))


def test_train_translator_records_autoencoder_hash(tmp_path, float64):
    _, ae_path = _saved_autoencoder(tmp_path)
    with open(ae_path, "rb") as f:
        ae_bytes = f.read()
    config = _config(trans=dict(epochs=1, identity_warmup_steps=2))
    _, z1, z2 = _translator(config)
    path = train_translator(ae_path, z1, z2, config, str(tmp_path / "trans"))
    meta = load_checkpoint(path, kind="translator").metadata
    assert meta["ae_sha256"] == file_sha256(ae_path)
    assert meta["epoch"] == 1 and meta["critic_kernel"] == 3
    with open(ae_path, "rb") as f:
        assert f.read() == ae_bytes
    with pytest.raises(ShapeMismatchError):
        train_translator(ae_path, torch.randn(4, 4, 4, 8), torch.randn(4, 4, 4, 8), config, str(tmp_path / "bad"))


def test_translate_output_extents(tmp_path):
    config = _config()
    autoencoder, _ = _saved_autoencoder(tmp_path, config)
    state, _, _ = _translator(config)
    shape = _shapes(1)[0]
    result = translate(state, autoencoder, shape, "1to2")
    assert result.grid.extents == [16, 16] and result.grid.name == shape.name
    assert list(result.latent.values.shape) == [2, 2, 8]
    upsampled = translate(state, autoencoder, shape, "2to1", resolution=32)
    assert upsampled.field.shape == (32, 32)
    assert np.array_equal(upsampled.grid.cells, upsampled.field > 0.5)


def test_translating_a_domain_onto_itself_stays_close(tmp_path, float64):
    config = _config(trans=dict(epochs=20))
    state, z, _ = _translator(config, n=8)
    initial = [batch_l1(state.networks[name](z), z).item() for name in ("g12", "g21")]
    TranslatorTrainer(state, z, z.clone(), config, str(tmp_path)).train()
    shuffled = z[torch.as_tensor(np.roll(np.arange(len(z)), 1))]
    unrelated = batch_l1(shuffled, z).item()
    for name, before in zip(("g12", "g21"), initial):
        after = batch_l1(state.networks[name](z), z).item()
        assert after <= unrelated
        assert after < before
