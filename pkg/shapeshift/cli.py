"""Command-line entry point: ``shapeshift <command> ...``.

Commands hand work to each other through files only. Every command writes
``run_record.json`` into its output directory.
"""
import argparse
import csv
import logging
import os
import shutil
import sys

import numpy as np

from .autodiff import set_precision
from .data import generate_synthetic_pair, grid_suffix, load_domain, load_domain_pair, load_grid, save_grid
from .data.grid_io import GRID_SUFFIXES
from .data.dataset import SPLITS
from .eval import evaluate_translation_run, retrieval_panel, retrieve_nearest
from .extract import extract_geometry, sample_geometry_points, write_obj, write_svg, write_xyz
from .train import (TranslatorState, autoencoder_from_checkpoint, encode_dataset, evaluate_reconstruction,
                    train_ae, train_translate, translate)
from .utils import RunConfig, RunRecord, logger_setting
from .utils.constants import DIRECTIONS, DOMAIN_NAMES, EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, ISO_LEVEL
from .utils.errors import CheckpointError, DatasetError, MemoryBudgetError, NonFiniteError, UnknownRecipeError

logger = logging.getLogger(__name__)

FIELD_SUFFIX = ".field.npy"
LATENT_SUFFIX = ".latent.safetensors"


def _record_args(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def _write_geometry(stem, field, iso=ISO_LEVEL):
    """SVG contour (2D) or OBJ mesh (3D) of a field next to ``stem``; returns the geometry."""
    geometry = extract_geometry(field, iso)
    if np.asarray(field).ndim == 2:
        write_svg(stem + ".svg", geometry, size=np.asarray(field).shape[0])
    else:
        write_obj(stem + ".obj", geometry)
    return geometry


def cmd_gen_data(args):
    with RunRecord(args.out, "gen-data", _record_args(args), seed=args.seed):
        pair = generate_synthetic_pair(args.recipe, args.count, args.extent, args.seed, args.test_fraction)
        pair.save(args.out)
    logger.info(f"wrote {len(pair.domain1) + len(pair.domain2)} shapes to {args.out}")


def cmd_train_ae(args):
    config = RunConfig.from_json(args.config)
    with RunRecord(config.run.output_dir, "train-ae", _record_args(args), config, config.run.seed) as record:
        record.extra["checkpoint"] = train_ae(config, resume=args.resume)


def cmd_encode(args):
    autoencoder = autoencoder_from_checkpoint(args.ae)
    with RunRecord(args.out, "encode", _record_args(args)) as record:
        counts = {}
        for domain in DOMAIN_NAMES:
            shapes = load_domain(args.data, domain, None, autoencoder.dims)
            out_dir = os.path.join(args.out, domain)
            counts[domain] = len(encode_dataset(args.ae, shapes, out_dir))
            for split in SPLITS:
                split_file = os.path.join(args.data, domain, f"{split}.txt")
                if os.path.isfile(split_file):
                    shutil.copyfile(split_file, os.path.join(out_dir, f"{split}.txt"))
        record.extra["encoded"] = counts


def cmd_train_translate(args):
    config = RunConfig.from_json(args.config)
    with RunRecord(config.run.output_dir, "train-translate", _record_args(args), config,
                   config.run.seed) as record:
        record.extra["checkpoint"] = train_translate(config, args.ae, args.latents, resume=args.resume)


def _input_grids(path):
    if os.path.isdir(path):
        files = sorted(f for f in os.listdir(path) if f.endswith(GRID_SUFFIXES))
        return [load_grid(os.path.join(path, f)) for f in files]
    return [load_grid(path)]


def cmd_translate(args):
    state = TranslatorState.load(args.state)
    autoencoder = autoencoder_from_checkpoint(args.ae)
    os.makedirs(args.out, exist_ok=True)
    with RunRecord(args.out, "translate", _record_args(args)) as record:
        grids = _input_grids(args.input)
        for grid in grids:
            result = translate(state, autoencoder, grid, args.direction, args.res)
            stem = os.path.join(args.out, grid.name)
            save_grid(stem + grid_suffix(grid.dims), result.grid)
            np.save(stem + FIELD_SUFFIX, result.field)
            result.latent.save(stem + LATENT_SUFFIX)
            _write_geometry(stem, result.field)
        record.extra["translated"] = len(grids)


def cmd_extract(args):
    if args.field:
        fields = [args.field]
    else:
        fields = sorted(os.path.join(args.translate_output, f) for f in os.listdir(args.translate_output)
                        if f.endswith(FIELD_SUFFIX))
    os.makedirs(args.out, exist_ok=True)
    with RunRecord(args.out, "extract", _record_args(args)):
        for path in fields:
            field = np.load(path)
            name = os.path.basename(path)
            name = name[:-len(FIELD_SUFFIX)] if name.endswith(FIELD_SUFFIX) else os.path.splitext(name)[0]
            stem = os.path.join(args.out, name)
            geometry = _write_geometry(stem, field, args.iso)
            if not geometry.is_empty:
                write_xyz(stem + ".xyz", sample_geometry_points(geometry, args.samples, seed=0))
            else:
                logger.warning(f"{name}: field has no crossing at iso {args.iso}")


def cmd_eval(args):
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    with RunRecord(args.out, "eval", _record_args(args)) as record:
        report = evaluate_translation_run(args.outputs, args.targets, metrics)
        report.save(args.out)
        record.extra["aggregates"] = report.aggregates()
    for direction, values in report.aggregates().items():
        print(direction, " ".join(f"{k}={v:.6f}" for k, v in sorted(values.items())))


def cmd_retrieve(args):
    query = load_grid(args.query)
    gallery = _input_grids(args.gallery)
    with RunRecord(args.out, "retrieve", _record_args(args)) as record:
        target = load_grid(args.translated) if args.translated else query
        index = retrieve_nearest(target, gallery, args.metric)
        record.extra["nearest"] = gallery[index].name
        if args.translated:
            os.makedirs(args.out, exist_ok=True)
            training = _input_grids(args.input_gallery) if args.input_gallery else None
            retrieval_panel(query, target, gallery, os.path.join(args.out, f"{query.name}_panel.pgm"),
                            input_gallery=training)
    print(gallery[index].name)


def cmd_eval_recon(args):
    with RunRecord(args.out, "eval-recon", _record_args(args)) as record:
        shapes = [g for pair in load_domain_pair(args.data, args.split) for g in pair]
        rows = evaluate_reconstruction(args.ae, shapes, args.res)
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "reconstruction.csv"), "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=("name", "mse", "iou"))
            writer.writeheader()
            writer.writerows(rows)
        record.extra["mean_iou"] = float(np.mean([r["iou"] for r in rows])) if rows else None
        record.extra["mean_mse"] = float(np.mean([r["mse"] for r in rows])) if rows else None


def build_parser():
    parser = argparse.ArgumentParser(prog="shapeshift", description="Unpaired implicit shape translation.")
    parser.add_argument("--precision", choices=("float32", "float64"), default="float32")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic domain pair")
    p.add_argument("--recipe", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=64)
    p.add_argument("--extent", type=int, default=None)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-ae", help="train the shape autoencoder")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", default=None)
    p.set_defaults(func=cmd_train_ae)

    p = sub.add_parser("encode", help="encode every shape of a pair set into latent grids")
    p.add_argument("--ae", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train-translate", help="train both translation directions")
    p.add_argument("--config", required=True)
    p.add_argument("--ae", required=True)
    p.add_argument("--latents", required=True)
    p.add_argument("--resume", default=None)
    p.set_defaults(func=cmd_train_translate)

    p = sub.add_parser("translate", help="translate shapes with a trained state")
    p.add_argument("--state", required=True)
    p.add_argument("--ae", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--direction", choices=DIRECTIONS, required=True)
    p.add_argument("--res", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("extract", help="contours or meshes of saved fields")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--field")
    source.add_argument("--translate-output")
    p.add_argument("--iso", type=float, default=ISO_LEVEL)
    p.add_argument("--samples", type=int, default=2048)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="compare outputs with same-named targets")
    p.add_argument("--outputs", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--metrics", default="mse,iou")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("retrieve", help="nearest gallery shape by IoU or MSE")
    p.add_argument("--query", required=True)
    p.add_argument("--gallery", required=True)
    p.add_argument("--metric", choices=("iou", "mse"), default="iou")
    p.add_argument("--translated", default=None)
    p.add_argument("--input-gallery", default=None, help="training shapes searched for the query")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("eval-recon", help="autoencoder reconstruction quality")
    p.add_argument("--ae", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--res", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_recon)
    return parser


def exit_code(error):
    if isinstance(error, NonFiniteError):
        return EXIT_NUMERIC
    if isinstance(error, (CheckpointError, DatasetError, OSError)):
        return EXIT_IO
    if isinstance(error, (UnknownRecipeError, MemoryBudgetError, ValueError, KeyError)):
        return EXIT_USAGE
    raise error


def main(argv=None):
    args = build_parser().parse_args(argv)
    logger_setting()
    logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)
    set_precision(args.precision)
    try:
        args.func(args)
    except Exception as e:
        code = exit_code(e)
        print(f"shapeshift {args.command}: {e}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
