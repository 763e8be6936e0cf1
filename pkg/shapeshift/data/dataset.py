import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
import torch
from torch.utils.data import Dataset

from ..utils.constants import DOMAIN_NAMES, MAX_POINTS_PER_SHAPE
from ..utils.errors import DatasetError
from ..utils.rng import derive_seed, substream
from .grid_io import PGM_SUFFIX, RAWGRID_SUFFIX, grid_suffix, load_grid, save_grid
from .grids import sample_training_points
from .recipe import RecipeFactory

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SPLITS = ("train", "test")


@dataclass
class DomainPairSet:
    """Two unpaired shape collections with their train/test name lists."""

    domain1: List = field(default_factory=list)
    domain2: List = field(default_factory=list)
    splits: Dict[str, Dict[str, List[str]]] = field(default_factory=dict)
    manifest: Dict = field(default_factory=dict)

    def shapes(self, domain):
        return self.domain1 if domain == DOMAIN_NAMES[0] else self.domain2

    def split_shapes(self, domain, split):
        names = set(self.splits[domain][split])
        return [g for g in self.shapes(domain) if g.name in names]

    def save(self, root):
        """Write one directory per domain (grids + split files) and the manifest."""
        os.makedirs(root, exist_ok=True)
        for domain in DOMAIN_NAMES:
            domain_dir = os.path.join(root, domain)
            os.makedirs(domain_dir, exist_ok=True)
            for grid in self.shapes(domain):
                save_grid(os.path.join(domain_dir, grid.name + grid_suffix(grid.dims)), grid)
            for split in SPLITS:
                write_split_file(os.path.join(domain_dir, f"{split}.txt"), self.splits[domain][split])
        with open(os.path.join(root, MANIFEST_NAME), "w") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True)
            f.write("\n")
        return root


def make_splits(names, test_fraction, seed, domain_index):
    names = sorted(names)
    order = substream(seed, "split", domain_index).permutation(len(names))
    n_test = int(round(len(names) * test_fraction))
    test = sorted(names[i] for i in order[:n_test])
    train = sorted(names[i] for i in order[n_test:])
    return {"train": train, "test": test}


def generate_synthetic_pair(recipe, count=64, extent=None, seed=0, test_fraction=0.25):
    maker = RecipeFactory(recipe)
    extent = extent or maker.default_extent
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    domain1, domain2 = maker.generate(count, extent, seed)
    splits = {
        domain: make_splits([g.name for g in shapes], test_fraction, seed, d)
        for d, (domain, shapes) in enumerate(zip(DOMAIN_NAMES, (domain1, domain2)))
    }
    manifest = {
        "source": "synthetic",
        "recipe": recipe,
        "dims": maker.dims,
        "count": count,
        "extent": extent,
        "seed": seed,
        "test_fraction": test_fraction,
        "params": maker.params(),
    }
    return DomainPairSet(domain1, domain2, splits, manifest)


def regenerate_from_manifest(manifest):
    if isinstance(manifest, str):
        with open(manifest) as f:
            manifest = json.load(f)
    if manifest.get("source") != "synthetic":
        raise DatasetError("only synthetic manifests can be regenerated", [manifest.get("source")])
    return generate_synthetic_pair(manifest["recipe"], manifest["count"], manifest["extent"],
                                   manifest["seed"], manifest["test_fraction"])


def read_split_file(path):
    with open(path) as f:
        return [line.strip() for line in f if line.strip()]


def write_split_file(path, names):
    with open(path, "w") as f:
        f.write("".join(f"{name}\n" for name in names))


def _load_domain(directory, split_file, suffix, dims):
    if not os.path.isdir(directory):
        raise DatasetError("domain directory does not exist", [directory])
    available = {os.path.splitext(f)[0]: f for f in os.listdir(directory) if f.endswith(suffix)}
    if split_file is not None:
        names = read_split_file(split_file)
        missing = [name for name in names if name not in available]
        if missing:
            raise DatasetError(f"split {split_file} names files missing from {directory}", missing)
    else:
        names = list(available)
    shapes = [load_grid(os.path.join(directory, available[name])) for name in sorted(names)]
    wrong_dims = [g.name for g in shapes if g.dims != dims]
    if wrong_dims:
        raise DatasetError(f"expected {dims}D grids", wrong_dims)
    if shapes:
        common = shapes[0].extents
        offenders = [f"{g.name} {g.extents}" for g in shapes if g.extents != common]
        if offenders:
            raise DatasetError(f"mixed extents (first shape has {common})", offenders)
    return shapes


def load_image_domain(directory, split_file=None):
    """2D PGM shapes listed in ``split_file`` (all files when None), in name order."""
    return _load_domain(directory, split_file, PGM_SUFFIX, 2)


def load_voxel_domain(directory, split_file=None):
    """3D RAWGRID shapes listed in ``split_file`` (all files when None), in name order."""
    return _load_domain(directory, split_file, RAWGRID_SUFFIX, 3)


def load_domain(root, domain, split=None, dims=2):
    directory = os.path.join(root, domain)
    split_file = os.path.join(directory, f"{split}.txt") if split else None
    if split_file and not os.path.isfile(split_file):
        raise DatasetError("split file does not exist", [split_file])
    loader = load_image_domain if dims == 2 else load_voxel_domain
    return loader(directory, split_file)


def load_domain_pair(root, split="train", dims=None):
    """(domain1 shapes, domain2 shapes) of a pair set on disk; dims come from the manifest when present."""
    if dims is None:
        manifest_path = os.path.join(root, MANIFEST_NAME)
        dims = 2
        if os.path.isfile(manifest_path):
            with open(manifest_path) as f:
                dims = json.load(f).get("dims", 2)
    return tuple(load_domain(root, domain, split, dims) for domain in DOMAIN_NAMES)


class OccupancyPointDataset(Dataset):
    """Pooled shapes of both domains with freshly sampled query points per epoch.

    Domain labels are dropped; item ``i`` depends only on the shape, the
    epoch and the seed.
    """

    def __init__(self, shapes, seed=0, max_points=MAX_POINTS_PER_SHAPE, boundary_fraction=0.5):
        super(OccupancyPointDataset, self).__init__()
        if not shapes:
            raise DatasetError("autoencoder training needs at least one shape")
        if max_points < 1:
            raise ValueError(f"max_points must be positive, got {max_points}")
        extents = {tuple(g.extents) for g in shapes}
        if len(extents) != 1:
            raise DatasetError("shapes must share extents", sorted(str(e) for e in extents))
        self.shapes = list(shapes)
        self.seed = seed
        self.max_points = max_points
        self.boundary_fraction = boundary_fraction
        self.epoch = 0
        self.resolution = self.shapes[0].extents[0]

    def set_epoch(self, epoch, resolution):
        self.epoch = epoch
        self.resolution = resolution

    @property
    def points_per_shape(self):
        return min(self.max_points, self.resolution ** self.shapes[0].dims)

    def __len__(self):
        return len(self.shapes)

    def __getitem__(self, i) -> Dict[str, torch.Tensor]:
        grid = self.shapes[i]
        samples = sample_training_points(
            grid, self.resolution, self.points_per_shape,
            derive_seed(self.seed, "sampling", self.epoch, i), self.boundary_fraction)
        dtype = torch.get_default_dtype()
        return dict(
            grid=torch.as_tensor(grid.cells, dtype=dtype),
            points=torch.as_tensor(samples.points, dtype=dtype),
            targets=torch.as_tensor(samples.targets, dtype=dtype),
            weights=torch.as_tensor(samples.weights, dtype=dtype),
        )


@dataclass
class DataCollatorForOccupancy(object):
    """Stack per-shape samples into batch tensors."""

    def __call__(self, instances: Sequence[Dict]) -> Dict[str, torch.Tensor]:
        return {key: torch.stack([instance[key] for instance in instances])
                for key in ("grid", "points", "targets", "weights")}


def make_ae_data_module(shapes, ae_config, seed=0):
    """Make dataset and collator for autoencoder training."""
    train_dataset = OccupancyPointDataset(shapes, seed=seed, max_points=ae_config.max_points_per_shape,
                                          boundary_fraction=ae_config.boundary_fraction)
    data_collator = DataCollatorForOccupancy()
    return dict(train_dataset=train_dataset, data_collator=data_collator)
