import json

import numpy as np
import pytest
import torch
from PIL import Image

from shapeshift.data import (MANIFEST_NAME, DataCollatorForOccupancy, OccupancyGrid, OccupancyPointDataset,
                             RecipeFactory, decode_rawgrid, domain_oracle, encode_rawgrid, generate_synthetic_pair,
                             load_domain_pair, load_image_domain, load_voxel_domain, read_pgm,
                             regenerate_from_manifest, save_grid, stroke_width, circularity, write_split_file)
from shapeshift.data.oracle import UNCERTAIN
from shapeshift.utils import AeConfig
from shapeshift.utils.constants import MAX_POINTS_PER_SHAPE
from shapeshift.utils.errors import DatasetError, UnknownRecipeError


def _blob(n, lo, hi, name):
    cells = np.zeros((n, n), dtype=bool)
    cells[lo:hi, lo:hi] = True
    return OccupancyGrid(cells, name)


def test_split_file_selects_and_orders_shapes(tmp_path):
    for i in range(10):
        save_grid(str(tmp_path / f"shape_{i:02d}.pgm"), _blob(16, i % 4, 8 + i % 4, f"shape_{i:02d}"))
    chosen = [f"shape_{i:02d}" for i in (9, 0, 3, 1, 7, 5, 2, 8)]
    write_split_file(str(tmp_path / "train.txt"), chosen)
    shapes = load_image_domain(str(tmp_path), str(tmp_path / "train.txt"))
    assert [g.name for g in shapes] == sorted(chosen)
    assert all(g.extents == [16, 16] for g in shapes)


def test_white_image_is_an_empty_grid(tmp_path):
    Image.fromarray(np.full((8, 8), 255, dtype=np.uint8)).save(tmp_path / "blank.pgm", format="PPM")
    grid = read_pgm(str(tmp_path / "blank.pgm"))
    assert grid.name == "blank"
    assert not grid.cells.any()


def test_dark_pixels_are_inside(tmp_path):
    pixels = np.full((4, 4), 255, dtype=np.uint8)
    pixels[1, 2] = 0
    Image.fromarray(pixels).save(tmp_path / "dot.pgm", format="PPM")
    assert np.argwhere(read_pgm(str(tmp_path / "dot.pgm")).cells).tolist() == [[1, 2]]


def test_rawgrid_encoding():
    cells = np.zeros((3, 3, 3), dtype=bool)
    cells[0, 0, 0] = cells[2, 2, 2] = True
    data = encode_rawgrid(cells)
    assert data[:4] == b"RGRD"
    assert len(data) == 6 + 3 * 4 + 4
    assert decode_rawgrid(data) == OccupancyGrid(cells)


def test_rawgrid_payload_must_match_header():
    data = encode_rawgrid(np.ones((4, 4, 4), dtype=bool))
    with pytest.raises(DatasetError):
        decode_rawgrid(data + b"\x00", "padded")
    with pytest.raises(DatasetError):
        decode_rawgrid(data[:-1], "short")
    with pytest.raises(DatasetError):
        decode_rawgrid(b"NOPE" + data[4:], "magic")


def test_voxel_domain_roundtrip(tmp_path):
    cells = np.random.default_rng(0).random((8, 8, 8)) > 0.7
    save_grid(str(tmp_path / "chair.rgrd"), OccupancyGrid(cells, "chair"))
    (loaded,) = load_voxel_domain(str(tmp_path))
    assert loaded.name == "chair"
    assert np.array_equal(loaded.cells, cells)


def test_mixed_extents_are_rejected(tmp_path):
    save_grid(str(tmp_path / "a.pgm"), _blob(16, 2, 6, "a"))
    save_grid(str(tmp_path / "b.pgm"), _blob(32, 2, 6, "b"))
    with pytest.raises(DatasetError) as info:
        load_image_domain(str(tmp_path))
    assert info.value.offenders == ["b [32, 32]"]


def test_split_entries_must_exist(tmp_path):
    save_grid(str(tmp_path / "a.pgm"), _blob(16, 2, 6, "a"))
    write_split_file(str(tmp_path / "test.txt"), ["a", "ghost"])
    with pytest.raises(DatasetError) as info:
        load_image_domain(str(tmp_path), str(tmp_path / "test.txt"))
    assert info.value.offenders == ["ghost"]


def test_thick_thin_widths_fall_in_their_bands():
    pair = generate_synthetic_pair("thick-thin", count=32, extent=64, seed=0)
    assert all(6.0 <= stroke_width(g) <= 9.0 for g in pair.domain1)
    assert all(2.0 <= stroke_width(g) <= 4.0 for g in pair.domain2)


def test_squares_and_disks_differ_in_circularity():
    pair = generate_synthetic_pair("squares-disks", count=16, extent=64, seed=1)
    assert max(circularity(g) for g in pair.domain1) < min(circularity(g) for g in pair.domain2)


def test_generation_is_reproducible(tmp_path):
    pair = generate_synthetic_pair("solid-dotted", count=6, extent=32, seed=4)
    pair.save(str(tmp_path / "a"))
    generate_synthetic_pair("solid-dotted", count=6, extent=32, seed=4).save(str(tmp_path / "b"))
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.*"))
    assert len(files) == 2 * (6 + 2) + 1
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    other = generate_synthetic_pair("solid-dotted", count=6, extent=32, seed=5)
    assert other.domain1[0] != pair.domain1[0]


def test_regenerate_from_manifest(tmp_path):
    pair = generate_synthetic_pair("thick-thin", count=4, extent=32, seed=2)
    root = pair.save(str(tmp_path))
    manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
    assert manifest["recipe"] == "thick-thin" and manifest["dims"] == 2
    again = regenerate_from_manifest(str(tmp_path / MANIFEST_NAME))
    assert again.domain1 == pair.domain1 and again.domain2 == pair.domain2
    assert again.splits == pair.splits
    domain1, domain2 = load_domain_pair(root, "train")
    assert [g.name for g in domain1] == pair.splits["domain1"]["train"]
    assert [g.name for g in domain2] == pair.splits["domain2"]["train"]


def test_splits_are_disjoint_and_complete():
    pair = generate_synthetic_pair("squares-disks", count=20, extent=32, seed=3, test_fraction=0.25)
    for domain in ("domain1", "domain2"):
        train, test = pair.splits[domain]["train"], pair.splits[domain]["test"]
        assert not set(train) & set(test)
        assert sorted(train + test) == sorted(g.name for g in pair.shapes(domain))
        assert len(test) == 5


def test_unknown_recipe():
    with pytest.raises(UnknownRecipeError, match="thick-thin"):
        RecipeFactory("stripes")
    with pytest.raises(KeyError):
        generate_synthetic_pair("stripes")


def test_oracle_labels_fresh_shapes():
    pair = generate_synthetic_pair("thick-thin", count=50, extent=64, seed=7)
    hits1 = sum(domain_oracle(g, "thick-thin") == "domain1" for g in pair.domain1)
    hits2 = sum(domain_oracle(g, "thick-thin") == "domain2" for g in pair.domain2)
    assert hits1 / 50 >= 0.99 and hits2 / 50 >= 0.99


def test_oracle_on_empty_shape_is_uncertain():
    assert domain_oracle(np.zeros((64, 64), dtype=bool), "thick-thin") == UNCERTAIN


def test_oracle_ignores_mirroring():
    pair = generate_synthetic_pair("squares-disks", count=8, extent=64, seed=8)
    for grid in pair.domain1 + pair.domain2:
        mirrored = grid.cells[:, ::-1].copy()
        assert domain_oracle(mirrored, "squares-disks") == domain_oracle(grid, "squares-disks")


@pytest.mark.slow
def test_furniture_oracles():
    for recipe in ("tall-short", "armrest"):
        pair = generate_synthetic_pair(recipe, count=10, extent=32, seed=0)
        assert all(domain_oracle(g, recipe) == "domain1" for g in pair.domain1)
        assert all(domain_oracle(g, recipe) == "domain2" for g in pair.domain2)


def test_point_dataset_pools_shapes():
    shapes = [_blob(16, 2, 10, "a"), _blob(16, 4, 12, "b")]
    dataset = OccupancyPointDataset(shapes, seed=1, max_points=64)
    assert len(dataset) == 2
    item = dataset[1]
    assert item["points"].shape == (64, 2)
    assert torch.equal(item["points"], dataset[1]["points"])
    dataset.set_epoch(1, 8)
    assert not torch.equal(item["points"], dataset[1]["points"])
    batch = DataCollatorForOccupancy()([dataset[0], dataset[1]])
    assert batch["grid"].shape == (2, 16, 16)
    assert batch["targets"].shape == (2, 64)


def test_point_dataset_needs_common_extents():
    with pytest.raises(DatasetError):
        OccupancyPointDataset([_blob(16, 2, 10, "a"), _blob(8, 2, 4, "b")])
    with pytest.raises(DatasetError):
        OccupancyPointDataset([])


def test_point_dataset_caps_points_per_shape():
    dataset = OccupancyPointDataset([_blob(128, 10, 100, "big")])
    assert dataset.points_per_shape == MAX_POINTS_PER_SHAPE == AeConfig().max_points_per_shape
    assert dataset[0]["points"].shape == (MAX_POINTS_PER_SHAPE, 2)
    with pytest.raises(ValueError):
        OccupancyPointDataset([_blob(16, 2, 10, "a")], max_points=0)
