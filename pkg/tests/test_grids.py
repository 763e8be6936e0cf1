import numpy as np
import pytest

from shapeshift.data import OccupancyGrid, boundary_mask, downsample_max, resample_nearest, sample_training_points
from shapeshift.utils.errors import ShapeMismatchError


def test_empty_grid_has_no_boundary():
    assert not boundary_mask(np.zeros((8, 8), dtype=bool)).any()


def test_single_cell_marks_its_neighbourhood():
    cells = np.zeros((5, 5), dtype=bool)
    cells[2, 2] = True
    mask = boundary_mask(cells)
    assert mask.sum() == 9
    assert mask[1:4, 1:4].all()


def test_checkerboard_is_all_boundary():
    assert boundary_mask(np.array([[1, 0], [0, 1]], dtype=bool)).sum() == 4


def test_boundary_mask_3d():
    cells = np.zeros((5, 5, 5), dtype=bool)
    cells[2, 2, 2] = True
    assert boundary_mask(cells).sum() == 27


def test_solid_grid_samples_are_uniform():
    samples = sample_training_points(np.ones((16, 16), dtype=bool), 16, 100, seed=0)
    assert len(samples) == 100
    assert (samples.targets == 1).all()
    assert (samples.weights == 1).all()


def test_full_resolution_targets_match_cells():
    rng = np.random.default_rng(0)
    cells = rng.random((8, 8)) > 0.5
    samples = sample_training_points(cells, 8, 64, seed=1)
    index = np.floor(samples.points * 8).astype(int)
    assert np.array_equal(samples.targets.astype(bool), cells[index[:, 0], index[:, 1]])
    assert np.allclose(samples.points * 8 % 1, 0.5)


def test_half_plane_boundary_fraction():
    cells = np.zeros((16, 16), dtype=bool)
    cells[:, :8] = True
    samples = sample_training_points(cells, 16, 10_000, seed=2)
    fraction = np.mean(samples.weights == 2)
    assert abs(fraction - 0.5) <= 0.05
    boundary_columns = np.floor(samples.points[samples.weights == 2, 1] * 16).astype(int)
    assert set(boundary_columns) <= {6, 7, 8, 9}


def test_sampling_is_deterministic_per_seed():
    cells = np.zeros((16, 16), dtype=bool)
    cells[4:12, 4:12] = True
    a = sample_training_points(cells, 8, 50, seed=5)
    b = sample_training_points(cells, 8, 50, seed=5)
    c = sample_training_points(cells, 8, 50, seed=6)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_sampling_rejects_bad_arguments():
    cells = np.ones((16, 16), dtype=bool)
    with pytest.raises(ValueError):
        sample_training_points(cells, 16, 0, seed=0)
    with pytest.raises(ShapeMismatchError):
        sample_training_points(cells, 5, 10, seed=0)


def test_samples_iterate_as_records():
    samples = sample_training_points(np.ones((4, 4), dtype=bool), 4, 3, seed=0)
    records = list(samples)
    assert len(records) == 3
    assert records[0].target == 1.0 and records[0].p.shape == (2,)


def test_downsample_factor_one_is_identity():
    cells = np.random.default_rng(1).random((8, 8)) > 0.5
    assert downsample_max(cells, 1) == OccupancyGrid(cells)


def test_downsample_keeps_single_cell_quadrant():
    cells = np.zeros((4, 4), dtype=bool)
    cells[3, 0] = True
    coarse = downsample_max(cells, 2)
    assert coarse.extents == [2, 2]
    assert coarse.cells.sum() == 1
    assert coarse.cells[1, 0]


def test_downsample_of_solid_grid_is_solid():
    for factor in (2, 4, 8):
        assert downsample_max(np.ones((8, 8, 8), dtype=bool), factor).cells.all()


def test_downsample_needs_divisible_factor():
    with pytest.raises(ShapeMismatchError):
        downsample_max(np.ones((6, 6), dtype=bool), 4)


def test_resample_nearest_up_and_down():
    cells = np.array([[1, 0], [0, 0]], dtype=bool)
    up = resample_nearest(cells, 4)
    assert up.cells[:2, :2].all() and up.cells.sum() == 4
    assert resample_nearest(up, 2) == OccupancyGrid(cells)


def test_occupancy_grid_validation():
    with pytest.raises(ShapeMismatchError):
        OccupancyGrid(np.zeros(4))
    with pytest.raises(ValueError):
        OccupancyGrid(np.full((2, 2), 0.5))
    grid = OccupancyGrid(np.eye(3, dtype=int), "eye")
    assert grid.cells.dtype == bool
    assert grid.complement().cells.sum() == 6


@pytest.mark.parametrize("shape", [(9, 9), (6, 7, 5)])
def test_boundary_mask_ignores_which_side_is_inside(shape):
    rng = np.random.default_rng(len(shape))
    for density in (0.1, 0.5, 0.9):
        cells = rng.random(shape) < density
        assert np.array_equal(boundary_mask(cells), boundary_mask(~cells))
        grid = OccupancyGrid(cells, "g")
        assert np.array_equal(boundary_mask(grid), boundary_mask(grid.complement()))
