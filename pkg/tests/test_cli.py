import json

import numpy as np
import pytest

from shapeshift.cli import FIELD_SUFFIX, main
from shapeshift.data import OccupancyGrid, load_grid, save_grid
from shapeshift.utils.constants import EXIT_IO, EXIT_OK, EXIT_USAGE


def _gen(tmp_path, name="pair", recipe="squares-disks"):
    out = tmp_path / name
    code = main(["gen-data", "--recipe", recipe, "--out", str(out), "--count", "4", "--extent", "32", "--seed", "1"])
    return code, out


def test_gen_data_writes_pair_set(tmp_path):
    code, out = _gen(tmp_path)
    assert code == EXIT_OK
    assert len(list((out / "domain1").glob("*.pgm"))) == 4
    assert (out / "domain2" / "train.txt").is_file()
    record = json.loads((out / "run_record.json").read_text())
    assert record["command"] == "gen-data" and record["status"] == "ok"


def test_unknown_recipe_is_a_usage_error(tmp_path, capsys):
    code, _ = _gen(tmp_path, recipe="stripes")
    assert code == EXIT_USAGE
    assert "shapeshift gen-data: unknown recipe 'stripes'" in capsys.readouterr().err


def test_missing_arguments_exit_with_usage():
    with pytest.raises(SystemExit) as info:
        main(["gen-data"])
    assert info.value.code == EXIT_USAGE


def test_eval_of_identical_trees(tmp_path, capsys):
    _, out = _gen(tmp_path)
    code = main(["eval", "--outputs", str(out / "domain1"), "--targets", str(out / "domain1"),
                 "--out", str(tmp_path / "report")])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "report" / "report.json").read_text())
    assert report["aggregates"]["all"] == {"iou": 1.0, "mse": 0.0}
    assert "all iou=1.000000 mse=0.000000" in capsys.readouterr().out


def test_extract_writes_contour_and_samples(tmp_path):
    axis = (np.arange(32) + 0.5) / 32
    y, x = np.meshgrid(axis, axis, indexing="ij")
    np.save(tmp_path / f"disk{FIELD_SUFFIX}", 0.8 - np.hypot(y - 0.5, x - 0.5))
    code = main(["extract", "--translate-output", str(tmp_path), "--samples", "64", "--out", str(tmp_path / "geo")])
    assert code == EXIT_OK
    assert (tmp_path / "geo" / "disk.svg").read_text().count("<path") == 1
    assert len((tmp_path / "geo" / "disk.xyz").read_text().splitlines()) == 64


def test_retrieve_prints_nearest_name(tmp_path, capsys):
    gallery = tmp_path / "gallery"
    gallery.mkdir()
    for name, lo in (("left", 0), ("middle", 4), ("right", 8)):
        cells = np.zeros((16, 16), dtype=bool)
        cells[:, lo:lo + 6] = True
        save_grid(str(gallery / f"{name}.pgm"), OccupancyGrid(cells, name))
    code = main(["retrieve", "--query", str(gallery / "middle.pgm"), "--gallery", str(gallery),
                 "--translated", str(gallery / "right.pgm"), "--out", str(tmp_path / "ret")])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "right"
    panel = load_grid(str(tmp_path / "ret" / "middle_panel.pgm"))
    assert panel.extents == [16, 5 * 16 + 4 * 2]


def test_missing_checkpoint_is_an_io_error(tmp_path, capsys):
    _, out = _gen(tmp_path)
    code = main(["translate", "--state", str(tmp_path / "absent.safetensors"), "--ae", str(tmp_path / "ae"),
                 "--in", str(out / "domain1"), "--direction", "1to2", "--out", str(tmp_path / "translated")])
    assert code == EXIT_IO
    assert "shapeshift translate:" in capsys.readouterr().err
