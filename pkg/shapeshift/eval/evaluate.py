"""Filename-matched evaluation of translation outputs against reference shapes."""
import csv
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from tqdm import tqdm

from ..data.grid_io import GRID_SUFFIXES, load_grid
from ..data.grids import resample_nearest
from ..extract import extract_geometry, sample_geometry_points
from ..utils.constants import DIRECTIONS, SURFACE_SAMPLE_COUNT
from .metrics import iou, mse, one_sided_chamfer

logger = logging.getLogger(__name__)

BOTH = "both"
ALL = "all"


def _surface_points(grid, seed):
    geometry = extract_geometry(grid.as_float(np.float64))
    return sample_geometry_points(geometry, SURFACE_SAMPLE_COUNT, seed)


def cd_out_to_ref(output, reference, seed=0):
    """One-sided Chamfer distance Output -> Reference on surface samples."""
    return one_sided_chamfer(_surface_points(output, seed), _surface_points(reference, seed))


def cd_ref_to_out(output, reference, seed=0):
    """One-sided Chamfer distance Reference -> Output on surface samples."""
    return one_sided_chamfer(_surface_points(reference, seed), _surface_points(output, seed))


EVAL_METRICS = {
    "mse": mse,
    "iou": iou,
    "cd_out_to_ref": cd_out_to_ref,
    "cd_ref_to_out": cd_ref_to_out,
}


@dataclass
class EvalReport:
    records: List[Dict] = field(default_factory=list)
    unmatched: List[str] = field(default_factory=list)

    def add(self, direction, name, metric, value):
        self.records.append(dict(direction=direction, name=name, metric=metric, value=float(value)))

    def aggregates(self):
        """Mean per direction and metric, plus the mean over directions when there are several."""
        grouped = {}
        for r in self.records:
            grouped.setdefault(r["direction"], {}).setdefault(r["metric"], []).append(r["value"])
        means = {d: {m: float(np.mean(v)) for m, v in metrics.items()} for d, metrics in grouped.items()}
        if len(means) > 1:
            metrics = sorted({m for d in means.values() for m in d})
            means[BOTH] = {m: float(np.mean([d[m] for d in means.values() if m in d])) for m in metrics}
        return means

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.csv"), "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=("direction", "name", "metric", "value"))
            writer.writeheader()
            writer.writerows(self.records)
        with open(os.path.join(out_dir, "report.json"), "w") as f:
            json.dump({"aggregates": self.aggregates(), "unmatched": self.unmatched}, f, indent=2, sort_keys=True)
            f.write("\n")
        return out_dir


def _grid_files(directory):
    return {os.path.splitext(name)[0]: os.path.join(directory, name)
            for name in sorted(os.listdir(directory)) if name.endswith(GRID_SUFFIXES)}


def _direction_dirs(outputs_dir, targets_dir):
    split = [d for d in DIRECTIONS if os.path.isdir(os.path.join(outputs_dir, d))]
    if not split:
        return [(ALL, outputs_dir, targets_dir)]
    pairs = []
    for d in split:
        target = os.path.join(targets_dir, d)
        pairs.append((d, os.path.join(outputs_dir, d), target if os.path.isdir(target) else targets_dir))
    return pairs


def evaluate_translation_run(outputs_dir, targets_dir, metrics=("mse", "iou")):
    """Compare every output grid with the same-named target grid.

    Outputs may be split into ``1to2``/``2to1`` subdirectories; each is then
    reported as its own direction. Files without a counterpart are logged and
    listed in the report.
    """
    unknown = [m for m in metrics if m not in EVAL_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; expected some of {sorted(EVAL_METRICS)}")
    report = EvalReport()
    for direction, out_dir, tgt_dir in _direction_dirs(outputs_dir, targets_dir):
        outputs, targets = _grid_files(out_dir), _grid_files(tgt_dir)
        for name in sorted(set(outputs) ^ set(targets)):
            side = "output" if name in outputs else "target"
            logger.warning(f"{direction}: {side} {name} has no counterpart")
            report.unmatched.append(f"{direction}/{side}/{name}")
        for index, name in enumerate(tqdm(sorted(set(outputs) & set(targets)), desc=f"eval {direction}",
                                          disable=not logger.isEnabledFor(logging.INFO))):
            output, target = load_grid(outputs[name]), load_grid(targets[name])
            if output.extents != target.extents and output.dims == target.dims:
                logger.debug(f"{name}: resampling output {output.extents} to {target.extents}")
                output = resample_nearest(output, target.extents[0])
            for metric in metrics:
                measure = EVAL_METRICS[metric]
                if not metric.startswith("cd_"):
                    report.add(direction, name, metric, measure(output, target))
                    continue
                try:
                    report.add(direction, name, metric, measure(output, target, seed=index))
                except ValueError as e:
                    logger.warning(f"{direction}/{name}: {metric} skipped ({e})")
    return report
