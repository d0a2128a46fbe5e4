"""Experiment runner.

An experiment is a list of cells, one per (grid value, seed). Each cell
builds its own environment and trainer from the config and derives every
random stream from its seed, so cells can run in any process and in any
order. Their rows are written in cell order.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from reward_profiling import __version__
from reward_profiling.harness.config import SWEEP
from reward_profiling.harness.metrics import inter_round_variance, seed_curves
from reward_profiling.harness.results import (RoundsSink, ensure_dir, summary_rows, write_derived, write_failures,
                                              write_manifest, write_sweep_summary)
from reward_profiling.profiling import ProfiledTrainer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cell:
    index: int
    seed: int
    axis: str | None = None
    value: object = None

    @property
    def key(self):
        return self.index, self.seed

    @property
    def label(self):
        if self.axis is None:
            return f"seed={self.seed}"
        return f"{self.axis}={self.value},seed={self.seed}"


@dataclass(frozen=True)
class CellResult:
    cell: Cell
    records: list
    error: str | None = None


@dataclass
class ExperimentResult:
    records: list
    metrics: list
    failures: list
    paths: list


def experiment_cells(cfg):
    if cfg.mode != SWEEP:
        return [Cell(0, seed) for seed in cfg.seeds]
    axis, values = cfg.grid
    return [Cell(i, seed, axis, value) for i, value in enumerate(values) for seed in cfg.seeds]


def run_cell(cfg, cell, record_wall_time=False):
    """Run one cell; any exception is captured on the result."""
    try:
        prof = cfg.profiling_for(cell.axis, cell.value)
        env = cfg.make_env()
        trainer = ProfiledTrainer(env, cfg.algo, prof, cell.seed, record_wall_time=record_wall_time)
        return CellResult(cell, trainer.run())
    except Exception as e:
        return CellResult(cell, [], f"{type(e).__name__}: {e}")


def _cell_results(cfg, cells, workers, record_wall_time):
    """Yield results in cell order, whatever order the workers finish in."""
    if workers <= 1 or len(cells) == 1:
        for cell in cells:
            yield run_cell(cfg, cell, record_wall_time)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_cell, cfg, cell, record_wall_time) for cell in cells]
        for future in futures:
            yield future.result()


def _group_dir(cfg, cell):
    # eval_rollouts and lambda are not rounds.csv columns, so each value gets its own directory
    if cell.axis in ("eval_rollouts", "lambda"):
        return os.path.join(cfg.out, f"{cell.axis}_{cell.value}")
    return cfg.out


def _sweep_rows(axis, value, metrics, records):
    curves = seed_curves(records)
    steps = {}
    for record in records:
        steps.setdefault((record.env, record.algo, record.variant), []).append(record.eval_steps)
    rows = []
    for metric, row in zip(metrics, summary_rows(metrics)):
        key = (metric.env, metric.algo, metric.variant)
        variances = [inter_round_variance(curve) for curve in curves[key].values()]
        rows.append([axis, str(value)] + row + [repr(float(np.mean(steps[key]))), repr(float(np.mean(variances)))])
    return rows


def run_experiment(cfg, workers=1, record_wall_time=False):
    """Run every cell of ``cfg`` and write the result files under ``cfg.out``."""
    cells = experiment_cells(cfg)
    logger.info("running %d cells (%s on %s, variant %s) with %d worker(s)", len(cells), cfg.algo.kind, cfg.env,
                cfg.profiling.variant, workers)
    ensure_dir(cfg.out)
    manifest = {**cfg.as_manifest(), "package_version": __version__}
    sinks, failures, all_records = {}, [], []
    for result in _cell_results(cfg, cells, workers, record_wall_time):
        cell = result.cell
        out_dir = _group_dir(cfg, cell)
        if out_dir not in sinks:
            sinks[out_dir] = (RoundsSink(out_dir), cell)
        if result.error is not None:
            logger.warning("cell %s failed: %s", cell.label, result.error)
            failures.append((cell.label, cell.seed, result.error))
            continue
        sinks[out_dir][0].write(result.records)
        all_records.extend(result.records)
        logger.info("cell %s finished: %d rounds", cell.label, len(result.records))

    paths, metrics, sweep_rows = [], [], []
    for out_dir, (sink, first_cell) in sinks.items():
        group_metrics = write_derived(out_dir, sink.records) if sink.records else []
        group_manifest = dict(manifest)
        if out_dir != cfg.out:
            group_manifest[f"grid_{first_cell.axis}"] = first_cell.value
        write_manifest(out_dir, group_manifest)
        metrics.extend(group_metrics)
        paths.append(out_dir)
        if cfg.mode == SWEEP and first_cell.axis in ("eval_rollouts", "lambda"):
            sweep_rows.extend(_sweep_rows(first_cell.axis, first_cell.value, group_metrics, sink.records))
    if cfg.mode == SWEEP and cfg.grid[0] == "variant":
        for metric in metrics:
            sweep_rows.extend(_sweep_rows("variant", metric.variant, [metric],
                                          [r for r in all_records if r.variant == metric.variant]))
    if cfg.mode == SWEEP:
        write_sweep_summary(cfg.out, sweep_rows)
        if cfg.out not in sinks:
            write_manifest(cfg.out, manifest)
    if failures:
        write_failures(cfg.out, failures)
    logger.info("results written to %s", cfg.out)
    return ExperimentResult(all_records, metrics, failures, paths)
