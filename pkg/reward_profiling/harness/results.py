"""Result files of an experiment directory.

``rounds.csv`` is the primary output; ``summary.csv`` and ``curves.csv`` are
derived from it and can be recomputed with ``report``. ``manifest.env``
records the configuration in the same ``key=value`` grammar the config
files use. Every writer emits ``\\n`` line endings and ``repr`` floats, so
reruns of the same configuration are byte-identical.
"""
import csv
import io
import logging
import os
from dataclasses import dataclass

from dotenv import dotenv_values

from reward_profiling.harness.metrics import summarize
from reward_profiling.models import CURVE_COLUMNS, ROUND_COLUMNS, SUMMARY_COLUMNS, RoundRecord
from reward_profiling.utils.errors import ResultsIOError
from reward_profiling.utils.serializer import serialize_doc, serialize_value

logger = logging.getLogger(__name__)

ROUNDS_FILE = "rounds.csv"
SUMMARY_FILE = "summary.csv"
CURVES_FILE = "curves.csv"
MANIFEST_FILE = "manifest.env"
FAILURES_FILE = "failures.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.csv"

FAILURE_COLUMNS = ("cell", "seed", "error")
SWEEP_COLUMNS = ("axis", "value") + SUMMARY_COLUMNS + ("mean_eval_steps_per_round", "inter_round_var")

FORMULAS = {
    "formula_required_rollouts": "ceil(B^2/(2*eps^2)*ln(2*T/delta)); T->3T for tp",
    "formula_return_range": "B=(r_max-r_min)*(1-gamma^H)/(1-gamma)",
    "formula_variance_reduction_pct": "100*(1-mean(var_variant)/mean(var_vanilla)) over per-round across-seed var",
    "formula_rounds_to_95": "first round with trailing-3 mean >= 0.95*max(per-round mean); empty if never",
    "formula_final_return": "selected j_hat of the last round, mean and population std over seeds",
}

INT_FIELDS = frozenset(("seed", "round", "env_steps"))
FLOAT_FIELDS = frozenset(("j_hat_old", "j_hat_new", "j_hat_mix", "lambda", "oracle_j", "wall_ms"))


def format_csv(columns, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def _write_text(path, text, mode="w"):
    try:
        with open(path, mode, encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise ResultsIOError(f"Failed to write results to {path}. {e}") from e
    return path


def _read_text(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as e:
        raise ResultsIOError(f"Failed to read results from {path}. {e}") from e


def ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ResultsIOError(f"Failed to create results directory {path}. {e}") from e
    return path


def summary_rows(metrics):
    return [serialize_doc(m, SUMMARY_COLUMNS) for m in metrics]


def curve_rows(metrics):
    return [[m.env, m.algo, m.variant, str(p.round), serialize_value(p.mean), serialize_value(p.var)]
            for m in metrics for p in m.curve]


class RoundsSink:
    """Appends round rows to ``rounds.csv`` as cells finish, in the order they are handed over."""

    def __init__(self, out_dir):
        self.path = os.path.join(ensure_dir(out_dir), ROUNDS_FILE)
        _write_text(self.path, format_csv(ROUND_COLUMNS, []))
        self.records = []

    def write(self, records):
        rows = [serialize_doc(r, ROUND_COLUMNS) for r in records]
        text = format_csv(ROUND_COLUMNS, rows).split("\n", 1)[1]
        _write_text(self.path, text, mode="a")
        self.records.extend(records)


def write_manifest(out_dir, values):
    merged = {**values, **FORMULAS}
    lines = [f"{key}={serialize_value(value) if not isinstance(value, str) else value}"
             for key, value in sorted(merged.items())]
    return _write_text(os.path.join(ensure_dir(out_dir), MANIFEST_FILE), "\n".join(lines) + "\n")


def write_failures(out_dir, failures):
    rows = [[str(cell), str(seed), error] for cell, seed, error in failures]
    return _write_text(os.path.join(ensure_dir(out_dir), FAILURES_FILE), format_csv(FAILURE_COLUMNS, rows))


def write_derived(out_dir, records):
    """Write summary.csv and curves.csv; return the MetricsRecords."""
    metrics = summarize(records)
    _write_text(os.path.join(out_dir, SUMMARY_FILE), format_csv(SUMMARY_COLUMNS, summary_rows(metrics)))
    _write_text(os.path.join(out_dir, CURVES_FILE), format_csv(CURVE_COLUMNS, curve_rows(metrics)))
    return metrics


def write_results(records, out_dir, manifest=None, failures=()):
    """Write every result file for ``records`` into ``out_dir`` at once."""
    sink = RoundsSink(out_dir)
    sink.write(records)
    metrics = write_derived(out_dir, records)
    if manifest is not None:
        write_manifest(out_dir, manifest)
    if failures:
        write_failures(out_dir, failures)
    logger.info("wrote %d rounds to %s", len(records), out_dir)
    return metrics


def _parse_cell(column, cell):
    if cell == "":
        return None
    if column in INT_FIELDS:
        return int(cell)
    if column in FLOAT_FIELDS:
        return float(cell)
    return cell


def parse_rounds(text):
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != ROUND_COLUMNS:
        raise ResultsIOError(f"unexpected rounds header {reader.fieldnames}")
    records = []
    for row in reader:
        values = {column: _parse_cell(column, row[column]) for column in ROUND_COLUMNS}
        values["lam"] = values.pop("lambda")
        records.append(RoundRecord(**values))
    return records


def read_rounds(out_dir):
    return parse_rounds(_read_text(os.path.join(out_dir, ROUNDS_FILE)))


def read_manifest(out_dir):
    path = os.path.join(out_dir, MANIFEST_FILE)
    if not os.path.isfile(path):
        raise ResultsIOError(f"Failed to read results from {path}. No manifest found")
    return dotenv_values(path)


@dataclass(frozen=True)
class ReportResult:
    out_dir: str
    n_rounds: int
    summary_matches: bool
    curves_matches: bool
    metrics: list

    @property
    def consistent(self):
        return self.summary_matches and self.curves_matches


def report(out_dir):
    """Recompute summary and curves from rounds.csv and compare with the stored files."""
    records = read_rounds(out_dir)
    metrics = summarize(records)
    summary_text = format_csv(SUMMARY_COLUMNS, summary_rows(metrics))
    curves_text = format_csv(CURVE_COLUMNS, curve_rows(metrics))
    stored_summary = os.path.join(out_dir, SUMMARY_FILE)
    stored_curves = os.path.join(out_dir, CURVES_FILE)
    return ReportResult(
        out_dir=out_dir,
        n_rounds=len(records),
        summary_matches=os.path.isfile(stored_summary) and _read_text(stored_summary) == summary_text,
        curves_matches=os.path.isfile(stored_curves) and _read_text(stored_curves) == curves_text,
        metrics=metrics,
    )


def write_sweep_summary(out_dir, rows):
    return _write_text(os.path.join(ensure_dir(out_dir), SWEEP_SUMMARY_FILE), format_csv(SWEEP_COLUMNS, rows))
