"""Table-style metrics over per-round selected returns.

A curve is one seed's sequence of selected Ĵ, one value per round. Across
seeds the per-round mean and population variance (ddof=0) form the stored
curves; the final return of a seed is the selected Ĵ of its last round.
"""
from collections import defaultdict

import numpy as np

from reward_profiling.models import CurvePoint, MetricsRecord
from reward_profiling.profiling import VANILLA
from reward_profiling.utils.errors import DomainError

SMOOTHING_WINDOW = 3
FRACTION_OF_BEST = 0.95


def trailing_mean(curve, window):
    curve = np.asarray(curve, dtype=float)
    cumsum = np.concatenate([[0.0], np.cumsum(curve)])
    idx = np.arange(1, len(curve) + 1)
    lo = np.maximum(0, idx - window)
    return (cumsum[idx] - cumsum[lo]) / (idx - lo)


def rounds_to_fraction(curve, fraction=FRACTION_OF_BEST, window=1):
    """First round whose smoothed value reaches ``fraction`` x the best raw value.

    A single spike sets the bar but is averaged away by the smoothing, so a
    curve that only touches its best once may never reach it. The threshold
    is applied to the signed best, so with a negative best it
    lies above the best and is never reached; that returns None.
    """
    if len(curve) == 0:
        raise DomainError("rounds_to_fraction needs a non-empty curve")
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
    if window < 1:
        raise DomainError(f"smoothing window must be at least 1, got {window}")
    smoothed = trailing_mean(curve, window) if window > 1 else np.asarray(curve, dtype=float)
    threshold = fraction * float(np.max(curve))
    hits = np.flatnonzero(smoothed >= threshold)
    return int(hits[0]) if len(hits) else None


def variability_reduction(variant_vars, baseline_vars):
    """100 (1 - mean(variant) / mean(baseline)); None when the baseline never varies."""
    if len(variant_vars) != len(baseline_vars):
        raise DomainError(f"variance curves differ in length: {len(variant_vars)} vs {len(baseline_vars)}")
    baseline = float(np.mean(baseline_vars)) if len(baseline_vars) else 0.0
    if baseline == 0.0:
        return None
    return 100.0 * (1.0 - float(np.mean(variant_vars)) / baseline)


def decrease_count(curve):
    return int(np.sum(np.diff(np.asarray(curve, dtype=float)) < 0))


def inter_round_variance(curve, last=None):
    curve = np.asarray(curve, dtype=float)
    if last is not None:
        curve = curve[-last:]
    return float(np.var(curve)) if len(curve) else 0.0


def seed_curves(records):
    """{(env, algo, variant): {seed: [selected Ĵ by round]}}."""
    grouped = defaultdict(lambda: defaultdict(list))
    for record in sorted(records, key=lambda r: (r.env, r.algo, r.variant, r.seed, r.round)):
        grouped[(record.env, record.algo, record.variant)][record.seed].append(record.selected_j_hat())
    return grouped


def curve_stats(curves_by_seed):
    """Per-round mean and variance over the rounds every seed reached."""
    curves = list(curves_by_seed.values())
    length = min(len(c) for c in curves)
    stacked = np.array([c[:length] for c in curves], dtype=float)
    return stacked.mean(axis=0), stacked.var(axis=0)


def summarize(records, window=SMOOTHING_WINDOW):
    """One MetricsRecord per (env, algo, variant), sorted by that key."""
    grouped = seed_curves(records)
    stats = {key: curve_stats(by_seed) for key, by_seed in grouped.items()}
    metrics = []
    for key in sorted(grouped):
        env, algo, variant = key
        finals = np.array([curve[-1] for curve in grouped[key].values()], dtype=float)
        means, variances = stats[key]
        baseline = stats.get((env, algo, VANILLA))
        reduction = None
        if baseline is not None:
            n = min(len(variances), len(baseline[1]))
            reduction = variability_reduction(variances[:n], baseline[1][:n])
        metrics.append(MetricsRecord(
            env=env,
            algo=algo,
            variant=variant,
            n_seeds=len(finals),
            final_return_mean=float(finals.mean()),
            final_return_std=float(finals.std()),
            rounds_to_95=rounds_to_fraction(means, FRACTION_OF_BEST, window),
            variance_reduction_pct=reduction,
            curve=[CurvePoint(round=t, mean=float(m), var=float(v)) for t, (m, v) in enumerate(zip(means, variances))],
        ))
    return metrics
