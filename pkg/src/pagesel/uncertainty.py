"""Per-page generation-uncertainty statistics and reconstruction triggers.

A page's statistics are the mean and population variance of the Shannon
entropies (nats) of its tokens' next-token distributions. Thresholds are
independent nearest-rank percentiles of a calibration sample; a trigger
fires when both statistics strictly exceed their thresholds (a disjunctive
mode exists for policy comparisons).
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError

NORMALIZATION_TOL = 1e-9


def entropy(probs):
    """Shannon entropy in nats, with 0*ln(0) taken as 0."""
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"distribution sums to {total}, not 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


@dataclass
class PageUncertainty:
    mean_entropy: float
    varentropy: float
    token_count: int


def page_uncertainty(entropies):
    """Mean and population variance of per-token entropies for one page."""
    if len(entropies) == 0:
        raise ValueError("page has no generated tokens")
    e = np.asarray(entropies, dtype=np.float64)
    mean = float(e.mean())
    var = float(np.mean((e - mean) ** 2))
    return PageUncertainty(mean_entropy=mean, varentropy=var, token_count=len(e))


@dataclass
class TriggerThresholds:
    tau_entropy: float
    tau_varentropy: float
    percentile: float
    sample_count: int


def _nearest_rank(sorted_values, percentile):
    rank = math.ceil(percentile * len(sorted_values))
    return float(sorted_values[max(rank, 1) - 1])


def calibrate(samples, percentile=0.99):
    """Independent nearest-rank percentiles of the two uncertainty marginals."""
    if not samples:
        raise CalibrationError("cannot calibrate on an empty sample")
    if not 0.0 < percentile < 1.0:
        raise CalibrationError(f"percentile must be in (0, 1), got {percentile}")
    if percentile >= 0.99 and len(samples) < 100:
        warnings.warn(
            f"only {len(samples)} calibration pages for percentile "
            f"{percentile}; thresholds will be coarse",
            stacklevel=2,
        )
    means = np.sort([s.mean_entropy for s in samples])
    variances = np.sort([s.varentropy for s in samples])
    return TriggerThresholds(
        tau_entropy=_nearest_rank(means, percentile),
        tau_varentropy=_nearest_rank(variances, percentile),
        percentile=percentile,
        sample_count=len(samples),
    )


def check_trigger(u, thresholds, mode="joint"):
    """True when the page sits in the high-uncertainty trigger region.

    joint: both statistics strictly above their thresholds (default).
    any: either statistic strictly above its threshold.
    """
    high_h = u.mean_entropy > thresholds.tau_entropy
    high_v = u.varentropy > thresholds.tau_varentropy
    if mode == "joint":
        return high_h and high_v
    if mode == "any":
        return high_h or high_v
    raise ValueError(f"unknown trigger mode {mode!r}")


def save_thresholds(thresholds, path, created_from=""):
    with open(path, "w") as fh:
        json.dump(
            {
                "percentile": thresholds.percentile,
                "tau_H": thresholds.tau_entropy,
                "tau_V": thresholds.tau_varentropy,
                "sample_count": thresholds.sample_count,
                "created_from": created_from,
            },
            fh,
            indent=2,
        )


def load_thresholds(path):
    with open(path) as fh:
        data = json.load(fh)
    return TriggerThresholds(
        tau_entropy=data["tau_H"],
        tau_varentropy=data["tau_V"],
        percentile=data["percentile"],
        sample_count=data["sample_count"],
    )
