"""Fixed catalog of time-series features plus Boruta-style all-relevant
feature selection.

The catalog covers distribution, change, run-length, location, autocorrelation
and linear-trend families.  Features that are undefined on a given series
(autocorrelation or trend r-squared of a constant series, for instance) are
encoded as NaN sentinels and imputed with training-fold medians downstream.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .classifiers import fit_random_forest, importances
from .util import InsufficientDataError, InvalidArgumentError, make_rng

SENTINEL = float("nan")

FEATURE_NAMES = (
    "ts.mean",
    "ts.variance",
    "ts.std",
    "ts.skewness",
    "ts.kurtosis",
    "ts.minimum",
    "ts.maximum",
    "ts.median",
    "ts.quantile_10",
    "ts.quantile_90",
    "ts.abs_energy",
    "ts.mean_abs_change",
    "ts.mean_change",
    "ts.count_above_mean",
    "ts.count_below_mean",
    "ts.longest_strike_above_mean",
    "ts.longest_strike_below_mean",
    "ts.first_location_of_minimum",
    "ts.last_location_of_maximum",
    "ts.mean_crossings",
    "ts.autocorr_lag1",
    "ts.autocorr_lag2",
    "ts.autocorr_lag3",
    "ts.linear_trend_slope",
    "ts.linear_trend_intercept",
    "ts.linear_trend_r2",
)


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: np.ndarray
    origin: tuple = None


@dataclass(frozen=True)
class SelectionMask:
    kept: dict  # feature name -> bool
    iterations: int
    hit_counts: dict  # feature name -> int

    def kept_names(self):
        return [n for n, keep in self.kept.items() if keep]


def _longest_run(mask) -> int:
    best = run = 0
    for m in mask:
        run = run + 1 if m else 0
        if run > best:
            best = run
    return best


def _autocorr(v, mean, var, lag) -> float:
    n = len(v)
    if var <= 0.0 or n <= lag:
        return SENTINEL
    return float(np.sum((v[: n - lag] - mean) * (v[lag:] - mean)) / ((n - lag) * var))


def extract(traj) -> FeatureVector:
    """The fixed feature catalog of one trajectory (or plain value sequence)."""
    values = np.asarray(getattr(traj, "values", traj), dtype=float)
    n = len(values)
    if n < 4:
        raise InsufficientDataError(f"need at least 4 values, got {n}")

    mean = float(values.mean())
    var = float(values.var())  # population variance
    std = math.sqrt(var)
    centered = values - mean
    if var > 0.0:
        skew = float(np.mean(centered**3) / var**1.5)
        kurt = float(np.mean(centered**4) / var**2 - 3.0)
    else:
        skew = SENTINEL
        kurt = SENTINEL

    diffs = np.diff(values)
    above = values > mean
    below = values < mean

    t = np.arange(n, dtype=float)
    t_mean = t.mean()
    slope = float(np.sum((t - t_mean) * centered) / np.sum((t - t_mean) ** 2))
    intercept = mean - slope * t_mean
    ss_tot = float(np.sum(centered**2))
    if ss_tot > 0.0:
        resid = values - (intercept + slope * t)
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    else:
        r2 = SENTINEL

    vals = np.array(
        [
            mean,
            var,
            std,
            skew,
            kurt,
            float(values.min()),
            float(values.max()),
            float(np.median(values)),
            float(np.quantile(values, 0.1)),
            float(np.quantile(values, 0.9)),
            float(np.sum(values**2)),
            float(np.mean(np.abs(diffs))),
            float(np.mean(diffs)),
            float(np.sum(above)),
            float(np.sum(below)),
            float(_longest_run(above)),
            float(_longest_run(below)),
            float(np.argmin(values)) / n,
            float(n - np.argmax(values[::-1])) / n,
            float(np.count_nonzero(np.diff(above))),
            _autocorr(values, mean, var, 1),
            _autocorr(values, mean, var, 2),
            _autocorr(values, mean, var, 3),
            slope,
            intercept,
            r2,
        ]
    )
    return FeatureVector(names=FEATURE_NAMES, values=vals, origin=getattr(traj, "origin", None))


# ---------------------------------------------------------------------------
# Boruta: shadow features from column permutations, hits against the best
# shadow importance, two-sided binomial decision at level alpha.
# ---------------------------------------------------------------------------


def _binom_sf(k, n) -> float:
    """P[X >= k] for X ~ Binomial(n, 1/2)."""
    return sum(math.comb(n, i) for i in range(k, n + 1)) / 2.0**n


def boruta_select(
    x,
    y,
    feature_names=None,
    max_iter=50,
    alpha=0.05,
    seed=0,
    n_trees=25,
) -> SelectionMask:
    """All-relevant selection; undecided features at max_iter are rejected.

    At least one feature is always kept: if nothing is accepted, the feature
    with the highest mean importance survives.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    n, p = x.shape
    if n < 10:
        raise InvalidArgumentError(f"need at least 10 rows, got {n}")
    if len(set(y.tolist())) < 2:
        raise InvalidArgumentError("need at least 2 classes")
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(p)]

    rng = make_rng("boruta", seed)
    decided = np.zeros(p, dtype=int)  # 0 undecided, 1 accepted, -1 rejected
    hits = np.zeros(p, dtype=int)
    imp_sum = np.zeros(p)
    it = 0
    for it in range(1, max_iter + 1):
        shadow = np.empty_like(x)
        for j in range(p):
            shadow[:, j] = x[rng.permutation(n), j]
        xx = np.hstack([x, shadow])
        model = fit_random_forest(xx, y, n_trees=n_trees, seed=int(rng.integers(2**31)))
        imp = importances(model)
        real, sh = imp[:p], imp[p:]
        imp_sum += real
        hits += real > sh.max()
        undecided = np.flatnonzero(decided == 0)
        for j in undecided:
            p_hi = _binom_sf(int(hits[j]), it)
            p_lo = _binom_sf(it - int(hits[j]), it)  # = P[X <= hits]
            p_two = 2.0 * min(p_hi, p_lo)
            if p_two <= alpha:
                decided[j] = 1 if hits[j] * 2 > it else -1
        if np.all(decided != 0):
            break

    kept = decided == 1
    if not kept.any():
        kept[int(np.argmax(imp_sum))] = True  # degenerate fallback
    return SelectionMask(
        kept={feature_names[j]: bool(kept[j]) for j in range(p)},
        iterations=it,
        hit_counts={feature_names[j]: int(hits[j]) for j in range(p)},
    )


def mask_to_json(mask: SelectionMask) -> str:
    doc = {"v": 1, "kept": mask.kept, "iterations": mask.iterations, "hit_counts": mask.hit_counts}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def mask_from_json(text: str) -> SelectionMask:
    doc = json.loads(text)
    if doc.get("v") != 1:
        raise InvalidArgumentError(f"unsupported mask schema {doc.get('v')!r}")
    return SelectionMask(kept=doc["kept"], iterations=doc["iterations"], hit_counts=doc["hit_counts"])
