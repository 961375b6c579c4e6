"""Sobol sampling of the search box and cheap exploratory landscape features.

The Sobol generator is built from primitive-polynomial direction numbers
(first dimensions of the standard Joe-Kuo table), Gray-code increments, and an
optional seeded digital-shift scramble.  The all-zeros point at index 0 is
skipped: the first emitted point is sequence index 1.

compute_ela returns exactly 10 named features spanning the y-distribution,
meta-model, dispersion and nearest-better-clustering families.  Values that
are undefined at a given budget are encoded as NaN sentinels.
"""

from dataclasses import dataclass

import numpy as np

from . import bbob
from .ts_features import FeatureVector
from .util import InsufficientDataError, InvalidArgumentError, make_rng

B30D = "30d"
B50D = "50d"

_BITS = 32
_SCALE = 2.0 ** -_BITS

# (s, a, m...) rows of the Joe-Kuo D(6) direction-number table, dimensions 2..21.
_JOE_KUO = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
    (5, 11, (1, 1, 5, 1, 1)),
    (5, 13, (1, 1, 1, 3, 11)),
    (5, 14, (1, 3, 5, 5, 31)),
    (6, 1, (1, 3, 3, 9, 7, 49)),
    (6, 13, (1, 1, 1, 15, 21, 21)),
    (6, 16, (1, 3, 1, 13, 27, 49)),
    (6, 19, (1, 1, 1, 15, 7, 5)),
    (6, 22, (1, 3, 1, 15, 13, 25)),
    (6, 25, (1, 1, 5, 5, 19, 61)),
    (7, 1, (1, 3, 7, 11, 23, 15, 103)),
    (7, 4, (1, 3, 7, 13, 13, 15, 69)),
)

MAX_DIMENSION = len(_JOE_KUO) + 1


def _direction_vectors(dim_index: int) -> np.ndarray:
    """32 direction integers for one dimension (0 = van der Corput)."""
    v = np.zeros(_BITS, dtype=np.uint64)
    if dim_index == 0:
        for k in range(_BITS):
            v[k] = 1 << (_BITS - 1 - k)
        return v
    s, a, m_init = _JOE_KUO[dim_index - 1]
    m = list(m_init)
    for k in range(s, _BITS):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    for k in range(_BITS):
        v[k] = m[k] << (_BITS - 1 - k)
    return v


@dataclass
class SobolGenerator:
    """Gray-code Sobol sequence over [0, 1)^d, starting at sequence index 1."""

    dimension: int
    shift: np.ndarray = None  # per-dimension digital shift, uint64

    def __post_init__(self):
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise InvalidArgumentError(
                f"dimension must be in 1..{MAX_DIMENSION}, got {self.dimension}"
            )
        self._v = np.stack([_direction_vectors(j) for j in range(self.dimension)])
        self._state = np.zeros(self.dimension, dtype=np.uint64)
        self._index = 0
        if self.shift is None:
            self.shift = np.zeros(self.dimension, dtype=np.uint64)

    def next_points(self, count: int) -> np.ndarray:
        """The next `count` points of the sequence, shape (count, d)."""
        out = np.empty((count, self.dimension))
        for i in range(count):
            self._index += 1
            low_zero = (self._index & -self._index).bit_length() - 1
            self._state ^= self._v[:, low_zero]
            out[i] = ((self._state ^ self.shift)) * _SCALE
        return out


def seeded_shift(dimension: int, seed: int) -> np.ndarray:
    rng = make_rng("sobol-shift", seed)
    return rng.integers(0, 1 << _BITS, dimension, dtype=np.uint64)


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray  # (m, d) in the search box
    fitnesses: np.ndarray
    budget_tag: str


def budget_tag(m: int, dimension: int) -> str:
    if m == 30 * dimension:
        return B30D
    if m == 50 * dimension:
        return B50D
    return f"custom({m})"


def sobol_sample(inst: bbob.ProblemInstance, m: int, seed: int) -> SampleSet:
    """First m scrambled Sobol points scaled to the box, evaluated on inst."""
    d = inst.dimension
    if m < d + 2:
        raise InsufficientDataError(f"need at least d+2 = {d + 2} points, got {m}")
    gen = SobolGenerator(d, shift=seeded_shift(d, seed))
    unit = gen.next_points(m)
    points = bbob.LOWER + (bbob.UPPER - bbob.LOWER) * unit
    fitnesses = bbob.evaluate_batch(inst, points)
    return SampleSet(points=points, fitnesses=fitnesses, budget_tag=budget_tag(m, d))


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------

ELA_FEATURE_NAMES = (
    "ela.y_skewness",
    "ela.y_kurtosis",
    "ela.y_n_peaks",
    "ela.lin_adj_r2",
    "ela.lin_coef_ratio",
    "ela.quad_adj_r2",
    "ela.quad_cond",
    "ela.disp_ratio",
    "ela.nbc_dist_ratio_sd",
    "ela.nbc_fit_dist_corr",
)

SENTINEL = float("nan")
_DISPERSION_QUANTILE = 0.02
_PEAK_BINS = 32


def _adj_r2(x_design, y, n_predictors):
    m = len(y)
    if m <= n_predictors + 1:
        return SENTINEL, None
    coef, _, rank, _ = np.linalg.lstsq(x_design, y, rcond=None)
    if rank < x_design.shape[1]:
        return SENTINEL, coef
    resid = y - x_design @ coef
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot <= 0.0:
        return SENTINEL, coef
    r2 = 1.0 - np.sum(resid**2) / ss_tot
    adj = 1.0 - (1.0 - r2) * (m - 1) / (m - n_predictors - 1)
    return float(adj), coef


def _coef_ratio(coefs):
    mags = np.abs(coefs)
    lo = mags.min()
    if lo <= 0.0:
        return SENTINEL
    return float(mags.max() / lo)


def _histogram_peaks(y):
    counts, _ = np.histogram(y, bins=_PEAK_BINS)
    padded = np.concatenate(([-1], counts, [-1]))
    peaks = (padded[1:-1] > padded[:-2]) & (padded[1:-1] > padded[2:])
    return int(np.count_nonzero(peaks))


def _pairwise_dist(points) -> np.ndarray:
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    return np.sqrt(np.maximum(d2, 0.0))


def _pairwise_mean(points) -> float:
    m = len(points)
    if m < 2:
        return SENTINEL
    dist = _pairwise_dist(points)
    iu = np.triu_indices(m, 1)
    return float(dist[iu].mean())


def compute_ela(sample: SampleSet) -> FeatureVector:
    """The 10-feature landscape description of one sample set."""
    x = sample.points
    y = sample.fitnesses
    m, d = x.shape
    if m < 4 * (d + 1):
        raise InsufficientDataError(f"need at least 4(d+1) = {4 * (d + 1)} points, got {m}")

    mean = y.mean()
    var = y.var()
    centered = y - mean
    if var > 0.0:
        skew = float(np.mean(centered**3) / var**1.5)
        kurt = float(np.mean(centered**4) / var**2 - 3.0)
    else:
        skew = SENTINEL
        kurt = SENTINEL

    ones = np.ones((m, 1))
    lin_design = np.hstack([ones, x])
    lin_r2, lin_coef = _adj_r2(lin_design, y, d)
    lin_ratio = _coef_ratio(lin_coef[1:]) if lin_coef is not None else SENTINEL

    quad_design = np.hstack([ones, x, x * x])
    quad_r2, quad_coef = _adj_r2(quad_design, y, 2 * d)
    quad_cond = _coef_ratio(quad_coef[1 + d :]) if quad_coef is not None else SENTINEL

    q = np.quantile(y, _DISPERSION_QUANTILE)
    best = x[y <= q]
    all_mean = _pairwise_mean(x)
    best_mean = _pairwise_mean(best)
    if np.isnan(best_mean) or np.isnan(all_mean) or all_mean <= 0.0:
        disp = SENTINEL
    else:
        disp = float(best_mean / all_mean)

    # nearest-better clustering: distances to the nearest point and to the
    # nearest strictly better point
    dist = _pairwise_dist(x)
    np.fill_diagonal(dist, np.inf)
    d_nn = dist.min(axis=1)
    better = y[None, :] < y[:, None]
    dist_better = np.where(better, dist, np.inf)
    d_nb = dist_better.min(axis=1)
    defined = np.isfinite(d_nb)
    if defined.sum() >= 2:
        ratios = d_nb[defined] / np.maximum(d_nn[defined], 1e-300)
        nbc_sd = float(ratios.std())
        yy = y[defined]
        dd = d_nb[defined]
        sy, sd = yy.std(), dd.std()
        if sy > 0.0 and sd > 0.0:
            nbc_corr = float(np.mean((yy - yy.mean()) * (dd - dd.mean())) / (sy * sd))
        else:
            nbc_corr = SENTINEL
    else:
        nbc_sd = SENTINEL
        nbc_corr = SENTINEL

    vals = np.array(
        [
            skew,
            kurt,
            float(_histogram_peaks(y)),
            lin_r2,
            lin_ratio,
            quad_r2,
            quad_cond,
            disp,
            nbc_sd,
            nbc_corr,
        ]
    )
    return FeatureVector(names=ELA_FEATURE_NAMES, values=vals)
