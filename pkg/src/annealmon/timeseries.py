"""Statistics for per-call mean-energy series.

Everything here is a pure function on 1-d float arrays: smoothing,
normalization, alignment, similarity measures (Pearson, RMSD, quartile-bin
agreement), autocorrelation structure (ACF/PACF), the augmented Dickey-Fuller
unit-root test with MacKinnon approximate p-values, and the two-sample
Kolmogorov-Smirnov test.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ModelError


@dataclass(frozen=True)
class EnergySeries:
    """A labeled, time-ordered sequence of per-call mean energies."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ModelError("series must be one-dimensional and non-empty")
        if not np.all(np.isfinite(arr)):
            raise ModelError("series contains non-finite values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


def _as_array(x) -> np.ndarray:
    if isinstance(x, EnergySeries):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ModelError("expected a one-dimensional series")
    return arr


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    a, b = _as_array(x), _as_array(y)
    if a.size != b.size:
        raise ModelError(f"series lengths differ: {a.size} vs {b.size}")
    return a, b


def moving_average(x, w: int) -> np.ndarray:
    """Trailing-window mean; output element i averages values[i .. i+w).

    The series shortens to N - w + 1 (no edge padding).
    """
    arr = _as_array(x)
    if not 1 <= w <= arr.size:
        raise ModelError(f"window {w} outside 1..{arr.size}")
    cs = np.concatenate(([0.0], np.cumsum(arr)))
    return (cs[w:] - cs[:-w]) / w


def minmax_normalize(x) -> np.ndarray:
    """Scale into [0, 1]; a constant series maps to all 0.5 by convention."""
    arr = _as_array(x)
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return np.full_like(arr, 0.5)
    return (arr - lo) / (hi - lo)


def mean_align(x, y) -> np.ndarray:
    """Shift x so its mean matches y's: x_i - (m_x - m_y)."""
    a, b = _pair(x, y)
    return a - (a.mean() - b.mean())


def rmsd(x, y) -> float:
    """Root-mean-square deviation sqrt(mean((x_i - y_i)^2))."""
    a, b = _pair(x, y)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def pearson(x, y) -> float:
    """Sample Pearson correlation; constant inputs are an error."""
    a, b = _pair(x, y)
    if a.size < 2:
        raise ModelError("pearson needs at least two points")
    da, db = a - a.mean(), b - b.mean()
    denom = math.sqrt(float(da @ da)) * math.sqrt(float(db @ db))
    if denom == 0.0:
        raise ModelError("pearson undefined for a constant series")
    return float((da @ db) / denom)


def quartile_bin_agreement(x_norm, y_norm) -> float:
    """Fraction of time points where both normalized values fall in the same
    quarter of [0, 1].

    Bins are half-open ([0, .25), [.25, .5), [.5, .75)) with the top bin
    closed at 1, so a boundary value belongs to the bin above it.
    """
    a, b = _pair(x_norm, y_norm)
    for arr in (a, b):
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ModelError("bin agreement expects series normalized to [0, 1]")
    bins_a = np.minimum((a * 4).astype(np.int64), 3)
    bins_b = np.minimum((b * 4).astype(np.int64), 3)
    return float(np.mean(bins_a == bins_b))


def acf(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations for lags 0..max_lag, normalized so acf[0] = 1."""
    arr = _as_array(x)
    if max_lag >= arr.size:
        raise ModelError(f"max_lag {max_lag} must be < series length {arr.size}")
    if max_lag < 0:
        raise ModelError("max_lag must be non-negative")
    d = arr - arr.mean()
    denom = float(d @ d)
    if denom == 0.0:
        raise ModelError("acf undefined for a constant series")
    out = np.empty(max_lag + 1, dtype=np.float64)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(d[:-k] @ d[k:]) / denom
    return out


def pacf(x, max_lag: int) -> np.ndarray:
    """Partial autocorrelations via the Durbin-Levinson recursion on the
    sample ACF; pacf[0] = 1 and pacf[1] = acf[1]."""
    r = acf(x, max_lag)
    out = np.empty(max_lag + 1, dtype=np.float64)
    out[0] = 1.0
    if max_lag == 0:
        return out
    phi = np.zeros((max_lag + 1, max_lag + 1), dtype=np.float64)
    phi[1, 1] = r[1]
    out[1] = r[1]
    v = 1.0 - r[1] ** 2
    for k in range(2, max_lag + 1):
        prev = phi[k - 1, 1:k]
        num = r[k] - float(prev @ r[k - 1:0:-1])
        phi[k, k] = num / v
        phi[k, 1:k] = prev - phi[k, k] * prev[::-1]
        v *= 1.0 - phi[k, k] ** 2
        out[k] = phi[k, k]
    return out


# MacKinnon (1994) approximate p-value surface, constant-only regression.
# Embedded as data; the polynomial argument is the ADF t-statistic.
_TAU_STAR = -1.61
_TAU_MIN = -18.83
_TAU_MAX = 2.74
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)


def _norm_cdf(z: float) -> float:
    # erfc keeps precision in the far left tail, where erf saturates
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def mackinnon_pvalue(stat: float) -> float:
    """Approximate p-value for a constant-only ADF t-statistic."""
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coeffs = _TAU_SMALLP if stat <= _TAU_STAR else _TAU_LARGEP
    z = 0.0
    for c in reversed(coeffs):
        z = z * stat + c
    return _norm_cdf(z)


def adf_auto_lag(n: int) -> int:
    return int(12 * (n / 100.0) ** 0.25)


def adf_test(x, lags: int | str = "auto") -> tuple[float, float]:
    """Augmented Dickey-Fuller unit-root test, constant-only regression.

        dy_t = alpha + rho * y_{t-1} + sum_{i=1..k} gamma_i * dy_{t-i} + e_t

    Returns the t-ratio of rho and its MacKinnon approximate p-value.  The
    null is a unit root; small p favors (trend-)stationarity.  `lags` is a
    fixed lag order or "auto" for floor(12 * (N/100)^(1/4)).
    """
    arr = _as_array(x)
    n = arr.size
    k = adf_auto_lag(n) if lags == "auto" else int(lags)
    if k < 0:
        raise ModelError("lag order must be non-negative")
    if n <= 20 + k:
        raise ModelError(f"series too short for ADF with {k} lags: {n} <= {20 + k}")
    dy = np.diff(arr)
    rows = n - 1 - k
    X = np.empty((rows, 2 + k), dtype=np.float64)
    X[:, 0] = 1.0
    X[:, 1] = arr[k : n - 1]
    for i in range(1, k + 1):
        X[:, 1 + i] = dy[k - i : n - 1 - i]
    yvec = dy[k:]
    beta, _, _, _ = np.linalg.lstsq(X, yvec, rcond=None)
    resid = yvec - X @ beta
    dof = rows - X.shape[1]
    if dof <= 0:
        raise ModelError("not enough observations for the ADF regression")
    sigma2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se_rho = math.sqrt(sigma2 * xtx_inv[1, 1])
    stat = float(beta[1]) / se_rho
    return stat, mackinnon_pvalue(stat)


def _kolmogorov_sf(y: float) -> float:
    """Survival function of the Kolmogorov distribution, 2*sum (-1)^{r-1} exp(-2 r^2 y^2)."""
    if y < 1e-10:
        return 1.0
    total = 0.0
    sign = 1.0
    for r in range(1, 101):
        term = math.exp(-2.0 * r * r * y * y)
        total += sign * term
        if term < 1e-16:
            break
        sign = -sign
    return min(max(2.0 * total, 0.0), 1.0)


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov test.

    D is the sup-distance between the empirical CDFs; the p-value uses the
    asymptotic Kolmogorov distribution at sqrt(n_a*n_b/(n_a+n_b)) * D.
    """
    xa = np.sort(np.asarray(a, dtype=np.float64))
    xb = np.sort(np.asarray(b, dtype=np.float64))
    if xa.size == 0 or xb.size == 0:
        raise ModelError("ks_two_sample needs non-empty samples")
    pooled = np.concatenate([xa, xb])
    cdf_a = np.searchsorted(xa, pooled, side="right") / xa.size
    cdf_b = np.searchsorted(xb, pooled, side="right") / xb.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = xa.size * xb.size / (xa.size + xb.size)
    return d, _kolmogorov_sf(math.sqrt(n_eff) * d)


@dataclass
class StatReport:
    """Flat bundle of the analysis outputs; fields are None when the
    producing analysis was not run."""

    pearson: float | None = None
    rmsd: float | None = None
    bin_agreement: float | None = None
    adf_stat: float | None = None
    adf_p: float | None = None
    ks_stat: float | None = None
    ks_p: float | None = None
    extras: dict[str, float] = field(default_factory=dict)

    def to_flat_dict(self) -> dict[str, float]:
        out = {}
        for f in fields(self):
            if f.name == "extras":
                continue
            value = getattr(self, f.name)
            if value is not None:
                out[f.name] = value
        out.update(self.extras)
        return dict(sorted(out.items()))

    def save_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_flat_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def save_series_csv(path: str, series: EnergySeries) -> None:
    """Single-column CSV with the label as header."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([series.label or "value"])
        for v in series.values:
            writer.writerow([repr(float(v))])


def load_series_csv(path: str) -> EnergySeries:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        values = [float(row[0]) for row in reader if row]
    return EnergySeries(np.array(values), label=header[0])
