"""Power-law fits, quantum-classical break times and control contrasts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kickedrotor.classical import EnergySeries
from kickedrotor.errors import DomainError, ParameterError
from kickedrotor.quantum import MomentumDistribution

PROBABILITY_FLOOR = 1e-300
ENERGY_FLOOR = 1e-300


@dataclass(frozen=True)
class FitResult:
    """``log E = a * log N + b`` over kicks ``window[0] .. window[1]`` inclusive."""

    a: float
    b: float
    window: tuple[int, int]
    r2: float


@dataclass(frozen=True)
class BreakTime:
    t_b: int | None
    threshold: float
    sustained: int

    @property
    def found(self) -> bool:
        return self.t_b is not None


@dataclass(frozen=True)
class RatioSummary:
    min_ratio: float
    max_ratio: float
    geometric_mean: float
    n_used: int
    n_excluded: int


def _values(series) -> np.ndarray:
    if isinstance(series, EnergySeries):
        return series.values
    return np.asarray(series, dtype=float)


def loglog_fit(series, window: tuple[int, int] | None = None) -> FitResult:
    """Unweighted least squares of log E against log N over ``window``.

    The default window is the whole series from kick 1.
    """
    y_all = _values(series)
    lo, hi = window if window is not None else (1, y_all.size - 1)
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi <= lo or hi >= y_all.size:
        raise ParameterError(f"fit window {lo}:{hi} invalid for a series of {y_all.size} entries")
    if hi - lo + 1 < 10:
        raise ParameterError(f"fit window {lo}:{hi} has fewer than 10 points")
    y = y_all[lo:hi + 1]
    if np.any(y <= 0):
        raise DomainError("non-positive energy inside the fit window")
    x = np.log(np.arange(lo, hi + 1, dtype=float))
    ly = np.log(y)
    xc = x - x.mean()
    yc = ly - ly.mean()
    a = float(np.dot(xc, yc) / np.dot(xc, xc))
    b = float(ly.mean() - a * x.mean())
    ss_tot = float(np.dot(yc, yc))
    ss_res = float(np.sum((yc - a * xc) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(a, b, (lo, hi), r2)


def break_time(q, c, threshold: float = 0.2, sustained: int = 10, eps: float = 1e-12) -> BreakTime:
    """First kick N from which ``|E_q - E_c| / max(E_c, eps) > threshold``
    holds for ``sustained`` consecutive kicks; ``t_b`` is None if never."""
    qv, cv = _values(q), _values(c)
    if qv.shape != cv.shape:
        raise ParameterError(f"series lengths differ: {qv.size} vs {cv.size}")
    if not threshold > 0:
        raise ParameterError(f"threshold must be positive, got {threshold}")
    if sustained < 1:
        raise ParameterError(f"sustained must be >= 1, got {sustained}")
    dev = np.abs(qv - cv) / np.maximum(cv, eps)
    run = 0
    for n, over in enumerate(dev > threshold):
        run = run + 1 if over else 0
        if run == sustained:
            return BreakTime(n - sustained + 1, threshold, sustained)
    return BreakTime(None, threshold, sustained)


def distribution_ratio(
    p1: MomentumDistribution, p2: MomentumDistribution, band: tuple[float, float]
) -> RatioSummary:
    """Ratios ``p1(m) / p2(m)`` over grid indices with ``m_lo < |m| < m_hi``.

    Bins where ``p2`` is below 1e-300 are excluded and counted.
    """
    a, b = p1.probabilities, p2.probabilities
    if a.shape != b.shape:
        raise ParameterError("distributions live on different grids")
    m_lo, m_hi = band
    m = np.abs(p1.indices)
    sel = (m > m_lo) & (m < m_hi)
    keep = sel & (b >= PROBABILITY_FLOOR)
    n_used = int(np.count_nonzero(keep))
    if n_used == 0:
        raise DomainError(f"no usable bins in band {band!r}")
    with np.errstate(divide="ignore"):
        r = a[keep] / b[keep]
        gmean = float(np.exp(np.mean(np.log(r))))
    return RatioSummary(float(r.min()), float(r.max()), gmean, n_used, int(np.count_nonzero(sel)) - n_used)


def energy_ratio(q1, q2, at: int) -> float:
    v1, v2 = _values(q1), _values(q2)
    if not (0 <= at < v1.size and at < v2.size):
        raise ParameterError(f"kick index {at} outside the series")
    den = float(v2[at])
    if abs(den) < ENERGY_FLOOR:
        raise DomainError(f"denominator energy {den!r} at kick {at} is below the floor")
    return float(v1[at]) / den


def default_fit_window(t_b: int | None, n_max: int) -> tuple[int, int]:
    """``[2 * t_b, n_max]``, falling back to the second half of the run."""
    lo = 2 * t_b if t_b else n_max // 2
    lo = max(1, min(lo, n_max - 9))
    return lo, n_max

