"""Classical kicked-rotor maps and ensemble observables.

A kick ``n`` with sign ``s`` maps ``(L, theta)`` to
``L' = L + s * kappa * sin(theta)``, ``theta' = theta + L'``. The all-positive
schedule gives the standard map; the (+, +, -, -) schedule gives the
four-step sign-modulated map.

Ensemble evolution uses a lifted representation: the momentum is held as
an integer winding ``j`` plus a remainder ``r`` in [0, 2*pi) and the angle is
reduced to [0, 2*pi) every kick, with the rounding of 2*pi itself corrected.
Plain float64 loses ~ulp(L) per kick once L is large, which is enough to
push an orbit off a marginally stable point within 10^4 kicks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from kickedrotor.errors import NumericError, ParameterError
from kickedrotor.model import KickSchedule, PhasePoint

TWO_PI = 2 * math.pi
# 2*pi - fl(2*pi); 2*pi = TWO_PI + _TWO_PI_LO to ~1e-32.
_TWO_PI_LO = 2.4492935982947064e-16


@dataclass(frozen=True)
class ClassicalEnsemble:
    """Phase-space points stored as two parallel arrays."""

    l_tilde: np.ndarray
    theta: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        l_tilde = np.array(self.l_tilde, dtype=float).reshape(-1)
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if l_tilde.shape != theta.shape:
            raise ParameterError("l_tilde and theta must have the same length")
        l_tilde.flags.writeable = False
        theta.flags.writeable = False
        object.__setattr__(self, "l_tilde", l_tilde)
        object.__setattr__(self, "theta", theta)

    def __len__(self) -> int:
        return self.l_tilde.size

    @classmethod
    def from_points(cls, points, seed: int | None = None) -> ClassicalEnsemble:
        pts = list(points)
        return cls(np.array([p.l_tilde for p in pts]), np.array([p.theta for p in pts]), seed)

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(float(l), float(t)) for l, t in zip(self.l_tilde, self.theta)]


@dataclass(frozen=True)
class EnergySeries:
    """Scaled energies; ``values[N]`` is the energy after kick N, ``values[0]`` the initial one."""

    values: np.ndarray
    kind: Literal["quantum", "classical"]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size == 0:
            raise ParameterError("energy series must be non-empty")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise NumericError("energies must be finite and non-negative")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, n):
        return self.values[n]

    @property
    def kicks(self) -> np.ndarray:
        return np.arange(self.values.size)


def map_step(p: PhasePoint, kappa: float, sign: int) -> PhasePoint:
    """One kick followed by free rotation."""
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    if not (math.isfinite(p.l_tilde) and math.isfinite(p.theta) and math.isfinite(kappa)):
        raise NumericError("non-finite input to map_step")
    l_new = p.l_tilde + sign * kappa * math.sin(p.theta)
    return PhasePoint(l_new, p.theta + l_new)


def inverse_map_step(p: PhasePoint, kappa: float, sign: int) -> PhasePoint:
    """Exact algebraic inverse of :func:`map_step`."""
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    theta = p.theta - p.l_tilde
    return PhasePoint(p.l_tilde - sign * kappa * math.sin(theta), theta)


class _Lifted:
    """Ensemble state as ``L = 2*pi*j + r`` and ``theta`` in [0, 2*pi)."""

    def __init__(self, l_tilde: np.ndarray, theta: np.ndarray):
        self.j = np.floor(l_tilde / TWO_PI)
        self.r = l_tilde - self.j * TWO_PI
        self.theta = np.array(theta, dtype=float)
        self._reduce_theta(np.floor(self.theta / TWO_PI))

    def _reduce_theta(self, w: np.ndarray) -> None:
        self.theta -= w * TWO_PI
        self.theta -= w * _TWO_PI_LO

    def kick(self, kappa: float, sign: int) -> None:
        self.r += (sign * kappa) * np.sin(self.theta)
        w = np.floor(self.r / TWO_PI)
        self.j += w
        self.r -= w * TWO_PI
        # theta + L mod 2pi == theta + r - j * (2pi - fl(2pi)) mod 2pi
        self.theta += self.r
        self.theta -= self.j * _TWO_PI_LO
        self._reduce_theta(np.floor(self.theta / TWO_PI))

    def l_tilde(self) -> np.ndarray:
        return self.j * TWO_PI + (self.j * _TWO_PI_LO + self.r)

    def energy(self) -> float:
        l_tilde = self.l_tilde()
        return float(np.sum(l_tilde * l_tilde) / (2 * l_tilde.size))

    def displacement_from(self, j0: np.ndarray, r0: np.ndarray) -> np.ndarray:
        dj = self.j - j0
        return dj * TWO_PI + (dj * _TWO_PI_LO + (self.r - r0))


def classical_energy(e: ClassicalEnsemble) -> float:
    """Ensemble mean of L^2 / 2."""
    if len(e) == 0:
        raise ParameterError("classical energy of an empty ensemble")
    return float(np.sum(e.l_tilde**2) / (2 * len(e)))


def _check_run(e: ClassicalEnsemble, n_kicks: int) -> None:
    if len(e) == 0:
        raise ParameterError("ensemble is empty")
    if n_kicks < 1:
        raise ParameterError(f"n_kicks must be >= 1, got {n_kicks}")
    if not (np.all(np.isfinite(e.l_tilde)) and np.all(np.isfinite(e.theta))):
        raise NumericError("ensemble contains non-finite coordinates")


def evolve_ensemble(
    e: ClassicalEnsemble,
    s: KickSchedule,
    kappa: float,
    n_kicks: int,
    start_kick: int = 1,
) -> tuple[ClassicalEnsemble, EnergySeries]:
    """Iterate every point through ``n_kicks`` kicks of schedule ``s``.

    The energy is recorded after every kick; entry 0 is the initial energy.
    ``start_kick`` lets a run continue an earlier one without restarting
    the sign pattern.
    """
    _check_run(e, n_kicks)
    state = _Lifted(e.l_tilde, e.theta)
    energies = np.empty(n_kicks + 1)
    energies[0] = classical_energy(e)
    for i, sign in enumerate(s.signs(n_kicks, start_kick), start=1):
        state.kick(kappa, sign)
        energies[i] = state.energy()
    if not np.all(np.isfinite(energies)):
        raise NumericError("classical evolution produced non-finite values")
    return ClassicalEnsemble(state.l_tilde(), state.theta, e.seed), EnergySeries(energies, "classical")


def poincare_section(e: ClassicalEnsemble, s: KickSchedule, kappa: float, n_kicks: int) -> np.ndarray:
    """Stroboscopic section: ``(theta mod 2pi, L mod 2pi)`` after every kick.

    Returns an array of shape ``(len(e) * n_kicks, 2)``, kick-major.
    """
    _check_run(e, n_kicks)
    n = len(e)
    out = np.empty((n_kicks * n, 2))
    state = _Lifted(e.l_tilde, e.theta)
    for i, sign in enumerate(s.signs(n_kicks)):
        state.kick(kappa, sign)
        out[i * n:(i + 1) * n, 0] = state.theta
        out[i * n:(i + 1) * n, 1] = state.r
    return out


def default_transport_target(s: KickSchedule, kappa: float) -> float:
    """Per-kick momentum gain expected on a transporting island.

    For the standard map this is the nearest non-zero multiple of 2*pi to
    ``kappa``; for sign-modulated schedules, the nearest odd multiple of pi.
    """
    if s.label == "KR":
        return TWO_PI * max(1, round(kappa / TWO_PI))
    return math.pi * (2 * max(0, round((kappa / math.pi - 1) / 2)) + 1)


def transport_gains(
    l0: np.ndarray, theta0: np.ndarray, s: KickSchedule, kappa: float, n_kicks: int
) -> np.ndarray:
    """Mean momentum gain per kick, ``(L_N - L_0) / N``, for each starting point."""
    state = _Lifted(np.asarray(l0, dtype=float), np.asarray(theta0, dtype=float))
    j0, r0 = state.j.copy(), state.r.copy()
    for sign in s.signs(n_kicks):
        state.kick(kappa, sign)
    return state.displacement_from(j0, r0) / n_kicks


def transport_classify(
    p0: PhasePoint,
    s: KickSchedule,
    kappa: float,
    n_kicks: int = 2000,
    tol: float = 0.05 * math.pi,
    target: float | None = None,
) -> tuple[bool, float]:
    """Ballistic-transport test from the total displacement over the run.

    A trajectory is transporting when ``| |mean_gain| - target | < tol``.
    Points on the sticky boundary of an island can be misclassified when
    ``n_kicks`` is short.
    """
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if n_kicks < 1:
        raise ParameterError(f"n_kicks must be >= 1, got {n_kicks}")
    if target is None:
        target = default_transport_target(s, kappa)
    gain = float(transport_gains(np.array([p0.l_tilde]), np.array([p0.theta]), s, kappa, n_kicks)[0])
    return abs(abs(gain) - target) < tol, gain


def island_fraction(
    cell: tuple[float, float, float, float],
    resolution: int,
    s: KickSchedule,
    kappa: float,
    n_kicks: int = 2000,
    tol: float = 0.05 * math.pi,
    target: float | None = None,
) -> float:
    """Fraction of a uniform grid over ``cell = (theta_lo, theta_hi, L_lo, L_hi)``
    classified as transporting."""
    th_lo, th_hi, l_lo, l_hi = cell
    if not (th_hi > th_lo and l_hi > l_lo):
        raise ParameterError(f"degenerate cell {cell!r}")
    if resolution < 32:
        raise ParameterError(f"resolution must be >= 32 per axis, got {resolution}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if target is None:
        target = default_transport_target(s, kappa)
    grid = grid_ensemble(cell, resolution, resolution)
    gains = transport_gains(grid.l_tilde, grid.theta, s, kappa, n_kicks)
    return float(np.mean(np.abs(np.abs(gains) - target) < tol))


def grid_ensemble(cell: tuple[float, float, float, float], n_theta: int, n_l: int) -> ClassicalEnsemble:
    """Cell-centred rectangular grid of initial conditions."""
    th_lo, th_hi, l_lo, l_hi = cell
    th = th_lo + (np.arange(n_theta) + 0.5) * (th_hi - th_lo) / n_theta
    ll = l_lo + (np.arange(n_l) + 0.5) * (l_hi - l_lo) / n_l
    tt, lg = np.meshgrid(th, ll)
    return ClassicalEnsemble(lg.ravel(), tt.ravel())


def uniform_theta_ensemble(
    n: int, l_tilde: float = 0.0, stratified: bool = True, seed: int | None = None
) -> ClassicalEnsemble:
    """Points at fixed momentum with angles uniform on [0, 2pi).

    The default stratified mode places angles at cell centres, which removes
    sampling noise from ensemble energies; ``stratified=False`` draws them.
    """
    if n < 1:
        raise ParameterError(f"ensemble size must be >= 1, got {n}")
    if stratified:
        theta = (np.arange(n) + 0.5) * (TWO_PI / n)
        seed = None
    else:
        theta = np.random.default_rng(seed).uniform(0.0, TWO_PI, n)
    return ClassicalEnsemble(np.full(n, float(l_tilde)), theta, seed)


def sample_wigner_gaussian(sigma_theta: float, tau: float, n: int, seed: int) -> ClassicalEnsemble:
    """Sample the (positive) Wigner function of a minimum-uncertainty Gaussian.

    Angles have standard deviation ``sigma_theta``; scaled momenta have
    ``tau / (2 * sigma_theta)``; both centred at zero.
    """
    if not sigma_theta > 0:
        raise ParameterError(f"sigma_theta must be positive, got {sigma_theta}")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    if n < 1:
        raise ParameterError(f"ensemble size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    theta = rng.normal(0.0, sigma_theta, n)
    l_tilde = rng.normal(0.0, tau / (2 * sigma_theta), n)
    return ClassicalEnsemble(l_tilde, theta, seed)
