"""Split-operator Floquet propagation of the quantum kicked rotor.

States are amplitude vectors over the grid index ``m = -B, ..., B-1``; the
physical momentum (in units of hbar) of index ``m`` is ``m / M`` where the
spatial period is ``2*pi*M``. For ``M = 1`` this is the ordinary rotor.

One kick applies ``exp(-i * sign * k * cos(theta))`` pointwise in the angle
representation and then the free phase ``exp(-i * tau * p**2 / 2)``.
Observables are taken after complete kicks.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy import special

from kickedrotor.classical import EnergySeries
from kickedrotor.errors import NumericGuardError, ParameterError
from kickedrotor.model import KickSchedule

NORM_TOL = 1e-10
EDGE_TOL = 1e-12
EDGE_FRACTION = 0.01


def _edge_width(basis_half: int) -> int:
    # Guard band on each side: 1% of the indices in total.
    return max(1, math.ceil(EDGE_FRACTION * basis_half))


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray
    boundary_multiplier: int
    tau: float

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 2 or amps.size % 2:
            raise ParameterError(f"basis size must be even and >= 2, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def basis_half(self) -> int:
        return self.amplitudes.size // 2

    @property
    def indices(self) -> np.ndarray:
        b = self.basis_half
        return np.arange(-b, b)

    @property
    def momenta(self) -> np.ndarray:
        return self.indices / self.boundary_multiplier

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))

    def edge_probability(self) -> float:
        """Probability in the outermost 1% of grid indices."""
        return _edge_probability(self.probabilities())

    def is_valid(self) -> bool:
        return abs(self.norm() - 1) < NORM_TOL and self.edge_probability() < EDGE_TOL

    def index_of(self, m: int) -> int:
        """Array position of grid index ``m``."""
        return m + self.basis_half


@dataclass(frozen=True, eq=False)
class MomentumDistribution:
    probabilities: np.ndarray
    boundary_multiplier: int = 1

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=float).reshape(-1)
        if np.any(p < 0):
            raise ParameterError("probabilities must be non-negative")
        if abs(p.sum() - 1) > NORM_TOL:
            raise ParameterError(f"probabilities sum to {p.sum()!r}, expected 1")
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    @property
    def indices(self) -> np.ndarray:
        b = self.probabilities.size // 2
        return np.arange(-b, b)

    @property
    def momenta(self) -> np.ndarray:
        return self.indices / self.boundary_multiplier


def _edge_probability(prob: np.ndarray) -> float:
    w = _edge_width(prob.size // 2)
    return float(np.sum(prob[:w]) + np.sum(prob[-w:]))


def _check_basis(basis_half: int) -> None:
    if isinstance(basis_half, bool) or not isinstance(basis_half, (int, np.integer)) or basis_half < 1:
        raise ParameterError(f"basis half-size must be a positive integer, got {basis_half!r}")


def init_fock(m0: int, basis_half: int, boundary_multiplier: int = 1, tau: float = 0.1) -> QuantumState:
    """Momentum eigenstate with integer physical momentum ``m0``."""
    _check_basis(basis_half)
    idx = m0 * boundary_multiplier
    if not abs(m0) < basis_half or not -basis_half <= idx < basis_half:
        raise ParameterError(f"m0={m0} lies outside the grid of half-size {basis_half}")
    amps = np.zeros(2 * basis_half, dtype=complex)
    amps[idx + basis_half] = 1.0
    return QuantumState(amps, boundary_multiplier, tau)


def init_gaussian(width_sq: float, basis_half: int, boundary_multiplier: int, tau: float) -> QuantumState:
    """Gaussian ``psi(theta) ~ exp(-theta**2 / (2 * width_sq))`` on [-pi*M, pi*M).

    ``width_sq = 9`` gives ``exp(-theta**2 / 18)``. Raises if the probability
    outside the spatial domain, or in the momentum guard band, exceeds 1e-12.
    """
    if not width_sq > 0:
        raise ParameterError(f"width_sq must be positive, got {width_sq}")
    _check_basis(basis_half)
    M = boundary_multiplier
    half_len = math.pi * M
    # |psi|^2 ~ exp(-theta^2 / s): mass beyond +-a is erfc(a / sqrt(s)).
    leakage = math.erfc(half_len / math.sqrt(width_sq))
    if leakage > EDGE_TOL:
        raise ParameterError(
            f"Gaussian tail outside [-{M}pi, {M}pi) is {leakage:.3e} > {EDGE_TOL:g}; increase the boundary multiplier"
        )
    n = 2 * basis_half
    j = np.arange(n)
    theta = 2 * half_len * j / n
    theta = np.where(theta >= half_len, theta - 2 * half_len, theta)
    psi = np.exp(-theta**2 / (2 * width_sq))
    # The (-1)^j factor maps the natural-order index grid onto FFT order.
    amps = scipy.fft.fft(np.where(j % 2, -psi, psi))
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    state = QuantumState(amps, M, tau)
    edge = state.edge_probability()
    if edge > EDGE_TOL:
        raise ParameterError(
            f"Gaussian momentum tail in the guard band is {edge:.3e} > {EDGE_TOL:g}; increase the basis size"
        )
    return state


class FloquetPropagator:
    """Precomputed phase factors for kicks on one grid.

    ``step`` is the kick-then-free map for one period; ``delay`` applies
    ``exp(-i * pi * p**2)``, the free evolution over the delay time.

    The kick only couples grid indices that differ by a multiple of ``M``, so
    when ``M`` divides the grid size the work is done per residue class: the
    ``*_classes`` methods act on a ``(M, 2B/M)`` array whose row ``r`` holds
    the indices congruent to ``r`` modulo ``M``. Each row then needs an FFT
    of length ``2B/M`` with the kick sampled on ``[0, 2pi)``.
    """

    def __init__(self, basis_half: int, tau: float, k: float, boundary_multiplier: int = 1):
        _check_basis(basis_half)
        self.basis_half = int(basis_half)
        self.tau = float(tau)
        self.k = float(k)
        self.boundary_multiplier = M = int(boundary_multiplier)
        n = 2 * self.basis_half
        self.classes = M if n % M == 0 else 1
        row = n // self.classes
        theta = 2 * math.pi * M * np.arange(row) / n
        self._kick = np.exp(-1j * self.k * np.cos(theta))
        self._kick_rev = self._kick.conj()
        m = np.arange(-self.basis_half, self.basis_half, dtype=np.int64)
        p = m / M
        # pi * p^2 mod 2pi, reduced in integers so M = 1 gives exactly (-1)^m
        period = 2 * M**2
        self._free = self.to_classes(np.exp(-0.5j * self.tau * p**2))
        self._delay = self.to_classes(np.exp(-1j * math.pi * ((m * m) % period) / M**2))
        self.energy_weights = 0.5 * (self.tau * p) ** 2
        self.class_weights = self.to_classes(self.energy_weights)
        w = _edge_width(self.basis_half)
        flat = np.arange(n).reshape(row, self.classes).T.reshape(-1)
        self._edge_pos = np.flatnonzero((flat < w) | (flat >= n - w))

    def to_classes(self, amps: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(amps.reshape(-1, self.classes).T)

    def from_classes(self, rows: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(rows.T).reshape(-1)

    def kick_classes(self, rows: np.ndarray, sign: int) -> np.ndarray:
        psi = scipy.fft.ifft(rows, axis=1)
        psi *= self._kick if sign > 0 else self._kick_rev
        return scipy.fft.fft(psi, axis=1, overwrite_x=True)

    def step_classes(self, rows: np.ndarray, sign: int) -> np.ndarray:
        out = self.kick_classes(rows, sign)
        out *= self._free
        return out

    def edge_classes(self, prob: np.ndarray) -> float:
        return float(np.sum(prob.reshape(-1)[self._edge_pos]))

    def kick(self, amps: np.ndarray, sign: int) -> np.ndarray:
        return self.from_classes(self.kick_classes(self.to_classes(amps), sign))

    def step(self, amps: np.ndarray, sign: int) -> np.ndarray:
        return self.from_classes(self.step_classes(self.to_classes(amps), sign))

    def delay_classes(self, rows: np.ndarray) -> np.ndarray:
        return rows * self._delay

    def free(self, amps: np.ndarray) -> np.ndarray:
        return self.from_classes(self.to_classes(amps) * self._free)

    def delay(self, amps: np.ndarray) -> np.ndarray:
        return self.from_classes(self.delay_classes(self.to_classes(amps)))


@functools.lru_cache(maxsize=4)
def get_propagator(basis_half: int, tau: float, k: float, boundary_multiplier: int = 1) -> FloquetPropagator:
    return FloquetPropagator(basis_half, tau, k, boundary_multiplier)


def _propagator_for(psi: QuantumState, k: float) -> FloquetPropagator:
    return get_propagator(psi.basis_half, psi.tau, float(k), psi.boundary_multiplier)


def _check(prob: np.ndarray, edge: float, where: str) -> None:
    drift = abs(float(np.sum(prob)) - 1.0)
    if not drift < NORM_TOL:
        raise NumericGuardError(f"norm drift {drift:.3e} exceeds {NORM_TOL:g} {where}")
    if not edge < EDGE_TOL:
        raise NumericGuardError(f"edge occupancy {edge:.3e} exceeds {EDGE_TOL:g} {where}; increase the basis size")


def _guard(amps: np.ndarray, where: str) -> np.ndarray:
    prob = amps.real**2 + amps.imag**2
    _check(prob, _edge_probability(prob), where)
    return prob


def _wrap(psi: QuantumState, amps: np.ndarray, where: str) -> QuantumState:
    _guard(amps, where)
    return QuantumState(amps, psi.boundary_multiplier, psi.tau)


def kr_step(psi: QuantumState, k: float, sign: int = 1) -> QuantumState:
    """One kick of strength ``sign * k`` followed by free evolution."""
    if sign not in (1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    return _wrap(psi, _propagator_for(psi, k).step(psi.amplitudes, sign), "after kick")


def mkr_cycle(psi: QuantumState, k: float) -> QuantumState:
    """Four kicks with signs (+, +, -, -)."""
    prop = _propagator_for(psi, k)
    rows = prop.to_classes(psi.amplitudes)
    for sign in (1, 1, -1, -1):
        rows = prop.step_classes(rows, sign)
    return _wrap(psi, prop.from_classes(rows), "after modulated cycle")


def delay_cycle(psi: QuantumState, k: float) -> QuantumState:
    """Four positive kicks with a delay phase after every second one.

    On the integer ladder (M = 1) the delay phase is (-1)^m, which shifts the
    angle by pi and so reverses the kick; the result equals :func:`mkr_cycle`.
    Off the integer ladder the two differ.
    """
    prop = _propagator_for(psi, k)
    rows = prop.to_classes(psi.amplitudes)
    for _ in range(2):
        rows = prop.step_classes(rows, 1)
        rows = prop.step_classes(rows, 1)
        rows = prop.delay_classes(rows)
    return _wrap(psi, prop.from_classes(rows), "after delayed cycle")


def quantum_energy(psi: QuantumState) -> float:
    """Scaled energy sum_m P(m) * (tau * m / M)**2 / 2."""
    return float(np.sum(psi.probabilities() * 0.5 * (psi.tau * psi.momenta) ** 2))


def momentum_distribution(psi: QuantumState) -> MomentumDistribution:
    return MomentumDistribution(psi.probabilities(), psi.boundary_multiplier)


def evolve_quantum(
    psi: QuantumState,
    s: KickSchedule,
    k: float,
    n_kicks: int,
    start_kick: int = 1,
    progress=None,
) -> tuple[QuantumState, EnergySeries]:
    """Propagate through ``n_kicks`` kicks, recording the energy after each.

    Aborts with :class:`NumericGuardError` as soon as the norm drifts by more
    than 1e-10 or probability reaches the momentum guard band.
    ``progress`` is an optional callable receiving the kick count.
    """
    if n_kicks < 1:
        raise ParameterError(f"n_kicks must be >= 1, got {n_kicks}")
    prop = FloquetPropagator(psi.basis_half, psi.tau, k, psi.boundary_multiplier)
    rows = prop.to_classes(psi.amplitudes)
    energies = np.empty(n_kicks + 1)
    energies[0] = float(np.sum(psi.probabilities() * prop.energy_weights))
    for i, sign in enumerate(s.signs(n_kicks, start_kick), start=1):
        rows = prop.step_classes(rows, sign)
        prob = rows.real**2 + rows.imag**2
        _check(prob, prop.edge_classes(prob), f"at kick {start_kick + i - 1}")
        energies[i] = float(np.sum(prob * prop.class_weights))
        if progress is not None:
            progress(i)
    amps = prop.from_classes(rows)
    return QuantumState(amps, psi.boundary_multiplier, psi.tau), EnergySeries(energies, "quantum")


def kick_matrix_element(m: int, mp: int, k: float) -> complex:
    """<m| exp(-i k cos(theta)) |mp> = (-i)^(m - mp) J_(m - mp)(k)."""
    n = m - mp
    return complex((-1j) ** (n % 4) * special.jv(n, k))


def dense_kick_matrix(m_values: np.ndarray, k: float) -> np.ndarray:
    """Kick operator restricted to the integer momenta ``m_values``."""
    m = np.asarray(m_values)
    diff = m[:, None] - m[None, :]
    return (-1j) ** (diff % 4) * special.jv(diff, k)
