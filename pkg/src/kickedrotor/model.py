"""Dimensionless parameters, kick-sign schedules and marginally stable points.

Kick indices are 1-based throughout the package: kick ``n`` receives the sign
``schedule.sign(n) == pattern[(n - 1) % period]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

from kickedrotor.errors import ParameterError

ScheduleKind = Literal["KR", "MKR", "GEN"]


@dataclass(frozen=True)
class SimParams:
    """Dimensionless kick strength ``kappa``, effective Planck constant ``tau``
    and spatial boundary multiplier ``boundary_multiplier`` (period 2*pi*M).

    ``kappa`` is primary; the quantum kick strength ``k = kappa / tau`` is derived.
    """

    kappa: float
    tau: float
    boundary_multiplier: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ParameterError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ParameterError(f"tau must be positive and finite, got {self.tau!r}")
        m = self.boundary_multiplier
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ParameterError(f"boundary_multiplier must be an integer >= 1, got {m!r}")

    @property
    def k(self) -> float:
        return self.kappa / self.tau

    @classmethod
    def from_k(cls, k: float, tau: float, boundary_multiplier: int = 1) -> SimParams:
        return cls(kappa=k * tau, tau=tau, boundary_multiplier=boundary_multiplier)


@dataclass(frozen=True)
class KickSchedule:
    pattern: tuple[int, ...]
    label: str
    period: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ParameterError("kick pattern must be non-empty")
        if any(s not in (1, -1) or isinstance(s, bool) for s in self.pattern):
            raise ParameterError(f"kick signs must be +1 or -1, got {self.pattern!r}")
        object.__setattr__(self, "period", len(self.pattern))

    def sign(self, n: int) -> int:
        """Sign of kick ``n`` (1-based)."""
        if n < 1:
            raise ParameterError(f"kick index is 1-based, got {n}")
        return self.pattern[(n - 1) % self.period]

    def signs(self, n_kicks: int, start: int = 1) -> list[int]:
        """Signs of kicks ``start, start + 1, ..., start + n_kicks - 1``."""
        return [self.sign(n) for n in range(start, start + n_kicks)]


@dataclass(frozen=True)
class PhasePoint:
    l_tilde: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.l_tilde) and math.isfinite(self.theta)):
            raise ParameterError(f"phase point must be finite, got ({self.l_tilde}, {self.theta})")

    def wrapped(self) -> tuple[float, float]:
        """``(theta mod 2pi, l_tilde)`` for reporting."""
        return self.theta % (2 * math.pi), self.l_tilde


def make_schedule(label: str, n_half: int | None = None) -> KickSchedule:
    """Build a kick-sign schedule.

    ``KR`` kicks always with +1, ``MKR`` uses (+1, +1, -1, -1) and ``GEN``
    alternates blocks of ``2 * n_half`` equal signs, so ``n_half`` = 3, 5, 7
    reverses the potential after every 6, 10, 14 kicks.
    """
    kind = label.upper()
    if kind == "KR":
        return KickSchedule((1,), "KR")
    if kind == "MKR":
        return KickSchedule((1, 1, -1, -1), "MKR")
    if kind == "GEN":
        if n_half is None:
            raise ParameterError("GEN schedule requires n_half")
        if isinstance(n_half, bool) or not isinstance(n_half, int) or n_half < 3 or n_half % 2 == 0:
            raise ParameterError(f"GEN n_half must be an odd integer >= 3, got {n_half!r}")
        block = 2 * n_half
        return KickSchedule((1,) * block + (-1,) * block, f"GEN({block})")
    raise ParameterError(f"unknown schedule kind {label!r}; expected KR, MKR or GEN")


def parse_schedule(spec: str) -> KickSchedule:
    """Parse the command-line form: ``kr``, ``mkr`` or ``genN`` (N kicks per sign block)."""
    s = spec.strip().lower()
    if s in ("kr", "mkr"):
        return make_schedule(s)
    if s.startswith("gen"):
        try:
            block = int(s[3:])
        except ValueError:
            raise ParameterError(f"bad generalized schedule {spec!r}; expected genN, e.g. gen6") from None
        if block % 2:
            raise ParameterError(f"generalized block length must be even (6, 10, 14, ...), got {block}")
        return make_schedule("GEN", block // 2)
    raise ParameterError(f"unknown schedule {spec!r}; expected kr, mkr or genN")


def marginal_points(variant: str, l1: int, l2: int) -> tuple[float, list[PhasePoint]]:
    """Kick strength and the two marginally stable points for integers ``l1, l2``.

    KR: kappa = 2*pi*l2 at (2*pi*l1, +-pi/2).
    MKR: kappa = (2*l2 + 1)*pi at ((2*l1 + 1)*pi, +-pi/2).
    Angles are reported in [0, 2*pi), so -pi/2 appears as 3*pi/2.
    """
    kind = variant.upper()
    if kind == "KR":
        kappa = 2 * math.pi * l2
        l_tilde = 2 * math.pi * l1
    elif kind == "MKR":
        kappa = (2 * l2 + 1) * math.pi
        l_tilde = (2 * l1 + 1) * math.pi
    else:
        raise ParameterError(f"marginal points are defined for KR and MKR, got {variant!r}")
    return kappa, [PhasePoint(l_tilde, math.pi / 2), PhasePoint(l_tilde, 3 * math.pi / 2)]
