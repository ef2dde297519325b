"""Heat-bath configurations, flat decay rates and Bose-Einstein occupations."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGap

DEFAULT_OMEGA_DEG = 1e-8


class Topology(str, enum.Enum):
    IHB = "IHB"  # one bath per subsystem
    CHB = "CHB"  # a single bath shared by the TLS and the mode


@dataclass(frozen=True)
class BathConfig:
    """Bath temperatures (k_B T in units of hbar*omega0) and flat decay rates.

    ``T_sigma``/``T_a`` are used for IHB, ``T_common`` for CHB.
    """

    topology: Topology
    gamma_sigma: float
    gamma_a: float
    T_sigma: float = 0.0
    T_a: float = 0.0
    T_common: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        for name in ("T_sigma", "T_a", "T_common"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("gamma_sigma", "gamma_a"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.topology is Topology.CHB and self.gamma_sigma + self.gamma_a <= 0:
            raise ValueError("CHB needs gamma_sigma + gamma_a > 0")

    @classmethod
    def ihb(cls, T_sigma, T_a, gamma_sigma, gamma_a):
        return cls(Topology.IHB, gamma_sigma, gamma_a, T_sigma=T_sigma, T_a=T_a)

    @classmethod
    def chb(cls, T, gamma_sigma, gamma_a):
        return cls(Topology.CHB, gamma_sigma, gamma_a, T_common=T)

    @property
    def gamma_x(self) -> float:
        return cross_rate(self.gamma_sigma, self.gamma_a)

    def scaled(self, factor: float) -> "BathConfig":
        """Same bath with both decay rates multiplied by ``factor``."""
        return BathConfig(self.topology, self.gamma_sigma * factor, self.gamma_a * factor,
                          self.T_sigma, self.T_a, self.T_common)


def thermal_occupation(omega, T, omega_deg=DEFAULT_OMEGA_DEG):
    """Bose-Einstein occupation 1/(exp(omega/T) - 1).

    Accepts scalars or arrays for ``omega``; ``T = 0`` gives exactly 0.

    Raises
    ------
    DegenerateGap
        If any ``omega <= omega_deg``.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= omega_deg):
        raise DegenerateGap(f"occupation undefined at gap <= {omega_deg:g}")
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    if T == 0:
        out = np.zeros_like(w)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(w / T)
    return out if out.ndim else float(out)


def cross_rate(gamma_sigma: float, gamma_a: float) -> float:
    if gamma_sigma < 0 or gamma_a < 0:
        raise ValueError("rates must be nonnegative")
    return float(np.sqrt(gamma_sigma * gamma_a))
