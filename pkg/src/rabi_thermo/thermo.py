"""Effective temperatures, thermalization verdicts and Gibbs populations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .baths import DEFAULT_OMEGA_DEG
from .errors import InsufficientSupport, TruncationInadequate, UndefinedTemperature
from .qrm_core import Eigensystem

DEFAULT_P_FLOOR = 1e-12
DEFAULT_VERDICT_TOL = 1e-3
DEFAULT_LEVELS = 10
GIBBS_TAIL_LIMIT = 1e-10


def effective_temperature(p_m: float, p_n: float, omega_mn: float,
                          p_floor: float = DEFAULT_P_FLOOR,
                          omega_deg: float = DEFAULT_OMEGA_DEG) -> float:
    """Temperature T with p_m / p_n = exp(-omega_mn / T), i.e. omega_mn / ln(p_n / p_m).

    A population inversion (p_m > p_n for the upper level m) gives a negative
    value, which callers should treat as non-thermal.
    """
    if not (p_m > p_floor and p_n > p_floor):
        raise UndefinedTemperature(f"populations {p_m:.3g}, {p_n:.3g} below floor")
    if not omega_mn > omega_deg:
        raise UndefinedTemperature(f"gap {omega_mn:.3g} not above {omega_deg:g}")
    log_ratio = np.log(p_n) - np.log(p_m)
    if log_ratio == 0:
        raise UndefinedTemperature("equal populations (infinite temperature)")
    return float(omega_mn / log_ratio)


@dataclass(frozen=True)
class EffTempReport:
    """Pairwise effective temperatures over the lowest levels (0-based keys, m > n)."""

    entries: dict
    spread: float
    thermalized: bool
    temperature: float | None
    undefined_pairs: list = field(default_factory=list)
    inverted_pairs: list = field(default_factory=list)
    tol: float = DEFAULT_VERDICT_TOL

    @property
    def verdict(self) -> str:
        return "thermalized" if self.thermalized else "not_thermalized"

    @property
    def relative_spread(self) -> float:
        values = np.array(list(self.entries.values()))
        return float(self.spread / np.mean(values))


def thermalization_report(p, eig: Eigensystem, tol: float = DEFAULT_VERDICT_TOL,
                          n_levels: int = DEFAULT_LEVELS, p_floor: float = DEFAULT_P_FLOOR,
                          omega_deg: float = DEFAULT_OMEGA_DEG) -> EffTempReport:
    """Effective temperatures for all pairs among the lowest ``n_levels`` levels.

    ``p`` may be a population array or any object with a ``p`` attribute.
    The verdict is thermalized when the relative spread (max - min) / mean of
    the defined entries is below ``tol`` and no pair is inverted; the
    reported temperature is then the mean weighted by p_m + p_n.
    """
    p = np.asarray(getattr(p, "p", p), dtype=float)
    L = min(n_levels, len(p))
    entries, weights, undefined, inverted = {}, [], [], []
    for m in range(L):
        for n in range(m):
            try:
                T = effective_temperature(p[m], p[n], eig.energies[m] - eig.energies[n],
                                          p_floor, omega_deg)
            except UndefinedTemperature:
                undefined.append((m, n))
                continue
            if T < 0:
                inverted.append((m, n))
                continue
            entries[m, n] = T
            weights.append(p[m] + p[n])
    if len(entries) < 3:
        raise InsufficientSupport(f"only {len(entries)} effective temperatures defined")

    values = np.array(list(entries.values()))
    spread = float(values.max() - values.min())
    thermalized = bool(not inverted and spread / values.mean() < tol)
    T_star = float(np.average(values, weights=weights)) if thermalized else None
    return EffTempReport(entries, spread, thermalized, T_star, undefined, inverted, tol)


@dataclass(frozen=True)
class GibbsPopulations:
    beta: float
    p: np.ndarray
    log_Z: float
    top_weight: float

    @property
    def Z(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_Z))

    @property
    def truncation_ok(self) -> bool:
        return self.top_weight <= GIBBS_TAIL_LIMIT


def gibbs_populations(eig: Eigensystem, beta: float, strict: bool = False) -> GibbsPopulations:
    """Boltzmann weights exp(-beta eps_m) / Z over the retained eigenstates.

    Computed in the log domain. The weight of the highest retained level is
    kept as a truncation diagnostic; with ``strict=True`` a weight above
    1e-10 raises :class:`TruncationInadequate`.
    """
    if not beta >= 0:
        raise ValueError("beta must be nonnegative")
    log_w = -beta * np.asarray(eig.energies, dtype=float)
    log_Z = float(logsumexp(log_w))
    p = np.exp(log_w - log_Z)
    top = float(p[-1])
    if strict and top > GIBBS_TAIL_LIMIT:
        raise TruncationInadequate(
            f"top retained level carries weight {top:.3g} at beta={beta:g}")
    return GibbsPopulations(float(beta), p, log_Z, top)
