"""
Thermal states in the bare product basis and their logarithmic negativity.

The bare index ``2*n + s`` puts the mode first, so ``rho.reshape(N, 2, N, 2)``
is indexed ``[n, s, n', s']``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .qrm_core import Eigensystem, ModelParams, eigensystem
from .thermo import gibbs_populations

NEGATIVITY_CLAMP = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray
    n_max: int
    basis: str = "bare"
    truncation_ok: bool = True

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def thermal_density_matrix(eig: Eigensystem, beta: float, strict: bool = False) -> DensityMatrix:
    gibbs = gibbs_populations(eig, beta, strict=strict)
    V = eig.vectors
    rho = (V * gibbs.p) @ V.T
    rho = 0.5 * (rho + rho.T)
    return DensityMatrix(rho, eig.dim // 2 - 1, "bare", gibbs.truncation_ok)


def partial_transpose_mode(rho) -> np.ndarray:
    """Transpose the bosonic-mode indices: [(s,n),(s',n')] <- [(s,n'),(s',n)]."""
    r = getattr(rho, "rho", rho)
    D = r.shape[0]
    N = D // 2
    return r.reshape(N, 2, N, 2).transpose(2, 1, 0, 3).reshape(D, D)


def trace_norm(X: np.ndarray, method: str = "eig") -> float:
    """Trace norm Tr sqrt(X^dag X).

    ``"eig"`` sums absolute eigenvalues and requires Hermitian ``X``;
    ``"svd"`` sums the square roots of the eigenvalues of X^dag X, obtained
    as singular values of X.
    """
    if method == "eig":
        return float(np.sum(np.abs(np.linalg.eigvalsh(X))))
    if method == "svd":
        return float(np.sum(np.linalg.svd(X, compute_uv=False)))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class NegativityResult:
    N: float
    neg_eigensum: float
    truncation_ok: bool = True


def log_negativity(rho) -> NegativityResult:
    """log2 of the trace norm of the mode-transposed state, clamped at 0."""
    truncation_ok = getattr(rho, "truncation_ok", True)
    mu = np.linalg.eigvalsh(partial_transpose_mode(rho))
    norm = float(np.sum(np.abs(mu)))
    neg = float(-np.sum(mu[mu < 0]))
    N = 0.0 if norm < 1.0 + NEGATIVITY_CLAMP else float(np.log2(norm))
    return NegativityResult(N, neg, truncation_ok)


def default_resonant_grid():
    """(beta, g) axes of the resonant map."""
    return np.logspace(-2, 3, 60), np.linspace(0.01, 1.5, 60)


def default_detuned_grid():
    """(omega_c, g) axes of the nonresonant maps."""
    return np.linspace(0.5, 3.0, 50), np.linspace(0.01, 1.5, 50)


@dataclass(frozen=True)
class NegativityMap:
    """``values[i, j]`` is N at ``axis_values[i]`` and ``g_values[j]``."""

    axis: str
    axis_values: np.ndarray
    g_values: np.ndarray
    values: np.ndarray
    truncation_ok: np.ndarray
    fixed: dict = field(default_factory=dict)

    def rows(self):
        """Row-major ``(beta, omega_c, g, N, flag)`` tuples."""
        for i, x in enumerate(self.axis_values):
            for j, g in enumerate(self.g_values):
                beta = x if self.axis == "beta" else self.fixed["beta"]
                omega_c = x if self.axis == "omega_c" else self.fixed["omega_c"]
                flag = "ok" if self.truncation_ok[i, j] else "trunc"
                yield beta, omega_c, g, self.values[i, j], flag


def worker_count(workers=None) -> int:
    if workers:
        return max(1, int(workers))
    env = os.environ.get("RABI_THERMO_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def negativity_map(axis: str, axis_values, g_values, *, beta: float | None = None,
                   omega_c: float = 1.0, omega0: float = 1.0, n_max: int = 60,
                   workers: int | None = None) -> NegativityMap:
    """Logarithmic negativity of the thermal state over (beta, g) or (omega_c, g).

    For ``axis="beta"`` the mode frequency is ``omega_c``; for
    ``axis="omega_c"`` the inverse temperature is ``beta``. Points whose
    thermal state feels the Fock cutoff are flagged, not dropped.
    """
    axis_values = np.asarray(axis_values, dtype=float)
    g_values = np.asarray(g_values, dtype=float)
    if axis == "beta":
        fixed = {"omega_c": omega_c}
    elif axis == "omega_c":
        if beta is None:
            raise ValueError("beta is required for an omega_c map")
        fixed = {"beta": beta}
    else:
        raise ValueError("axis must be 'beta' or 'omega_c'")

    def column(j):
        g = g_values[j]
        out = np.empty(len(axis_values))
        ok = np.empty(len(axis_values), dtype=bool)
        eig = eigensystem(ModelParams(omega0, omega_c, g, n_max)) if axis == "beta" else None
        for i, x in enumerate(axis_values):
            if axis == "beta":
                rho = thermal_density_matrix(eig, x)
            else:
                rho = thermal_density_matrix(eigensystem(ModelParams(omega0, x, g, n_max)), beta)
            res = log_negativity(rho)
            out[i], ok[i] = res.N, res.truncation_ok
        return out, ok

    with ThreadPoolExecutor(worker_count(workers)) as pool:
        cols = list(pool.map(column, range(len(g_values))))
    values = np.column_stack([c[0] for c in cols])
    flags = np.column_stack([c[1] for c in cols])
    return NegativityMap(axis, axis_values, g_values, values, flags, fixed)
