"""Stationary states of the rate equation and of the full Liouvillian."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .entangle import DensityMatrix
from .errors import NonUniqueSteadyState, SingularSolve
from .lindblad import Liouvillian, RateMatrix

CLAMP = 1e-14
MAX_CONDITION = 1e12
DEFAULT_TRUNCATION_TOL = 1e-8


def tail_mass(p: np.ndarray, fraction: float = 0.1) -> float:
    """Total population on the top ``fraction`` of retained levels."""
    k = max(1, math.ceil(fraction * len(p)))
    return float(np.sum(p[-k:]))


@dataclass(frozen=True)
class SteadyPopulations:
    p: np.ndarray
    residual: float
    tail_mass: float


def closed_classes(adjacency: np.ndarray) -> list[np.ndarray]:
    """Closed communicating classes of the directed graph ``adjacency[i, j]`` (i -> j)."""
    n_comp, labels = connected_components(csr_matrix(adjacency), directed=True,
                                          connection="strong")
    src, dst = np.nonzero(adjacency)
    leaky = np.zeros(n_comp, dtype=bool)
    leaky[labels[src][labels[src] != labels[dst]]] = True
    return [np.flatnonzero(labels == c) for c in range(n_comp) if not leaky[c]]


def _require_unique(adjacency):
    classes = closed_classes(adjacency)
    if len(classes) != 1:
        raise NonUniqueSteadyState(
            f"rate graph has {len(classes)} closed classes; the stationary state is not unique")


def solve_rate_steady(W) -> SteadyPopulations:
    """Normalized kernel of the population generator via a bordered linear system.

    The first balance row is replaced by the normalization constraint. Tiny
    negative populations (above -1e-14) are clamped to zero.

    Raises
    ------
    NonUniqueSteadyState
        If the transition graph has more than one closed class.
    SingularSolve
        If the bordered system has condition number above 1e12, or the
        solution has populations below -1e-14.
    """
    W = W.W if isinstance(W, RateMatrix) else np.asarray(W, dtype=float)
    D = W.shape[0]
    off = W - np.diag(np.diag(W))
    if np.any(off < 0):
        raise ValueError("off-diagonal rates must be nonnegative")
    _require_unique(off.T > 0)

    scale = np.max(np.abs(W)) or 1.0
    M = W / scale
    M[0, :] = 1.0
    rhs = np.zeros(D)
    rhs[0] = 1.0
    cond = np.linalg.cond(M)
    if not cond <= MAX_CONDITION:
        raise SingularSolve(f"bordered system condition number {cond:.3g}")
    p = np.linalg.solve(M, rhs)
    if p.min() < -CLAMP:
        raise SingularSolve(f"negative population {p.min():.3g}")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    residual = float(np.max(np.abs(W @ p)))
    return SteadyPopulations(p, residual, tail_mass(p))


def solve_liouvillian_steady(L: Liouvillian, residual_tol: float = 1e-9) -> DensityMatrix:
    """Unit-trace kernel of the full generator, returned in the Liouvillian's basis."""
    D = L.dim
    source, target, rate = L.jumps
    adjacency = np.zeros((D, D), dtype=bool)
    adjacency[source, target] = True
    _require_unique(adjacency)

    M = L.matrix.copy()
    trace_row = np.eye(D).reshape(-1)
    M[0, :] = trace_row
    rhs = np.zeros(D * D, dtype=complex)
    rhs[0] = 1.0
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    rcond, info = scipy.linalg.lapack.zgecon(lu, np.linalg.norm(M, 1), norm="1")
    if info != 0 or not rcond >= 1.0 / MAX_CONDITION:
        raise NonUniqueSteadyState(f"bordered Liouvillian is singular (rcond {rcond:.3g})")
    x = scipy.linalg.lu_solve((lu, piv), rhs)

    rho = x.reshape(D, D)
    rho = 0.5 * (rho + rho.conj().T)
    w, U = np.linalg.eigh(rho)
    if w.min() < -1e-10:
        raise SingularSolve(f"steady state not positive (eigenvalue {w.min():.3g})")
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        rho = (U * w) @ U.conj().T
    rho /= np.trace(rho).real
    residual = np.max(np.abs(L.matrix @ rho.reshape(-1)))
    if residual > residual_tol:
        raise SingularSolve(f"Liouvillian residual {residual:.3g}")
    n_max = D // 2 - 1
    return DensityMatrix(rho, n_max, basis=L.basis)


@dataclass(frozen=True)
class TruncationCheck:
    passed: bool
    tail_mass: float
    tol: float
    report: str


def check_truncation(p, tol: float = DEFAULT_TRUNCATION_TOL) -> TruncationCheck:
    if isinstance(p, SteadyPopulations):
        mass = p.tail_mass
    else:
        mass = tail_mass(np.asarray(p, dtype=float))
    if mass < tol:
        return TruncationCheck(True, mass, tol, f"tail mass {mass:.3g} below {tol:g}")
    return TruncationCheck(False, mass, tol,
                           f"tail mass {mass:.3g} exceeds {tol:g}; increase n_max")
