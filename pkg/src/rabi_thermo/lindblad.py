"""
Global (eigenbasis) Lindblad dissipators for the open Rabi model.

Jump operators are the eigenstate ladders |n><m| (down, m > n) and |m><n|
(up). Rates are stored as net population-transfer rates, so a jump ``L`` with
rate ``r`` enters the generator as r (L rho L^dag - {L^dag L, rho}/2).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .baths import DEFAULT_OMEGA_DEG, BathConfig, Topology, thermal_occupation
from .errors import DegeneracyEncountered, DimensionTooLarge
from .qrm_core import Eigensystem, ModelParams, quadrature_op, sigma_x_op

COUPLING_CUTOFF = 1e-14
DEFAULT_MAX_DIM = 80


@dataclass(frozen=True)
class TransitionTable:
    """Coupled eigenstate pairs m > n (0-based level indices, ascending energy).

    ``skipped`` lists coupled pairs ``(m, n, omega_mn)`` dropped because their
    gap is not above ``omega_deg``.
    """

    upper: np.ndarray
    lower: np.ndarray
    omega: np.ndarray
    chi_sigma: np.ndarray
    chi_a: np.ndarray
    dim: int
    omega_deg: float = DEFAULT_OMEGA_DEG
    skipped: tuple = ()

    def __len__(self):
        return len(self.upper)

    def records(self):
        """Yield ``(m, n, omega_mn, chi_sigma, chi_a)`` with 1-based levels."""
        for row in zip(self.upper, self.lower, self.omega, self.chi_sigma, self.chi_a):
            yield int(row[0]) + 1, int(row[1]) + 1, float(row[2]), float(row[3]), float(row[4])


def transition_table(eig: Eigensystem, params: ModelParams | None = None,
                     omega_deg: float = DEFAULT_OMEGA_DEG) -> TransitionTable:
    """Transition coefficients <e_m|sx|e_n> and <e_m|(a + a^dag)|e_n> for m > n.

    Pairs where both coefficients vanish are dropped. Coupled pairs with
    ``omega_mn <= omega_deg`` are excluded and reported through a
    :class:`DegeneracyEncountered` warning, because the secular master
    equation does not hold at degenerate points.
    """
    params = params if params is not None else eig.params
    if params is None:
        raise ValueError("model parameters are required to build bare operators")
    if not omega_deg > 0:
        raise ValueError("omega_deg must be positive")
    V = eig.vectors
    chi_s = V.T @ sigma_x_op(params.n_max) @ V
    chi_q = V.T @ quadrature_op(params.n_max) @ V

    m, n = np.tril_indices(eig.dim, k=-1)
    omega = eig.energies[m] - eig.energies[n]
    cs, cq = chi_s[m, n], chi_q[m, n]
    coupled = (np.abs(cs) >= COUPLING_CUTOFF) | (np.abs(cq) >= COUPLING_CUTOFF)
    degenerate = coupled & (omega <= omega_deg)
    keep = coupled & ~degenerate

    skipped = tuple((int(a), int(b), float(w))
                    for a, b, w in zip(m[degenerate], n[degenerate], omega[degenerate]))
    if skipped:
        warnings.warn(DegeneracyEncountered(
            f"{len(skipped)} coupled pair(s) with gap <= {omega_deg:g} skipped", skipped),
            stacklevel=2)

    order = np.lexsort((n[keep], m[keep]))
    return TransitionTable(m[keep][order], n[keep][order], omega[keep][order],
                           cs[keep][order], cq[keep][order], eig.dim, omega_deg, skipped)


def transition_rates(table: TransitionTable, bath: BathConfig):
    """Per-record (downward, upward) transfer rates.

    IHB sums the two channels with their own temperatures. CHB uses the
    collective amplitude sqrt(gs) chi_s + sqrt(ga) chi_a, whose square expands
    to gs chi_s^2 + ga chi_a^2 + 2 sqrt(gs ga) chi_s chi_a.
    """
    w = table.omega
    if bath.topology is Topology.IHB:
        amp_s = bath.gamma_sigma * table.chi_sigma ** 2
        amp_a = bath.gamma_a * table.chi_a ** 2
        n_s = thermal_occupation(w, bath.T_sigma, table.omega_deg)
        n_a = thermal_occupation(w, bath.T_a, table.omega_deg)
        down = amp_s * (n_s + 1) + amp_a * (n_a + 1)
        up = amp_s * n_s + amp_a * n_a
    else:
        amp = (np.sqrt(bath.gamma_sigma) * table.chi_sigma
               + np.sqrt(bath.gamma_a) * table.chi_a) ** 2
        nbar = thermal_occupation(w, bath.T_common, table.omega_deg)
        down = amp * (nbar + 1)
        up = amp * nbar
    return np.atleast_1d(down), np.atleast_1d(up)


@dataclass(frozen=True)
class RateMatrix:
    """Population generator: ``W[n, m]`` is the m -> n rate, columns sum to zero."""

    W: np.ndarray

    @property
    def dim(self) -> int:
        return self.W.shape[0]


def assemble_rate_matrix(table: TransitionTable, down, up) -> RateMatrix:
    W = np.zeros((table.dim, table.dim))
    W[table.lower, table.upper] = down
    W[table.upper, table.lower] = up
    np.fill_diagonal(W, 0.0)
    W[np.diag_indices_from(W)] = -W.sum(axis=0)
    return RateMatrix(W)


def rates_ihb(table: TransitionTable, bath: BathConfig) -> RateMatrix:
    if bath.topology is not Topology.IHB:
        raise ValueError("rates_ihb needs an IHB bath")
    return assemble_rate_matrix(table, *transition_rates(table, bath))


def rates_chb(table: TransitionTable, bath: BathConfig) -> RateMatrix:
    if bath.topology is not Topology.CHB:
        raise ValueError("rates_chb needs a CHB bath")
    return assemble_rate_matrix(table, *transition_rates(table, bath))


def rate_matrix(table: TransitionTable, bath: BathConfig) -> RateMatrix:
    if bath.topology is Topology.IHB:
        return rates_ihb(table, bath)
    return rates_chb(table, bath)


@dataclass(frozen=True)
class Liouvillian:
    """Dense superoperator on row-major vectorized density matrices.

    ``basis`` is ``"eigen"`` or ``"bare"``; ``vectors`` maps eigenbasis
    coordinates to bare ones. ``jumps`` holds (source, target, rate) arrays of
    the eigenstate jumps with nonzero rate.
    """

    matrix: np.ndarray
    basis: str
    vectors: np.ndarray
    jumps: tuple

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        D = self.dim
        return (self.matrix @ np.asarray(rho).reshape(D * D)).reshape(D, D)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    D = int(round(np.sqrt(v.size)))
    return v.reshape(D, D)


def build_liouvillian(eig: Eigensystem, table: TransitionTable, bath: BathConfig,
                      basis: str = "eigen", max_dim: int = DEFAULT_MAX_DIM) -> Liouvillian:
    """Full generator -i[H, .] + sum_k r_k D[L_k] in the eigen or bare basis."""
    D = eig.dim
    if D > max_dim:
        raise DimensionTooLarge(f"D = {D} exceeds the Liouvillian budget of {max_dim}")
    if basis not in ("eigen", "bare"):
        raise ValueError("basis must be 'eigen' or 'bare'")

    down, up = transition_rates(table, bath)
    source = np.concatenate([table.upper, table.lower])
    target = np.concatenate([table.lower, table.upper])
    rate = np.concatenate([down, up])
    nonzero = rate > 0
    source, target, rate = source[nonzero], target[nonzero], rate[nonzero]

    if basis == "eigen":
        U = np.eye(D)
        H = np.diag(eig.energies)
    else:
        U = eig.vectors
        H = eig.hamiltonian()
    a, b = U[:, target], U[:, source]
    # L_k = |a_k><b_k|; L (x) L* = (a (x) a)(b (x) b)^T for real vectors
    A = (a[:, None, :] * a[None, :, :]).reshape(D * D, -1)
    B = (b[:, None, :] * b[None, :, :]).reshape(D * D, -1)
    K = (b * rate) @ b.T  # sum_k r_k L_k^dag L_k
    eye = np.eye(D)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    L += (A * rate) @ B.T
    L -= 0.5 * (np.kron(K, eye) + np.kron(eye, K.T))
    return Liouvillian(L, basis, eig.vectors, (source, target, rate))
