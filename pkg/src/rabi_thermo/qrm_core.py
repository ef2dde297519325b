"""
Quantum Rabi Hamiltonian in a truncated bare basis.

Bare states |s, n> (s in {g, e}, n the Fock number) are flattened as
``i = 2*n + s`` with s = 0 for |g> and 1 for |e>, i.e. the mode is the outer
tensor factor and the two-level system the inner one. All frequencies are in
units with hbar = k_B = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EigensolverFailure

# TLS basis order is (g, e)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class ModelParams:
    omega0: float = 1.0
    omega_c: float = 1.0
    g: float = 0.0
    n_max: int = 60

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if not self.g >= 0:
            raise ValueError(f"g must be nonnegative, got {self.g}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


def bare_index(tls: str, fock: int) -> int:
    """Flattened index of |tls, fock>; ``tls`` is 'g' or 'e'."""
    if tls not in ("g", "e"):
        raise ValueError(f"tls must be 'g' or 'e', got {tls!r}")
    return 2 * fock + (1 if tls == "e" else 0)


def bare_label(index: int) -> tuple[str, int]:
    fock, s = divmod(index, 2)
    return ("e" if s else "g"), fock


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)


def sigma_x_op(n_max: int) -> np.ndarray:
    return np.kron(np.eye(n_max + 1), SIGMA_X)


def sigma_z_op(n_max: int) -> np.ndarray:
    return np.kron(np.eye(n_max + 1), SIGMA_Z)


def quadrature_op(n_max: int) -> np.ndarray:
    """a + a^dagger on the full bare space."""
    a = annihilation(n_max)
    return np.kron(a + a.T, np.eye(2))


def number_op(n_max: int) -> np.ndarray:
    return np.kron(np.diag(np.arange(n_max + 1, dtype=float)), np.eye(2))


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Rabi Hamiltonian (w0/2) sz + wc a^dag a + g sx (a + a^dag), real symmetric."""
    n = params.n_max
    return (0.5 * params.omega0 * sigma_z_op(n)
            + params.omega_c * number_op(n)
            + params.g * sigma_x_op(n) @ quadrature_op(n))


def build_parity(params: ModelParams) -> np.ndarray:
    """Parity operator -sz (-1)^(a^dag a), diagonal with entries +-1."""
    signs = (-1.0) ** np.arange(params.n_max + 1)
    return -np.kron(np.diag(signs), SIGMA_Z)


@dataclass(frozen=True)
class Eigensystem:
    """Ascending eigenenergies, real eigenvectors (columns) and parity labels."""

    energies: np.ndarray
    vectors: np.ndarray
    parities: np.ndarray
    params: ModelParams | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def hamiltonian(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.T

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return self.vectors.T @ op @ self.vectors

    def to_bare(self, op: np.ndarray) -> np.ndarray:
        return self.vectors @ op @ self.vectors.T


def _fix_gauge(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def diagonalize(H: np.ndarray, P: np.ndarray, params: ModelParams | None = None) -> Eigensystem:
    """Diagonalize ``H`` sector by sector in the eigenbasis of the diagonal parity ``P``.

    Solving each parity block separately returns parity eigenvectors even
    inside degenerate clusters (g = 0, level crossings), which a full-space
    eigensolver would mix arbitrarily.

    Raises
    ------
    ValueError
        If ``H`` is not symmetric, ``P`` is not diagonal with entries +-1,
        or the two do not commute.
    EigensolverFailure
        If LAPACK fails to converge on a block.
    """
    H = np.asarray(H, dtype=float)
    P = np.asarray(P, dtype=float)
    labels = np.diag(P)
    if not np.array_equal(H, H.T):
        raise ValueError("H must be exactly symmetric")
    if np.any(P - np.diag(labels)) or not np.all(np.abs(labels) == 1):
        raise ValueError("P must be diagonal with entries +-1")
    if np.any(H[labels[:, None] != labels[None, :]]):
        raise ValueError("H does not commute with P")

    dim = len(labels)
    energies, columns, parities = [], [], []
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(labels == sign)
        if idx.size == 0:
            continue
        try:
            e, v = np.linalg.eigh(H[np.ix_(idx, idx)])
        except np.linalg.LinAlgError as exc:
            raise EigensolverFailure(str(exc)) from exc
        full = np.zeros((dim, idx.size))
        full[idx] = v
        energies.append(e)
        columns.append(full)
        parities.append(np.full(idx.size, int(sign)))

    energies = np.concatenate(energies)
    order = np.argsort(energies, kind="stable")
    vectors = _fix_gauge(np.hstack(columns)[:, order])
    return Eigensystem(energies[order], vectors, np.concatenate(parities)[order], params)


def eigensystem(params: ModelParams) -> Eigensystem:
    return diagonalize(build_hamiltonian(params), build_parity(params), params)


@dataclass(frozen=True)
class SpectrumScan:
    """Lowest levels over a coupling sweep; ``energies[k, m]`` is level m at ``g[k]``."""

    g: np.ndarray
    energies: np.ndarray
    parities: np.ndarray
    omega0: float
    omega_c: float
    n_max: int

    def rows(self):
        """Yield ``(g/w0, m, eps_m/w0, parity)`` sorted by g then m, m 1-based."""
        for k, g in enumerate(self.g):
            for m in range(self.energies.shape[1]):
                yield (g / self.omega0, m + 1, self.energies[k, m] / self.omega0,
                       int(self.parities[k, m]))


def spectrum_scan(g_values, omega_c: float = 1.0, omega0: float = 1.0,
                  n_levels: int = 8, n_max: int = 60) -> SpectrumScan:
    g_values = np.asarray(g_values, dtype=float)
    if n_levels > 2 * (n_max + 1):
        raise ValueError("n_levels exceeds the basis dimension")
    energies = np.empty((len(g_values), n_levels))
    parities = np.empty((len(g_values), n_levels), dtype=int)
    for k, g in enumerate(g_values):
        eig = eigensystem(ModelParams(omega0, omega_c, g, n_max))
        energies[k] = eig.energies[:n_levels]
        parities[k] = eig.parities[:n_levels]
    return SpectrumScan(g_values, energies, parities, omega0, omega_c, n_max)


@dataclass(frozen=True)
class Crossing:
    g_left: float
    g_right: float
    levels: tuple[int, int]  # level indices (0-based) of the lower branch at g_left, and the other
    parities: tuple[int, int]


def find_crossings(g_values, omega_c: float = 1.0, omega0: float = 1.0,
                   n_levels: int = 8, n_max: int = 60,
                   energy_tol: float = 1e-12) -> list[Crossing]:
    """Detect level crossings among the lowest ``n_levels`` states over a g sweep.

    Every eigenstate is followed between neighbouring grid points by maximum
    eigenvector overlap (parity labels are not used for the matching), and a
    crossing is recorded when two followed branches swap energetic order
    while both sit inside the lowest ``n_levels`` on either side of the step.
    ``g_values`` must be fine enough for adiabatic following.
    """
    g_values = np.asarray(g_values, dtype=float)
    prev = eigensystem(ModelParams(omega0, omega_c, g_values[0], n_max))
    dim = prev.dim
    level = np.arange(dim)  # branch b currently sits at level[b]
    branch_parity = prev.parities.copy()

    def order_signs(energies):
        diff = energies[:, None] - energies[None, :]
        s = np.sign(diff)
        s[np.abs(diff) <= energy_tol] = 0
        return s

    last = order_signs(prev.energies[level])
    upper = np.triu(np.ones((dim, dim), dtype=bool), k=1)
    crossings = []
    for k in range(1, len(g_values)):
        cur = eigensystem(ModelParams(omega0, omega_c, g_values[k], n_max))
        overlap = np.abs(prev.vectors[:, level].T @ cur.vectors)
        rows, cols = linear_sum_assignment(-overlap)
        new_level = np.empty(dim, dtype=int)
        new_level[rows] = cols

        s = order_signs(cur.energies[new_level])
        inside = (level < n_levels) & (new_level < n_levels)
        flipped = (s != 0) & (last != 0) & (s != last) & upper
        flipped &= inside[:, None] & inside[None, :]
        for a, b in zip(*np.nonzero(flipped)):
            lo, hi = (a, b) if level[a] < level[b] else (b, a)
            crossings.append(Crossing(
                float(g_values[k - 1]), float(g_values[k]),
                (int(level[lo]), int(level[hi])),
                (int(branch_parity[lo]), int(branch_parity[hi]))))
        last = np.where(s != 0, s, last)
        level = new_level
        prev = cur
    return crossings
