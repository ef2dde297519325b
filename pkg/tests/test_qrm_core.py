import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from oracles import bare_hamiltonian_loops
from rabi_thermo import (EigensolverFailure, ModelParams, build_hamiltonian, build_parity,
                         diagonalize, eigensystem, find_crossings, spectrum_scan)
from rabi_thermo.qrm_core import bare_index, bare_label


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(omega0=0.0)
    with pytest.raises(ValueError):
        ModelParams(omega_c=-1.0)
    with pytest.raises(ValueError):
        ModelParams(g=-0.1)
    with pytest.raises(ValueError):
        ModelParams(n_max=0)
    assert ModelParams(n_max=60).dim == 122


def test_bare_index_bijective():
    n_max = 7
    seen = {bare_index(t, n) for t in ("g", "e") for n in range(n_max + 1)}
    assert seen == set(range(2 * (n_max + 1)))
    for i in range(2 * (n_max + 1)):
        assert bare_index(*bare_label(i)) == i
    assert bare_index("e", 3) == 7


def test_decoupled_two_photon_hamiltonian():
    H = build_hamiltonian(ModelParams(1.0, 1.0, 0.0, 1))
    assert np.array_equal(H, np.diag([-0.5, 0.5, 0.5, 1.5]))


def test_ladder_matrix_element():
    H = build_hamiltonian(ModelParams(1.0, 1.0, 0.5, 1))
    assert H[bare_index("e", 0), bare_index("g", 1)] == 0.5


@pytest.mark.parametrize("omega_c,g", [(1.0, 0.5), (0.5, 1.3), (3.0, 2.0)])
def test_hamiltonian_matches_elementwise_construction(omega_c, g):
    H = build_hamiltonian(ModelParams(0.8, omega_c, g, 15))
    ref = bare_hamiltonian_loops(0.8, omega_c, g, 15)
    assert np.allclose(H, ref, atol=1e-15, rtol=0)
    assert np.array_equal(H, H.T)


def test_parity_entries_and_commutation():
    params = ModelParams(1.0, 1.0, 0.7, 40)
    P = build_parity(params)
    assert P[bare_index("g", 0), bare_index("g", 0)] == 1
    assert P[bare_index("e", 0), bare_index("e", 0)] == -1
    H = build_hamiltonian(params)
    assert np.max(np.abs(H @ P - P @ H)) == 0.0


def test_ground_energy_below_bare_and_converged():
    eig = eigensystem(ModelParams(1.0, 1.0, 0.5, 60))
    ref = scipy.linalg.eigvalsh(bare_hamiltonian_loops(1.0, 1.0, 0.5, 200))
    assert eig.energies[0] < -0.5
    assert abs(eig.energies[0] - ref[0]) < 1e-12


def test_ground_energy_second_order():
    # |g,0> couples only to |e,1>: E0 = -w0/2 - g^2/(w0 + wc) + O(g^4)
    g = 1e-3
    eig = eigensystem(ModelParams(1.0, 2.0, g, 10))
    assert abs(eig.energies[0] - (-0.5 - g ** 2 / 3.0)) < 10 * g ** 4


def test_decoupled_resonant_degeneracies():
    eig = eigensystem(ModelParams(1.0, 1.0, 0.0, 10))
    expected = [-0.5, 0.5, 0.5, 1.5, 1.5, 2.5, 2.5, 3.5]
    assert np.max(np.abs(eig.energies[:8] - expected)) < 1e-12
    # each degenerate pair holds |e,n> and |g,n+1>; equal excitation number, equal parity
    for m in (1, 3, 5):
        supports = {bare_label(int(np.argmax(np.abs(eig.vectors[:, k])))) for k in (m, m + 1)}
        n = (m - 1) // 2
        assert supports == {("e", n), ("g", n + 1)}
        assert eig.parities[m] == eig.parities[m + 1]


def test_decoupled_parity_labels():
    eig = eigensystem(ModelParams(1.0, 1.3, 0.0, 10))
    for k in range(eig.dim):
        tls, n = bare_label(int(np.argmax(np.abs(eig.vectors[:, k]))))
        if n % 2 == 0:
            assert eig.parities[k] == (1 if tls == "g" else -1)


def test_deep_strong_lowest_pair_is_close():
    eig = eigensystem(ModelParams(1.0, 1.0, 1.5, 80))
    gap = eig.energies[1] - eig.energies[0]
    # displaced-oscillator estimate w0 exp(-2 g^2 / wc^2) = 0.0111
    assert 0 < gap < 0.02
    assert eig.parities[0] == -eig.parities[1]


def eigensystem_invariants(eig, H, P):
    V = eig.vectors
    assert np.all(np.diff(eig.energies) >= 0)
    assert np.max(np.abs(V.T @ V - np.eye(eig.dim))) < 1e-12
    recon = (V * eig.energies) @ V.T
    assert np.max(np.abs(recon - H)) <= 1e-10 * max(np.max(np.abs(H)), 1.0)
    expect_p = np.einsum("im,ij,jm->m", V, P, V)
    assert np.all(np.abs(expect_p) > 1 - 1e-10)
    assert np.array_equal(np.sign(expect_p), eig.parities)
    top = V[np.argmax(np.abs(V), axis=0), np.arange(eig.dim)]
    assert np.all(top > 0)
    Heig = V.T @ H @ V
    mixed = eig.parities[:, None] != eig.parities[None, :]
    assert np.max(np.abs(Heig[mixed])) < 1e-12


@settings(max_examples=25, deadline=None)
@given(omega_c=st.floats(0.2, 3.0), g=st.floats(0.0, 2.0), n_max=st.integers(1, 30))
def test_eigensystem_invariants(omega_c, g, n_max):
    params = ModelParams(1.0, omega_c, g, n_max)
    H, P = build_hamiltonian(params), build_parity(params)
    eigensystem_invariants(diagonalize(H, P, params), H, P)


@pytest.mark.parametrize("g", [0.0, 0.28, 1.5])
def test_invariants_at_special_points(g):
    params = ModelParams(1.0, 1.0, g, 40)
    H, P = build_hamiltonian(params), build_parity(params)
    eigensystem_invariants(diagonalize(H, P, params), H, P)


def test_diagonalize_rejects_bad_input():
    params = ModelParams(1.0, 1.0, 0.5, 4)
    H, P = build_hamiltonian(params), build_parity(params)
    A = H.copy()
    A[0, 1] += 1.0
    with pytest.raises(ValueError):
        diagonalize(A, P)
    with pytest.raises(ValueError):
        diagonalize(H, 2 * P)
    Q = P.copy()
    Q[0, 0] = -Q[0, 0]
    with pytest.raises(ValueError):
        diagonalize(H, Q)


def test_diagonalize_wraps_backend_failure(monkeypatch):
    params = ModelParams(1.0, 1.0, 0.5, 4)

    def broken(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", broken)
    with pytest.raises(EigensolverFailure):
        eigensystem(params)


@pytest.mark.parametrize("omega_c", [0.5, 1.0, 1.5, 3.0])
def test_truncation_stability(omega_c):
    for g in (0.0, 1.0, 2.0):
        a = eigensystem(ModelParams(1.0, omega_c, g, 60)).energies[:8]
        b = eigensystem(ModelParams(1.0, omega_c, g, 80)).energies[:8]
        assert np.max(np.abs(a - b)) < 1e-8


@pytest.mark.parametrize("omega_c", [0.5, 1.0, 3.0])
def test_ground_energy_nonincreasing(omega_c):
    scan = spectrum_scan(np.linspace(0, 2, 41), omega_c=omega_c, n_levels=1, n_max=60)
    assert np.all(np.diff(scan.energies[:, 0]) <= 0)


def test_spectrum_scan_rows():
    scan = spectrum_scan([0.0, 0.5], omega_c=1.0, n_levels=8, n_max=20)
    rows = list(scan.rows())
    assert len(rows) == 16
    assert [r[:2] for r in rows[:3]] == [(0.0, 1), (0.0, 2), (0.0, 3)]
    assert [r[2] for r in rows[:8]] == pytest.approx([-0.5, 0.5, 0.5, 1.5, 1.5, 2.5, 2.5, 3.5],
                                                     abs=1e-12)
    assert all(r[3] in (1, -1) for r in rows)
    with pytest.raises(ValueError):
        spectrum_scan([0.0], n_levels=10, n_max=3)


def test_scan_units_follow_omega0():
    scan = spectrum_scan([0.0, 1.0], omega_c=2.0, omega0=2.0, n_levels=4, n_max=20)
    ref = spectrum_scan([0.0, 0.5], omega_c=1.0, omega0=1.0, n_levels=4, n_max=20)
    a = np.array([r[2] for r in scan.rows()])
    b = np.array([r[2] for r in ref.rows()])
    assert np.allclose(a, b, atol=1e-12)


def sector_energies(omega_c, g, n_max=60, n_levels=8):
    """Lowest levels of each parity sector from scipy, sector by sector."""
    H = bare_hamiltonian_loops(1.0, omega_c, g, n_max)
    idx = np.arange(H.shape[0])
    n, s = idx // 2, idx % 2
    parity = np.where(s == 0, 1, -1) * (-1.0) ** n
    out = {}
    for p in (1, -1):
        sel = np.flatnonzero(parity == p)
        out[p] = scipy.linalg.eigvalsh(H[np.ix_(sel, sel)])[:n_levels]
    return out


def test_crossings_bracket_sector_degeneracies():
    g = np.linspace(0, 2, 401)
    crossings = find_crossings(g, omega_c=1.0, n_levels=8, n_max=60)
    assert len(crossings) == 6
    for c in crossings:
        assert c.parities[0] == -c.parities[1]
        lo, hi = sector_energies(1.0, c.g_left), sector_energies(1.0, c.g_right)
        diff_lo = lo[1][:, None] - lo[-1][None, :]
        diff_hi = hi[1][:, None] - hi[-1][None, :]
        # some even/odd pair changes order inside the bracket
        assert np.any(np.sign(diff_lo) != np.sign(diff_hi))


@pytest.mark.parametrize("omega_c", [0.5, 1.0, 1.5, 3.0])
def test_crossings_join_opposite_parities(omega_c):
    crossings = find_crossings(np.linspace(0, 2, 401), omega_c=omega_c, n_levels=8, n_max=60)
    assert crossings
    for c in crossings:
        assert c.parities[0] != c.parities[1]
        assert c.levels[1] == c.levels[0] + 1


def test_crossing_count_stable_under_refinement():
    coarse = find_crossings(np.linspace(0, 2, 401), omega_c=1.5, n_levels=8, n_max=60)
    fine = find_crossings(np.linspace(0, 2, 1201), omega_c=1.5, n_levels=8, n_max=60)
    assert len(coarse) == len(fine)
    for a, b in zip(coarse, fine):
        assert abs(a.g_left - b.g_left) < 0.006


def pair_spacings(omega_c):
    crossings = find_crossings(np.linspace(0, 2, 801), omega_c=omega_c, n_levels=8, n_max=60)
    by_pair = {}
    for c in crossings:
        by_pair.setdefault(c.levels, []).append(0.5 * (c.g_left + c.g_right))
    return [b - a for gs in by_pair.values() for a, b in zip(gs, gs[1:])]


def test_crossing_spacing_grows_with_mode_frequency():
    s05, s10, s15 = pair_spacings(0.5), pair_spacings(1.0), pair_spacings(1.5)
    assert s05 and s10 and s15
    assert max(s05) < min(s10)
    assert max(s10) < min(s15)
    # at omega_c = 3 consecutive crossings of one pair fall outside g <= 2
    assert pair_spacings(3.0) == []
