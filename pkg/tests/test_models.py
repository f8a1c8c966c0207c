import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from levspin import models, qops
from levspin.errors import DegenerateBasisError, InstabilityError, SWValidityError
from levspin.magnetolev import preset


def _block(op, n):
    return models.restrict_fock(op, n)


# -- NV structure ---------------------------------------------------------------

def test_mixed_basis_diagonalises_nv_hamiltonian():
    D, delta = 2.87, 0.4
    nb = models.nv_mixed_basis(D, delta)
    H = models.nv_hamiltonian(D, delta).data
    for vec, w in ((nb.e, nb.omega_e), (nb.g, nb.omega_g), (nb.d, D)):
        assert np.allclose(H @ vec, w * vec, atol=1e-12)


def test_dressed_basis_limits_and_eigenvalues():
    a, wp, wm = models.dressed_basis(0.0, 2.0)
    assert a == pytest.approx(math.pi / 4) and wp == pytest.approx(1.0) and wm == pytest.approx(-1.0)
    assert models.dressed_basis(1.0, 0.0)[0] == 0.0
    a, wp, wm = models.dressed_basis(1.0, 2.0)
    ev = np.linalg.eigvalsh(models.dressed_block(1.0, 2.0))
    assert np.allclose(ev, [wm, wp], atol=1e-12)
    with pytest.raises(DegenerateBasisError):
        models.dressed_basis(0.0, 0.0)


def test_effective_coupling_and_map():
    assert models.effective_coupling(3.0, 0.0, 0.0) == 3.0
    assert abs(models.effective_coupling(3.0, 0.0, math.pi / 2)) < 1e-15
    D = 2 * math.pi * 2.87e9
    gam = 2 * math.pi * 28e9
    L = models.coupling_map(1.0, [0.3], [10e-3], D, gam)
    assert L[0, 0] == pytest.approx(math.cos(0.5 * math.atan(2 * gam * 10e-3 / D)) * math.cos(0.3))


def test_coupling_chain_at_resonant_drive():
    ch = models.coupling_chain(preset("sec5"))
    assert ch.alpha == pytest.approx(math.pi / 4)
    assert ch.Lambda == pytest.approx(ch.lam * math.cos(ch.theta) * math.cos(ch.alpha))
    assert ch.Lambda_eff(2.0) == pytest.approx(ch.Lambda * math.exp(2) / 2)


# -- frames --------------------------------------------------------------------

def test_frame_parameters():
    f = models.bogoliubov_frame(1.0, 0.0, 2.0)
    assert f.r == 0 and f.Lambda_eff == 1.0 and f.Delta_m == 1.0
    f = models.bogoliubov_frame(1.0, math.tanh(6), 1.0)
    assert f.r == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(InstabilityError):
        models.bogoliubov_frame(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        models.frame_from_r(1.0, 1.0)


def test_jc_spectrum_without_pump():
    d0, dm, L, N = 0.3, 1.0, 0.2, 30
    H = models.build_H_TO(models.FrameSpec(Lambda=L, delta_m=dm, delta0=d0), N)
    ev = np.sort(np.linalg.eigvalsh(H.data))
    # ground |0, down> then pairs in each excitation manifold
    expected = [-d0 / 2]
    for n in range(12):
        c = dm * (n + 0.5)
        s = 0.5 * math.sqrt((d0 - dm) ** 2 + 4 * L**2 * (n + 1))
        expected += [c - s, c + s]
    assert np.allclose(ev[:13], np.sort(expected)[:13], atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(r=st.floats(0.0, 2.0), L=st.floats(0.01, 2.0), d0=st.floats(-1.0, 1.0))
def test_hamiltonians_hermitian(r, L, d0):
    f = models.frame_from_r(r, L, Delta_m=1.0, delta0=d0)
    for H in (models.build_H_TO(f, 10), models.build_H_RO(f, 10), models.build_H_Sq(f, 10),
              models.build_two_nv(f, 6)):
        assert np.max(np.abs(H.data - H.data.conj().T)) < 1e-12


def test_ro_spectrum_without_coupling():
    f = models.FrameSpec(Lambda=0.0, delta_m=2.0)
    ev = np.sort(np.linalg.eigvalsh(models.build_H_RO(f, 8).data))
    assert np.allclose(ev, np.repeat(2.0 * np.arange(8), 2))


def test_counter_rotating_term_suppressed():
    def ratio(r):
        f = models.frame_from_r(r, 1.0, Delta_m=1.0)
        N = 12
        lay, s, b = models._single_ops(N)
        main = f.Lambda_eff * ((b + b.dag()) @ s["sx"])
        return models.build_H_Sq(f, N).norm() / main.norm()
    assert ratio(3.0) / ratio(0.0) == pytest.approx(math.exp(-6), rel=1e-12)


def test_quadratic_part_becomes_diagonal():
    r, Nw, keep = 1.5, 600, 10
    f = models.frame_from_r(r, 1.0, delta_m=1.0)
    a = qops.fock_annihilation(Nw)
    ad = a.dag()
    quad = (f.delta_m * (ad @ a) - 0.5 * f.g_cu * (a @ a + ad @ ad)).as_hermitian()
    conj = models.squeeze_conjugate(quad, r)
    blk = conj.data[:keep, :keep]
    off = blk - np.diag(np.diag(blk))
    assert np.max(np.abs(off)) < 1e-9
    diag = np.diag(blk).real
    assert np.allclose(diag - diag[0], f.Delta_m * np.arange(keep), atol=1e-9)
    assert diag[0] == pytest.approx(f.squeeze_constant, abs=1e-9)


@pytest.mark.parametrize("r", [0.5, 1.0])
def test_squeeze_conjugated_lab_hamiltonian_is_frame_hamiltonian(r):
    Nw, keep = 300, 20
    f = models.frame_from_r(r, 0.7, delta_m=1.3, delta0=0.2)
    lhs = models.squeeze_conjugate(models.build_H_TO(f, Nw), r)
    rhs = models.build_H_RO(f, Nw) + models.build_H_Sq(f, Nw) + f.squeeze_constant * qops.identity(lhs.layout)
    assert np.max(np.abs(_block(lhs, keep) - _block(rhs, keep))) < 1e-9


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 3.0])
def test_extracted_enhanced_coupling(r):
    f = models.frame_from_r(r, 1.0, delta_m=10.0)
    c = models.squeezed_couplings(f, 100)
    assert c["Lambda_eff"] == pytest.approx(math.exp(r) / 2, rel=1e-6)
    assert c["Lambda_sq"] == pytest.approx(math.exp(-r) / 2, rel=1e-6)
    assert c["Delta_m"] == pytest.approx(f.Delta_m, rel=1e-6)
    assert c["pair"] < 1e-6 * f.delta_m


# -- moving frame ----------------------------------------------------------------

def test_ramp_schedule_values():
    fr = models.TimeDependentFrame(models.tanh_ramp(1.25), 21.0, 1.0)
    assert fr.rdot(0.0) == pytest.approx(0.625, rel=1e-8)
    assert fr.r(3.0) == pytest.approx(1.25 * math.tanh(1.5))
    still = models.TimeDependentFrame(lambda t: 0.7, 1.0, 1.0)
    assert np.max(np.abs(still.H_Err(6)(1.0).data)) == 0


def test_frame_motion_term_reproduces_lab_evolution():
    # evolve in the lab and in the moving squeezed frame, then map back with S(r(T))^dag
    N, T = 90, 3.0
    fr = models.TimeDependentFrame(models.tanh_ramp(0.6), 3.0, 1.0)

    def evolve(H):
        psi0 = qops.ket_kron([1, 0], qops.basis(0, N))
        sol = solve_ivp(lambda t, y: -1j * (H(t).data @ y), (0, T), psi0, method="DOP853", rtol=1e-10, atol=1e-12)
        return sol.y[:, -1]

    lab = evolve(fr.H_TO(N))
    S = np.kron(np.eye(2), qops.squeeze(fr.r(T), N).data)
    good = abs(np.vdot(lab, S.conj().T @ evolve(fr.H_full(N))))
    bad_H = fr.H_RO(N) + fr.H_Sq(N)
    E = fr.H_Err(N)
    flipped = abs(np.vdot(lab, S.conj().T @ evolve(lambda t: bad_H(t) - E(t))))
    assert good == pytest.approx(1.0, abs=1e-8)
    assert flipped < 1 - 1e-4


# -- two NVs ------------------------------------------------------------------------

def test_ising_structure():
    f = models.frame_from_r(0.5, 1.0, Delta_m=20.0)
    I = models.ising(f).data
    ev = np.round(np.linalg.eigvalsh(I) / f.xi, 10)
    assert sorted(ev) == [0, 0, 4, 4]
    p = np.array([1, 1]) / math.sqrt(2)
    m = np.array([1, -1]) / math.sqrt(2)
    for v in (np.kron(p, p), np.kron(m, m)):
        assert np.linalg.norm(I @ v) < 1e-14


def test_polaron_transform_eliminates_phonon():
    eta = 0.05
    f = models.frame_from_r(0.0, 1.0, Delta_m=0.5 / eta)
    Nw, keep = 60, 20
    S = models.sw_generator(f, Nw)
    U = qops.expm(S).data
    H = models.build_two_nv(f, Nw).data
    conj = qops.Operator(U @ H @ U.conj().T, S.layout)
    eff = models.sw_effective(f, Nw)
    rem = np.max(np.abs(_block(conj, keep) - _block(eff, keep)))
    assert rem < 10 * eta**2 * f.Lambda_eff
    assert rem < 1e-9  # exact up to truncation


def test_eta_guards():
    with pytest.raises(SWValidityError):
        models.sw_effective(models.frame_from_r(0.0, 1.0, Delta_m=0.4), 6)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        models.ising(models.frame_from_r(0.0, 1.0, Delta_m=1.0))
        assert any(issubclass(x.category, models.SWValidityWarning) for x in w)


def test_two_nv_symmetries():
    N = 10
    f = models.frame_from_r(0.8, 1.0, Delta_m=3.0, delta0=0.4)
    H = models.build_two_nv(f, N).data
    for P in (models.swap_parity(N), models.flip_parity(N)):
        assert np.max(np.abs(P.data @ H - H @ P.data)) < 1e-10
    # swap composed with the sigma_x flip and b -> -b reverses the coupling sign instead
    swap_flip = models.swap_parity(N).data @ models.flip_parity(N).data @ np.kron(np.eye(4), qops.parity(N).data)
    assert np.max(np.abs(swap_flip @ H - H @ swap_flip)) > 1e-3


def test_enhancement_factor_monotone():
    r = np.linspace(0, 3, 31)
    e = models.enhancement_factor(r)
    assert np.all(np.diff(e) > 0)
