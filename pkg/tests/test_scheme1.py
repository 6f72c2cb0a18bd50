import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rydghz.core_ops import GER, GR, is_hermitian
from rydghz.lindblad import integrate, population
from rydghz.scheme1 import (
    ConstraintError,
    GaussianPulse,
    Scheme1Params,
    build_collective_model,
    build_effective,
    build_full_3atom,
    collective_hamiltonian,
    collective_states,
    gamma_eff_oracle,
    mixed_initial_state,
    resonant_spectrum,
)


def test_default_detunings_filled():
    p = Scheme1Params()
    assert (p.delta1, p.delta2, p.delta3) == (2.0, 300.0, 598.0)
    p5 = Scheme1Params(n_atoms=5)
    assert p5.delta1 == pytest.approx(oracles.GOLDEN_TOP)


@pytest.mark.parametrize("key,kw", [("delta2", {"delta2": 299.0}), ("delta1", {"delta1": 1.5}), ("delta3", {"delta3": 1.0})])
def test_constraint_violation_names_key(key, kw):
    with pytest.raises(ConstraintError) as exc:
        Scheme1Params(**kw)
    assert exc.value.key == key
    Scheme1Params(**kw, override_constraints=True)


def test_invalid_params():
    with pytest.raises(ConstraintError):
        Scheme1Params(n_atoms=4)
    with pytest.raises(ConstraintError):
        Scheme1Params(Gamma=-1)


def test_gamma_eff_closed_form():
    assert Scheme1Params().gamma_eff == pytest.approx(oracles.gamma_eff(0.77, 6.0))
    assert Scheme1Params().gamma_eff == pytest.approx(0.3953, abs=1e-4)
    assert Scheme1Params(gamma_eff_override=0.4).gamma_eff == 0.4


def test_full_model_structure():
    p = Scheme1Params(gamma=0.01)
    me = build_full_3atom(p)
    assert me.dim == 27
    assert len(me.dissipators) == 6
    assert me.f_max == 598.0  # Delta3 = 2U - Delta1
    for t in (0.0, 0.37, 5.0):
        assert is_hermitian(me.hamiltonian(t))
    # resonant r-e coupling with amplitude omega0
    H = me.hamiltonian(0.0)
    r_idx = np.argmax(GER.basis_state("ggr"))
    e_idx = np.argmax(GER.basis_state("gge"))
    assert H[r_idx, e_idx] == pytest.approx(0.77)


def test_full_model_pulse_envelope():
    p = Scheme1Params(omega1=0.1, omega3=0.1, pulse=GaussianPulse(0.1, 110.0, 90.0))
    me = build_full_3atom(p)
    H = me.hamiltonian(110.0)
    ggr, ggg = np.argmax(GER.basis_state("ggr")), np.argmax(GER.basis_state("ggg"))
    # three fields on the same transition at t = mu: |sum_a Omega_a e^{-i D_a t}|
    want = 0.1 * np.exp(-2j * 110) + 1.0 * np.exp(-300j * 110) + 0.1 * np.exp(-598j * 110)
    assert H[ggr, ggg] == pytest.approx(want, abs=1e-9)


def test_resonant_spectra():
    ev3 = resonant_spectrum(3)
    np.testing.assert_allclose(ev3, oracles.THREE_ATOM_SPECTRUM, atol=1e-12)
    ev5 = resonant_spectrum(5)
    assert np.min(np.abs(ev5 - oracles.GOLDEN_TOP)) < 1e-10
    np.testing.assert_allclose(np.sort(ev5), np.sort(-ev5), atol=1e-10)


def test_collective_states_orthonormal():
    st3 = collective_states(3)
    names = list(st3)
    gram = np.array([[np.vdot(st3[a], st3[b]) for b in names] for a in names])
    np.testing.assert_allclose(gram, np.eye(len(names)), atol=1e-12)


def test_e_states_are_resonant_eigenstates():
    from rydghz.scheme1 import resonant_hamiltonian

    H = resonant_hamiltonian(3)
    st3 = collective_states(3)
    for name, ev in (("E1+", 2), ("E1-", -2), ("E2+", 1), ("E2-", -1), ("E3+", 1), ("E3-", -1)):
        np.testing.assert_allclose(H @ st3[name], ev * st3[name], atol=1e-12)


@given(
    o1=st.floats(0.0, 0.2),
    o2=st.floats(0.5, 2.0),
    o0=st.floats(0.1, 1.0),
    Gamma=st.floats(5.0, 20.0),
)
@settings(max_examples=25, deadline=None)
def test_dark_state_annihilated(o1, o2, o0, Gamma):
    p = Scheme1Params(omega0=o0, omega1=o1, omega2=o2, omega3=o1, Gamma=Gamma)
    ghz = collective_states(3)["GHZ-"]
    coll = build_collective_model(p)
    assert np.linalg.norm(coll.hamiltonian(0.0) @ ghz) <= 1e-12
    for me in (coll, build_effective(p)):
        for d in me.dissipators:
            assert np.linalg.norm(d.L @ ghz) <= 1e-12


def test_dark_state_stationary_under_collective_dynamics():
    ghz = collective_states(3)["GHZ-"]
    rho0 = np.outer(ghz, ghz.conj())
    ts = integrate(build_collective_model(Scheme1Params()), rho0, t_end=50.0, observables=[("P", ghz)])
    assert np.max(np.abs(ts["P"] - 1)) <= 1e-6


def test_effective_dynamics_leave_target_only_off_resonantly():
    # the outer drives couple GHZ- to E1- four Omega_2 off resonance
    p = Scheme1Params()
    ghz = collective_states(3)["GHZ-"]
    rho0 = np.outer(ghz, ghz.conj())
    ts = integrate(build_effective(p), rho0, t_end=20.0, observables=[("P", ghz)], sample_stride=10)
    bound = 4 * 3 * (p.omega1 / 4) ** 2
    assert np.max(np.abs(ts["P"] - 1)) <= bound


def test_literal_prefactor_doubles_mixed_terms():
    p = Scheme1Params(omega1=0.0, omega3=0.0)
    ev_lit = np.linalg.eigvalsh(build_effective(p, literal_prefactor=True).hamiltonian(0.0))
    ev = np.linalg.eigvalsh(build_effective(p).hamiltonian(0.0))
    np.testing.assert_allclose(ev, oracles.THREE_ATOM_SPECTRUM, atol=1e-12)
    np.testing.assert_allclose(ev_lit, 2 * ev, atol=1e-12)


def test_effective_model_gamma_decay_added():
    assert len(build_effective(Scheme1Params()).dissipators) == 3
    assert len(build_effective(Scheme1Params(gamma=0.01)).dissipators) == 6


def test_collective_steady_state_is_target():
    from rydghz.lindblad import steady_state

    rho, w = steady_state(build_collective_model(Scheme1Params()), return_eigenvalues=True)
    assert population(rho, collective_states(3)["GHZ-"]) >= 0.999**2
    assert abs(w[1]) > 1e-6


def test_collective_requires_equal_outer_drives():
    with pytest.raises(ConstraintError):
        collective_hamiltonian(Scheme1Params(omega3=0.06))


@pytest.mark.parametrize("n", [3, 5])
def test_mixed_initial_state(n):
    rho = mixed_initial_state(n)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.trace(rho @ rho).real == pytest.approx(1 / 2**n)
    assert population(rho, collective_states(n)["GHZ-"]) == pytest.approx(1 / 2**n)
    np.testing.assert_array_equal(rho, np.diag(np.diag(rho)))
    full = mixed_initial_state(3, GER)
    has_e = [1 in np.unravel_index(i, (3, 3, 3)) for i in range(27)]
    assert np.diag(full).real[has_e].sum() == 0


def test_gamma_eff_oracle_zero_drive():
    fitted, closed = gamma_eff_oracle(0.0, 5.0)
    assert fitted == 0.0 and closed == 0.0


def test_gamma_eff_oracle_regime_guard():
    with pytest.raises(ValueError):
        gamma_eff_oracle(2.0, 5.0)
    with pytest.raises(ValueError, match="empty"):
        gamma_eff_oracle(0.3, 10.0, t_end=0.5)


def test_gamma_eff_oracle_within_ten_percent_of_closed_form():
    fitted, closed = gamma_eff_oracle(0.3, 10.0)
    assert closed == pytest.approx(oracles.gamma_eff(0.3, 10.0))
    assert 0.9 <= fitted / closed <= 1.1


def test_effective_uses_only_gr_levels():
    me = build_effective(Scheme1Params())
    assert me.dim == GR.d**3
    assert build_effective(Scheme1Params(n_atoms=5, omega1=0.02, omega3=0.02)).dim == 32
