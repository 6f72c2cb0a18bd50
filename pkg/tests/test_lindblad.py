import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_liouvillian, dense_rhs, evolve_exact, random_density, random_hermitian, unit
from rydghz.lindblad import (
    ComplexExp,
    Constant,
    Dissipator,
    Gaussian,
    HTerm,
    MasterEq,
    NonUniqueSteadyState,
    NumericalFailure,
    Product,
    Schedule,
    check_state,
    fidelity,
    integrate,
    liouvillian,
    population,
    rhs,
    second_order_shift,
    steady_state,
)


def _random_model(rng, d, n_jumps=2, driven=True, frame=False):
    h0 = random_hermitian(rng, d)
    terms = [HTerm(h0)]
    if driven:
        v = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        terms.append(HTerm(0.3 * v, ComplexExp(1.7, -1), add_conjugate=True))
    diss = [Dissipator(0.5 * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))) for _ in range(n_jumps)]
    fr = None
    if frame:
        fr = rng.normal(size=d) * 3
        terms.append(HTerm(np.diag(fr)))
    return MasterEq(d, terms, diss, frame=fr)


# ---------------------------------------------------------------- envelopes


def test_envelopes_evaluate():
    t = np.array([0.0, 0.5])
    np.testing.assert_allclose(ComplexExp(2.0, -1)(t), np.exp(-2j * t))
    g = Gaussian(0.1, 110.0, 90.0)
    assert g(110.0) == pytest.approx(0.1)
    assert g(20.0) == pytest.approx(0.1 * math.exp(-0.5))
    p = Product((g, ComplexExp(3.0, 1)))
    np.testing.assert_allclose(p(t), g(t) * np.exp(3j * t))
    np.testing.assert_allclose(p.conj()(t), np.conj(p(t)))
    assert p.frequencies == (3.0,)


def test_envelope_validation():
    with pytest.raises(ValueError):
        ComplexExp(1.0, 2)
    with pytest.raises(ValueError):
        Gaussian(1.0, 0.0, 0.0)


def test_hterm_requires_hermitian_or_conjugate():
    with pytest.raises(ValueError):
        HTerm(unit(2, 1, 0))
    with pytest.raises(ValueError):
        HTerm(np.eye(2), ComplexExp(1.0))
    HTerm(unit(2, 1, 0), ComplexExp(1.0), add_conjugate=True)


def test_masterEq_shape_checks():
    with pytest.raises(ValueError):
        MasterEq(3, [HTerm(np.eye(2))])
    with pytest.raises(ValueError):
        MasterEq(2, [HTerm(np.eye(2))], [Dissipator(np.eye(3))])


def test_schedule_validation_and_edges():
    me = MasterEq(2, [HTerm(np.eye(2))])
    s = Schedule({"a": me, "b": me}, ((0.5, "a"), (0.25, "b")), repeats=3)
    assert s.total_time == pytest.approx(2.25)
    ends = [b for _, b, _ in s.expanded()]
    assert ends[-1] == pytest.approx(2.25) and len(ends) == 6
    with pytest.raises(ValueError):
        Schedule({"a": me}, ((0.0, "a"),))
    with pytest.raises(ValueError):
        Schedule({"a": me}, ((1.0, "zz"),))
    with pytest.raises(ValueError):
        Schedule({"a": me}, ((1.0, "a"),), repeats=0)


# ---------------------------------------------------------------- right-hand side


@given(seed=st.integers(0, 2**31 - 1), d=st.integers(2, 6), t=st.floats(0, 5))
@settings(max_examples=30, deadline=None)
def test_rhs_matches_dense_oracle(seed, d, t):
    rng = np.random.default_rng(seed)
    me = _random_model(rng, d)
    rho = random_density(rng, d)
    H = me.hamiltonian(t)
    want = dense_rhs(H, [x.L for x in me.dissipators], rho)
    np.testing.assert_allclose(rhs(me, rho, t), want, atol=1e-11)
    np.testing.assert_allclose(
        (liouvillian(me, t) @ rho.reshape(-1)).reshape(d, d), want, atol=1e-11
    )
    assert abs(np.trace(rhs(me, rho, t))) < 1e-12


@given(seed=st.integers(0, 2**31 - 1), d=st.integers(2, 5), t=st.floats(0, 3))
@settings(max_examples=30, deadline=None)
def test_compiled_generator_matches_rhs_in_frame(seed, d, t):
    rng = np.random.default_rng(seed)
    me = _random_model(rng, d, frame=True)
    rho = random_density(rng, d)
    gen = me.generator
    v = gen.to_frame(rho, t)
    # d/dt of exp(iht) rho exp(-iht) picks up i[h, rho_frame]
    h = np.diag(me.frame)
    want = gen.to_frame(rhs(me, rho, t), t) + 1j * (h @ v - v @ h)
    np.testing.assert_allclose(gen.apply(v, t), want, atol=1e-10)


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=15, deadline=None)
def test_dissipator_contribution_is_traceless(seed):
    rng = np.random.default_rng(seed)
    d = 4
    L = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    me = MasterEq(d, [], [Dissipator(L)])
    rho = random_density(rng, d)
    assert abs(np.trace(rhs(me, rho, 0.0))) < 1e-12


def test_dense_liouvillian_agrees_with_oracle():
    rng = np.random.default_rng(3)
    me = _random_model(rng, 3, driven=False)
    want = dense_liouvillian(me.hamiltonian(0.0), [x.L for x in me.dissipators])
    np.testing.assert_allclose(liouvillian(me), want, atol=1e-12)


# ---------------------------------------------------------------- integration


def test_integrate_matches_exact_exponential():
    rng = np.random.default_rng(11)
    me = _random_model(rng, 4, driven=False)
    rho0 = random_density(rng, 4)
    keep = rho0.copy()
    ts = integrate(me, rho0, t_end=2.0, dt=2e-3, check_dt=False)
    np.testing.assert_array_equal(rho0, keep)
    want = evolve_exact(me.hamiltonian(0.0), [x.L for x in me.dissipators], rho0, 2.0)
    np.testing.assert_allclose(ts.final_state, want, atol=1e-9)


def test_rabi_oscillation_in_rotating_frame():
    # detuned two-level drive; frame removes the level splitting
    delta, omega = 40.0, 0.5
    h_static = np.diag([0.0, delta])
    drive = HTerm(omega * unit(2, 1, 0), ComplexExp(delta, -1), add_conjugate=True)
    me = MasterEq(2, [HTerm(h_static), drive], frame=np.array([0.0, delta]), f_max=delta)
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    ts = integrate(me, rho0, t_end=3.0, dt=1e-3, observables=[("P_e", np.array([0, 1.0]))], sample_stride=50)
    np.testing.assert_allclose(ts["P_e"], np.sin(omega * ts.times) ** 2, atol=1e-8)
    # the lab-frame final state carries the bare phase
    c = math.cos(omega * 3.0) * math.sin(omega * 3.0)
    assert abs(ts.final_state[1, 0]) == pytest.approx(abs(c), abs=1e-8)


def test_sampling_stride_and_endpoints():
    me = MasterEq(2, [HTerm(0.1 * np.array([[0, 1], [1, 0]]))])
    ts = integrate(me, np.diag([1, 0]).astype(complex), t_end=1.0, dt=0.03, sample_stride=10, check_dt=False)
    assert ts.times[0] == 0.0 and ts.times[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(np.diff(ts.times[:-1]), 0.3)


def test_schedule_boundaries_hit_exactly():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    on = MasterEq(2, [HTerm(sx)])
    off = MasterEq(2, [HTerm(np.zeros((2, 2)))])
    sched = Schedule({"on": on, "off": off}, ((0.37, "on"), (0.5, "off")), repeats=2)
    ts = integrate(sched, np.diag([1, 0]).astype(complex), dt=0.01, check_dt=False,
                   observables=[("P1", np.array([0, 1.0]))])
    assert ts.final("P1") == pytest.approx(math.sin(0.74) ** 2, abs=1e-9)


def test_dt_guard_and_bad_initial_state():
    me = MasterEq(2, [HTerm(np.diag([0.0, 10.0]))])
    rho0 = np.diag([1, 0]).astype(complex)
    with pytest.raises(ValueError, match="too coarse"):
        integrate(me, rho0, t_end=1.0, dt=0.1)
    with pytest.raises(ValueError):
        integrate(me, 1.01 * rho0, t_end=1.0)
    with pytest.raises(ValueError):
        integrate(me, rho0)


def test_trace_drift_raises_numerical_failure():
    # an unstable step size blows up a strongly damped model
    L = math.sqrt(400.0) * unit(2, 0, 1)
    me = MasterEq(2, [], [Dissipator(L)])
    rho0 = np.diag([0.5, 0.5]).astype(complex)
    with pytest.raises(NumericalFailure, match="steps"):
        integrate(me, rho0, t_end=5.0, dt=0.02, check_dt=False)


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_integration_preserves_state_invariants(seed):
    rng = np.random.default_rng(seed)
    me = _random_model(rng, 3)
    ts = integrate(me, random_density(rng, 3), t_end=1.0, dt=1e-3, sample_stride=100, check_dt=False)
    d = ts.diagnostics
    assert d["trace_drift"] <= 1e-6
    assert d["hermiticity_drift"] <= 1e-8
    assert d["min_eigenvalue"] >= -1e-6


# ---------------------------------------------------------------- steady state and observables


def test_steady_state_of_decay_is_ground():
    me = MasterEq(2, [HTerm(0.2 * np.array([[0, 1], [1, 0]]))], [Dissipator(unit(2, 0, 1))])
    rho, w = steady_state(me, return_eigenvalues=True)
    # driven damped two-level steady population
    om, g = 0.2, 1.0
    pe = 4 * om**2 / (g**2 + 8 * om**2)
    assert rho[1, 1].real == pytest.approx(pe, abs=1e-10)
    assert abs(w[1]) > 1e-6


def test_steady_state_refusals():
    with pytest.raises(NonUniqueSteadyState):
        steady_state(MasterEq(2, [HTerm(np.zeros((2, 2)))]))
    with pytest.raises(ValueError):
        steady_state(MasterEq(2, [HTerm(unit(2, 1, 0), ComplexExp(1.0), add_conjugate=True)]))
    with pytest.raises(ValueError):
        steady_state(MasterEq(64, [HTerm(np.eye(64))]))


def test_population_and_fidelity():
    rho = np.diag([0.25, 0.75]).astype(complex)
    assert population(rho, np.array([0, 1.0])) == pytest.approx(0.75)
    assert fidelity(rho, np.array([0, 1.0])) == pytest.approx(math.sqrt(0.75))
    with pytest.raises(ValueError):
        population(rho, np.ones(3))


def test_check_state_flags():
    rho = np.diag([0.5, 0.5]).astype(complex)
    assert check_state(rho).ok
    bad = check_state(1.01 * rho)
    assert not bad.trace_ok and bad.trace_error == pytest.approx(0.01)
    assert not check_state(np.array([[1.0, 0.1], [0.0, 0.0]])).hermitian_ok
    assert not check_state(np.diag([1.5, -0.5])).positive_ok


def test_second_order_shift_two_level():
    omega, delta = 0.3, 50.0
    me = MasterEq(
        2,
        [HTerm(np.diag([0.0, delta])), HTerm(omega * unit(2, 1, 0), ComplexExp(delta + 7.0), add_conjugate=True)],
        frame=np.array([0.0, delta]),
    )
    shift = second_order_shift(me)
    # in the frame the drive sits 7 below resonance: ground pushed up by omega^2/7
    np.testing.assert_allclose(np.diag(shift).real, [omega**2 / 7.0, -(omega**2) / 7.0], atol=1e-14)


def test_constant_envelope_merges_into_static_part():
    me = MasterEq(2, [HTerm(np.eye(2), Constant(2.0))])
    assert me.is_time_independent
    np.testing.assert_allclose(me.hamiltonian(1.0), 2 * np.eye(2))
