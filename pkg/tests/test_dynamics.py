import numpy as np
import pytest

from wignerness.dynamics import (_jacobi_ness, build_generators, check_hurwitz, cm_time_derivative, energy_currents,
                                 evolve, jacobi_spectral_radius, mean_time_derivative, ness_residual, solve_ness)
from wignerness.entropy import entropy_report, relative_entropy_rate
from wignerness.gaussian import (assemble_full_cm, interleave, reduced_state, thermal_reference, vacuum_state,
                                 wigner_entropy, wigner_relative_entropy)
from wignerness.network import BathAttachment, build_chain, make_network
from wignerness.util import ConvergenceError, ModelError, NotHurwitzError, PositivityLossError

from conftest import random_network, random_state


def single_mode(rate=1.0, n=1.0, omega=1.0):
    return make_network([[omega]], [BathAttachment(1, rate, n)])


def test_generators_single_mode():
    gen = build_generators(single_mode(1.0, 2.0))
    assert np.allclose(gen.gamma_diag, [[1.0]])
    assert np.allclose(gen.f_diag, [[2.0]])
    assert np.allclose(gen.diffusion, np.diag([2.5, 2.5]))


def test_generators_selfconsistent_chain():
    spec = build_chain(3, 1.0, 0.1, 0.2, 1.0, 2.0, Gamma=0.05)
    sc = np.array([0.7, 1.2, 1.8])
    gen = build_generators(spec, sc)
    assert gen.gamma_diag[0, 0] == pytest.approx(0.25)
    assert gen.gamma_diag[1, 1] == pytest.approx(0.05)
    assert gen.f_diag[0, 0] == pytest.approx(0.2 * 1.0 + 0.05 * 0.7)
    assert gen.f_diag[1, 1] == pytest.approx(0.05 * 1.2)
    assert gen.f_diag[2, 2] == pytest.approx(0.2 * 2.0 + 0.05 * 1.8)
    with pytest.raises(ModelError):
        build_generators(spec)
    with pytest.raises(ModelError):
        build_generators(spec, [1.0, 1.0])


def test_time_derivative_matches_unsplit_form(rng):
    spec = random_network(rng, 4)
    state = random_state(rng, 4)
    gen = build_generators(spec)
    H, G, C, S = spec.H, gen.gamma_diag, state.C, state.S
    dC, dS = cm_time_derivative(state, gen, H)
    assert np.allclose(dC, 1j * (C @ H - H @ C) - 0.5 * (G @ C + C @ G) + gen.f_diag, atol=1e-12)
    assert np.allclose(dS, -1j * (H @ S + S @ H.conj()) - 0.5 * (G @ S + S @ G), atol=1e-12)


def test_time_derivative_matches_drift_form(rng):
    ### d theta/dt = W theta + theta W^dag + F in the interleaved ordering
    spec = random_network(rng, 3)
    state = random_state(rng, 3)
    gen = build_generators(spec)
    dC, dS = cm_time_derivative(state, gen, spec.H)
    theta = assemble_full_cm(state).theta
    W = gen.drift
    expected = W @ theta + theta @ W.conj().T + gen.diffusion
    assert np.allclose(interleave(dC, dS, dS.conj(), dC.T), expected, atol=1e-12)


def test_mean_time_derivative():
    state = reduced_state([[0.0]], mu=[1.0 + 1.0j])
    gen = build_generators(single_mode(0.5, 1.0, omega=2.0))
    assert mean_time_derivative(state, gen, np.array([[2.0]])) == pytest.approx([(-2j - 0.25) * (1 + 1j)])


def test_evolve_thermalizes():
    spec = single_mode(1.0, 1.0)
    times, states = evolve(vacuum_state(1), build_generators(spec), spec.H, 20.0, 0.01)
    assert times[-1] == pytest.approx(20.0)
    assert np.real(states[-1].C[0, 0]) == pytest.approx(1.0, abs=1e-6)
    ### exponential relaxation 1 - exp(-t)
    assert np.real(states[100].C[0, 0]) == pytest.approx(1 - np.exp(-times[100]), abs=1e-9)


def test_evolve_coherent_mean():
    spec = single_mode(0.4, 0.0, omega=1.3)
    state = reduced_state([[0.0]], mu=[1.0])
    times, states = evolve(state, build_generators(spec), spec.H, 2.0, 0.001, sampleEvery=100)
    assert states[-1].mu[0] == pytest.approx(np.exp((-1.3j - 0.2) * 2.0), abs=1e-10)
    assert len(times) == 21


def test_evolve_positivity_loss():
    spec = single_mode(1.0, 1.0)
    with pytest.raises(PositivityLossError):
        evolve(vacuum_state(1), build_generators(spec), spec.H, 10.0, 5.0)


def test_unitary_evolution_keeps_entropy(rng):
    Z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    spec = make_network((Z + Z.conj().T) / 2, [])
    state = random_state(rng, 3)
    _, states = evolve(state, build_generators(spec), spec.H, 2.0, 0.002, sampleEvery=100)
    for s in states:
        assert wigner_entropy(s) == pytest.approx(wigner_entropy(state), abs=1e-8)


def test_entropy_balance_along_trajectory(rng):
    ### finite-difference dS/dt equals total production minus total flux
    spec = random_network(rng, 3)
    gen = build_generators(spec)
    dt = 1e-3 / max(b.rate for b in spec.baths)
    times, states = evolve(random_state(rng, 3), gen, spec.H, 600 * dt, dt)
    for i in (50, 250, 500):
        dS = (wigner_entropy(states[i + 1]) - wigner_entropy(states[i - 1])) / (times[i + 1] - times[i - 1])
        report = entropy_report(states[i], spec)
        balance = report.total_production - report.total_flux
        assert dS == pytest.approx(balance, rel=1e-4, abs=1e-10)


def test_entropy_balance_on_two_site_chain(two_site_chain):
    ### relaxation of the boundary-driven chain from the vacuum
    spec = two_site_chain
    dt = 1e-3 / max(b.rate for b in spec.baths)
    times, states = evolve(vacuum_state(2), build_generators(spec), spec.H, 2000 * dt, dt)
    for i in (100, 500, 1500):
        dS = (wigner_entropy(states[i + 1]) - wigner_entropy(states[i - 1])) / (times[i + 1] - times[i - 1])
        report = entropy_report(states[i], spec)
        assert dS == pytest.approx(report.total_production - report.total_flux, rel=1e-4, abs=1e-10)


def test_relative_entropy_rate_along_trajectory(rng):
    spec = random_network(rng, 3)
    gen = build_generators(spec)
    reference = thermal_reference(spec)
    dt = 1e-3 / max(b.rate for b in spec.baths)
    times, states = evolve(random_state(rng, 3), gen, spec.H, 400 * dt, dt)
    for i in (100, 300):
        dK = (wigner_relative_entropy(states[i + 1], reference)
              - wigner_relative_entropy(states[i - 1], reference)) / (times[i + 1] - times[i - 1])
        assert dK == pytest.approx(relative_entropy_rate(states[i], spec), rel=1e-4, abs=1e-10)


def test_solve_ness_single_mode():
    state = solve_ness(single_mode(0.7, 1.3))
    assert np.real(state.C[0, 0]) == pytest.approx(1.3, rel=1e-12)
    assert np.all(state.S == 0) and np.all(state.mu == 0)


def test_solve_ness_two_site_chain(two_site_chain):
    expected = np.array([[1.4, 0.2], [0.2, 1.6]])
    for method in ("dense", "lyapunov"):
        state = solve_ness(two_site_chain, method=method)
        assert np.allclose(state.C, expected, atol=1e-12)


def test_solve_ness_methods_agree(rng):
    spec = random_network(rng, 5, coupling=0.01)
    dense = solve_ness(spec, method="dense")
    assert ness_residual(dense.C, build_generators(spec), spec.H) <= 1e-12
    assert np.allclose(solve_ness(spec, method="lyapunov").C, dense.C, atol=1e-11)
    assert np.allclose(solve_ness(spec, method="jacobi").C, dense.C, atol=1e-10)
    with pytest.raises(ModelError):
        solve_ness(spec, method="cholesky")


def test_solve_ness_matches_long_evolution(rng):
    spec = random_network(rng, 3)
    ness = solve_ness(spec)
    _, states = evolve(vacuum_state(3), build_generators(spec), spec.H, 150.0, 0.01, sampleEvery=15000)
    assert np.allclose(states[-1].C, ness.C, atol=1e-8)


def test_solve_ness_not_hurwitz():
    spec = make_network(np.eye(2), [BathAttachment(1, 0.5, 1.0)])
    with pytest.raises(NotHurwitzError, match="singular value"):
        solve_ness(spec)
    with pytest.raises(NotHurwitzError):
        check_hurwitz(spec.H, np.array([0.5, 0.0]))


def test_jacobi_without_local_damping():
    ### mode 2 only relaxes through its coupling; jacobi has no local rate to divide by
    spec = make_network([[1.0, 0.3], [0.3, 1.0]], [BathAttachment(1, 0.5, 1.0)])
    with pytest.raises((ModelError, ConvergenceError)):
        solve_ness(spec, method="jacobi", maxIter=200)


def test_jacobi_spectral_radius(two_site_chain, rng):
    ### equal rates gamma = lambda: the map rotates (C12 + C21, C11 - C22) with gain 2 lambda / gamma
    assert jacobi_spectral_radius(two_site_chain.H, build_generators(two_site_chain).rates) == pytest.approx(2.0)
    with pytest.raises(ConvergenceError, match="spectral radius"):
        solve_ness(two_site_chain, method="jacobi")

    spec = random_network(rng, 5, coupling=0.01)
    assert jacobi_spectral_radius(spec.H, build_generators(spec).rates) < 1
    assert jacobi_spectral_radius(np.diag([1.0, 2.0]), np.array([0.1, 0.2])) == 0.0


def test_jacobi_reports_divergence(two_site_chain):
    with pytest.raises(ConvergenceError, match="diverged at iteration"):
        _jacobi_ness(two_site_chain.H, build_generators(two_site_chain), 1e-13, 100000, False)


def test_energy_currents(two_site_chain, rng):
    state = solve_ness(two_site_chain)
    j = energy_currents(state, two_site_chain.H)
    assert j[0, 1] == pytest.approx(0.4 * 0.1, rel=1e-10)
    assert np.allclose(j, -j.T)

    real = reduced_state(np.array([[1.0, 0.3], [0.3, 2.0]]))
    assert np.allclose(energy_currents(real, np.array([[1.0, 0.5], [0.5, 1.0]])), 0)

    state = random_state(rng, 4)
    j = energy_currents(state, random_network(rng, 4).H)
    assert np.allclose(j, -j.T, atol=1e-14)
    assert np.all(np.diag(j) == 0)
