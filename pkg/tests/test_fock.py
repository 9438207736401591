import numpy as np
import pytest

from wignerness.dynamics import build_generators, evolve, solve_ness
from wignerness.fock import (TruncatedState, apply_generator, cutoff_for_occupation, displaced_vacuum_fock,
                             evolve_fock, extract_covariances, ladder_operators, thermal_fock,
                             stable_step, top_level_populations, vacuum_fock)
from wignerness.gaussian import reduced_state
from wignerness.network import BathAttachment, build_chain, make_network
from wignerness.util import ConfigError, FockDimensionError, ModelError, TruncationError

from conftest import random_network


def single_mode(rate=1.0, n=1.0):
    return make_network([[1.0]], [BathAttachment(1, rate, n)])


def small_chain():
    ### zero frequency keeps the Fock and Gaussian integrators on the same time scale
    return build_chain(2, omega=0.0, lam=0.05, gamma=0.1, n1=0.3, nL=0.6)


def test_ladder_operators():
    a = ladder_operators(2, 3)
    assert a[0].shape == (16, 16)
    assert np.allclose((a[0] @ a[1] - a[1] @ a[0]).toarray(), 0)
    N = (a[0].conj().T @ a[0]).toarray()
    assert np.allclose(np.diag(N), np.repeat(np.arange(4), 4))


def test_thermal_state_is_fixed_point():
    nMax = cutoff_for_occupation(1.0)
    drho = apply_generator(thermal_fock([1.0], nMax), single_mode(0.8, 1.0))
    assert np.max(np.abs(drho)) <= 1e-12


def test_vacuum_gain():
    drho = apply_generator(vacuum_fock(1, 4), single_mode(0.5, 2.0))
    assert np.real(drho[1, 1]) == pytest.approx(0.5 * 2.0)
    assert np.real(drho[0, 0]) == pytest.approx(-0.5 * 2.0)


def test_generator_is_traceless(rng):
    spec = random_network(rng, 2)
    drho = apply_generator(displaced_vacuum_fock([0.5, 0.3j], 5), spec)
    assert abs(np.trace(drho)) <= 1e-12


def test_generator_is_linear(rng):
    spec = random_network(rng, 2)
    dim = 16
    rho1 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho2 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    c1, c2 = 0.3 - 1.2j, -0.7 + 0.4j

    def gen(rho):
        return apply_generator(TruncatedState(3, rho, 2), spec)

    assert np.allclose(gen(c1 * rho1 + c2 * rho2), c1 * gen(rho1) + c2 * gen(rho2), atol=1e-12)


def test_single_mode_thermalization():
    nMax = cutoff_for_occupation(1.0)
    assert nMax == 29
    state = evolve_fock(vacuum_fock(1, nMax), single_mode(1.0, 1.0), 15.0, 0.01)
    assert np.real(extract_covariances(state).C[0, 0]) == pytest.approx(1.0, abs=1e-4)
    assert np.real(np.trace(state.rho)) == pytest.approx(1.0, abs=1e-12)
    assert top_level_populations(state)[0] < 1e-8


def test_closed_system_conserves_excitations():
    spec = make_network([[1.0, 0.5], [0.5, 1.2]], [])
    start = displaced_vacuum_fock([0.5, 0.2], 3)
    a = ladder_operators(2, 3)
    N = (a[0].conj().T @ a[0] + a[1].conj().T @ a[1]).toarray()
    state = evolve_fock(start, spec, 5.0, 0.01, tailTol=1.0)
    assert np.real(np.trace(N @ state.rho)) == pytest.approx(np.real(np.trace(N @ start.rho)), abs=1e-10)


def test_chain_relaxes_to_gaussian_steady_state():
    spec = small_chain()
    state = evolve_fock(vacuum_fock(2, 21), spec, 200.0, 0.2)
    C = extract_covariances(state).C
    assert np.allclose(C, solve_ness(spec).C, atol=1e-5)


def test_step_above_stability_bound():
    spec = small_chain()
    bound = stable_step(spec, 21)
    assert 0.2 < bound < 0.4
    with pytest.raises(ConfigError):
        evolve_fock(vacuum_fock(2, 21), spec, 20.0, 0.4)
    assert stable_step(make_network([[0.0]], []), 5) == np.inf


def test_extract_thermal():
    moments = extract_covariances(thermal_fock([0.3, 0.6], 21))
    assert np.allclose(moments.C, np.diag([0.3, 0.6]), atol=1e-7)
    assert np.allclose(moments.S, 0, atol=1e-14)
    assert np.allclose(moments.mu, 0, atol=1e-14)


def test_extract_displaced():
    beta = 0.5 + 0.2j
    moments = extract_covariances(displaced_vacuum_fock([beta], 20))
    assert moments.mu[0] == pytest.approx(beta, abs=1e-10)
    assert abs(moments.C[0, 0]) <= 1e-10
    assert abs(moments.S[0, 0]) <= 1e-10


def test_extract_symmetries(rng):
    state = evolve_fock(displaced_vacuum_fock([0.4, -0.3j], 8), random_network(rng, 2), 1.0, 0.01, tailTol=1.0)
    moments = extract_covariances(state)
    assert np.allclose(moments.C, moments.C.conj().T, atol=1e-13)
    assert np.allclose(moments.S, moments.S.T, atol=1e-13)


def test_gaussian_closure_from_displaced_vacuum():
    spec = small_chain()
    betas = [0.5, -0.3j]
    fock = extract_covariances(evolve_fock(displaced_vacuum_fock(betas, 21), spec, 5.0, 0.01))
    _, states = evolve(reduced_state(np.zeros((2, 2)), mu=betas), build_generators(spec), spec.H, 5.0, 0.01)
    gaussian = states[-1]
    assert np.allclose(fock.C, gaussian.C, atol=1e-6)
    assert np.allclose(fock.S, gaussian.S, atol=1e-6)
    assert np.allclose(fock.mu, gaussian.mu, atol=1e-6)


def test_dimension_limit():
    with pytest.raises(FockDimensionError):
        vacuum_fock(3, 30)
    with pytest.raises(FockDimensionError):
        ladder_operators(3, 30)
    with pytest.raises(ModelError):
        vacuum_fock(1, 0)


def test_cutoff_for_occupation():
    assert cutoff_for_occupation(0.0) == 1
    assert cutoff_for_occupation(0.6) == 21
    assert cutoff_for_occupation(1.0) == 29
    with pytest.raises(ModelError):
        cutoff_for_occupation(-0.1)


def test_truncation_error():
    with pytest.raises(TruncationError):
        evolve_fock(vacuum_fock(1, 5), single_mode(1.0, 1.0), 15.0, 0.01)


def test_mismatched_mode_count():
    with pytest.raises(ModelError):
        evolve_fock(vacuum_fock(1, 5), small_chain(), 1.0, 0.1)
    with pytest.raises(ModelError):
        apply_generator(vacuum_fock(1, 5), small_chain())
