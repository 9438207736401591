#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

from dataclasses import dataclass

import numpy as np
import scipy.linalg as linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

from wignerness.gaussian import interleave, reduced_state, theta_cholesky
from wignerness.network import SELF_CONSISTENT, check_network
from wignerness.util import (ConvergenceError, ModelError, NotHurwitzError, PositivityLossError,
                             SingularCovarianceError, log, rk4_step, step_grid, warn)

RESIDUAL_TOL = 1e-12
DENSE_RADIUS_MAX = 1024


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    drift: np.ndarray  # W, 2L x 2L
    diffusion: np.ndarray  # F = f + Gamma/2, 2L x 2L real diagonal
    gamma_diag: np.ndarray  # L x L, total rate per mode
    f_diag: np.ndarray  # L x L, sum of rate * occupation per mode

    @property
    def rates(self):
        return np.diag(self.gamma_diag)


def build_generators(spec, scOccupations=None):
    '''
    drift and diffusion of the covariance dynamics

    Args:
        spec: NetworkSpec
        scOccupations: length-L occupations of the self-consistent baths (required iff present)

    Returns:
        GeneratorSet

    '''
    L = spec.L
    if spec.has_selfconsistent:
        if scOccupations is None:
            raise ModelError("network has self-consistent baths: sc occupations are required")
        scOccupations = np.asarray(scOccupations, dtype=float)
        if scOccupations.shape != (L,):
            raise ModelError("expected %d self-consistent occupations, got shape %s"
                             % (L, scOccupations.shape))

    g = np.zeros(L)
    f = np.zeros(L)
    for b in spec.baths:
        k = b.mode - 1
        n = scOccupations[k] if b.kind == SELF_CONSISTENT else b.occupation
        g[k] += b.rate
        f[k] += b.rate * n

    H = spec.H
    half = np.diag(0.5 * g)
    zero = np.zeros((L, L))
    drift = interleave(-1j * H - half, zero, zero, 1j * H.conj() - half)
    diffusion = np.diag(np.repeat(f + 0.5 * g, 2))
    return GeneratorSet(drift=drift, diffusion=diffusion, gamma_diag=np.diag(g), f_diag=np.diag(f))


def _split(H):
    ### frequencies and couplings; frequency differences enter elementwise so uniform omega cancels exactly
    omega = np.real(np.diag(H))
    return omega, H - np.diag(np.diag(H))


def cm_time_derivative(state, gen, H):
    '''
    right-hand side of the reduced covariance dynamics

        dC/dt = i[C, H] - 1/2 {Gamma, C} + f
        dS/dt = -i(H S + S H*) - 1/2 {Gamma, S}

    Returns:
        (dC, dS)

    '''
    C, S = state.C, state.S
    if C.shape != H.shape or S.shape != H.shape or gen.gamma_diag.shape != H.shape:
        raise ModelError("shape mismatch between state, generators and H")
    omega, Hoff = _split(H)
    g = gen.rates
    gsum = 0.5 * (g[:, None] + g[None, :])
    dC = (1j * (C @ Hoff - Hoff @ C)
          + 1j * (omega[None, :] - omega[:, None]) * C
          - gsum * C + gen.f_diag)
    dS = (-1j * (Hoff @ S + S @ Hoff.conj())
          - 1j * (omega[:, None] + omega[None, :]) * S
          - gsum * S)
    return dC, dS


def mean_time_derivative(state, gen, H):
    return (-1j * H - 0.5 * gen.gamma_diag) @ state.mu


def _pack(state):
    return np.concatenate([state.C.ravel(), state.S.ravel(), state.mu])


def _unpack(y, L):
    n = L * L
    return reduced_state(y[:n].reshape(L, L), y[n:2 * n].reshape(L, L), y[2 * n:])


def evolve(state, gen, H, tFinal, dt, sampleEvery=1, verbose=False):
    '''
    fixed-step 4th order integration of (C, S, mu)

    Args:
        state: initial ReducedState
        gen: GeneratorSet
        H: coupling matrix
        tFinal: final time
        dt: step (the grid is stretched slightly so it ends at tFinal)
        sampleEvery: keep every n-th step in the trajectory

    Returns:
        (times, states)

    Raises:
        PositivityLossError if theta stops being positive definite

    '''
    L = state.L
    nsteps, h = step_grid(tFinal, dt)
    log("Evolving L=%d for %i steps of %g" % (L, nsteps, h), verbose)

    def rhs(y):
        s = _unpack(y, L)
        dC, dS = cm_time_derivative(s, gen, H)
        return np.concatenate([dC.ravel(), dS.ravel(), mean_time_derivative(s, gen, H)])

    y = _pack(state)
    times, states = [0.0], [state]
    for step in range(1, nsteps + 1):
        y = rk4_step(rhs, y, h)
        current = _unpack(y, L)
        try:
            theta_cholesky(current)
        except SingularCovarianceError:
            raise PositivityLossError("theta lost positive definiteness at t=%g; reduce dt (now %g)"
                                      % (step * h, h))
        if step % sampleEvery == 0 or step == nsteps:
            times.append(step * h)
            states.append(current)
    return np.array(times), states


def lyapunov_operator(H, rates, dephasing=None):
    '''
    row-major vectorization of C -> i[C, H] - 1/2 {Gamma, C} (+ Gamma_sc C_d)

    Args:
        H: L x L coupling matrix
        rates: length-L total rate per mode
        dephasing: optional length-L rates whose term Gamma_k C_kk is added back on the diagonal

    Returns:
        L^2 x L^2 complex matrix K, with K vec(C) = vec(i[C,H] - 1/2{Gamma,C} + ...)

    '''
    L = H.shape[0]
    omega, Hoff = _split(H)
    eye = np.eye(L)
    K = 1j * np.kron(eye, Hoff.T) - 1j * np.kron(Hoff, eye)
    local = 1j * (omega[None, :] - omega[:, None]) - 0.5 * (rates[:, None] + rates[None, :])
    K[np.diag_indices_from(K)] += local.ravel()
    if dephasing is not None:
        idx = np.arange(L) * (L + 1)
        K[idx, idx] += dephasing
    return K


def _shifted_drift(H, rates):
    ### A = -iH - Gamma/2 with the mean frequency removed (it cancels in A C + C A^dag)
    L = H.shape[0]
    wbar = np.mean(np.real(np.diag(H)))
    return -1j * (H - wbar * np.eye(L)) - 0.5 * np.diag(rates)


def check_hurwitz(H, rates, dephasing=None):
    '''
    raises NotHurwitzError when the drift has a non-decaying eigenvalue
    '''
    A = _shifted_drift(H, rates)
    ev = linalg.eigvals(A)
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.max(np.real(ev)) < -1e-13 * scale:
        return
    K = lyapunov_operator(H, rates, dephasing)
    smin = linalg.svdvals(K).min() if K.shape[0] <= 4096 else float("nan")
    raise NotHurwitzError("drift is not Hurwitz (max Re eigenvalue %.3e); no unique steady state, "
                          "smallest singular value of the vectorized system %.3e"
                          % (np.max(np.real(ev)), smin))


def ness_residual(C, gen, H):
    state = reduced_state(C)
    dC, _ = cm_time_derivative(state, gen, H)
    return np.linalg.norm(dC) / max(np.linalg.norm(gen.f_diag), np.finfo(float).tiny)


def solve_ness(spec, scOccupations=None, method="dense", tol=1e-13, maxIter=100000, verbose=False):
    '''
    steady state of the reduced covariances (S = 0, mu = 0 in the NESS)

    Args:
        spec: NetworkSpec
        scOccupations: self-consistent bath occupations, required iff the network has them
        method: "dense" (vectorized LU), "lyapunov" (Bartels-Stewart) or "jacobi" (sparse fixed point)
        tol, maxIter: jacobi stopping rule

    Returns:
        ReducedState

    '''
    check_network(spec)
    gen = build_generators(spec, scOccupations)
    H = spec.H
    L = spec.L
    rates = gen.rates
    check_hurwitz(H, rates)

    if method == "dense":
        K = lyapunov_operator(H, rates)
        try:
            c = linalg.solve(K, -gen.f_diag.ravel().astype(complex))
        except linalg.LinAlgError as e:
            raise SingularCovarianceError("vectorized steady-state system is singular: %s" % e)
        C = c.reshape(L, L)
    elif method == "lyapunov":
        C = linalg.solve_continuous_lyapunov(_shifted_drift(H, rates), -gen.f_diag.astype(complex))
    elif method == "jacobi":
        radius = jacobi_spectral_radius(H, rates)
        if radius is not None and radius >= 1:
            raise ConvergenceError("jacobi iteration cannot converge: spectral radius %.3g >= 1; "
                                   "use method dense or lyapunov" % radius)
        log("jacobi: spectral radius %s" % radius, verbose)
        C = _jacobi_ness(H, gen, tol, maxIter, verbose)
    else:
        raise ModelError("unknown steady-state method %r" % method)

    C = 0.5 * (C + C.conj().T)
    res = ness_residual(C, gen, H)
    if res > RESIDUAL_TOL and method != "jacobi":
        warn("steady-state residual %.3e exceeds %.0e" % (res, RESIDUAL_TOL))
    log("Steady state (%s) residual %.3e" % (method, res), verbose)
    return reduced_state(C)


def _jacobi_denominator(H, rates):
    omega, Hoff = _split(H)
    denom = 0.5 * (rates[:, None] + rates[None, :]) - 1j * (omega[None, :] - omega[:, None])
    if np.any(np.abs(denom) == 0):
        raise ModelError("jacobi steady state needs a bath (or detuning) on every mode pair")
    return Hoff, denom


def jacobi_spectral_radius(H, rates):
    '''
    spectral radius of the jacobi map C -> i(C H_off - H_off C) / denom; the iteration converges iff < 1

    Returns:
        radius, or None when the sparse eigensolver does not converge

    '''
    Hoff, denom = _jacobi_denominator(H, rates)
    L = H.shape[0]
    Hs = sparse.csr_matrix(Hoff)
    eye = sparse.identity(L, format="csr")
    T = (sparse.diags(1.0 / denom.ravel()) @ (1j * (sparse.kron(eye, Hs.T) - sparse.kron(Hs, eye)))).tocsr()
    if T.nnz == 0:
        return 0.0
    if L * L <= DENSE_RADIUS_MAX:
        return float(np.max(np.abs(np.linalg.eigvals(T.toarray()))))
    try:
        vals = sparse_linalg.eigs(T, k=1, which="LM", return_eigenvectors=False, tol=1e-6)
    except sparse_linalg.ArpackNoConvergence:
        return None
    return float(np.abs(vals[0]))


def _jacobi_ness(H, gen, tol, maxIter, verbose):
    '''
    Jacobi iteration on the dissipative diagonal; converges when couplings are weak against rates
    '''
    Hoff, denom = _jacobi_denominator(H, gen.rates)
    Hs = sparse.csr_matrix(Hoff)
    HsT = Hs.T.tocsr()
    F = gen.f_diag.astype(complex)
    C = F / denom
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, maxIter + 1):
            comm = 1j * ((HsT @ C.T).T - Hs @ C)
            C_new = (F + comm) / denom
            change = np.max(np.abs(C_new - C))
            C = C_new
            if not np.isfinite(change):
                raise ConvergenceError("jacobi iteration diverged at iteration %d" % it)
            if change <= tol * max(np.max(np.abs(C)), np.finfo(float).tiny):
                log("jacobi: converged after %d iterations" % it, verbose)
                return C
    raise ConvergenceError("jacobi steady state did not converge in %d iterations" % maxIter)


def energy_currents(state, H):
    '''
    j[k, l] = 2 Im{H[k, l] <a_k^dag a_l>}, antisymmetric, zero diagonal

    Returns:
        L x L real matrix

    '''
    N = state.C.T + np.outer(state.mu.conj(), state.mu)
    j = 2.0 * np.imag(H * N)
    np.fill_diagonal(j, 0.0)
    return j
