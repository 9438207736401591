#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

from dataclasses import dataclass

import numpy as np
import scipy.linalg as linalg

from wignerness.network import reference_occupations
from wignerness.util import ConfigError, ModelError, SingularCovarianceError

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ReducedState:
    '''
    Gaussian state by its reduced covariances

    C[i, j] = <a_j^dag a_i> - <a_j^dag><a_i>
    S[i, j] = <a_i a_j> - <a_i><a_j>
    mu[k]   = <a_k>
    '''
    C: np.ndarray
    S: np.ndarray
    mu: np.ndarray

    @property
    def L(self):
        return self.C.shape[0]


@dataclass(frozen=True, eq=False)
class FullCovariance:
    ### interleaved ordering (a_1, a_1^dag, ..., a_L, a_L^dag); 0-based row 2k <-> a_k, 2k+1 <-> a_k^dag
    theta: np.ndarray

    @property
    def L(self):
        return self.theta.shape[0] // 2


def reduced_state(C, S=None, mu=None):
    C = np.array(C, dtype=complex, ndmin=2)
    L = C.shape[0]
    S = np.zeros((L, L), dtype=complex) if S is None else np.array(S, dtype=complex, ndmin=2)
    mu = np.zeros(L, dtype=complex) if mu is None else np.array(mu, dtype=complex, ndmin=1)
    if C.shape != (L, L) or S.shape != (L, L) or mu.shape != (L,):
        raise ModelError("inconsistent state shapes C%s S%s mu%s" % (C.shape, S.shape, mu.shape))
    return ReducedState(C=C, S=S, mu=mu)


def vacuum_state(L):
    return reduced_state(np.zeros((L, L)))


def thermal_state(occupations):
    return reduced_state(np.diag(np.asarray(occupations, dtype=float)))


def _tol(M):
    return SYMMETRY_TOL * max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)


def check_state(state):
    '''
    checks the ReducedState invariants (positivity of theta included)

    Returns:
        list of violations, empty if valid

    '''
    violations = []
    C, S = state.C, state.S
    if np.max(np.abs(C - C.conj().T)) > _tol(C):
        violations.append("C is not Hermitian")
    if np.max(np.abs(S - S.T)) > _tol(S):
        violations.append("S is not symmetric")
    d = np.diag(C)
    if np.max(np.abs(np.imag(d))) > _tol(C) or np.min(np.real(d)) < -_tol(C):
        violations.append("diagonal of C must be real and non-negative")
    if not violations:
        try:
            theta_cholesky(state)
        except SingularCovarianceError as e:
            violations.append(str(e))
    return violations


def interleave(aa, ab, ba, bb):
    '''
    assembles 2L x 2L matrix from the four L x L mode blocks (a/a, a/a^dag, a^dag/a, a^dag/a^dag)
    '''
    L = aa.shape[0]
    M = np.zeros((2 * L, 2 * L), dtype=complex)
    M[0::2, 0::2] = aa
    M[0::2, 1::2] = ab
    M[1::2, 0::2] = ba
    M[1::2, 1::2] = bb
    return M


def augment(alpha):
    '''
    (..., L) phase-space points -> (..., 2L) interleaved vector (alpha_1, alpha_1*, ...)
    '''
    alpha = np.asarray(alpha, dtype=complex)
    out = np.empty(alpha.shape[:-1] + (2 * alpha.shape[-1],), dtype=complex)
    out[..., 0::2] = alpha
    out[..., 1::2] = np.conj(alpha)
    return out


def assemble_full_cm(state):
    '''
    builds theta from (C, S)

    Args:
        state: ReducedState

    Returns:
        FullCovariance, per mode block [[C + 1/2, S], [S*, C^T + 1/2]]

    '''
    C, S = state.C, state.S
    if np.max(np.abs(C - C.conj().T)) > _tol(C):
        raise ModelError("C is not Hermitian")
    if np.max(np.abs(S - S.T)) > _tol(S):
        raise ModelError("S is not symmetric")
    eye = 0.5 * np.eye(state.L)
    return FullCovariance(theta=interleave(C + eye, S, S.conj(), C.T + eye))


def inverse_full_cm(state):
    '''
    theta^-1 by block Schur complement of the shifted blocks

    With Cb = C + 1/2:
        B = [Cb - S (Cb^-1)^T S*]^-1
        P = -Cb^-1 S B^T
    theta^-1 per mode block is [[B, P], [P*, B^T]], no additive 1/2 term.

    Args:
        state: ReducedState

    Returns:
        FullCovariance holding theta^-1

    '''
    L = state.L
    Cb = state.C + 0.5 * np.eye(L)
    S = state.S
    try:
        if not np.any(S):
            B = linalg.inv(Cb, check_finite=True)
            P = np.zeros((L, L), dtype=complex)
        else:
            Cb_inv = linalg.inv(Cb, check_finite=True)
            B = linalg.inv(Cb - S @ Cb_inv.T @ S.conj(), check_finite=True)
            P = -Cb_inv @ S @ B.T
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularCovarianceError("C + 1/2 or its Schur complement is singular: %s" % e)
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(P))):
        raise SingularCovarianceError("inverse covariance is not finite")
    return FullCovariance(theta=interleave(B, P, P.conj(), B.T))


def theta_cholesky(state):
    theta = assemble_full_cm(state).theta
    try:
        return np.linalg.cholesky(theta)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError("theta is not positive definite")


def log_det_theta(state):
    Lc = theta_cholesky(state)
    return 2.0 * float(np.sum(np.log(np.real(np.diag(Lc)))))


def _centered(state, alpha):
    return augment(alpha) - augment(state.mu)


def wigner_density_at(state, alpha):
    '''
    Gaussian Wigner function at one point or a batch of points

    Args:
        state: ReducedState
        alpha: (L,) or (N, L) complex phase-space points

    Returns:
        W(alpha) > 0 (float, or (N,) array for a batch)

    '''
    Lc = theta_cholesky(state)
    d = _centered(state, alpha)
    flat = d.reshape(-1, d.shape[-1])
    y = linalg.solve_triangular(Lc, flat.T, lower=True)
    q = np.sum(np.abs(y) ** 2, axis=0)
    logdet = 2.0 * np.sum(np.log(np.real(np.diag(Lc))))
    W = np.exp(-0.5 * q - 0.5 * logdet) / np.pi ** state.L
    return W.reshape(d.shape[:-1]) if d.ndim > 1 else float(W[0])


def log_gradient(state, alpha):
    '''
    d/d(alpha_k*) ln W for every mode, = -[theta^-1 (alpha - mu)] on the a_k rows
    '''
    Lc = theta_cholesky(state)
    d = _centered(state, alpha)
    flat = d.reshape(-1, d.shape[-1])
    v = linalg.cho_solve((Lc, True), flat.T).T
    return -v[:, 0::2].reshape(d.shape[:-1] + (state.L,))


def thermal_reference(spec):
    '''
    local equilibrium product state diag(n_1, ..., n_L)

    Raises:
        ModelError if a mode has zero or two attachments

    '''
    return thermal_state(reference_occupations(spec))


def wigner_entropy(state):
    return state.L * (1.0 + np.log(np.pi)) + 0.5 * log_det_theta(state)


def wigner_relative_entropy(state, reference):
    '''
    Kullback-Leibler divergence S(W || W_ref) between two Gaussian Wigner functions
    '''
    if state.L != reference.L:
        raise ModelError("dimension mismatch: L=%d vs reference L=%d" % (state.L, reference.L))
    if (np.array_equal(state.C, reference.C) and np.array_equal(state.S, reference.S)
            and np.array_equal(state.mu, reference.mu)):
        return 0.0
    L = state.L
    Lr = theta_cholesky(reference)
    theta = assemble_full_cm(state).theta
    d = augment(state.mu) - augment(reference.mu)
    tr = np.real(np.trace(linalg.cho_solve((Lr, True), theta)))
    quad = np.real(np.vdot(d, linalg.cho_solve((Lr, True), d)))
    logdet_ref = 2.0 * np.sum(np.log(np.real(np.diag(Lr))))
    value = 0.5 * (tr - 2 * L + quad + logdet_ref - log_det_theta(state))
    return max(float(value), 0.0)


def _real_transform(L):
    v = np.array([[0.5, 0.5], [-0.5j, 0.5j]])
    return np.kron(np.eye(L), v)


def real_covariance(state):
    '''
    covariance of (Re alpha_1, Im alpha_1, ..., Re alpha_L, Im alpha_L) under W
    '''
    V = _real_transform(state.L)
    sigma = V @ assemble_full_cm(state).theta @ V.conj().T
    sigma = np.real(sigma)
    return 0.5 * (sigma + sigma.T)


def sample_phase_points(state, samples, rng):
    '''
    draws phase-space points from the Gaussian Wigner function

    Args:
        state: ReducedState
        samples: number of points
        rng: numpy Generator (seeded by the caller)

    Returns:
        (samples, L) complex array

    '''
    mean = np.empty(2 * state.L)
    mean[0::2] = np.real(state.mu)
    mean[1::2] = np.imag(state.mu)
    r = rng.multivariate_normal(mean, real_covariance(state), size=int(samples), method="cholesky")
    return r[:, 0::2] + 1j * r[:, 1::2]


def second_moments(state):
    ### N[k, l] = <a_k^dag a_l>
    return state.C.T + np.outer(state.mu.conj(), state.mu)


def occupations(state):
    return np.real(np.diag(state.C)) + np.abs(state.mu) ** 2


### JSON ###

def state_to_dict(state):
    return {"C_re": np.real(state.C).tolist(), "C_im": np.imag(state.C).tolist(),
            "S_re": np.real(state.S).tolist(), "S_im": np.imag(state.S).tolist(),
            "mu_re": np.real(state.mu).tolist(), "mu_im": np.imag(state.mu).tolist()}


def state_from_dict(doc):
    try:
        C = np.array(doc["C_re"], dtype=float) + 1j * np.array(doc["C_im"], dtype=float)
        S = np.array(doc["S_re"], dtype=float) + 1j * np.array(doc["S_im"], dtype=float)
        mu = np.array(doc["mu_re"], dtype=float) + 1j * np.array(doc["mu_im"], dtype=float)
    except KeyError as e:
        raise ConfigError("state document is missing %s" % e)
    except (TypeError, ValueError) as e:
        raise ConfigError("bad state document: %s" % e)
    return reduced_state(C, S, mu)
