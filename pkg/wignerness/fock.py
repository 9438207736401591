#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg as linalg
import scipy.sparse as sparse

from wignerness.gaussian import reduced_state
from wignerness.network import SELF_CONSISTENT, check_network
from wignerness.util import ConfigError, FockDimensionError, ModelError, TruncationError, log, rk4_step, step_grid

MAX_DIMENSION = 10000
TAIL_TOL = 1e-8
RK4_LIMIT = 2.5  # left half-disk inside the RK4 stability region


@dataclass(frozen=True, eq=False)
class TruncatedState:
    nMax: int  # per-mode Fock cutoff
    rho: np.ndarray  # (nMax+1)^L square, Hermitian, unit trace
    L: int

    @property
    def dim(self):
        return self.rho.shape[0]


def _check_dimension(L, nMax):
    if int(nMax) != nMax or nMax < 1:
        raise ModelError("n_max must be a positive integer (got %r)" % nMax)
    dim = (int(nMax) + 1) ** int(L)
    if dim > MAX_DIMENSION:
        raise FockDimensionError("Fock space dimension (%d+1)^%d = %d exceeds %d; lower n_max or L"
                                 % (nMax, L, dim, MAX_DIMENSION))
    return dim


def _single_mode(nMax):
    return sparse.diags(np.sqrt(np.arange(1, nMax + 1, dtype=float)), 1, format="csr")


def ladder_operators(L, nMax):
    '''
    truncated annihilation operators a_1 .. a_L on the product Fock space (sparse csr)
    '''
    _check_dimension(L, nMax)
    a = _single_mode(nMax)
    eye = sparse.identity(nMax + 1, format="csr")
    ops = []
    for k in range(L):
        factors = [a if m == k else eye for m in range(L)]
        ops.append(reduce(lambda x, y: sparse.kron(x, y, format="csr"), factors).astype(complex))
    return ops


class _Generator:
    '''
    GKLS generator in the form drho = K rho + rho K^dag + sum_J J rho J^dag
    '''

    def __init__(self, spec, nMax, scOccupations=None):
        check_network(spec)
        L = spec.L
        if spec.has_selfconsistent and scOccupations is None:
            raise ModelError("network has self-consistent baths: sc occupations are required")
        a = ladder_operators(L, nMax)
        dim = (nMax + 1) ** L
        Hop = sparse.csr_matrix((dim, dim), dtype=complex)
        H = spec.H
        for k in range(L):
            for l in range(L):
                if H[k, l] != 0:
                    Hop = Hop + H[k, l] * (a[k].conj().T @ a[l])
        loss = sparse.csr_matrix((dim, dim), dtype=complex)
        self.jumps = []
        for b in spec.baths:
            k = b.mode - 1
            n = float(scOccupations[k]) if b.kind == SELF_CONSISTENT else b.occupation
            if b.rate == 0:
                continue
            for J in (np.sqrt(b.rate * (n + 1.0)) * a[k], np.sqrt(b.rate * n) * a[k].T.tocsr()):
                if J.nnz == 0 or not np.any(J.data):
                    continue
                self.jumps.append(J)
                loss = loss + J.conj().T @ J
        self.K = (-1j * Hop - 0.5 * loss).tocsr()

    def __call__(self, rho):
        rhoH = rho.conj().T
        out = self.K @ rho + (self.K @ rhoH).conj().T
        for J in self.jumps:
            out += J @ (J @ rhoH).conj().T
        return out


def apply_generator(state, spec, scOccupations=None):
    '''
    drho/dt = -i[H, rho] + sum over attachments of the local thermal dissipators

    Args:
        state: TruncatedState
        spec: NetworkSpec with L == state.L
        scOccupations: self-consistent bath occupations (if any)

    Returns:
        dense matrix, traceless

    '''
    if spec.L != state.L:
        raise ModelError("network has L=%d but Fock state has L=%d" % (spec.L, state.L))
    return _Generator(spec, state.nMax, scOccupations)(state.rho)


def top_level_populations(state):
    p = np.real(np.diag(state.rho)).reshape((state.nMax + 1,) * state.L)
    return np.array([np.take(p, state.nMax, axis=k).sum() for k in range(state.L)])


def stable_step(spec, nMax, scOccupations=None):
    '''
    largest RK4 step for which every generator eigenvalue stays inside the stability region

    The dissipative part is bounded by sum rate*(2n+1)*(nMax+1) over the attachments and the
    commutator by 2*L*nMax*||H||; the step is RK4_LIMIT over the norm of the two.

    '''
    dissipative = 0.0
    for b in spec.baths:
        n = float(scOccupations[b.mode - 1]) if b.kind == SELF_CONSISTENT else b.occupation
        dissipative += b.rate * (2.0 * n + 1.0) * (nMax + 1)
    hamiltonian = 2.0 * spec.L * nMax * np.linalg.norm(spec.H, 2)
    scale = np.hypot(dissipative, hamiltonian)
    return RK4_LIMIT / scale if scale > 0 else np.inf


def evolve_fock(state, spec, tFinal, dt, scOccupations=None, tailTol=TAIL_TOL, verbose=False):
    '''
    fixed-step 4th order integration of the master equation

    Args:
        state: initial TruncatedState
        spec: NetworkSpec
        tFinal, dt: horizon and step
        tailTol: maximum population allowed on the top Fock level of any mode

    Returns:
        TruncatedState at tFinal

    Raises:
        TruncationError when the tail exceeds tailTol
        ConfigError when dt exceeds stable_step

    '''
    if spec.L != state.L:
        raise ModelError("network has L=%d but Fock state has L=%d" % (spec.L, state.L))
    gen = _Generator(spec, state.nMax, scOccupations)
    bound = stable_step(spec, state.nMax, scOccupations)
    if dt > bound:
        raise ConfigError("dt=%g exceeds the RK4 stability bound %.3g for n_max=%d" % (dt, bound, state.nMax))
    nsteps, h = step_grid(tFinal, dt)
    log("Fock evolution dim=%d, %i steps of %g" % (state.dim, nsteps, h), verbose)
    rho = np.array(state.rho, dtype=complex)
    for step in range(1, nsteps + 1):
        rho = rk4_step(gen, rho, h)
        rho = 0.5 * (rho + rho.conj().T)
        tail = top_level_populations(TruncatedState(state.nMax, rho, state.L))
        if np.max(tail) > tailTol:
            raise TruncationError("top Fock level population %.3e exceeds %.0e at t=%g; increase n_max (now %d)"
                                  % (np.max(tail), tailTol, step * h, state.nMax))
    return TruncatedState(state.nMax, rho, state.L)


def _expect(op, rho):
    ### tr(op rho) for sparse op
    return complex(op.multiply(rho.T).sum())


def extract_covariances(state):
    '''
    reduced covariances C, S and means mu of a truncated density matrix

    Returns:
        ReducedState

    '''
    a = ladder_operators(state.L, state.nMax)
    rho = state.rho
    L = state.L
    mu = np.array([_expect(a[k], rho) for k in range(L)])
    C = np.empty((L, L), dtype=complex)
    S = np.empty((L, L), dtype=complex)
    for i in range(L):
        for j in range(L):
            C[i, j] = _expect(a[j].conj().T @ a[i], rho) - np.conj(mu[j]) * mu[i]
            S[i, j] = _expect(a[i] @ a[j], rho) - mu[i] * mu[j]
    return reduced_state(C, S, mu)


def _product(single):
    rho = reduce(np.kron, single)
    return rho / np.real(np.trace(rho))


def vacuum_fock(L, nMax):
    dim = _check_dimension(L, nMax)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return TruncatedState(int(nMax), rho, int(L))


def thermal_fock(occupations, nMax):
    '''
    product of truncated (renormalized) thermal states
    '''
    occupations = np.atleast_1d(np.asarray(occupations, dtype=float))
    _check_dimension(occupations.size, nMax)
    m = np.arange(nMax + 1)
    single = []
    for n in occupations:
        p = (n / (n + 1.0)) ** m / (n + 1.0) if n > 0 else (m == 0).astype(float)
        single.append(np.diag(p / p.sum()).astype(complex))
    return TruncatedState(int(nMax), _product(single), occupations.size)


def displaced_vacuum_fock(betas, nMax):
    '''
    product of coherent states exp(beta a^dag - beta* a)|0>
    '''
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    _check_dimension(betas.size, nMax)
    a = _single_mode(nMax).toarray()
    single = []
    for beta in betas:
        psi = linalg.expm(beta * a.T - np.conj(beta) * a)[:, 0]
        single.append(np.outer(psi, psi.conj()))
    return TruncatedState(int(nMax), _product(single), betas.size)


def cutoff_for_occupation(n, tol=1e-9):
    '''
    smallest n_max whose thermal tail (n/(n+1))^(n_max+1) falls below tol
    '''
    if n < 0:
        raise ModelError("occupation must be non-negative (got %r)" % n)
    if n == 0:
        return 1
    m = int(np.ceil(np.log(tol) / np.log(n / (n + 1.0)))) - 1
    while (n / (n + 1.0)) ** (m + 1) >= tol:
        m += 1
    return max(m, 1)
