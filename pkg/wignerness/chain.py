#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

from dataclasses import dataclass
from multiprocessing import Pool, cpu_count

import numpy as np
import pandas as pd
import scipy.linalg as linalg
import statsmodels.api as sm
from scipy.optimize import fixed_point

from wignerness.dynamics import build_generators, energy_currents, lyapunov_operator, ness_residual, solve_ness
from wignerness.gaussian import occupations, reduced_state
from wignerness.network import SELF_CONSISTENT, build_chain, chain_parameters, check_network
from wignerness.util import (ConvergenceError, ModelError, NumericError, SingularCovarianceError, log,
                             warn)

RESIDUAL_TOL = 1e-12
SPLIT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ChainNess:
    occupations: np.ndarray  # <a_k^dag a_k>
    coherence_x: float  # <a_k^dag a_{k+1}>, the same on every bond
    current_j: float
    pi_total: float
    pi_r: float
    pi_sc: float
    sc_occupations: np.ndarray

    @property
    def L(self):
        return self.occupations.size


@dataclass(frozen=True)
class ChainParams:
    omega: float
    lam: float
    gamma: float
    Gamma: float
    n1: float
    nL: float

    def spec(self, L):
        return build_chain(L, self.omega, self.lam, self.gamma, self.n1, self.nL, self.Gamma)


def default_sweep_params():
    return ChainParams(omega=1.0, lam=3e-7, gamma=1e-6, Gamma=1e-7, n1=1.0, nL=2.0)


def _check_params(L, lam, gamma, Gamma, n1, nL):
    if int(L) != L or L < 2:
        raise ModelError("chain needs L >= 2 (got %r)" % L)
    if not gamma > 0:
        raise ModelError("gamma must be positive (got %r)" % gamma)
    if Gamma < 0:
        raise ModelError("Gamma must be non-negative (got %r)" % Gamma)
    if n1 < 0 or nL < 0:
        raise ModelError("occupations must be non-negative (got %r, %r)" % (n1, nL))


def closed_form_ness(L, lam, gamma, Gamma, n1, nL):
    '''
    analytic steady state of the boundary-driven chain with self-consistent baths

    Args:
        L: number of sites
        lam: nearest-neighbour coupling
        gamma: rate of the two physical baths
        Gamma: rate of the self-consistent baths (0 for the ballistic chain)
        n1, nL: occupations of the physical baths

    Returns:
        ChainNess

    '''
    Gamma = 0.0 if Gamma is None else float(Gamma)
    _check_params(L, lam, gamma, Gamma, n1, nL)
    L = int(L)
    D = 4 * lam ** 2 + gamma ** 2 + gamma * Gamma * (L - 1)

    k = np.arange(1, L + 1)
    shape = Gamma * gamma * (L - 2 * k + 1)
    shape[0] += gamma ** 2
    shape[-1] -= gamma ** 2
    occ = 0.5 * (n1 + nL) + 0.5 * (n1 - nL) * shape / D

    x = gamma * lam * (nL - n1) / D
    j = 2 * lam * x
    pi_total = j * (1.0 / (n1 + 0.5) - 1.0 / (nL + 0.5))
    pi_r, pi_sc = _split(occ, x, gamma, Gamma, n1, nL)
    return ChainNess(occupations=occ, coherence_x=float(x), current_j=float(j), pi_total=float(pi_total),
                     pi_r=pi_r, pi_sc=pi_sc, sc_occupations=occ.copy())


def _continuants(diag, offdiag):
    ### forward/backward pivots d_k, e_k of a Hermitian tridiagonal matrix
    a = np.asarray(diag, dtype=float)
    b2 = np.abs(np.asarray(offdiag)) ** 2
    L = a.size
    if b2.size != L - 1:
        raise ModelError("off-diagonal needs %d entries (got %d)" % (L - 1, b2.size))
    d = np.full(L, np.nan)
    e = np.full(L, np.nan)
    d[0] = a[0]
    for k in range(1, L):
        if not d[k - 1] > 0:
            break
        d[k] = a[k] - b2[k - 1] / d[k - 1]
    e[-1] = a[-1]
    for k in range(L - 2, -1, -1):
        if not e[k + 1] > 0:
            break
        e[k] = a[k] - b2[k] / e[k + 1]
    if not (np.all(d > 0) and np.all(e > 0)):
        raise SingularCovarianceError("tridiagonal matrix is not positive definite")
    return a, b2, d, e


def _tridiagonal_excess(diag, offdiag):
    '''
    G_kk = [M^-1]_kk and eps_k = M_kk G_kk - 1 >= 0 for positive definite tridiagonal M, O(L)
    '''
    a, b2, d, e = _continuants(diag, offdiag)
    left = np.zeros_like(a)
    right = np.zeros_like(a)
    left[1:] = b2 / d[:-1]
    right[:-1] = b2 / e[1:]
    G = 1.0 / (a - left - right)
    return G, G * (left + right)


def tridiagonal_inverse_diagonal(diag, offdiag):
    '''
    diagonal of the inverse of a positive definite Hermitian tridiagonal matrix

    Uses ratios of the forward/backward continuants, so nothing overflows for long chains.

    Args:
        diag: length-L real diagonal
        offdiag: length-(L-1) off-diagonal

    Returns:
        length-L array

    '''
    return _tridiagonal_excess(diag, offdiag)[0]


def _clamp(value, scale, name):
    if value < 0:
        if value >= -SPLIT_FLOOR * max(1.0, scale):
            return 0.0
        raise NumericError("negative %s %.3e" % (name, value))
    return float(value)


def _split(occ, x, gamma, Gamma, n1, nL):
    a = occ + 0.5
    _, eps = _tridiagonal_excess(a, np.full(a.size - 1, x))
    pi_r = 0.0
    for k, n in ((0, n1), (-1, nL)):
        u = n + 0.5
        ### Phi_k + gamma((n_k + 1/2) G_kk - 1) rearranged without cancellation
        pi_r += gamma * ((a[k] - u) ** 2 / (u * a[k]) + u * eps[k] / a[k])
    pi_sc = float(Gamma * np.sum(eps)) if Gamma > 0 else 0.0
    return _clamp(pi_r, gamma, "pi_r"), _clamp(pi_sc, Gamma, "pi_sc")


def production_split(ness, gamma, Gamma, n1, nL):
    '''
    splits the steady-state production into the physical-bath and self-consistent-bath parts

    Args:
        ness: ChainNess
        gamma, Gamma: physical and self-consistent rates
        n1, nL: physical bath occupations

    Returns:
        (pi_r, pi_sc); pi_sc is exactly 0 when Gamma is 0

    '''
    return _split(np.asarray(ness.occupations, dtype=float), ness.coherence_x, gamma,
                  0.0 if Gamma is None else Gamma, n1, nL)


def _ness_from_cm(C, H, p):
    state = reduced_state(C)
    occ = occupations(state)
    j = energy_currents(state, H)[0, 1]
    x = float(np.real(C[1, 0]))
    pi_total = j * (1.0 / (p["n1"] + 0.5) - 1.0 / (p["nL"] + 0.5))
    pi_r, pi_sc = _split(occ, x, p["gamma"], p["Gamma"], p["n1"], p["nL"])
    return ChainNess(occupations=occ, coherence_x=x, current_j=float(j), pi_total=float(pi_total),
                     pi_r=pi_r, pi_sc=pi_sc, sc_occupations=occ.copy())


def solve_selfconsistent_cm(spec, verbose=False):
    '''
    steady-state C of any network whose self-consistent baths track their node's occupation

    The condition n_sc = diag(C) enters as +Gamma_sc C_d, keeping the system linear in C.

    Args:
        spec: NetworkSpec (with or without self-consistent baths)

    Returns:
        (ReducedState, sc occupations or None)

    '''
    check_network(spec)
    L = spec.L
    rates = np.zeros(L)
    dephasing = np.zeros(L)
    f = np.zeros((L, L))
    for b in spec.baths:
        k = b.mode - 1
        rates[k] += b.rate
        if b.kind == SELF_CONSISTENT:
            dephasing[k] += b.rate
        else:
            f[k, k] += b.rate * b.occupation

    K = lyapunov_operator(spec.H, rates, dephasing if spec.has_selfconsistent else None)
    try:
        c = linalg.solve(K, -f.ravel().astype(complex))
    except linalg.LinAlgError as e:
        raise SingularCovarianceError("self-consistent steady-state system is singular: %s" % e)
    C = c.reshape(L, L)
    C = 0.5 * (C + C.conj().T)

    sc = np.real(np.diag(C)).copy() if spec.has_selfconsistent else None
    res = ness_residual(C, build_generators(spec, sc), spec.H)
    if res > RESIDUAL_TOL:
        warn("self-consistent steady-state residual %.3e exceeds %.0e" % (res, RESIDUAL_TOL))
    log("Self-consistent steady state L=%d solved, residual %.3e" % (L, res), verbose)
    return reduced_state(C), sc


def solve_selfconsistent_ness(spec, verbose=False):
    '''
    numerical steady state of a chain network, self-consistent baths included

    Args:
        spec: NetworkSpec from build_chain (Gamma >= 0)

    Returns:
        ChainNess

    '''
    p = chain_parameters(spec)
    state, _ = solve_selfconsistent_cm(spec, verbose)
    return _ness_from_cm(state.C, spec.H, p)


def ness_covariance(ness):
    '''
    tridiagonal steady-state C of a ChainNess
    '''
    L = ness.L
    C = np.diag(np.asarray(ness.occupations, dtype=complex))
    k = np.arange(L - 1)
    C[k, k + 1] = ness.coherence_x
    C[k + 1, k] = ness.coherence_x
    return C


def selfconsistent_fixed_point(spec, initial=None, tol=1e-10, maxIter=500):
    '''
    iterative cross-check: n_sc <- diag C(n_sc), accelerated with Steffensen's method

    Args:
        spec: chain NetworkSpec with self-consistent baths
        initial: starting sc occupations (default: mean of n1 and nL everywhere)

    Returns:
        ChainNess

    '''
    p = chain_parameters(spec)
    if not spec.has_selfconsistent:
        raise ModelError("chain has no self-consistent baths to iterate")
    x0 = np.full(p["L"], 0.5 * (p["n1"] + p["nL"])) if initial is None else np.asarray(initial, dtype=float)

    def update(nsc):
        return occupations(solve_ness(spec, scOccupations=nsc, method="lyapunov"))

    try:
        nsc = fixed_point(update, x0, xtol=tol, maxiter=maxIter, method="del2")
    except RuntimeError as e:
        raise ConvergenceError("self-consistent iteration did not converge: %s" % e)
    C = solve_ness(spec, scOccupations=nsc, method="lyapunov").C
    return _ness_from_cm(C, spec.H, p)


def occupation_profile(params, L):
    ness = closed_form_ness(L, params.lam, params.gamma, params.Gamma, params.n1, params.nL)
    return pd.DataFrame({"k": np.arange(1, int(L) + 1), "occupation": ness.occupations},
                        columns=["k", "occupation"])


def profile_fit(profile):
    '''
    straight-line fit of the interior sites (k = 2 .. L-1)

    Returns:
        dict with slope, intercept, r2 (r2 None for a flat interior)

    '''
    interior = profile.iloc[1:-1]
    if len(interior) < 2:
        return {"slope": None, "intercept": None, "r2": None, "note": "fewer than two interior sites"}
    y = interior["occupation"].values
    if np.ptp(y) <= 1e-12 * max(1.0, np.max(np.abs(y))):
        return {"slope": 0.0, "intercept": float(y[0]), "r2": None, "note": "flat interior"}
    fit = sm.OLS(y, sm.add_constant(interior["k"].values.astype(float))).fit()
    return {"slope": float(fit.params[1]), "intercept": float(fit.params[0]), "r2": float(fit.rsquared)}


def _sweep_row(params, L):
    ness = closed_form_ness(L, params.lam, params.gamma, params.Gamma, params.n1, params.nL)
    return L, ness.current_j, ness.pi_total, ness.pi_r, ness.pi_sc


def _sweep_row_star(args):
    return _sweep_row(*args)


def _loglog_slope(L, y):
    fit = sm.OLS(np.log(y), sm.add_constant(np.log(L))).fit()
    return float(fit.params[1]), float(fit.bse[1])


def sweep_fit(frame):
    '''
    log-log slopes of pi_r and pi_sc over the top decade of L, and the pi_sc/pi_r crossover

    Returns:
        dict (slopes None with a note when the sweep cannot support a fit)

    '''
    fit = {"slope_pi_r": None, "slope_pi_sc": None, "stderr_pi_r": None, "stderr_pi_sc": None,
           "crossover_L": None, "fit_L_min": None, "fit_L_max": None, "notes": []}
    above = frame[frame["pi_sc"] > frame["pi_r"]]
    if len(above):
        fit["crossover_L"] = int(above["L"].iloc[0])

    if len(frame) < 2:
        fit["notes"].append("single L value: fit omitted")
        return fit
    top = frame[frame["L"] >= frame["L"].max() / 10.0]
    if len(top) < 2:
        top = frame
    fit["fit_L_min"] = int(top["L"].min())
    fit["fit_L_max"] = int(top["L"].max())
    L = top["L"].values.astype(float)
    for col in ("pi_r", "pi_sc"):
        y = top[col].values
        if np.all(y > 0):
            fit["slope_" + col], fit["stderr_" + col] = _loglog_slope(L, y)
        else:
            fit["notes"].append("%s not positive over the fit range: slope omitted" % col)
    return fit


def scaling_sweep(params, LValues, threads=None, verbose=False):
    '''
    closed-form steady state for every L, computed concurrently

    Args:
        params: ChainParams
        LValues: ascending list of chain lengths
        threads: worker processes (default: all cores)

    Returns:
        (DataFrame of L, j, pi_total, pi_r, pi_sc; fit dict)

    '''
    LValues = [int(L) for L in LValues]
    if not LValues:
        raise ModelError("no chain lengths given")
    if any(b <= a for a, b in zip(LValues, LValues[1:])):
        raise ModelError("chain lengths must be strictly ascending: %s" % LValues)
    jobs = [(params, L) for L in LValues]
    threads = cpu_count() if threads is None else int(threads)
    log("Sweeping %d chain lengths on %d workers" % (len(jobs), threads), verbose)
    if threads > 1 and len(jobs) > 1:
        pool = Pool(min(threads, len(jobs)))
        try:
            rows = pool.map(_sweep_row_star, jobs)
        finally:
            pool.close()
            pool.join()
    else:
        rows = [_sweep_row_star(job) for job in jobs]

    frame = pd.DataFrame(sorted(rows), columns=["L", "j", "pi_total", "pi_r", "pi_sc"])
    return frame, sweep_fit(frame)
