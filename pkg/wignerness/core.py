#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

import os
import time

import numpy as np
import pandas as pd

from wignerness.chain import (ChainParams, closed_form_ness, ness_covariance, occupation_profile, profile_fit,
                              scaling_sweep, solve_selfconsistent_cm)
from wignerness.dynamics import build_generators, evolve, solve_ness
from wignerness.entropy import entropy_report, mc_production_estimate, report_to_dict, report_to_frame
from wignerness.fock import (cutoff_for_occupation, evolve_fock, extract_covariances, stable_step,
                             top_level_populations, vacuum_fock)
from wignerness.gaussian import occupations, state_from_dict, state_to_dict, vacuum_state
from wignerness.network import chain_parameters, is_chain, load_network
from wignerness.util import ConfigError, ModelError, timestamp, warn, write_csv, write_json

DEFAULT_SEED = 20190101
DEFAULT_SAMPLES = 100000
DEFAULT_SWEEP_LS = [2 ** i for i in range(1, 12)]
DEFAULT_BENCH_LS = [2 ** i for i in range(1, 7)]
DENSE_BENCH_MAX_L = 64
FOCK_MAX_L = 3
FOCK_TOL = 1e-5


def _out(outDir, name):
    if not os.path.isdir(outDir):
        raise ConfigError("output directory does not exist: %s" % outDir)
    return os.path.join(outDir, name)


def _steady_state(spec, method):
    '''
    NESS of any network; self-consistent baths are closed with the linear C_d substitution
    '''
    if spec.has_selfconsistent:
        print("[%s] Solving self-consistent steady state" % (timestamp()))
        return solve_selfconsistent_cm(spec)
    print("[%s] Solving steady state (%s)" % (timestamp(), method))
    return solve_ness(spec, method=method), None


def _chain_params(spec):
    if not is_chain(spec):
        raise ModelError("this command needs a boundary-driven chain network")
    p = chain_parameters(spec)
    return p["L"], ChainParams(omega=p["omega"], lam=p["lam"], gamma=p["gamma"], Gamma=p["Gamma"],
                               n1=p["n1"], nL=p["nL"])


def cmd_ness(configFile, outDir, method="dense"):
    '''

    solves the steady state and reports its entropy balance

    Args:
        configFile: network JSON
        outDir: output directory
        method: dense, lyapunov or jacobi

    Returns:
        ness.json (reduced covariances) and entropy.csv (mode, kind, flux, production)

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, _ = load_network(configFile)
    state, sc = _steady_state(spec, method)

    doc = state_to_dict(state)
    doc["sc_occupations"] = sc
    write_json(doc, _out(outDir, "ness.json"))

    report = entropy_report(state, spec, sc)
    write_csv(report_to_frame(report), _out(outDir, "entropy.csv"))
    print("[%s] Total flux %.10g, total production %.10g" % (timestamp(), report.total_flux,
                                                               report.total_production))
    print("[%s] Done" % (timestamp()))


def cmd_entropy(configFile, outDir, samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED, method="dense"):
    '''

    full entropy report of the steady state with Monte-Carlo cross-checks per channel

    Returns:
        entropy.json

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, _ = load_network(configFile)
    state, sc = _steady_state(spec, method)
    report = entropy_report(state, spec, sc)

    print("[%s] Monte-Carlo estimates with %s samples (seed %d)" % (timestamp(), '{:,}'.format(samples), seed))
    rng = np.random.default_rng(seed)
    mc = []
    for c, p in zip(report.channels, report.production_per_channel):
        if c.rate <= 0:
            continue
        estimate, stderr = mc_production_estimate(state, c, samples, rng)
        mc.append({"mode": c.mode, "kind": c.kind, "closed_form": p, "estimate": estimate, "std_error": stderr})

    doc = report_to_dict(report)
    doc["monte_carlo"] = mc
    doc["samples"] = int(samples)
    doc["seed"] = int(seed)
    write_json(doc, _out(outDir, "entropy.json"))
    print("[%s] Done" % (timestamp()))


def _initial_state(spec, options):
    initial = options.get("initial")
    if initial is None:
        return vacuum_state(spec.L)
    state = state_from_dict(initial)
    if state.L != spec.L:
        raise ConfigError("initial state has L=%d, network has L=%d" % (state.L, spec.L))
    return state


def _default_grid(spec, tFinal, dt):
    rates = np.array([b.rate for b in spec.baths if b.rate > 0])
    if tFinal is None:
        if not rates.size:
            raise ConfigError("t_final is required for a network without dissipation")
        tFinal = 10.0 / rates.min()
    if dt is None:
        dt = 1e-3 / rates.max() if rates.size else tFinal * 1e-4
    return float(tFinal), float(dt)


def cmd_evolve(configFile, outDir, tFinal=None, dt=None, options=None):
    '''

    transient evolution from the configured initial state (vacuum by default)

    Returns:
        trajectory.csv (t, occupation_k, wigner_entropy, pi_total, phi_total)

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, fileOptions = load_network(configFile)
    options = dict(fileOptions, **(options or {}))
    tFinal, dt = _default_grid(spec, tFinal, dt)

    sc = None
    if spec.has_selfconsistent:
        _, sc = _steady_state(spec, "dense")
        print("[%s] Self-consistent baths held at their steady-state occupations" % (timestamp()))

    gen = build_generators(spec, sc)
    state = _initial_state(spec, options)
    print("[%s] Evolving to t=%g with dt=%g" % (timestamp(), tFinal, dt))
    times, states = evolve(state, gen, spec.H, tFinal, dt, sampleEvery=int(options.get("sample_every", 1)))

    rows = []
    for t, s in zip(times, states):
        report = entropy_report(s, spec, sc)
        rows.append([t] + list(occupations(s)) + [report.wigner_entropy, report.total_production,
                                                  report.total_flux])
    columns = ["t"] + ["occupation_%d" % k for k in range(1, spec.L + 1)] + ["wigner_entropy", "pi_total",
                                                                             "phi_total"]
    write_csv(pd.DataFrame(rows, columns=columns), _out(outDir, "trajectory.csv"))
    print("[%s] Final occupations: %s" % (timestamp(), ", ".join("%.10g" % n for n in occupations(states[-1]))))
    print("[%s] Done" % (timestamp()))


def cmd_profile(configFile, outDir):
    '''

    closed-form occupation profile of a chain and its interior straight-line fit

    Returns:
        profile.csv (k, occupation) and profile_fit.json

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, _ = load_network(configFile)
    L, params = _chain_params(spec)
    profile = occupation_profile(params, L)
    fit = profile_fit(profile)
    write_csv(profile, _out(outDir, "profile.csv"))
    write_json(fit, _out(outDir, "profile_fit.json"))
    if fit.get("r2") is not None:
        print("[%s] Interior slope %.10g, R^2 %.12f" % (timestamp(), fit["slope"], fit["r2"]))
    print("[%s] Done" % (timestamp()))


def cmd_sweep(configFile, outDir, LValues=None, threads=None):
    '''

    entropy production split over chain lengths

    Returns:
        sweep.csv (L, j, pi_total, pi_r, pi_sc) and fit.json (log-log slopes, crossover)

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, _ = load_network(configFile)
    _, params = _chain_params(spec)
    LValues = DEFAULT_SWEEP_LS if not LValues else LValues

    frame, fit = scaling_sweep(params, LValues, threads=threads, verbose=True)
    for note in fit["notes"]:
        warn(note)
    write_csv(frame, _out(outDir, "sweep.csv"))
    write_json(fit, _out(outDir, "fit.json"))
    if fit["slope_pi_sc"] is not None:
        print("[%s] Slope of pi_sc: %.4f" % (timestamp(), fit["slope_pi_sc"]))
    if fit["slope_pi_r"] is not None:
        print("[%s] Slope of pi_r: %.4f" % (timestamp(), fit["slope_pi_r"]))
    print("[%s] Done" % (timestamp()))


def cmd_fock_check(configFile, outDir, tFinal=None, dt=None, nMax=None):
    '''

    brute-force density-matrix evolution compared against the Gaussian evolution

    Returns:
        fock_check.json (max covariance deviation, pass/fail at 1e-5)

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, _ = load_network(configFile)
    if spec.L > FOCK_MAX_L:
        raise ModelError("fock-check supports L <= %d (got %d)" % (FOCK_MAX_L, spec.L))
    tFinal, _ = _default_grid(spec, tFinal, 1.0)

    ness, sc = _steady_state(spec, "dense")
    if nMax is None:
        inPlay = [b.occupation for b in spec.baths if b.occupation is not None]
        inPlay += list(occupations(ness))
        nMax = cutoff_for_occupation(max(inPlay))
    if dt is None:
        dt = min(0.5 * stable_step(spec, nMax, sc), tFinal)
    print("[%s] Fock cutoff n_max=%d, dimension %s" % (timestamp(), nMax, '{:,}'.format((nMax + 1) ** spec.L)))

    fock = evolve_fock(vacuum_fock(spec.L, nMax), spec, tFinal, dt, scOccupations=sc)
    extracted = extract_covariances(fock)
    _, states = evolve(vacuum_state(spec.L), build_generators(spec, sc), spec.H, tFinal, dt)
    gaussian = states[-1]

    deviation = max(np.max(np.abs(extracted.C - gaussian.C)), np.max(np.abs(extracted.S - gaussian.S)),
                    np.max(np.abs(extracted.mu - gaussian.mu)))
    passed = bool(deviation < FOCK_TOL)
    doc = {"L": spec.L, "n_max": int(nMax), "t_final": tFinal, "dt": dt,
           "max_deviation": float(deviation),
           "max_deviation_ness": float(np.max(np.abs(extracted.C - ness.C))),
           "top_level_populations": top_level_populations(fock),
           "tolerance": FOCK_TOL, "pass": passed,
           "fock": state_to_dict(extracted), "gaussian": state_to_dict(gaussian)}
    write_json(doc, _out(outDir, "fock_check.json"))
    if passed:
        print("[%s] PASS: max deviation %.3e" % (timestamp(), deviation))
    else:
        warn("FAIL: max deviation %.3e exceeds %.0e" % (deviation, FOCK_TOL))
    print("[%s] Done" % (timestamp()))
    return passed


def _timed(func, *args, **kwargs):
    start = time.perf_counter()
    result = func(*args, **kwargs)
    return result, time.perf_counter() - start


def cmd_bench(configFile, outDir, LValues=None):
    '''

    dense vs Lyapunov vs closed-form steady state of the configured chain over chain lengths

    Returns:
        bench.csv (L, dense_seconds, lyapunov_seconds, closed_form_seconds, max_abs_deviation)

    '''
    print("[%s] Loading network %s" % (timestamp(), configFile))
    spec, _ = load_network(configFile)
    _, params = _chain_params(spec)
    LValues = DEFAULT_BENCH_LS if not LValues else LValues

    rows = []
    for L in LValues:
        print("[%s] Benchmarking L=%d" % (timestamp(), L))
        chain = params.spec(L)
        closed, tc = _timed(closed_form_ness, L, params.lam, params.gamma, params.Gamma, params.n1, params.nL)
        reference = ness_covariance(closed)
        sc = closed.sc_occupations if chain.has_selfconsistent else None
        deviation = 0.0

        td = np.nan
        if L <= DENSE_BENCH_MAX_L:
            dense, td = _timed(solve_ness, chain, scOccupations=sc, method="dense")
            deviation = max(deviation, np.max(np.abs(dense.C - reference)))
        lyap, tl = _timed(solve_ness, chain, scOccupations=sc, method="lyapunov")
        deviation = max(deviation, np.max(np.abs(lyap.C - reference)))
        rows.append([L, td, tl, tc, deviation])

    frame = pd.DataFrame(rows, columns=["L", "dense_seconds", "lyapunov_seconds", "closed_form_seconds",
                                        "max_abs_deviation"])
    write_csv(frame, _out(outDir, "bench.csv"))
    print("[%s] Done" % (timestamp()))
