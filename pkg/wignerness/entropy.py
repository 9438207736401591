#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from wignerness.dynamics import energy_currents
from wignerness.gaussian import (assemble_full_cm, augment, inverse_full_cm, log_gradient, occupations,
                                 sample_phase_points, second_moments, wigner_density_at, wigner_entropy)
from wignerness.network import PHYSICAL, SELF_CONSISTENT, reference_occupations
from wignerness.util import ModelError, NumericError, SingularCovarianceError, log

PRODUCTION_FLOOR = 1e-12
MIN_SAMPLES = 1000
MC_CHUNK = 200000


@dataclass(frozen=True)
class ChannelRef:
    mode: int  # 1-based
    rate: float
    occupation: float
    kind: str = PHYSICAL


@dataclass(frozen=True, eq=False)
class EntropyReport:
    channels: Tuple[ChannelRef, ...]
    flux_per_channel: np.ndarray
    production_per_channel: np.ndarray
    total_flux: float
    total_production: float
    currents: np.ndarray
    wigner_entropy: float
    bilinear: Optional[float] = None
    onsager: Optional[float] = None


def _check_channel(state, channel, positiveRate=False):
    if not 1 <= channel.mode <= state.L:
        raise ModelError("channel mode %r outside [1, %d]" % (channel.mode, state.L))
    if channel.rate < 0 or (positiveRate and channel.rate == 0):
        raise ModelError("channel on mode %d has invalid rate %r" % (channel.mode, channel.rate))
    if channel.occupation is None or channel.occupation < 0:
        raise ModelError("channel on mode %d has invalid occupation %r" % (channel.mode, channel.occupation))
    return channel.mode - 1


def entropy_flux(state, channel):
    '''
    Wigner entropy flux into the bath of one channel

        Phi_k = gamma_k (<a_k^dag a_k> - n_k) / (n_k + 1/2)

    '''
    k = _check_channel(state, channel)
    n = channel.occupation
    return float(channel.rate * (occupations(state)[k] - n) / (n + 0.5))


def entropy_production_channel(state, channel, verbose=False):
    '''
    closed-form production of one dissipation channel

        Pi_k = Phi_k - gamma_k + gamma_k (n_k + 1/2) [theta^-1]_{a_k, a_k}

    Args:
        state: ReducedState (theta positive definite)
        channel: ChannelRef

    Returns:
        Pi_k >= 0; round-off negatives are clamped

    '''
    k = _check_channel(state, channel)
    n = channel.occupation
    g = channel.rate
    B = float(np.real(inverse_full_cm(state).theta[2 * k, 2 * k]))
    if not B > 0:
        raise SingularCovarianceError("non-positive inverse covariance on mode %d" % channel.mode)
    gain = g * (n + 0.5) * B
    value = entropy_flux(state, channel) - g + gain
    if value < 0:
        if value >= -PRODUCTION_FLOOR * max(1.0, gain):
            log("production on mode %d clamped from %.3e to 0" % (channel.mode, value), verbose)
            return 0.0
        raise NumericError("negative entropy production %.3e on mode %d (invalid state?)"
                           % (value, channel.mode))
    return float(value)


def _ref(state, refOccupations):
    n = np.asarray(refOccupations, dtype=float)
    if n.shape != (state.L,):
        raise ModelError("need one reference occupation per mode (%d), got shape %s" % (state.L, n.shape))
    if np.any(n < 0):
        raise ModelError("reference occupations must be non-negative")
    return n


def unitary_entropy_term(state, H, refOccupations):
    '''
    -int U(W) ln W_eq: the exchange of the unitary flow with the local reference state

        sum_{k != l} 2/(n_k + 1/2) Im{H_kl <a_k^dag a_l>}

    '''
    n = _ref(state, refOccupations)
    N = second_moments(state)
    terms = np.imag(H * N)
    np.fill_diagonal(terms, 0.0)
    return float(np.sum((2.0 / (n + 0.5))[:, None] * terms))


def ness_production_bilinear(state, H, refOccupations):
    '''
    total steady-state production from the coherences alone (single bath per node)
    '''
    return unitary_entropy_term(state, H, refOccupations)


def ness_production_onsager(currents, refOccupations):
    '''
    1/2 sum_{k != l} j_kl [1/(n_k + 1/2) - 1/(n_l + 1/2)]
    '''
    j = np.asarray(currents, dtype=float)
    a = 1.0 / (np.asarray(refOccupations, dtype=float) + 0.5)
    if j.shape != (a.size, a.size):
        raise ModelError("currents shape %s does not match %d occupations" % (j.shape, a.size))
    return float(0.5 * np.sum(j * (a[:, None] - a[None, :])))


def phase_space_currents(state, channel, alpha, H):
    '''
    irreversible and reversible quasi-probability currents of mode k at phase point(s) alpha

        J_k = gamma_k/2 [alpha_k W + (n_k + 1/2) dW/d(alpha_k*)]
        A_k = i sum_l H_kl alpha_l W

    Args:
        state: ReducedState
        channel: ChannelRef of mode k
        alpha: (L,) or (N, L) phase-space points
        H: coupling matrix

    Returns:
        (J_k, A_k), complex scalars or (N,) arrays

    '''
    k = _check_channel(state, channel)
    alpha = np.asarray(alpha, dtype=complex)
    W = wigner_density_at(state, alpha)
    dlnW = log_gradient(state, alpha)[..., k]
    J = 0.5 * channel.rate * (alpha[..., k] + (channel.occupation + 0.5) * dlnW) * W
    A = 1j * (alpha @ np.asarray(H)[k]) * W
    return J, A


def mc_production_estimate(state, channel, samples, rng):
    '''
    Monte-Carlo estimate of Pi_k = 4/(gamma_k (n_k + 1/2)) E_W[|J_k/W|^2]

    J_k/W is linear in alpha and is evaluated with a dense solve against theta,
    independently of the block inverse used by entropy_production_channel.

    Args:
        state: ReducedState
        channel: ChannelRef (rate > 0)
        samples: number of phase points (>= 1000)
        rng: numpy Generator

    Returns:
        (estimate, standard error)

    '''
    k = _check_channel(state, channel, positiveRate=True)
    samples = int(samples)
    if samples < MIN_SAMPLES:
        raise ModelError("at least %d samples are required (got %d)" % (MIN_SAMPLES, samples))
    g = channel.rate
    n = channel.occupation + 0.5
    theta = assemble_full_cm(state).theta
    mu = augment(state.mu)

    values = []
    left = samples
    while left > 0:
        m = min(left, MC_CHUNK)
        alpha = sample_phase_points(state, m, rng)
        v = np.linalg.solve(theta, (augment(alpha) - mu).T)
        jw = 0.5 * g * (alpha[:, k] - n * v[2 * k])
        values.append(np.abs(jw) ** 2)
        left -= m
    values = 4.0 / (g * n) * np.concatenate(values)
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(samples))


def channels_from_spec(spec, scOccupations=None):
    '''
    one ChannelRef per bath attachment, self-consistent baths at their current occupations
    '''
    channels = []
    for b in spec.baths:
        if b.kind == SELF_CONSISTENT:
            if scOccupations is None:
                raise ModelError("network has self-consistent baths: sc occupations are required")
            n = float(scOccupations[b.mode - 1])
        else:
            n = b.occupation
        channels.append(ChannelRef(b.mode, b.rate, n, b.kind))
    return tuple(channels)


def entropy_report(state, spec, scOccupations=None, verbose=False):
    '''
    per-channel fluxes and productions, energy currents and Wigner entropy of a state

    Args:
        state: ReducedState
        spec: NetworkSpec
        scOccupations: self-consistent bath occupations (if any)

    Returns:
        EntropyReport; bilinear and Onsager forms only for single-bath-per-node networks

    '''
    channels = channels_from_spec(spec, scOccupations)
    flux = np.array([entropy_flux(state, c) for c in channels])
    production = np.array([entropy_production_channel(state, c, verbose) for c in channels])
    currents = energy_currents(state, spec.H)

    bilinear = onsager = None
    try:
        ref = reference_occupations(spec)
    except ModelError:
        ref = None
    if ref is not None:
        bilinear = ness_production_bilinear(state, spec.H, ref)
        onsager = ness_production_onsager(currents, ref)

    return EntropyReport(channels=channels,
                         flux_per_channel=flux,
                         production_per_channel=production,
                         total_flux=float(np.sum(flux)),
                         total_production=float(np.sum(production)),
                         currents=currents,
                         wigner_entropy=float(wigner_entropy(state)),
                         bilinear=bilinear,
                         onsager=onsager)


def relative_entropy_rate(state, spec):
    '''
    d/dt S(W || W_eq) = unitary_entropy_term - total production; vanishes in the steady state
    '''
    ref = reference_occupations(spec)
    channels = channels_from_spec(spec)
    total = sum(entropy_production_channel(state, c) for c in channels)
    return unitary_entropy_term(state, spec.H, ref) - total


def report_to_frame(report):
    return pd.DataFrame({"mode": [c.mode for c in report.channels],
                         "kind": [c.kind for c in report.channels],
                         "flux": report.flux_per_channel,
                         "production": report.production_per_channel},
                        columns=["mode", "kind", "flux", "production"])


def report_to_dict(report):
    return {"channels": [{"mode": c.mode, "kind": c.kind, "rate": c.rate, "occupation": c.occupation,
                          "flux": f, "production": p}
                         for c, f, p in zip(report.channels, report.flux_per_channel,
                                            report.production_per_channel)],
            "total_flux": report.total_flux,
            "total_production": report.total_production,
            "currents": report.currents,
            "wigner_entropy": report.wigner_entropy,
            "bilinear": report.bilinear,
            "onsager": report.onsager}
