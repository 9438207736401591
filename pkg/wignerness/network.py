#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from wignerness.util import ConfigError, ModelError, read_json

PHYSICAL = "physical"
SELF_CONSISTENT = "self-consistent"
KINDS = (PHYSICAL, SELF_CONSISTENT)

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class BathAttachment:
    mode: int  # 1-based
    rate: float
    occupation: Optional[float] = None  # None for self-consistent baths
    kind: str = PHYSICAL


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    '''
    open network of L bosonic modes: Hermitian H (H_kk = omega_k) plus local baths
    '''
    H: np.ndarray
    baths: Tuple[BathAttachment, ...]

    @property
    def L(self):
        return self.H.shape[0]

    @property
    def frequencies(self):
        return np.real(np.diag(self.H))

    @property
    def has_selfconsistent(self):
        return any(b.kind == SELF_CONSISTENT for b in self.baths)


def make_network(H, baths):
    H = np.array(H, dtype=complex)
    H.setflags(write=False)
    return NetworkSpec(H=H, baths=tuple(baths))


def occupation_from_temperature(omega, T):
    '''
    Bose-Einstein occupation 1/(exp(omega/T) - 1), hbar = k_B = 1

    Args:
        omega: mode frequency (> 0)
        T: temperature (> 0)

    Returns:
        thermal occupation, 0 once omega/T underflows the exponential

    '''
    if not omega > 0:
        raise ModelError("omega must be positive (got %r)" % omega)
    if not T > 0:
        raise ModelError("temperature must be positive (got %r)" % T)
    x = omega / T
    if x > 700.0:
        return 0.0
    return 1.0 / np.expm1(x)


def temperature_from_occupation(omega, n):
    if not omega > 0:
        raise ModelError("omega must be positive (got %r)" % omega)
    if n < 0:
        raise ModelError("occupation must be non-negative (got %r)" % n)
    if n == 0:
        return 0.0
    return omega / np.log1p(1.0 / n)


def build_chain(L, omega, lam, gamma, n1, nL, Gamma=None):
    '''
    boundary-driven chain with nearest-neighbour coupling i*lam

    Args:
        L: number of sites (>= 2)
        omega: on-site frequency
        lam: coupling strength, H[k, k+1] = i*lam
        gamma: rate of the two physical baths on sites 1 and L
        n1, nL: occupations of the physical baths
        Gamma: rate of the self-consistent bath on every site (optional)

    Returns:
        NetworkSpec

    '''
    if int(L) != L or L < 2:
        raise ModelError("chain needs L >= 2 (got %r)" % L)
    L = int(L)
    if not gamma > 0:
        raise ModelError("gamma must be positive (got %r)" % gamma)
    if n1 < 0 or nL < 0:
        raise ModelError("occupations must be non-negative (got %r, %r)" % (n1, nL))
    if Gamma is not None and Gamma < 0:
        raise ModelError("Gamma must be non-negative (got %r)" % Gamma)

    H = np.diag(np.full(L, omega, dtype=complex))
    k = np.arange(L - 1)
    H[k, k + 1] = 1j * lam
    H[k + 1, k] = -1j * lam

    baths = [BathAttachment(1, float(gamma), float(n1), PHYSICAL),
             BathAttachment(L, float(gamma), float(nL), PHYSICAL)]
    if Gamma is not None and Gamma > 0:
        baths += [BathAttachment(m, float(Gamma), None, SELF_CONSISTENT) for m in range(1, L + 1)]
    return make_network(H, baths)


def validate(spec):
    '''
    checks the NetworkSpec invariants

    Returns:
        list of human-readable violations, empty if valid

    '''
    violations = []
    H = np.asarray(spec.H)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        return ["H must be a non-empty square matrix (shape %s)" % (H.shape,)]
    L = H.shape[0]
    dev = np.abs(H - H.conj().T)
    if np.max(dev) > HERMITIAN_TOL:
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        violations.append("H is not Hermitian: H[%d,%d]=%s but conj(H[%d,%d])=%s"
                          % (i + 1, j + 1, H[i, j], j + 1, i + 1, np.conj(H[j, i])))

    count = {}
    for b in spec.baths:
        if b.kind not in KINDS:
            violations.append("bath on mode %s has unknown kind %r" % (b.mode, b.kind))
        if not (isinstance(b.mode, (int, np.integer)) and 1 <= b.mode <= L):
            violations.append("bath references mode %r outside [1, %d]" % (b.mode, L))
            continue
        if not b.rate >= 0:
            violations.append("bath on mode %d has negative rate %r" % (b.mode, b.rate))
        if b.kind == PHYSICAL:
            if b.occupation is None or not b.occupation >= 0:
                violations.append("bath on mode %d has invalid occupation %r" % (b.mode, b.occupation))
        elif b.occupation is not None:
            violations.append("self-consistent bath on mode %d carries a user occupation" % b.mode)
        count[b.mode] = count.get(b.mode, 0) + 1

    for m, c in sorted(count.items()):
        if c > 2:
            violations.append("mode %d carries %d attachments (at most 2 allowed)" % (m, c))
    return violations


def check_network(spec):
    violations = validate(spec)
    if violations:
        raise ModelError("invalid network: " + "; ".join(violations))
    return spec


def mode_attachments(spec):
    per_mode = [[] for _ in range(spec.L)]
    for b in spec.baths:
        per_mode[b.mode - 1].append(b)
    return per_mode


def reference_occupations(spec):
    '''
    per-mode bath occupations of a single-bath-per-node network

    Raises:
        ModelError if a mode carries zero, two, or a self-consistent attachment

    '''
    occ = np.zeros(spec.L)
    for k, attached in enumerate(mode_attachments(spec)):
        if len(attached) != 1:
            raise ModelError("mode %d carries %d bath attachments; the local reference state "
                             "needs exactly one" % (k + 1, len(attached)))
        if attached[0].kind != PHYSICAL:
            raise ModelError("mode %d is attached only to a self-consistent bath" % (k + 1))
        occ[k] = attached[0].occupation
    return occ


def is_chain(spec):
    '''
    True if spec has the build_chain structure (uniform nearest-neighbour i*lam coupling)
    '''
    L = spec.L
    if L < 2:
        return False
    H = spec.H
    w = H[0, 0]
    lam = np.imag(H[0, 1])
    expected = np.diag(np.full(L, w, dtype=complex))
    k = np.arange(L - 1)
    expected[k, k + 1] = 1j * lam
    expected[k + 1, k] = -1j * lam
    if not np.allclose(H, expected, rtol=0, atol=HERMITIAN_TOL):
        return False
    phys = [b for b in spec.baths if b.kind == PHYSICAL]
    sc = [b for b in spec.baths if b.kind == SELF_CONSISTENT]
    if sorted(b.mode for b in phys) != [1, L] or phys[0].rate != phys[1].rate:
        return False
    if sc and (sorted(b.mode for b in sc) != list(range(1, L + 1)) or len(set(b.rate for b in sc)) != 1):
        return False
    return True


def chain_parameters(spec):
    '''
    inverse of build_chain

    Returns:
        dict with L, omega, lam, gamma, n1, nL, Gamma

    '''
    if not is_chain(spec):
        raise ModelError("network is not a boundary-driven chain")
    phys = {b.mode: b for b in spec.baths if b.kind == PHYSICAL}
    sc = [b for b in spec.baths if b.kind == SELF_CONSISTENT]
    L = spec.L
    return dict(L=L,
                omega=float(np.real(spec.H[0, 0])),
                lam=float(np.imag(spec.H[0, 1])),
                gamma=phys[1].rate,
                n1=phys[1].occupation,
                nL=phys[L].occupation,
                Gamma=sc[0].rate if sc else 0.0)


### JSON ###

def network_from_dict(doc):
    '''
    parses the network document: {"chain": {...}} or {"general": {...}}

    Args:
        doc: decoded JSON object

    Returns:
        NetworkSpec

    '''
    if not isinstance(doc, dict):
        raise ConfigError("network document must be a JSON object")
    if "chain" in doc:
        c = doc["chain"]
        if not isinstance(c, dict):
            raise ConfigError("'chain' must be an object")
        try:
            spec = build_chain(L=c["L"], omega=float(c.get("omega", 1.0)), lam=float(c["lambda"]),
                               gamma=float(c["gamma"]), n1=float(c["n1"]), nL=float(c["nL"]),
                               Gamma=None if c.get("Gamma") is None else float(c["Gamma"]))
        except KeyError as e:
            raise ConfigError("chain document is missing %s" % e)
        except (TypeError, ValueError) as e:
            if isinstance(e, ModelError):
                raise
            raise ConfigError("bad chain value: %s" % e)
        return spec

    if "general" in doc:
        g = doc["general"]
        if not isinstance(g, dict):
            raise ConfigError("'general' must be an object")
        try:
            H = np.array(g["H_re"], dtype=float)
            if "H_im" in g:
                H = H + 1j * np.array(g["H_im"], dtype=float)
            raw_baths = g["baths"]
        except KeyError as e:
            raise ConfigError("general document is missing %s" % e)
        except (TypeError, ValueError) as e:
            raise ConfigError("bad matrix in general document: %s" % e)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ConfigError("H_re/H_im must be square (shape %s)" % (H.shape,))

        baths = []
        for entry in raw_baths:
            try:
                mode = int(entry["mode"])
                rate = float(entry["rate"])
                kind = entry.get("kind", PHYSICAL)
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError("bad bath entry %r: %s" % (entry, e))
            if kind not in KINDS:
                raise ConfigError("unknown bath kind %r" % kind)
            occupation = None
            if kind == PHYSICAL:
                if "occupation" in entry:
                    occupation = float(entry["occupation"])
                elif "temperature" in entry:
                    if not 1 <= mode <= H.shape[0]:
                        raise ModelError("bath references mode %d outside [1, %d]" % (mode, H.shape[0]))
                    occupation = occupation_from_temperature(float(np.real(H[mode - 1, mode - 1])),
                                                             float(entry["temperature"]))
                else:
                    raise ConfigError("physical bath on mode %d needs occupation or temperature" % mode)
            baths.append(BathAttachment(mode, rate, occupation, kind))
        return check_network(make_network(H, baths))

    raise ConfigError("network document needs a 'chain' or 'general' key")


def network_to_dict(spec):
    baths = []
    for b in spec.baths:
        entry = {"mode": b.mode, "rate": b.rate, "kind": b.kind}
        if b.occupation is not None:
            entry["occupation"] = b.occupation
        baths.append(entry)
    return {"general": {"H_re": np.real(spec.H).tolist(),
                        "H_im": np.imag(spec.H).tolist(),
                        "baths": baths}}


def load_network(path):
    doc = read_json(path)
    return network_from_dict(doc), doc.get("options", {}) if isinstance(doc, dict) else {}
