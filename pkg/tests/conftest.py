import json

import numpy as np
import pytest

from wignerness.gaussian import reduced_state
from wignerness.network import PHYSICAL, BathAttachment, build_chain, make_network


def random_state(rng, L, squeezed=True, displaced=True):
    '''
    random ReducedState with theta >= 0.2 I: C = X X^dag, S symmetric with spectral norm 0.3
    '''
    X = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    C = 0.3 * X @ X.conj().T
    S = np.zeros((L, L), dtype=complex)
    if squeezed:
        Y = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
        Y = Y + Y.T
        S = 0.3 * Y / np.linalg.norm(Y, 2)
    mu = rng.normal(size=L) + 1j * rng.normal(size=L) if displaced else None
    return reduced_state(C, S, mu)


def random_network(rng, L, coupling=0.3):
    '''
    random Hermitian H with one physical bath on every mode
    '''
    Z = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    H = coupling * (Z + Z.conj().T) / 2
    np.fill_diagonal(H, rng.uniform(0.5, 1.5, size=L))
    baths = [BathAttachment(k + 1, float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.0, 3.0)), PHYSICAL)
             for k in range(L)]
    return make_network(H, baths)


def write_config(path, doc):
    with open(str(path), "w") as f:
        json.dump(doc, f)
    return str(path)


@pytest.fixture
def rng():
    return np.random.default_rng(20190101)


@pytest.fixture
def two_site_chain():
    ### gamma = lambda, n1 = 1, nL = 2: C = [[1.4, 0.2], [0.2, 1.6]]
    return build_chain(2, omega=1.0, lam=0.1, gamma=0.1, n1=1.0, nL=2.0)
