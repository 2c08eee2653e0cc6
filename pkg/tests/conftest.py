import numpy as np
import pytest

from qent.fock import FockBasis, StateVector


def random_state(basis: FockBasis, rng) -> StateVector:
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    return StateVector(basis, amps).normalized()


def random_parity_state(basis: FockBasis, rng, parity: int = 0) -> StateVector:
    """Random fermionic state restricted to one total-parity sector."""
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    codes = basis.codes()
    total = np.zeros(basis.dim, dtype=np.int64)
    for m in range(basis.n_modes):
        total += basis.digit(codes, m)
    amps[(total & 1) != parity] = 0.0
    return StateVector(basis, amps).normalized()


def correlation_entropies(vectors_lower: np.ndarray, sites, orders) -> dict:
    """Free-fermion oracle: region entropies of a Slater-determinant state
    from the eigenvalues of the restricted correlation matrix.

    Independent of the many-body partial-trace path (no Fock-space object
    is touched).  Returns per-species entropies; decoupled identical
    species just multiply them.
    """
    corr = vectors_lower @ vectors_lower.conj().T
    sub = corr[np.ix_(list(sites), list(sites))]
    nu = np.clip(np.linalg.eigvalsh(sub), 0.0, 1.0)
    out = {}
    for n in orders:
        if n == 1:
            terms = np.zeros_like(nu)
            for p in (nu, 1.0 - nu):
                mask = p > 1e-14
                terms[mask] += -p[mask] * np.log(p[mask])
            out[n] = float(np.sum(terms))
        else:
            out[n] = float(np.sum(np.log(nu**n + (1.0 - nu) ** n)) / (1.0 - n))
    return out


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
