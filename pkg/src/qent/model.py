"""Gapped free chains: single-particle structure and many-body vacuums.

Three vacuum regimes are supported:

* ``empty``: all single-particle energies positive, vacuum is the
  zero-occupation state.  Works for either statistics with the hopping
  Hamiltonian ``h = m*I - t*(nearest-neighbour)``.
* ``half_filled``: staggered-mass fermion chain; the lower band is filled
  mode by mode, giving a genuinely entangled band-insulator vacuum.
* ``boson_ground``: coupled-oscillator chain written in site ladder
  operators (pair-creation terms included), ground state obtained with an
  iterative sparse eigensolver on the truncated basis.  The normal-mode
  gap is ``m`` for any coupling, so the only gap condition is ``m > 0``.

Species are decoupled copies of the same chain; they share one
single-particle eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, NumericalError
from .fock import (
    DEFAULT_AMPLITUDE_CAP,
    FockBasis,
    StateVector,
    Statistics,
    apply_mode_sum,
    basis_state,
    vacuum_state,
)

GAP_MIN = 1e-9
HERMITICITY_TOL = 1e-12


class VacuumRegime(str, Enum):
    EMPTY = "empty"
    HALF_FILLED = "half_filled"
    BOSON_GROUND = "boson_ground"


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeModel:
    """Parameters of a free chain with ``species`` decoupled internal copies."""

    statistics: Statistics
    sites: int
    species: int = 2
    hopping: float = 1.0
    mass: float = 1.0
    regime: VacuumRegime = VacuumRegime.EMPTY
    staggered: bool = False
    boson_cutoff: int | None = None
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        object.__setattr__(self, "regime", VacuumRegime(self.regime))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.sites < 2:
            raise ConfigError("need at least 2 sites")
        if self.species < 1:
            raise ConfigError("need at least 1 species")
        if self.regime is VacuumRegime.HALF_FILLED:
            if self.statistics is not Statistics.FERMI:
                raise ConfigError("half_filled regime requires fermions")
            if not self.staggered:
                raise ConfigError("half_filled regime requires the staggered flag")
        if self.staggered and self.boundary is Boundary.PERIODIC and self.sites % 2:
            raise ConfigError("staggered mass on a periodic chain needs an even site count")
        if self.regime is VacuumRegime.BOSON_GROUND:
            if self.statistics is not Statistics.BOSE:
                raise ConfigError("boson_ground regime requires bosons")
            if self.mass <= 0:
                raise ConfigError(f"boson_ground regime requires mass > 0, got {self.mass}")
        if self.statistics is Statistics.BOSE and (self.boson_cutoff or 0) < 1:
            raise ConfigError("bosonic models require boson_cutoff >= 1")

    @property
    def n_modes(self) -> int:
        return self.sites * self.species

    def mode_index(self, site: int, species: int = 0) -> int:
        if not 0 <= site < self.sites:
            raise ConfigError(f"site {site} outside [0, {self.sites})")
        if not 0 <= species < self.species:
            raise ConfigError(f"species {species} outside [0, {self.species})")
        return site * self.species + species


@dataclass(frozen=True)
class SingleParticleModes:
    """Orthonormal eigenmodes of the per-species single-particle problem.

    ``vectors[:, k]`` is the k-th eigenvector; energies are ascending.
    ``band[k]`` is "lower"/"upper" (sign of the energy) in the staggered
    regime and "upper" everywhere else.
    """

    energies: np.ndarray
    vectors: np.ndarray
    band: tuple[str, ...]

    def band_projector(self, which: str) -> np.ndarray:
        cols = [k for k, b in enumerate(self.band) if b == which]
        if not cols:
            raise ConfigError(f"no {which}-band modes in this model")
        v = self.vectors[:, cols]
        return v @ v.conj().T

    def band_indices(self, which: str) -> list[int]:
        return [k for k, b in enumerate(self.band) if b == which]


def _hopping_matrix(sites: int, boundary: Boundary) -> np.ndarray:
    a = np.zeros((sites, sites))
    for x in range(sites - 1):
        a[x, x + 1] = a[x + 1, x] = 1.0
    if boundary is Boundary.PERIODIC and sites > 2:
        a[0, sites - 1] = a[sites - 1, 0] = 1.0
    return a


def _laplacian(sites: int, boundary: Boundary) -> np.ndarray:
    a = _hopping_matrix(sites, boundary)
    return np.diag(a.sum(axis=1)) - a


def single_particle_hamiltonian(model: LatticeModel) -> np.ndarray:
    """Per-species quadratic-form matrix defining the mode structure.

    empty / half_filled: the hopping Hamiltonian (with uniform or
    staggered on-site term).  boson_ground: the dynamical matrix
    ``m^2*I + t*L`` whose square-rooted eigenvalues are the normal-mode
    frequencies.  Raises ConfigError when the gap condition fails.
    """
    n, t, m = model.sites, model.hopping, model.mass
    if model.regime is VacuumRegime.BOSON_GROUND:
        if model.hopping < 0:
            raise ConfigError("boson_ground coupling must be non-negative")
        h = m * m * np.eye(n) + t * _laplacian(n, model.boundary)
    else:
        onsite = np.full(n, float(m))
        if model.staggered:
            onsite = m * np.array([1.0 if x % 2 == 0 else -1.0 for x in range(n)])
        h = np.diag(onsite) - t * _hopping_matrix(n, model.boundary)
    _check_gap(model, h)
    return h


def _gap_from_spectrum(model: LatticeModel, eigenvalues: np.ndarray) -> float:
    if model.regime is VacuumRegime.BOSON_GROUND:
        if np.min(eigenvalues) < 0:
            return -1.0
        return float(np.sqrt(np.min(eigenvalues)))
    if model.regime is VacuumRegime.HALF_FILLED:
        upper = eigenvalues[eigenvalues > 0]
        lower = eigenvalues[eigenvalues < 0]
        if upper.size == 0 or lower.size == 0 or np.any(np.abs(eigenvalues) <= GAP_MIN):
            return -1.0
        return float(np.min(upper) - np.max(lower))
    return float(np.min(eigenvalues))


def _check_gap(model: LatticeModel, h: np.ndarray) -> float:
    gap = _gap_from_spectrum(model, np.linalg.eigvalsh(h))
    if gap <= GAP_MIN:
        raise ConfigError(
            f"gap condition violated for regime {model.regime.value}: "
            f"mass={model.mass}, hopping={model.hopping}, "
            f"sites={model.sites}, boundary={model.boundary.value} give gap {gap:.3e}"
        )
    return gap


def spectral_gap(model: LatticeModel) -> float:
    """Excitation gap of the chosen regime, in energy units."""
    n, t, m = model.sites, model.hopping, model.mass
    if model.regime is VacuumRegime.BOSON_GROUND:
        h = m * m * np.eye(n) + t * _laplacian(n, model.boundary)
    else:
        onsite = np.full(n, float(m))
        if model.staggered:
            onsite = m * np.array([1.0 if x % 2 == 0 else -1.0 for x in range(n)])
        h = np.diag(onsite) - t * _hopping_matrix(n, model.boundary)
    return _check_gap(model, h)


def diagonalize_modes(h: np.ndarray, frequencies: bool = False) -> SingleParticleModes:
    """Orthonormal eigenbasis of a Hermitian matrix, deterministically ordered.

    Within a degenerate eigenvalue group the basis is canonicalized by
    Gram-Schmidt over projected coordinate vectors, so e.g. the identity
    matrix returns the site basis.  ``frequencies`` takes the square root
    of the eigenvalues (dynamical-matrix input).
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ConfigError("expected a square matrix")
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL * max(1.0, np.max(np.abs(h))):
        raise ConfigError("matrix is not Hermitian")
    energies, vectors = np.linalg.eigh(h)
    vectors = _canonicalize_degenerate(energies, vectors)
    if frequencies:
        if np.min(energies) < 0:
            raise NumericalError("dynamical matrix is not positive semi-definite")
        energies = np.sqrt(energies)
    band = tuple("lower" if e < 0 else "upper" for e in energies)
    return SingleParticleModes(energies=energies, vectors=vectors, band=band)


def _canonicalize_degenerate(energies: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    n = len(energies)
    scale = max(1.0, float(np.max(np.abs(energies))))
    out = vectors.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(energies[stop] - energies[start]) <= 1e-10 * scale:
            stop += 1
        block = out[:, start:stop]
        if stop - start > 1:
            proj = block @ block.conj().T
            cols = []
            for e in np.eye(n):
                v = proj @ e
                for c in cols:
                    v = v - c * np.vdot(c, v)
                nv = np.linalg.norm(v)
                if nv > 1e-8:
                    cols.append(v / nv)
                if len(cols) == stop - start:
                    break
            block = np.column_stack(cols)
        # fix the phase: first significant entry real positive
        for j in range(block.shape[1]):
            col = block[:, j]
            k = int(np.argmax(np.abs(col) > 1e-8))
            phase = col[k] / abs(col[k])
            block[:, j] = col / phase
        out[:, start:stop] = block
        start = stop
    return out


def modes_for(model: LatticeModel) -> SingleParticleModes:
    """Single-particle modes of the model (frequencies for boson_ground)."""
    h = single_particle_hamiltonian(model)
    return diagonalize_modes(h, frequencies=model.regime is VacuumRegime.BOSON_GROUND)


def basis_for(model: LatticeModel, cap: int = DEFAULT_AMPLITUDE_CAP) -> FockBasis:
    return FockBasis(model.statistics, model.n_modes, model.boson_cutoff, cap=cap)


def _sparse_ladder(basis: FockBasis, mode: int, create: bool) -> sp.csr_matrix:
    codes = basis.codes()
    if basis.statistics is Statistics.FERMI:
        shift = basis.n_modes - 1 - mode
        bit = (codes >> shift) & 1
        src = np.nonzero(bit == (0 if create else 1))[0]
        dst = codes[src] + (1 << shift) * (1 if create else -1)
        par = np.zeros(src.shape, dtype=np.int64)
        for m2 in range(mode):
            par ^= (codes[src] >> (basis.n_modes - 1 - m2)) & 1
        val = (1.0 - 2.0 * par).astype(np.complex128)
    else:
        place = basis.place(mode)
        occ = basis.digit(codes, mode)
        if create:
            src = np.nonzero(occ < basis.boson_cutoff)[0]
            dst = codes[src] + place
            val = np.sqrt(occ[src] + 1.0).astype(np.complex128)
        else:
            src = np.nonzero(occ > 0)[0]
            dst = codes[src] - place
            val = np.sqrt(occ[src].astype(float)).astype(np.complex128)
    return sp.csr_matrix(
        (val, (basis.positions_of(dst), src)), shape=(basis.dim, basis.dim)
    )


def many_body_hamiltonian(model: LatticeModel, basis: FockBasis) -> sp.csr_matrix:
    """Sparse second-quantized Hamiltonian on the given (unrestricted) basis."""
    if basis.sector is not None:
        raise ConfigError("many-body Hamiltonian needs an unrestricted basis")
    if basis.n_modes != model.n_modes:
        raise ConfigError("basis does not match the model mode count")
    dim = basis.dim
    ham = sp.csr_matrix((dim, dim), dtype=np.complex128)
    if model.regime is VacuumRegime.BOSON_GROUND:
        m, t = model.mass, model.hopping
        lap = _laplacian(model.sites, model.boundary)
        for sigma in range(model.species):
            qs = {}
            for x in range(model.sites):
                mode = model.mode_index(x, sigma)
                a = _sparse_ladder(basis, mode, create=False)
                ad = _sparse_ladder(basis, mode, create=True)
                ham = ham + m * (ad @ a + 0.5 * sp.identity(dim, format="csr"))
                qs[x] = (a + ad) / np.sqrt(2.0 * m)
            for x in range(model.sites):
                for y in range(model.sites):
                    if lap[x, y] != 0.0:
                        ham = ham + 0.5 * t * lap[x, y] * (qs[x] @ qs[y])
    else:
        h = single_particle_hamiltonian(model)
        for sigma in range(model.species):
            ops = {
                x: (
                    _sparse_ladder(basis, model.mode_index(x, sigma), create=True),
                    _sparse_ladder(basis, model.mode_index(x, sigma), create=False),
                )
                for x in range(model.sites)
            }
            for x in range(model.sites):
                for y in range(model.sites):
                    if h[x, y] != 0.0:
                        ham = ham + h[x, y] * (ops[x][0] @ ops[y][1])
    return ham.tocsr()


def build_vacuum(
    model: LatticeModel,
    modes: SingleParticleModes,
    basis: FockBasis,
    max_iterations: int = 5000,
) -> StateVector:
    """Many-body vacuum for the model's regime on the given basis."""
    if basis.n_modes != model.n_modes:
        raise ConfigError("basis does not match the model mode count")
    if model.regime is VacuumRegime.EMPTY:
        return vacuum_state(basis)

    if model.regime is VacuumRegime.HALF_FILLED:
        # the filled sea is the ascending operator string
        # prod_{species} prod_{k in lower} b+_{k,species}; applying
        # rightmost-first keeps that string order (and its sign) exact
        state = vacuum_state(basis)
        lower = modes.band_indices("lower")
        for sigma in reversed(range(model.species)):
            for k in reversed(lower):
                coeffs = [
                    (model.mode_index(x, sigma), complex(modes.vectors[x, k]))
                    for x in range(model.sites)
                ]
                state = apply_mode_sum(state, coeffs, create=True)
        return state.normalized()

    # boson_ground: iterative ground state of the truncated chain
    ham = many_body_hamiltonian(model, basis)
    if basis.dim <= 4:
        evals, evecs = np.linalg.eigh(ham.toarray())
        energy, vec = evals[0], evecs[:, 0]
    else:
        try:
            evals, evecs = spla.eigsh(ham, k=1, which="SA", maxiter=max_iterations)
        except spla.ArpackNoConvergence as exc:
            raise NumericalError(
                f"ground-state solver did not converge within {max_iterations} iterations"
            ) from exc
        energy, vec = evals[0], evecs[:, 0]
    residual = np.linalg.norm(ham @ vec - energy * vec)
    if residual > 1e-10:
        raise NumericalError(f"ground-state residual {residual:.3e} above 1e-10")
    # deterministic phase: largest-magnitude amplitude real positive
    k = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[k]) / vec[k])
    return StateVector(basis, vec).normalized()
