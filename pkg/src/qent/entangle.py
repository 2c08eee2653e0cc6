"""Reduced density matrices of spatial regions and entropy functionals.

The partial trace works in the occupation basis: the full state is
rewritten with the region's modes leading (a relabelling that, for
fermions, carries the Jordan-Wigner resorting sign of every basis
string), reshaped into a (region x complement) amplitude matrix A, and
contracted as ``rho = A A^dagger``.  Entropies are reported in nats.

For fermionic states that superpose different total parities the
reduction is still performed in this fixed Jordan-Wigner convention; such
states are flagged in the report diagnostics because a
superselection-resolved reduction could differ.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionCapError, NumericalError
from .fock import DEFAULT_AMPLITUDE_CAP, FockBasis, StateVector, Statistics, parity_weights

EIGENVALUE_FLOOR = 1e-12
NEGATIVITY_TOL = 1e-10
TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-12
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class Region:
    """A set of lattice sites; the induced modes cover every species there."""

    sites: tuple[int, ...]
    n_sites: int
    n_species: int = 1

    def __post_init__(self):
        sites = tuple(sorted(set(int(s) for s in self.sites)))
        object.__setattr__(self, "sites", sites)
        if not sites:
            raise ConfigError("region must contain at least one site")
        if sites[0] < 0 or sites[-1] >= self.n_sites:
            raise ConfigError(f"region sites {sites} outside [0, {self.n_sites})")
        if len(sites) >= self.n_sites:
            raise ConfigError("region must be a proper subset of the lattice")

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(
            x * self.n_species + sigma for x in self.sites for sigma in range(self.n_species)
        )

    def complement(self) -> "Region":
        rest = tuple(x for x in range(self.n_sites) if x not in self.sites)
        return Region(rest, self.n_sites, self.n_species)


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace matrix over a region occupation basis.

    ``basis`` is None for abstract finite-dimensional systems (the
    quantum-mechanics reference states).
    """

    matrix: np.ndarray
    basis: FockBasis | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigError("density matrix must be square")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITICITY_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise NumericalError(f"density matrix not Hermitian (residual {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericalError(f"density matrix trace {tr} deviates from 1")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def region_factor_matrix(state: StateVector, region: Region, cap: int | None = None) -> np.ndarray:
    """Amplitude matrix A[r, c] of the state with region modes leading.

    r runs over the region occupation basis, c over the complement.  For
    fermions each amplitude carries the parity of the mode-resorting
    permutation restricted to its occupied modes.
    """
    basis = state.basis
    if region.n_sites * region.n_species != basis.n_modes:
        raise ConfigError("region does not match the state's mode layout")
    region_modes = list(region.modes)
    comp_modes = [m for m in range(basis.n_modes) if m not in set(region_modes)]
    ldim = basis.local_dim
    dim_r = ldim ** len(region_modes)
    dim_c = ldim ** len(comp_modes)
    cap = DEFAULT_AMPLITUDE_CAP if cap is None else cap
    if dim_r > cap or dim_r * dim_c > cap:
        raise DimensionCapError(
            f"region factor of shape ({dim_r}, {dim_c}) exceeds cap {cap}"
        )

    codes = basis.codes()
    digits = {m: basis.digit(codes, m) for m in range(basis.n_modes)}
    r_idx = np.zeros(codes.shape, dtype=np.int64)
    for j, m in enumerate(region_modes):
        r_idx += digits[m] * ldim ** (len(region_modes) - 1 - j)
    c_idx = np.zeros(codes.shape, dtype=np.int64)
    for j, m in enumerate(comp_modes):
        c_idx += digits[m] * ldim ** (len(comp_modes) - 1 - j)

    amps = state.amplitudes
    if basis.statistics is Statistics.FERMI:
        # pairs (complement mode m) < (region mode m') are the inversions
        # introduced by pulling the region modes to the front
        par = np.zeros(codes.shape, dtype=np.int64)
        for m in comp_modes:
            for mp in region_modes:
                if m < mp:
                    par ^= digits[m] & digits[mp]
        amps = amps * (1.0 - 2.0 * par)

    a = np.zeros((dim_r, dim_c), dtype=np.complex128)
    a[r_idx, c_idx] = amps
    return a


def reduced_density_matrix(
    state: StateVector, region: Region, cap: int | None = None
) -> DensityMatrix:
    """rho_region = Tr_complement |state><state| in the occupation basis."""
    if abs(state.norm - 1.0) > NORMALIZATION_TOL:
        raise ConfigError(f"state must be normalized (norm {state.norm:.6g})")
    a = region_factor_matrix(state, region, cap=cap)
    rho = a @ a.conj().T
    region_basis = FockBasis(
        state.basis.statistics,
        len(region.modes),
        state.basis.boson_cutoff,
        cap=DEFAULT_AMPLITUDE_CAP if cap is None else cap,
    )
    return DensityMatrix(matrix=rho, basis=region_basis)


def spectrum(rho: DensityMatrix) -> np.ndarray:
    """Eigenvalues of a density matrix, descending, clipped at zero."""
    try:
        eigs = np.linalg.eigvalsh(rho.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigensolver failed on the density matrix") from exc
    if eigs.min() < -NEGATIVITY_TOL:
        raise NumericalError(
            f"density-matrix eigenvalue {eigs.min():.3e} below -{NEGATIVITY_TOL}"
        )
    return np.clip(eigs, 0.0, None)[::-1]


def entanglement_spectrum(eigenvalues: np.ndarray) -> np.ndarray:
    """-log of the eigenvalues above the floor, ascending."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > EIGENVALUE_FLOOR]
    return np.sort(-np.log(lam))


def renyi_trace(eigenvalues: np.ndarray, order: float) -> float:
    """R_n = sum lambda^n (the replica-trace target quantity)."""
    if order <= 0:
        raise ConfigError(f"Renyi order must be positive, got {order}")
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    return float(np.sum(lam**order))


def von_neumann_entropy(eigenvalues: np.ndarray) -> float:
    """-sum lambda log lambda in nats, with 0 log 0 = 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > EIGENVALUE_FLOOR]
    if lam.size == 0:
        raise NumericalError("all eigenvalues below the floor")
    return float(-np.sum(lam * np.log(lam)))


def renyi_entropy(eigenvalues: np.ndarray, order: float) -> float:
    """S_n = log(sum lambda^n) / (1 - n) in nats; n = 1 is von Neumann."""
    if order <= 0:
        raise ConfigError(f"Renyi order must be positive, got {order}")
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0 or float(np.max(lam)) <= EIGENVALUE_FLOOR:
        raise NumericalError("all eigenvalues below the floor")
    if order == 1:
        return von_neumann_entropy(lam)
    return float(np.log(renyi_trace(lam, order)) / (1.0 - order))


@dataclass
class EntropyReport:
    """Entropies of a region for a state and its vacuum, plus the difference."""

    region_sites: tuple[int, ...]
    orders: tuple[float, ...]
    state_entropy: dict[float, float]
    vacuum_entropy: dict[float, float]
    subtracted: dict[float, float]
    state_renyi_trace: dict[float, float]
    vacuum_renyi_trace: dict[float, float]
    state_eigenvalues: np.ndarray
    vacuum_eigenvalues: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def state_entanglement_spectrum(self) -> np.ndarray:
        return entanglement_spectrum(self.state_eigenvalues)

    @property
    def vacuum_entanglement_spectrum(self) -> np.ndarray:
        return entanglement_spectrum(self.vacuum_eigenvalues)

    def to_dict(self) -> dict:
        key = lambda n: str(int(n)) if float(n).is_integer() else str(n)
        return {
            "region_sites": list(self.region_sites),
            "orders": [float(n) for n in self.orders],
            "entropy_nats": {
                "state": {key(n): self.state_entropy[n] for n in self.orders},
                "vacuum": {key(n): self.vacuum_entropy[n] for n in self.orders},
                "subtracted": {key(n): self.subtracted[n] for n in self.orders},
            },
            "renyi_trace": {
                "state": {key(n): self.state_renyi_trace[n] for n in self.orders if n != 1},
                "vacuum": {key(n): self.vacuum_renyi_trace[n] for n in self.orders if n != 1},
            },
            "entanglement_spectrum": {
                "state": [float(v) for v in self.state_entanglement_spectrum],
                "vacuum": [float(v) for v in self.vacuum_entanglement_spectrum],
            },
            "diagnostics": dict(self.diagnostics),
        }


def vacuum_subtracted_report(
    state: StateVector,
    vacuum: StateVector,
    region: Region,
    orders: tuple[float, ...] = (1, 2, 3),
    cap: int | None = None,
) -> EntropyReport:
    """Region entropies of the state and the vacuum, vacuum-subtracted.

    Von Neumann (order 1) is always included.
    """
    if not state.basis.compatible(vacuum.basis):
        raise ConfigError("state and vacuum must live on the same basis")
    wanted = sorted(set(float(n) for n in orders) | {1.0})
    rho_state = reduced_density_matrix(state, region, cap=cap)
    rho_vac = reduced_density_matrix(vacuum, region, cap=cap)
    lam_state = spectrum(rho_state)
    lam_vac = spectrum(rho_vac)

    s_state, s_vac, s_sub, r_state, r_vac = {}, {}, {}, {}, {}
    for n in wanted:
        s_state[n] = renyi_entropy(lam_state, n)
        s_vac[n] = renyi_entropy(lam_vac, n)
        s_sub[n] = s_state[n] - s_vac[n]
        if n != 1:
            r_state[n] = renyi_trace(lam_state, n)
            r_vac[n] = renyi_trace(lam_vac, n)

    diagnostics = {
        "state_leakage": state.leakage,
        "vacuum_leakage": vacuum.leakage,
    }
    if state.basis.statistics is Statistics.FERMI:
        even, odd = parity_weights(state)
        diagnostics["fermion_parity_mixed"] = bool(
            min(even, odd) > 1e-12 * max(even, odd, 1.0)
        )
    return EntropyReport(
        region_sites=region.sites,
        orders=tuple(wanted),
        state_entropy=s_state,
        vacuum_entropy=s_vac,
        subtracted=s_sub,
        state_renyi_trace=r_state,
        vacuum_renyi_trace=r_vac,
        state_eigenvalues=lam_state,
        vacuum_eigenvalues=lam_vac,
        diagnostics=diagnostics,
    )
