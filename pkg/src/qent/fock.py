"""Occupation-number bases and ladder-operator actions for both statistics.

Conventions (fixed, documented, used everywhere downstream):

* Modes are labelled ``0 .. M-1``.  On a lattice with ``s`` species the
  linear mode index is ``site * s + species`` (site-major).
* Basis states are occupation tuples ``(n_0, ..., n_{M-1})`` enumerated in
  lexicographic order with mode 0 as the most significant digit.  Each
  tuple is packed into an integer "code" in base ``local_dim``; for
  fermions the code is the bitstring with mode 0 at the highest bit.
  Lexicographic tuple order coincides with ascending code order.
* Fermionic signs follow the Jordan-Wigner convention for ascending-mode
  strings: ``c?_m |b> = (-1)^(sum_{k<m} b_k) |b + e_m>``.  Building a basis
  state by applying creations in ascending mode order yields amplitude +1.
* Bosonic modes are truncated at ``boson_cutoff`` quanta.  Creation
  amplitudes that would exceed the cutoff are dropped and their squared
  norm is accumulated in the state's ``leakage`` diagnostic (strict mode
  raises instead).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, CutoffError, DimensionCapError

DEFAULT_AMPLITUDE_CAP = 1 << 26


class Statistics(str, Enum):
    FERMI = "fermi"
    BOSE = "bose"


@dataclass(frozen=True, order=True)
class ModeLabel:
    """A lattice mode: site position plus internal species index.

    The canonical linear ordering is site-major then species, i.e.
    ``linear_index = site * n_species + species``.
    """

    site: int
    species: int = 0
    band: str | None = None

    def linear_index(self, n_species: int) -> int:
        if not 0 <= self.species < n_species:
            raise ConfigError(f"species {self.species} outside [0, {n_species})")
        return self.site * n_species + self.species


@dataclass(frozen=True)
class FockBasis:
    """Deterministic enumeration of an occupation-number basis.

    ``sector`` restricts the enumeration to states with that total
    particle number.  Dimensions beyond ``cap`` raise DimensionCapError.
    """

    statistics: Statistics
    n_modes: int
    boson_cutoff: int | None = None
    sector: int | None = None
    cap: int = DEFAULT_AMPLITUDE_CAP

    dim: int = field(init=False, repr=True, compare=False)
    local_dim: int = field(init=False, repr=False, compare=False)
    # Sorted codes of the kept basis states; None when unrestricted, in
    # which case code == position.
    _codes: np.ndarray | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigError("n_modes must be >= 1")
        stats = Statistics(self.statistics)
        object.__setattr__(self, "statistics", stats)
        if stats is Statistics.BOSE:
            if self.boson_cutoff is None or self.boson_cutoff < 1:
                raise ConfigError("bosonic basis requires boson_cutoff >= 1")
            local_dim = self.boson_cutoff + 1
        else:
            if self.boson_cutoff not in (None, 1):
                raise ConfigError("boson_cutoff is meaningless for fermions")
            object.__setattr__(self, "boson_cutoff", None)
            local_dim = 2
        object.__setattr__(self, "local_dim", local_dim)

        if self.sector is not None:
            max_total = (local_dim - 1) * self.n_modes
            if not 0 <= self.sector <= max_total:
                raise ConfigError(
                    f"sector {self.sector} invalid for {self.n_modes} modes "
                    f"with local occupations <= {local_dim - 1}"
                )
            dim = _sector_dimension(self.n_modes, local_dim, self.sector)
        else:
            dim = local_dim**self.n_modes
        if dim > self.cap:
            raise DimensionCapError(
                f"basis dimension {dim} exceeds cap {self.cap} "
                f"(set a larger cap explicitly if intended)"
            )
        object.__setattr__(self, "dim", dim)

        codes = None
        if self.sector is not None:
            codes = _sector_codes(self.n_modes, local_dim, self.sector)
            assert codes.size == dim
        object.__setattr__(self, "_codes", codes)

    # -- code arithmetic ------------------------------------------------

    def place(self, mode: int) -> int:
        """Positional value of ``mode`` inside a packed code."""
        if not 0 <= mode < self.n_modes:
            raise ConfigError(f"mode {mode} outside [0, {self.n_modes})")
        return self.local_dim ** (self.n_modes - 1 - mode)

    def codes(self) -> np.ndarray:
        """Packed codes of all basis states in enumeration order."""
        if self._codes is not None:
            return self._codes
        return np.arange(self.dim, dtype=np.int64)

    def positions_of(self, codes: np.ndarray) -> np.ndarray:
        """Map packed codes back to basis positions (codes must belong)."""
        if self._codes is None:
            return codes
        pos = np.searchsorted(self._codes, codes)
        return pos

    def digit(self, codes: np.ndarray, mode: int) -> np.ndarray:
        """Occupation of ``mode`` for each packed code."""
        if self.statistics is Statistics.FERMI:
            return (codes >> (self.n_modes - 1 - mode)) & 1
        return (codes // self.place(mode)) % self.local_dim

    def occupations(self, position: int) -> tuple[int, ...]:
        code = int(self.codes()[position])
        occ = []
        for m in range(self.n_modes):
            occ.append(int((code // self.place(m)) % self.local_dim))
        return tuple(occ)

    def index_of(self, occupations: Sequence[int]) -> int:
        """Basis position of an explicit occupation tuple."""
        if len(occupations) != self.n_modes:
            raise ConfigError("occupation tuple length mismatch")
        code = 0
        for m, n in enumerate(occupations):
            if not 0 <= n < self.local_dim:
                raise ConfigError(f"occupation {n} outside [0, {self.local_dim})")
            code += n * self.place(m)
        if self.sector is not None:
            if sum(occupations) != self.sector:
                raise ConfigError("occupation tuple outside the sector filter")
            return int(np.searchsorted(self._codes, code))
        return code

    def with_sector(self, sector: int | None) -> "FockBasis":
        return replace(self, sector=sector)

    def compatible(self, other: "FockBasis") -> bool:
        return (
            self.statistics == other.statistics
            and self.n_modes == other.n_modes
            and self.boson_cutoff == other.boson_cutoff
            and self.sector == other.sector
        )


def enumerate_basis(
    statistics: Statistics | str,
    n_modes: int,
    boson_cutoff: int | None = None,
    sector: int | None = None,
    cap: int = DEFAULT_AMPLITUDE_CAP,
) -> FockBasis:
    """Build a FockBasis; thin functional front over the dataclass."""
    return FockBasis(Statistics(statistics), n_modes, boson_cutoff, sector, cap)


def _sector_dimension(n_modes: int, local_dim: int, total: int) -> int:
    if local_dim == 2:
        return math.comb(n_modes, total)
    # bounded compositions of `total` into n_modes parts, each < local_dim
    counts = [1] + [0] * total
    for _ in range(n_modes):
        new = [0] * (total + 1)
        for t in range(total + 1):
            if counts[t]:
                for n in range(min(local_dim - 1, total - t) + 1):
                    new[t + n] += counts[t]
        counts = new
    return counts[total]


def _sector_codes(n_modes: int, local_dim: int, total: int) -> np.ndarray:
    out: list[int] = []

    def rec(mode: int, left: int, code: int):
        if mode == n_modes:
            if left == 0:
                out.append(code)
            return
        remaining_max = (local_dim - 1) * (n_modes - mode - 1)
        for n in range(min(local_dim - 1, left), -1, -1):
            if left - n <= remaining_max:
                rec(mode + 1, left - n, code + n * local_dim ** (n_modes - 1 - mode))

    rec(0, total, 0)
    return np.sort(np.asarray(out, dtype=np.int64))


class StateVector:
    """Complex amplitude vector over a FockBasis.

    Instances are treated as immutable; every operation returns a new
    vector.  ``leakage`` carries the squared norm dropped at the bosonic
    occupation cutoff while the vector was being built (0.0 for fermions).
    """

    __slots__ = ("basis", "amplitudes", "leakage", "_norm")

    def __init__(self, basis: FockBasis, amplitudes: np.ndarray, leakage: float = 0.0):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.shape != (basis.dim,):
            raise ConfigError(
                f"amplitude vector of shape {amps.shape} does not match basis dim {basis.dim}"
            )
        self.basis = basis
        self.amplitudes = amps
        self.leakage = float(leakage)
        self._norm = None

    @property
    def norm(self) -> float:
        if self._norm is None:
            self._norm = float(np.linalg.norm(self.amplitudes))
        return self._norm

    def normalized(self) -> "StateVector":
        n = self.norm
        if n < 1e-300:
            raise ConfigError("cannot normalize a zero state")
        return StateVector(self.basis, self.amplitudes / n, self.leakage)

    def __repr__(self):
        return f"StateVector(dim={self.basis.dim}, norm={self.norm:.6g}, leakage={self.leakage:.3g})"


def zero_state(basis: FockBasis) -> StateVector:
    return StateVector(basis, np.zeros(basis.dim, dtype=np.complex128))


def basis_state(basis: FockBasis, occupations: Sequence[int]) -> StateVector:
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[basis.index_of(occupations)] = 1.0
    return StateVector(basis, amps)


def vacuum_state(basis: FockBasis) -> StateVector:
    """The zero-occupation basis state."""
    return basis_state(basis, (0,) * basis.n_modes)


def inner(u: StateVector, v: StateVector) -> complex:
    """Hermitian inner product <u|v> (antilinear in the first slot)."""
    if not u.basis.compatible(v.basis):
        raise ConfigError("inner product requires states on the same basis")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def _fermi_parity_below(codes: np.ndarray, n_modes: int, mode: int) -> np.ndarray:
    """Parity of the occupations of modes strictly below ``mode``."""
    par = np.zeros(codes.shape, dtype=np.int64)
    for m in range(mode):
        par ^= (codes >> (n_modes - 1 - m)) & 1
    return par


def apply_creation(state: StateVector, mode: int, strict: bool = False) -> StateVector:
    """Apply the creation operator of ``mode``.

    Fermi: Jordan-Wigner signed bit flip, zero on occupied modes.
    Bose: ladder factor sqrt(n+1); cutoff overflow is dropped into the
    leakage diagnostic unless ``strict`` is set.
    """
    basis = state.basis
    if not 0 <= mode < basis.n_modes:
        raise ConfigError(f"mode {mode} outside [0, {basis.n_modes})")
    codes = basis.codes()
    amps = state.amplitudes
    target_basis = basis if basis.sector is None else basis.with_sector(basis.sector + 1)
    out = np.zeros(target_basis.dim, dtype=np.complex128)
    leakage = state.leakage

    if basis.statistics is Statistics.FERMI:
        shift = basis.n_modes - 1 - mode
        empty = ((codes >> shift) & 1) == 0
        src = np.nonzero(empty)[0]
        new_codes = codes[src] + (1 << shift)
        sign = 1.0 - 2.0 * _fermi_parity_below(codes[src], basis.n_modes, mode)
        out[target_basis.positions_of(new_codes)] = sign * amps[src]
    else:
        place = basis.place(mode)
        occ = basis.digit(codes, mode)
        below = occ < basis.boson_cutoff
        src = np.nonzero(below)[0]
        new_codes = codes[src] + place
        out[target_basis.positions_of(new_codes)] = np.sqrt(occ[src] + 1.0) * amps[src]
        over = ~below
        if np.any(over):
            dropped = float(np.sum((occ[over] + 1.0) * np.abs(amps[over]) ** 2))
            if dropped > 0.0:
                if strict:
                    raise CutoffError(
                        f"creation on mode {mode} exceeds boson cutoff "
                        f"{basis.boson_cutoff} (dropped squared norm {dropped:.3e})"
                    )
                leakage += dropped
    return StateVector(target_basis, out, leakage)


def apply_annihilation(state: StateVector, mode: int) -> StateVector:
    """Apply the annihilation operator of ``mode`` (exact adjoint of creation)."""
    basis = state.basis
    if not 0 <= mode < basis.n_modes:
        raise ConfigError(f"mode {mode} outside [0, {basis.n_modes})")
    codes = basis.codes()
    amps = state.amplitudes
    target_basis = basis if basis.sector is None else basis.with_sector(basis.sector - 1)
    out = np.zeros(target_basis.dim, dtype=np.complex128)

    if basis.statistics is Statistics.FERMI:
        shift = basis.n_modes - 1 - mode
        filled = ((codes >> shift) & 1) == 1
        src = np.nonzero(filled)[0]
        new_codes = codes[src] - (1 << shift)
        sign = 1.0 - 2.0 * _fermi_parity_below(codes[src], basis.n_modes, mode)
        out[target_basis.positions_of(new_codes)] = sign * amps[src]
    else:
        place = basis.place(mode)
        occ = basis.digit(codes, mode)
        src = np.nonzero(occ > 0)[0]
        new_codes = codes[src] - place
        out[target_basis.positions_of(new_codes)] = np.sqrt(occ[src].astype(float)) * amps[src]
    return StateVector(target_basis, out, state.leakage)


def apply_mode_sum(
    state: StateVector,
    coefficients: Sequence[tuple[int, complex]],
    create: bool = True,
    strict: bool = False,
) -> StateVector:
    """Apply ``sum_m coeff_m * op_m`` for op in {creation, annihilation}.

    Per-term cutoff leakage is accumulated additively; interference between
    dropped components of different terms is not resolved, so the value is
    a diagnostic, not an exact norm deficit.
    """
    acc = None
    leakage = state.leakage
    base = StateVector(state.basis, state.amplitudes, 0.0)
    for mode, coeff in coefficients:
        if coeff == 0:
            continue
        term = (
            apply_creation(base, mode, strict=strict)
            if create
            else apply_annihilation(base, mode)
        )
        leakage += abs(coeff) ** 2 * term.leakage
        if acc is None:
            acc = coeff * term.amplitudes
            target_basis = term.basis
        else:
            acc += coeff * term.amplitudes
    if acc is None:
        raise ConfigError("mode sum with no nonzero coefficients")
    return StateVector(target_basis, acc, leakage)


def dense_operator(basis: FockBasis, mode: int, create: bool = True) -> np.ndarray:
    """Dense matrix realization of one ladder operator (unrestricted bases)."""
    if basis.sector is not None:
        raise ConfigError("dense operators are only defined on unrestricted bases")
    op = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    eye = np.eye(basis.dim, dtype=np.complex128)
    for col in range(basis.dim):
        vec = StateVector(basis, eye[:, col])
        res = apply_creation(vec, mode) if create else apply_annihilation(vec, mode)
        op[:, col] = res.amplitudes
    return op


def reorder_modes(state: StateVector, new_order: Sequence[int]) -> StateVector:
    """Relabel modes so new position ``p`` carries old mode ``new_order[p]``.

    Fermionic amplitudes pick up the parity of the inversions among
    occupied modes, exactly as if the creation string were resorted.
    """
    basis = state.basis
    if sorted(new_order) != list(range(basis.n_modes)):
        raise ConfigError("new_order must be a permutation of all modes")
    codes = basis.codes()
    new_pos = {old: p for p, old in enumerate(new_order)}

    new_codes = np.zeros(codes.shape, dtype=np.int64)
    digits = []
    for m in range(basis.n_modes):
        d = basis.digit(codes, m)
        digits.append(d)
        new_codes += d * basis.local_dim ** (basis.n_modes - 1 - new_pos[m])

    amps = state.amplitudes
    if basis.statistics is Statistics.FERMI:
        par = np.zeros(codes.shape, dtype=np.int64)
        for m1 in range(basis.n_modes):
            for m2 in range(m1 + 1, basis.n_modes):
                if new_pos[m1] > new_pos[m2]:
                    par ^= digits[m1] & digits[m2]
        amps = amps * (1.0 - 2.0 * par)

    out = np.zeros(basis.dim, dtype=np.complex128)
    out[basis.positions_of(new_codes)] = amps
    return StateVector(basis, out, state.leakage)


def parity_weights(state: StateVector) -> tuple[float, float]:
    """Squared-norm weights of the even and odd total-occupation sectors."""
    codes = state.basis.codes()
    total = np.zeros(codes.shape, dtype=np.int64)
    for m in range(state.basis.n_modes):
        total += state.basis.digit(codes, m)
    w = np.abs(state.amplitudes) ** 2
    odd = float(np.sum(w[(total & 1) == 1]))
    even = float(np.sum(w[(total & 1) == 0]))
    return even, odd


@dataclass
class IdentityReport:
    """Residuals from the (anti)commutator string-expansion identities."""

    trials: int
    tolerance: float
    residuals: list[float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def check_operator_identities(
    basis: FockBasis,
    trials: int,
    seed: int = 0,
    max_string_length: int = 3,
    tolerance: float = 1e-12,
) -> IdentityReport:
    """Verify the expansion of [A, B_1..B_n] (even n) and {A, B_1..B_n}
    (odd n) into sums of nested anticommutators on dense realizations.

    A and every B_p are random creation/annihilation operators of random
    modes.  Small fermionic bases only (the identities rely on the
    anticommutator algebra).
    """
    if basis.statistics is not Statistics.FERMI:
        raise ConfigError("operator-string identities are fermionic checks")
    if basis.n_modes > 6:
        raise ConfigError("identity checks are limited to n_modes <= 6")
    rng = np.random.default_rng(seed)
    ops = {}

    def op(mode: int, create: bool) -> np.ndarray:
        key = (mode, create)
        if key not in ops:
            ops[key] = dense_operator(basis, mode, create=create)
        return ops[key]

    residuals = []
    for _ in range(trials):
        n = int(rng.integers(1, max_string_length + 1))
        a = op(int(rng.integers(basis.n_modes)), bool(rng.integers(2)))
        bs = [op(int(rng.integers(basis.n_modes)), bool(rng.integers(2))) for _ in range(n)]
        prod = bs[0].copy()
        for b in bs[1:]:
            prod = prod @ b
        lhs = a @ prod - prod @ a if n % 2 == 0 else a @ prod + prod @ a
        rhs = np.zeros_like(lhs)
        for p in range(n):
            term = a @ bs[p] + bs[p] @ a
            for b in bs[:p][::-1]:
                term = b @ term
            for b in bs[p + 1 :]:
                term = term @ b
            rhs = rhs + (-1.0) ** p * term
        residuals.append(float(np.max(np.abs(lhs - rhs))))
    return IdentityReport(trials=trials, tolerance=tolerance, residuals=residuals)
