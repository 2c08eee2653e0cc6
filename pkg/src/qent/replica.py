"""Cyclic replica permutation operator and replica-trace computations.

The operator on n copies of a region Hilbert space is fixed to the cyclic
representative with matrix elements ``prod_k delta(j_k, i_{k+1})``
(indices cyclic), i.e. the left shift ``|i_1 .. i_n> -> |i_2 .. i_n i_1>``.
Its expectation in ``rho^(x)n`` equals ``Tr rho^n`` and is evaluated by
cycling the replica index through n matrix contractions, never
materializing the d^n-dimensional operator outside tiny self-tests.

Fermionic contractions act on Jordan-Wigner reduced density matrices; the
resorting signs are absorbed by the reduction itself and no extra
replica-level factors are introduced.  The region/complement conjugation
identity consequently holds exactly for bosonic states and for fermionic
states of definite total parity; unrestricted fermionic parity
superpositions can violate it, which is recorded rather than hidden.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entangle import DensityMatrix, Region, region_factor_matrix, renyi_trace, spectrum
from .errors import ConfigError, DimensionCapError, NumericalError
from .excitations import StateRecipe, build_state
from .fock import StateVector

DEFAULT_REPLICA_CAP = 1 << 24
IMAG_TOL = 1e-10


def e_matrix_element(bra_indices: Sequence[int], ket_indices: Sequence[int], n: int) -> int:
    """Product of cyclic Kronecker deltas: 1 iff bra_k == ket_{k+1} for all k."""
    if len(bra_indices) != n or len(ket_indices) != n:
        raise ConfigError(f"index tuples must have length n={n}")
    return int(all(bra_indices[k] == ket_indices[(k + 1) % n] for k in range(n)))


@dataclass(frozen=True)
class ReplicaPermutation:
    """Index-cycling action of the replica operator on n copies of a space."""

    n: int
    dim: int

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("replica count must be >= 2")
        if self.dim < 1:
            raise ConfigError("region dimension must be >= 1")

    def shift_index(self, packed: int) -> int:
        """Packed-index action (copy 1 most significant digit base dim)."""
        digits = []
        x = packed
        for _ in range(self.n):
            digits.append(x % self.dim)
            x //= self.dim
        digits.reverse()
        shifted = digits[1:] + digits[:1]
        out = 0
        for d in shifted:
            out = out * self.dim + d
        return out

    def as_dense(self, cap: int = DEFAULT_REPLICA_CAP) -> np.ndarray:
        total = self.dim**self.n
        if total > cap or total > 4096:
            raise DimensionCapError(
                f"dense replica operator of dimension {total} refused (tiny self-tests only)"
            )
        e = np.zeros((total, total))
        for i in range(total):
            e[self.shift_index(i), i] = 1.0
        return e


def replica_trace(
    rho: DensityMatrix | np.ndarray, n: int, cap: int = DEFAULT_REPLICA_CAP
) -> float:
    """Tr[rho^(x)n E^(n)] evaluated by index cycling (equals Tr rho^n)."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if n < 2:
        raise ConfigError("replica trace needs n >= 2")
    d = mat.shape[0]
    if d**n > cap:
        raise DimensionCapError(f"replica dimension {d}^{n} exceeds cap {cap}")
    cycled = mat
    for _ in range(n - 1):
        cycled = cycled @ mat
    value = complex(np.trace(cycled))
    if abs(value.imag) > IMAG_TOL:
        raise NumericalError(f"replica trace has imaginary residue {value.imag:.3e}")
    return float(value.real)


def _sandwich(
    bra_states: Sequence[StateVector],
    ket_states: Sequence[StateVector],
    cycled_first: Region,
    cap: int,
) -> complex:
    """<bra_1..bra_n| E^(n) |ket_1..ket_n> with the cycle acting on the
    leading factor of the given region split."""
    n = len(bra_states)
    ts = None
    for bra, ket in zip(bra_states, ket_states):
        a_ket = region_factor_matrix(ket, cycled_first, cap=cap)
        a_bra = region_factor_matrix(bra, cycled_first, cap=cap)
        t = a_ket @ a_bra.conj().T
        ts = [t] if ts is None else ts + [t]
    acc = ts[0]
    for t in ts[1:]:
        acc = acc @ t
    if acc.shape[0] ** n > cap:
        raise DimensionCapError("replica contraction exceeds cap")
    return complex(np.trace(acc))


def check_pproperty(
    psi_list: Sequence[StateVector],
    chi_list: Sequence[StateVector],
    region: Region,
    n: int,
    cap: int = DEFAULT_REPLICA_CAP,
) -> float:
    """Residual of the region/complement conjugation identity.

    Compares <psi_1..psi_n| E_region |chi_1..chi_n> against the complex
    conjugate of <chi_2..chi_n chi_1| E_complement |psi_1..psi_n>, both by
    explicit contraction, and returns the absolute difference.
    """
    if len(psi_list) != n or len(chi_list) != n:
        raise ConfigError(f"need exactly n={n} states on each side")
    lhs = _sandwich(psi_list, chi_list, region, cap)
    rotated = list(chi_list[1:]) + [chi_list[0]]
    rhs = _sandwich(rotated, psi_list, region.complement(), cap)
    return float(abs(lhs - np.conj(rhs)))


@dataclass(frozen=True)
class LeadingOrderSplit:
    """Full replica trace of a two-packet state versus its factorized
    leading-order prediction; the difference stands in for the
    commutator correction pieces."""

    order: int
    full: float
    leading: float

    @property
    def difference(self) -> float:
        return self.full - self.leading


def leading_vs_full(
    recipe: StateRecipe,
    vacuum: StateVector,
    region: Region,
    n: int,
    cap: int = DEFAULT_REPLICA_CAP,
) -> LeadingOrderSplit:
    """Compare R_n of the built state against the leading factorization
    R_n(vacuum region) * R_n(QM pair) * (N sqrt(|a|^2+|b|^2))^(2n)."""
    from .entangle import reduced_density_matrix
    from .qmref import QMState, qm_renyi_trace

    if len(recipe.terms) != 2 or any(len(t.operators) != 2 for t in recipe.terms):
        raise ConfigError("leading-order split is defined for two-term, two-packet recipes")
    state, raw_norm = build_state(recipe, vacuum, vacuum.basis)
    lam_state = spectrum(reduced_density_matrix(state, region, cap=cap))
    lam_vac = spectrum(reduced_density_matrix(vacuum, region, cap=cap))
    full = renyi_trace(lam_state, n)
    a = recipe.terms[0].coefficient
    b = recipe.terms[1].coefficient
    qm = QMState(terms=((a, (0, 1)), (b, (1, 0))), dimension=2)
    norm_factor = (recipe.coefficient_norm() / raw_norm) ** (2 * n)
    leading = renyi_trace(lam_vac, n) * qm_renyi_trace(qm, n) * norm_factor
    return LeadingOrderSplit(order=n, full=full, leading=leading)
