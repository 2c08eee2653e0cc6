"""Quantum-mechanical reference for two entangled distinguishable particles.

The reference state is ``sum_alpha a_alpha |i_alpha>|j_alpha>`` over an
internal-index space of dimension s.  For the two-term state with both
index slots distinct the first particle's Renyi trace has the closed form
``(|a|^(2n) + |b|^(2n)) / (|a|^2 + |b|^2)^n``; every other case goes
through the exact 2-particle partial trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entangle import DensityMatrix, renyi_entropy, renyi_trace, spectrum
from .errors import ConfigError


@dataclass(frozen=True)
class QMState:
    """Two-particle state as (coefficient, (index_1, index_2)) terms."""

    terms: tuple[tuple[complex, tuple[int, int]], ...]
    dimension: int

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("QM state needs at least one term")
        if self.dimension < 1:
            raise ConfigError("internal-index dimension must be >= 1")
        for _, (i, j) in self.terms:
            if not (0 <= i < self.dimension and 0 <= j < self.dimension):
                raise ConfigError(
                    f"indices ({i}, {j}) outside [0, {self.dimension})"
                )

    def amplitude_matrix(self) -> np.ndarray:
        psi = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for coeff, (i, j) in self.terms:
            psi[i, j] += coeff
        return psi


def qm_density_matrix(qstate: QMState) -> DensityMatrix:
    """Density matrix of the first particle (exact partial trace)."""
    psi = qstate.amplitude_matrix()
    norm2 = float(np.sum(np.abs(psi) ** 2))
    if norm2 < 1e-300:
        raise ConfigError("QM state has zero norm")
    return DensityMatrix(matrix=psi @ psi.conj().T / norm2, basis=None)


def _two_term_orthogonal(qstate: QMState) -> tuple[complex, complex] | None:
    if len(qstate.terms) != 2:
        return None
    (a, (i1, j1)), (b, (i2, j2)) = qstate.terms
    if i1 != i2 and j1 != j2:
        return a, b
    return None


def qm_renyi_trace(qstate: QMState, order: float) -> float:
    """R_n of the first particle; closed form for two orthogonal terms."""
    ab = _two_term_orthogonal(qstate)
    if ab is not None:
        a, b = (abs(ab[0]), abs(ab[1]))
        return float((a ** (2 * order) + b ** (2 * order)) / (a**2 + b**2) ** order)
    return renyi_trace(spectrum(qm_density_matrix(qstate)), order)


def qm_renyi(qstate: QMState, order: float) -> float:
    """S_n of the first particle in nats (order 1 is von Neumann)."""
    if order == 1:
        return renyi_entropy(spectrum(qm_density_matrix(qstate)), 1)
    return float(math.log(qm_renyi_trace(qstate, order)) / (1.0 - order))


def qm_entropies(qstate: QMState, orders) -> dict[float, float]:
    return {float(n): qm_renyi(qstate, float(n)) for n in orders}


@dataclass
class ResidualRecord:
    """One comparison between the field simulation and the QM reference."""

    separation: float | None
    overlap_abs: float | None
    deltas: dict[float, float]
    norm_deviation: float | None
    qm_entropy: dict[float, float] = field(default_factory=dict)
    subtracted_entropy: dict[float, float] = field(default_factory=dict)
    vacuum_entropy: dict[float, float] = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        key = lambda n: str(int(n)) if float(n).is_integer() else str(n)
        return {
            "separation": self.separation,
            "overlap_abs": self.overlap_abs,
            "delta": {key(n): v for n, v in sorted(self.deltas.items())},
            "norm_deviation": self.norm_deviation,
            "qm_entropy": {key(n): v for n, v in sorted(self.qm_entropy.items())},
            "subtracted_entropy": {key(n): v for n, v in sorted(self.subtracted_entropy.items())},
            "vacuum_entropy": {key(n): v for n, v in sorted(self.vacuum_entropy.items())},
            "error": self.error,
        }


def compare(
    report,
    qstate: QMState,
    separation: float | None = None,
    overlap: float | None = None,
    norm_deviation: float | None = None,
) -> ResidualRecord:
    """Per-order residuals |S_n(state) - S_n(vacuum) - S_n(QM)|."""
    qm = qm_entropies(qstate, report.orders)
    deltas = {n: abs(report.subtracted[n] - qm[n]) for n in report.orders}
    return ResidualRecord(
        separation=separation,
        overlap_abs=overlap,
        deltas=deltas,
        norm_deviation=norm_deviation,
        qm_entropy=qm,
        subtracted_entropy=dict(report.subtracted),
        vacuum_entropy=dict(report.vacuum_entropy),
    )


def overlap_scan(base_config, separations, jobs: int = 1) -> list[ResidualRecord]:
    """One full simulation per packet separation.

    Each point repositions the moving packet group of the base experiment,
    runs the whole pipeline and collects the residual record; failures are
    kept as per-point error markers.  Points are aggregated in the order
    of the separation list.
    """
    from .experiment import scan_separations

    return scan_separations(base_config, list(separations), jobs=jobs)
