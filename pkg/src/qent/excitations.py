"""Localized wave-packet creation operators and entangled-state assembly.

A packet is a normalized superposition of site creation operators of one
species.  In the half-filled regime the envelope is first projected onto
the requested band so the packet creates a genuine particle orthogonal to
the filled sea.  With that projection the contract
``<vac| O^dagger O |vac> = 1`` holds exactly for particle-band packets on
the empty, half-filled and atomic-limit vacuums; for a coupled-oscillator
ground state the site ladder operators are only approximate particle
creators and the unit-envelope normalization is kept as the convention.

Within a recipe term the operator list is read as an operator product,
leftmost outermost; the rightmost operator hits the vacuum first.  For
fermions the resulting sign depends on that order, so it is part of the
recipe contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .fock import FockBasis, StateVector, apply_mode_sum
from .model import LatticeModel, SingleParticleModes, VacuumRegime

PROJECTION_NORM_FLOOR = 1e-8
ZERO_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PacketProfile:
    """Spatial envelope of a localized packet.

    Gaussian envelopes are ``exp(-(x - center)^2 / (2 width^2))``, so two
    unit-normalized packets a distance d apart overlap by
    ``exp(-d^2 / (4 width^2))`` up to lattice discretization.  Rectangular
    envelopes cover the sites with ``|x - center| <= width / 2`` and allow
    exactly disjoint supports.
    """

    center: float
    width: float
    species: int = 0
    band: str = "upper"
    shape: str = "gaussian"

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigError(f"packet width must be positive, got {self.width}")
        if self.shape not in ("gaussian", "rect"):
            raise ConfigError(f"unknown envelope shape {self.shape!r}")
        if self.band not in ("upper", "lower"):
            raise ConfigError(f"unknown band selector {self.band!r}")

    def envelope(self, sites: int) -> np.ndarray:
        x = np.arange(sites, dtype=float)
        if self.shape == "gaussian":
            return np.exp(-((x - self.center) ** 2) / (2.0 * self.width**2))
        return (np.abs(x - self.center) <= self.width / 2.0).astype(float)


@dataclass(frozen=True)
class PacketOperator:
    """Normalized packet creation operator (coefficients of one species)."""

    species: int
    n_species: int
    site_coefficients: np.ndarray
    normalized: bool = True

    def mode_pairs(self, dagger: bool = True) -> list[tuple[int, complex]]:
        coeffs = self.site_coefficients
        if not dagger:
            coeffs = np.conj(coeffs)
        return [
            (x * self.n_species + self.species, complex(c))
            for x, c in enumerate(coeffs)
            if c != 0
        ]


def make_packet(
    profile: PacketProfile,
    model: LatticeModel,
    modes: SingleParticleModes,
    basis: FockBasis,
) -> PacketOperator:
    """Sample, band-project (half-filled regime) and normalize a packet."""
    if not 0 <= profile.center <= model.sites - 1:
        raise ConfigError(
            f"packet center {profile.center} outside the lattice [0, {model.sites - 1}]"
        )
    if not 0 <= profile.species < model.species:
        raise ConfigError(
            f"packet species {profile.species} outside [0, {model.species})"
        )
    phi = profile.envelope(model.sites).astype(np.complex128)
    if model.regime is VacuumRegime.HALF_FILLED:
        phi = modes.band_projector(profile.band) @ phi
    norm = np.linalg.norm(phi)
    if norm < PROJECTION_NORM_FLOOR:
        raise ConfigError(
            f"packet at center {profile.center} has no {profile.band}-band content "
            f"(post-projection norm {norm:.3e})"
        )
    return PacketOperator(
        species=profile.species,
        n_species=model.species,
        site_coefficients=phi / norm,
    )


def packet_overlap(p: PacketOperator, q: PacketOperator) -> complex:
    """Mode-space overlap sum_x p*(x) q(x); zero across distinct species."""
    if p.species != q.species:
        return 0.0 + 0.0j
    return complex(np.vdot(p.site_coefficients, q.site_coefficients))


def envelope_overlap(p: PacketOperator, q: PacketOperator) -> complex:
    """Species-blind spatial overlap, used as a correction-size diagnostic."""
    return complex(np.vdot(p.site_coefficients, q.site_coefficients))


def apply_packet(
    state: StateVector, packet: PacketOperator, dagger: bool = True, strict: bool = False
) -> StateVector:
    return apply_mode_sum(state, packet.mode_pairs(dagger), create=dagger, strict=strict)


@dataclass(frozen=True)
class RecipeTerm:
    coefficient: complex
    operators: tuple[PacketOperator, ...]


@dataclass(frozen=True)
class StateRecipe:
    """Sum of packet-operator strings applied to the vacuum."""

    terms: tuple[RecipeTerm, ...]

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("state recipe needs at least one term")

    def coefficient_norm(self) -> float:
        """sqrt(sum |a_alpha|^2) over the term coefficients."""
        return float(np.sqrt(sum(abs(t.coefficient) ** 2 for t in self.terms)))


def build_state(
    recipe: StateRecipe, vacuum: StateVector, basis: FockBasis, strict: bool = False
) -> tuple[StateVector, float]:
    """Assemble and normalize the recipe state above the given vacuum.

    Returns the normalized state and the raw (pre-normalization) norm, so
    the overall constant N = 1/raw_norm can be compared with the ideal
    disjoint-support value (sum |a|^2)^(-1/2).
    """
    if not vacuum.basis.compatible(basis):
        raise ConfigError("vacuum basis does not match the requested basis")
    acc = np.zeros(basis.dim, dtype=np.complex128)
    leakage = 0.0
    for term in recipe.terms:
        st = vacuum
        for op in reversed(term.operators):
            st = apply_packet(st, op, dagger=True, strict=strict)
        acc += term.coefficient * st.amplitudes
        leakage += abs(term.coefficient) ** 2 * st.leakage
    raw_norm = float(np.linalg.norm(acc))
    if raw_norm < ZERO_NORM_TOL:
        raise NumericalError(
            "recipe state has zero norm (destructive interference or cutoff annihilation)"
        )
    return StateVector(basis, acc / raw_norm, leakage), raw_norm
