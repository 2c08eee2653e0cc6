"""Acceptance suite: every exit criterion at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v -s`` to get one printed
pass/fail line per criterion alongside the pytest verdicts.
"""

import time
from types import SimpleNamespace

import numpy as np
import pytest

from qent.config import validate_config, validate_sweep
from qent.entangle import Region, reduced_density_matrix, renyi_trace, spectrum
from qent.excitations import build_state, make_packet
from qent.experiment import run_point, sweep_records
from qent.fock import FockBasis, Statistics, enumerate_basis, check_operator_identities
from qent.model import basis_for, build_vacuum, modes_for
from qent.replica import check_pproperty, replica_trace

from conftest import random_state

LOG2 = float(np.log(2.0))
INV_SQRT2 = 0.7071067811865476


def verdict(criterion: int, ok: bool, detail: str) -> None:
    print(f"\nacceptance criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {criterion}: {detail}"


def singlet_fermion_config(regime: str) -> dict:
    model = {
        "statistics": "fermi",
        "sites": 8,
        "species": 2,
        "hopping": 1.0,
        "mass": 4.0 if regime == "empty" else 1.0,
        "regime": regime,
    }
    if regime == "half_filled":
        model["staggered"] = True
    return {
        "model": model,
        "packets": [
            {"name": "left_up", "center": 1, "width": 1.0, "species": 0},
            {"name": "left_dn", "center": 1, "width": 1.0, "species": 1},
            {"name": "right_up", "center": 6, "width": 1.0, "species": 0},
            {"name": "right_dn", "center": 6, "width": 1.0, "species": 1},
        ],
        "state": {
            "terms": [
                {"coefficient": INV_SQRT2, "operators": ["left_up", "right_dn"]},
                {"coefficient": INV_SQRT2, "operators": ["left_dn", "right_up"]},
            ]
        },
        "region": {"sites": [0, 1, 2, 3]},
        "analysis": {"replica_check": True},
        "output": {"formats": ["json"]},
    }


def materialize_state(config):
    """Rebuild the normalized state, vacuum and model of an experiment."""
    model = config.model()
    modes = modes_for(model)
    basis = basis_for(model, cap=config.amplitude_cap())
    vacuum = build_vacuum(model, modes, basis)
    packets = {
        name: make_packet(profile, model, modes, basis)
        for name, profile in config.packet_profiles().items()
    }
    state, _ = build_state(config.recipe(packets), vacuum, basis)
    return state, vacuum, model


@pytest.fixture(scope="module")
def crit1():
    config = validate_config(singlet_fermion_config("empty"))
    t0 = time.perf_counter()
    result = run_point(config)
    return SimpleNamespace(config=config, result=result, elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="module")
def crit2():
    config = validate_config(singlet_fermion_config("half_filled"))
    t0 = time.perf_counter()
    result = run_point(config)
    return SimpleNamespace(config=config, result=result, elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="module")
def crit3():
    ratios = [0.0, 1.0 / np.sqrt(3.0), 1.0, np.sqrt(3.0)]
    spec = validate_sweep(
        {
            "base": singlet_fermion_config("empty"),
            "parameter": "coeff_ratio",
            "values": ratios,
        }
    )
    return SimpleNamespace(spec=spec, ratios=ratios, rows=sweep_records(spec))


def test_criterion_1_leading_order_particle_entropies(crit1):
    report = crit1.result.report
    worst = max(abs(report.subtracted[n] - LOG2) for n in (1.0, 2.0, 3.0))
    ok = worst <= 0.05 and crit1.elapsed < 30.0
    verdict(1, ok, f"max |subtracted - log 2| = {worst:.2e} nats, {crit1.elapsed:.1f} s")


def test_criterion_2_nontrivial_vacuum_subtraction(crit2):
    report = crit2.result.report
    vac_s1 = report.vacuum_entropy[1.0]
    dev = abs(report.subtracted[1.0] - LOG2)
    ok = vac_s1 > 0.01 and dev <= 0.1 and crit2.elapsed < 120.0
    verdict(2, ok, f"S1(vacuum) = {vac_s1:.3f} nats, |subtracted - log 2| = {dev:.2e}")


def test_criterion_3_coefficient_dependence(crit3):
    closed = lambda v: -np.log((v**4 + 1.0) / (v**2 + 1.0) ** 2)
    worst = 0.0
    for ratio, (_, record) in zip(crit3.ratios, crit3.rows):
        assert record.error is None
        worst = max(worst, abs(record.subtracted_entropy[2.0] - closed(ratio)))
    endpoints = (closed(crit3.ratios[0]), closed(crit3.ratios[2]))
    ok = (
        worst <= 0.05
        and endpoints[0] == pytest.approx(0.0, abs=1e-12)
        and endpoints[1] == pytest.approx(LOG2, abs=1e-12)
    )
    verdict(3, ok, f"max |subtracted S2 - closed form| = {worst:.2e} nats over {len(crit3.rows)} ratios")


def _small_region_rhos(config, max_modes=6):
    state, vacuum, model = materialize_state(config)
    rhos = []
    size = 1
    while size * model.species <= max_modes and size < model.sites:
        region = Region(tuple(range(size)), model.sites, model.species)
        rhos.append(reduced_density_matrix(state, region))
        rhos.append(reduced_density_matrix(vacuum, region))
        size += 1
    return rhos


def test_criterion_4_replica_spectral_equivalence(crit1, crit2, crit3):
    configs = [crit1.config, crit2.config]
    from qent.config import point_config

    configs += [point_config(crit3.spec, ratio) for ratio in crit3.ratios]
    worst = 0.0
    checked = 0
    for config in configs:
        for rho in _small_region_rhos(config):
            lam = spectrum(rho)
            for n in (2, 3):
                dev = abs(replica_trace(rho, n) - renyi_trace(lam, n))
                worst = max(worst, dev)
                checked += 1
    ok = worst <= 1e-9
    verdict(4, ok, f"max |replica - spectral| = {worst:.2e} over {checked} reductions")


def test_criterion_5_region_complement_conjugation(rng):
    trial_rng = np.random.default_rng(515151)
    basis = enumerate_basis(Statistics.BOSE, 3, boson_cutoff=2)
    region = Region((0,), 3, 1)
    worst = 0.0
    trials = 0
    for n in (2, 3):
        for _ in range(50):
            psis = [random_state(basis, trial_rng) for _ in range(n)]
            chis = [random_state(basis, trial_rng) for _ in range(n)]
            worst = max(worst, check_pproperty(psis, chis, region, n))
            trials += 1
    ok = worst <= 1e-9
    verdict(5, ok, f"max residual = {worst:.2e} over {trials} seeded trials")


def test_criterion_6_correction_decay(crit1):
    spec = validate_sweep(
        {
            "base": singlet_fermion_config("empty"),
            "parameter": "separation",
            "values": [1, 2, 3, 4, 5],
        }
    )
    rows = sweep_records(spec)
    deltas = [record.deltas[2.0] for _, record in rows]
    ok = (
        deltas[-1] < deltas[0]
        and deltas[-1] <= 0.01 * LOG2
        and all(d > 0 for d in deltas)
    )
    verdict(
        6,
        ok,
        f"delta2(d=1) = {deltas[0]:.2e}, delta2(d=5) = {deltas[-1]:.2e}, all positive",
    )


def test_criterion_7_fermionic_sign_structure(crit1):
    report = crit1.result.report
    ok = True
    details = []
    for n in (2, 3):
        ok &= abs(report.subtracted[n] - LOG2) <= 0.05
    state, vacuum, model = materialize_state(crit1.config)
    region = crit1.config.region()
    for vec in (state, vacuum):
        rho = reduced_density_matrix(vec, region)
        for n in (2, 3):
            value = replica_trace(rho, n)  # raises if imaginary residue > 1e-10
            ok &= 0.0 < value <= 1.0 + 1e-12
            details.append(f"R{n}={value:.6f}")
    verdict(7, ok, "even and odd replica numbers; " + ", ".join(details))


def test_criterion_8_operator_string_identities():
    report = check_operator_identities(
        enumerate_basis(Statistics.FERMI, 4),
        trials=50,
        seed=88,
        max_string_length=3,
        tolerance=1e-12,
    )
    ok = report.passed
    verdict(8, ok, f"max residual = {report.max_residual:.2e} over {report.trials} trials")


def test_criterion_9_occupation_number_entanglement():
    raw = {
        "model": {
            "statistics": "bose",
            "sites": 4,
            "species": 1,
            "hopping": 0.0,
            "mass": 1.0,
            "regime": "boson_ground",
            "boson_cutoff": 2,
        },
        "packets": [
            {"name": "left", "center": 0.5, "width": 1.0, "shape": "rect"},
            {"name": "right", "center": 2.5, "width": 1.0, "shape": "rect"},
        ],
        "state": {
            "terms": [
                {"coefficient": INV_SQRT2, "operators": []},
                {"coefficient": INV_SQRT2, "operators": ["left", "right"]},
            ]
        },
        "region": {"sites": [0, 1]},
        "output": {"formats": ["json"]},
    }
    result = run_point(validate_config(raw))
    dev = abs(result.report.subtracted[1.0] - LOG2)
    verdict(9, dev <= 0.1, f"|subtracted S1 - log 2| = {dev:.2e} nats")


def test_criterion_10_single_delocalized_particle():
    raw = {
        "model": {
            "statistics": "fermi",
            "sites": 8,
            "species": 2,
            "hopping": 1.0,
            "mass": 4.0,
            "regime": "empty",
        },
        "packets": [
            {"name": "here", "center": 1, "width": 1.0, "species": 0},
            {"name": "there", "center": 6, "width": 1.0, "species": 0},
        ],
        "state": {
            "terms": [
                {"coefficient": INV_SQRT2, "operators": ["here"]},
                {"coefficient": INV_SQRT2, "operators": ["there"]},
            ]
        },
        "region": {"sites": [0, 1, 2, 3]},
        "output": {"formats": ["json"]},
    }
    result = run_point(validate_config(raw))
    dev = abs(result.report.subtracted[1.0] - LOG2)
    verdict(10, dev <= 0.1, f"|subtracted S1 - log 2| = {dev:.2e} nats")
