"""Pipeline assembly: from a validated config to entropy and residual data.

Pure computation, no file I/O; the runner module handles persistence.
Sweep points are independent and can run on a process pool; results are
always aggregated in the order of the swept value list.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, SweepSpec, point_config
from .entangle import (
    EntropyReport,
    reduced_density_matrix,
    renyi_trace,
    spectrum,
    vacuum_subtracted_report,
)
from .errors import QentError
from .excitations import build_state, envelope_overlap, make_packet
from .fock import StateVector
from .model import basis_for, build_vacuum, modes_for
from .qmref import ResidualRecord, compare
from .replica import replica_trace


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    report: EntropyReport
    residual: ResidualRecord
    replica_check: dict | None
    raw_norm: float
    timing: dict


def _packet_geometry(config: ExperimentConfig, packets: dict) -> tuple[float | None, float | None]:
    """Separation and spatial overlap of the two packet groups, if the
    recipe uses exactly two distinct spatial profiles."""
    profiles = {p["name"]: p for p in config.data["packets"]}
    groups: dict[tuple, str] = {}
    for term in config.data["state"]["terms"]:
        for name in term["operators"]:
            p = profiles[name]
            key = (p["center"], p["width"], p["shape"], p["band"])
            groups.setdefault(key, name)
    if len(groups) != 2:
        return None, None
    (key1, name1), (key2, name2) = sorted(groups.items())
    separation = abs(float(key2[0]) - float(key1[0]))
    overlap = abs(envelope_overlap(packets[name1], packets[name2]))
    return separation, float(overlap)


def run_point(config: ExperimentConfig) -> ExperimentResult:
    """Run a single experiment: build, excite, reduce, compare."""
    timing = {}
    t0 = time.perf_counter()

    model = config.model()
    modes = modes_for(model)
    basis = basis_for(model, cap=config.amplitude_cap())
    vacuum = build_vacuum(model, modes, basis)
    timing["build_seconds"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    packets = {
        name: make_packet(profile, model, modes, basis)
        for name, profile in config.packet_profiles().items()
    }
    recipe = config.recipe(packets)
    state, raw_norm = build_state(recipe, vacuum, basis)
    timing["state_seconds"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    region = config.region()
    report = vacuum_subtracted_report(
        state, vacuum, region, config.renyi_orders(), cap=config.amplitude_cap()
    )
    timing["entropy_seconds"] = time.perf_counter() - t2

    separation, overlap = _packet_geometry(config, packets)
    norm_dev = abs(recipe.coefficient_norm() / raw_norm - 1.0)
    residual = compare(
        report,
        config.qm_state(),
        separation=separation,
        overlap=overlap,
        norm_deviation=norm_dev,
    )

    replica_check = None
    if config.data["analysis"]["replica_check"]:
        t3 = time.perf_counter()
        replica_check = cross_check_replica(
            state, vacuum, region, config, cap=config.replica_cap()
        )
        timing["replica_seconds"] = time.perf_counter() - t3

    timing["total_seconds"] = time.perf_counter() - t0
    return ExperimentResult(
        config=config,
        report=report,
        residual=residual,
        replica_check=replica_check,
        raw_norm=raw_norm,
        timing=timing,
    )


def cross_check_replica(
    state: StateVector,
    vacuum: StateVector,
    region,
    config: ExperimentConfig,
    cap: int,
) -> dict:
    """Replica-trace versus spectral R_n for the state and vacuum reductions."""
    orders = [int(n) for n in config.data["analysis"]["replica_orders"]]
    out = {"orders": orders, "state": {}, "vacuum": {}}
    max_dev = 0.0
    for label, vec in (("state", state), ("vacuum", vacuum)):
        rho = reduced_density_matrix(vec, region, cap=config.amplitude_cap())
        lam = spectrum(rho)
        for n in orders:
            via_replica = replica_trace(rho, n, cap=cap)
            via_spectrum = renyi_trace(lam, n)
            dev = abs(via_replica - via_spectrum)
            max_dev = max(max_dev, dev)
            out[label][str(n)] = {
                "replica": via_replica,
                "spectral": via_spectrum,
                "deviation": dev,
            }
    out["max_deviation"] = max_dev
    return out


def _point_record(config: ExperimentConfig, separation: float | None = None) -> ResidualRecord:
    try:
        result = run_point(config)
    except QentError as exc:
        return ResidualRecord(
            separation=separation,
            overlap_abs=None,
            deltas={},
            norm_deviation=None,
            error=f"{type(exc).__name__}: {exc}",
        )
    record = result.residual
    if separation is not None:
        record.separation = separation
    return record


def _worker(args) -> ResidualRecord:
    data, separation = args
    return _point_record(ExperimentConfig(data=data), separation)


def scan_separations(
    base: ExperimentConfig, separations: list[float], jobs: int = 1
) -> list[ResidualRecord]:
    """One full pipeline run per separation; per-point failures are kept
    as error markers instead of aborting the scan."""
    spec = SweepSpec(base=base, parameter="separation", values=tuple(separations))
    tasks = []
    records: list[ResidualRecord | None] = []
    for d in separations:
        try:
            cfg = point_config(spec, d)
        except QentError as exc:
            records.append(
                ResidualRecord(
                    separation=float(d),
                    overlap_abs=None,
                    deltas={},
                    norm_deviation=None,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            tasks.append(None)
            continue
        records.append(None)
        tasks.append((cfg.data, float(d)))
    pending = [t for t in tasks if t is not None]
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_worker, pending))
    else:
        done = [_worker(t) for t in pending]
    it = iter(done)
    return [rec if rec is not None else next(it) for rec in records]


def sweep_records(spec: SweepSpec, jobs: int = 1) -> list[tuple[object, ResidualRecord]]:
    """Run every sweep point, aggregated in the order of the value list."""
    tasks = []
    placeholders: list[ResidualRecord | None] = []
    for value in spec.values:
        sep = float(value) if spec.parameter == "separation" else None
        try:
            cfg = point_config(spec, value)
        except QentError as exc:
            placeholders.append(
                ResidualRecord(
                    separation=sep,
                    overlap_abs=None,
                    deltas={},
                    norm_deviation=None,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            tasks.append(None)
            continue
        placeholders.append(None)
        tasks.append((cfg.data, sep))
    pending = [t for t in tasks if t is not None]
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_worker, pending))
    else:
        done = [_worker(t) for t in pending]
    it = iter(done)
    records = [rec if rec is not None else next(it) for rec in placeholders]
    return list(zip(spec.values, records))
