"""Experiment configuration: schema, defaults, physics checks, sweeps.

Configs are JSON documents.  ``validate_config`` schema-checks the text,
materializes every default explicitly (so the echo round-trips through
validation unchanged) and probes the physics preconditions: gap
condition, packet references and placement, region validity, caps.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import jsonschema

from .entangle import Region
from .errors import ConfigError
from .excitations import PacketProfile, RecipeTerm, StateRecipe, make_packet
from .fock import DEFAULT_AMPLITUDE_CAP, Statistics
from .model import LatticeModel, VacuumRegime, basis_for, modes_for, spectral_gap
from .qmref import QMState
from .replica import DEFAULT_REPLICA_CAP

ENV_DIM_CAP = "QENT_DIM_CAP"

_COEFF = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
        },
    ]
}

_PACKET = {
    "type": "object",
    "required": ["name", "center", "width"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "center": {"type": "number"},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "species": {"type": "integer", "minimum": 0},
        "band": {"enum": ["upper", "lower"]},
        "shape": {"enum": ["gaussian", "rect"]},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["model", "packets", "state", "region"],
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "required": ["statistics", "sites"],
            "additionalProperties": False,
            "properties": {
                "statistics": {"enum": ["fermi", "bose"]},
                "sites": {"type": "integer", "minimum": 2},
                "species": {"type": "integer", "minimum": 1},
                "hopping": {"type": "number"},
                "mass": {"type": "number"},
                "regime": {"enum": ["empty", "half_filled", "boson_ground"]},
                "staggered": {"type": "boolean"},
                "boson_cutoff": {"type": ["integer", "null"], "minimum": 1},
                "boundary": {"enum": ["open", "periodic"]},
            },
        },
        "packets": {"type": "array", "minItems": 1, "items": _PACKET},
        "state": {
            "type": "object",
            "required": ["terms"],
            "additionalProperties": False,
            "properties": {
                "terms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["coefficient", "operators"],
                        "additionalProperties": False,
                        "properties": {
                            "coefficient": _COEFF,
                            "operators": {
                                "type": "array",
                                "items": {"type": "string"},
                            },
                        },
                    },
                }
            },
        },
        "region": {
            "type": "object",
            "required": ["sites"],
            "additionalProperties": False,
            "properties": {
                "sites": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "integer", "minimum": 0},
                }
            },
        },
        "qm": {
            "type": ["object", "null"],
            "required": ["dimension", "terms"],
            "additionalProperties": False,
            "properties": {
                "dimension": {"type": "integer", "minimum": 1},
                "terms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["coefficient", "indices"],
                        "additionalProperties": False,
                        "properties": {
                            "coefficient": _COEFF,
                            "indices": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 0},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    },
                },
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "renyi_orders": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0},
                },
                "replica_check": {"type": "boolean"},
                "replica_orders": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 2},
                },
                "amplitude_cap": {"type": "integer", "exclusiveMinimum": 0},
                "replica_cap": {"type": "integer", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string", "minLength": 1},
                "formats": {
                    "type": "array",
                    "items": {"enum": ["json", "csv", "png"]},
                },
            },
        },
    },
}

SWEEP_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["base", "parameter", "values"],
    "additionalProperties": False,
    "properties": {
        "base": {"type": "object"},
        "parameter": {
            "enum": ["separation", "region_size", "coeff_ratio", "index_pattern"]
        },
        "values": {"type": "array", "minItems": 1},
        "moving_packets": {
            "type": "array",
            "items": {"type": "string"},
        },
    },
}

_MODEL_DEFAULTS = {
    "species": 2,
    "hopping": 1.0,
    "mass": 1.0,
    "regime": "empty",
    "boson_cutoff": None,
    "boundary": "open",
}
_PACKET_DEFAULTS = {"species": 0, "band": "upper", "shape": "gaussian"}
_ANALYSIS_DEFAULTS = {
    "renyi_orders": [1, 2, 3],
    "replica_check": False,
    "replica_orders": [2, 3],
    "amplitude_cap": DEFAULT_AMPLITUDE_CAP,
    "replica_cap": DEFAULT_REPLICA_CAP,
}
_OUTPUT_DEFAULTS = {"directory": "qent-out", "formats": ["json", "csv", "png"]}

_INDEX_PATTERNS = {
    "distinct": (0, 1, 2, 3),
    "singlet": (0, 1, 1, 0),
    "i=l": (0, 1, 2, 0),
    "j=k": (0, 1, 1, 2),
    "i=j": (0, 0, 1, 2),
    "k=l": (0, 1, 2, 2),
}


def _coeff_to_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    return complex(value[0], value[1])


def _coeff_echo(value) -> list[float]:
    c = _coeff_to_complex(value)
    return [c.real, c.imag]


@dataclass(frozen=True)
class ExperimentConfig:
    """A schema-valid, defaults-materialized experiment description."""

    data: dict

    # -- accessors --------------------------------------------------------

    def model(self) -> LatticeModel:
        m = self.data["model"]
        return LatticeModel(
            statistics=Statistics(m["statistics"]),
            sites=m["sites"],
            species=m["species"],
            hopping=m["hopping"],
            mass=m["mass"],
            regime=VacuumRegime(m["regime"]),
            staggered=m["staggered"],
            boson_cutoff=m["boson_cutoff"],
            boundary=m["boundary"],
        )

    def packet_profiles(self) -> dict[str, PacketProfile]:
        out = {}
        for p in self.data["packets"]:
            out[p["name"]] = PacketProfile(
                center=p["center"],
                width=p["width"],
                species=p["species"],
                band=p["band"],
                shape=p["shape"],
            )
        return out

    def recipe(self, packets: dict) -> StateRecipe:
        terms = []
        for t in self.data["state"]["terms"]:
            ops = []
            for name in t["operators"]:
                if name not in packets:
                    raise ConfigError(f"state references unknown packet {name!r}")
                ops.append(packets[name])
            terms.append(
                RecipeTerm(coefficient=_coeff_to_complex(t["coefficient"]), operators=tuple(ops))
            )
        return StateRecipe(terms=tuple(terms))

    def region(self) -> Region:
        m = self.data["model"]
        return Region(
            sites=tuple(self.data["region"]["sites"]),
            n_sites=m["sites"],
            n_species=m["species"],
        )

    def renyi_orders(self) -> tuple[float, ...]:
        return tuple(float(n) for n in self.data["analysis"]["renyi_orders"])

    def amplitude_cap(self) -> int:
        env = os.environ.get(ENV_DIM_CAP)
        if env is not None:
            try:
                cap = int(env)
            except ValueError as exc:
                raise ConfigError(f"{ENV_DIM_CAP}={env!r} is not an integer") from exc
            if cap <= 0:
                raise ConfigError(f"{ENV_DIM_CAP} must be positive")
            return cap
        return self.data["analysis"]["amplitude_cap"]

    def replica_cap(self) -> int:
        return self.data["analysis"]["replica_cap"]

    def qm_state(self) -> QMState:
        """Explicit QM block if present, else derived from the recipe."""
        qm = self.data.get("qm")
        if qm:
            terms = tuple(
                (_coeff_to_complex(t["coefficient"]), tuple(t["indices"]))
                for t in qm["terms"]
            )
            return QMState(terms=terms, dimension=qm["dimension"])
        return derive_qm_state(self)


def derive_qm_state(config: ExperimentConfig) -> QMState:
    """Map the recipe to the distinguishable-particle reference state.

    Two-operator terms map to the species pair of their packets.  Terms of
    varying even length (occupation-number recipes) map to the pair (k, k)
    with k the number of packet pairs.  Single-operator terms describe one
    delocalized particle, whose internal reference state is pure.
    """
    terms = config.data["state"]["terms"]
    packets = {p["name"]: p for p in config.data["packets"]}
    lengths = {len(t["operators"]) for t in terms}

    if lengths == {2}:
        species = config.data["model"]["species"]
        qm_terms = tuple(
            (
                _coeff_to_complex(t["coefficient"]),
                (
                    packets[t["operators"][0]]["species"],
                    packets[t["operators"][1]]["species"],
                ),
            )
            for t in terms
        )
        return QMState(terms=qm_terms, dimension=species)

    if lengths == {1}:
        # one delocalized particle: internal state is pure
        return QMState(terms=((1.0, (0, 0)),), dimension=1)

    if all(length % 2 == 0 for length in lengths):
        qm_terms = []
        for t in terms:
            k = len(t["operators"]) // 2
            qm_terms.append((_coeff_to_complex(t["coefficient"]), (k, k)))
        dim = max(k for _, (k, _) in qm_terms) + 1
        return QMState(terms=tuple(qm_terms), dimension=dim)

    raise ConfigError(
        "cannot derive a QM reference from this recipe; add an explicit 'qm' block"
    )


def _materialize(raw: dict) -> dict:
    data = copy.deepcopy(raw)
    model = dict(_MODEL_DEFAULTS)
    model.update(data["model"])
    model.setdefault("staggered", model["regime"] == "half_filled")
    data["model"] = model
    data["packets"] = [
        {**_PACKET_DEFAULTS, **p} for p in data["packets"]
    ]
    analysis = dict(_ANALYSIS_DEFAULTS)
    analysis.update(data.get("analysis", {}))
    data["analysis"] = analysis
    output = dict(_OUTPUT_DEFAULTS)
    output.update(data.get("output", {}))
    data["output"] = output
    for t in data["state"]["terms"]:
        t["coefficient"] = _coeff_echo(t["coefficient"])
    if data.get("qm"):
        for t in data["qm"]["terms"]:
            t["coefficient"] = _coeff_echo(t["coefficient"])
    else:
        data.pop("qm", None)
    data["region"]["sites"] = sorted(set(data["region"]["sites"]))
    return data


def _schema_check(raw: dict, schema: dict) -> None:
    try:
        jsonschema.validate(raw, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation at {exc.json_path}: {exc.message}") from exc


def validate_config(source: str | dict) -> ExperimentConfig:
    """Parse, schema-check and physics-check an experiment config."""
    if isinstance(source, str):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _schema_check(raw, CONFIG_SCHEMA)
    config = ExperimentConfig(data=_materialize(raw))

    # physics probes: model constraints, gap, packet placement and band
    # content, region validity, recipe references, derivable QM reference
    model = config.model()
    spectral_gap(model)
    modes = modes_for(model)
    basis = basis_for(model, cap=config.amplitude_cap())
    names = [p["name"] for p in config.data["packets"]]
    if len(set(names)) != len(names):
        raise ConfigError("packet names must be unique")
    packets = {
        name: make_packet(profile, model, modes, basis)
        for name, profile in config.packet_profiles().items()
    }
    config.recipe(packets)
    config.region()
    config.qm_state()
    return config


def validate_config_file(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(fh.read())


@dataclass(frozen=True)
class SweepSpec:
    """A base config plus one swept parameter and its value list."""

    base: ExperimentConfig
    parameter: str
    values: tuple
    moving_packets: tuple[str, ...] | None = None


def validate_sweep(source: str | dict) -> SweepSpec:
    if isinstance(source, str):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sweep spec is not valid JSON: {exc}") from exc
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ConfigError("sweep spec must be a JSON object")
    _schema_check(raw, SWEEP_SCHEMA)
    base = validate_config(raw["base"])
    spec = SweepSpec(
        base=base,
        parameter=raw["parameter"],
        values=tuple(raw["values"]),
        moving_packets=tuple(raw["moving_packets"]) if "moving_packets" in raw else None,
    )
    # every point must itself validate
    for value in spec.values:
        point_config(spec, value)
    return spec


def validate_sweep_file(path: str) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_sweep(fh.read())


def _moving_packet_names(spec: SweepSpec) -> tuple[list[str], float]:
    """Packets repositioned by a separation sweep and the anchor center."""
    data = spec.base.data
    used = {name for t in data["state"]["terms"] for name in t["operators"]}
    centers = {p["name"]: p["center"] for p in data["packets"] if p["name"] in used}
    if not centers:
        raise ConfigError("separation sweep needs packets referenced by the state")
    anchor = min(centers.values())
    if spec.moving_packets is not None:
        moving = list(spec.moving_packets)
        for name in moving:
            if name not in centers:
                raise ConfigError(f"moving packet {name!r} is not used by the state")
    else:
        moving = [name for name, c in centers.items() if c > anchor]
    if not moving:
        raise ConfigError("separation sweep found no packets to move")
    return moving, anchor


def point_config(spec: SweepSpec, value) -> ExperimentConfig:
    """Materialize one sweep point as a full experiment config."""
    data = copy.deepcopy(spec.base.data)
    if spec.parameter == "separation":
        moving, anchor = _moving_packet_names(spec)
        d = float(value)
        for p in data["packets"]:
            if p["name"] in moving:
                p["center"] = anchor + d
    elif spec.parameter == "region_size":
        size = int(value)
        if size < 1 or size >= data["model"]["sites"]:
            raise ConfigError(f"region size {size} invalid for {data['model']['sites']} sites")
        data["region"]["sites"] = list(range(size))
    elif spec.parameter == "coeff_ratio":
        terms = data["state"]["terms"]
        if len(terms) != 2:
            raise ConfigError("coeff_ratio sweeps need exactly two state terms")
        ratio = float(value)
        if ratio < 0:
            raise ConfigError("coefficient ratio must be non-negative")
        terms[0]["coefficient"] = [ratio, 0.0]
        terms[1]["coefficient"] = [1.0, 0.0]
    elif spec.parameter == "index_pattern":
        data = _apply_index_pattern(data, value)
    else:
        raise ConfigError(f"unknown sweep parameter {spec.parameter!r}")
    return validate_config(data)


def _apply_index_pattern(data: dict, value) -> dict:
    if isinstance(value, str):
        if value not in _INDEX_PATTERNS:
            raise ConfigError(
                f"unknown index pattern {value!r}; known: {sorted(_INDEX_PATTERNS)}"
            )
        pattern = _INDEX_PATTERNS[value]
    else:
        pattern = tuple(int(v) for v in value)
        if len(pattern) != 4:
            raise ConfigError("index patterns are 4-tuples (i, j, k, l)")
    terms = data["state"]["terms"]
    if len(terms) != 2 or any(len(t["operators"]) != 2 for t in terms):
        raise ConfigError("index_pattern sweeps need two terms of two operators each")
    if max(pattern) >= data["model"]["species"]:
        raise ConfigError(
            f"index pattern {pattern} needs at least {max(pattern) + 1} species"
        )
    packets = {p["name"]: p for p in data["packets"]}
    slots = [
        terms[0]["operators"][0],
        terms[0]["operators"][1],
        terms[1]["operators"][0],
        terms[1]["operators"][1],
    ]
    new_packets = []
    for slot, (name, species) in enumerate(zip(slots, pattern)):
        src = packets[name]
        new_packets.append({**src, "name": f"slot{slot}", "species": int(species)})
    data["packets"] = new_packets
    terms[0]["operators"] = ["slot0", "slot1"]
    terms[1]["operators"] = ["slot2", "slot3"]
    return data
