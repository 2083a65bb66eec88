"""Experiment JSON documents: parsing, serialization and shipped examples.

One document fully describes a model configuration. The CLI and the HTTP
service share this code path, so a given document produces the same
experiment (and therefore the same results for the same seed) everywhere.

CCU document (times in hours):

    {"model": "ccu", "n_beds": 24, "turnaround_hours": 5,
     "arrivals": {"AandE": {"family": "exponential", "mean": 22.72}, ...},
     "los": {...}, "run_length_hours": 8760, "warm_up_hours": 730,
     "replications": 5, "seed": 0}

Stroke document (times in days):

    {"model": "stroke",
     "types": {"Stroke": {"asu_arrival": {...}, "asu_los": {...},
                          "post_asu": {"Rehab": p1, "ESD": p2, "Other": p3},
                          "rehab_external_arrival": {...}, "rehab_los": {...},
                          "post_rehab": {"ESD": q1, "Other": q2}}, ...},
     "run_length_days": 1825, "warm_up_days": 365, "audit_interval_days": 1,
     "capacity_range": {"asu": [9, 14], "rehab": [10, 16]},
     "replications": 5, "seed": 0}

Optional in both: "audit_interval_<unit>", "trace", "seed".
"""

from __future__ import annotations

import copy
import dataclasses
import json
from collections.abc import Mapping
from typing import Optional

from .ccu import ALL_SOURCES, CcuExperiment
from .errors import ConfigError
from .experiment import Experiment
from .sampling import distribution_from_json
from .stroke import PATIENT_TYPES, PatientTypeParams, StrokeExperiment

MODEL_IDS = ("ccu", "stroke")


def _require(doc: Mapping, key: str, kind, path: str):
    if key not in doc:
        raise ConfigError(f"{path}{key}" if not path else f"{path}.{key}", "missing required field")
    value = doc[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}" if path else key,
                          f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _optional_number(doc: Mapping, key: str, default: float) -> float:
    if key not in doc:
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected number, got {type(value).__name__}")
    return float(value)


def _common_fields(doc: Mapping, unit: str) -> dict:
    run_length = _require(doc, f"run_length_{unit}", float, "")
    # warm-up must be stated explicitly: splitting the run into warm-up and
    # collection is a modelling decision we refuse to default
    warm_up = _require(doc, f"warm_up_{unit}", float, "")
    fields = {
        "run_length": run_length,
        "warm_up": warm_up,
        "audit_interval": _optional_number(doc, f"audit_interval_{unit}", 1.0),
        "master_seed": int(_optional_number(doc, "seed", 0)),
        "trace": bool(doc.get("trace", False)),
    }
    if "replications" in doc:
        reps = doc["replications"]
        if isinstance(reps, bool) or not isinstance(reps, int):
            raise ConfigError("replications", f"expected integer, got {type(reps).__name__}")
        fields["n_replications"] = reps
    return fields


def ccu_from_document(doc: Mapping) -> CcuExperiment:
    arrivals_doc = _require(doc, "arrivals", Mapping, "")
    los_doc = _require(doc, "los", Mapping, "")
    arrivals = {}
    los = {}
    for source in ALL_SOURCES:
        if source not in arrivals_doc:
            raise ConfigError(f"arrivals.{source}", "missing inter-arrival distribution")
        arrivals[source] = distribution_from_json(arrivals_doc[source], f"arrivals.{source}")
        if source not in los_doc:
            raise ConfigError(f"los.{source}", "missing length-of-stay distribution")
        los[source] = distribution_from_json(los_doc[source], f"los.{source}")
    n_beds = doc.get("n_beds", 24)
    if isinstance(n_beds, bool) or not isinstance(n_beds, int):
        raise ConfigError("n_beds", f"expected integer, got {type(n_beds).__name__}")
    exp = CcuExperiment(
        n_beds=n_beds,
        turnaround=_optional_number(doc, "turnaround_hours", 5.0),
        arrivals=arrivals,
        los=los,
        **_common_fields(doc, "hours"),
    )
    exp.validate()
    return exp


def stroke_from_document(doc: Mapping) -> StrokeExperiment:
    types_doc = _require(doc, "types", Mapping, "")
    types = {}
    for label, type_doc in types_doc.items():
        path = f"types.{label}"
        if label not in PATIENT_TYPES:
            raise ConfigError(path, f"unknown patient type; expected one of {list(PATIENT_TYPES)}")
        if not isinstance(type_doc, Mapping):
            raise ConfigError(path, "expected an object")
        for required in ("asu_arrival", "asu_los", "post_asu", "rehab_los"):
            if required not in type_doc:
                raise ConfigError(f"{path}.{required}", "missing required field")
        post_asu = type_doc["post_asu"]
        if not isinstance(post_asu, Mapping):
            raise ConfigError(f"{path}.post_asu", "expected an object of destination probabilities")
        rehab_external = None
        if type_doc.get("rehab_external_arrival") is not None:
            rehab_external = distribution_from_json(
                type_doc["rehab_external_arrival"], f"{path}.rehab_external_arrival"
            )
        post_rehab = type_doc.get("post_rehab", {"Other": 1.0})
        if not isinstance(post_rehab, Mapping):
            raise ConfigError(f"{path}.post_rehab", "expected an object of destination probabilities")
        types[label] = PatientTypeParams(
            asu_arrival=distribution_from_json(type_doc["asu_arrival"], f"{path}.asu_arrival"),
            asu_los=distribution_from_json(type_doc["asu_los"], f"{path}.asu_los"),
            post_asu={k: float(v) for k, v in post_asu.items()},
            rehab_los=distribution_from_json(type_doc["rehab_los"], f"{path}.rehab_los"),
            rehab_external_arrival=rehab_external,
            post_rehab={k: float(v) for k, v in post_rehab.items()},
        )
    kwargs = _common_fields(doc, "days")
    if "capacity_range" in doc:
        ranges_doc = doc["capacity_range"]
        if not isinstance(ranges_doc, Mapping):
            raise ConfigError("capacity_range", "expected an object of [low, high] pairs")
        capacity_range = {}
        for unit, bounds in ranges_doc.items():
            if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
                raise ConfigError(f"capacity_range.{unit}", f"expected [low, high], got {bounds!r}")
            capacity_range[unit] = (bounds[0], bounds[1])
        kwargs["capacity_range"] = capacity_range
    exp = StrokeExperiment(types=types, **kwargs)
    exp.validate()
    return exp


def load_experiment(doc: Mapping) -> Experiment:
    """Parse a configuration document into a validated experiment."""
    if not isinstance(doc, Mapping):
        raise ConfigError("", f"expected a configuration object, got {type(doc).__name__}")
    model = doc.get("model")
    if model == "ccu":
        return ccu_from_document(doc)
    if model == "stroke":
        return stroke_from_document(doc)
    raise ConfigError("model", f"unknown model {model!r}; expected one of {list(MODEL_IDS)}")


def load_experiment_file(path) -> Experiment:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON in {path}: {exc}") from exc
    return load_experiment(doc)


def experiment_to_document(exp: Experiment) -> dict:
    """Serialize an experiment back to its JSON document form."""
    if isinstance(exp, CcuExperiment):
        return {
            "model": "ccu",
            "n_beds": exp.n_beds,
            "turnaround_hours": exp.turnaround,
            "arrivals": {s: exp.arrivals[s].to_json() for s in ALL_SOURCES},
            "los": {s: exp.los[s].to_json() for s in ALL_SOURCES},
            "run_length_hours": exp.run_length,
            "warm_up_hours": exp.warm_up,
            "audit_interval_hours": exp.audit_interval,
            "replications": exp.n_replications,
            "seed": exp.master_seed,
            "trace": exp.trace,
        }
    if isinstance(exp, StrokeExperiment):
        types = {}
        for label in PATIENT_TYPES:
            if label not in exp.types:
                continue
            params = exp.types[label]
            type_doc = {
                "asu_arrival": params.asu_arrival.to_json(),
                "asu_los": params.asu_los.to_json(),
                "post_asu": dict(params.post_asu),
                "rehab_los": params.rehab_los.to_json(),
                "post_rehab": dict(params.post_rehab),
            }
            if params.rehab_external_arrival is not None:
                type_doc["rehab_external_arrival"] = params.rehab_external_arrival.to_json()
            types[label] = type_doc
        return {
            "model": "stroke",
            "types": types,
            "run_length_days": exp.run_length,
            "warm_up_days": exp.warm_up,
            "audit_interval_days": exp.audit_interval,
            "capacity_range": {unit: list(bounds) for unit, bounds in exp.capacity_range.items()},
            "replications": exp.n_replications,
            "seed": exp.master_seed,
            "trace": exp.trace,
        }
    raise TypeError(f"cannot serialize experiment of type {type(exp).__name__}")


def apply_overrides(
    exp: Experiment,
    seed: Optional[int] = None,
    replications: Optional[int] = None,
    run_length: Optional[float] = None,
    warm_up: Optional[float] = None,
    trace: Optional[bool] = None,
) -> Experiment:
    """Apply command-line overrides and re-validate (overrides are checked
    exactly like config-file values)."""
    changes = {}
    if seed is not None:
        changes["master_seed"] = seed
    if replications is not None:
        changes["n_replications"] = replications
    if run_length is not None:
        changes["run_length"] = run_length
    if warm_up is not None:
        changes["warm_up"] = warm_up
    if trace is not None:
        changes["trace"] = trace
    if not changes:
        return exp
    new = dataclasses.replace(exp, **changes)
    new.validate()
    return new


# --- Shipped example documents -------------------------------------------
#
# The arrival rates below for the CCU's five unplanned sources are the
# published rates for this system. Everything else marked "illustrative"
# (all lengths of stay, the elective inter-arrival mean, stroke pathway
# rates and routing) is NOT calibrated against any real unit: the original
# studies' distributions are not publicly available, so these are plausible
# placeholder values chosen to exercise the models. Replace them with local
# data before drawing operational conclusions.
#
# The elective mean of 17.87 h is back-solved so expected total arrivals
# are roughly 1650 per 8760 h on top of the unplanned rate sum.

_CCU_EXAMPLE = {
    "model": "ccu",
    "n_beds": 24,
    "turnaround_hours": 5,
    "arrivals": {
        "AandE": {"family": "exponential", "mean": 22.72},
        "Ward": {"family": "exponential", "mean": 26.0},
        "EmergencySurgery": {"family": "exponential", "mean": 37.0},
        "OtherHospital": {"family": "exponential", "mean": 47.2},
        "XRay": {"family": "exponential", "mean": 575.0},
        "Elective": {"family": "exponential", "mean": 17.87},
    },
    "los": {
        "AandE": {"family": "lognormal", "mean": 130.0, "sd": 200.0},
        "Ward": {"family": "lognormal", "mean": 160.0, "sd": 240.0},
        "EmergencySurgery": {"family": "lognormal", "mean": 150.0, "sd": 225.0},
        "OtherHospital": {"family": "lognormal", "mean": 200.0, "sd": 300.0},
        "XRay": {"family": "lognormal", "mean": 100.0, "sd": 150.0},
        "Elective": {"family": "lognormal", "mean": 60.0, "sd": 90.0},
    },
    "run_length_hours": 8760,
    "warm_up_hours": 730,
    "audit_interval_hours": 1,
    "replications": 5,
    "seed": 0,
}

_STROKE_EXAMPLE = {
    "model": "stroke",
    "types": {
        "Stroke": {
            "asu_arrival": {"family": "exponential", "mean": 1.2},
            "asu_los": {"family": "lognormal", "mean": 7.4, "sd": 8.6},
            "post_asu": {"Rehab": 0.24, "ESD": 0.13, "Other": 0.63},
            "rehab_external_arrival": {"family": "exponential", "mean": 21.8},
            "rehab_los": {"family": "lognormal", "mean": 28.4, "sd": 27.2},
            "post_rehab": {"ESD": 0.4, "Other": 0.6},
        },
        "TIA": {
            "asu_arrival": {"family": "exponential", "mean": 9.3},
            "asu_los": {"family": "lognormal", "mean": 1.8, "sd": 5.0},
            "post_asu": {"Rehab": 0.01, "ESD": 0.01, "Other": 0.98},
            "rehab_los": {"family": "lognormal", "mean": 18.7, "sd": 23.5},
            "post_rehab": {"Other": 1.0},
        },
        "ComplexNeurological": {
            "asu_arrival": {"family": "exponential", "mean": 3.6},
            "asu_los": {"family": "lognormal", "mean": 4.0, "sd": 5.0},
            "post_asu": {"Rehab": 0.11, "ESD": 0.05, "Other": 0.84},
            "rehab_external_arrival": {"family": "exponential", "mean": 31.7},
            "rehab_los": {"family": "lognormal", "mean": 27.6, "sd": 28.4},
            "post_rehab": {"ESD": 0.09, "Other": 0.91},
        },
        "Other": {
            "asu_arrival": {"family": "exponential", "mean": 3.2},
            "asu_los": {"family": "lognormal", "mean": 3.8, "sd": 5.2},
            "post_asu": {"Rehab": 0.05, "ESD": 0.1, "Other": 0.85},
            "rehab_external_arrival": {"family": "exponential", "mean": 28.6},
            "rehab_los": {"family": "lognormal", "mean": 16.1, "sd": 14.1},
            "post_rehab": {"ESD": 0.12, "Other": 0.88},
        },
    },
    "run_length_days": 1825,
    "warm_up_days": 365,
    "audit_interval_days": 1,
    "capacity_range": {"asu": [9, 14], "rehab": [10, 16]},
    "replications": 5,
    "seed": 0,
}


def example_document(model_id: str) -> dict:
    """A deep copy of the shipped example document for ``model_id``."""
    if model_id == "ccu":
        return copy.deepcopy(_CCU_EXAMPLE)
    if model_id == "stroke":
        return copy.deepcopy(_STROKE_EXAMPLE)
    raise KeyError(f"unknown model {model_id!r}; expected one of {list(MODEL_IDS)}")
