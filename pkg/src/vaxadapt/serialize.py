"""CSV/JSON encodings of toolkit results and the curve-spec JSON format.

CSV floats are written with 17 significant digits so that values round-trip
exactly; JSON uses Python's shortest round-trip representation.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, fields

from .bifurcation import BranchPoint, Diagram, SaddleNodeEvent, TangencyCurve, TangencyPoint
from .curves import FAMILIES, CurveFamilySpec, ValidationReport
from .dynamics import ModelParams, Trajectory, write_trajectory_csv
from .equilibria import Equilibrium, EquilibriumSet
from .errors import ParameterError

__all__ = [
    "CURVE_SPEC_SCHEMA",
    "parse_curve_spec",
    "curve_spec_to_dict",
    "fmt",
    "write_equilibria_csv",
    "equilibria_to_dict",
    "equilibria_from_dict",
    "write_diagram_csv",
    "write_events_csv",
    "diagram_to_dict",
    "diagram_from_dict",
    "write_tangency_csv",
    "tangency_to_dict",
    "write_surface_csv",
    "surface_to_dict",
    "write_validation_csv",
    "validation_to_dict",
    "write_trajectory_csv",
    "trajectory_to_dict",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


# ----------------------------------------------------------------------------
# curve specs

_FAMILY_ALIASES = {"convex-test": "convex_test", "rational-glue": "rational_glue"}
_NUMBER_KEYS = ("R0", "transition_lo", "transition_hi", "p_star")
_FAMILY_DEFAULTS = {
    "example1": {"R0": 5.0, "transition_lo": 0.7, "transition_hi": 0.8},
    "example2": {"transition_lo": 7 / 16, "transition_hi": 9 / 16},
    "convex_test": {"p_star": 0.8, "exponent": 3},
    "rational_glue": {"R0": 5.0, "transition_lo": 0.7, "transition_hi": 0.8},
}
# keys that a family actually reads
_FAMILY_KEYS = {
    "example1": {"family", "R0", "transition_lo", "transition_hi", "normalize"},
    "example2": {"family", "transition_lo", "transition_hi"},
    "convex_test": {"family", "p_star", "exponent"},
    "rational_glue": {"family", "R0", "transition_lo", "transition_hi", "normalize"},
}

CURVE_SPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "CurveFamilySpec",
    "type": "object",
    "additionalProperties": False,
    "required": ["family"],
    "properties": {
        "family": {"enum": list(FAMILIES) + list(_FAMILY_ALIASES)},
        "R0": {"type": "number", "exclusiveMinimum": 1},
        "transition_lo": {"type": "number", "minimum": 0, "maximum": 1},
        "transition_hi": {"type": "number", "minimum": 0, "maximum": 1},
        "exponent": {"type": "integer", "minimum": 2},
        "p_star": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "normalize": {"type": "boolean"},
    },
}


def parse_curve_spec(text) -> CurveFamilySpec:
    """Strictly parse a curve-spec JSON document (str, bytes or an already-decoded dict).

    Unknown keys, keys the family does not use, wrong types and range
    violations are rejected with a ParameterError naming the field path.
    """
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ParameterError(f"$: invalid JSON ({exc})") from None
    else:
        doc = text
    if not isinstance(doc, dict):
        raise ParameterError("$: curve spec must be a JSON object")
    unknown = sorted(set(doc) - set(CURVE_SPEC_SCHEMA["properties"]))
    if unknown:
        raise ParameterError(f"$.{unknown[0]}: unknown key")
    if "family" not in doc:
        raise ParameterError("$.family: required")
    family = doc["family"]
    if not isinstance(family, str):
        raise ParameterError("$.family: must be a string")
    family = _FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ParameterError(f"$.family: unknown curve family {doc['family']!r}; expected one of {FAMILIES}")
    extra = sorted(set(doc) - _FAMILY_KEYS[family])
    if extra:
        raise ParameterError(f"$.{extra[0]}: not used by family {family!r}")
    for key in _NUMBER_KEYS:
        if key in doc and (isinstance(doc[key], bool) or not isinstance(doc[key], (int, float))):
            raise ParameterError(f"$.{key}: must be a number")
    if "exponent" in doc and (isinstance(doc["exponent"], bool) or not isinstance(doc["exponent"], int)):
        raise ParameterError("$.exponent: must be an integer")
    if "normalize" in doc and not isinstance(doc["normalize"], bool):
        raise ParameterError("$.normalize: must be a boolean")

    values = dict(_FAMILY_DEFAULTS[family])
    values.update({k: v for k, v in doc.items() if k != "family"})
    if "R0" in values and not values["R0"] > 1:
        raise ParameterError(f"$.R0: must be > 1, got {values['R0']!r}")
    if family == "example1":
        for key, fixed in _FAMILY_DEFAULTS["example1"].items():
            if values[key] != fixed:
                raise ParameterError(f"$.{key}: example1 fixes {key} = {fixed}; use family rational_glue")
    try:
        return CurveFamilySpec(family=family, **{k: (float(v) if k in _NUMBER_KEYS else v)
                                                 for k, v in values.items()})
    except ParameterError as exc:
        raise ParameterError(f"$.{exc}") from None


def curve_spec_to_dict(spec: CurveFamilySpec) -> dict:
    keys = _FAMILY_KEYS[spec.family]
    return {f.name: getattr(spec, f.name) for f in fields(spec) if f.name in keys}


# ----------------------------------------------------------------------------
# equilibria

def write_equilibria_csv(eqs: EquilibriumSet, fh) -> None:
    w = _writer(fh)
    w.writerow(["r", "eps", "P", "f_prime", "class"])
    for e in eqs:
        w.writerow([fmt(eqs.params.r), fmt(eqs.params.eps), fmt(e.P), fmt(e.f_prime), e.classification])


def equilibria_to_dict(eqs: EquilibriumSet) -> dict:
    return {
        "curve": eqs.curve_label,
        "r": eqs.params.r,
        "eps": eqs.params.eps,
        "equilibria": [{"P": e.P, "f_prime": e.f_prime, "class": e.classification} for e in eqs],
    }


def equilibria_from_dict(doc: dict) -> EquilibriumSet:
    eqs = tuple(Equilibrium(float(e["P"]), float(e["f_prime"]), e["class"]) for e in doc["equilibria"])
    return EquilibriumSet(eqs, ModelParams(doc["r"], doc["eps"]), doc["curve"])


# ----------------------------------------------------------------------------
# diagrams

def write_diagram_csv(diagram: Diagram, fh, source: str = "solver") -> None:
    """Diagram rows; `source` picks solver points or the closed-form branch."""
    if source not in ("solver", "closed_form"):
        raise ParameterError(f"source must be 'solver' or 'closed_form', got {source!r}")
    pts = diagram.points if source == "solver" else diagram.closed_form
    w = _writer(fh)
    w.writerow(["axis", "fixed_value", "param", "P", "class"])
    for p in pts:
        w.writerow([diagram.axis, fmt(diagram.fixed_value), fmt(p.param), fmt(p.P), p.classification])


def write_events_csv(diagram: Diagram, fh) -> None:
    w = _writer(fh)
    w.writerow(["axis", "fixed_value", "param", "P"])
    for e in diagram.events:
        w.writerow([diagram.axis, fmt(diagram.fixed_value), fmt(e.param), fmt(e.P)])


def _points(pts):
    return [{"param": p.param, "P": p.P, "class": p.classification} for p in pts]


def diagram_to_dict(diagram: Diagram) -> dict:
    return {
        "axis": diagram.axis,
        "fixed_value": diagram.fixed_value,
        "points": _points(diagram.points),
        "closed_form": _points(diagram.closed_form),
        "events": [{"param": e.param, "P": e.P} for e in diagram.events],
    }


def diagram_from_dict(doc: dict) -> Diagram:
    def pts(rows):
        return [BranchPoint(float(p["param"]), float(p["P"]), p["class"]) for p in rows]

    events = [SaddleNodeEvent(float(e["param"]), float(e["P"])) for e in doc.get("events", [])]
    return Diagram(doc["axis"], float(doc["fixed_value"]), pts(doc["points"]),
                   pts(doc.get("closed_form", [])), events)


# ----------------------------------------------------------------------------
# tangency curve and surface

def write_tangency_csv(tc: TangencyCurve, fh) -> None:
    w = _writer(fh)
    w.writerow(["P", "eps", "r", "feasible"])
    for t in tc:
        w.writerow([fmt(t.P), fmt(t.eps), fmt(t.r), "true" if t.feasible else "false"])


def tangency_to_dict(tc: TangencyCurve) -> dict:
    return {"points": [asdict(t) for t in tc], "skipped": tc.skipped}


def tangency_from_dict(doc: dict) -> TangencyCurve:
    return TangencyCurve(tuple(TangencyPoint(**t) for t in doc["points"]), doc.get("skipped", 0))


def write_surface_csv(samples, fh) -> None:
    w = _writer(fh)
    w.writerow(["P", "eps", "r"])
    for P, eps, r in samples:
        w.writerow([fmt(P), fmt(eps), fmt(r)])


def surface_to_dict(samples) -> dict:
    return {"samples": [{"P": float(P), "eps": float(e), "r": float(r)} for P, e, r in samples]}


# ----------------------------------------------------------------------------
# validation and trajectories

def write_validation_csv(report: ValidationReport, fh) -> None:
    w = _writer(fh)
    w.writerow(["assumption", "description", "passed", "worst_violation"])
    for c in report.checks:
        w.writerow([c.number, c.description, "true" if c.passed else "false", fmt(c.worst_violation)])


def validation_to_dict(report: ValidationReport) -> dict:
    return {
        "curve": report.curve_label,
        "grid_n": report.grid_n,
        "passed": report.passed,
        "checks": [{"assumption": c.number, "description": c.description, "passed": c.passed,
                    "worst_violation": c.worst_violation} for c in report.checks],
    }


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "curve": traj.curve_label,
        "r": traj.params.r,
        "eps": traj.params.eps,
        "max_clamp": traj.max_clamp,
        "samples": [{"t": float(t), "P": float(p)} for t, p in zip(traj.times, traj.states)],
    }
