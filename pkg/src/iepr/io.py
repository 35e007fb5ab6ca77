"""JSON/CSV file formats, schema validation and the run manifest header."""
from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .circuit import BareParameters, CircuitSpec, CouplingKind, CouplingSpec, ElementSpec
from .errors import FormatError
from .fieldproc import FieldExport, FieldSamples, PathSpec
from .modal import NormalModeSet
from .nonlinear import NonlinearParameters

COMMANDS = ("synth", "extract", "fields", "nonlinear", "reduce", "sweep", "nms", "verify")


@dataclass
class RunManifest:
    command: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    seed: int = 0
    version: str = __version__

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise FormatError(f"unknown command {self.command!r}")

    def to_dict(self):
        return asdict(self)


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": _num}
_mat = {"type": "array", "items": _vec}
_manifest = {"type": "object"}

CIRCUIT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["elements"],
    "properties": {
        "manifest": _manifest,
        "coupling_kind": {"enum": ["capacitive", "inductive"]},
        "elements": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "C_fF"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["transmon", "coupler", "resonator", "cavity", "other"]},
                    "C_fF": _pos,
                    "L_nH": _pos,
                    "LJ_nH": _pos,
                    "has_nodes": {"type": "boolean"},
                },
            },
        },
        "couplings": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["a", "b"],
                "properties": {
                    "a": {"type": "string"},
                    "b": {"type": "string"},
                    "C_mutual_fF": {"type": "number", "minimum": 0},
                    "M_mutual_nH": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}

MODES_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["elements", "modes", "iepr"],
    "properties": {
        "manifest": _manifest,
        "provenance": {"enum": ["synthetic", "field_export"]},
        "elements": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "modes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["freq_MHz"],
                "properties": {"freq_MHz": _pos},
            },
        },
        "iepr": {"type": "array", "items": {"type": "array", "items": {"type": ["number", "null"]}}},
        "signs": {"type": "array", "items": {"type": "array", "items": {"enum": [1, -1, None]}}},
        "junctions_nH": {"type": "object", "additionalProperties": _pos},
    },
}

FIELDS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["modes", "paths", "samples"],
    "properties": {
        "manifest": _manifest,
        "modes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["freq_MHz", "total_inductive_energy_J"],
                "properties": {"freq_MHz": _pos, "total_inductive_energy_J": _pos},
            },
        },
        "paths": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["element", "polyline_mm"],
                "properties": {
                    "element": {"type": "string"},
                    "polyline_mm": {
                        "type": "array",
                        "minItems": 2,
                        "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                    },
                    "orientation_note": {"type": "string"},
                },
            },
        },
        "nodeless": {"type": "array", "items": {"type": "string"}},
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["mode", "element", "points"],
                "properties": {
                    "mode": {"type": "integer", "minimum": 0},
                    "element": {"type": "string"},
                    "points": {
                        "type": "array",
                        "minItems": 2,
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["s_mm", "E_Vpm"],
                            "properties": {
                                "s_mm": _num,
                                "E_Vpm": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                            },
                        },
                    },
                },
            },
        },
    },
}

_nonlinear_section = {
    "type": "object",
    "required": ["omega_prime_nl_MHz", "alpha_prime_MHz", "chi_MHz", "method"],
    "properties": {
        "names": {"type": "array", "items": {"type": "string"}},
        "omega_prime_nl_MHz": _vec,
        "alpha_prime_MHz": _vec,
        "chi_MHz": _mat,
        "method": {"enum": ["IEPR", "EPR_formula", "oracle"]},
    },
}

PARAMETERS_SCHEMA = {
    "type": "object",
    "required": ["bare"],
    "properties": {
        "manifest": _manifest,
        "bare": {
            "type": "object",
            "additionalProperties": False,
            "required": ["names", "omega_MHz", "g_MHz"],
            "properties": {
                "names": {"type": "array", "items": {"type": "string"}},
                "omega_MHz": {"type": "array", "items": {"type": ["number", "null"]}},
                "g_MHz": {"type": "array", "items": {"type": "array", "items": {"type": ["number", "null"]}}},
                "alpha_MHz": _vec,
                "LJ_nH": _vec,
            },
        },
        "U": _mat,
        "omega_prime_MHz": _vec,
        "residual": _num,
        "assignment": {"type": "array", "items": {"type": "string"}},
        "unresolved": {"type": "array", "items": {"type": "string"}},
        "normal": _nonlinear_section,
        "oracle": _nonlinear_section,
        "reduced": {"type": "object"},
    },
}


def _where(err) -> str:
    path = "/".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def validate(doc: Any, schema: dict, what: str) -> None:
    """Schema check reporting the first failing field by its JSON path."""
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise FormatError(f"{what}: {err.message} at {_where(err)}")


def load_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _clean(obj):
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [_clean(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not np.isfinite(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, NaN as null."""
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def write_json(path, doc, manifest: RunManifest | None = None) -> None:
    doc = dict(doc)
    if manifest is not None:
        doc["manifest"] = manifest.to_dict()
    Path(path).write_text(dumps(doc))


# circuit.json

def circuit_from_json(doc) -> CircuitSpec:
    validate(doc, CIRCUIT_SCHEMA, "circuit")
    elements = []
    for i, el in enumerate(doc["elements"]):
        if ("L_nH" in el) == ("LJ_nH" in el):
            raise FormatError(f"circuit: element {el['name']!r} needs exactly one of L_nH or LJ_nH at elements/{i}")
        elements.append(ElementSpec(el["name"], el["C_fF"], el.get("L_nH"), el.get("LJ_nH"),
                                    el.get("kind", "other"), el.get("has_nodes", True)))
    couplings = []
    for cp in doc.get("couplings", []):
        couplings.append(CouplingSpec(cp["a"], cp["b"], cp.get("C_mutual_fF"), cp.get("M_mutual_nH")))
    return CircuitSpec(tuple(elements), tuple(couplings), doc.get("coupling_kind", "capacitive"))


def circuit_to_json(circuit: CircuitSpec) -> dict:
    elements = []
    for el in circuit.elements:
        d = {"name": el.name, "kind": el.kind.value, "C_fF": el.C, "has_nodes": el.has_nodes}
        d["LJ_nH" if el.is_junction else "L_nH"] = el.inductance
        elements.append(d)
    key = "C_mutual_fF" if circuit.coupling_kind is CouplingKind.CAPACITIVE else "M_mutual_nH"
    couplings = [{"a": c.a, "b": c.b, key: c.value} for c in circuit.couplings]
    return {"coupling_kind": circuit.coupling_kind.value, "elements": elements, "couplings": couplings}


# modes.json

def modes_from_json(doc) -> tuple[NormalModeSet, dict]:
    """Normal-mode set and the optional junction-inductance map."""
    validate(doc, MODES_SCHEMA, "modes")
    n = len(doc["elements"])
    if len(doc["modes"]) != n:
        raise FormatError(f"modes: {len(doc['modes'])} modes for {n} elements")
    r = np.array([[np.nan if x is None else x for x in row] for row in doc["iepr"]], dtype=float)
    if r.shape != (n, n):
        raise FormatError(f"modes: iepr must be {n}x{n}")
    s = None
    if "signs" in doc:
        s = np.array([[np.nan if x is None else x for x in row] for row in doc["signs"]], dtype=float)
        if s.shape != (n, n):
            raise FormatError(f"modes: signs must be {n}x{n}")
    w = [m["freq_MHz"] for m in doc["modes"]]
    modes = NormalModeSet(tuple(doc["elements"]), w, r, s, doc.get("provenance", "synthetic"))
    return modes, dict(doc.get("junctions_nH", {}))


def modes_to_json(modes: NormalModeSet, junctions: dict | None = None) -> dict:
    doc = {
        "provenance": modes.provenance.value,
        "elements": list(modes.names),
        "modes": [{"freq_MHz": float(w)} for w in modes.omega_prime],
        "iepr": modes.r,
    }
    if modes.s is not None:
        doc["signs"] = [[None if np.isnan(x) else int(x) for x in row] for row in modes.s]
    if junctions:
        doc["junctions_nH"] = junctions
    return doc


# fields.json

def fields_from_json(doc) -> tuple[FieldExport, list[str]]:
    validate(doc, FIELDS_SCHEMA, "fields")
    paths = {}
    for p in doc["paths"]:
        if p["element"] in paths:
            raise FormatError(f"fields: duplicate path for {p['element']!r}")
        paths[p["element"]] = PathSpec(p["element"], np.array(p["polyline_mm"]), p.get("orientation_note", ""))
    n_modes = len(doc["modes"])
    samples = {}
    for i, smp in enumerate(doc["samples"]):
        if smp["element"] not in paths:
            raise FormatError(f"fields: samples reference element {smp['element']!r} without a path at samples/{i}")
        if smp["mode"] >= n_modes:
            raise FormatError(f"fields: mode index {smp['mode']} out of range at samples/{i}")
        s = [pt["s_mm"] for pt in smp["points"]]
        E = [pt["E_Vpm"] for pt in smp["points"]]
        samples[(smp["mode"], smp["element"])] = FieldSamples(s, E)
    export = FieldExport(
        [m["freq_MHz"] for m in doc["modes"]],
        [m["total_inductive_energy_J"] for m in doc["modes"]],
        paths,
        samples,
    )
    return export, list(doc.get("nodeless", []))


def fields_to_json(export: FieldExport, nodeless=()) -> dict:
    return {
        "modes": [{"freq_MHz": f, "total_inductive_energy_J": e}
                  for f, e in zip(export.freq_MHz, export.total_energy_J)],
        "paths": [{"element": p.element, "polyline_mm": p.polyline, "orientation_note": p.orientation_note}
                  for p in export.paths.values()],
        "nodeless": list(nodeless),
        "samples": [
            {"mode": m, "element": name,
             "points": [{"s_mm": s, "E_Vpm": E} for s, E in zip(smp.s, smp.E)]}
            for (m, name), smp in sorted(export.samples.items())
        ],
    }


# parameters.json

def nonlinear_to_json(p: NonlinearParameters) -> dict:
    return {
        "names": list(p.names),
        "omega_prime_nl_MHz": p.omega_prime_nl,
        "alpha_prime_MHz": p.alpha_prime,
        "chi_MHz": p.chi,
        "method": p.method.value,
    }


def nonlinear_from_json(doc) -> NonlinearParameters:
    return NonlinearParameters(doc.get("names", ()), doc["omega_prime_nl_MHz"], doc["alpha_prime_MHz"],
                               doc["chi_MHz"], doc["method"])


def bare_to_json(bare: BareParameters) -> dict:
    return {"names": list(bare.names), "omega_MHz": bare.omega, "g_MHz": bare.g,
            "alpha_MHz": bare.alpha, "LJ_nH": bare.L_J}


def bare_from_json(doc) -> BareParameters:
    b = doc["bare"] if "bare" in doc else doc
    omega = np.array([np.nan if x is None else x for x in b["omega_MHz"]], dtype=float)
    g = np.array([[np.nan if x is None else x for x in row] for row in b["g_MHz"]], dtype=float)
    if np.any(np.isnan(omega)) or np.any(np.isnan(g)):
        raise FormatError("parameters: bare model has unresolved entries")
    return BareParameters(tuple(b["names"]), omega, g, b.get("alpha_MHz"), b.get("LJ_nH"))


def load_parameters(path) -> dict:
    doc = load_json(path)
    validate(doc, PARAMETERS_SCHEMA, "parameters")
    return doc


# CSV tables

def _csv(rows, header, manifest: RunManifest | None) -> str:
    buf = _io.StringIO()
    if manifest is not None:
        buf.write("# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return "" if x is None or not np.isfinite(x) else f"{x:.2f}"


def bare_table_csv(bare: BareParameters, manifest: RunManifest | None = None) -> str:
    """Bare frequencies on the diagonal, couplings off it (MHz)."""
    t = bare.g + np.diag(bare.omega)
    rows = [[name] + [_fmt(x) for x in t[i]] for i, name in enumerate(bare.names)]
    return _csv(rows, ["MHz"] + list(bare.names), manifest)


def nonlinear_table_csv(params: list[NonlinearParameters], manifest: RunManifest | None = None) -> str:
    """One row per method: renormalized frequencies, self-Kerr, off-diagonal cross-Kerr."""
    names = params[0].names
    n = len(names)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    header = (["method"] + [f"omega_nl_{a}" for a in names] + [f"alpha_{a}" for a in names]
              + [f"chi_{names[i]}_{names[j]}" for i, j in pairs])
    rows = []
    for p in params:
        p = p.reorder(names) if set(p.names) == set(names) else p
        rows.append([p.method.value] + [_fmt(x) for x in p.omega_prime_nl]
                    + [_fmt(x) for x in p.alpha_prime] + [_fmt(p.chi[i, j]) for i, j in pairs])
    return _csv(rows, header, manifest)


def dual_table_csv(bare: BareParameters, normal: NonlinearParameters, manifest: RunManifest | None = None) -> str:
    """Bare and normal representations side by side, one row per element/mode."""
    rows = []
    for i, name in enumerate(bare.names):
        j = normal.names.index(name) if name in normal.names else i
        rows.append([name, _fmt(bare.omega[i]), _fmt(bare.alpha[i]),
                     _fmt(normal.omega_prime_nl[j]), _fmt(normal.alpha_prime[j])])
    return _csv(rows, ["element", "omega_MHz", "alpha_MHz", "omega_prime_nl_MHz", "alpha_prime_MHz"], manifest)


def sweep_csv(sweep, manifest: RunManifest | None = None) -> str:
    rows = [[repr(x), repr(v) if np.isfinite(v) else "", f] for x, v, f in sweep.rows()]
    text = _csv(rows, ["param_value", "g_eff_MHz", "flag"], manifest)
    if sweep.zero_crossings:
        text += "# zero_crossings_nH: " + ",".join(repr(float(x)) for x in sweep.zero_crossings) + "\n"
    return text
