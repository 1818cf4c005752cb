"""JSON documents: netlists, pole-residue impedances, reports and sweeps.

Quantities are numbers in SI units or strings ``"<number> <unit>"`` with a
unit from :data:`UNITS`. Frequencies in documents are linear (Hz); they are
converted to rad/s on load.
"""

from __future__ import annotations

import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .circuits import Example1Parameters
from .core import (DispersiveReport, DrivePort, Element, Junction, LinearNetwork,
                   PoleResidueImpedance)
from .errors import InvalidInputError, ParseError

__all__ = [
    "UNITS",
    "parse_quantity",
    "Document",
    "document_from_dict",
    "loads_document",
    "load_document",
    "network_from_dict",
    "network_to_dict",
    "PoleResidueInput",
    "pole_residue_from_dict",
    "pole_residue_to_dict",
    "example1_from_dict",
    "report_to_json_dict",
    "dumps_json",
    "write_csv",
]

_TWO_PI = 2.0 * math.pi

#: unit suffix -> (quantity kind, SI scale)
UNITS: dict[str, tuple[str, float]] = {
    "F": ("capacitance", 1.0), "nF": ("capacitance", 1e-9), "pF": ("capacitance", 1e-12),
    "fF": ("capacitance", 1e-15), "aF": ("capacitance", 1e-18),
    "H": ("inductance", 1.0), "uH": ("inductance", 1e-6), "nH": ("inductance", 1e-9),
    "pH": ("inductance", 1e-12),
    "Hz": ("frequency", 1.0), "kHz": ("frequency", 1e3), "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "Ohm": ("resistance", 1.0), "kOhm": ("resistance", 1e3),
    "K": ("temperature", 1.0), "mK": ("temperature", 1e-3),
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)?\s*$")


def parse_quantity(value: Any, kind: str, path: str = "") -> float:
    """SI value of a number or a ``"<number> <unit>"`` string of ``kind``."""
    if isinstance(value, bool):
        raise ParseError(f"expected a {kind}, got a boolean", path=path)
    if isinstance(value, (int, float)):
        v = float(value)
    elif isinstance(value, str):
        m = _QTY.match(value)
        if not m:
            raise ParseError(f"cannot read {kind} from {value!r}", path=path)
        v = float(m.group(1))
        unit = m.group(2)
        if unit is not None:
            if unit not in UNITS:
                raise ParseError(f"unknown unit {unit!r}", path=path)
            ukind, scale = UNITS[unit]
            if ukind != kind:
                raise ParseError(f"unit {unit!r} is a {ukind}, expected a {kind}", path=path)
            v *= scale
    else:
        raise ParseError(f"expected a {kind}, got {type(value).__name__}", path=path)
    if not math.isfinite(v):
        raise ParseError(f"{kind} must be finite", path=path)
    return v


def _check_keys(obj: Any, path: str, required: set[str], optional: set[str],
                strict: bool) -> None:
    if not isinstance(obj, Mapping):
        raise ParseError("expected an object", path=path)
    missing = required - set(obj)
    if missing:
        raise ParseError(f"missing keys {sorted(missing)}", path=path)
    if strict:
        extra = set(obj) - required - optional
        if extra:
            raise ParseError(f"unknown keys {sorted(extra)}", path=path)


def _list(obj: Any, path: str) -> list:
    if not isinstance(obj, list):
        raise ParseError("expected a list", path=path)
    return obj


def _nodes(obj: Any, path: str) -> tuple[str, str]:
    if not (isinstance(obj, list) and len(obj) == 2 and all(isinstance(n, str) for n in obj)):
        raise ParseError("nodes must be a list of two names", path=path)
    return obj[0], obj[1]


def _wrap(fn, path: str):
    try:
        return fn()
    except ParseError:
        raise
    except InvalidInputError as exc:
        raise ParseError(str(exc), path=path) from exc


def _drive_from(d: Mapping, path: str, strict: bool, with_nodes: bool) -> DrivePort:
    req = {"name", "Z0"} | ({"nodes"} if with_nodes else set())
    _check_keys(d, path, req, {"C_shunt_hint", "tone_frequency", "qubit", "nodes"}, strict)
    tone = d.get("tone_frequency")
    hint = d.get("C_shunt_hint")
    nodes = _nodes(d["nodes"], f"{path}/nodes") if d.get("nodes") is not None else None
    return _wrap(lambda: DrivePort(
        name=str(d["name"]), nodes=nodes,
        Z0=parse_quantity(d["Z0"], "resistance", f"{path}/Z0"),
        C_shunt_hint=None if hint is None else parse_quantity(hint, "capacitance",
                                                              f"{path}/C_shunt_hint"),
        tone_frequency=None if tone is None else _TWO_PI * parse_quantity(
            tone, "frequency", f"{path}/tone_frequency"),
        qubit=None if d.get("qubit") is None else str(d["qubit"])), path)


def network_from_dict(doc: Mapping, strict: bool = False) -> LinearNetwork:
    """:class:`LinearNetwork` from a netlist document."""
    _check_keys(doc, "", {"elements"}, {"document", "junctions", "drive_ports", "ground"},
                strict)
    els = []
    for k, e in enumerate(_list(doc["elements"], "/elements")):
        p = f"/elements/{k}"
        _check_keys(e, p, {"type", "nodes", "value"}, {"name"}, strict)
        kind = e["type"]
        if kind not in ("C", "L"):
            raise ParseError(f"element type must be 'C' or 'L', got {kind!r}", path=f"{p}/type")
        qty = "capacitance" if kind == "C" else "inductance"
        value = parse_quantity(e["value"], qty, f"{p}/value")
        nodes = _nodes(e["nodes"], f"{p}/nodes")
        name = e.get("name")
        els.append(_wrap(lambda: Element(kind, nodes, value, name), p))
    jj = []
    for k, j in enumerate(_list(doc.get("junctions", []), "/junctions")):
        p = f"/junctions/{k}"
        _check_keys(j, p, {"name", "nodes", "L_J"}, set(), strict)
        L = parse_quantity(j["L_J"], "inductance", f"{p}/L_J")
        nodes = _nodes(j["nodes"], f"{p}/nodes")
        jj.append(_wrap(lambda: Junction(str(j["name"]), nodes, L), p))
    drives = [_drive_from(d, f"/drive_ports/{k}", strict, True)
              for k, d in enumerate(_list(doc.get("drive_ports", []), "/drive_ports"))]
    ground = doc.get("ground", "gnd")
    if not isinstance(ground, str):
        raise ParseError("ground must be a node name", path="/ground")
    return _wrap(lambda: LinearNetwork(els, jj, drives, ground), "")


def network_to_dict(net: LinearNetwork) -> dict:
    """Netlist document in SI numbers; inverse of :func:`network_from_dict`."""
    def drive(d: DrivePort) -> dict:
        out: dict[str, Any] = {"name": d.name, "nodes": list(d.nodes), "Z0": d.Z0}
        if d.C_shunt_hint is not None:
            out["C_shunt_hint"] = d.C_shunt_hint
        if d.tone_frequency is not None:
            out["tone_frequency"] = d.tone_frequency / _TWO_PI
        if d.qubit is not None:
            out["qubit"] = d.qubit
        return out

    def element(e: Element) -> dict:
        out: dict[str, Any] = {"type": e.kind, "nodes": list(e.nodes), "value": e.value}
        if e.name is not None:
            out["name"] = e.name
        return out

    return {
        "document": "netlist",
        "elements": [element(e) for e in net.elements],
        "junctions": [{"name": j.name, "nodes": list(j.nodes), "L_J": j.L_J}
                      for j in net.junctions],
        "drive_ports": [drive(d) for d in net.drive_ports],
        "ground": net.ground,
    }


def _matrix(obj: Any, n: int, path: str) -> np.ndarray:
    try:
        a = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError("expected a numeric matrix", path=path) from exc
    if a.shape != (n, n):
        raise ParseError(f"expected a {n}x{n} matrix, got shape {a.shape}", path=path)
    if not np.all(np.isfinite(a)):
        raise ParseError("matrix entries must be finite", path=path)
    return a


@dataclass(frozen=True, eq=False)
class PoleResidueInput:
    """Pole-residue impedance plus the port roles needed for analysis."""

    impedance: PoleResidueImpedance
    junctions: tuple[tuple[str, float], ...]
    drives: tuple[DrivePort, ...]


def pole_residue_from_dict(doc: Mapping, strict: bool = False) -> PoleResidueInput:
    """Pole-residue document: ``A0`` in 1/F, residues ``A`` in 1/F, ``A_inf`` in H.

    ``junctions`` lists ``{name, L_J}`` for the first ports, ``drive_ports``
    the remaining ones.
    """
    _check_keys(doc, "", {"n_ports", "A0", "poles"},
                {"document", "A_inf", "junctions", "drive_ports"}, strict)
    n = doc["n_ports"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("n_ports must be a positive integer", path="/n_ports")
    A0 = _matrix(doc["A0"], n, "/A0")
    omegas, res = [], []
    for k, pole in enumerate(_list(doc["poles"], "/poles")):
        p = f"/poles/{k}"
        _check_keys(pole, p, {"f_GHz", "A"}, set(), strict)
        f = pole["f_GHz"]
        if isinstance(f, bool) or not isinstance(f, (int, float)) or not f > 0:
            raise ParseError("f_GHz must be a positive number", path=f"{p}/f_GHz")
        omegas.append(_TWO_PI * 1e9 * float(f))
        res.append(_matrix(pole["A"], n, f"{p}/A"))
    A_inf = None if doc.get("A_inf") is None else _matrix(doc["A_inf"], n, "/A_inf")
    z = _wrap(lambda: PoleResidueImpedance(
        A0, np.array(omegas), np.array(res).reshape(len(res), n, n), A_inf), "")
    jj = []
    for k, j in enumerate(_list(doc.get("junctions", []), "/junctions")):
        p = f"/junctions/{k}"
        _check_keys(j, p, {"name", "L_J"}, set(), strict)
        jj.append((str(j["name"]), parse_quantity(j["L_J"], "inductance", f"{p}/L_J")))
    drives = tuple(_drive_from(d, f"/drive_ports/{k}", strict, False)
                   for k, d in enumerate(_list(doc.get("drive_ports", []), "/drive_ports")))
    return PoleResidueInput(impedance=z, junctions=tuple(jj), drives=drives)


def pole_residue_to_dict(z: PoleResidueImpedance, junctions=(), drives=()) -> dict:
    out: dict[str, Any] = {
        "document": "pole-residue",
        "n_ports": z.n_ports,
        "A0": np.asarray(z.A0).tolist(),
        "poles": [{"f_GHz": float(w / _TWO_PI / 1e9), "A": np.asarray(a).tolist()}
                  for w, a in zip(z.omegas, z.residues)],
    }
    if z.A_inf is not None:
        out["A_inf"] = np.asarray(z.A_inf).tolist()
    if junctions:
        out["junctions"] = [{"name": n, "L_J": lj} for n, lj in junctions]
    if drives:
        out["drive_ports"] = [
            {k: v for k, v in (("name", d.name), ("Z0", d.Z0), ("C_shunt_hint", d.C_shunt_hint),
                               ("tone_frequency", None if d.tone_frequency is None
                                else d.tone_frequency / _TWO_PI), ("qubit", d.qubit))
             if v is not None} for d in drives]
    return out


_EX1_KEYS = {"f_r": "frequency", "f1": "frequency", "f2": "frequency", "g1": "frequency",
             "g2": "frequency", "Cq": "capacitance", "Cr": "capacitance"}


def example1_from_dict(doc: Mapping, strict: bool = False) -> Example1Parameters:
    """Two-qubit single-bus parameter set (document type ``example1``)."""
    _check_keys(doc, "", set(), set(_EX1_KEYS) | {"document"}, strict)
    kw = {k: parse_quantity(doc[k], kind, f"/{k}") for k, kind in _EX1_KEYS.items() if k in doc}
    return Example1Parameters(**kw)


@dataclass(frozen=True)
class Document:
    """A loaded input document. ``kind`` is netlist, pole-residue or example1."""

    kind: str
    data: Any
    raw: Mapping


def _detect(doc: Mapping) -> str:
    kind = doc.get("document")
    if kind is not None:
        if kind not in ("netlist", "pole-residue", "example1"):
            raise ParseError(f"unknown document type {kind!r}", path="/document")
        return kind
    if "elements" in doc:
        return "netlist"
    if "poles" in doc:
        return "pole-residue"
    raise ParseError("cannot tell the document type; add a 'document' key")


def document_from_dict(doc: Mapping, strict: bool = False) -> Document:
    if not isinstance(doc, Mapping):
        raise ParseError("top level must be an object")
    kind = _detect(doc)
    if kind == "netlist":
        data = network_from_dict(doc, strict)
    elif kind == "pole-residue":
        data = pole_residue_from_dict(doc, strict)
    else:
        data = example1_from_dict(doc, strict)
    return Document(kind=kind, data=data, raw=doc)


def loads_document(text: str, strict: bool = False) -> Document:
    """Parse a JSON document; syntax errors carry line and column."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return document_from_dict(doc, strict)


def load_document(path: str | Path, strict: bool = False) -> Document:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_document(text, strict)


# --------------------------------------------------------------------------
# Output

def _hz(w):
    return np.asarray(w, dtype=float) / _TWO_PI


def report_to_json_dict(report: DispersiveReport, version: str | None = None) -> dict:
    """Report as plain data with rad/s values and GHz/MHz companions."""
    def mat(a):
        return np.asarray(a, dtype=float).tolist()

    out: dict[str, Any] = {
        "units": {"omega": "rad/s", "f_GHz": "GHz", "MHz": "MHz (linear)",
                  "epsilon": "(rad/s)/V", "crosstalk": "dB", "purcell": "1/s"},
        "qubits": [{
            "name": q.label,
            "port": q.index,
            "L_J_H": q.L_J,
            "C_F": q.C,
            "L_H": q.L,
            "L_formula_H": q.L_formula,
            "E_C_MHz": q.E_C_over_h / 1e6,
            "omega_J_rad_s": q.omega_J,
            "omega_rad_s": q.omega,
            "f_GHz": q.omega / _TWO_PI / 1e9,
            "delta_rad_s": q.delta,
            "delta_MHz": q.delta / _TWO_PI / 1e6,
        } for q in report.qubits],
        "resonators": [{"omega_rad_s": float(w), "f_GHz": float(w / _TWO_PI / 1e9)}
                       for w in report.resonator_omegas],
        "g_rad_s": mat(report.g),
        "g_MHz": mat(_hz(report.g) / 1e6),
        "J_rad_s": mat(report.J),
        "J_MHz": mat(_hz(report.J) / 1e6),
        "J0_direct_MHz": mat(_hz(report.J0_direct) / 1e6),
        "chi_rad_s": mat(report.chi),
        "chi_MHz": mat(_hz(report.chi) / 1e6),
        "warnings": list(report.warnings),
    }
    if report.drives:
        rates = np.asarray(report.purcell_rates)
        total = rates.sum(axis=1)
        out["drives"] = [{
            "name": d.label,
            "port": d.port_index,
            "qubit": None if d.qubit is None else report.qubits[d.qubit].label,
            "Z0_Ohm": d.Z0,
            "C_pd_F": d.C_pd,
            "omega_d_rad_s": d.omega_d,
            "theta_rad": d.theta,
        } for d in report.drives]
        out["epsilon_re"] = mat(report.epsilon.real)
        out["epsilon_im"] = mat(report.epsilon.imag)
        out["epsilon_abs"] = mat(np.abs(report.epsilon))
        out["crosstalk_dB"] = mat(report.crosstalk_dB)
        out["crosstalk_sign"] = mat(report.crosstalk_sign)
        out["crosstalk_prefactor_dB"] = mat(report.crosstalk_prefactor_dB)
        out["purcell_rate_s"] = mat(rates)
        out["purcell_rate_MHz"] = mat(rates / 1e6)
        out["purcell_total_s"] = [float(x) for x in total]
        out["T1_s"] = [float(1.0 / x) if x > 0 else None for x in total]
    if version is not None:
        out["generator"] = {"name": "qimpedance", "version": version}
    return out


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".12e")


def _encode(obj: Any, indent: int, level: int, out: io.StringIO) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        out.write(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.write(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.write(json.dumps(obj))
    elif isinstance(obj, Mapping):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        items = list(obj.items())
        for k, (key, val) in enumerate(items):
            out.write(f"{pad}{json.dumps(str(key))}: ")
            _encode(val, indent, level + 1, out)
            out.write(",\n" if k < len(items) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.write("[]")
            return
        flat = all(not isinstance(v, (Mapping, list, tuple)) for v in obj)
        if flat:
            out.write("[")
            for k, v in enumerate(obj):
                if k:
                    out.write(", ")
                _encode(v, indent, level + 1, out)
            out.write("]")
            return
        out.write("[\n")
        for k, v in enumerate(obj):
            out.write(pad)
            _encode(v, indent, level + 1, out)
            out.write(",\n" if k < len(obj) - 1 else "\n")
        out.write(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON: keys sorted, floats as ``%.12e``, non-finite as null."""
    def sort(o):
        if isinstance(o, Mapping):
            return {k: sort(o[k]) for k in sorted(o)}
        if isinstance(o, (list, tuple)):
            return [sort(v) for v in o]
        return o

    buf = io.StringIO()
    _encode(sort(obj), indent, 0, buf)
    buf.write("\n")
    return buf.getvalue()


def write_csv(header: list[str], rows: list[list[float]], fh) -> None:
    """Comma-separated rows with LF endings and ``%.12e`` floats."""
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(v if isinstance(v, str) else
                          (format(float(v), ".12e") if math.isfinite(float(v)) else "nan")
                          for v in row) + "\n")
