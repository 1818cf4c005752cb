"""Command-line interface: ``qimpedance analyze | sweep | lattice | validate``.

Exit codes: 0 success, 2 parse or input error, 3 physics-guard violation,
4 validation failure, 1 any other library error.
"""

from __future__ import annotations

import argparse
import copy
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import AnalysisOptions, analyze_network, analyze_pole_residue
from .circuits import (Example1Parameters, LatticeParameters, example1_network, lattice_layout,
                       lattice_network)
from .core import TOLERANCE_PROFILES, Tolerances
from .dispersive import closed_form_example1
from .errors import (InvalidInputError, ParseError, PhysicsGuardError, QImpedanceError,
                     QImpedanceWarning, ValidationFailure)
from .io import (Document, document_from_dict, dumps_json, load_document, network_to_dict,
                 parse_quantity, report_to_json_dict, write_csv)
from .validation import ValidationThresholds, validate_random_circuits

__all__ = ["main", "build_parser", "sweep_rows", "fit_decay", "lattice_tables"]

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_PHYSICS, EXIT_VALIDATION = 0, 1, 2, 3, 4
_TWO_PI = 2.0 * math.pi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qimpedance",
                                description="Dispersive Hamiltonian parameters from a "
                                            "circuit netlist or multiport impedance.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(p, None)
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    a = add("analyze", help="full dispersive report of one document")
    a.add_argument("input", type=Path)
    a.add_argument("--L-J", dest="L_J", action="append", default=[], metavar="NAME=VALUE",
                   help="override a junction inductance, e.g. Q1=12nH")
    a.add_argument("--out", type=Path, help="write the JSON report here")
    a.add_argument("--json", action="store_true", help="print JSON instead of the table")
    _analysis_flags(a)

    s = add("sweep", help="sweep one document parameter")
    s.add_argument("input", type=Path)
    s.add_argument("--param", required=True,
                   help="dotted path of the swept value, e.g. f_r or elements.Cr.value")
    s.add_argument("--from", dest="start", required=True)
    s.add_argument("--to", dest="stop", required=True)
    s.add_argument("--points", type=int, required=True)
    s.add_argument("--fields", default=None,
                   help="comma-separated report paths, e.g. J_MHz.0.1 (netlist inputs)")
    s.add_argument("--emit", choices=["csv"], default="csv")
    s.add_argument("--out", type=Path)
    _analysis_flags(s)

    lt = add("lattice", help="generate and analyze a qubit lattice")
    lt.add_argument("--rows", type=int, default=2)
    lt.add_argument("--cols", type=int, default=8)
    lt.add_argument("--buses", choices=["two-qubit", "four-qubit"], default="two-qubit")
    lt.add_argument("--with-readout", action="store_true")
    lt.add_argument("--params", type=Path, help="JSON file of lattice parameters")
    lt.add_argument("--netlist-out", type=Path, help="write the generated netlist here")
    lt.add_argument("--out", type=Path, help="write the JSON report here")
    lt.add_argument("--table-out", type=Path, help="write the decay table (CSV) here")

    v = add("validate", help="cross-check closed forms on random circuits")
    v.add_argument("--circuits", type=int, default=100)
    v.add_argument("--gmax-ratio", type=float, default=0.05)
    v.add_argument("--j-threshold", type=float, default=ValidationThresholds.j_exact)
    v.add_argument("--order2-threshold", type=float, default=ValidationThresholds.j_order2)
    v.add_argument("--d-threshold", type=float, default=ValidationThresholds.d_identity)
    v.add_argument("--out", type=Path)
    return p


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    sup = default is argparse.SUPPRESS
    p.add_argument("--strict", action="store_true", default=default if sup else False,
                   help="reject unknown document keys and turn warnings into errors")
    p.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                   default=default if sup else "default")
    p.add_argument("--seed", type=int, default=default if sup else 0,
                   help="seed for random circuit generation")


def _analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--route", choices=["mna", "pole-residue"], default="mna",
                   help="impedance evaluator for netlist inputs")
    p.add_argument("--renormalization", choices=["closed-form", "exact"],
                   default="closed-form")
    p.add_argument("--temperature", default=None, help="apply the thermal factor, e.g. 20mK")


def _options(args, tol: Tolerances) -> AnalysisOptions:
    temp = None
    if getattr(args, "temperature", None) is not None:
        temp = parse_quantity(args.temperature, "temperature", "--temperature")
    return AnalysisOptions(tol=tol, renormalization=args.renormalization, z_route=args.route,
                           temperature=temp)


def _overrides(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, val = item.partition("=")
        if not sep or not name:
            raise ParseError(f"expected NAME=VALUE, got {item!r}", path="--L-J")
        out[name.strip()] = parse_quantity(val.strip(), "inductance", f"--L-J {name}")
    return out


def _analyze_document(doc: Document, options: AnalysisOptions,
                      L_J: dict[str, float] | None = None):
    if doc.kind == "netlist":
        return analyze_network(doc.data, L_J, options=options)
    if doc.kind == "pole-residue":
        pr = doc.data
        jj = list(pr.junctions)
        L_J = dict(L_J or {})
        unknown = set(L_J) - {n for n, _ in jj}
        if unknown:
            raise InvalidInputError(f"unknown junctions in overrides: {sorted(unknown)}")
        jj = [(n, L_J.get(n, lj)) for n, lj in jj]
        return analyze_pole_residue(pr.impedance, jj, pr.drives, options=options)
    p: Example1Parameters = doc.data
    return analyze_network(example1_network(p, method=options.renormalization),
                           L_J, options=options)


def _table(report) -> str:
    lines = []
    mhz = 1.0 / (_TWO_PI * 1e6)
    lines.append("qubit      f (GHz)    delta (MHz)   L_J (nH)    C (fF)")
    for q in report.qubits:
        lines.append(f"{q.label:<8} {q.omega / _TWO_PI / 1e9:10.6f} {q.delta * mhz:12.4f} "
                     f"{q.L_J * 1e9:10.4f} {q.C * 1e15:9.3f}")
    if report.resonator_omegas.size:
        lines.append("modes (GHz): " + " ".join(f"{w / _TWO_PI / 1e9:.6f}"
                                                 for w in report.resonator_omegas))
    n = len(report.qubits)
    if n > 1:
        lines.append("J (MHz):")
        for i in range(n):
            for j in range(i + 1, n):
                lines.append(f"  {report.qubits[i].label}-{report.qubits[j].label}: "
                             f"{report.J[i, j] * mhz:+.6f}")
    if report.resonator_omegas.size:
        lines.append("max |chi| per qubit (MHz): " + " ".join(
            f"{np.max(np.abs(row)) * mhz:.6f}" for row in report.chi))
    for d, ch in enumerate(report.drives):
        for i, q in enumerate(report.qubits):
            rate = report.purcell_rates[i, d]
            t1 = f"{1 / rate:.6e} s" if rate > 0 else "inf"
            lines.append(f"drive {ch.label} -> {q.label}: |eps| = "
                         f"{abs(report.epsilon[i, d]):.6e} (rad/s)/V, "
                         f"Purcell = {rate:.6e} 1/s, T1 = {t1}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def cmd_analyze(args, tol: Tolerances) -> int:
    doc = load_document(args.input, strict=args.strict)
    result = _analyze_document(doc, _options(args, tol), _overrides(args.L_J))
    text = dumps_json(report_to_json_dict(result.report, __version__))
    if args.out is not None:
        _write(args.out, text)
    sys.stdout.write(text if args.json else _table(result.report))
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep

def _set_path(doc: Any, path: str, value: float) -> None:
    keys = path.split(".")
    cur = doc
    for n, key in enumerate(keys):
        last = n == len(keys) - 1
        if isinstance(cur, list):
            if key.isdigit() and int(key) < len(cur):
                idx = int(key)
            else:
                hits = [i for i, item in enumerate(cur)
                        if isinstance(item, dict) and item.get("name") == key]
                if len(hits) != 1:
                    raise InvalidInputError(f"parameter path {path!r}: no unique item {key!r}")
                idx = hits[0]
            if last:
                cur[idx] = value
            else:
                cur = cur[idx]
        elif isinstance(cur, dict):
            if key not in cur:
                if last and n == 0:
                    cur[key] = value
                    return
                raise InvalidInputError(f"parameter path {path!r}: no key {key!r}")
            if last:
                old = cur[key]
                if isinstance(old, (dict, list)) or isinstance(old, bool):
                    raise InvalidInputError(f"parameter path {path!r} is not numeric")
                cur[key] = value
            else:
                cur = cur[key]
        else:
            raise InvalidInputError(f"parameter path {path!r} is not numeric")


def _get_path(obj: Any, path: str) -> float:
    cur = obj
    for key in path.split("."):
        if isinstance(cur, list):
            if not key.isdigit() or int(key) >= len(cur):
                raise InvalidInputError(f"report path {path!r}: bad index {key!r}")
            cur = cur[int(key)]
        elif isinstance(cur, dict):
            if key not in cur:
                raise InvalidInputError(f"report path {path!r}: no key {key!r}")
            cur = cur[key]
        else:
            raise InvalidInputError(f"report path {path!r} is not numeric")
    if isinstance(cur, bool) or not isinstance(cur, (int, float)):
        raise InvalidInputError(f"report path {path!r} is not numeric")
    return float(cur)


_EX1_COLUMNS = ["J_Z_MHz", "J_Z_rwa_MHz", "J_pert_MHz", "J_pert_plus_J0_MHz", "J0_MHz",
                "J_Z_network_MHz"]


def _sweep_kind(param: str) -> str:
    low = param.split(".")[-1]
    if low.startswith(("f", "g")) or low in ("tone_frequency",):
        return "frequency"
    if low.startswith("C") or low == "C_shunt_hint":
        return "capacitance"
    if low.startswith("L"):
        return "inductance"
    if low == "Z0":
        return "resistance"
    return "capacitance"


def _element_kind(raw: dict, param: str) -> str | None:
    keys = param.split(".")
    if len(keys) == 3 and keys[0] == "elements" and keys[2] == "value":
        for e in raw.get("elements", []):
            if isinstance(e, dict) and e.get("name") == keys[1]:
                return "capacitance" if e.get("type") == "C" else "inductance"
        if keys[1].isdigit() and int(keys[1]) < len(raw.get("elements", [])):
            e = raw["elements"][int(keys[1])]
            return "capacitance" if e.get("type") == "C" else "inductance"
    return None


def sweep_rows(doc: Document, param: str, start: float, stop: float, points: int,
               options: AnalysisOptions, fields: Sequence[str] | None = None, *,
               strict: bool = False) -> tuple[list[str], list[list[float]]]:
    """Header and rows of a parameter sweep (values in SI, outputs in MHz)."""
    if points < 1:
        raise InvalidInputError("points must be >= 1")
    values = np.linspace(start, stop, points) if points > 1 else np.array([start])
    mhz = 1.0 / (_TWO_PI * 1e6)
    rows: list[list[float]] = []
    if doc.kind == "example1" and not fields:
        header = [param] + _EX1_COLUMNS
        for v in values:
            raw = copy.deepcopy(dict(doc.raw))
            _set_path(raw, param, float(v))
            p = document_from_dict(raw, strict).data
            cf = closed_form_example1(p.Cq, p.Cc1, p.Cr, p.Lr, p.omega1, p.omega2, Cc2=p.Cc2,
                                      tol=options.tol)
            res = analyze_network(example1_network(p, method=options.renormalization),
                                  options=options)
            rows.append([float(v), cf.J_Z * mhz, cf.J_Z_rwa * mhz, cf.J_pert * mhz,
                         cf.J_pert_plus_J0 * mhz, cf.J0 * mhz, res.report.J[0, 1] * mhz])
        return header, rows
    header = None
    for v in values:
        raw = copy.deepcopy(dict(doc.raw))
        _set_path(raw, param, float(v))
        res = _analyze_document(document_from_dict(raw, strict), options)
        rep = report_to_json_dict(res.report)
        if fields:
            cols = list(fields)
        else:
            n = len(res.report.qubits)
            cols = [f"J_MHz.{i}.{j}" for i in range(n) for j in range(i + 1, n)]
        if header is None:
            header = [param] + cols
        rows.append([float(v)] + [_get_path(rep, c) for c in cols])
    return header or [param], rows


def cmd_sweep(args, tol: Tolerances) -> int:
    doc = load_document(args.input, strict=args.strict)
    kind = _element_kind(dict(doc.raw), args.param) or _sweep_kind(args.param)
    start = parse_quantity(args.start, kind, "--from")
    stop = parse_quantity(args.stop, kind, "--to")
    fields = [f.strip() for f in args.fields.split(",")] if args.fields else None
    header, rows = sweep_rows(doc, args.param, start, stop, args.points, _options(args, tol),
                              fields, strict=args.strict)
    if args.out is None:
        write_csv(header, rows, sys.stdout)
    else:
        with open(args.out, "w", newline="\n") as fh:
            write_csv(header, rows, fh)
    return EXIT_OK


# --------------------------------------------------------------------------
# lattice

def fit_decay(k: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and coefficient of determination of a least-squares line."""
    k = np.asarray(k, float)
    y = np.asarray(y, float)
    slope, icept = np.polyfit(k, y, 1)
    resid = y - (slope * k + icept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return float(slope), r2


def lattice_tables(report, cols: int) -> tuple[list[str], list[list[float]]]:
    """``J_1k`` and (when drives exist) ``X_1k`` along the upper row."""
    mhz = 1.0 / (_TWO_PI * 1e6)
    ks = list(range(2, cols + 1))
    header = ["k", "J_1k_MHz", "log_abs_J_1k"]
    have_x = len(report.drives) > 0
    if have_x:
        header.append("X_1k_dB")
    rows = []
    for k in ks:
        J = report.J[0, k - 1] * mhz
        row = [float(k), J, math.log(abs(J)) if J != 0 else -math.inf]
        if have_x:
            row.append(float(report.crosstalk_dB[k - 1, 0]))
        rows.append(row)
    return header, rows


def cmd_lattice(args, tol: Tolerances) -> int:
    params = LatticeParameters.from_file(args.params) if args.params else LatticeParameters()
    layout = lattice_layout(args.rows, args.cols, args.buses)
    net = lattice_network(layout, params, with_readout=args.with_readout)
    if args.netlist_out is not None:
        _write(args.netlist_out, dumps_json(network_to_dict(net)))
    result = analyze_network(net, options=AnalysisOptions(tol=tol))
    if args.out is not None:
        _write(args.out, dumps_json(report_to_json_dict(result.report, __version__)))
    header, rows = lattice_tables(result.report, layout.cols)
    if args.table_out is not None:
        with open(args.table_out, "w", newline="\n") as fh:
            write_csv(header, rows, fh)
    k = np.array([r[0] for r in rows])
    out = [f"lattice {layout.rows}x{layout.cols}, {layout.mode} buses: "
           f"{layout.n_qubits} qubits, {layout.n_buses} buses"]
    out.append(",".join(header))
    for r in rows:
        out.append(",".join(f"{v:.12e}" if i else f"{int(v)}" for i, v in enumerate(r)))
    if len(rows) >= 2:
        s, r2 = fit_decay(k, [r[2] for r in rows])
        out.append(f"log|J_1k| fit: slope {s:.6f} per site, R^2 {r2:.6f}")
        if len(header) > 3:
            s, r2 = fit_decay(k, [r[3] for r in rows])
            out.append(f"X_1k fit: slope {s:.6f} dB per site, R^2 {r2:.6f}")
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_validate(args, tol: Tolerances) -> int:
    th = ValidationThresholds(j_exact=args.j_threshold, j_order2=args.order2_threshold,
                              d_identity=args.d_threshold)
    summary = validate_random_circuits(args.circuits, args.seed, args.gmax_ratio, th)
    text = dumps_json(summary.to_dict())
    _write(args.out, text) if args.out is not None else sys.stdout.write(text)
    if not summary.passed:
        raise ValidationFailure(
            f"validation failed: J exact {summary.max_j_exact:.3e}, order 2 "
            f"{summary.max_j_order2:.3e}, D {summary.max_d_identity:.3e}")
    return EXIT_OK


_COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "lattice": cmd_lattice,
             "validate": cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    tol = TOLERANCE_PROFILES[args.tolerance_profile]
    with warnings.catch_warnings():
        if args.strict:
            warnings.simplefilter("error", QImpedanceWarning)
        try:
            return _COMMANDS[args.command](args, tol)
        except ParseError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        except ValidationFailure as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_VALIDATION
        except (PhysicsGuardError, QImpedanceWarning) as exc:
            print(f"physics guard: {exc}", file=sys.stderr)
            return EXIT_PHYSICS
        except InvalidInputError as exc:
            print(f"invalid input: {exc}", file=sys.stderr)
            return EXIT_PARSE
        except QImpedanceError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
