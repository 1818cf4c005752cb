import csv
import io
import json
import math
import warnings
from pathlib import Path

import numpy as np
import pytest

from qimpedance.analysis import analyze_network
from qimpedance.circuits import lattice_layout, two_qubit_bus
from qimpedance.cli import fit_decay, main
from qimpedance.core import LinearNetwork, PoleResidueImpedance
from qimpedance.errors import InvalidInputError, ParseError
from qimpedance.io import (document_from_dict, dumps_json, load_document, loads_document,
                           network_from_dict, network_to_dict, parse_quantity,
                           pole_residue_from_dict, pole_residue_to_dict, report_to_json_dict)

from .conftest import GHz, fF, lr_for, nH
from .oracle_values import EX1_J0_MHZ, EX1_J_PERT_MHZ, EX1_J_RWA_MHZ, EX1_J_Z_MHZ

SAMPLES = Path(__file__).resolve().parents[1] / "samples"


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


# --------------------------------------------------------------------------
# parsing

@pytest.mark.parametrize("text, kind, value", [
    ("65 fF", "capacitance", 65e-15),
    ("65fF", "capacitance", 65e-15),
    ("10 nH", "inductance", 10e-9),
    ("7 GHz", "frequency", 7e9),
    ("50 Ohm", "resistance", 50.0),
    ("20 mK", "temperature", 0.020),
    (1.5e-13, "capacitance", 1.5e-13),
    ("2e-3", "capacitance", 2e-3),
])
def test_parse_quantity(text, kind, value):
    assert parse_quantity(text, kind) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["65 nH", "abc", "5 parsecs", True, [1], "inf"])
def test_parse_quantity_rejects(text):
    with pytest.raises(ParseError):
        parse_quantity(text, "capacitance")


@pytest.mark.parametrize("name", ["two_qubit_bus", "qubit_readout_drive"])
def test_netlist_round_trip(name):
    raw = json.loads((SAMPLES / f"{name}.json").read_text())
    net = network_from_dict(raw, strict=True)
    again = network_from_dict(network_to_dict(net), strict=True)
    assert again == net


def test_pole_residue_round_trip():
    raw = json.loads((SAMPLES / "pole_residue.json").read_text())
    pr = pole_residue_from_dict(raw, strict=True)
    back = pole_residue_from_dict(pole_residue_to_dict(pr.impedance, pr.junctions, pr.drives),
                                  strict=True)
    np.testing.assert_array_equal(back.impedance.A0, pr.impedance.A0)
    np.testing.assert_allclose(back.impedance.omegas, pr.impedance.omegas, rtol=1e-15)
    np.testing.assert_array_equal(back.impedance.residues, pr.impedance.residues)
    assert isinstance(pr.impedance, PoleResidueImpedance)
    assert pr.junctions == back.junctions


def test_strict_mode_rejects_unknown_keys():
    raw = json.loads((SAMPLES / "two_qubit_bus.json").read_text())
    raw["elements"][0]["colour"] = "red"
    assert isinstance(document_from_dict(raw).data, LinearNetwork)
    with pytest.raises(ParseError, match="colour"):
        document_from_dict(raw, strict=True)


def test_syntax_errors_carry_position():
    with pytest.raises(ParseError) as info:
        loads_document('{\n  "document": "netlist",\n  "elements": [,]\n}')
    assert info.value.line == 3 and info.value.column is not None
    assert "line 3" in str(info.value)


def test_unknown_document_and_missing_file(tmp_path):
    with pytest.raises(ParseError):
        loads_document('{"document": "spice"}')
    with pytest.raises(ParseError):
        loads_document('{"nothing": 1}')
    with pytest.raises(ParseError):
        load_document(tmp_path / "missing.json")


def test_json_encoding_is_stable(bus_net):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = analyze_network(bus_net).report
    a = dumps_json(report_to_json_dict(rep, "x"))
    b = dumps_json(json.loads(a))
    assert a == b
    d = json.loads(a)
    assert d["J_MHz"][0][1] == pytest.approx(rep.J[0, 1] / (2 * math.pi * 1e6), rel=1e-12)


def test_network_without_junctions_has_no_qubit_ports():
    net = network_from_dict({"elements": [{"type": "C", "nodes": ["a", "gnd"], "value": 1e-13}]})
    with pytest.raises(InvalidInputError, match="no qubit ports"):
        analyze_network(net)


# --------------------------------------------------------------------------
# command line

def test_analyze_json_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = _run(capsys, "analyze", SAMPLES / "qubit_readout_drive.json", "--out", path)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["generator"]["name"] == "qimpedance"
    assert rep["purcell_rate_s"][0][0] > 0


@pytest.mark.parametrize("name", ["two_qubit_bus", "qubit_readout_drive", "pole_residue",
                                  "example1"])
def test_analyze_samples(capsys, name):
    code, out, _ = _run(capsys, "analyze", SAMPLES / f"{name}.json")
    assert code == 0
    assert out.startswith("qubit")


def test_analyze_inductance_override(capsys):
    code, out, _ = _run(capsys, "analyze", SAMPLES / "two_qubit_bus.json", "--json",
                        "--L-J", "Q1=10 nH")
    assert code == 0
    assert json.loads(out)["qubits"][0]["L_J_H"] == pytest.approx(10e-9, rel=1e-15)


def test_analyze_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert _run(capsys, "analyze", bad)[0] == 2
    assert _run(capsys, "analyze", tmp_path / "missing.json")[0] == 2
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"elements": [{"type": "C", "nodes": ["a", "gnd"],
                                               "value": "1 fF"}]}))
    code, _, err = _run(capsys, "analyze", empty)
    assert code == 2 and "no qubit ports" in err
    extra = json.loads((SAMPLES / "two_qubit_bus.json").read_text())
    extra["oops"] = 1
    (tmp_path / "extra.json").write_text(json.dumps(extra))
    assert _run(capsys, "analyze", tmp_path / "extra.json")[0] == 0
    assert _run(capsys, "analyze", tmp_path / "extra.json", "--strict")[0] == 2


@pytest.mark.filterwarnings("ignore::qimpedance.errors.QImpedanceWarning")
def test_strict_turns_warnings_into_exit_3(capsys, tmp_path):
    # a strongly coupled bus trips the dispersive-regime warning
    net = two_qubit_bus(65 * fF, 20 * fF, 500 * fF, lr_for(6.5 * GHz, 500 * fF), 10 * nH, 10 * nH)
    path = tmp_path / "strong.json"
    path.write_text(dumps_json(network_to_dict(net)))
    loose = _run(capsys, "analyze", path)
    assert loose[0] == 0 and "warning" in loose[1]
    assert _run(capsys, "analyze", path, "--strict")[0] == 3


def test_single_point_sweep_matches_analyze(capsys):
    code, out, _ = _run(capsys, "analyze", SAMPLES / "two_qubit_bus.json", "--json")
    J = json.loads(out)["J_MHz"][0][1]
    code, out, _ = _run(capsys, "sweep", SAMPLES / "two_qubit_bus.json",
                        "--param", "elements.Cc1.value", "--from", "5 fF", "--to", "9 fF",
                        "--points", "1")
    header, rows = _csv(out)
    assert code == 0 and header == ["elements.Cc1.value", "J_MHz.0.1"]
    assert rows[0][0] == pytest.approx(5e-15) and rows[0][1] == pytest.approx(J, rel=1e-12)


def test_sweep_custom_fields(capsys, tmp_path):
    out_path = tmp_path / "s.csv"
    code, _, _ = _run(capsys, "sweep", SAMPLES / "qubit_readout_drive.json",
                      "--param", "elements.Cd.value", "--from", "50 fF", "--to", "150 fF",
                      "--points", "3", "--fields", "purcell_rate_s.0.0,qubits.0.f_GHz",
                      "--out", out_path)
    header, rows = _csv(out_path.read_text())
    assert code == 0 and len(rows) == 3 and header[1:] == ["purcell_rate_s.0.0", "qubits.0.f_GHz"]
    np.testing.assert_allclose([r[0] for r in rows], [50e-15, 100e-15, 150e-15])


def test_sweep_bad_path(capsys):
    code, _, err = _run(capsys, "sweep", SAMPLES / "two_qubit_bus.json", "--param",
                        "elements.Nope.value", "--from", "1", "--to", "2", "--points", "2")
    assert code == 2 and "Nope" in err


def test_example1_sweep_columns(capsys):
    code, out, _ = _run(capsys, "sweep", SAMPLES / "example1.json", "--param", "f_r",
                        "--from", "6.5 GHz", "--to", "7.5 GHz", "--points", "3")
    header, rows = _csv(out)
    assert code == 0
    assert header == ["f_r", "J_Z_MHz", "J_Z_rwa_MHz", "J_pert_MHz", "J_pert_plus_J0_MHz",
                      "J0_MHz", "J_Z_network_MHz"]
    for r in rows:
        assert r[4] == pytest.approx(r[3] + r[5], rel=1e-12)
    mid = rows[1]
    assert mid[0] == pytest.approx(7e9)
    assert mid[1] == pytest.approx(EX1_J_Z_MHZ, rel=1e-9)
    assert mid[2] == pytest.approx(EX1_J_RWA_MHZ, rel=1e-9)
    assert mid[3] == pytest.approx(EX1_J_PERT_MHZ, rel=1e-9)
    assert mid[5] == pytest.approx(EX1_J0_MHZ, rel=1e-9)


def test_lattice_command(capsys, tmp_path):
    table = tmp_path / "t.csv"
    code, out, _ = _run(capsys, "lattice", "--params", SAMPLES / "lattice_params.json",
                        "--table-out", table)
    assert code == 0
    assert "16 qubits, 22 buses" in out
    header, rows = _csv(table.read_text())
    assert header == ["k", "J_1k_MHz", "log_abs_J_1k"] and len(rows) == 7


def test_lattice_layouts():
    assert lattice_layout(2, 8, "two-qubit").n_buses == 22
    four = lattice_layout(2, 8, "four-qubit")
    assert four.n_buses == 7 and four.n_qubits == 16


def test_fit_decay_exact_line():
    k = np.arange(2, 9, dtype=float)
    s, r2 = fit_decay(k, 1.5 - 0.7 * k)
    assert s == pytest.approx(-0.7) and r2 == pytest.approx(1.0)


def test_validate_command(capsys, tmp_path):
    code, out, _ = _run(capsys, "validate", "--circuits", "0")
    assert code == 0 and json.loads(out)["passed"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert _run(capsys, "validate", "--circuits", "5", "--seed", "3", "--out", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, _, err = _run(capsys, "validate", "--circuits", "3", "--j-threshold", "1e-20")
    assert code == 4 and "validation failed" in err
