import math
import warnings

import numpy as np
import pytest

from qimpedance.analysis import analyze_network
from qimpedance.cauer import build_frames
from qimpedance.circuits import random_dispersive_circuit
from qimpedance.core import Element, Junction, LinearNetwork
from qimpedance.dispersive import exchange_matrix, solve_qubit_mode
from qimpedance.errors import ConvergenceError, InvalidInputError, SingularDenominatorError
from qimpedance.oracle import (drive_projection_D, exact_normal_modes, j_from_blockdiag,
                               normal_modes, off_block_norm, schrieffer_wolff)

from .conftest import fF, nH


def _circuit(seed, n_q=3, n_m=4, n_d=2):
    rc = random_dispersive_circuit(np.random.default_rng(seed), n_q, n_m, n_d)
    return rc, build_frames(rc.realization, rc.qubits)


def _synthetic(s=1.0):
    rng = np.random.default_rng(0)
    a, b = np.array([1.0, 1.3, 1.6]), np.array([2.2, 2.9, 3.5, 4.1])
    V = 0.05 * s * rng.normal(size=(3, 4))
    return np.block([[np.diag(a), V], [V.T, np.diag(b)]])


# --------------------------------------------------------------------------
# block diagonalization

def test_block_diagonal_input_is_untouched():
    M = np.diag([1.0, 2.0, 5.0])
    for order in (2, "exact"):
        r = schrieffer_wolff(M, 1, order)
        np.testing.assert_array_equal(r.S, np.zeros((3, 3)))
        np.testing.assert_allclose(r.M_tilde, M, atol=1e-15)


def test_two_level_second_order_entry():
    w1, wR, c = 1.0, 2.0, 0.01
    r = schrieffer_wolff(np.array([[w1, c], [c, wR]]), 1, 2)
    assert r.M_tilde[0, 0] == pytest.approx(w1 + c * c / (w1 - wR), rel=1e-15)
    assert r.M_tilde[1, 1] == pytest.approx(wR - c * c / (w1 - wR), rel=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_second_order_equals_impedance_exchange(seed):
    rc, fr = _circuit(seed)
    r = schrieffer_wolff(fr.M1, 3, 2, omega_R=rc.realization.omegas)
    J_sw = j_from_blockdiag(r, rc.qubits)
    J_z = exchange_matrix(rc.impedance.im, rc.qubits)
    np.testing.assert_allclose(J_sw, J_z, rtol=1e-10, atol=1e-10 * np.abs(J_z).max())


@pytest.mark.parametrize("seed", range(6))
def test_exact_block_diagonalization(seed):
    rc, fr = _circuit(seed)
    e = schrieffer_wolff(fr.M1, 3, "exact")
    np.testing.assert_allclose(np.linalg.eigvalsh(e.M_tilde), np.linalg.eigvalsh(fr.M1),
                               rtol=1e-10)
    np.testing.assert_allclose(e.S, -e.S.T, atol=1e-14)
    assert off_block_norm(e.M_tilde, 3) == 0.0
    J_ex = j_from_blockdiag(e, rc.qubits)
    J_z = exchange_matrix(rc.impedance.im, rc.qubits)
    off = ~np.eye(3, dtype=bool)
    assert np.max(np.abs(J_ex[off] / J_z[off] - 1)) <= 5 * rc.g_over_delta ** 2


def test_second_order_residual_is_third_order():
    s = np.array([1, 0.5, 0.25, 0.125])
    res = [schrieffer_wolff(_synthetic(x), 3, 2).residual for x in s]
    slopes = np.diff(np.log(res)) / np.diff(np.log(s))
    assert np.all(np.abs(slopes - 3) <= 0.2)


def test_degenerate_qubit_and_mode_refused():
    with pytest.raises(SingularDenominatorError):
        schrieffer_wolff(np.array([[2.0, 0.1], [0.1, 2.0]]), 1)


def test_exact_reports_nonconvergence():
    with pytest.raises(ConvergenceError):
        schrieffer_wolff(_synthetic(), 3, "exact", max_iter=2, target=0.0)


def test_block_diagonalization_input_checks():
    with pytest.raises(InvalidInputError):
        schrieffer_wolff(np.array([[1.0, 0.2], [0.1, 3.0]]), 1)
    with pytest.raises(InvalidInputError):
        schrieffer_wolff(_synthetic(), 3, order=4)
    with pytest.raises(InvalidInputError):
        schrieffer_wolff(_synthetic(), 3, omega_R=[1.0])


def test_uncoupled_qubits_have_zero_exchange():
    M = np.diag([1.0, 1.2, 3.0])
    q = (solve_qubit_mode(10 * nH, 70 * fF, 0), solve_qubit_mode(11 * nH, 70 * fF, 1))
    np.testing.assert_array_equal(j_from_blockdiag(schrieffer_wolff(M, 2), q), np.zeros((2, 2)))


def test_bus_exchange_is_negative_below_the_bus(bus_net):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = analyze_network(bus_net)
    fr = build_frames(res.realization, res.qubits)
    J = j_from_blockdiag(schrieffer_wolff(fr.M1, 2, 2, omega_R=res.realization.omegas),
                         res.qubits)
    assert J[0, 1] < 0
    assert J[0, 1] == pytest.approx(res.report.J[0, 1], rel=1e-10)


# --------------------------------------------------------------------------
# drive projection

def test_drive_projection_zero_ratios():
    rc, fr = _circuit(1)
    wq = np.array([q.omega for q in rc.qubits])
    D = drive_projection_D(fr.M1, np.zeros((4, 2)), wq, rc.realization.omegas)
    np.testing.assert_array_equal(D, np.zeros((3, 2)))


def test_drive_projection_single_term():
    M1 = np.array([[4.0, 0.3], [0.3, 9.0]])
    D = drive_projection_D(M1, [[0.7]], [2.0], [3.0])
    assert D[0, 0] == pytest.approx(-0.3 * 0.7 / (4.0 - 9.0), rel=1e-15)


@pytest.mark.parametrize("seed", range(4))
def test_drive_projection_is_scaled_transfer_impedance(seed):
    rc, fr = _circuit(seed)
    c = rc.realization
    wq = np.array([q.omega for q in rc.qubits])
    D = drive_projection_D(fr.M1, c.V_unit, wq, c.omegas)
    for i, q in enumerate(rc.qubits):
        imz = rc.impedance.im(q.omega)[i, 3:]
        np.testing.assert_allclose(D[i], imz / math.sqrt(q.L), rtol=1e-10)


def test_drive_projection_no_modes():
    D = drive_projection_D(np.eye(1), np.zeros((0, 1)), [1.0], [])
    np.testing.assert_array_equal(D, np.zeros((1, 1)))


# --------------------------------------------------------------------------
# exact normal modes

def _two_transmons(Cc=0.0):
    els = [Element("C", ("a", "gnd"), 70 * fF), Element("C", ("b", "gnd"), 70 * fF)]
    if Cc:
        els.append(Element("C", ("a", "b"), Cc))
    return LinearNetwork(els, [Junction("A", ("a", "gnd"), 10 * nH),
                               Junction("B", ("b", "gnd"), 10 * nH)])


def test_identical_uncoupled_qubits_are_degenerate():
    nm = exact_normal_modes(_two_transmons(), {"A": 10 * nH, "B": 10 * nH})
    w0 = 1 / math.sqrt(10 * nH * 70 * fF)
    np.testing.assert_allclose(nm.frequencies, [w0, w0], rtol=1e-14)


def test_direct_capacitor_splits_modes():
    Cc = 2 * fF
    nm = exact_normal_modes(_two_transmons(Cc), {"A": 10 * nH, "B": 10 * nH})
    L, C = 10 * nH, 70 * fF
    np.testing.assert_allclose(nm.frequencies,
                               [1 / math.sqrt(L * (C + 2 * Cc)), 1 / math.sqrt(L * C)],
                               rtol=1e-13)


def test_lamb_pull_of_two_level_pencil():
    w1, wR, c = 1.0, 2.0, 1e-3
    nm = normal_modes(np.eye(2), np.array([[w1 ** 2, c], [c, wR ** 2]]))
    pull = nm.frequencies[0] - w1
    assert pull == pytest.approx(c * c / (2 * w1 * (w1 ** 2 - wR ** 2)), rel=1e-5)


def test_normal_modes_match_frame_spectrum(bus_net):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = analyze_network(bus_net)
    fr = build_frames(res.realization, res.qubits)
    nm = exact_normal_modes(bus_net, qubits=res.qubits)
    np.testing.assert_allclose(nm.frequencies, np.sqrt(np.linalg.eigvalsh(fr.M1)), rtol=1e-10)
    assert nm.nodes and set(nm.nodes) == {"q1", "q2", "r"}


def test_exact_normal_modes_input_checks():
    net = _two_transmons()
    with pytest.raises(InvalidInputError):
        exact_normal_modes(net)
    bad = LinearNetwork([Element("C", ("a", "gnd"), 70 * fF), Element("L", ("b", "gnd"), 1e-9),
                         Element("L", ("a", "b"), 1e-9)], [Junction("A", ("a", "gnd"), 1e-8)])
    with pytest.raises(InvalidInputError):
        exact_normal_modes(bad, {"A": 1e-8})

