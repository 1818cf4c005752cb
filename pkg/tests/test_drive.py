import cmath
import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qimpedance.analysis import analyze_network
from qimpedance.circuits import qubit_readout_drive
from qimpedance.core import CONSTANTS, DriveChannel
from qimpedance.dispersive import junction_inductance_for, solve_qubit_mode
from qimpedance.drive import (CROSSTALK_FLOOR_DB, bath_spectrum, coupling_norm,
                              crosstalk_matrix, drive_coupling_epsilon, drive_coupling_matrix,
                              purcell_matrix, purcell_rate, thermal_factor)
from qimpedance.errors import (ApproximationWarning, InvalidInputError, ThermalDivergenceError)

from .conftest import GHz, TWO_PI, fF, lr_for, nH
from .oracle_values import COTH_1, READOUT_PURCELL_CLOSED_FORM_S, THERMAL_5GHZ_20MK

HBAR = CONSTANTS.hbar


def _const_z(matrix):
    m = np.asarray(matrix, float)
    return lambda w: m


def _qubit(f=5.93 * GHz, C=65 * fF, index=0):
    return solve_qubit_mode(junction_inductance_for(TWO_PI * f, C), C, index)


def _readout(Cc=5 * fF, Ck=5 * fF, Cr=500 * fF, Cd=100 * fF, fq=5.93 * GHz):
    lj = junction_inductance_for(TWO_PI * fq, 65 * fF + Cc)
    net = qubit_readout_drive(65 * fF, Cc, Cr, lr_for(7 * GHz, Cr), Ck, Cd, 50.0, lj)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return analyze_network(net)


def _weak_impedance(Cc, Ck, Cq, Cd, Lr, wr):
    """Im Z12 of the readout circuit when Cr >> Ck, Cq >> Cc and Cd >> Ck."""
    return lambda w: (Cc * Ck / (Cq * Cd)) * Lr * w / (1 - (w / wr) ** 2)


# --------------------------------------------------------------------------
# drive coupling

def test_decoupled_drive_gives_zero_epsilon():
    q = _qubit()
    ch = DriveChannel(0, 1, 50.0, 100 * fF, q.omega)
    assert drive_coupling_epsilon(_const_z(np.zeros((2, 2))), q, ch) == 0


def test_static_drive_limit():
    q = _qubit()
    ch = DriveChannel(0, 1, 50.0, 100 * fF, 0.0)
    eps = drive_coupling_epsilon(_const_z([[0.0, 2.0], [2.0, 0.0]]), q, ch)
    mag = math.sqrt(q.omega / (2 * HBAR * q.L)) * 2.0
    assert ch.theta == math.pi / 2
    assert eps == pytest.approx(mag * 100 * fF * 1j, rel=1e-14)


def test_epsilon_phase_follows_sign_of_impedance():
    q = _qubit()
    ch = DriveChannel(0, 1, 50.0, 100 * fF, q.omega)
    ep = drive_coupling_epsilon(_const_z([[0.0, 1.0], [1.0, 0.0]]), q, ch)
    em = drive_coupling_epsilon(_const_z([[0.0, -1.0], [-1.0, 0.0]]), q, ch)
    assert cmath.phase(ep) == pytest.approx(ch.theta, abs=1e-14)
    assert em == pytest.approx(-ep, rel=1e-14)


def test_epsilon_matrix_matches_scalar():
    res = _readout()
    r = res.report
    m = drive_coupling_matrix(res.impedance, res.qubits, res.channels)
    eps = drive_coupling_epsilon(res.impedance, res.qubits[0], res.channels[0])
    assert m.epsilon[0, 0] == pytest.approx(eps, rel=1e-14)
    assert r.epsilon[0, 0] == pytest.approx(eps, rel=1e-14)


def test_readout_epsilon_matches_weak_coupling_form():
    # hierarchy Cc/Cq ~ Ck/Cd ~ 1.5e-2 keeps the closed form within 1 %
    Cc = Ck = 1 * fF
    res = _readout(Cc, Ck)
    q, ch = res.qubits[0], res.channels[0]
    wq, wr = q.omega, TWO_PI * 7 * GHz
    Zq = math.sqrt(q.L / q.C)
    closed = (Cc * Ck / (65 * fF * 500 * fF)) * (wq / wr) ** 2 / (1 - (wq / wr) ** 2) \
        / math.sqrt(2 * HBAR * Zq) / math.sqrt(1 + (ch.omega_d * 50.0 * 100 * fF) ** 2)
    assert abs(res.report.epsilon[0, 0]) == pytest.approx(closed, rel=1e-2)


# --------------------------------------------------------------------------
# crosstalk

def test_crosstalk_self_is_zero_dB():
    q = (_qubit(5.0 * GHz, 65 * fF, 0), _qubit(5.2 * GHz, 70 * fF, 1))
    z = _const_z([[0, 0, 3.0], [0, 0, 0.03], [3.0, 0.03, 0]])
    ch = [DriveChannel(0, 2, 50.0, 100 * fF, q[0].omega, qubit=0)]
    x = crosstalk_matrix(z, q, ch)
    assert x.dB[0, 0] == 0.0
    assert x.dB[1, 0] == pytest.approx(-40.0, abs=1e-12)
    assert x.sign[1, 0] == 1.0


def test_crosstalk_disconnected_reports_floor():
    q = (_qubit(5.0 * GHz, 65 * fF, 0), _qubit(5.2 * GHz, 70 * fF, 1))
    z = _const_z([[0, 0, 3.0], [0, 0, 0.0], [3.0, 0.0, 0]])
    ch = [DriveChannel(0, 2, 50.0, 100 * fF, q[0].omega, qubit=0)]
    assert crosstalk_matrix(z, q, ch).dB[1, 0] == CROSSTALK_FLOOR_DB == -200.0


def test_crosstalk_negative_ratio_and_prefactor():
    q = (_qubit(5.0 * GHz, 65 * fF, 0), _qubit(5.2 * GHz, 70 * fF, 1))
    z = _const_z([[0, 0, 3.0], [0, 0, -0.3], [3.0, -0.3, 0]])
    ch = [DriveChannel(0, 2, 50.0, 100 * fF, q[0].omega, qubit=0)]
    x = crosstalk_matrix(z, q, ch)
    assert x.dB[1, 0] == pytest.approx(-20.0, abs=1e-12)
    assert x.sign[1, 0] == -1.0
    expect = 10 * math.log10(q[1].omega * q[0].L_J / (q[0].omega * q[1].L_J))
    assert x.prefactor_dB[1, 0] == pytest.approx(expect, rel=1e-12)
    np.testing.assert_array_equal(x.by_qubit([0]), x.dB[:, [0]])


def test_crosstalk_unassigned_and_zero_denominator():
    q = (_qubit(5.0 * GHz, 65 * fF, 0), _qubit(5.2 * GHz, 70 * fF, 1))
    z = _const_z([[0, 0, 0.0], [0, 0, 1.0], [0.0, 1.0, 0]])
    ch = [DriveChannel(0, 2, 50.0, 100 * fF, 1.0), DriveChannel(1, 2, 50.0, 100 * fF, 1.0,
                                                                  qubit=0)]
    x = crosstalk_matrix(z, q, ch)
    assert np.isnan(x.dB).all()
    with pytest.raises(InvalidInputError):
        crosstalk_matrix(z, q, [replace(ch[1], qubit=5)])


# --------------------------------------------------------------------------
# Purcell rate

def test_purcell_zero_impedance():
    q = _qubit()
    assert purcell_rate(_const_z(np.zeros((2, 2))), q, DriveChannel(0, 1, 50.0, 1e-13, 0.0)) == 0.0


def test_purcell_closed_form_identity():
    # weak-coupling transfer impedance with Lq = 11.12 nH at 5.93 GHz, Cd = 100 fF
    Cq, Cc, Ck, Cr, Cd = 65 * fF, 5 * fF, 5 * fF, 500 * fF, 100 * fF
    wr = TWO_PI * 7 * GHz
    Lr = lr_for(7 * GHz, Cr)
    wq = TWO_PI * 5.93 * GHz
    q = replace(_qubit(), omega=wq, L=11.12 * nH)
    imz = _weak_impedance(Cc, Ck, Cq, Cd, Lr, wr)(wq)
    z = _const_z([[0.0, imz], [imz, 0.0]])
    rate = purcell_rate(z, q, DriveChannel(0, 1, 50.0, Cd, wq))
    assert rate == pytest.approx(READOUT_PURCELL_CLOSED_FORM_S, rel=1e-12)


def test_readout_purcell_network_vs_closed_form():
    Cc = Ck = 1 * fF
    res = _readout(Cc, Ck)
    q = res.qubits[0]
    wq, wr = q.omega, TWO_PI * 7 * GHz
    closed = (2 / q.L) * (Cc * Ck / (65 * fF * 500 * fF)) ** 2 * (wq / wr) ** 4 \
        / (1 - (wq / wr) ** 2) ** 2 * 50.0 / (1 + (wq * 50.0 * 100 * fF) ** 2)
    assert res.report.purcell_rates[0, 0] == pytest.approx(closed, rel=2e-2)


def test_purcell_matrix_and_temperature():
    res = _readout()
    m = purcell_matrix(res.impedance, res.qubits, res.channels)
    hot = purcell_matrix(res.impedance, res.qubits, res.channels, temperature=0.1)
    q = res.qubits[0]
    assert m[0, 0] == res.report.purcell_rates[0, 0]
    assert hot[0, 0] == pytest.approx(m[0, 0] * thermal_factor(q.omega, 0.1), rel=1e-14)


@given(w=st.floats(1e10, 6e10), L=st.floats(5e-9, 20e-9), imz=st.floats(-10, 10),
       Z0=st.floats(10, 100), C=st.floats(1e-14, 5e-13))
def test_epsilon_purcell_consistency(w, L, imz, Z0, C):
    q = replace(_qubit(), omega=w, L=L)
    ch = DriveChannel(0, 1, Z0, C, w)
    z = _const_z([[0.0, imz], [imz, 0.0]])
    eps = drive_coupling_epsilon(z, q, ch)
    J = bath_spectrum(ch)(w)
    x2 = (w * Z0 * C) ** 2
    expect = purcell_rate(z, q, ch)
    assert 4 * abs(eps) ** 2 * HBAR * J * (1 + x2) == pytest.approx(expect, rel=1e-10, abs=1e-300)


# --------------------------------------------------------------------------
# bath and temperature

def test_bath_spectrum_values():
    ch = DriveChannel(0, 1, 50.0, 100 * fF, 0.0)
    b = bath_spectrum(ch)
    assert b(0.0) == 0.0
    w = 1 / (50.0 * 100 * fF)
    assert b(w) == pytest.approx(w * 50.0 / 2, rel=1e-14)
    ws = np.linspace(0, 1e12, 50)
    assert np.all(b(ws) >= 0)


def test_bath_correction_readout_is_negligible():
    res = _readout()
    ch = res.channels[0]
    b = bath_spectrum(ch, coupling_norm(res.impedance, res.qubits, ch))
    assert b.valid and b.relative_correction < 1e-4
    w = res.qubits[0].omega
    assert abs(b.full(w) / b.simplified(w) - 1) < 1e-4


def test_bath_correction_flags_invalid():
    ch = DriveChannel(0, 1, 50.0, 100 * fF, 0.0)
    with pytest.warns(ApproximationWarning):
        assert not bath_spectrum(ch, 5 * fF).valid
    with pytest.raises(InvalidInputError):
        bath_spectrum(ch, -1.0)


def test_thermal_factor_values():
    assert thermal_factor(1e10, 0.0) == 1.0
    T = 0.05
    w = 2 * CONSTANTS.k_B * T / HBAR
    assert thermal_factor(w, T) == pytest.approx(COTH_1, rel=1e-14)
    f = thermal_factor(TWO_PI * 5 * GHz, 0.020)
    assert f == pytest.approx(THERMAL_5GHZ_20MK, rel=1e-14)
    assert f - 1 < 2e-5


def test_thermal_factor_errors():
    with pytest.raises(ThermalDivergenceError):
        thermal_factor(0.0, 0.01)
    with pytest.raises(InvalidInputError):
        thermal_factor(1.0, -1.0)
