import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from qimpedance.cauer import (CauerRealization, bare_coupling_g, build_frames,
                              coupling_matrix_g, synthesize)
from qimpedance.circuits import random_dispersive_circuit, random_lossless_impedance, two_qubit_bus
from qimpedance.core import PoleResidueImpedance
from qimpedance.dispersive import solve_qubit_mode
from qimpedance.errors import (DispersiveWarning, InvalidInputError, InvalidResidueError,
                               UnsupportedCapacitiveCouplingError, UnsupportedInductiveStageError)
from qimpedance.network import extract_modes, nodal_impedance

from .conftest import GHz, TWO_PI, fF, frequencies_away_from, lr_for, nH, rel


def _bus_realization(Cc=5 * fF, Cr=500 * fF):
    net = two_qubit_bus(65 * fF, Cc, Cr, lr_for(7 * GHz, Cr), 10 * nH, 10 * nH)
    c = synthesize(extract_modes(net).to_pole_residue(), 2)
    q = tuple(solve_qubit_mode(10 * nH, c.C0[i], i) for i in range(2))
    return net, c, q


def test_scalar_one_port():
    C, A1, w = 70 * fF, 4e12, 4e10
    c = synthesize(PoleResidueImpedance([[1 / C]], [w], [[[A1]]]), 1)
    assert c.C0[0] == pytest.approx(C, rel=1e-14)
    assert c.R[0, 0] == pytest.approx(math.sqrt(A1), rel=1e-14)
    np.testing.assert_array_equal(c.C_R, [1.0])
    assert c.L_R[0] == pytest.approx(1 / w ** 2)


def test_rank_one_factor_sign_convention():
    z = PoleResidueImpedance(np.eye(2), [1.0], [[[4.0, 2.0], [2.0, 1.0]]])
    c = synthesize(z, 1, 1)
    np.testing.assert_allclose(c.rtilde[0], [2.0, 1.0], rtol=1e-14)
    z = PoleResidueImpedance(np.eye(2), [1.0], [[[4.0, -2.0], [-2.0, 1.0]]])
    np.testing.assert_allclose(synthesize(z, 1, 1).rtilde[0], [2.0, -1.0], rtol=1e-14)


def test_bus_dc_capacitance_is_qubit_plus_coupler():
    # at DC the bus inductor grounds the bus node, so each port sees Cq + Cc
    _, c, _ = _bus_realization()
    np.testing.assert_allclose(c.C0, [70 * fF, 70 * fF], rtol=1e-12)
    np.testing.assert_array_equal(c.U, np.eye(2))


def test_realization_invariants_random():
    rng = np.random.default_rng(7)
    for _ in range(20):
        z = random_lossless_impedance(rng, int(rng.integers(1, 5)), int(rng.integers(0, 5)))
        c = synthesize(z, z.n_ports)
        np.testing.assert_allclose(c.U @ np.diag(1 / c.C0) @ c.U.T, z.A0, rtol=1e-10)
        for k in range(c.n_modes):
            assert rel(c.residue(k), z.residues[k]) <= 1e-10
            r = c.rtilde[k]
            assert r[np.flatnonzero(np.abs(r) > 1e-12 * np.abs(r).max())[0]] > 0


def test_inductive_stage_is_refused():
    z = PoleResidueImpedance([[1e13]], [4e10], [[[1e12]]], A_inf=[[1e-9]])
    with pytest.raises(UnsupportedInductiveStageError):
        synthesize(z, 1)


def test_rank_two_residue_is_refused():
    z = PoleResidueImpedance(np.eye(2) * 1e13, [4e10], [np.eye(2) * 1e12])
    with pytest.raises(InvalidResidueError, match="rank"):
        synthesize(z, 2)
    c = synthesize(z, 2, split_degenerate=True)
    assert c.n_modes == 2 and np.allclose(c.omegas, 4e10)
    z_back = c.to_pole_residue()
    np.testing.assert_allclose(z_back.residues, z.residues, atol=1e-3)


def test_direct_capacitive_coupling():
    A0 = np.array([[1.0, 0.1], [0.1, 2.0]]) * 1e13
    z = PoleResidueImpedance(A0, [], [])
    with pytest.raises(UnsupportedCapacitiveCouplingError):
        synthesize(z, 2)
    c = synthesize(z, 2, strict_diagonal=False)
    np.testing.assert_allclose(c.U @ np.diag(1 / c.C0) @ c.U.T, A0, rtol=1e-12)


def test_port_partition_mismatch():
    with pytest.raises(InvalidInputError):
        synthesize(PoleResidueImpedance(np.eye(2), [], []), 3)


# --------------------------------------------------------------------------
# frames

def test_no_resonators():
    c = synthesize(PoleResidueImpedance([[1 / (70 * fF)]], [], []), 1)
    q = [solve_qubit_mode(10 * nH, 70 * fF)]
    fr = build_frames(c, q)
    np.testing.assert_array_equal(fr.M1, [[q[0].omega ** 2]])
    np.testing.assert_array_equal(fr.T, np.eye(1))


def test_one_qubit_one_mode_off_diagonal():
    C, r, wR = 70 * fF, 2e6, TWO_PI * 7 * GHz
    c = synthesize(PoleResidueImpedance([[1 / C]], [wR], [[[r * r]]]), 1)
    q = [solve_qubit_mode(10 * nH, C)]
    fr = build_frames(c, q)
    assert fr.M1[0, 1] == pytest.approx(q[0].omega ** 2 * math.sqrt(C) * r, rel=1e-14)
    assert fr.M1[1, 1] == pytest.approx(wR ** 2 + q[0].omega ** 2 * C * r * r, rel=1e-14)


def test_resonator_correction_vanishes_without_coupling():
    c = CauerRealization(C0=[70 * fF], U=np.eye(1), R=[[0.0]], V=np.zeros((1, 0)),
                         omegas=[4e10], C_R=[1.0])
    fr = build_frames(c, [solve_qubit_mode(10 * nH, 70 * fF)])
    assert fr.M1[1, 1] == 4e10 ** 2
    assert fr.M1[0, 1] == 0.0


@pytest.mark.parametrize("seed", range(8))
def test_frame_identities(seed):
    rc = random_dispersive_circuit(np.random.default_rng(seed), 3, 4, 1)
    fr = build_frames(rc.realization, rc.qubits)
    n = fr.C_full.shape[0]
    np.testing.assert_allclose(fr.T.T @ fr.C_rescaled @ fr.T, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(fr.T.T @ fr.S @ fr.M0 @ fr.S @ fr.T, fr.M1, rtol=1e-9,
                               atol=1e-9 * np.abs(fr.M1).max())
    pencil = sla.eigh(fr.M0, fr.C_full, eigvals_only=True)
    np.testing.assert_allclose(pencil, np.linalg.eigvalsh(fr.M1), rtol=1e-9)
    np.testing.assert_array_equal(np.diag(fr.M1)[:3], [q.omega ** 2 for q in rc.qubits])


def test_frames_reject_wrong_qubits():
    _, c, q = _bus_realization()
    with pytest.raises(InvalidInputError):
        build_frames(c, q[:1])
    with pytest.raises(InvalidInputError, match="does not match"):
        build_frames(c, (solve_qubit_mode(10 * nH, 60 * fF, 0), q[1]))


# --------------------------------------------------------------------------
# bare couplings

def test_zero_turns_ratio_gives_zero_coupling():
    c = CauerRealization(C0=[70 * fF], U=np.eye(1), R=[[0.0]], V=np.zeros((1, 0)),
                         omegas=[4e10], C_R=[1.0])
    assert bare_coupling_g(c, solve_qubit_mode(10 * nH, 70 * fF), 0) == 0.0


def test_bus_coupling_matches_weak_coupling_form():
    # weak-coupling hierarchy: Cc/Cq ~ 5e-3, Cq/Cr ~ 0.13
    Cc, Cr = 0.3 * fF, 500 * fF
    _, c, q = _bus_realization(Cc, Cr)
    g = coupling_matrix_g(c, q)
    Z1 = math.sqrt(q[0].L / (65 * fF))
    Zr = math.sqrt(lr_for(7 * GHz, Cr) / Cr)
    g_weak = Cc / (2 * math.sqrt(Z1 * Zr) * 65 * fF * Cr)
    assert abs(g[0, 0] / g_weak - 1) <= 5e-3


def test_doubling_coupler_doubles_g():
    _, c1, q1 = _bus_realization(0.5 * fF)
    _, c2, q2 = _bus_realization(1.0 * fF)
    ratio = coupling_matrix_g(c2, q2)[0, 0] / coupling_matrix_g(c1, q1)[0, 0]
    assert ratio == pytest.approx(2.0, rel=1e-2)


def test_large_coupling_warns():
    c = synthesize(PoleResidueImpedance([[1 / (70 * fF)]], [4e10], [[[(0.5 / math.sqrt(70 * fF)) ** 2]]]), 1)
    with pytest.warns(DispersiveWarning):
        bare_coupling_g(c, solve_qubit_mode(10 * nH, 70 * fF), 0)


def test_coupling_index_checks():
    _, c, q = _bus_realization()
    with pytest.raises(InvalidInputError):
        bare_coupling_g(c, q[0], 5)


# --------------------------------------------------------------------------
# round trip and gauge freedom

@pytest.mark.parametrize("seed", range(10))
def test_synthesis_round_trip(seed):
    rng = np.random.default_rng(seed)
    z = random_lossless_impedance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
    c = synthesize(z, z.n_ports)
    C, G, B = c.nodal_matrices()
    for w in frequencies_away_from(rng, list(z.omegas), 50):
        assert rel(nodal_impedance(C, G, B, w).imag, z.im(w)) <= 1e-9


@given(st.integers(0, 2 ** 32 - 1), st.data())
def test_sign_gauge_flip_leaves_spectrum_and_residues(seed, data):
    rc = random_dispersive_circuit(np.random.default_rng(seed), 2, 3, 1)
    k = data.draw(st.integers(0, rc.realization.n_modes - 1))
    c, cf = rc.realization, rc.realization.flipped(k)
    np.testing.assert_allclose(cf.residue(k), c.residue(k), rtol=1e-15)
    e1 = np.linalg.eigvalsh(build_frames(c, rc.qubits).M1)
    e2 = np.linalg.eigvalsh(build_frames(cf, rc.qubits).M1)
    np.testing.assert_allclose(e1, e2, rtol=1e-12)


def test_renormalized_mode_capacitance_keeps_residues():
    rc = random_dispersive_circuit(np.random.default_rng(11), 3, 4, 2)
    c = rc.realization
    c2 = c.renormalized([0.5, 2.0, 7.0, 1e-3])
    for k in range(c.n_modes):
        np.testing.assert_allclose(c2.residue(k), c.residue(k), rtol=1e-12)
    np.testing.assert_allclose(c2.R_unit, c.R_unit, rtol=1e-12)
    e1 = np.linalg.eigvalsh(build_frames(c, rc.qubits).M1)
    e2 = np.linalg.eigvalsh(build_frames(c2, rc.qubits).M1)
    np.testing.assert_allclose(e1, e2, rtol=1e-12)
