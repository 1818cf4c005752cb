"""Seeded random-circuit cross-validation of closed forms against the oracle."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .cauer import build_frames
from .circuits import random_dispersive_circuit
from .dispersive import exchange_matrix
from .errors import QImpedanceWarning
from .oracle import drive_projection_D, j_from_blockdiag, schrieffer_wolff

__all__ = ["ValidationThresholds", "CircuitCheck", "ValidationSummary", "check_circuit",
           "validate_random_circuits"]


@dataclass(frozen=True)
class ValidationThresholds:
    j_exact: float = 1e-2
    j_order2: float = 1e-10
    d_identity: float = 1e-10


@dataclass(frozen=True)
class CircuitCheck:
    """Discrepancies of one random circuit.

    ``j_exact`` and ``j_order2`` are the largest elementwise relative
    differences of the impedance-formula J against numerically exact and
    second-order block diagonalization. ``d_identity`` is the normwise
    relative difference of the two drive-projection routes.
    """

    n_qubits: int
    n_modes: int
    n_drives: int
    g_over_delta: float
    j_exact: float
    j_order2: float
    d_identity: float


def _rel(a: np.ndarray, ref: np.ndarray) -> float:
    mask = ~np.eye(a.shape[0], dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(a - ref)[mask] / np.abs(ref)[mask]))


def check_circuit(rc) -> CircuitCheck:
    """Compare every closed form on one :class:`~qimpedance.circuits.RandomCircuit`."""
    c, q = rc.realization, rc.qubits
    fr = build_frames(c, q)
    J = exchange_matrix(rc.impedance, q)
    J2 = j_from_blockdiag(schrieffer_wolff(fr.M1, len(q), 2, omega_R=c.omegas), q)
    JE = j_from_blockdiag(schrieffer_wolff(fr.M1, len(q), "exact"), q)
    d_err = 0.0
    if c.n_drives:
        wq = np.array([x.omega for x in q])
        D = drive_projection_D(fr.M1, c.V_unit, wq, c.omegas)
        Dz = np.array([[rc.impedance.im(x.omega)[x.index, c.n_qubits + d] / np.sqrt(x.L)
                        for d in range(c.n_drives)] for x in q])
        scale = float(np.max(np.abs(Dz)))
        d_err = float(np.max(np.abs(D - Dz))) / scale if scale > 0 else float(np.max(np.abs(D)))
    return CircuitCheck(n_qubits=len(q), n_modes=c.n_modes, n_drives=c.n_drives,
                        g_over_delta=rc.g_over_delta, j_exact=_rel(J, JE),
                        j_order2=_rel(J, J2), d_identity=d_err)


@dataclass(frozen=True)
class ValidationSummary:
    n_circuits: int
    seed: int
    gmax_ratio: float
    max_j_exact: float
    max_j_order2: float
    max_d_identity: float
    thresholds: ValidationThresholds
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def validate_random_circuits(n_circuits: int, seed: int = 0, gmax_ratio: float = 0.05,
                             thresholds: ValidationThresholds = ValidationThresholds()
                             ) -> ValidationSummary:
    """Run :func:`check_circuit` on ``n_circuits`` seeded random circuits.

    Circuits have 2 to 4 qubits, 1 to 5 modes and 1 or 2 drive ports.
    """
    rng = np.random.default_rng(seed)
    checks = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QImpedanceWarning)
        for _ in range(int(n_circuits)):
            rc = random_dispersive_circuit(rng, int(rng.integers(2, 5)), int(rng.integers(1, 6)),
                                           int(rng.integers(1, 3)), gmax_ratio=gmax_ratio)
            checks.append(check_circuit(rc))
    mj = max((c.j_exact for c in checks), default=0.0)
    m2 = max((c.j_order2 for c in checks), default=0.0)
    md = max((c.d_identity for c in checks), default=0.0)
    ok = mj <= thresholds.j_exact and m2 <= thresholds.j_order2 and md <= thresholds.d_identity
    return ValidationSummary(n_circuits=int(n_circuits), seed=int(seed), gmax_ratio=gmax_ratio,
                             max_j_exact=mj, max_j_order2=m2, max_d_identity=md,
                             thresholds=thresholds, passed=bool(ok))
