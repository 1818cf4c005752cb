"""Canonical Cauer realization of a pole-residue impedance and its frames.

The realization has a shunt capacitance ``C0[p]`` at every port and one
internal LC mode per pole, coupled to the ports by ideal transformers with
turns-ratio rows ``rtilde_k = (r_k | v_k)`` over (qubit | drive) ports so
that ``A_k = rtilde_k^T rtilde_k / C_R[k]``. By default ``C_R = 1`` and the
mode inductance is ``1/omega_k**2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import PoleResidueImpedance, QubitMode, Tolerances
from .errors import (DispersiveWarning, InvalidInputError, InvalidResidueError,
                     UnsupportedCapacitiveCouplingError, UnsupportedInductiveStageError)
from .network import check_lossless_passivity

__all__ = [
    "CauerRealization",
    "FrameMatrices",
    "synthesize",
    "build_frames",
    "bare_coupling_g",
    "coupling_matrix_g",
]

_DEFAULT_TOL = Tolerances()


def _ro(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CauerRealization:
    """Synthesized Cauer network.

    Attributes
    ----------
    C0 : (N + N_D,) ndarray
        Port shunt capacitances; qubit ports first.
    U : ndarray
        Orthonormal port rotation (identity in strict-diagonal mode).
    R : (M, N) ndarray
        Turns ratios between modes and qubit ports.
    V : (M, N_D) ndarray
        Turns ratios between modes and drive ports.
    omegas : (M,) ndarray
        Mode frequencies in rad/s.
    C_R : (M,) ndarray
        Mode capacitances (ones by default).
    """

    C0: np.ndarray
    U: np.ndarray
    R: np.ndarray
    V: np.ndarray
    omegas: np.ndarray
    C_R: np.ndarray

    def __post_init__(self):
        m = np.size(self.omegas)
        C0 = np.asarray(self.C0, dtype=float).reshape(-1)
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        V = np.asarray(self.V, dtype=float)
        if R.shape[0] != m:
            raise InvalidInputError(f"R must have {m} rows, got shape {R.shape}")
        V = V.reshape(m, C0.size - R.shape[1])
        for name, val in (("C0", C0), ("U", self.U), ("R", R), ("V", V),
                          ("omegas", np.reshape(self.omegas, m)),
                          ("C_R", np.reshape(self.C_R, m))):
            object.__setattr__(self, name, _ro(val))
        if np.any(self.C0 <= 0) or np.any(self.C_R <= 0):
            raise InvalidInputError("capacitances must be positive")

    @property
    def n_qubits(self) -> int:
        return self.R.shape[1]

    @property
    def n_drives(self) -> int:
        return self.V.shape[1]

    @property
    def n_modes(self) -> int:
        return self.omegas.size

    @property
    def rtilde(self) -> np.ndarray:
        """Full turns-ratio matrix ``[R | V]``, shape ``(M, N + N_D)``."""
        return np.hstack([self.R, self.V])

    @property
    def L_R(self) -> np.ndarray:
        """Mode inductances ``1/(omega_k**2 C_R[k])``."""
        return 1.0 / (self.omegas ** 2 * self.C_R)

    @property
    def C_qubit(self) -> np.ndarray:
        return self.C0[:self.n_qubits]

    @property
    def C_drive(self) -> np.ndarray:
        return self.C0[self.n_qubits:]

    @property
    def R_unit(self) -> np.ndarray:
        """Qubit turns ratios rescaled to the ``C_R = 1`` normalization."""
        return self.R / np.sqrt(self.C_R)[:, None]

    @property
    def V_unit(self) -> np.ndarray:
        return self.V / np.sqrt(self.C_R)[:, None]

    def residue(self, k: int) -> np.ndarray:
        r = self.rtilde[k]
        return np.outer(r, r) / self.C_R[k]

    def to_pole_residue(self) -> PoleResidueImpedance:
        """Pole-residue impedance realized by this network."""
        n = self.C0.size
        # modes split from one degenerate pole share a frequency: recombine
        uniq = np.unique(self.omegas)
        res = np.zeros((uniq.size, n, n))
        for k in range(self.n_modes):
            res[np.searchsorted(uniq, self.omegas[k])] += self.residue(k)
        Ru = self.U
        A0 = Ru @ np.diag(1.0 / self.C0) @ Ru.T
        res = np.einsum("ij,kjl,ml->kim", Ru, res, Ru) if res.size else res
        return PoleResidueImpedance(A0, uniq, res)

    def nodal_matrices(self):
        """Lumped nodal description ``(C, Gamma, B)`` of the realization.

        Coordinates are the port fluxes followed by the mode fluxes. The
        transformers are absorbed into the capacitance matrix, which is
        exactly invertible:
        ``C^{-1} = [[C_S^{-1} + Rt^T C_R^{-1} Rt, Rt^T C_R^{-1}], [C_R^{-1} Rt, C_R^{-1}]]``.
        """
        if not np.allclose(self.U, np.eye(self.U.shape[0])):
            raise InvalidInputError("nodal form requires the strict-diagonal realization")
        n, m = self.C0.size, self.n_modes
        Rt = self.rtilde
        Cs = np.diag(self.C0)
        C = np.zeros((n + m, n + m))
        C[:n, :n] = Cs
        C[:n, n:] = -Cs @ Rt.T
        C[n:, :n] = -Rt @ Cs
        C[n:, n:] = np.diag(self.C_R) + Rt @ Cs @ Rt.T
        G = np.zeros((n + m, n + m))
        G[n:, n:] = np.diag(1.0 / self.L_R)
        B = np.vstack([np.eye(n), np.zeros((m, n))])
        return C, G, B

    def renormalized(self, C_R: Sequence[float]) -> "CauerRealization":
        """Same impedance with different mode capacitances.

        Turns ratios scale by ``sqrt(C_R_new / C_R_old)`` so every residue
        is unchanged; the mode inductances follow from the pole frequencies.
        """
        C_R = np.asarray(C_R, dtype=float).reshape(self.n_modes)
        s = np.sqrt(C_R / self.C_R)[:, None]
        return replace(self, R=self.R * s, V=self.V * s, C_R=C_R)

    def flipped(self, k: int) -> "CauerRealization":
        """Gauge copy with the sign of ``rtilde_k`` reversed."""
        s = np.ones(self.n_modes)
        s[k] = -1.0
        return replace(self, R=self.R * s[:, None], V=self.V * s[:, None])


def _rank1_factor(A: np.ndarray, tol: float, k: int) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (A + A.T))
    top = float(np.max(np.abs(w), initial=0.0))
    if top == 0.0:
        return np.zeros(A.shape[0])
    if w.size > 1 and abs(w[-2]) > tol * top:
        raise InvalidResidueError(
            f"residue {k + 1} is not rank one (second eigenvalue ratio {abs(w[-2]) / top:.3e})")
    r = math.sqrt(max(w[-1], 0.0)) * v[:, -1]
    nz = np.flatnonzero(np.abs(r) > 1e-12 * np.max(np.abs(r)))
    if nz.size and r[nz[0]] < 0:
        r = -r
    return r


def synthesize(z: PoleResidueImpedance, n_qubit_ports: int,
               n_drive_ports: int | None = None, *, tol: Tolerances = _DEFAULT_TOL,
               strict_diagonal: bool = True, split_degenerate: bool = False
               ) -> CauerRealization:
    """Canonical Cauer realization of ``z``.

    Parameters
    ----------
    z : PoleResidueImpedance
        Ports ordered qubits first, then drives.
    n_qubit_ports, n_drive_ports : int
        Port partition; ``n_drive_ports`` defaults to the remainder.
    strict_diagonal : bool
        Reject a non-diagonal ``A0`` (direct port-to-port capacitance).
    split_degenerate : bool
        Realize a higher-rank residue (merged degenerate pole) as several
        rank-one modes at the same frequency instead of raising.

    Raises
    ------
    UnsupportedInductiveStageError
        If ``A_inf`` is nonzero.
    InvalidResidueError
        If ``z`` fails the lossless-passivity checks.
    UnsupportedCapacitiveCouplingError
        If ``A0`` is not diagonal in strict mode.
    """
    n = z.n_ports
    if n_drive_ports is None:
        n_drive_ports = n - n_qubit_ports
    if n_qubit_ports < 0 or n_drive_ports < 0 or n_qubit_ports + n_drive_ports != n:
        raise InvalidInputError(
            f"port partition {n_qubit_ports}+{n_drive_ports} does not match {n} ports")

    ref = float(z.omegas[-1]) if z.n_poles else 2 * math.pi * 1e10
    scale = max(float(np.max(np.abs(z.A0), initial=0.0)),
                float(np.max(np.abs(z.residues), initial=0.0)))
    if float(np.max(np.abs(z.A_inf), initial=0.0)) * ref ** 2 > 1e-12 * scale:
        raise UnsupportedInductiveStageError(
            "impedance has a purely inductive A_inf stage; eliminate it before synthesis")

    problems = check_lossless_passivity(z, tol)
    rank_only = [p for p in problems if p.kind == "rank"]
    fatal = [p for p in problems if p.kind != "rank"]
    if fatal or (rank_only and not split_degenerate):
        raise InvalidResidueError("; ".join(p.message for p in fatal + rank_only))

    d = np.sqrt(np.diag(z.A0))
    off = z.A0 - np.diag(np.diag(z.A0))
    off_rel = float(np.max(np.abs(off) / np.outer(d, d), initial=0.0))
    if off_rel > tol.diagonal_tol:
        if strict_diagonal:
            raise UnsupportedCapacitiveCouplingError(
                f"A0 has off-diagonal entries (relative {off_rel:.3e}); direct capacitive "
                "coupling between ports is not supported")
        w, U = np.linalg.eigh(z.A0)
        C0 = 1.0 / w
    else:
        U = np.eye(n)
        C0 = 1.0 / np.diag(z.A0)

    rows, omegas = [], []
    for k, A in enumerate(z.residues):
        A = U.T @ A @ U
        if split_degenerate:
            w, v = np.linalg.eigh(0.5 * (A + A.T))
            top = float(np.max(np.abs(w), initial=0.0))
            for j in range(w.size - 1, -1, -1):
                if w[j] > tol.rank1_tol * top:
                    r = math.sqrt(w[j]) * v[:, j]
                    nz = np.flatnonzero(np.abs(r) > 1e-12 * np.max(np.abs(r)))
                    rows.append(-r if r[nz[0]] < 0 else r)
                    omegas.append(z.omegas[k])
        else:
            rows.append(_rank1_factor(A, tol.rank1_tol, k))
            omegas.append(z.omegas[k])
    Rt = np.array(rows).reshape(len(rows), n)
    return CauerRealization(C0=C0, U=U, R=Rt[:, :n_qubit_ports], V=Rt[:, n_qubit_ports:],
                            omegas=np.array(omegas), C_R=np.ones(len(rows)))


@dataclass(frozen=True, eq=False)
class FrameMatrices:
    """Matrices of the successive coordinate frames.

    ``C_full`` and ``M0`` describe the Cauer circuit with junctions
    replaced by their renormalized inductances (qubit ports only). After
    rescaling by ``S = diag(C0^{-1/2}, C_R^{-1/2})`` and the transformation
    ``T``, the capacitance becomes the identity and the stiffness is ``M1``.
    """

    C_full: np.ndarray
    M0: np.ndarray
    S: np.ndarray
    T: np.ndarray
    M1: np.ndarray
    Omega_J: np.ndarray
    Omega_R: np.ndarray

    @property
    def n_qubits(self) -> int:
        return self.Omega_J.shape[0]

    @property
    def n_modes(self) -> int:
        return self.Omega_R.shape[0]

    @property
    def C_rescaled(self) -> np.ndarray:
        return self.S @ self.C_full @ self.S


def build_frames(c: CauerRealization, qubit_modes: Sequence[QubitMode],
                 rtol: float = 1e-9) -> FrameMatrices:
    """Capacitance, stiffness and transformed stiffness matrices.

    The qubit block of ``M1`` is set to ``omega_i**2`` exactly; it equals
    ``1/(L_i C_i)`` up to rounding.
    """
    n, m = c.n_qubits, c.n_modes
    if len(qubit_modes) != n:
        raise InvalidInputError(f"expected {n} qubit modes, got {len(qubit_modes)}")
    if not np.allclose(c.U, np.eye(c.U.shape[0]), atol=1e-12):
        raise InvalidInputError("frames require the strict-diagonal realization (U = 1)")
    Cq = c.C_qubit
    for i, q in enumerate(qubit_modes):
        if abs(q.C - Cq[i]) > rtol * Cq[i]:
            raise InvalidInputError(
                f"qubit {q.label}: C = {q.C:.6e} F does not match the synthesized "
                f"shunt capacitance {Cq[i]:.6e} F")
    w = np.array([q.omega for q in qubit_modes])
    L = np.array([q.L for q in qubit_modes])
    R = c.R
    C_full = np.zeros((n + m, n + m))
    C_full[:n, :n] = np.diag(Cq)
    C_full[:n, n:] = -np.diag(Cq) @ R.T
    C_full[n:, :n] = -R @ np.diag(Cq)
    C_full[n:, n:] = np.diag(c.C_R) + R @ np.diag(Cq) @ R.T
    M0 = np.diag(np.concatenate([1.0 / L, 1.0 / c.L_R]))
    S = np.diag(np.concatenate([1.0 / np.sqrt(Cq), 1.0 / np.sqrt(c.C_R)]))
    K = np.sqrt(Cq)[:, None] * c.R_unit.T
    T = np.eye(n + m)
    T[:n, n:] = K
    M1 = np.zeros((n + m, n + m))
    M1[:n, :n] = np.diag(w ** 2)
    M1[:n, n:] = (w ** 2)[:, None] * K
    M1[n:, :n] = M1[:n, n:].T
    M1[n:, n:] = np.diag(c.omegas ** 2) + K.T @ ((w ** 2)[:, None] * K)
    return FrameMatrices(C_full=C_full, M0=M0, S=S, T=T, M1=M1,
                         Omega_J=np.diag(w), Omega_R=np.diag(c.omegas))


def bare_coupling_g(c: CauerRealization, q: QubitMode, k: int,
                    tol: Tolerances = _DEFAULT_TOL) -> float:
    """Bare qubit-mode coupling ``g = sqrt(omega_i omega_k)/2 * r_ki sqrt(C_i)``."""
    i = q.index
    if not 0 <= i < c.n_qubits:
        raise InvalidInputError(f"qubit index {i} out of range")
    if not 0 <= k < c.n_modes:
        raise InvalidInputError(f"mode index {k} out of range")
    x = float(c.R_unit[k, i]) * math.sqrt(c.C0[i])
    if abs(x) > tol.smallness_warn:
        warnings.warn(f"qubit {q.label}, mode {k}: r*sqrt(C) = {x:.3f} is not small",
                      DispersiveWarning, stacklevel=2)
    return 0.5 * math.sqrt(q.omega * c.omegas[k]) * x


def coupling_matrix_g(c: CauerRealization, qubits: Sequence[QubitMode],
                      tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """``(N, M)`` matrix of bare couplings."""
    g = np.zeros((len(qubits), c.n_modes))
    for a, q in enumerate(qubits):
        for k in range(c.n_modes):
            g[a, k] = bare_coupling_g(c, q, k, tol)
    return g
