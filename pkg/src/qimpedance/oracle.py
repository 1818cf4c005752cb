"""Independent numerical checks of the closed-form couplings.

Schrieffer-Wolff block diagonalization of the transformed stiffness
matrix ``M1`` (perturbative second order and numerically exact), the
drive projection matrix, and exact normal modes of linearized circuits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from .core import LinearNetwork, QubitMode, Tolerances
from .errors import ConvergenceError, InvalidInputError, SingularDenominatorError
from .network import nodal_matrices

__all__ = [
    "BlockDiagonalResult",
    "schrieffer_wolff",
    "j_from_blockdiag",
    "drive_projection_D",
    "NormalModes",
    "normal_modes",
    "exact_normal_modes",
    "off_block_norm",
]

_DEFAULT_TOL = Tolerances()


@dataclass(frozen=True, eq=False)
class BlockDiagonalResult:
    """Outcome of a block diagonalization ``M_tilde = exp(-S) M1 exp(S)``.

    For ``order=2`` the blocks of ``M_tilde`` are the explicit second-order
    sums and ``residual`` is the off-block norm left by the first-order
    generator. For ``order="exact"`` ``residual`` is the off-block norm of
    the rotated matrix.
    """

    M_tilde: np.ndarray
    S: np.ndarray
    order: int | str
    residual: float
    n_qubits: int
    iterations: int = 0

    @property
    def qubit_block(self) -> np.ndarray:
        n = self.n_qubits
        return self.M_tilde[:n, :n]


def off_block_norm(M: np.ndarray, n: int) -> float:
    """Frobenius norm of the qubit-resonator block of ``M``."""
    return float(np.linalg.norm(M[:n, n:]))


def _check_gaps(a: np.ndarray, b: np.ndarray, tol: Tolerances) -> None:
    for i, ai in enumerate(a):
        for k, bk in enumerate(b):
            if abs(ai - bk) < tol.degeneracy_tol * abs(ai):
                raise SingularDenominatorError(
                    f"qubit {i} and mode {k} are degenerate (omega^2 = {ai:.6e})",
                    qubit=i, mode=k)


def schrieffer_wolff(M1: np.ndarray, n_qubits: int, order: int | str = 2, *,
                     omega_R: np.ndarray | None = None, tol: Tolerances = _DEFAULT_TOL,
                     max_iter: int = 100, target: float = 1e-12) -> BlockDiagonalResult:
    """Block-diagonalize ``M1`` between the qubit and resonator subspaces.

    Parameters
    ----------
    M1 : (N + M, N + M) ndarray
        Symmetric stiffness matrix, qubit coordinates first.
    n_qubits : int
        Size ``N`` of the qubit block.
    order : {2, "exact"}
        ``2`` evaluates the explicit second-order sums; ``"exact"`` builds
        the least-action rotation onto the qubit-like eigenspace.
    omega_R : (M,) ndarray, optional
        Unperturbed resonator frequencies used in the second-order
        denominators. Defaults to ``sqrt(diag(M1))`` of the resonator block.
    """
    M1 = np.asarray(M1, dtype=float)
    n = int(n_qubits)
    size = M1.shape[0]
    if M1.shape != (size, size) or not 0 <= n <= size:
        raise InvalidInputError("M1 must be square and contain the qubit block")
    scale = max(float(np.linalg.norm(M1)), 1e-300)
    if float(np.max(np.abs(M1 - M1.T))) > 1e-12 * scale:
        raise InvalidInputError("M1 must be symmetric")
    a = np.diag(M1)[:n].copy()
    b = np.diag(M1)[n:].copy() if omega_R is None else np.asarray(omega_R, float) ** 2
    if b.size != size - n:
        raise InvalidInputError("omega_R length does not match the resonator block")
    _check_gaps(a, b, tol)

    if order == 2:
        V = M1[:n, n:]
        S = np.zeros_like(M1)
        S[:n, n:] = V / (b[None, :] - a[:, None])
        S[n:, :n] = -S[:n, n:].T
        Mt = np.zeros_like(M1)
        inv_q = 1.0 / (a[:, None] - b[None, :])  # (N, M)
        Mt[:n, :n] = M1[:n, :n] + 0.5 * ((V * inv_q) @ V.T + V @ (V * inv_q).T)
        Mt[n:, n:] = M1[n:, n:] - 0.5 * ((V * inv_q).T @ V + V.T @ (V * inv_q))
        rot = sla.expm(-S) @ M1 @ sla.expm(S)
        return BlockDiagonalResult(M_tilde=Mt, S=S, order=2,
                                   residual=off_block_norm(rot, n), n_qubits=n)
    if order != "exact":
        raise InvalidInputError(f"order must be 2 or 'exact', got {order!r}")

    P0 = np.zeros((size, size))
    P0[:n, :n] = np.eye(n)
    U_tot = np.eye(size)
    M = M1.copy()
    for it in range(1, max_iter + 1):
        w, v = np.linalg.eigh(M)
        weight = np.sum(v[:n] ** 2, axis=0)
        sel = np.argsort(-weight, kind="stable")[:n]
        Vq = v[:, sel]
        P = Vq @ Vq.T
        Wm = P @ P0 + (np.eye(size) - P) @ (np.eye(size) - P0)
        U, _ = sla.polar(Wm)
        U_tot = U_tot @ U
        M = U.T @ M @ U
        M = 0.5 * (M + M.T)
        res = off_block_norm(M, n)
        if res <= target * scale:
            break
    else:
        raise ConvergenceError(f"block diagonalization did not converge in {max_iter} steps")
    S = sla.logm(U_tot)
    S = np.real(S)
    S = 0.5 * (S - S.T)
    M_t = M.copy()
    M_t[:n, n:] = 0.0
    M_t[n:, :n] = 0.0
    return BlockDiagonalResult(M_tilde=M_t, S=S, order="exact", residual=res, n_qubits=n,
                               iterations=it)


def j_from_blockdiag(result: BlockDiagonalResult, qubits: Sequence[QubitMode]) -> np.ndarray:
    """``J_ij = (1/2) sqrt(Z_i Z_j) M_tilde_ij`` with ``Z_i = 1/omega_i``."""
    n = result.n_qubits
    if len(qubits) != n:
        raise InvalidInputError("qubit count does not match the block diagonalization")
    Z = np.array([1.0 / q.omega for q in qubits])
    J = 0.5 * np.sqrt(np.outer(Z, Z)) * result.M_tilde[:n, :n]
    np.fill_diagonal(J, 0.0)
    return J


def drive_projection_D(M1: np.ndarray, V: np.ndarray, omega_q: np.ndarray,
                       omega_R: np.ndarray, tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """``D_id = -sum_k (M1)_ik v_kd / (omega_i**2 - omega_Rk**2)``.

    ``V`` holds the drive turns ratios in the unit mode-capacitance
    normalization, shape ``(M, N_D)``.
    """
    wq = np.asarray(omega_q, float)
    wr = np.asarray(omega_R, float)
    n = wq.size
    V = np.asarray(V, float)
    n_d = V.shape[1] if V.ndim == 2 else (V.size // max(wr.size, 1))
    V = V.reshape(wr.size, n_d)
    _check_gaps(wq ** 2, wr ** 2, tol)
    if wr.size == 0:
        return np.zeros((n, n_d))
    c = np.asarray(M1, float)[:n, n:]
    return -(c / (wq[:, None] ** 2 - wr[None, :] ** 2)) @ V


@dataclass(frozen=True, eq=False)
class NormalModes:
    """Eigen-solution of a linear circuit: ``Gamma x = omega**2 C x``.

    ``vectors`` are ``C``-orthonormal columns in node coordinates.
    """

    frequencies: np.ndarray
    vectors: np.ndarray
    nodes: tuple[str, ...] = ()


def normal_modes(C: np.ndarray, Gamma: np.ndarray) -> NormalModes:
    """Generalized eigen-solve of a definite pencil."""
    C = 0.5 * (np.asarray(C, float) + np.asarray(C, float).T)
    G = 0.5 * (np.asarray(Gamma, float) + np.asarray(Gamma, float).T)
    try:
        lam, vec = sla.eigh(G, C)
    except np.linalg.LinAlgError as exc:
        raise InvalidInputError("singular capacitance matrix: every node needs a "
                                "capacitive path") from exc
    return NormalModes(frequencies=np.sqrt(np.clip(lam, 0.0, None)), vectors=vec)


def exact_normal_modes(net: LinearNetwork, inductances: Mapping[str, float] | None = None,
                       qubits: Sequence[QubitMode] | None = None) -> NormalModes:
    """Normal modes with every junction replaced by a linear inductor.

    Inductances come from ``inductances`` (junction name to henry) or from
    the renormalized ``L`` of ``qubits`` (in junction order).
    """
    if inductances is None:
        if qubits is None:
            raise InvalidInputError("need junction inductances or qubit modes")
        inductances = {j.name: q.L for j, q in zip(net.junctions, qubits)}
    nodes, C, G = nodal_matrices(net, inductances)
    w = np.linalg.eigvalsh(C)
    if w.size and w[0] <= 1e-12 * max(abs(w[-1]), 1e-300):
        raise InvalidInputError("singular capacitance matrix: every node needs a "
                                "capacitive path")
    nm = normal_modes(C, G)
    return NormalModes(frequencies=nm.frequencies, vectors=nm.vectors, nodes=tuple(nodes))
