"""Closed-form dispersive parameters.

Qubit renormalization, the impedance formula for exchange couplings, the
dispersive shift, and the fourth-order junction expansion coefficients
(mode-mixing matrix alpha and the beta tensor) that justify them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .core import CONSTANTS, QubitMode, Tolerances, imag_impedance
from .cauer import CauerRealization
from .errors import (ApproximationWarning, DispersiveViolationError, DispersiveWarning,
                     InvalidInputError, ResonanceProximityError,
                     UnphysicalRenormalizationError)

__all__ = [
    "charging_energy",
    "solve_qubit_mode",
    "junction_inductance_for",
    "renormalization_root",
    "qubit_modes_from_capacitances",
    "check_dispersive_regime",
    "exchange_coupling_J",
    "exchange_matrix",
    "direct_capacitive_J0",
    "j0_matrix",
    "AlphaMatrix",
    "build_alpha",
    "BetaTensor",
    "beta_tensor",
    "dispersive_shift_chi",
    "chi_matrix",
    "Example1",
    "closed_form_example1",
    "example1_coupling_capacitance",
    "example1_exact_im_z12",
]

_DEFAULT_TOL = Tolerances()


def charging_energy(C: float) -> float:
    """Charging energy ``e**2/(2C)`` expressed in Hz."""
    C = float(C)
    if not C > 0:
        raise InvalidInputError(f"capacitance must be positive, got {C!r}")
    if math.isinf(C):
        return 0.0
    return CONSTANTS.e ** 2 / (2.0 * C * CONSTANTS.h)


def renormalization_root(r: float) -> float:
    """Largest root ``x`` of ``x**2 = 1 - 2 r / x``.

    Raises
    ------
    UnphysicalRenormalizationError
        When no root exists (``r > 1/(3 sqrt 3)``).
    """
    if r == 0.0:
        return 1.0
    xmin = 1.0 / math.sqrt(3.0)

    def f(x):
        return x ** 3 - x + 2.0 * r

    if f(xmin) > 0:
        raise UnphysicalRenormalizationError(
            f"no renormalized frequency exists for E_C/(hbar omega_J) = {r:.4f}")
    return brentq(f, xmin, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def solve_qubit_mode(L_J: float, C: float, index: int = 0, name: str | None = None,
                     *, method: str = "closed-form",
                     tol: Tolerances = _DEFAULT_TOL) -> QubitMode:
    """Renormalized transmon mode.

    Parameters
    ----------
    L_J, C : float
        Junction inductance and total port capacitance.
    method : {"closed-form", "exact"}
        ``"closed-form"`` uses ``omega = omega_J - E_C/(1 - E_C/omega_J)``;
        ``"exact"`` solves ``x**2 = 1 - 2 r / x`` numerically.

    Notes
    -----
    The mode inductance is ``L = 1/(omega**2 C)`` so the linear mode is
    exactly self-consistent. ``L_formula = L_J/(1 - 2 E_C/omega)`` agrees
    with it to ``O(r**2)`` for the closed form and exactly for ``"exact"``.
    """
    L_J, C = float(L_J), float(C)
    if not (L_J > 0 and C > 0):
        raise InvalidInputError("L_J and C must be positive")
    ec_h = charging_energy(C)
    ec = 2.0 * math.pi * ec_h
    wJ = 1.0 / math.sqrt(L_J * C)
    r = ec / wJ
    if r >= tol.transmon_r_max:
        warnings.warn(f"E_C/(hbar omega_J) = {r:.3f}: outside the transmon regime",
                      ApproximationWarning, stacklevel=2)
    if method == "closed-form":
        if r >= 1.0:
            raise UnphysicalRenormalizationError(f"E_C/(hbar omega_J) = {r:.3f} >= 1")
        w = wJ - ec / (1.0 - r)
    elif method == "exact":
        w = wJ * renormalization_root(r)
    else:
        raise InvalidInputError(f"unknown renormalization method {method!r}")
    if w <= 0 or 2.0 * ec / w >= 1.0:
        raise UnphysicalRenormalizationError(
            f"2 E_C/(hbar omega) = {2 * ec / max(w, 1e-300):.3f} >= 1: no physical inductance")
    L = 1.0 / (w * w * C)
    L_formula = L_J / (1.0 - 2.0 * ec / w)
    delta = -ec * (wJ / w) ** 2
    return QubitMode(index=index, L_J=L_J, C=C, E_C_over_h=ec_h, omega_J=wJ,
                     omega=w, L=L, delta=delta, L_formula=L_formula, name=name)


def junction_inductance_for(omega: float, C: float, *, method: str = "closed-form") -> float:
    """Junction inductance whose renormalized mode sits at ``omega``.

    Inverse of :func:`solve_qubit_mode` for the same ``method``.
    """
    omega, C = float(omega), float(C)
    if not (omega > 0 and C > 0):
        raise InvalidInputError("omega and C must be positive")
    ec = 2.0 * math.pi * charging_energy(C)
    if 2.0 * ec / omega >= 1.0:
        raise UnphysicalRenormalizationError(
            f"2 E_C/(hbar omega) = {2 * ec / omega:.3f} >= 1: no physical inductance")
    if method == "exact":
        wJ = omega / math.sqrt(1.0 - 2.0 * ec / omega)
    elif method == "closed-form":
        def f(wj):
            return wj - ec / (1.0 - ec / wj) - omega

        lo = max(omega, 1.0000001 * ec)
        hi = omega + 4.0 * ec
        while f(hi) < 0:
            hi *= 2.0
        wJ = brentq(f, lo, hi, xtol=1e-12 * omega, rtol=4 * np.finfo(float).eps)
    else:
        raise InvalidInputError(f"unknown renormalization method {method!r}")
    return 1.0 / (wJ * wJ * C)


def qubit_modes_from_capacitances(L_J: Sequence[float], C: Sequence[float],
                                  names: Sequence[str] | None = None,
                                  **kwargs) -> tuple[QubitMode, ...]:
    if len(L_J) != len(C):
        raise InvalidInputError("need one junction inductance per qubit port")
    names = list(names) if names is not None else [None] * len(C)
    return tuple(solve_qubit_mode(lj, c, i, nm, **kwargs)
                 for i, (lj, c, nm) in enumerate(zip(L_J, C, names)))


def check_dispersive_regime(qubits: Sequence[QubitMode], omegas_R: np.ndarray,
                            g: np.ndarray, tol: Tolerances = _DEFAULT_TOL) -> list[str]:
    """Guard ``|omega_i - omega_Rk|`` against the coupling ``g_ik``.

    Raises below ``tol.dispersive_error * |g|``; returns (and emits) warning
    messages below ``tol.dispersive_warn * |g|``.
    """
    msgs = []
    for a, q in enumerate(qubits):
        for k, wk in enumerate(omegas_R):
            gk = abs(float(g[a, k]))
            det = abs(q.omega - wk)
            if gk == 0.0:
                continue
            if det < tol.dispersive_error * gk:
                raise DispersiveViolationError(
                    f"qubit {q.label} is {det / 2 / math.pi / 1e6:.1f} MHz from mode {k}, "
                    f"below {tol.dispersive_error:g} g = "
                    f"{tol.dispersive_error * gk / 2 / math.pi / 1e6:.1f} MHz",
                    qubit=q.label, mode=k)
            if det < tol.dispersive_warn * gk:
                msg = (f"qubit {q.label}: detuning from mode {k} is only "
                       f"{det / gk:.1f} g; dispersive formulas degrade")
                warnings.warn(msg, DispersiveWarning, stacklevel=2)
                msgs.append(msg)
    return msgs


def _im(z_eval, omega: float, qubit: QubitMode | None = None) -> np.ndarray:
    try:
        return imag_impedance(z_eval, omega)
    except ResonanceProximityError as exc:
        who = qubit.label if qubit is not None else f"omega={omega:.4e}"
        raise DispersiveViolationError(
            f"qubit {who} sits on a resonance of the network ({exc})", qubit=who) from exc


def exchange_coupling_J(z_eval, qi: QubitMode, qj: QubitMode,
                        z_i: np.ndarray | None = None,
                        z_j: np.ndarray | None = None) -> float:
    """Exchange coupling from the impedance response.

    ``J_ij = -(1/4) sqrt(w_i w_j/(L_i L_j)) [Im Z_ij(w_i)/w_i + Im Z_ij(w_j)/w_j]``

    ``z_i``/``z_j`` may carry precomputed ``Im Z`` at ``w_i``/``w_j``.
    """
    i, j = qi.index, qj.index
    if i == j:
        raise InvalidInputError("exchange coupling needs two distinct qubits")
    zi = _im(z_eval, qi.omega, qi) if z_i is None else z_i
    zj = _im(z_eval, qj.omega, qj) if z_j is None else z_j
    pre = -0.25 * math.sqrt(qi.omega * qj.omega / (qi.L * qj.L))
    # average the (i, j) and (j, i) entries so the result is exactly symmetric
    zij_i = 0.5 * (zi[i, j] + zi[j, i])
    zij_j = 0.5 * (zj[i, j] + zj[j, i])
    return pre * (zij_i / qi.omega + zij_j / qj.omega)


def exchange_matrix(z_eval, qubits: Sequence[QubitMode]) -> np.ndarray:
    """Symmetric ``(N, N)`` J matrix with zero diagonal."""
    n = len(qubits)
    zs = [_im(z_eval, q.omega, q) for q in qubits]
    J = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            J[a, b] = J[b, a] = exchange_coupling_J(z_eval, qubits[a], qubits[b], zs[a], zs[b])
    return J


def direct_capacitive_J0(g_i: float, g_j: float, omega_r: float) -> float:
    """Bus-mediated direct coupling ``2 g_i g_j / omega_r``."""
    if omega_r == 0:
        raise InvalidInputError("bus frequency must be nonzero")
    return 2.0 * g_i * g_j / omega_r


def j0_matrix(g: np.ndarray, omegas_R: np.ndarray) -> np.ndarray:
    """Sum over modes of ``2 g_ik g_jk / omega_k``; zero diagonal."""
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        return np.zeros((g.shape[0], g.shape[0]))
    J0 = 2.0 * (g / omegas_R) @ g.T
    np.fill_diagonal(J0, 0.0)
    return J0


# --------------------------------------------------------------------------
# Fourth-order expansion

@dataclass(frozen=True, eq=False)
class AlphaMatrix:
    """Mode-mixing coefficients between initial and final frame fluxes.

    ``values`` is ``(N + M, N + M)``; rows ``< N`` belong to junctions,
    rows ``>= N`` to resonators. ``frequencies`` lists the final-frame
    mode frequencies (qubits then resonators).
    """

    values: np.ndarray
    frequencies: np.ndarray
    n_qubits: int

    @property
    def n_modes(self) -> int:
        return self.values.shape[0] - self.n_qubits

    def __getitem__(self, idx):
        return self.values[idx]


def build_alpha(c: CauerRealization, qubits: Sequence[QubitMode], z_eval=None, *,
                leading_order: bool = False, tol: Tolerances = _DEFAULT_TOL) -> AlphaMatrix:
    """Mode-mixing matrix alpha.

    Parameters
    ----------
    c : CauerRealization
    qubits : sequence of QubitMode
    z_eval : impedance evaluator, optional
        Used for the qubit-qubit entries; defaults to the impedance realized
        by ``c``.
    leading_order : bool
        Use ``alpha_ii = 1`` and ``alpha_ij = 0`` between qubits, keeping
        only the first-order qubit-resonator entries.
    """
    n, m = c.n_qubits, c.n_modes
    if len(qubits) != n:
        raise InvalidInputError(f"expected {n} qubits, got {len(qubits)}")
    z_eval = c.to_pole_residue() if z_eval is None else z_eval
    wq = np.array([q.omega for q in qubits])
    wr = c.omegas
    Ru = c.R_unit
    sC = np.sqrt(c.C_qubit)
    a = np.eye(n + m)
    for i in range(n):
        den = wr ** 2 - wq[i] ** 2
        if np.any(np.abs(den) < tol.degeneracy_tol * wq[i] ** 2):
            k = int(np.argmin(np.abs(den)))
            raise DispersiveViolationError(
                f"qubit {qubits[i].label} is degenerate with mode {k}", qubit=qubits[i].label,
                mode=k)
        a[i, n:] = Ru[:, i] * sC[i] * wr ** 2 / den
        a[n:, i] = Ru[:, i] * sC[i] * wq[i] ** 2 / (-den)
        if not leading_order:
            zi = _im(z_eval, wq[i], qubits[i])
            z_ac = float(np.sum(Ru[:, i] ** 2 * wq[i] / den))
            # impedances in the capacitance-rescaled frame, where Z_i = 1/omega_i
            a[i, i] = 1.0 - z_ac * wq[i] * c.C_qubit[i]
            for j in range(n):
                if j != i:
                    a[i, j] = -zi[i, j] * wq[i] * sC[i] * sC[j]
    big = np.abs(a - np.eye(n + m)).max(initial=0.0)
    if big > tol.smallness_warn:
        warnings.warn(f"mode-mixing coefficient {big:.3f} is not small", DispersiveWarning,
                      stacklevel=2)
    return AlphaMatrix(values=a, frequencies=np.concatenate([wq, wr]), n_qubits=n)


@dataclass(frozen=True, eq=False)
class BetaTensor:
    """Quartic junction coefficients, evaluated lazily.

    ``beta[p, p', q, q'] = sum_s (E_C_s/12) w_Js**2 (w_p w_p' w_q w_q')^{-1/2}
    a_sp a_sp' a_sq a_sq'`` with ``s`` running over junctions.
    """

    alpha: AlphaMatrix
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.alpha.values.shape[0]

    def _xi(self) -> np.ndarray:
        n = self.alpha.n_qubits
        return self.alpha.values[:n] / np.sqrt(self.alpha.frequencies)[None, :]

    def __getitem__(self, idx: tuple[int, int, int, int]) -> float:
        p, pp, q, qq = idx
        xi = self._xi()
        return float(np.sum(self.weights * xi[:, p] * xi[:, pp] * xi[:, q] * xi[:, qq]))

    def full(self) -> np.ndarray:
        """Dense ``(N+M)**4`` tensor."""
        xi = self._xi()
        return np.einsum("s,sa,sb,sc,sd->abcd", self.weights, xi, xi, xi, xi)

    def delta(self, i: int) -> float:
        """Anharmonicity ``-12 beta_iiii``."""
        return -12.0 * self[i, i, i, i]

    def chi(self, i: int, k: int) -> float:
        """Dispersive shift ``-24 beta_{i i k k}`` for resonator ``k``."""
        kk = self.alpha.n_qubits + k
        return -24.0 * self[i, i, kk, kk]

    def self_kerr(self, k: int) -> float:
        """Resonator self-Kerr ``-12 beta_kkkk`` (not certified)."""
        kk = self.alpha.n_qubits + k
        return -12.0 * self[kk, kk, kk, kk]


def beta_tensor(alpha: AlphaMatrix, qubits: Sequence[QubitMode]) -> BetaTensor:
    """Quartic coefficients from the mode-mixing matrix."""
    if len(qubits) != alpha.n_qubits:
        raise InvalidInputError("qubit count does not match alpha")
    w = np.array([q.E_C * q.omega_J ** 2 / 12.0 for q in qubits])
    return BetaTensor(alpha=alpha, weights=w)


def dispersive_shift_chi(q: QubitMode, g_ik: float, omega_R: float,
                         tol: Tolerances = _DEFAULT_TOL) -> float:
    """``chi_ik = 8 delta_i (g_ik omega_R/(omega_R**2 - omega_i**2))**2``."""
    den = omega_R ** 2 - q.omega ** 2
    if abs(den) < tol.degeneracy_tol * q.omega ** 2:
        raise DispersiveViolationError(
            f"qubit {q.label} is degenerate with a mode at {omega_R:.6e} rad/s",
            qubit=q.label)
    return 8.0 * q.delta * (g_ik * omega_R / den) ** 2


def chi_matrix(qubits: Sequence[QubitMode], g: np.ndarray, omegas_R: np.ndarray,
               tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    out = np.zeros((len(qubits), len(omegas_R)))
    for a, q in enumerate(qubits):
        for k, wk in enumerate(omegas_R):
            out[a, k] = dispersive_shift_chi(q, g[a, k], wk, tol)
    return out


# --------------------------------------------------------------------------
# Two qubits on one bus in closed form

@dataclass(frozen=True)
class Example1:
    """Closed-form couplings for two transmons on one LC bus.

    All frequencies in rad/s. ``im_z12_approx`` is the weak-coupling
    impedance ``Cc1 Cc2 Lr w/(Cq**2 (1 - w**2/wr**2))`` at each qubit
    frequency; ``J_Z`` and ``J_Z_rwa`` apply the impedance formula to it.
    """

    omega1: float
    omega2: float
    omega_r: float
    g1: float
    g2: float
    L1: float
    L2: float
    J_pert: float
    J0: float
    J_Z: float
    J_Z_rwa: float
    J_Z_from_impedance: float
    im_z12_approx: tuple[float, float]
    im_z12_exact: tuple[float, float] | None

    @property
    def J_pert_plus_J0(self) -> float:
        return self.J_pert + self.J0


def example1_exact_im_z12(Cq: float, Cc: float, Cr: float, Lr: float, omega: float) -> float:
    """Unapproximated transfer impedance of the symmetric two-qubit bus."""
    wr2 = 1.0 / (Lr * Cr)
    wqr2 = 1.0 / (Lr * Cq)
    w2 = omega * omega
    num = Cc * Cc * Lr * omega / (Cq + Cc)
    den = Cq * (1.0 - w2 / wr2) + Cc * (1.0 - 2.0 * w2 / wqr2 - w2 / wr2)
    return num / den


def example1_coupling_capacitance(g: float, omega_q: float, omega_r: float,
                                  Cq: float, Cr: float) -> float:
    """Coupling capacitance giving bare coupling ``g`` in the weak-coupling limit.

    Inverts ``g = Cc/(2 sqrt(Z_q Z_r) Cq Cr)`` with ``Z_q = 1/(omega_q Cq)``
    and ``Z_r = 1/(omega_r Cr)``.
    """
    return 2.0 * g * math.sqrt(Cq * Cr / (omega_q * omega_r))


def closed_form_example1(Cq: float, Cc: float, Cr: float, Lr: float,
                         omega1: float, omega2: float, *, Cc2: float | None = None,
                         tol: Tolerances = _DEFAULT_TOL) -> Example1:
    """All closed-form couplings for two qubits on a single bus.

    Parameters
    ----------
    Cq, Cr, Lr : float
        Qubit shunt, bus capacitance and bus inductance.
    Cc : float
        Coupling capacitance of qubit 1 (and of qubit 2 unless ``Cc2``).
    omega1, omega2 : float
        Qubit frequencies; the qubit inductances are ``1/(omega**2 Cq)``.
    """
    Cc1 = float(Cc)
    Cc2 = Cc1 if Cc2 is None else float(Cc2)
    wr = 1.0 / math.sqrt(Lr * Cr)
    for w in (omega1, omega2):
        if abs(w * w - wr * wr) < tol.degeneracy_tol * w * w:
            raise DispersiveViolationError("qubit frequency coincides with the bus")
    L1 = 1.0 / (omega1 ** 2 * Cq)
    L2 = 1.0 / (omega2 ** 2 * Cq)
    Z1, Z2, Zr = math.sqrt(L1 / Cq), math.sqrt(L2 / Cq), math.sqrt(Lr / Cr)
    g1 = Cc1 / (2.0 * math.sqrt(Z1 * Zr) * Cq * Cr)
    g2 = Cc2 / (2.0 * math.sqrt(Z2 * Zr) * Cq * Cr)
    J_pert = g1 * g2 * (omega1 + omega2 - 2 * wr) / (2 * (omega1 - wr) * (omega2 - wr))
    J0 = direct_capacitive_J0(g1, g2, wr)

    def z_approx(w):
        return Cc1 * Cc2 * Lr * w / (Cq * Cq * (1.0 - w * w / (wr * wr)))

    z1, z2 = z_approx(omega1), z_approx(omega2)
    pre = -0.125 * math.sqrt(omega1 * omega2 / (L1 * L2)) * Cc1 * Cc2 * Lr * wr / Cq ** 2
    rwa = 1 / (wr - omega1) + 1 / (wr - omega2)
    counter = 1 / (wr + omega1) + 1 / (wr + omega2)
    J_Z = pre * (rwa + counter)
    J_Z_rwa = pre * rwa
    J_Z_imp = -0.25 * math.sqrt(omega1 * omega2 / (L1 * L2)) * (z1 / omega1 + z2 / omega2)
    exact = None
    if Cc1 == Cc2:
        exact = (example1_exact_im_z12(Cq, Cc1, Cr, Lr, omega1),
                 example1_exact_im_z12(Cq, Cc1, Cr, Lr, omega2))
    return Example1(omega1=omega1, omega2=omega2, omega_r=wr, g1=g1, g2=g2, L1=L1, L2=L2,
                    J_pert=J_pert, J0=J0, J_Z=J_Z, J_Z_rwa=J_Z_rwa,
                    J_Z_from_impedance=J_Z_imp, im_z12_approx=(z1, z2), im_z12_exact=exact)
