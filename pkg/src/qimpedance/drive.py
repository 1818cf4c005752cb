"""Drive-line couplings, classical crosstalk and Purcell decay."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CONSTANTS, DriveChannel, QubitMode, Tolerances, imag_impedance
from .errors import (ApproximationWarning, DispersiveViolationError, InvalidInputError,
                     ResonanceProximityError, ThermalDivergenceError)

__all__ = [
    "CROSSTALK_FLOOR_DB",
    "BathSpectrum",
    "DriveCouplingMatrix",
    "drive_coupling_epsilon",
    "drive_coupling_matrix",
    "crosstalk_matrix",
    "Crosstalk",
    "purcell_rate",
    "purcell_matrix",
    "bath_spectrum",
    "coupling_norm",
    "thermal_factor",
]

CROSSTALK_FLOOR_DB = -200.0
_DEFAULT_TOL = Tolerances()


def _im_entry(z_eval, q: QubitMode, port: int) -> float:
    try:
        z = imag_impedance(z_eval, q.omega)
    except ResonanceProximityError as exc:
        raise DispersiveViolationError(
            f"qubit {q.label} sits on a network resonance ({exc})", qubit=q.label) from exc
    if not 0 <= port < z.shape[0]:
        raise InvalidInputError(f"port index {port} out of range")
    return float(0.5 * (z[q.index, port] + z[port, q.index]))


def drive_coupling_epsilon(z_eval, q: QubitMode, ch: DriveChannel) -> complex:
    """Coupling of qubit ``q`` to the source voltage of channel ``ch``.

    ``eps = sqrt(w_i/(2 hbar L_i)) Im Z_{i,p}(w_i) e^{i theta} C_pd / sqrt(1 + (w_d Z0 C_pd)**2)``
    in (rad/s)/V.
    """
    imz = _im_entry(z_eval, q, ch.port_index)
    mag = math.sqrt(q.omega / (2.0 * CONSTANTS.hbar * q.L)) * imz
    div = ch.C_pd / math.sqrt(1.0 + (ch.omega_d * ch.Z0 * ch.C_pd) ** 2)
    return mag * div * cmath.exp(1j * ch.theta)


@dataclass(frozen=True, eq=False)
class DriveCouplingMatrix:
    """Drive couplings with their factors kept separately.

    ``epsilon = prefactor * division[None, :] * exp(1j * theta)[None, :]``.
    """

    prefactor: np.ndarray
    division: np.ndarray
    theta: np.ndarray

    @property
    def epsilon(self) -> np.ndarray:
        return self.prefactor * (self.division * np.exp(1j * self.theta))[None, :]


def drive_coupling_matrix(z_eval, qubits: Sequence[QubitMode],
                          channels: Sequence[DriveChannel]) -> DriveCouplingMatrix:
    pre = np.zeros((len(qubits), len(channels)))
    zs = {q.index: imag_impedance(z_eval, q.omega) for q in qubits}
    for a, q in enumerate(qubits):
        for d, ch in enumerate(channels):
            pre[a, d] = math.sqrt(q.omega / (2.0 * CONSTANTS.hbar * q.L)) * \
                zs[q.index][q.index, ch.port_index]
    div = np.array([ch.C_pd / math.sqrt(1.0 + (ch.omega_d * ch.Z0 * ch.C_pd) ** 2)
                    for ch in channels])
    th = np.array([ch.theta for ch in channels])
    return DriveCouplingMatrix(prefactor=pre, division=div, theta=th)


@dataclass(frozen=True, eq=False)
class Crosstalk:
    """Classical crosstalk indexed (qubit i, drive d).

    ``dB[i, d] = 20 log10(|Im Z_{i,p(d)}(w_i)| / |Im Z_{j,p(d)}(w_j)|)`` with
    ``j`` the qubit line ``d`` is assigned to. ``sign`` holds the sign of the
    ratio; ``prefactor_dB`` the neglected ``sqrt(w_i L_Jj/(w_j L_Ji))`` term.
    Unassigned lines and vanishing denominators give NaN; an exactly
    vanishing numerator (disconnected path) reports ``floor_dB``.
    """

    dB: np.ndarray
    sign: np.ndarray
    prefactor_dB: np.ndarray

    def by_qubit(self, assignment: Sequence[int]) -> np.ndarray:
        """``(N, N)`` matrix ``X_ij`` given the drive index ``d(j)`` of each qubit."""
        return self.dB[:, list(assignment)]


def crosstalk_matrix(z_eval, qubits: Sequence[QubitMode], channels: Sequence[DriveChannel],
                     floor_dB: float = CROSSTALK_FLOOR_DB) -> Crosstalk:
    """Crosstalk of every qubit to every assigned drive line.

    The target qubit of channel ``d`` is ``channels[d].qubit`` (a position
    in ``qubits``).
    """
    n, nd = len(qubits), len(channels)
    dB = np.full((n, nd), np.nan)
    sign = np.full((n, nd), np.nan)
    pref = np.full((n, nd), np.nan)
    zs = [imag_impedance(z_eval, q.omega) for q in qubits]
    for d, ch in enumerate(channels):
        j = ch.qubit
        if j is None:
            continue
        if not 0 <= j < n:
            raise InvalidInputError(f"drive {ch.label} targets qubit {j} out of range")
        p = ch.port_index
        den = zs[j][qubits[j].index, p]
        for i, qi in enumerate(qubits):
            num = zs[i][qi.index, p]
            pref[i, d] = 10.0 * math.log10(qi.omega * qubits[j].L_J /
                                           (qubits[j].omega * qi.L_J))
            if den == 0.0:
                continue
            ratio = num / den
            sign[i, d] = math.copysign(1.0, ratio) if ratio != 0 else 0.0
            # the floor stands in for -inf only; finite ratios are kept as computed
            dB[i, d] = floor_dB if ratio == 0.0 else 20.0 * math.log10(abs(ratio))
    return Crosstalk(dB=dB, sign=sign, prefactor_dB=pref)


def purcell_rate(z_eval, q: QubitMode, ch: DriveChannel, temperature: float | None = None
                 ) -> float:
    """Relaxation rate of ``q`` into line ``ch`` (1/s).

    ``(2/L_i) Im Z_{i,p}(w_i)**2 w_i**2 Z0 C_pd**2/(1 + (w_i Z0 C_pd)**2)``,
    optionally multiplied by :func:`thermal_factor`.
    """
    imz = _im_entry(z_eval, q, ch.port_index)
    w = q.omega
    x = w * ch.Z0 * ch.C_pd
    rate = (2.0 / q.L) * imz ** 2 * w ** 2 * ch.Z0 * ch.C_pd ** 2 / (1.0 + x * x)
    if temperature is not None:
        rate *= thermal_factor(w, temperature)
    return rate


def purcell_matrix(z_eval, qubits: Sequence[QubitMode], channels: Sequence[DriveChannel],
                   temperature: float | None = None) -> np.ndarray:
    out = np.zeros((len(qubits), len(channels)))
    for a, q in enumerate(qubits):
        for d, ch in enumerate(channels):
            out[a, d] = purcell_rate(z_eval, q, ch, temperature)
    return out


def coupling_norm(z_eval, qubits: Sequence[QubitMode], ch: DriveChannel) -> float:
    """Bath self-energy term ``C_pd**2 sum_i Im Z_{i,p}(w_i)**2 / L_i`` (farad)."""
    s = 0.0
    for q in qubits:
        s += _im_entry(z_eval, q, ch.port_index) ** 2 / q.L
    return ch.C_pd ** 2 * s


@dataclass(frozen=True)
class BathSpectrum:
    """Spectral density of a drive line seen through its shunt capacitance.

    ``J(w) = w Z0 / (1 + w**2 Z0**2 (C_pd + correction)**2)``; the
    simplified form drops ``correction``.
    """

    channel: DriveChannel
    correction: float
    valid: bool

    def simplified(self, omega):
        w = np.asarray(omega, dtype=float)
        c = self.channel
        return w * c.Z0 / (1.0 + (w * c.Z0 * c.C_pd) ** 2)

    def full(self, omega):
        w = np.asarray(omega, dtype=float)
        c = self.channel
        return w * c.Z0 / (1.0 + (w * c.Z0 * (c.C_pd + self.correction)) ** 2)

    def __call__(self, omega):
        return self.simplified(omega)

    @property
    def relative_correction(self) -> float:
        return self.correction / self.channel.C_pd


def bath_spectrum(ch: DriveChannel, correction: float = 0.0,
                  tol: Tolerances = _DEFAULT_TOL) -> BathSpectrum:
    """Bath spectrum of channel ``ch`` with self-energy ``correction`` (farad)."""
    if correction < 0:
        raise InvalidInputError("coupling norm must be non-negative")
    valid = correction / ch.C_pd <= tol.bath_correction_tol
    if not valid:
        warnings.warn(f"drive {ch.label}: bath correction {correction / ch.C_pd:.3e} of C_pd "
                      "exceeds the simplification threshold", ApproximationWarning,
                      stacklevel=2)
    return BathSpectrum(channel=ch, correction=float(correction), valid=valid)


def thermal_factor(omega: float, temperature: float) -> float:
    """``coth(hbar w / (2 k_B T))``, equal to 1 at ``T = 0``."""
    if temperature < 0:
        raise InvalidInputError("temperature must be non-negative")
    if temperature == 0:
        return 1.0
    if omega == 0:
        raise ThermalDivergenceError("thermal factor diverges at omega = 0 for T > 0")
    x = CONSTANTS.hbar * abs(omega) / (2.0 * CONSTANTS.k_B * temperature)
    return 1.0 / math.tanh(x)
