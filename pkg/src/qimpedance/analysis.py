"""End-to-end assembly of the dispersive parameter report."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cauer import CauerRealization, coupling_matrix_g, synthesize
from .core import (DispersiveReport, DriveChannel, DrivePort, LinearNetwork,
                   PoleResidueImpedance, QubitMode, Tolerances, imag_impedance)
from .dispersive import (build_alpha, check_dispersive_regime, chi_matrix, exchange_matrix,
                         j0_matrix, solve_qubit_mode)
from .drive import (bath_spectrum, coupling_norm, crosstalk_matrix, drive_coupling_matrix,
                    purcell_matrix)
from .errors import InvalidInputError, QImpedanceWarning
from .network import NetworkImpedance, extract_modes

__all__ = ["AnalysisOptions", "AnalysisResult", "analyze_pole_residue", "analyze_network",
           "analyze_realization", "make_channels"]


@dataclass(frozen=True)
class AnalysisOptions:
    """Knobs for :func:`analyze_network` and :func:`analyze_pole_residue`.

    Attributes
    ----------
    tol : Tolerances
    renormalization : {"closed-form", "exact"}
        Qubit frequency renormalization.
    z_route : {"pole-residue", "mna"}
        Impedance evaluator used in the formulas for network inputs.
    split_degenerate : bool
        Allow merged degenerate poles (realized as several modes).
    temperature : float, optional
        Multiply Purcell rates by the thermal factor at this temperature.
    check_alpha : bool
        Build the mode-mixing matrix to flag non-small coefficients.
    """

    tol: Tolerances = field(default_factory=Tolerances)
    renormalization: str = "closed-form"
    z_route: str = "mna"
    split_degenerate: bool = True
    temperature: float | None = None
    check_alpha: bool = True


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    report: DispersiveReport
    realization: CauerRealization
    qubits: tuple[QubitMode, ...]
    channels: tuple[DriveChannel, ...]
    impedance: object


def make_channels(z_eval, c: CauerRealization, qubits: Sequence[QubitMode],
                  drives: Sequence[DrivePort]) -> tuple[DriveChannel, ...]:
    """Drive channels with shunt capacitance and tone frequency resolved.

    ``C_pd`` defaults to the synthesized drive-port shunt capacitance. The
    tone defaults to the assigned qubit's frequency, or else to the qubit
    most strongly coupled to the line.
    """
    names = {q.name: a for a, q in enumerate(qubits)}
    n = len(qubits)
    out = []
    zs = None
    for d, dp in enumerate(drives):
        port = n + d
        target = None
        if dp.qubit is not None:
            if dp.qubit not in names:
                raise InvalidInputError(f"drive {dp.name} targets unknown qubit {dp.qubit!r}")
            target = names[dp.qubit]
        C_pd = dp.C_shunt_hint if dp.C_shunt_hint is not None else float(c.C0[port])
        if dp.tone_frequency is not None:
            wd = float(dp.tone_frequency)
        elif target is not None:
            wd = qubits[target].omega
        elif n:
            if zs is None:
                zs = [imag_impedance(z_eval, q.omega) for q in qubits]
            strength = [abs(zs[a][qubits[a].index, port]) for a in range(n)]
            wd = qubits[int(np.argmax(strength))].omega
        else:
            wd = 0.0
        out.append(DriveChannel(index=d, port_index=port, Z0=dp.Z0, C_pd=C_pd, omega_d=wd,
                                name=dp.name, qubit=target))
    return tuple(out)


def analyze_realization(c: CauerRealization, qubits: Sequence[QubitMode],
                        channels: Sequence[DriveChannel], z_eval=None,
                        options: AnalysisOptions = AnalysisOptions()) -> DispersiveReport:
    """Report from an existing realization and resolved qubits/channels."""
    tol = options.tol
    z_eval = c.to_pole_residue() if z_eval is None else z_eval
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", QImpedanceWarning)
        g = coupling_matrix_g(c, qubits, tol)
        check_dispersive_regime(qubits, c.omegas, g, tol)
        if options.check_alpha and c.n_modes:
            build_alpha(c, qubits, z_eval, tol=tol)
        J = exchange_matrix(z_eval, qubits)
        J0 = j0_matrix(g, c.omegas)
        chi = chi_matrix(qubits, g, c.omegas, tol)
        if channels:
            eps = drive_coupling_matrix(z_eval, qubits, channels).epsilon
            xt = crosstalk_matrix(z_eval, qubits, channels)
            rates = purcell_matrix(z_eval, qubits, channels, options.temperature)
            for ch in channels:
                bath_spectrum(ch, coupling_norm(z_eval, qubits, ch), tol)
        else:
            eps = xt = rates = None
    msgs = []
    for w in caught:
        if issubclass(w.category, QImpedanceWarning):
            msg = str(w.message)
            if msg not in msgs:
                msgs.append(msg)
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return DispersiveReport(
        qubits=tuple(qubits), resonator_omegas=c.omegas, g=g, J=J, chi=chi, J0_direct=J0,
        drives=tuple(channels), epsilon=eps,
        crosstalk_dB=None if xt is None else xt.dB,
        crosstalk_sign=None if xt is None else xt.sign,
        crosstalk_prefactor_dB=None if xt is None else xt.prefactor_dB,
        purcell_rates=rates, warnings=tuple(msgs))


def analyze_pole_residue(z: PoleResidueImpedance, junctions: Sequence[tuple[str, float]],
                         drives: Sequence[DrivePort] = (), *, z_eval=None,
                         options: AnalysisOptions = AnalysisOptions()) -> AnalysisResult:
    """Dispersive report for a pole-residue impedance.

    Parameters
    ----------
    z : PoleResidueImpedance
        Ports: one per junction (in order), then one per drive.
    junctions : sequence of (name, L_J)
    drives : sequence of DrivePort
        ``nodes`` may be ``None``.
    z_eval : impedance evaluator, optional
        Alternative evaluator of the same impedance (for example MNA).
    """
    if not junctions:
        raise InvalidInputError("no qubit ports")
    n, nd = len(junctions), len(drives)
    if n + nd != z.n_ports:
        raise InvalidInputError(
            f"{n} qubit + {nd} drive ports do not match the {z.n_ports}-port impedance")
    c = synthesize(z, n, nd, tol=options.tol, split_degenerate=options.split_degenerate)
    qubits = tuple(solve_qubit_mode(lj, c.C0[i], i, name, method=options.renormalization,
                                    tol=options.tol)
                   for i, (name, lj) in enumerate(junctions))
    z_eval = z if z_eval is None else z_eval
    channels = make_channels(z_eval, c, qubits, drives)
    report = analyze_realization(c, qubits, channels, z_eval, options)
    return AnalysisResult(report=report, realization=c, qubits=qubits, channels=channels,
                          impedance=z_eval)


def analyze_network(net: LinearNetwork, L_J: Mapping[str, float] | None = None, *,
                    options: AnalysisOptions = AnalysisOptions()) -> AnalysisResult:
    """Dispersive report for a lumped network.

    ``L_J`` overrides junction inductances by name.
    """
    if not net.junctions:
        raise InvalidInputError("no qubit ports")
    L_J = dict(L_J or {})
    unknown = set(L_J) - {j.name for j in net.junctions}
    if unknown:
        raise InvalidInputError(f"unknown junctions in overrides: {sorted(unknown)}")
    md = extract_modes(net, tol=options.tol)
    z = md.to_pole_residue()
    if options.z_route == "mna":
        z_eval = NetworkImpedance(net, tol=options.tol)
    elif options.z_route == "pole-residue":
        z_eval = z
    else:
        raise InvalidInputError(f"unknown impedance route {options.z_route!r}")
    junctions = [(j.name, L_J.get(j.name, j.L_J)) for j in net.junctions]
    return analyze_pole_residue(z, junctions, net.drive_ports, z_eval=z_eval, options=options)
