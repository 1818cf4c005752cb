"""Reference topologies and seeded random dispersive circuits."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .cauer import CauerRealization
from .core import DrivePort, Element, Junction, LinearNetwork, PoleResidueImpedance, QubitMode
from .dispersive import (example1_coupling_capacitance, junction_inductance_for,
                         solve_qubit_mode)
from .errors import InvalidInputError

__all__ = [
    "two_qubit_bus",
    "qubit_readout_drive",
    "Example1Parameters",
    "example1_network",
    "LatticeParameters",
    "LatticeLayout",
    "lattice_layout",
    "lattice_network",
    "RandomCircuit",
    "random_dispersive_circuit",
    "random_lossless_impedance",
]

_TWO_PI = 2.0 * math.pi


def two_qubit_bus(Cq: float, Cc: float, Cr: float, Lr: float, L_J1: float, L_J2: float,
                  *, Cc2: float | None = None, Cq2: float | None = None) -> LinearNetwork:
    """Two grounded transmons capacitively coupled to one LC bus.

    Nodes ``q1``, ``q2`` and ``r``; junctions ``Q1`` and ``Q2``.
    """
    Cc2 = Cc if Cc2 is None else Cc2
    Cq2 = Cq if Cq2 is None else Cq2
    els = [
        Element("C", ("q1", "gnd"), Cq, "Cq1"),
        Element("C", ("q2", "gnd"), Cq2, "Cq2"),
        Element("C", ("q1", "r"), Cc, "Cc1"),
        Element("C", ("q2", "r"), Cc2, "Cc2"),
        Element("C", ("r", "gnd"), Cr, "Cr"),
        Element("L", ("r", "gnd"), Lr, "Lr"),
    ]
    jj = [Junction("Q1", ("q1", "gnd"), L_J1), Junction("Q2", ("q2", "gnd"), L_J2)]
    return LinearNetwork(els, jj)


def qubit_readout_drive(Cq: float, Cc: float, Cr: float, Lr: float, Ckappa: float,
                        Cd: float, Z0: float, L_J: float) -> LinearNetwork:
    """Transmon, readout resonator and a drive line behind a shunted node.

    The drive node ``p`` carries ``Cd`` to ground; the line ``P1`` targets
    junction ``Q1``.
    """
    els = [
        Element("C", ("q", "gnd"), Cq, "Cq"),
        Element("C", ("q", "r"), Cc, "Cc"),
        Element("C", ("r", "gnd"), Cr, "Cr"),
        Element("L", ("r", "gnd"), Lr, "Lr"),
        Element("C", ("r", "p"), Ckappa, "Ckappa"),
        Element("C", ("p", "gnd"), Cd, "Cd"),
    ]
    return LinearNetwork(els, [Junction("Q1", ("q", "gnd"), L_J)],
                         [DrivePort("P1", ("p", "gnd"), Z0, qubit="Q1")])


@dataclass(frozen=True)
class Example1Parameters:
    """Two qubits on one bus specified by bare couplings and frequencies.

    Frequencies are linear (Hz). Coupling capacitances follow from the
    weak-coupling relation between ``g`` and ``Cc``; junction inductances
    are chosen so the renormalized qubit modes sit at ``f1`` and ``f2``.
    """

    f_r: float = 7.0e9
    f1: float = 4.90e9
    f2: float = 5.10e9
    g1: float = 100e6
    g2: float = 100e6
    Cq: float = 65e-15
    Cr: float = 500e-15

    @property
    def omega_r(self) -> float:
        return _TWO_PI * self.f_r

    @property
    def omega1(self) -> float:
        return _TWO_PI * self.f1

    @property
    def omega2(self) -> float:
        return _TWO_PI * self.f2

    @property
    def Lr(self) -> float:
        return 1.0 / (self.omega_r ** 2 * self.Cr)

    @property
    def Cc1(self) -> float:
        return example1_coupling_capacitance(_TWO_PI * self.g1, self.omega1, self.omega_r,
                                             self.Cq, self.Cr)

    @property
    def Cc2(self) -> float:
        return example1_coupling_capacitance(_TWO_PI * self.g2, self.omega2, self.omega_r,
                                             self.Cq, self.Cr)


def example1_network(p: Example1Parameters, *, method: str = "closed-form",
                     port_capacitance: Sequence[float] | None = None) -> LinearNetwork:
    """Bus network of :class:`Example1Parameters`.

    ``port_capacitance`` gives the capacitance seen by each junction, used
    to pick ``L_J``; by default ``Cq + Cc_i``, the open-bus value.
    """
    Cc1, Cc2 = p.Cc1, p.Cc2
    C1, C2 = port_capacitance if port_capacitance is not None else (p.Cq + Cc1, p.Cq + Cc2)
    L1 = junction_inductance_for(p.omega1, C1, method=method)
    L2 = junction_inductance_for(p.omega2, C2, method=method)
    return two_qubit_bus(p.Cq, Cc1, p.Cr, p.Lr, L1, L2, Cc2=Cc2)


# --------------------------------------------------------------------------
# 2 x 8 lattices

@dataclass(frozen=True)
class LatticeParameters:
    """Illustrative lumped values for the lattice generator.

    The defaults are representative of fixed-frequency transmon devices;
    they are not fitted to a specific chip. Frequencies are linear (Hz).
    """

    Cq: float = 80e-15
    Cc_bus: float = 6e-15
    Cr_bus: float = 400e-15
    f_bus: float = 6.30e9
    L_J: float = 12e-9
    Cc_readout: float = 5e-15
    Cr_readout: float = 450e-15
    f_readout: float = 6.80e9
    f_readout_step: float = 40e6
    Ckappa: float = 5e-15
    Cd: float = 100e-15
    Z0: float = 50.0

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeParameters":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InvalidInputError(f"unknown lattice parameters: {sorted(extra)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def from_file(cls, path: str | Path) -> "LatticeParameters":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LatticeLayout:
    """Qubit grid positions and bus memberships.

    Qubits are numbered row-major from the upper-left corner, so the upper
    row holds qubits ``0 .. cols-1``.
    """

    rows: int
    cols: int
    mode: str
    buses: tuple[tuple[int, ...], ...]

    @property
    def n_qubits(self) -> int:
        return self.rows * self.cols

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    def qubit(self, r: int, c: int) -> int:
        return r * self.cols + c


def lattice_layout(rows: int = 2, cols: int = 8, mode: str = "two-qubit") -> LatticeLayout:
    """Bus layout of a rectangular qubit grid.

    ``"two-qubit"`` places a bus on every nearest-neighbour edge;
    ``"four-qubit"`` places one bus on every 2 x 2 plaquette.
    """
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise InvalidInputError(f"unsupported lattice dimensions {rows} x {cols}")
    idx = lambda r, c: r * cols + c  # noqa: E731
    buses: list[tuple[int, ...]] = []
    if mode == "two-qubit":
        for r in range(rows):
            for c in range(cols - 1):
                buses.append((idx(r, c), idx(r, c + 1)))
        for r in range(rows - 1):
            for c in range(cols):
                buses.append((idx(r, c), idx(r + 1, c)))
    elif mode == "four-qubit":
        if rows < 2 or cols < 2:
            raise InvalidInputError(
                f"unsupported lattice dimensions {rows} x {cols} for four-qubit buses")
        for r in range(rows - 1):
            for c in range(cols - 1):
                buses.append((idx(r, c), idx(r, c + 1), idx(r + 1, c), idx(r + 1, c + 1)))
    else:
        raise InvalidInputError(f"unknown bus mode {mode!r}")
    return LatticeLayout(rows=rows, cols=cols, mode=mode, buses=tuple(buses))


def lattice_network(layout: LatticeLayout, params: LatticeParameters = LatticeParameters(),
                    *, with_readout: bool = False) -> LinearNetwork:
    """Lumped network of a qubit lattice with LC buses.

    Junctions are named ``Q1 .. QN``. With ``with_readout`` every qubit gets
    a readout LC (staggered by ``f_readout_step``) coupled through ``Ckappa``
    to a drive node shunted by ``Cd``; drive line ``Pk`` targets ``Qk``.
    """
    p = params
    els: list[Element] = []
    jj: list[Junction] = []
    drives: list[DrivePort] = []
    for q in range(layout.n_qubits):
        els.append(Element("C", (f"q{q + 1}", "gnd"), p.Cq, f"Cq{q + 1}"))
        jj.append(Junction(f"Q{q + 1}", (f"q{q + 1}", "gnd"), p.L_J))
    Lb = 1.0 / ((_TWO_PI * p.f_bus) ** 2 * p.Cr_bus)
    for b, members in enumerate(layout.buses):
        node = f"b{b + 1}"
        els.append(Element("C", (node, "gnd"), p.Cr_bus, f"Cb{b + 1}"))
        els.append(Element("L", (node, "gnd"), Lb, f"Lb{b + 1}"))
        for q in members:
            els.append(Element("C", (f"q{q + 1}", node), p.Cc_bus, f"Cc{q + 1}_{b + 1}"))
    if with_readout:
        for q in range(layout.n_qubits):
            k = q + 1
            f_ro = p.f_readout + q * p.f_readout_step
            L_ro = 1.0 / ((_TWO_PI * f_ro) ** 2 * p.Cr_readout)
            els += [
                Element("C", (f"q{k}", f"ro{k}"), p.Cc_readout, f"Cg{k}"),
                Element("C", (f"ro{k}", "gnd"), p.Cr_readout, f"Cro{k}"),
                Element("L", (f"ro{k}", "gnd"), L_ro, f"Lro{k}"),
                Element("C", (f"ro{k}", f"p{k}"), p.Ckappa, f"Ck{k}"),
                Element("C", (f"p{k}", "gnd"), p.Cd, f"Cd{k}"),
            ]
            drives.append(DrivePort(f"P{k}", (f"p{k}", "gnd"), p.Z0, qubit=f"Q{k}"))
    return LinearNetwork(els, jj, drives)


# --------------------------------------------------------------------------
# Random dispersive circuits

@dataclass(frozen=True, eq=False)
class RandomCircuit:
    """Seeded random Cauer network in the dispersive regime."""

    realization: CauerRealization
    impedance: PoleResidueImpedance
    L_J: tuple[float, ...]
    qubits: tuple[QubitMode, ...]
    g_over_delta: float
    """Largest per-qubit aggregate ``|g/Delta|`` over all modes."""


def random_dispersive_circuit(rng: np.random.Generator, n_qubits: int, n_modes: int,
                              n_drives: int = 0, *, gmax_ratio: float = 0.05,
                              f_qubit: tuple[float, float] = (4.5e9, 5.5e9),
                              f_modes: tuple[float, float] = (6.0e9, 9.0e9),
                              C_qubit: tuple[float, float] = (60e-15, 100e-15),
                              C_drive: float = 100e-15,
                              min_spacing: float = 50e6) -> RandomCircuit:
    """Random multi-qubit, multi-mode network in the dispersive regime.

    For every qubit the aggregate ratio ``sqrt(sum_k (g_ik/Delta_ik)**2)``
    is at most ``gmax_ratio``, so each single coupling obeys the same bound.
    Modes sit above the qubit band. Every coupling to mode ``k`` shares one
    sign so contributions to an exchange coupling add coherently.
    """
    if n_qubits < 1 or n_modes < 0 or n_drives < 0:
        raise InvalidInputError("need at least one qubit and non-negative mode counts")
    if not 0 < gmax_ratio < 1:
        raise InvalidInputError("gmax_ratio must lie in (0, 1)")
    Cq = rng.uniform(*C_qubit, size=n_qubits)
    fq = rng.uniform(*f_qubit, size=n_qubits)
    L_J = tuple(junction_inductance_for(_TWO_PI * f, c) for f, c in zip(fq, Cq))
    qubits = tuple(solve_qubit_mode(lj, c, i, f"Q{i + 1}") for i, (lj, c) in
                   enumerate(zip(L_J, Cq)))
    fm: list[float] = []
    while len(fm) < n_modes:
        f = float(rng.uniform(*f_modes))
        if all(abs(f - x) >= min_spacing for x in fm):
            fm.append(f)
    wr = _TWO_PI * np.sort(np.array(fm))
    wq = np.array([q.omega for q in qubits])
    signs = rng.choice((-1.0, 1.0), size=n_modes)
    u = rng.uniform(0.3, 1.0, size=(n_modes, n_qubits))
    scale = rng.uniform(0.5, 1.0, size=n_qubits) * gmax_ratio
    ratio_ki = u / np.linalg.norm(u, axis=0)[None, :] * scale[None, :] if n_modes else u
    detune = np.abs(wq[None, :] - wr[:, None])
    g = signs[:, None] * ratio_ki * detune
    R = 2.0 * g / (np.sqrt(wq[None, :] * wr[:, None]) * np.sqrt(Cq)[None, :])
    ratio = float(np.max(np.linalg.norm(ratio_ki, axis=0))) if n_modes else 0.0
    V = rng.normal(scale=0.02, size=(n_modes, n_drives)) * 2.0 / np.sqrt(
        wr[:, None] * 2 * np.pi * 5e9 * C_drive)
    C0 = np.concatenate([Cq, np.full(n_drives, C_drive)])
    c = CauerRealization(C0=C0, U=np.eye(C0.size), R=R, V=V, omegas=wr,
                         C_R=np.ones(n_modes))
    return RandomCircuit(realization=c, impedance=c.to_pole_residue(), L_J=L_J,
                         qubits=qubits, g_over_delta=ratio)


def random_lossless_impedance(rng: np.random.Generator, n_ports: int, n_poles: int,
                              *, f_range: tuple[float, float] = (1e9, 20e9),
                              C_range: tuple[float, float] = (20e-15, 500e-15)
                              ) -> PoleResidueImpedance:
    """Random diagonal-``A0`` lossless impedance with rank-one residues."""
    C0 = rng.uniform(*C_range, size=n_ports)
    w = _TWO_PI * np.sort(rng.uniform(*f_range, size=n_poles))
    while n_poles > 1 and np.min(np.diff(w)) < 1e-3 * w[0]:
        w = _TWO_PI * np.sort(rng.uniform(*f_range, size=n_poles))
    res = np.empty((n_poles, n_ports, n_ports))
    for k in range(n_poles):
        r = rng.normal(size=n_ports) / math.sqrt(float(np.mean(C0)))
        res[k] = np.outer(r, r)
    return PoleResidueImpedance(np.diag(1.0 / C0), w, res)
