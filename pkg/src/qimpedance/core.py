"""Domain types, physical constants and unit conventions.

Internally every quantity is SI with angular frequencies in rad/s.
Linear frequencies (Hz, GHz) appear only at I/O boundaries.

Sign convention for the imaginary part of an impedance: a capacitor has
``Im Z = -1/(omega C)``, so a lossless multiport reads

    Im Z(omega) = -A0/omega + sum_k A_k omega / (omega_k**2 - omega**2) + A_inf omega
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy import constants as _sc

from .errors import InvalidInputError, ResonanceProximityError

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "Tolerances",
    "TOLERANCE_PROFILES",
    "to_angular",
    "to_linear",
    "PoleResidueImpedance",
    "Element",
    "Junction",
    "DrivePort",
    "LinearNetwork",
    "QubitMode",
    "DriveChannel",
    "DispersiveReport",
    "imag_impedance",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 exact constants (SI)."""

    e: float = _sc.e
    hbar: float = _sc.hbar
    h: float = _sc.h
    phi0: float = _sc.physical_constants["mag. flux quantum"][0]
    k_B: float = _sc.k


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across modules.

    Attributes
    ----------
    rank1_tol : float
        Max ratio of second to first singular value of a residue.
    pole_merge_tol : float
        Relative spacing below which two poles are merged.
    pole_guard : float
        Relative distance to a resonance below which evaluation is refused.
    symmetry_tol : float
        Relative asymmetry tolerated in matrices.
    diagonal_tol : float
        Relative off-diagonal size of A0 tolerated in strict-diagonal mode.
    dispersive_error, dispersive_warn : float
        Detuning-to-coupling ratios for the dispersive guard.
    degeneracy_tol : float
        Relative size of ``omega_i**2 - omega_R**2`` treated as singular.
    smallness_warn : float
        Warn when a nominally small mixing coefficient exceeds this.
    bath_correction_tol : float
        Max relative size of the bath self-energy correction.
    transmon_r_max : float
        Warn when E_C / (hbar omega_J) exceeds this.
    """

    rank1_tol: float = 1e-8
    pole_merge_tol: float = 1e-6
    pole_guard: float = 1e-9
    symmetry_tol: float = 1e-12
    diagonal_tol: float = 1e-9
    dispersive_error: float = 3.0
    dispersive_warn: float = 10.0
    degeneracy_tol: float = 1e-6
    smallness_warn: float = 0.3
    bath_correction_tol: float = 0.01
    transmon_r_max: float = 0.2


TOLERANCE_PROFILES: dict[str, Tolerances] = {
    "default": Tolerances(),
    "strict": Tolerances(rank1_tol=1e-10, pole_merge_tol=1e-8, pole_guard=1e-9,
                         dispersive_error=5.0, dispersive_warn=20.0),
    "loose": Tolerances(rank1_tol=1e-6, pole_merge_tol=1e-5, pole_guard=1e-7,
                        symmetry_tol=1e-9, diagonal_tol=1e-6),
}


def _finite(x: Any, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} must be finite, got {x!r}")
    return arr


def to_angular(f_linear):
    """Convert linear frequency (Hz) to angular frequency (rad/s)."""
    arr = _finite(f_linear, "frequency")
    out = 2.0 * math.pi * arr
    return float(out) if out.ndim == 0 else out


def to_linear(omega):
    """Convert angular frequency (rad/s) to linear frequency (Hz)."""
    arr = _finite(omega, "angular frequency")
    out = arr / (2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _asymmetry(a: np.ndarray) -> float:
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.T))) / scale


@dataclass(frozen=True, eq=False)
class PoleResidueImpedance:
    """Lossless multiport impedance in pole-residue form.

    Parameters
    ----------
    A0 : (n, n) array_like
        DC residue (1/farad).
    omegas : (M,) array_like
        Finite pole frequencies in rad/s, strictly increasing.
    residues : (M, n, n) array_like
        Residue matrices A_k (1/farad).
    A_inf : (n, n) array_like, optional
        Inductive stage (henry). Zero when omitted.
    strict : bool
        When true (default) reject asymmetric matrices and unsorted poles.
        Diagnostics that must inspect invalid data construct with ``False``.
    """

    A0: np.ndarray
    omegas: np.ndarray
    residues: np.ndarray
    A_inf: np.ndarray | None = None
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        A0 = np.atleast_2d(_finite(self.A0, "A0"))
        n = A0.shape[0]
        if A0.shape != (n, n):
            raise InvalidInputError(f"A0 must be square, got shape {A0.shape}")
        om = np.atleast_1d(_finite(self.omegas, "pole frequencies")).reshape(-1)
        res = _finite(self.residues, "residues")
        if res.size == 0:
            res = np.zeros((0, n, n))
        res = res.reshape(-1, n, n) if res.ndim != 3 else res
        if res.shape != (om.size, n, n):
            raise InvalidInputError(
                f"residues must have shape ({om.size}, {n}, {n}), got {res.shape}")
        A_inf = np.zeros((n, n)) if self.A_inf is None else np.atleast_2d(
            _finite(self.A_inf, "A_inf"))
        if A_inf.shape != (n, n):
            raise InvalidInputError(f"A_inf must have shape ({n}, {n})")
        object.__setattr__(self, "A0", _readonly(A0))
        object.__setattr__(self, "omegas", _readonly(om))
        object.__setattr__(self, "residues", _readonly(res))
        object.__setattr__(self, "A_inf", _readonly(A_inf))
        if self.strict:
            self.validate()

    def validate(self, tol: float = 1e-12) -> None:
        """Raise if a matrix is asymmetric or the poles are not increasing."""
        for name, mat in [("A0", self.A0), ("A_inf", self.A_inf)] + [
                (f"A_{k + 1}", a) for k, a in enumerate(self.residues)]:
            if _asymmetry(mat) > tol:
                raise InvalidInputError(f"{name} is not symmetric")
        if np.any(self.omegas <= 0):
            raise InvalidInputError("pole frequencies must be positive")
        if np.any(np.diff(self.omegas) <= 0):
            raise InvalidInputError("pole frequencies must be strictly increasing")

    @property
    def n_ports(self) -> int:
        return self.A0.shape[0]

    @property
    def n_poles(self) -> int:
        return self.omegas.size

    def nearest_pole(self, omega: float) -> tuple[int, float]:
        """Index and frequency of the pole closest to ``|omega|``."""
        if self.n_poles == 0:
            return -1, math.inf
        k = int(np.argmin(np.abs(self.omegas - abs(omega))))
        return k, float(self.omegas[k])

    def _guard(self, omega: float, pole_guard: float) -> None:
        if omega == 0.0:
            raise ResonanceProximityError("Im Z diverges at omega = 0", nearest=0.0)
        k, wk = self.nearest_pole(omega)
        if k >= 0 and abs(abs(omega) - wk) <= pole_guard * wk:
            raise ResonanceProximityError(
                f"omega = {omega:.6e} rad/s is within the pole guard of mode {k} "
                f"({wk:.6e} rad/s)", nearest=wk)

    def im_ac(self, omega: float, pole_guard: float = 1e-9) -> np.ndarray:
        """Sum of the finite-pole terms of Im Z at ``omega``."""
        omega = float(omega)
        self._guard(omega, pole_guard)
        w = omega / (self.omegas ** 2 - omega ** 2)
        return np.tensordot(w, self.residues, axes=1) if self.n_poles else \
            np.zeros((self.n_ports, self.n_ports))

    def im(self, omega: float, pole_guard: float = 1e-9) -> np.ndarray:
        """Evaluate Im Z(omega) as a real ``(n, n)`` matrix."""
        omega = float(omega)
        ac = self.im_ac(omega, pole_guard)
        return -self.A0 / omega + ac + self.A_inf * omega

    def __call__(self, omega: float) -> np.ndarray:
        return self.im(omega)

    def with_residues(self, residues: np.ndarray) -> "PoleResidueImpedance":
        return replace(self, residues=residues)


def imag_impedance(z_eval, omega: float) -> np.ndarray:
    """Evaluate Im Z through any supported evaluator.

    ``z_eval`` may expose an ``im`` method (pole-residue or network
    evaluators) or be a plain callable returning either real ``Im Z`` or a
    complex ``Z``.
    """
    if hasattr(z_eval, "im"):
        return np.asarray(z_eval.im(omega), dtype=float)
    out = np.asarray(z_eval(omega))
    return out.imag.astype(float) if np.iscomplexobj(out) else out.astype(float)


# --------------------------------------------------------------------------
# Lumped networks

def _pair(nodes: Sequence[str], what: str) -> tuple[str, str]:
    if isinstance(nodes, str) or len(nodes) != 2:
        raise InvalidInputError(f"{what} needs exactly two nodes, got {nodes!r}")
    a, b = (str(n) for n in nodes)
    if a == b:
        raise InvalidInputError(f"{what} connects node {a!r} to itself")
    return a, b


def _positive(value: float, what: str) -> float:
    v = float(value)
    if not math.isfinite(v) or v <= 0:
        raise InvalidInputError(f"{what} must be finite and > 0, got {value!r}")
    return v


@dataclass(frozen=True)
class Element:
    """Two-terminal capacitor (``kind='C'``) or inductor (``kind='L'``)."""

    kind: str
    nodes: tuple[str, str]
    value: float
    name: str | None = None

    def __post_init__(self):
        if self.kind not in ("C", "L"):
            raise InvalidInputError(f"element type must be 'C' or 'L', got {self.kind!r}")
        object.__setattr__(self, "nodes", _pair(self.nodes, f"element {self.name or ''}"))
        object.__setattr__(self, "value", _positive(self.value, f"{self.kind} value"))


@dataclass(frozen=True)
class Junction:
    """Josephson junction branch; the qubit port sits across its terminals."""

    name: str
    nodes: tuple[str, str]
    L_J: float

    def __post_init__(self):
        object.__setattr__(self, "nodes", _pair(self.nodes, f"junction {self.name}"))
        object.__setattr__(self, "L_J", _positive(self.L_J, f"L_J of {self.name}"))


@dataclass(frozen=True)
class DrivePort:
    """Drive/readout line terminal of characteristic impedance ``Z0``.

    ``tone_frequency`` is an angular frequency. ``qubit`` optionally names
    the junction this line is meant to address, which defines the
    crosstalk assignment.
    """

    name: str
    nodes: tuple[str, str] | None
    Z0: float
    C_shunt_hint: float | None = None
    tone_frequency: float | None = None
    qubit: str | None = None

    def __post_init__(self):
        if self.nodes is not None:
            object.__setattr__(self, "nodes", _pair(self.nodes, f"drive port {self.name}"))
        object.__setattr__(self, "Z0", _positive(self.Z0, f"Z0 of {self.name}"))
        if self.C_shunt_hint is not None:
            object.__setattr__(self, "C_shunt_hint",
                               _positive(self.C_shunt_hint, f"C_shunt_hint of {self.name}"))
        if self.tone_frequency is not None:
            w = float(self.tone_frequency)
            if not math.isfinite(w) or w < 0:
                raise InvalidInputError(f"tone frequency of {self.name} must be >= 0")


@dataclass(frozen=True)
class LinearNetwork:
    """Lossless lumped LC network with junction branches and drive ports.

    Qubit ports are the junction node pairs (junction removed); they come
    first in port order, followed by the drive ports.
    """

    elements: tuple[Element, ...]
    junctions: tuple[Junction, ...] = ()
    drive_ports: tuple[DrivePort, ...] = ()
    ground: str = "gnd"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "junctions", tuple(self.junctions))
        object.__setattr__(self, "drive_ports", tuple(self.drive_ports))
        names = [j.name for j in self.junctions] + [d.name for d in self.drive_ports]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise InvalidInputError(f"duplicate port names: {sorted(dup)}")
        known = set(self.nodes) | {self.ground}
        for d in self.drive_ports:
            if d.nodes is None:
                raise InvalidInputError(f"drive port {d.name} needs nodes")
            for n in d.nodes:
                if n not in known:
                    raise InvalidInputError(f"drive port {d.name} references unknown node {n!r}")
            if d.qubit is not None and d.qubit not in {j.name for j in self.junctions}:
                raise InvalidInputError(f"drive port {d.name} targets unknown qubit {d.qubit!r}")
        self._check_connected()

    @property
    def nodes(self) -> tuple[str, ...]:
        """Non-ground nodes in order of first appearance."""
        seen: dict[str, None] = {}
        for item in (*self.elements, *self.junctions):
            for n in item.nodes:
                if n != self.ground:
                    seen.setdefault(n, None)
        return tuple(seen)

    def _check_connected(self) -> None:
        adj: dict[str, set[str]] = {}
        for item in (*self.elements, *self.junctions):
            a, b = item.nodes
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        if self.ground not in adj:
            raise InvalidInputError(f"no element touches ground node {self.ground!r}")
        seen, stack = {self.ground}, [self.ground]
        while stack:
            for m in adj[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        floating = [n for n in self.nodes if n not in seen]
        if floating:
            raise InvalidInputError(f"nodes not connected to ground: {floating}")

    @property
    def ports(self) -> list[tuple[str, str]]:
        return [j.nodes for j in self.junctions] + [d.nodes for d in self.drive_ports]

    @property
    def n_qubits(self) -> int:
        return len(self.junctions)

    @property
    def n_drives(self) -> int:
        return len(self.drive_ports)

    def replace_elements(self, elements: Iterable[Element]) -> "LinearNetwork":
        return replace(self, elements=tuple(elements))


# --------------------------------------------------------------------------
# Derived per-qubit and per-channel quantities

@dataclass(frozen=True)
class QubitMode:
    """Renormalized linear mode of one transmon.

    Attributes
    ----------
    index : int
        Port index of the qubit.
    L_J, C : float
        Bare junction inductance and total port shunt capacitance.
    E_C_over_h : float
        Charging energy in Hz.
    omega_J : float
        ``1/sqrt(L_J C)``.
    omega : float
        Renormalized qubit frequency.
    L : float
        Renormalized inductance, ``1/(omega**2 C)``.
    delta : float
        Anharmonicity in rad/s (negative).
    L_formula : float
        ``L_J / (1 - 2 E_C/(hbar omega))``, equal to ``L`` when the exact
        renormalization root is used.
    """

    index: int
    L_J: float
    C: float
    E_C_over_h: float
    omega_J: float
    omega: float
    L: float
    delta: float
    L_formula: float
    name: str | None = None

    @property
    def E_C(self) -> float:
        """Charging energy over hbar, rad/s."""
        return 2.0 * math.pi * self.E_C_over_h

    @property
    def Z(self) -> float:
        """Characteristic impedance of the rescaled mode, ``1/omega``."""
        return 1.0 / self.omega

    @property
    def label(self) -> str:
        return self.name if self.name is not None else f"q{self.index}"


@dataclass(frozen=True)
class DriveChannel:
    """A drive line attached at port ``port_index``."""

    index: int
    port_index: int
    Z0: float
    C_pd: float
    omega_d: float
    name: str | None = None
    qubit: int | None = None

    def __post_init__(self):
        _positive(self.C_pd, "drive-port shunt capacitance C_pd")
        _positive(self.Z0, "Z0")
        if not math.isfinite(self.omega_d) or self.omega_d < 0:
            raise InvalidInputError("drive tone frequency must be >= 0")

    @property
    def theta(self) -> float:
        return math.pi / 2 - math.atan(self.omega_d * self.Z0 * self.C_pd)

    @property
    def label(self) -> str:
        return self.name if self.name is not None else f"d{self.index}"


def _mat(a, shape=None, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    if shape is not None:
        out = out.reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DispersiveReport:
    """Complete effective-Hamiltonian parameter set.

    All matrices are angular frequencies (rad/s) except ``epsilon``
    ((rad/s)/V), ``crosstalk_dB`` (dB) and ``purcell_rates`` (1/s).
    ``crosstalk_dB`` and ``purcell_rates`` are indexed (qubit, drive); the
    crosstalk column for drive ``d`` compares qubit ``i`` with the qubit
    that line is assigned to, and is NaN when the line has no assignment.
    """

    qubits: tuple[QubitMode, ...]
    resonator_omegas: np.ndarray
    g: np.ndarray
    J: np.ndarray
    chi: np.ndarray
    J0_direct: np.ndarray
    drives: tuple[DriveChannel, ...] = ()
    epsilon: np.ndarray | None = None
    crosstalk_dB: np.ndarray | None = None
    crosstalk_sign: np.ndarray | None = None
    crosstalk_prefactor_dB: np.ndarray | None = None
    purcell_rates: np.ndarray | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        n, m, nd = len(self.qubits), np.size(self.resonator_omegas), len(self.drives)
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "drives", tuple(self.drives))
        object.__setattr__(self, "resonator_omegas", _mat(self.resonator_omegas, (m,)))
        object.__setattr__(self, "g", _mat(self.g, (n, m)))
        object.__setattr__(self, "chi", _mat(self.chi, (n, m)))
        object.__setattr__(self, "J", _mat(self.J, (n, n)))
        object.__setattr__(self, "J0_direct", _mat(self.J0_direct, (n, n)))
        empty = np.zeros((n, nd))
        object.__setattr__(self, "epsilon", _mat(
            empty if self.epsilon is None else self.epsilon, (n, nd), complex))
        for name in ("crosstalk_dB", "crosstalk_sign", "crosstalk_prefactor_dB",
                     "purcell_rates"):
            val = getattr(self, name)
            object.__setattr__(self, name, _mat(empty if val is None else val, (n, nd)))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def resonator_inductances(self) -> np.ndarray:
        """Mode inductances ``1/omega_Rk**2`` in the unit-capacitance frame."""
        return 1.0 / self.resonator_omegas ** 2

    @property
    def omegas(self) -> np.ndarray:
        return np.array([q.omega for q in self.qubits])

    @property
    def deltas(self) -> np.ndarray:
        return np.array([q.delta for q in self.qubits])

    @property
    def total_purcell_rates(self) -> np.ndarray:
        return self.purcell_rates.sum(axis=1)

    def to_dict(self) -> dict[str, Any]:
        """Lossless plain-data representation (floats kept as Python floats)."""
        def arr(a):
            return np.asarray(a).tolist()
        return {
            "qubits": [{f.name: getattr(q, f.name) for f in fields(q)} for q in self.qubits],
            "resonator_omegas": arr(self.resonator_omegas),
            "g": arr(self.g),
            "J": arr(self.J),
            "chi": arr(self.chi),
            "J0_direct": arr(self.J0_direct),
            "drives": [{f.name: getattr(d, f.name) for f in fields(d)} for d in self.drives],
            "epsilon_re": arr(self.epsilon.real),
            "epsilon_im": arr(self.epsilon.imag),
            "crosstalk_dB": arr(self.crosstalk_dB),
            "crosstalk_sign": arr(self.crosstalk_sign),
            "crosstalk_prefactor_dB": arr(self.crosstalk_prefactor_dB),
            "purcell_rates": arr(self.purcell_rates),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DispersiveReport":
        n, m, nd = len(data["qubits"]), len(data["resonator_omegas"]), len(data["drives"])

        def a(key, shape, dtype=float):
            return np.asarray(data[key], dtype=dtype).reshape(shape)
        eps = a("epsilon_re", (n, nd)) + 1j * a("epsilon_im", (n, nd))
        return cls(
            qubits=tuple(QubitMode(**q) for q in data["qubits"]),
            resonator_omegas=a("resonator_omegas", (m,)),
            g=a("g", (n, m)),
            J=a("J", (n, n)),
            chi=a("chi", (n, m)),
            J0_direct=a("J0_direct", (n, n)),
            drives=tuple(DriveChannel(**d) for d in data["drives"]),
            epsilon=eps,
            crosstalk_dB=a("crosstalk_dB", (n, nd)),
            crosstalk_sign=a("crosstalk_sign", (n, nd)),
            crosstalk_prefactor_dB=a("crosstalk_prefactor_dB", (n, nd)),
            purcell_rates=a("purcell_rates", (n, nd)),
            warnings=tuple(data.get("warnings", ())),
        )
