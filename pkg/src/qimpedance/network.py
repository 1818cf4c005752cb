"""Impedance evaluation and modal extraction for lumped LC networks.

Nodal description: with ``C`` the node capacitance matrix, ``Gamma`` the
inverse-inductance Laplacian and ``B`` the port incidence matrix (columns
``e_a - e_b``), the open-circuit impedance is

    Z(omega) = B^T (j omega C + Gamma/(j omega))^{-1} B.

Modal extraction reduces this pencil in two exact steps: massless nodes
(no capacitive path) are eliminated statically, giving ``A_inf``; the DC
subspace (the null space of ``Gamma``) is then split off, giving ``A0``.
What remains is a definite pencil whose eigenpairs are the finite poles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from .core import LinearNetwork, PoleResidueImpedance, Tolerances
from .errors import (IllDefinedOpenCircuitError, InductiveStageWarning, InvalidInputError,
                     MergedPoleWarning, ResonanceProximityError)

__all__ = [
    "nodal_matrices",
    "port_incidence",
    "nodal_impedance",
    "evaluate_impedance_mna",
    "NetworkImpedance",
    "ModalDecomposition",
    "modal_decomposition",
    "extract_modes",
    "PassivityViolation",
    "check_lossless_passivity",
    "TwoPortABCD",
    "abcd_series",
    "abcd_shunt",
    "abcd_cascade",
    "abcd_to_z",
]

_DEFAULT_TOL = Tolerances()


# --------------------------------------------------------------------------
# Nodal matrices

def nodal_matrices(net: LinearNetwork, linearize: Mapping[str, float] | None = None):
    """Assemble node capacitance and inverse-inductance matrices.

    Parameters
    ----------
    net : LinearNetwork
    linearize : mapping, optional
        Junction name to inductance. Listed junctions are included as
        linear inductors; all others are removed (open ports).

    Returns
    -------
    nodes : tuple of str
    C, Gamma : ndarray
    """
    nodes = net.nodes
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    C = np.zeros((n, n))
    G = np.zeros((n, n))

    def stamp(mat, a, b, y):
        ia, ib = idx.get(a), idx.get(b)
        if ia is not None:
            mat[ia, ia] += y
        if ib is not None:
            mat[ib, ib] += y
        if ia is not None and ib is not None:
            mat[ia, ib] -= y
            mat[ib, ia] -= y

    for el in net.elements:
        if el.kind == "C":
            stamp(C, *el.nodes, el.value)
        else:
            stamp(G, *el.nodes, 1.0 / el.value)
    linearize = dict(linearize or {})
    unknown = set(linearize) - {j.name for j in net.junctions}
    if unknown:
        raise InvalidInputError(f"unknown junctions to linearize: {sorted(unknown)}")
    for j in net.junctions:
        if j.name in linearize:
            stamp(G, *j.nodes, 1.0 / float(linearize[j.name]))
    return nodes, C, G


def port_incidence(nodes: Sequence[str], ports: Sequence[tuple[str, str]],
                   ground: str) -> np.ndarray:
    """Incidence matrix: current enters the first node, leaves the second."""
    idx = {n: i for i, n in enumerate(nodes)}
    B = np.zeros((len(nodes), len(ports)))
    for p, (a, b) in enumerate(ports):
        for node, sign in ((a, 1.0), (b, -1.0)):
            if node == ground:
                continue
            if node not in idx:
                raise InvalidInputError(f"port {p} references unknown node {node!r}")
            B[idx[node], p] += sign
    return B


def _components(n: int, edges: list[tuple[int, int]]) -> list[list[int]]:
    """Connected components of a graph on n vertices (vertex n = ground)."""
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    gnd = find(n)
    return [g for r, g in groups.items() if r != gnd]


def _floating_indicators(net: LinearNetwork, nodes, kind: str,
                         linearize: Mapping[str, float] | None = None) -> np.ndarray:
    """Indicator vectors of ``kind``-element islands not touching ground."""
    idx = {nm: i for i, nm in enumerate(nodes)}
    n = len(nodes)
    edges = []

    def vid(x):
        return idx[x] if x != net.ground else n

    for el in net.elements:
        if el.kind == kind:
            edges.append((vid(el.nodes[0]), vid(el.nodes[1])))
    if kind == "L" and linearize:
        for j in net.junctions:
            if j.name in linearize:
                edges.append((vid(j.nodes[0]), vid(j.nodes[1])))
    comps = _components(n, edges)
    out = np.zeros((n, len(comps)))
    for c, members in enumerate(comps):
        out[members, c] = 1.0 / math.sqrt(len(members))
    return out


# --------------------------------------------------------------------------
# Reduction to a definite pencil

@dataclass(frozen=True)
class _Reduced:
    """Exact reduction of a nodal pencil.

    ``Im Z(omega) = -A0/omega + sum_k (b_k b_k^T) omega/(lam_k - omega^2)
    + A_inf omega`` with ``b_k`` the rows of ``port_vectors``.
    """

    lam: np.ndarray
    port_vectors: np.ndarray
    A0: np.ndarray
    A_inf: np.ndarray


def _orth_complement(basis: np.ndarray, n: int) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.eye(n)
    return sla.null_space(basis.T)


def _reduce(C: np.ndarray, G: np.ndarray, B: np.ndarray,
            Q: np.ndarray | None = None, K: np.ndarray | None = None) -> _Reduced:
    """Reduce ``(C, Gamma, B)`` to modal form.

    ``Q`` spans the null space of ``C`` (massless coordinates) and ``K``
    spans the null space of ``Gamma``; both are computed numerically when
    not supplied, but graph-derived bases are preferred.
    """
    n = C.shape[0]
    n_ports = B.shape[1]
    scale_c = max(float(np.max(np.abs(C))), 1e-300)
    scale_g = max(float(np.max(np.abs(G))), 1e-300)
    if Q is None:
        w, v = np.linalg.eigh(C)
        Q = v[:, w <= 1e-12 * scale_c]
    if K is None:
        w, v = np.linalg.eigh(G)
        K = v[:, w <= 1e-12 * scale_g]

    # Static elimination of massless coordinates.
    P = _orth_complement(Q, n)
    A_inf = np.zeros((n_ports, n_ports))
    Cp = P.T @ C @ P
    Bp = P.T @ B
    if Q.shape[1]:
        Gqq = Q.T @ G @ Q
        Gpq = P.T @ G @ Q
        Bq = Q.T @ B
        try:
            X = np.linalg.solve(Gqq, np.hstack([Gpq.T, Bq]))
        except np.linalg.LinAlgError as exc:
            raise InvalidInputError("network has a node with neither capacitive "
                                    "nor inductive path to the rest") from exc
        Xg, Xb = X[:, :Gpq.shape[0]], X[:, Gpq.shape[0]:]
        Gp = P.T @ G @ P - Gpq @ Xg
        Bp = Bp - Gpq @ Xb
        A_inf = Bq.T @ Xb
        A_inf = 0.5 * (A_inf + A_inf.T)
    else:
        Gp = P.T @ G @ P
    Gp = 0.5 * (Gp + Gp.T)

    # Split off the DC (capacitive) subspace: null(Gp) = P^T null(Gamma).
    np_ = Cp.shape[0]
    if K.shape[1]:
        N = sla.orth(P.T @ K) if np_ else np.zeros((0, 0))
    else:
        N = np.zeros((np_, 0))
    W = _orth_complement(N, np_)
    Cnn = N.T @ Cp @ N
    Cnw = N.T @ Cp @ W
    bn = N.T @ Bp
    if N.shape[1]:
        Y = np.linalg.solve(Cnn, np.hstack([Cnw, bn]))
        Yw, Yb = Y[:, :W.shape[1]], Y[:, W.shape[1]:]
        A0 = bn.T @ Yb
        Cs = W.T @ Cp @ W - Cnw.T @ Yw
        bw = W.T @ Bp - Cnw.T @ Yb
    else:
        A0 = np.zeros((n_ports, n_ports))
        Cs = W.T @ Cp @ W
        bw = W.T @ Bp
    A0 = 0.5 * (A0 + A0.T)
    Gw = W.T @ Gp @ W
    if Gw.shape[0]:
        Cs = 0.5 * (Cs + Cs.T)
        Gw = 0.5 * (Gw + Gw.T)
        lam, vec = sla.eigh(Gw, Cs)
        port_vectors = vec.T @ bw
    else:
        lam = np.zeros(0)
        port_vectors = np.zeros((0, n_ports))
    return _Reduced(lam=lam, port_vectors=port_vectors, A0=A0, A_inf=A_inf)


def _network_reduction(net: LinearNetwork, ports, linearize=None) -> _Reduced:
    nodes, C, G = nodal_matrices(net, linearize)
    B = port_incidence(nodes, ports, net.ground)
    Q = _floating_indicators(net, nodes, "C")
    K = _floating_indicators(net, nodes, "L", linearize)
    return _reduce(C, G, B, Q, K)


# --------------------------------------------------------------------------
# Direct evaluation

def nodal_impedance(C: np.ndarray, G: np.ndarray, B: np.ndarray, omega: float,
                    resonances: np.ndarray | None = None,
                    pole_guard: float = _DEFAULT_TOL.pole_guard) -> np.ndarray:
    """Open-circuit impedance ``B^T (j omega C + Gamma/(j omega))^{-1} B``."""
    omega = float(omega)
    if omega == 0.0 or not math.isfinite(omega):
        raise InvalidInputError("impedance evaluation needs a finite nonzero frequency")
    if resonances is not None and resonances.size:
        k = int(np.argmin(np.abs(resonances - abs(omega))))
        if abs(abs(omega) - resonances[k]) <= pole_guard * resonances[k]:
            raise ResonanceProximityError(
                f"omega = {omega:.6e} rad/s is within the pole guard of the network "
                f"resonance at {resonances[k]:.6e} rad/s", nearest=float(resonances[k]))
    Y = 1j * omega * C + G / (1j * omega)
    try:
        Z = B.T @ np.linalg.solve(Y, B.astype(complex))
    except np.linalg.LinAlgError as exc:
        nearest = None
        if resonances is not None and resonances.size:
            nearest = float(resonances[np.argmin(np.abs(resonances - abs(omega)))])
        raise ResonanceProximityError("singular nodal matrix", nearest=nearest) from exc
    return Z


class NetworkImpedance:
    """Cached impedance evaluator for a network and port list.

    Call or use :meth:`im` to obtain ``Im Z(omega)``; :meth:`z` returns the
    complex matrix.
    """

    def __init__(self, net: LinearNetwork, ports: Sequence[tuple[str, str]] | None = None,
                 tol: Tolerances = _DEFAULT_TOL):
        self.net = net
        self.ports = list(net.ports if ports is None else ports)
        self.tol = tol
        self.nodes, self.C, self.G = nodal_matrices(net)
        self.B = port_incidence(self.nodes, self.ports, net.ground)
        red = _network_reduction(net, self.ports)
        self.resonances = np.sqrt(np.clip(red.lam, 0.0, None))

    def z(self, omega: float) -> np.ndarray:
        return nodal_impedance(self.C, self.G, self.B, omega, self.resonances,
                               self.tol.pole_guard)

    def im(self, omega: float) -> np.ndarray:
        return self.z(omega).imag

    def __call__(self, omega: float) -> np.ndarray:
        return self.im(omega)


def evaluate_impedance_mna(net: LinearNetwork, omega: float,
                           ports: Sequence[tuple[str, str]] | None = None,
                           tol: Tolerances = _DEFAULT_TOL) -> np.ndarray:
    """Complex open-circuit impedance matrix of ``net`` at ``omega``.

    Ports default to the junction pairs followed by the drive ports.
    Junction branches are always removed.

    Raises
    ------
    ResonanceProximityError
        If ``omega`` is within ``tol.pole_guard`` of a network resonance.
    """
    return NetworkImpedance(net, ports, tol).z(omega)


# --------------------------------------------------------------------------
# Modal extraction

@dataclass(frozen=True, eq=False)
class ModalDecomposition:
    """Pole-residue data extracted from a network.

    ``residue_vectors[k]`` has shape ``(r, n_ports)``; its rows ``b`` give
    ``A_k = sum b^T b``. ``r = 1`` except for merged degenerate poles.
    """

    omegas: np.ndarray
    residue_vectors: tuple[np.ndarray, ...]
    A0: np.ndarray
    A_inf: np.ndarray
    merged: tuple[int, ...] = ()
    inductive_stage: bool = False

    @property
    def residues(self) -> np.ndarray:
        n = self.A0.shape[0]
        if not self.residue_vectors:
            return np.zeros((0, n, n))
        return np.stack([v.T @ v for v in self.residue_vectors])

    def to_pole_residue(self) -> PoleResidueImpedance:
        return PoleResidueImpedance(self.A0, self.omegas, self.residues, self.A_inf,
                                    strict=False)

    def im(self, omega: float) -> np.ndarray:
        return self.to_pole_residue().im(omega)


def modal_decomposition(C: np.ndarray, G: np.ndarray, B: np.ndarray,
                        tol: Tolerances = _DEFAULT_TOL, *, Q=None, K=None,
                        drop_tol: float = 1e-12) -> ModalDecomposition:
    """Modal decomposition of a nodal pencil.

    Modes optically dark at every port (``|b_k|^2`` below ``drop_tol``
    times the largest residue) are dropped; poles closer than
    ``tol.pole_merge_tol`` are merged with a :class:`MergedPoleWarning`.
    """
    red = _reduce(C, G, B, Q, K)
    n_ports = B.shape[1]
    keep = red.lam > 0
    lam, vecs = red.lam[keep], red.port_vectors[keep]
    norms = np.sum(vecs ** 2, axis=1)
    scale = max([float(np.max(norms, initial=0.0)), float(np.max(np.abs(red.A0), initial=0.0))])
    bright = norms > drop_tol * scale if scale > 0 else np.zeros(norms.shape, bool)
    lam, vecs = lam[bright], vecs[bright]
    order = np.argsort(lam)
    omegas = np.sqrt(lam[order])
    vecs = vecs[order]

    groups: list[list[int]] = []
    for k, w in enumerate(omegas):
        if groups and w - omegas[groups[-1][0]] <= tol.pole_merge_tol * w:
            groups[-1].append(k)
        else:
            groups.append([k])
    merged = tuple(i for i, grp in enumerate(groups) if len(grp) > 1)
    if merged:
        warnings.warn(f"merged {len(merged)} nearly degenerate pole group(s); the "
                      "summed residues may exceed rank one", MergedPoleWarning, stacklevel=2)
    om = np.array([float(np.mean(omegas[grp])) for grp in groups])
    rv = tuple(vecs[grp].reshape(len(grp), n_ports) for grp in groups)

    a_inf_scale = float(np.max(np.abs(red.A_inf), initial=0.0))
    ref = float(om[-1]) if om.size else 2.0 * math.pi * 1e10
    inductive = a_inf_scale * ref ** 2 > 1e-12 * max(scale, 1e-300)
    if inductive:
        warnings.warn("network has an inductor-only path across a port; A_inf != 0",
                      InductiveStageWarning, stacklevel=2)
    return ModalDecomposition(omegas=om, residue_vectors=rv, A0=red.A0, A_inf=red.A_inf,
                              merged=merged, inductive_stage=inductive)


def extract_modes(net: LinearNetwork, ports: Sequence[tuple[str, str]] | None = None,
                  tol: Tolerances = _DEFAULT_TOL) -> ModalDecomposition:
    """Pole-residue decomposition of the port impedance of ``net``.

    Examples
    --------
    A parallel LC to ground has one pole at ``1/sqrt(LC)`` with residue
    ``1/C`` and no DC term.
    """
    ports = list(net.ports if ports is None else ports)
    if not ports:
        raise InvalidInputError("network has no ports")
    nodes, C, G = nodal_matrices(net)
    B = port_incidence(nodes, ports, net.ground)
    Q = _floating_indicators(net, nodes, "C")
    K = _floating_indicators(net, nodes, "L")
    return modal_decomposition(C, G, B, tol, Q=Q, K=K)


# --------------------------------------------------------------------------
# Passivity diagnostics

@dataclass(frozen=True)
class PassivityViolation:
    """One failed lossless-passivity condition."""

    kind: str
    index: int | None
    magnitude: float
    message: str


def check_lossless_passivity(z: PoleResidueImpedance,
                             tol: Tolerances = _DEFAULT_TOL) -> list[PassivityViolation]:
    """List every violated lossless-passivity condition of ``z``.

    Checks symmetry of all matrices, ``A0`` positive definite, each ``A_k``
    positive semidefinite and rank one, and increasing pole frequencies.
    An empty list means the decomposition is valid.
    """
    out: list[PassivityViolation] = []

    def asym(a):
        s = float(np.linalg.norm(a))
        return float(np.max(np.abs(a - a.T))) / s if s else 0.0

    a = asym(z.A0)
    if a > tol.symmetry_tol:
        out.append(PassivityViolation("asymmetric", None, a, "A0 is not symmetric"))
    w0 = np.linalg.eigvalsh(0.5 * (z.A0 + z.A0.T))
    wmax = float(np.max(np.abs(w0), initial=0.0))
    if w0.size and (w0[0] <= tol.symmetry_tol * wmax or wmax == 0.0):
        out.append(PassivityViolation("not-positive-definite", None, float(w0[0]),
                                      "A0 is not positive definite"))
    if asym(z.A_inf) > tol.symmetry_tol:
        out.append(PassivityViolation("asymmetric", None, asym(z.A_inf),
                                      "A_inf is not symmetric"))
    wi = np.linalg.eigvalsh(0.5 * (z.A_inf + z.A_inf.T))
    if wi.size and wi[0] < -tol.symmetry_tol * max(float(np.max(np.abs(wi))), 1e-300):
        out.append(PassivityViolation("negative", None, float(wi[0]),
                                      "A_inf has a negative eigenvalue"))
    for k, A in enumerate(z.residues):
        a = asym(A)
        if a > tol.symmetry_tol:
            out.append(PassivityViolation("asymmetric", k, a, f"A_{k + 1} is not symmetric"))
        w = np.linalg.eigvalsh(0.5 * (A + A.T))
        top = float(np.max(np.abs(w), initial=0.0))
        if top == 0.0:
            continue
        if w[0] < -tol.rank1_tol * top:
            out.append(PassivityViolation("negative", k, float(w[0]),
                                          f"A_{k + 1} has a negative eigenvalue"))
        sv = np.linalg.svd(A, compute_uv=False)
        if sv.size > 1 and sv[1] > tol.rank1_tol * sv[0]:
            out.append(PassivityViolation("rank", k, float(sv[1] / sv[0]),
                                          f"A_{k + 1} is not rank one"))
    if np.any(z.omegas <= 0):
        out.append(PassivityViolation("pole-order", None, float(np.min(z.omegas)),
                                      "non-positive pole frequency"))
    gaps = np.diff(z.omegas)
    if gaps.size and np.any(gaps <= 0):
        out.append(PassivityViolation("pole-order", None, float(np.min(gaps)),
                                      "pole frequencies are not strictly increasing"))
    return out


# --------------------------------------------------------------------------
# ABCD cascades

@dataclass(frozen=True, eq=False)
class TwoPortABCD:
    """Transmission (ABCD) matrix of a two-port at one frequency."""

    matrix: np.ndarray
    omega: float

    @property
    def determinant(self) -> complex:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def __matmul__(self, other: "TwoPortABCD") -> "TwoPortABCD":
        return TwoPortABCD(self.matrix @ other.matrix, self.omega)


def abcd_series(Z: complex, omega: float = 0.0) -> TwoPortABCD:
    """Series impedance ``Z``: ``[[1, Z], [0, 1]]``."""
    return TwoPortABCD(np.array([[1.0, Z], [0.0, 1.0]], dtype=complex), omega)


def abcd_shunt(Y: complex, omega: float = 0.0) -> TwoPortABCD:
    """Shunt admittance ``Y``: ``[[1, 0], [Y, 1]]``."""
    return TwoPortABCD(np.array([[1.0, 0.0], [Y, 1.0]], dtype=complex), omega)


def _element_impedance(kind: str, value, omega: float) -> complex:
    jw = 1j * omega
    if kind == "Z":
        return complex(value)
    if kind == "Y":
        return 1.0 / complex(value)
    if kind == "short":
        return 0j
    if kind == "C":
        return 1.0 / (jw * value)
    if kind == "L":
        return jw * value
    if kind == "LC":
        L, C = value
        return 1.0 / (jw * C + 1.0 / (jw * L))
    raise InvalidInputError(f"unknown element kind {kind!r}")


def abcd_cascade(elements: Sequence[tuple], omega: float) -> TwoPortABCD:
    """Multiply element ABCD matrices in order.

    Parameters
    ----------
    elements : sequence of tuples
        ``(placement, kind, value)`` with placement ``"series"`` or
        ``"shunt"`` and kind one of ``"C"``, ``"L"``, ``"LC"`` (parallel
        tank, value ``(L, C)``), ``"Z"``, ``"Y"`` or ``"short"``.
    omega : float
        Angular frequency.
    """
    if not elements:
        raise InvalidInputError("ABCD cascade needs at least one element")
    total = np.eye(2, dtype=complex)
    for item in elements:
        placement, kind = item[0], item[1]
        value = item[2] if len(item) > 2 else None
        if placement == "series":
            m = abcd_series(_element_impedance(kind, value, omega)).matrix
        elif placement == "shunt":
            if kind == "Y":
                y = complex(value)
            elif kind == "short":
                raise InvalidInputError("a shunt short collapses the two-port")
            else:
                y = 1.0 / _element_impedance(kind, value, omega)
            m = abcd_shunt(y).matrix
        else:
            raise InvalidInputError(f"placement must be 'series' or 'shunt', got {placement!r}")
        total = total @ m
    return TwoPortABCD(total, float(omega))


def abcd_to_z(t: TwoPortABCD) -> np.ndarray:
    """Open-circuit Z matrix of a reciprocal two-port.

    Raises
    ------
    IllDefinedOpenCircuitError
        If the C entry vanishes.
    """
    (a, b), (c, d) = t.matrix
    if abs(c) == 0.0:
        raise IllDefinedOpenCircuitError("ABCD entry C = 0: open-circuit Z is undefined")
    det = a * d - b * c
    # reciprocal cascades have det = 1; use it exactly instead of the rounded product
    z12 = 1.0 / c if abs(det - 1.0) <= 1e-9 else det / c
    return np.array([[a / c, z12], [1.0 / c, d / c]], dtype=complex)
