"""Independent high-precision reference values for the test suite.

Nothing here imports ``qimpedance``. Every number is computed with mpmath
at 40 significant digits, directly from element laws and closed-form
arithmetic, and printed as Python literals. The output is frozen in
``tests/oracle_values.py``; rerun this script to audit it.

    python3 tools/derive_oracle_values.py > tests/oracle_values.py
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 40

E = mp.mpf("1.602176634e-19")
H = mp.mpf("6.62607015e-34")
HBAR = H / (2 * mp.pi)
KB = mp.mpf("1.380649e-23")
TWO_PI = 2 * mp.pi
fF, nH, GHz, MHz = mp.mpf("1e-15"), mp.mpf("1e-9"), mp.mpf("1e9"), mp.mpf("1e6")


def nodal_im_z(omega, caps, inds, nodes, ports):
    """Im Z from the complex nodal admittance of a capacitor/inductor list."""
    idx = {n: i for i, n in enumerate(nodes)}
    Y = mp.matrix(len(nodes), len(nodes))

    def stamp(a, b, y):
        ia, ib = idx.get(a), idx.get(b)
        if ia is not None:
            Y[ia, ia] += y
        if ib is not None:
            Y[ib, ib] += y
        if ia is not None and ib is not None:
            Y[ia, ib] -= y
            Y[ib, ia] -= y

    for a, b, c in caps:
        stamp(a, b, 1j * omega * c)
    for a, b, l in inds:
        stamp(a, b, 1 / (1j * omega * l))
    Z = Y ** -1
    return [[mp.im(Z[idx[p], idx[q]]) for q in ports] for p in ports]


def emit(name, value):
    print(f"{name} = {float(value)!r}")


def main():
    print('"""Frozen reference values from tools/derive_oracle_values.py (mpmath, 40 digits)."""')
    print()

    # charging energy in Hz
    C = 65 * fF
    ec_h = E ** 2 / (2 * C * H)
    emit("EC_65FF_HZ", ec_h)

    # renormalized transmon, L_J = 10 nH, C = 65 fF
    LJ = 10 * nH
    wJ = 1 / mp.sqrt(LJ * C)
    ec = TWO_PI * ec_h
    w = wJ - ec / (1 - ec / wJ)
    emit("QUBIT_10NH_FJ_HZ", wJ / TWO_PI)
    emit("QUBIT_10NH_FQ_HZ", w / TWO_PI)
    emit("QUBIT_10NH_DELTA_HZ", -ec * (wJ / w) ** 2 / TWO_PI)
    emit("QUBIT_10NH_L_FORMULA_H", LJ / (1 - 2 * ec / w))
    emit("QUBIT_10NH_L_H", 1 / (w ** 2 * C))
    r = ec / wJ
    x = mp.findroot(lambda t: t ** 3 - t + 2 * r, 1)
    emit("QUBIT_10NH_FQ_EXACT_HZ", wJ * x / TWO_PI)

    # two qubits on one bus, bare couplings 100 MHz, f1/f2 = 4.90/5.10 GHz, fr = 7 GHz
    Cq, Cr = 65 * fF, 500 * fF
    g = TWO_PI * 100 * MHz
    w1, w2, wr = TWO_PI * mp.mpf("4.90") * GHz, TWO_PI * mp.mpf("5.10") * GHz, TWO_PI * 7 * GHz
    Lr = 1 / (wr ** 2 * Cr)
    J_pert = g * g * (w1 + w2 - 2 * wr) / (2 * (w1 - wr) * (w2 - wr))
    emit("EX1_J_PERT_MHZ", J_pert / TWO_PI / MHz)
    emit("EX1_J0_MHZ", 2 * g * g / wr / TWO_PI / MHz)
    emit("EX1_J_RWA_MHZ", w1 * w2 / wr ** 2 * J_pert / TWO_PI / MHz)
    Cc1 = 2 * g * mp.sqrt(Cq * Cr / (w1 * wr))
    Cc2 = 2 * g * mp.sqrt(Cq * Cr / (w2 * wr))
    L1, L2 = 1 / (w1 ** 2 * Cq), 1 / (w2 ** 2 * Cq)

    def z_approx(om):
        return Cc1 * Cc2 * Lr * om / (Cq ** 2 * (1 - (om / wr) ** 2))

    J_Z = -mp.sqrt(w1 * w2 / (L1 * L2)) / 4 * (z_approx(w1) / w1 + z_approx(w2) / w2)
    emit("EX1_J_Z_MHZ", J_Z / TWO_PI / MHz)

    # symmetric two-qubit bus, Cc = 5 fF, Im Z12 at 5 GHz from nodal inversion
    Cc = 5 * fF
    caps = [("q1", "g", Cq), ("q2", "g", Cq), ("q1", "r", Cc), ("q2", "r", Cc), ("r", "g", Cr)]
    zz = nodal_im_z(TWO_PI * 5 * GHz, caps, [("r", "g", Lr)], ["q1", "q2", "r"], ["q1", "q2"])
    emit("BUS_IM_Z12_5GHZ_OHM", zz[0][1])
    emit("BUS_IM_Z11_5GHZ_OHM", zz[0][0])

    # qubit + readout + drive node, fq = 5.93 GHz, Lq = 11.12 nH
    Ck, Cd, Z0 = 5 * fF, 100 * fF, mp.mpf(50)
    wq = TWO_PI * mp.mpf("5.93") * GHz
    Lq = mp.mpf("11.12") * nH
    a = Cc * Ck / (Cq * Cr)
    rate = (2 / Lq) * a ** 2 * (wq / wr) ** 4 / (1 - (wq / wr) ** 2) ** 2 \
        * Z0 / (1 + (wq * Z0 * Cd) ** 2)
    emit("READOUT_PURCELL_CLOSED_FORM_S", rate)
    caps8 = [("q", "g", Cq), ("q", "r", Cc), ("r", "g", Cr), ("r", "p", Ck), ("p", "g", Cd)]
    z8 = nodal_im_z(wq, caps8, [("r", "g", Lr)], ["q", "r", "p"], ["q", "p"])
    emit("READOUT_IM_Z12_OHM", z8[0][1])

    # thermal factor and dispersive shift arithmetic
    emit("COTH_1", mp.coth(1))
    emit("THERMAL_5GHZ_20MK", mp.coth(HBAR * TWO_PI * 5 * GHz / (2 * KB * mp.mpf("0.020"))))
    d = TWO_PI * -330 * MHz
    wR = TWO_PI * 7 * GHz
    chi = 8 * d * (g * wR / (wR ** 2 - wq ** 2)) ** 2
    emit("CHI_EXAMPLE_MHZ", chi / TWO_PI / MHz)

    # parallel LC one-port: pole 1/sqrt(LC), residue 1/C
    emit("LC_POLE_RAD_S", 1 / mp.sqrt(10 * nH * 100 * fF))
    emit("LC_RESIDUE_INV_F", 1 / (100 * fF))


if __name__ == "__main__":
    main()
