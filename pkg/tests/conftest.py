import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qimpedance.circuits import Example1Parameters, qubit_readout_drive, two_qubit_bus
from qimpedance.errors import QImpedanceWarning

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_PI = 2.0 * math.pi
fF, nH, GHz, MHz = 1e-15, 1e-9, 1e9, 1e6


def lr_for(f_r: float, Cr: float) -> float:
    return 1.0 / ((TWO_PI * f_r) ** 2 * Cr)


@pytest.fixture
def bus_net():
    """Symmetric two-qubit bus: Cq 65 fF, Cc 5 fF, Cr 500 fF, 7 GHz bus, L_J 10 nH."""
    return two_qubit_bus(65 * fF, 5 * fF, 500 * fF, lr_for(7 * GHz, 500 * fF), 10 * nH, 10 * nH)


@pytest.fixture
def readout_net():
    """Single qubit with readout resonator and a 50 ohm line behind Cd = 100 fF."""
    return qubit_readout_drive(65 * fF, 5 * fF, 500 * fF, lr_for(7 * GHz, 500 * fF), 5 * fF,
                               100 * fF, 50.0, 10 * nH)


@pytest.fixture
def ex1():
    return Example1Parameters()


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QImpedanceWarning)
        yield


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1e-300))


def random_network(rng: np.random.Generator, n_nodes: int, n_ports: int):
    """Connected random LC network; ports are junctions on the first nodes."""
    from qimpedance.core import Element, Junction, LinearNetwork

    names = [f"n{i}" for i in range(n_nodes)]
    els = [Element("C", (n, "gnd"), rng.uniform(30, 300) * fF) for n in names]
    for i in range(1, n_nodes):
        j = int(rng.integers(0, i))
        els.append(Element("C", (names[i], names[j]), rng.uniform(1, 20) * fF))
    for n in names[n_ports:]:
        els.append(Element("L", (n, "gnd"), rng.uniform(2, 20) * nH))
    if n_nodes > n_ports + 1 and rng.random() < 0.5:
        els.append(Element("L", (names[-1], names[-2]), rng.uniform(5, 50) * nH))
    jj = [Junction(f"J{i}", (names[i], "gnd"), 10 * nH) for i in range(n_ports)]
    return LinearNetwork(els, jj)


def frequencies_away_from(rng, poles, n, lo=1e9, hi=1e12, gap=1e-3):
    """``n`` random angular frequencies at least ``gap`` (relative) from every pole."""
    out = []
    while len(out) < n:
        w = 10 ** rng.uniform(math.log10(lo), math.log10(hi))
        if all(abs(w - p) > gap * p for p in poles):
            out.append(w)
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
