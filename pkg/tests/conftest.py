"""Shared fixtures: the example nets and a brute-force constraint oracle."""

from __future__ import annotations

import itertools
from fractions import Fraction
from pathlib import Path

import pytest

from waitnet.constraints import FiringDomain, is_finite
from waitnet.textio import parse_net_file

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / f"{name}.wnet")


def load(name: str):
    return parse_net_file(fixture_path(name))


@pytest.fixture(scope="session")
def gate_net():
    return load("control_gate")


@pytest.fixture(scope="session")
def sale_net():
    return load("sale_offer")


@pytest.fixture(scope="session")
def fair_net():
    return load("fair_controller")


@pytest.fixture(scope="session")
def deadline_net():
    return load("delayed_deadline")


@pytest.fixture(scope="session")
def two_lane_net():
    return load("two_lane")


# -- independent grid oracle ------------------------------------------------
#
# Evaluates DBM entries directly on explicit rational points, never through
# canonical/eliminate, so it can serve as the second route in differential
# tests of the kernel.


def grid_values(top: Fraction, denominators=(1, 2, 4)):
    vals = set()
    for d in denominators:
        k = 0
        while Fraction(k, d) <= top:
            vals.add(Fraction(k, d))
            k += 1
    return sorted(vals)


def point_satisfies(domain: FiringDomain, point: dict[str, Fraction]) -> bool:
    names = (None,) + domain.variables
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if i == j:
                continue
            bound = domain.entries[i][j]
            if not is_finite(bound):
                continue
            left = (point[a] if a else Fraction(0)) - (point[b] if b else Fraction(0))
            if left > bound:
                return False
    return True


def grid_points(domain: FiringDomain, top: Fraction, denominators=(1, 2, 4)):
    vals = grid_values(top, denominators)
    for combo in itertools.product(vals, repeat=len(domain.variables)):
        yield dict(zip(domain.variables, combo))


def grid_solution_set(domain: FiringDomain, top: Fraction, denominators=(1, 2, 4)):
    return {
        tuple(sorted(p.items()))
        for p in grid_points(domain, top, denominators)
        if point_satisfies(domain, p)
    }
