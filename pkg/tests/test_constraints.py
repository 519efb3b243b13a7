"""The exact-rational DBM kernel, cross-checked against a grid oracle."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waitnet.constraints import (
    INF,
    FiringDomain,
    constraint_graph_dot,
    is_finite,
    substitute_shift,
)
from waitnet.errors import UnknownVariableError, UnsatisfiableError

from conftest import grid_points, grid_solution_set, point_satisfies

F = Fraction


def box(*items):
    return FiringDomain.from_intervals(
        [(n, F(lo), INF if hi is None else F(hi)) for n, lo, hi in items]
    )


def test_canonical_adds_tight_diagonals():
    # 2 <= a <= 3, 4 <= b <= 5 implies a - b <= -1 and b - a <= 3.
    dom = box(("a", 2, 3), ("b", 4, 5)).canonical()
    assert dom.difference_bound("a", "b") == F(-1)
    assert dom.difference_bound("b", "a") == F(3)
    # Cross-check against explicit enumeration of integer-and-half points.
    expected = {
        pt
        for pt in (dict(p) for p in map(dict, []))
    }
    oracle = grid_solution_set(box(("a", 2, 3), ("b", 4, 5)), F(6), (1, 2))
    closed = grid_solution_set(dom, F(6), (1, 2))
    assert oracle == closed


def test_negative_cycle_detected():
    dom = box(("a", 2, 3), ("b", 4, 5)).tighten("b", "a", F(0))
    assert not dom.satisfiable()
    with pytest.raises(UnsatisfiableError):
        dom.canonical()


def test_canonical_idempotent():
    dom = box(("a", 2, 3), ("b", 4, 5)).canonical()
    again = dom.canonical()
    assert again is dom
    assert FiringDomain(dom.variables, dom.entries).canonical().entries == dom.entries


def test_empty_interval_unsatisfiable():
    dom = box(("a", 0, 1)).tighten(None, "a", F(-2))  # a >= 2
    assert not dom.satisfiable()


def test_competitor_cannot_fire_first():
    # Gate-style initial domain: t2 in [5,6] cannot precede t1 (upper 3).
    dom = box(("t0", 0, None), ("t1", 0, 3), ("t2", 5, 6))
    first = dom.tighten("t2", "t1", F(0)).tighten("t2", "t0", F(0))
    assert not first.satisfiable()


def test_tighten_with_looser_bound_is_noop():
    dom = box(("a", 1, 2)).canonical()
    assert dom.tighten("a", None, F(99)) is dom
    with pytest.raises(UnknownVariableError):
        dom.tighten("zz", None, F(1))


def test_shift_rebases_unary_bounds():
    dom = box(("t0", 0, None), ("t1", 0, 3), ("t2", 5, 6)).shift(F(3))
    assert dom.lower("t2") == F(2) and dom.upper("t2") == F(3)
    assert dom.upper("t1") == F(0)
    assert dom.lower("t0") == F(0)
    assert box(("a", 1, 2)).shift(F(0)).entries == box(("a", 1, 2)).entries


def test_substitute_then_eliminate_reproduces_worked_domain():
    # Fire t0 within [0,3] from {t0 in [0,inf), t1 in [0,3], t2 in [5,6]}:
    # the projected remainder is 0<=t1<=3, 2<=t2<=6 with t1-t2<=-2, t2-t1<=6.
    dom = (
        box(("t0", 0, None), ("t1", 0, 3), ("t2", 5, 6))
        .canonical()
        .tighten("t0", None, F(3))
    )
    remainder = substitute_shift(dom, "t0").eliminate("t0").to_domain(["t1", "t2"]).canonical()
    assert remainder.lower("t1") == F(0) and remainder.upper("t1") == F(3)
    assert remainder.lower("t2") == F(2) and remainder.upper("t2") == F(6)
    assert remainder.difference_bound("t1", "t2") == F(-2)
    assert remainder.difference_bound("t2", "t1") == F(6)


def test_substitute_shift_row_shape():
    dom = box(("t0", 0, 3), ("t2", 5, 6))
    system = substitute_shift(dom, "t0")
    rows = {row.coeffs: row.bound for row in system.rows}
    # 5 <= t2' + t0 <= 6 appears as a pair of two-variable rows
    assert rows[(("t0", F(1)), ("t2", F(1)))] == F(6)
    assert rows[(("t0", F(-1)), ("t2", F(-1)))] == F(-5)


def test_eliminate_unconstrained_variable_keeps_rest():
    dom = box(("a", 1, 2), ("b", 0, None)).canonical()
    out = dom.eliminate("b").canonical()
    assert out.variables == ("a",)
    assert out.lower("a") == F(1) and out.upper("a") == F(2)


def test_substitute_pivot_only_domain_roundtrip():
    dom = box(("a", 1, 2))
    system = substitute_shift(dom, "a")
    back = system.to_domain(["a"]).canonical()
    assert back.lower("a") == F(1) and back.upper("a") == F(2)


def _random_domain(rng, names=("x", "y", "z"), top=8):
    dom = FiringDomain.from_intervals(
        [
            (
                n,
                F(rng.randint(0, top // 2)),
                INF if rng.random() < 0.2 else F(rng.randint(top // 2, top)),
            )
            for n in names
        ]
    )
    for a in names:
        for b in names:
            if a != b and rng.random() < 0.5:
                dom = dom.tighten(a, b, F(rng.randint(-2, top)))
    return dom


def test_projection_matches_grid_oracle():
    rng = random.Random(7)
    tried = 0
    for _ in range(40):
        dom = _random_domain(rng)
        if not dom.satisfiable():
            continue
        tried += 1
        projected = dom.eliminate("y").canonical()
        for pt in grid_points(projected, F(9), (1, 2, 4)):
            in_projection = point_satisfies(projected, pt)
            witness = any(
                point_satisfies(dom, {**pt, "y": v})
                for v in _grid_vals(F(9))
            )
            assert in_projection == witness, (dom, pt)
    assert tried >= 20


def _grid_vals(top):
    out = set()
    for d in (1, 2, 4):
        k = 0
        while F(k, d) <= top:
            out.add(F(k, d))
            k += 1
    return sorted(out)


@st.composite
def domains(draw):
    names = ("x", "y")
    items = []
    for n in names:
        lo = draw(st.integers(min_value=0, max_value=4))
        hi = draw(st.integers(min_value=0, max_value=8))
        if hi < lo:
            lo, hi = hi, lo
        items.append((n, F(lo), F(hi)))
    dom = FiringDomain.from_intervals(items)
    if draw(st.booleans()):
        dom = dom.tighten("x", "y", F(draw(st.integers(min_value=-4, max_value=8))))
    if draw(st.booleans()):
        dom = dom.tighten("y", "x", F(draw(st.integers(min_value=-4, max_value=8))))
    return dom


@settings(max_examples=120, deadline=None)
@given(domains())
def test_canonical_preserves_solution_set(dom):
    try:
        closed = dom.canonical()
    except UnsatisfiableError:
        # The oracle must agree there is no solution on the integer grid;
        # DBMs with integer constants have integer solutions when nonempty.
        assert not grid_solution_set(dom, F(9), (1,))
        return
    assert grid_solution_set(dom, F(9), (1, 2)) == grid_solution_set(closed, F(9), (1, 2))
    assert closed.canonical().entries == closed.entries


@settings(max_examples=120, deadline=None)
@given(domains())
def test_satisfiable_iff_grid_oracle_finds_solution(dom):
    assert dom.satisfiable() == bool(grid_solution_set(dom, F(9), (1,)))


def test_graph_duality_negative_cycle():
    # Independent Bellman-Ford-style relaxation detects the same verdict.
    rng = random.Random(3)
    for _ in range(30):
        dom = _random_domain(rng, names=("x", "y"))
        names = (None,) + dom.variables
        n = len(names)
        dist = [F(0)] * n
        negative = False
        for _ in range(n + 1):
            changed = False
            for i in range(n):
                for j in range(n):
                    w = dom.entries[i][j]
                    if not is_finite(w):
                        continue
                    if dist[i] + w < dist[j]:
                        dist[j] = dist[i] + w
                        changed = True
            if not changed:
                break
        else:
            negative = True
        assert dom.satisfiable() == (not negative)


def test_constraint_graph_dot_lists_finite_edges():
    dom = box(("a", 2, 3)).canonical()
    dot = constraint_graph_dot(dom)
    assert '"0" -> "a" [label="-2"]' in dot
    assert '"a" -> "0" [label="3"]' in dot
    assert dot == constraint_graph_dot(dom)
