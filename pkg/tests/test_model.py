"""Marking-level enabling and firing rules."""

from fractions import Fraction

import pytest

from waitnet.constraints import INF
from waitnet.errors import ModelError, NotFirableError
from waitnet.model import EPSILON, make_net

from conftest import load


def test_enabled_needs_only_standard_preset(sale_net):
    assert sale_net.enabled(sale_net.initial_marking) == ("Ad",)
    after_ad = sale_net.make_marking({"p1": 1, "p2": 1})
    assert set(sale_net.enabled(after_ad)) == {"No", "So", "Cp"}


def test_fully_enabled_needs_control_tokens_too(sale_net, gate_net):
    after_ad = sale_net.make_marking({"p1": 1, "p2": 1})
    assert set(sale_net.fully_enabled(after_ad)) == {"No", "Cp"}
    assert sale_net.waiting(after_ad) == ("So",)
    assert gate_net.fully_enabled(gate_net.initial_marking) == ("t0",)


def test_enabled_empty_when_no_tokens(gate_net):
    zero = gate_net.make_marking({})
    assert gate_net.enabled(zero) == ()


def test_fully_enabled_equals_enabled_without_control_places():
    net = load("ab_choice")
    marking = net.initial_marking
    assert net.fully_enabled(marking) == net.enabled(marking)
    assert net.waiting(marking) == ()


def test_fire_marking_moves_tokens(gate_net, sale_net):
    after = gate_net.fire_marking(gate_net.initial_marking, "t0")
    assert after == gate_net.make_marking({"p1": 1, "p3": 1, "p2": 1})
    so_from = sale_net.make_marking({"p1": 1, "p3": 1})
    assert sale_net.fire_marking(so_from, "So") == sale_net.make_marking({"p4": 1})


def test_fire_marking_identity_for_isolated_transition():
    net = make_net(
        "idle",
        standard=["p"],
        control=[],
        transitions=[("t", "t", 0, INF)],
        arcs=[],
        initial={"p": 1},
    )
    assert net.fire_marking(net.initial_marking, "t") == net.initial_marking


def test_fire_requires_tokens(gate_net):
    with pytest.raises(NotFirableError):
        gate_net.fire_marking(gate_net.initial_marking, "t1")


def test_newly_enabled_after_ad(sale_net):
    newly = sale_net.newly_enabled(sale_net.initial_marking, "Ad")
    assert set(newly) == {"No", "So", "Cp"}


def test_newly_enabled_excludes_survivors(gate_net):
    # t1 and t2 were already enabled before t0 fired: their clocks keep running.
    assert gate_net.newly_enabled(gate_net.initial_marking, "t0") == ()


def test_self_loop_is_newly_enabled():
    net = make_net(
        "loop",
        standard=["p"],
        control=[],
        transitions=[("t", "t", 1, 2)],
        arcs=[("p", "t", 1), ("t", "p", 1)],
        initial={"p": 1},
    )
    assert net.newly_enabled(net.initial_marking, "t") == ("t",)


@pytest.mark.parametrize(
    "name", ["sale_offer", "control_gate", "fair_controller", "delayed_deadline"]
)
def test_fully_enabled_subset_of_enabled_everywhere(name):
    net = load(name)
    from waitnet.stateclass import build_scg

    for cls in build_scg(net).classes:
        enabled = set(net.enabled(cls.marking))
        assert set(net.fully_enabled(cls.marking)) <= enabled


def test_token_conservation(fair_net):
    marking = fair_net.initial_marking
    after = fair_net.fire_marking(marking, "tc3")
    before_tokens = fair_net.marking_tokens(marking)
    after_tokens = fair_net.marking_tokens(after)
    for place in fair_net.places:
        delta = fair_net.post["tc3"].get(place, 0) - fair_net.pre["tc3"].get(place, 0)
        assert after_tokens[place] == before_tokens[place] + delta


def test_newly_enabled_subset_of_enabled_after(sale_net):
    after = sale_net.fire_marking(sale_net.initial_marking, "Ad")
    newly = sale_net.newly_enabled(sale_net.initial_marking, "Ad")
    assert set(newly) <= set(sale_net.enabled(after))


def test_marking_cover_order(gate_net):
    small = gate_net.make_marking({"p1": 1})
    assert gate_net.initial_marking.covers(small)
    assert not small.covers(gate_net.initial_marking)


def test_validation_rejects_bad_nets():
    with pytest.raises(ModelError):
        make_net("m", [], [], [("t", "t", 0, 1)], [], {})  # no places
    with pytest.raises(ModelError):
        make_net("m", ["p"], ["p"], [("t", "t", 0, 1)], [], {})  # P and C overlap
    with pytest.raises(ModelError):
        make_net("m", ["p"], [], [("t", "t", 3, 2)], [], {})  # empty interval
    with pytest.raises(ModelError):
        make_net("m", ["p"], [], [("t", "t", 0, 1)], [("p", "q", 1)], {})  # bad arc


def test_epsilon_label_is_distinguished():
    net = load("eps_choice")
    assert net.transition("e1").label is EPSILON
    assert net.transition("ta").label == "a"


def test_arc_weights_accumulate():
    net = make_net(
        "w",
        standard=["p", "q"],
        control=[],
        transitions=[("t", "t", 0, 1)],
        arcs=[("p", "t", 1), ("p", "t", 1), ("t", "q", 2)],
        initial={"p": 2},
    )
    assert net.pre["t"]["p"] == 2
    assert net.fire_marking(net.initial_marking, "t") == net.make_marking({"q": 2})
