"""Static waiting-net structure, markings, and marking-level firing rules.

A waiting net splits its places into standard places, which govern when a
transition's clock starts, and control places, which additionally gate the
actual firing.  Everything here is pure and immutable; clocks and time live
in :mod:`waitnet.semantics`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .constraints import INF, Bound, bound_str, is_finite
from .errors import ModelError, NotFirableError


class _Epsilon:
    """The silent label; distinct from every user-supplied symbol."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "eps"


EPSILON = _Epsilon()


@dataclass(frozen=True)
class Transition:
    """A transition with its label and static firing interval [lo, hi]."""

    tid: str
    label: object
    lo: Fraction
    hi: Bound

    def interval_str(self) -> str:
        return f"[{self.lo},{bound_str(self.hi)}]"


@dataclass(frozen=True)
class Marking:
    """Token counts, standard part and control part, in net place order."""

    standard: tuple[int, ...]
    control: tuple[int, ...]

    def covers(self, other: "Marking") -> bool:
        """Componentwise >= on both parts."""
        return all(a >= b for a, b in zip(self.standard, other.standard)) and all(
            a >= b for a, b in zip(self.control, other.control)
        )


@dataclass(frozen=True)
class WaitingNet:
    """An immutable waiting net over string place/transition identifiers."""

    name: str
    standard_places: tuple[str, ...]
    control_places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    pre: Mapping[str, Mapping[str, int]]
    post: Mapping[str, Mapping[str, int]]
    initial_marking: Marking

    def __post_init__(self):
        _validate(self)

    # -- lookups -------------------------------------------------------

    @property
    def places(self) -> tuple[str, ...]:
        return self.standard_places + self.control_places

    @cached_property
    def _by_tid(self) -> dict:
        return {t.tid: t for t in self.transitions}

    def transition(self, tid: str) -> Transition:
        try:
            return self._by_tid[tid]
        except KeyError:
            raise ModelError(f"unknown transition {tid!r}") from None

    @cached_property
    def _tids(self) -> tuple[str, ...]:
        return tuple(t.tid for t in self.transitions)

    def transition_ids(self) -> tuple[str, ...]:
        return self._tids

    def is_control(self, place: str) -> bool:
        return place in self.control_places

    # -- markings ------------------------------------------------------

    def make_marking(self, tokens: Mapping[str, int] | None = None) -> Marking:
        """Marking from a sparse {place: count} map; omitted places are 0."""
        tokens = dict(tokens or {})
        std = []
        for p in self.standard_places:
            std.append(int(tokens.pop(p, 0)))
        ctl = []
        for c in self.control_places:
            ctl.append(int(tokens.pop(c, 0)))
        if tokens:
            raise ModelError(f"unknown places in marking: {sorted(tokens)}")
        if any(v < 0 for v in std + ctl):
            raise ModelError("negative token count")
        return Marking(tuple(std), tuple(ctl))

    def marking_tokens(self, marking: Marking) -> dict[str, int]:
        out = {p: n for p, n in zip(self.standard_places, marking.standard)}
        out.update({c: n for c, n in zip(self.control_places, marking.control)})
        return out

    def marking_str(self, marking: Marking) -> str:
        std = [p for p, n in zip(self.standard_places, marking.standard) for _ in range(n)]
        ctl = [c for c, n in zip(self.control_places, marking.control) for _ in range(n)]
        return "{%s}.{%s}" % (",".join(std), ",".join(ctl))

    # -- enabling and firing --------------------------------------------
    #
    # The checks below run inside every symbolic successor computation, so
    # preset lookups are index-based and memoized per marking.

    @cached_property
    def _arc_index(self):
        std_pos = {p: i for i, p in enumerate(self.standard_places)}
        ctl_pos = {c: i for i, c in enumerate(self.control_places)}
        table = {}
        for t in self.transitions:
            def split(mapping):
                std = tuple(
                    (std_pos[p], w) for p, w in sorted(mapping.items()) if p in std_pos
                )
                ctl = tuple(
                    (ctl_pos[p], w) for p, w in sorted(mapping.items()) if p in ctl_pos
                )
                return std, ctl

            table[t.tid] = (split(self.pre[t.tid]), split(self.post[t.tid]))
        return table

    @cached_property
    def _status_cache(self):
        return {}

    def _status(self, marking: Marking):
        hit = self._status_cache.get(marking)
        if hit is None:
            enabled = []
            full = []
            std, ctl = marking.standard, marking.control
            for t in self.transitions:
                (pre_std, pre_ctl), _ = self._arc_index[t.tid]
                if all(std[i] >= w for i, w in pre_std):
                    enabled.append(t.tid)
                    if all(ctl[i] >= w for i, w in pre_ctl):
                        full.append(t.tid)
            hit = (tuple(enabled), tuple(full))
            self._status_cache[marking] = hit
        return hit

    def enabled(self, marking: Marking) -> tuple[str, ...]:
        """Transitions whose standard preset is covered; clocks run for these."""
        return self._status(marking)[0]

    def fully_enabled(self, marking: Marking) -> tuple[str, ...]:
        """Transitions whose whole preset, control places included, is covered."""
        return self._status(marking)[1]

    def waiting(self, marking: Marking) -> tuple[str, ...]:
        enabled, full = self._status(marking)
        return tuple(t for t in enabled if t not in full)

    def _remove_preset(self, marking: Marking, tid: str) -> Marking:
        if tid not in self._status(marking)[1]:
            raise NotFirableError(
                f"{tid!r} lacks tokens in {self.marking_str(marking)}"
            )
        (pre_std, pre_ctl), _ = self._arc_index[tid]
        std = list(marking.standard)
        ctl = list(marking.control)
        for i, w in pre_std:
            std[i] -= w
        for i, w in pre_ctl:
            ctl[i] -= w
        return Marking(tuple(std), tuple(ctl))

    def fire_marking(self, marking: Marking, tid: str) -> Marking:
        """Token move M - pre(t) + post(t), via the intermediate marking."""
        inter = self._remove_preset(marking, tid)
        _, (post_std, post_ctl) = self._arc_index[tid]
        std = list(inter.standard)
        ctl = list(inter.control)
        for i, w in post_std:
            std[i] += w
        for i, w in post_ctl:
            ctl[i] += w
        return Marking(tuple(std), tuple(ctl))

    def newly_enabled(self, marking: Marking, tid: str) -> tuple[str, ...]:
        """Transitions whose clocks restart after firing ``tid``.

        A transition is newly enabled when it is enabled in the successor
        marking and either was not enabled in the intermediate marking
        M - pre(t), or is a fresh occurrence of the fired transition
        itself.
        """
        inter = self._remove_preset(marking, tid)
        after = self.fire_marking(marking, tid)
        enabled_inter = set(self.enabled(inter))
        return tuple(
            t for t in self.enabled(after) if t not in enabled_inter or t == tid
        )

    def disabled_by(self, marking: Marking, tid: str) -> tuple[str, ...]:
        """Enabled transitions losing their clock in the intermediate marking."""
        inter = self._remove_preset(marking, tid)
        enabled_inter = set(self.enabled(inter))
        return tuple(t for t in self.enabled(marking) if t not in enabled_inter)


def _validate(net: WaitingNet) -> None:
    places = net.standard_places + net.control_places
    if not places:
        raise ModelError("a net needs at least one place")
    if len(set(places)) != len(places):
        raise ModelError("place identifiers must be unique across P and C")
    tids = [t.tid for t in net.transitions]
    if len(set(tids)) != len(tids):
        raise ModelError("transition identifiers must be unique")
    if set(tids) & set(places):
        raise ModelError("place and transition identifiers must not collide")
    for t in net.transitions:
        if t.lo < 0:
            raise ModelError(f"{t.tid!r}: earliest firing time must be >= 0")
        if is_finite(t.hi) and t.hi < t.lo:
            raise ModelError(f"{t.tid!r}: interval is empty ({t.lo} > {t.hi})")
    place_set = set(places)
    for mapping_name, mapping in (("pre", net.pre), ("post", net.post)):
        if set(mapping) != set(tids):
            raise ModelError(f"{mapping_name} must cover exactly the transitions")
        for tid, arcs in mapping.items():
            for place, weight in arcs.items():
                if place not in place_set:
                    raise ModelError(f"{tid!r}: unknown place {place!r}")
                if weight < 0:
                    raise ModelError(f"{tid!r}: negative arc weight on {place!r}")
    if len(net.initial_marking.standard) != len(net.standard_places) or len(
        net.initial_marking.control
    ) != len(net.control_places):
        raise ModelError("initial marking does not match the place lists")
    if any(v < 0 for v in net.initial_marking.standard + net.initial_marking.control):
        raise ModelError("initial marking has a negative count")


def make_net(
    name: str,
    standard: Iterable[str],
    control: Iterable[str],
    transitions: Iterable[tuple],
    arcs: Iterable[tuple],
    initial: Mapping[str, int],
) -> WaitingNet:
    """Assemble and validate a net from plain data.

    ``transitions`` holds (tid, label, lo, hi) tuples, ``arcs`` holds
    (source, target, weight) with one endpoint a place and the other a
    transition; weights accumulate when an arc is listed twice.
    """
    standard = tuple(standard)
    control = tuple(control)
    trans = tuple(
        Transition(tid, label, Fraction(lo), hi if hi is INF else Fraction(hi))
        for tid, label, lo, hi in transitions
    )
    tids = {t.tid for t in trans}
    pre: dict[str, dict[str, int]] = {t.tid: {} for t in trans}
    post: dict[str, dict[str, int]] = {t.tid: {} for t in trans}
    places = set(standard) | set(control)
    for src, dst, weight in arcs:
        if src in places and dst in tids:
            table, key, place = pre, dst, src
        elif src in tids and dst in places:
            table, key, place = post, src, dst
        else:
            raise ModelError(f"arc {src!r} -> {dst!r} must join a place and a transition")
        table[key][place] = table[key].get(place, 0) + int(weight)
    net = WaitingNet(
        name=name,
        standard_places=standard,
        control_places=control,
        transitions=trans,
        pre=pre,
        post=post,
        initial_marking=Marking(
            tuple(int(initial.get(p, 0)) for p in standard),
            tuple(int(initial.get(c, 0)) for c in control),
        ),
    )
    unknown = set(initial) - places
    if unknown:
        raise ModelError(f"initial marking mentions unknown places: {sorted(unknown)}")
    return net
