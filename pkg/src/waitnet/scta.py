"""Timed automaton built on top of the state class graph.

Locations are state classes extended with a clock allocation: each clock
tracks the time since one batch of transitions was last newly enabled, and
transitions whose frozen clock already hit the upper bound wait in ``xp``
for a control token, to fire urgently through a fresh reset clock.  Guards
are single lower-bound atoms, invariants conjunctions of upper-bound atoms,
and every location is accepting, so the language stays prefix-closed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .constraints import INF, Bound, FiringDomain, bound_str, is_finite
from .errors import SearchBudgetExceededError, UnsatisfiableError
from .model import EPSILON, WaitingNet
from .stateclass import (
    ExplorationLimits,
    StateClass,
    StateClassGraph,
    build_scg,
)

_ABS = "@abs"  # reserved membership-search clock measuring absolute time


def _clock_name(index: int) -> str:
    return f"x{index}"


def _clock_index(name: str) -> int:
    return int(name[1:])


@dataclass(frozen=True)
class ExtendedStateClass:
    """A state class plus clock bookkeeping."""

    state_class: StateClass
    clocks: tuple[str, ...]
    trans: tuple[tuple[str, frozenset[str]], ...]  # clock -> transitions it times
    xp: frozenset[str]

    def clock_of(self, tid: str) -> str | None:
        for clock, batch in self.trans:
            if tid in batch:
                return clock
        return None

    def key(self):
        return (self.state_class.key(), self.clocks, self.trans)


@dataclass(frozen=True)
class Location:
    ext: ExtendedStateClass
    invariant: tuple[tuple[str, Fraction], ...]  # conjunction of clock <= bound


@dataclass(frozen=True)
class TaEdge:
    source: int
    label: object  # symbol or EPSILON
    transition: str
    guard: tuple[tuple[str, Fraction], ...]  # conjunction of clock >= bound
    resets: tuple[str, ...]
    target: int


@dataclass
class TimedAutomaton:
    net: WaitingNet
    locations: list[Location]
    initial: int
    clocks: tuple[str, ...]
    alphabet: tuple
    edges: list[TaEdge]
    final: tuple[int, ...]  # all locations: runs are prefix-closed
    _out: dict = field(default_factory=dict, repr=False)

    def outgoing(self, lid: int) -> list[TaEdge]:
        if not self._out:
            for edge in self.edges:
                self._out.setdefault(edge.source, []).append(edge)
        return self._out.get(lid, [])


def _invariant(net: WaitingNet, ext: ExtendedStateClass):
    """Per-clock upper bounds; urgency pins the relevant clocks at 0."""
    cls = ext.state_class
    full = set(net.fully_enabled(cls.marking))
    urgent = {
        v
        for v in cls.domain.variables
        if v in full and is_finite(cls.domain.upper(v)) and cls.domain.upper(v) == 0
    }
    caps: dict[str, Fraction] = {}
    if urgent:
        for tid in urgent:
            clock = ext.clock_of(tid)
            assert clock is not None
            caps[clock] = Fraction(0)
    else:
        for clock, batch in ext.trans:
            for tid in batch:
                t = net.transition(tid)
                if tid in full and is_finite(t.hi):
                    if clock not in caps or t.hi < caps[clock]:
                        caps[clock] = t.hi
    return tuple(sorted(caps.items(), key=lambda kv: _clock_index(kv[0])))


def build_scta(
    net: WaitingNet, limits: ExplorationLimits = ExplorationLimits()
) -> TimedAutomaton:
    """Decorate the state class graph with clocks, guards, resets, invariants."""
    scg = build_scg(net, limits)
    root_cls = scg.classes[scg.initial]
    batch0 = frozenset(net.enabled(root_cls.marking)) - root_cls.timed_out
    root = ExtendedStateClass(
        state_class=root_cls,
        clocks=(_clock_name(0),),
        trans=((_clock_name(0), batch0),) if batch0 else (),
        xp=root_cls.timed_out,
    )
    locations = [Location(root, _invariant(net, root))]
    ids = {root.key(): 0}
    # Extended classes refine SCG classes, so walk SCG edges per extension.
    key_index = {c.key(): i for i, c in enumerate(scg.classes)}
    edges: list[TaEdge] = []
    frontier = deque([0])
    while frontier:
        lid = frontier.popleft()
        ext = locations[lid].ext
        cls = ext.state_class
        cid = key_index[cls.key()]
        for scg_edge in scg.outgoing(cid):
            target_cls = scg.classes[scg_edge.target]
            tid = scg_edge.transition
            target_ext, resets = _advance(net, ext, tid, target_cls)
            key = target_ext.key()
            if key not in ids:
                ids[key] = len(locations)
                locations.append(Location(target_ext, _invariant(net, target_ext)))
                frontier.append(ids[key])
            guard = _guard(net, locations[lid], tid)
            edges.append(
                TaEdge(
                    source=lid,
                    label=net.transition(tid).label,
                    transition=tid,
                    guard=guard,
                    resets=resets,
                    target=ids[key],
                )
            )
    clocks = sorted(
        {c for loc in locations for c in loc.ext.clocks}, key=_clock_index
    )
    alphabet = tuple(
        sorted({t.label for t in net.transitions if t.label is not EPSILON})
    )
    return TimedAutomaton(
        net=net,
        locations=locations,
        initial=0,
        clocks=tuple(clocks),
        alphabet=alphabet,
        edges=edges,
        final=tuple(range(len(locations))),
    )


def _advance(net: WaitingNet, ext: ExtendedStateClass, tid: str, target: StateClass):
    """Clock bookkeeping across one firing: survivors, deaths, allocation."""
    cls = ext.state_class
    marking2 = target.marking
    newly = set(net.newly_enabled(cls.marking, tid))
    enabled2 = set(net.enabled(marking2))
    full2 = set(net.fully_enabled(marking2))
    woken = (ext.xp & full2) - newly
    gone = (set(net.enabled(cls.marking)) - enabled2) | newly
    surviving = []
    for clock, batch in ext.trans:
        kept = batch - gone
        if kept:
            surviving.append((clock, frozenset(kept)))
    resets: tuple[str, ...] = ()
    fresh = newly | woken
    if fresh:
        used = {_clock_index(clock) for clock, _ in surviving}
        idx = 0
        while idx in used:
            idx += 1
        clock = _clock_name(idx)
        surviving.append((clock, frozenset(fresh)))
        resets = (clock,)
    surviving.sort(key=lambda kv: _clock_index(kv[0]))
    target_ext = ExtendedStateClass(
        state_class=target,
        clocks=tuple(clock for clock, _ in surviving),
        trans=tuple(surviving),
        xp=target.timed_out,
    )
    return target_ext, resets


def _guard(net: WaitingNet, source: Location, tid: str):
    clock = source.ext.clock_of(tid)
    assert clock is not None, "a firable transition is always timed by a clock"
    for inv_clock, bound in source.invariant:
        if inv_clock == clock and bound == 0:
            return ()  # urgency after a timeout: the guard is vacuous
    return ((clock, net.transition(tid).lo),)


# -- membership test (exact zone search) -----------------------------------


def ta_accepts(ta: TimedAutomaton, word: Sequence[tuple], max_search: int = 64) -> bool:
    """Does some run of the automaton read ``word``?

    Zone-based search: states are (location, DBM over clocks plus an
    absolute-time reference).  Silent edges are explored up to
    ``max_search`` firings between consecutive letters; exceeding the
    budget raises SearchBudgetExceededError rather than guessing.
    """
    last = Fraction(0)
    for _, date in word:
        date = Fraction(date)
        if date < last:
            raise ValueError("timed-word dates must be non-decreasing")
        last = date
    clock_names = ta.clocks + (_ABS,)
    zone = FiringDomain.from_intervals(
        [(c, Fraction(0), Fraction(0)) for c in clock_names]
    ).canonical()
    frontier = {(ta.initial, zone.entries): (ta.initial, zone)}
    for symbol, date in word:
        date = Fraction(date)
        reached: dict = {}
        seen = set(frontier)
        work = deque(frontier.values())
        budget = max_search
        while work:
            lid, z = work.popleft()
            stretched = _stretch(ta, lid, z)
            if stretched is None:
                continue
            for edge in ta.outgoing(lid):
                if edge.label == symbol:
                    z2 = _take(ta, stretched, edge, date, exact=True)
                    if z2 is not None:
                        reached.setdefault((edge.target, z2.entries), (edge.target, z2))
                elif edge.label is EPSILON:
                    z2 = _take(ta, stretched, edge, date, exact=False)
                    if z2 is None:
                        continue
                    key = (edge.target, z2.entries)
                    if key in seen:
                        continue
                    budget -= 1
                    if budget < 0:
                        raise SearchBudgetExceededError(
                            f"more than {max_search} silent steps before ({symbol}, {date})"
                        )
                    seen.add(key)
                    work.append((edge.target, z2))
        if not reached:
            return False
        frontier = reached
    return True


def _stretch(ta: TimedAutomaton, lid: int, zone: FiringDomain) -> FiringDomain | None:
    """Close the zone under time elapse while the invariant holds."""
    z = zone.delay_closure()
    for clock, bound in ta.locations[lid].invariant:
        z = z.tighten(clock, None, bound)
    try:
        return z.canonical()
    except UnsatisfiableError:
        return None


def _take(
    ta: TimedAutomaton, zone: FiringDomain, edge: TaEdge, date: Fraction, exact: bool
) -> FiringDomain | None:
    z = zone.tighten(_ABS, None, date)
    if exact:
        z = z.tighten(None, _ABS, -date)
    for clock, bound in edge.guard:
        z = z.tighten(None, clock, -bound)
    try:
        z = z.canonical()
    except UnsatisfiableError:
        return None
    for clock in edge.resets:
        z = z.reset_to_zero(clock)
    for clock, bound in ta.locations[edge.target].invariant:
        z = z.tighten(clock, None, bound)
    try:
        return z.canonical()
    except UnsatisfiableError:
        return None


# -- emission ----------------------------------------------------------------


def _label_str(label) -> str:
    return "eps" if label is EPSILON else str(label)


def _guard_str(guard) -> str:
    if not guard:
        return "true"
    return " & ".join(f"{clock} >= {bound}" for clock, bound in guard)


def _invariant_str(invariant) -> str:
    if not invariant:
        return "true"
    return " & ".join(f"{clock} <= {bound}" for clock, bound in invariant)


def ta_dot(ta: TimedAutomaton) -> str:
    net = ta.net
    lines = [f'digraph "{net.name}-ta" {{', "  node [shape=box];"]
    for lid, loc in enumerate(ta.locations):
        cls = loc.ext.state_class
        body = [
            f"L{lid}",
            net.marking_str(cls.marking),
            "inv: " + _invariant_str(loc.invariant),
        ]
        for clock, batch in loc.ext.trans:
            body.append(f"{clock}: {','.join(sorted(batch))}")
        if loc.ext.xp:
            body.append("expired: " + ",".join(sorted(loc.ext.xp)))
        label = "\\n".join(body)
        lines.append(f'  n{lid} [label="{label}"];')
    for edge in ta.edges:
        resets = ",".join(edge.resets) if edge.resets else "-"
        label = f"{_label_str(edge.label)} | {_guard_str(edge.guard)} | reset {resets}"
        lines.append(f'  n{edge.source} -> n{edge.target} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def ta_json(ta: TimedAutomaton) -> dict:
    net = ta.net
    return {
        "net": net.name,
        "initial": ta.initial,
        "clocks": list(ta.clocks),
        "alphabet": [_label_str(a) for a in ta.alphabet],
        "locations": [
            {
                "id": lid,
                "marking": net.marking_tokens(loc.ext.state_class.marking),
                "domain": loc.ext.state_class.domain.inequalities(),
                "clock_batches": {
                    clock: sorted(batch) for clock, batch in loc.ext.trans
                },
                "expired": sorted(loc.ext.xp),
                "invariant": [
                    {"clock": clock, "le": str(bound)} for clock, bound in loc.invariant
                ],
            }
            for lid, loc in enumerate(ta.locations)
        ],
        "edges": [
            {
                "source": e.source,
                "label": _label_str(e.label),
                "transition": e.transition,
                "guard": [{"clock": c, "ge": str(b)} for c, b in e.guard],
                "resets": list(e.resets),
                "target": e.target,
            }
            for e in ta.edges
        ],
        "final": "all",
    }
