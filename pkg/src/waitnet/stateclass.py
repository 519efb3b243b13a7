"""State classes, successor computation, and the state class graph.

A state class pairs a marking with a canonical firing domain over the
enabled transitions that still carry a meaningful remaining-time variable;
enabled transitions whose frozen clock already reached the upper bound are
kept aside in the ``timed_out`` set.  Because waiting transitions stop
imposing urgency, one firing can yield several successor classes, one per
interval of the upper-bounds ladder.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .constraints import (
    INF,
    Bound,
    FiringDomain,
    bound_str,
    is_finite,
    substitute_shift,
)
from .errors import (
    BadBoundIndexError,
    BoundExceededError,
    ClassBudgetExceededError,
    NotFirableError,
    UnsatisfiableError,
)
from .model import Marking, WaitingNet

Interval = tuple  # (lo: Fraction, hi: Bound), closed below, closed when hi finite


def interval_str(interval: Interval) -> str:
    lo, hi = interval
    if is_finite(hi):
        return f"[{lo},{hi}]"
    return f"[{lo},inf)"


@dataclass(frozen=True)
class StateClass:
    """A marking with a canonical domain and the timed-out transitions."""

    marking: Marking
    domain: FiringDomain
    timed_out: frozenset[str]

    def key(self):
        return (
            self.marking,
            self.domain.variables,
            self.domain.entries,
            tuple(sorted(self.timed_out)),
        )


@dataclass(frozen=True)
class BoundsLadder:
    """Strictly increasing delay bounds framed by 0 and infinity."""

    values: tuple[Bound, ...]

    def __post_init__(self):
        assert all(a < b for a, b in zip(self.values, self.values[1:]))

    def intervals(self) -> tuple[Interval, ...]:
        return tuple(zip(self.values, self.values[1:]))


@dataclass(frozen=True)
class ExplorationLimits:
    max_tokens_per_place: int = 16
    max_classes: int = 100000

    def __post_init__(self):
        if self.max_tokens_per_place <= 0 or self.max_classes <= 0:
            raise ValueError("exploration limits must be positive")


@dataclass
class ScgEdge:
    source: int
    transition: str
    intervals: tuple[Interval, ...]
    target: int


@dataclass
class StateClassGraph:
    net: WaitingNet
    classes: list[StateClass]
    edges: list[ScgEdge]
    initial: int = 0
    _out: dict = field(default_factory=dict, repr=False)

    def outgoing(self, cid: int) -> list[ScgEdge]:
        if not self._out:
            for edge in self.edges:
                self._out.setdefault(edge.source, []).append(edge)
        return self._out.get(cid, [])

    def markings(self) -> set[Marking]:
        return {c.marking for c in self.classes}


# -- class construction -------------------------------------------------


def initial_class(net: WaitingNet) -> StateClass:
    """(M0, {lo(t) <= v_t <= hi(t) for enabled t}), normalized."""
    items = []
    for t in net.transitions:
        if t.tid in net.enabled(net.initial_marking):
            items.append((t.tid, t.lo, t.hi))
    domain = FiringDomain.from_intervals(items).canonical()
    domain, timed_out = _retire_expired(net, net.initial_marking, domain, frozenset())
    return StateClass(net.initial_marking, domain, timed_out)


def _retire_expired(
    net: WaitingNet, marking: Marking, domain: FiringDomain, timed_out: frozenset
):
    """Move waiting variables pinned at remaining time 0 into timed_out.

    Such a variable carries no information beyond "urgent once fully
    enabled", which is exactly what membership in timed_out encodes;
    retiring it keeps the deduplication key canonical.
    """
    waiting = set(net.waiting(marking))
    out = set(timed_out)
    while True:
        domain = domain.canonical()
        dying = [
            v
            for v in domain.variables
            if v in waiting and is_finite(domain.upper(v)) and domain.upper(v) == 0
        ]
        if not dying:
            return domain, frozenset(out)
        for v in dying:
            domain = domain.eliminate(v)
            out.add(v)


def _check_class(net: WaitingNet, cls: StateClass) -> StateClass:
    enabled = set(net.enabled(cls.marking))
    vars_ = set(cls.domain.variables)
    assert vars_ | set(cls.timed_out) == enabled and not (vars_ & set(cls.timed_out))
    assert not (set(cls.timed_out) & set(net.fully_enabled(cls.marking)))
    return cls


def project_full(net: WaitingNet, cls: StateClass) -> FiringDomain:
    """Erase waiting upper bounds and diagonals touching waiting variables.

    Waiting transitions never impose urgency on a firing, so only their
    lower bounds survive into firability checks.
    """
    waiting = set(net.waiting(cls.marking))
    names = cls.domain.variables
    m = [list(row) for row in cls.domain.entries]
    for i, name in enumerate(names, start=1):
        if name not in waiting:
            continue
        m[i][0] = INF
        for j in range(1, len(names) + 1):
            if j != i:
                m[i][j] = INF
                m[j][i] = INF
    return FiringDomain(names, tuple(tuple(row) for row in m))


def firable(net: WaitingNet, cls: StateClass, tid: str) -> bool:
    """True when ``tid`` can be the next transition to fire from ``cls``."""
    if tid not in net.fully_enabled(cls.marking):
        return False
    if not cls.domain.has_variable(tid):
        # Fully enabled members of timed_out never occur in stored classes.
        return tid in cls.timed_out
    dom = project_full(net, cls)
    for other in net.fully_enabled(cls.marking):
        if other != tid and dom.has_variable(other):
            dom = dom.tighten(tid, other, Fraction(0))
    return dom.satisfiable()


def bounds_ladder(net: WaitingNet, cls: StateClass, tid: str) -> BoundsLadder:
    """Delay bounds that split the firing of ``tid`` into intervals.

    The ladder collects the distinct finite upper bounds of enabled
    variables up to the urgency ceiling (the smallest fully enabled upper
    bound): strictly past the ceiling no delay is legal.  A bound equal
    to the ceiling opens a boundary interval admitting only the firing at
    exactly that instant; it is enumerated only when the class has
    waiting transitions, so that without them the construction collapses
    to the classical single-successor form.  Bounds below the
    transition's own lower bound are kept; their intervals simply produce
    empty successors.
    """
    if not firable(net, cls, tid):
        raise NotFirableError(f"{tid!r} is not firable from this class")
    dom = cls.domain.canonical()
    full = set(net.fully_enabled(cls.marking))
    boundary = bool(net.waiting(cls.marking))
    ceiling: Bound = INF
    for v in dom.variables:
        if v in full and dom.upper(v) < ceiling:
            ceiling = dom.upper(v)
    values = sorted(
        {
            u
            for v in dom.variables
            for u in (dom.upper(v),)
            if is_finite(u) and u > 0 and (u < ceiling or (boundary and u == ceiling))
        }
    )
    return BoundsLadder((Fraction(0),) + tuple(values) + (INF,))


def time_progress(net: WaitingNet, cls: StateClass, bound: Fraction) -> StateClass:
    """Advance the class to the moment ``bound`` time units later.

    Waiting variables whose upper bound falls within the window are
    projected away and recorded as timed out; the rest are rebased.
    """
    bound = Fraction(bound)
    marking = cls.marking
    waiting = set(net.waiting(marking))
    domain = cls.domain.canonical()
    timed_out = set(cls.timed_out)
    dying = [
        v
        for v in domain.variables
        if v in waiting and is_finite(domain.upper(v)) and domain.upper(v) <= bound
    ]
    for v in dying:
        domain = domain.eliminate(v)
        timed_out.add(v)
    domain = domain.shift(bound).canonical()
    domain, timed_out = _retire_expired(net, marking, domain, frozenset(timed_out))
    return _check_class(net, StateClass(marking, domain, timed_out))


def next_r(net: WaitingNet, cls: StateClass, tid: str, r: int) -> StateClass | None:
    """The successor of ``cls`` by firing ``tid`` within ladder interval ``r``.

    Runs the five stages: time progress through the ladder bounds below
    the interval, the firing condition, pivot substitution, variable
    elimination, and fresh constraints for newly enabled or newly urgent
    transitions.  Returns None when the chosen interval admits no firing.
    """
    ladder = bounds_ladder(net, cls, tid)
    intervals = ladder.intervals()
    if r < 0 or r >= len(intervals):
        raise BadBoundIndexError(f"no ladder interval with index {r}")
    return _next_with_ladder(net, cls, tid, ladder, r)


def _next_with_ladder(
    net: WaitingNet, cls: StateClass, tid: str, ladder: BoundsLadder, r: int
) -> StateClass | None:
    lo, hi = ladder.intervals()[r]
    marking = cls.marking
    cur = cls
    try:
        # 1) progress through every ladder bound up to the interval start
        progressed = Fraction(0)
        for bound in ladder.values[1 : r + 1]:
            cur = time_progress(net, cur, bound - progressed)
            progressed = bound
        domain = cur.domain
        assert domain.has_variable(tid)
        # 2) firing condition: delay within the (rebased) interval, no
        #    fully enabled transition more urgent than the fired one
        rel_hi = (hi - progressed) if is_finite(hi) else INF
        domain = domain.tighten(tid, None, rel_hi)
        for other in net.fully_enabled(marking):
            if other != tid and domain.has_variable(other):
                domain = domain.tighten(tid, other, Fraction(0))
        # 3) + 4) rewrite remaining times relative to the firing moment,
        #    then project away the pivot and every disabled variable
        disabled = set(net.disabled_by(marking, tid))
        system = substitute_shift(domain, tid).eliminate(tid)
        for gone in disabled:
            if gone != tid and domain.has_variable(gone):
                system = system.eliminate(gone)
        survivors = [v for v in domain.variables if v != tid and v not in disabled]
        base = system.to_domain(survivors).canonical()
    except UnsatisfiableError:
        return None
    # 5) fresh constraints in the successor marking
    marking2 = net.fire_marking(marking, tid)
    newly = set(net.newly_enabled(marking, tid))
    full2 = set(net.fully_enabled(marking2))
    enabled2 = net.enabled(marking2)
    pending = set(cur.timed_out) & set(enabled2)
    woken = (pending & full2) - newly
    names = []
    for t in net.transitions:
        if t.tid not in enabled2:
            continue
        if t.tid in newly or t.tid in woken or t.tid in survivors:
            names.append(t.tid)
    n = len(names)
    m = [[INF] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        m[i][i] = Fraction(0)
    for j in range(1, n + 1):
        m[0][j] = Fraction(0)
    pos = {v: k for k, v in enumerate(names, start=1)}
    for i, v in enumerate(names, start=1):
        if v in newly:
            t = net.transition(v)
            m[0][i] = -t.lo
            m[i][0] = t.hi
        elif v in woken:
            m[0][i] = Fraction(0)
            m[i][0] = Fraction(0)
    for a in base.variables:
        for b in (None, *base.variables):
            i = pos[a]
            j = 0 if b is None else pos[b]
            if i == j:
                continue
            bnd = base.entries[base.variables.index(a) + 1][
                0 if b is None else base.variables.index(b) + 1
            ]
            if bnd < m[i][j]:
                m[i][j] = bnd
        lo_bound = base.entries[0][base.variables.index(a) + 1]
        if lo_bound < m[0][pos[a]]:
            m[0][pos[a]] = lo_bound
    timed_out2 = frozenset(pending - newly - woken)
    try:
        domain2 = FiringDomain(tuple(names), tuple(tuple(row) for row in m)).canonical()
        domain2, timed_out2 = _retire_expired(net, marking2, domain2, timed_out2)
    except UnsatisfiableError:
        return None
    return _check_class(net, StateClass(marking2, domain2, timed_out2))


@dataclass(frozen=True)
class PostEntry:
    intervals: tuple[Interval, ...]
    state_class: StateClass


def post_set(net: WaitingNet, cls: StateClass, tid: str) -> tuple[PostEntry, ...]:
    """All successors of ``cls`` via ``tid``, one per non-empty interval.

    Intervals producing identical successor classes are merged into a
    single entry carrying every interval label.
    """
    try:
        ladder = bounds_ladder(net, cls, tid)
    except NotFirableError:
        return ()
    grouped: dict = {}
    order = []
    for r, interval in enumerate(ladder.intervals()):
        succ = _next_with_ladder(net, cls, tid, ladder, r)
        if succ is None:
            continue
        key = succ.key()
        if key not in grouped:
            grouped[key] = (succ, [])
            order.append(key)
        grouped[key][1].append(interval)
    return tuple(
        PostEntry(tuple(intervals), succ) for succ, intervals in (grouped[k] for k in order)
    )


# -- graph construction --------------------------------------------------


def build_scg(
    net: WaitingNet, limits: ExplorationLimits = ExplorationLimits()
) -> StateClassGraph:
    """Breadth-first fixpoint of the successor relation with deduplication.

    Expansion is deterministic: classes in discovery order, transitions in
    lexicographic order, intervals in ladder order.
    """
    root = initial_class(net)
    _check_marking_bound(net, root.marking, limits)
    classes = [root]
    ids = {root.key(): 0}
    edges: list[ScgEdge] = []
    frontier = deque([0])
    while frontier:
        cid = frontier.popleft()
        cls = classes[cid]
        for tid in sorted(net.transition_ids()):
            for entry in post_set(net, cls, tid):
                succ = entry.state_class
                key = succ.key()
                if key not in ids:
                    _check_marking_bound(net, succ.marking, limits)
                    if len(classes) >= limits.max_classes:
                        raise ClassBudgetExceededError(limits.max_classes)
                    ids[key] = len(classes)
                    classes.append(succ)
                    frontier.append(ids[key])
                edges.append(ScgEdge(cid, tid, entry.intervals, ids[key]))
    return StateClassGraph(net, classes, edges)


def _check_marking_bound(net: WaitingNet, marking: Marking, limits: ExplorationLimits):
    for place, count in net.marking_tokens(marking).items():
        if count > limits.max_tokens_per_place:
            raise BoundExceededError(place, count, limits.max_tokens_per_place)


# -- queries --------------------------------------------------------------


@dataclass
class Witness:
    class_ids: list[int]
    edges: list[ScgEdge]

    def describe(self, scg: StateClassGraph) -> str:
        if not self.edges:
            cid = self.class_ids[0]
            return f"Cl{cid} (initial)"
        parts = [f"Cl{self.class_ids[0]}"]
        for edge in self.edges:
            label = "|".join(interval_str(iv) for iv in edge.intervals)
            parts.append(f"--{edge.transition} {label}--> Cl{edge.target}")
        return " ".join(parts)


@dataclass
class Verdict:
    found: bool
    witness: Witness | None
    scg: StateClassGraph


def _search(net, target: Marking, limits, matcher) -> Verdict:
    scg = build_scg(net, limits)
    parents: dict[int, tuple[int, ScgEdge] | None] = {scg.initial: None}
    queue = deque([scg.initial])
    while queue:
        cid = queue.popleft()
        if matcher(scg.classes[cid].marking, target):
            ids = [cid]
            path_edges = []
            cur = cid
            while parents[cur] is not None:
                prev, edge = parents[cur]
                path_edges.append(edge)
                ids.append(prev)
                cur = prev
            ids.reverse()
            path_edges.reverse()
            return Verdict(True, Witness(ids, path_edges), scg)
        for edge in scg.outgoing(cid):
            if edge.target not in parents:
                parents[edge.target] = (cid, edge)
                queue.append(edge.target)
    return Verdict(False, None, scg)


def reachable(
    net: WaitingNet, target: Marking, limits: ExplorationLimits = ExplorationLimits()
) -> Verdict:
    """Is ``target`` exactly reachable?  YES comes with a class path."""
    return _search(net, target, limits, lambda m, t: m == t)


def coverable(
    net: WaitingNet, target: Marking, limits: ExplorationLimits = ExplorationLimits()
) -> Verdict:
    """Is some reachable marking componentwise >= ``target``?"""
    return _search(net, target, limits, lambda m, t: m.covers(t))


# -- statistics and invariant checks --------------------------------------


@dataclass
class DomainStats:
    class_count: int
    edge_count: int
    distinct_domains: int
    max_constant: Fraction
    violations: list[str]

    @property
    def bounds_ok(self) -> bool:
        return not self.violations


def domain_stats(scg: StateClassGraph) -> DomainStats:
    """Count classes/domains and audit every constant against the static
    interval bounds: 0 <= lower <= lo(t), 0 <= upper <= hi(t), and
    -lo(t_k) <= diff(t_j, t_k) <= hi(t_j)."""
    net = scg.net
    seen = set()
    max_c = Fraction(0)
    violations = []
    for cid, cls in enumerate(scg.classes):
        dom = cls.domain
        seen.add((dom.variables, dom.entries))
        for v in dom.variables:
            t = net.transition(v)
            a, b = dom.lower(v), dom.upper(v)
            if not (0 <= a <= t.lo):
                violations.append(f"Cl{cid}: lower({v}) = {a} outside [0, {t.lo}]")
            if is_finite(b):
                max_c = max(max_c, abs(a), abs(b))
                if not (0 <= b <= t.hi):
                    violations.append(
                        f"Cl{cid}: upper({v}) = {b} outside [0, {bound_str(t.hi)}]"
                    )
            elif is_finite(t.hi):
                violations.append(f"Cl{cid}: upper({v}) unbounded but hi = {t.hi}")
        for j in dom.variables:
            for k in dom.variables:
                if j == k:
                    continue
                c = dom.difference_bound(j, k)
                if not is_finite(c):
                    continue
                max_c = max(max_c, abs(c))
                tj, tk = net.transition(j), net.transition(k)
                if c < -tk.lo or (is_finite(tj.hi) and c > tj.hi):
                    violations.append(
                        f"Cl{cid}: diff({j},{k}) = {c} outside [-{tk.lo}, {bound_str(tj.hi)}]"
                    )
    return DomainStats(
        class_count=len(scg.classes),
        edge_count=len(scg.edges),
        distinct_domains=len(seen),
        max_constant=max_c,
        violations=violations,
    )


# -- emission --------------------------------------------------------------


def scg_dot(scg: StateClassGraph) -> str:
    """Deterministic DOT text: one node per class, one edge per move."""
    net = scg.net
    lines = [f'digraph "{net.name}" {{', "  node [shape=box];"]
    for cid, cls in enumerate(scg.classes):
        body = [f"Cl{cid}", net.marking_str(cls.marking)]
        body.extend(cls.domain.inequalities())
        if cls.timed_out:
            body.append("timeout: " + ",".join(sorted(cls.timed_out)))
        label = "\\n".join(body)
        lines.append(f'  n{cid} [label="{label}"];')
    for edge in scg.edges:
        label = "|".join(interval_str(iv) for iv in edge.intervals)
        lines.append(
            f'  n{edge.source} -> n{edge.target} [label="{edge.transition} {label}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _interval_json(interval: Interval):
    lo, hi = interval
    return [str(lo), bound_str(hi)]


def scg_json(scg: StateClassGraph) -> dict:
    """JSON-ready dict with a fixed key order and string-encoded rationals."""
    net = scg.net
    stats = domain_stats(scg)
    return {
        "net": net.name,
        "initial": scg.initial,
        "classes": [
            {
                "id": cid,
                "marking": net.marking_tokens(cls.marking),
                "domain": cls.domain.inequalities(),
                "timed_out": sorted(cls.timed_out),
            }
            for cid, cls in enumerate(scg.classes)
        ],
        "edges": [
            {
                "source": e.source,
                "transition": e.transition,
                "intervals": [_interval_json(iv) for iv in e.intervals],
                "target": e.target,
            }
            for e in scg.edges
        ],
        "stats": {
            "classes": stats.class_count,
            "edges": stats.edge_count,
            "distinct_domains": stats.distinct_domains,
            "max_constant": str(stats.max_constant),
        },
    }
