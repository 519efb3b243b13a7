"""Differential testing of the symbolic layer against the exact semantics.

Two directions are checked at desk scale: every concrete run must follow
some path of the state class graph step by step (completeness), and every
path of the graph must be realizable by a concrete run whose delays stay
inside the edge intervals (soundness).  A small fuzz campaign wraps both
directions plus the domain-constant audit over randomly generated nets.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .constraints import INF, Inequality, LinearSystem, is_finite
from .errors import (
    BoundExceededError,
    ClassBudgetExceededError,
    RealizationFailedError,
)
from .model import WaitingNet, make_net
from .semantics import Run, make_delay_grid, random_run, replay
from .stateclass import (
    ExplorationLimits,
    ScgEdge,
    StateClassGraph,
    build_scg,
    domain_stats,
    interval_str,
    post_set,
)


# -- completeness: concrete run -> symbolic path ---------------------------


@dataclass
class CoincidenceReport:
    ok: bool
    run: Run
    class_ids: list[int]
    matched_intervals: list[tuple]
    detail: str = ""


def check_completeness(
    net: WaitingNet, run: Run, scg: StateClassGraph | None = None
) -> CoincidenceReport:
    """Match the run against graph edges by greedy interval containment.

    At each step the first outgoing edge with the fired transition and an
    interval containing the elapsed delay is taken; the target marking
    must agree with the run's.  Failure to match any step is a verdict,
    not an exception.
    """
    if scg is None:
        scg = build_scg(net)
    cur = scg.initial
    class_ids = [cur]
    matched = []
    if scg.classes[cur].marking != run.initial.marking:
        return CoincidenceReport(False, run, class_ids, matched, "initial marking differs")
    for n, step in enumerate(run.steps, start=1):
        hit = None
        for edge in scg.outgoing(cur):
            if edge.transition != step.transition:
                continue
            for lo, hi in edge.intervals:
                if step.delay >= lo and (not is_finite(hi) or step.delay <= hi):
                    hit = (edge, (lo, hi))
                    break
            if hit:
                break
        if hit is None:
            return CoincidenceReport(
                False,
                run,
                class_ids,
                matched,
                f"step {n}: no edge for ({step.delay}, {step.transition}) from Cl{cur}",
            )
        edge, interval = hit
        if scg.classes[edge.target].marking != step.config.marking:
            return CoincidenceReport(
                False, run, class_ids, matched, f"step {n}: marking mismatch"
            )
        cur = edge.target
        class_ids.append(cur)
        matched.append(interval)
    return CoincidenceReport(True, run, class_ids, matched)


# -- soundness: symbolic path -> concrete run ------------------------------


def random_path(scg: StateClassGraph, seed: int, max_edges: int) -> list[ScgEdge]:
    rng = random.Random(seed)
    cur = scg.initial
    path = []
    for _ in range(max_edges):
        options = scg.outgoing(cur)
        if not options:
            break
        edge = options[rng.randrange(len(options))]
        path.append(edge)
        cur = edge.target
    return path


def check_soundness(
    net: WaitingNet, path: Sequence[ScgEdge], scg: StateClassGraph
) -> Run:
    """Realize a graph path as a legal run with per-edge-interval delays.

    The feasible delay vectors form a finite union of polyhedra: linear
    firing-window and urgency constraints, with one two-way split per
    (step, transition) pair where a frozen clock may or may not have
    reached its bound.  Each branch is solved exactly with
    Fourier-Motzkin; delays are then picked smallest-first and the run is
    replayed through the concrete semantics as a final check.  Raises
    RealizationFailedError when no branch is feasible, which on a
    correctly built graph never happens.
    """
    if not path:
        return replay(net, [])
    markings = [scg.classes[scg.initial].marking]
    for edge in path:
        markings.append(scg.classes[edge.target].marking)
    k = len(path)
    fired = [edge.transition for edge in path]
    # last step after which each transition's clock restarted, per step
    enabled_since: list[dict[str, int]] = [
        {t: 0 for t in net.enabled(markings[0])}
    ]
    for i, edge in enumerate(path, start=1):
        prev = enabled_since[-1]
        newly = set(net.newly_enabled(markings[i - 1], edge.transition))
        cur = {}
        for t in net.enabled(markings[i]):
            cur[t] = i if t in newly else prev.get(t, 0)
        enabled_since.append(cur)

    names = [f"d{i}" for i in range(1, k + 1)]
    one = Fraction(1)

    def window(first: int, last: int):
        return tuple((names[q - 1], one) for q in range(first, last + 1))

    base_rows: list[Inequality] = []
    for i in range(1, k + 1):
        base_rows.append(Inequality(((names[i - 1], -one),), Fraction(0)))
    interval_choices = []
    for i, edge in enumerate(path, start=1):
        interval_choices.append(list(edge.intervals))
    splits = []  # (step, transition, enabled-at) with possible saturation
    urgency_rows: list[Inequality] = []
    for i in range(1, k + 1):
        marking_before = markings[i - 1]
        full = set(net.fully_enabled(marking_before))
        t_i = fired[i - 1]
        since = enabled_since[i - 1].get(t_i, 0)
        lo_t = net.transition(t_i).lo
        if lo_t > 0:
            base_rows.append(
                Inequality(tuple((v, -one) for v, _ in window(since + 1, i)), -lo_t)
            )
        for t in sorted(full):
            hi_t = net.transition(t).hi
            if not is_finite(hi_t):
                continue
            since_t = enabled_since[i - 1].get(t, 0)
            had_wait = any(
                t in net.waiting(markings[j]) for j in range(since_t, i)
            )
            if had_wait:
                splits.append((i, t, since_t, hi_t))
            else:
                urgency_rows.append(Inequality(window(since_t + 1, i), hi_t))

    if len(splits) > 12:
        raise RealizationFailedError("too many saturation splits to enumerate")

    for combo in itertools.product(*(range(len(c)) for c in interval_choices)):
        rows_iv = []
        for i, choice in enumerate(combo, start=1):
            lo, hi = interval_choices[i - 1][choice]
            if lo > 0:
                rows_iv.append(Inequality(((names[i - 1], -one),), -lo))
            if is_finite(hi):
                rows_iv.append(Inequality(((names[i - 1], one),), hi))
        for saturated in itertools.product((False, True), repeat=len(splits)):
            rows = list(base_rows) + rows_iv + list(urgency_rows)
            possible = True
            for (i, t, since_t, hi_t), frozen in zip(splits, saturated):
                if frozen:
                    # clock already at the bound: no time may pass
                    rows.append(Inequality(((names[i - 1], one),), Fraction(0)))
                    if i - 1 >= since_t + 1:
                        rows.append(
                            Inequality(
                                tuple((v, -one) for v, _ in window(since_t + 1, i - 1)),
                                -hi_t,
                            )
                        )
                    elif hi_t > 0:
                        possible = False  # fresh clock cannot be at a positive bound
                        break
                else:
                    rows.append(Inequality(window(since_t + 1, i), hi_t))
            if not possible:
                continue
            delays = _solve_min(names, rows)
            if delays is None:
                continue
            return _validate_realization(net, scg, path, delays, fired)
    raise RealizationFailedError("no feasible delay vector for the path")


def _validate_realization(net, scg, path, delays, fired) -> Run:
    from .errors import WaitnetError

    try:
        run = replay(net, list(zip(delays, fired)))
    except WaitnetError as exc:
        raise RealizationFailedError(
            f"delays {delays} replay illegally: {exc}"
        ) from exc
    for step, edge in zip(run.steps, path):
        if step.config.marking != scg.classes[edge.target].marking:
            raise RealizationFailedError(
                f"delays {delays} drift from the path at {edge.transition}"
            )
        if not any(
            step.delay >= lo and (not is_finite(hi) or step.delay <= hi)
            for lo, hi in edge.intervals
        ):
            raise RealizationFailedError(
                f"delay {step.delay} escapes interval of {edge.transition}"
            )
    return run


def _solve_min(names: Sequence[str], rows) -> list[Fraction] | None:
    """Smallest-first point of a satisfiable system, or None.

    Variables are eliminated back to front; values are then assigned
    front to back, each at the lowest residual bound, which the
    Fourier-Motzkin projections guarantee to extend to a full solution.
    """
    systems = [LinearSystem(names, rows)]
    for name in reversed(names[1:]):
        systems.append(systems[-1].eliminate(name))
    systems.reverse()  # systems[j] ranges over names[: j + 1]
    if not systems[0].satisfiable_constants():
        return None
    values: list[Fraction] = []
    for j, name in enumerate(names):
        lo = Fraction(0)
        hi = INF
        for row in systems[j].rows:
            coeffs = dict(row.coeffs)
            c = coeffs.pop(name, None)
            residual = row.bound
            for v, cv in coeffs.items():
                residual = residual - cv * values[names.index(v)]
            if c is None:
                if residual < 0:
                    return None
                continue
            if c > 0:
                cap = residual / c
                if cap < hi:
                    hi = cap
            else:
                floor = residual / c
                if floor > lo:
                    lo = floor
        if is_finite(hi) and hi < lo:
            return None
        values.append(lo)
    return values


# -- fuzzing ----------------------------------------------------------------


@dataclass(frozen=True)
class RandomNetSpec:
    """Shape parameters for random net generation; small by design."""

    max_places: int = 4
    max_control: int = 2
    max_transitions: int = 3
    max_bound: int = 5
    arc_percent: int = 40
    allow_infinite: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.max_places < 1 or self.max_transitions < 1:
            raise ValueError("need at least one place and one transition")
        if not 0 <= self.arc_percent <= 100:
            raise ValueError("arc_percent is a percentage")


def generate_net(spec: RandomNetSpec, index: int) -> WaitingNet:
    rng = random.Random(spec.seed * 1_000_003 + index)
    n_p = rng.randint(1, spec.max_places)
    n_c = rng.randint(0, spec.max_control)
    n_t = rng.randint(1, spec.max_transitions)
    places = [f"p{i}" for i in range(n_p)]
    ctrls = [f"c{i}" for i in range(n_c)]
    transitions = []
    arcs = []
    for j in range(n_t):
        tid = f"t{j}"
        lo = Fraction(rng.randint(0, spec.max_bound))
        if spec.allow_infinite and rng.randrange(100) < 20:
            hi = INF
        else:
            hi = Fraction(rng.randint(int(lo), spec.max_bound))
        transitions.append((tid, tid, lo, hi))
        for p in places + ctrls:
            if rng.randrange(100) < spec.arc_percent:
                arcs.append((p, tid, 1))
            if rng.randrange(100) < spec.arc_percent:
                arcs.append((tid, p, 1))
    initial = {}
    for p in places:
        if rng.randrange(100) < 70:
            initial[p] = 1
    for c in ctrls:
        if rng.randrange(100) < 30:
            initial[c] = 1
    return make_net(f"fuzz-{index}", places, ctrls, transitions, arcs, initial)


@dataclass
class FuzzFailure:
    kind: str
    trial: int
    detail: str


@dataclass
class FuzzSummary:
    trials: int
    built: int
    skipped: int
    failures: list[FuzzFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "built": self.built,
            "skipped_unbounded": self.skipped,
            "failures": [
                {"kind": f.kind, "trial": f.trial, "detail": f.detail}
                for f in self.failures
            ],
        }


def fuzz(
    spec: RandomNetSpec,
    trials: int,
    runs_per_trial: int = 3,
    paths_per_trial: int = 3,
    max_run_steps: int = 6,
    limits: ExplorationLimits = ExplorationLimits(max_tokens_per_place=8, max_classes=400),
) -> FuzzSummary:
    """Generate nets and cross-check symbolic against concrete behavior.

    Per trial: build the graph (nets tripping the exploration limits are
    skipped, not failed), audit every domain constant, require singleton
    successor sets when there are no control places, then drive random
    grid-delay runs through the completeness check and random graph paths
    through the soundness realization.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    summary = FuzzSummary(trials=trials, built=0, skipped=0)
    grid = make_delay_grid(Fraction(spec.max_bound + 2), (1, 2, 3))
    for trial in range(trials):
        net = generate_net(spec, trial)
        try:
            scg = build_scg(net, limits)
        except (BoundExceededError, ClassBudgetExceededError):
            summary.skipped += 1
            continue
        summary.built += 1
        stats = domain_stats(scg)
        for violation in stats.violations:
            summary.failures.append(FuzzFailure("bounds", trial, violation))
        if not net.control_places:
            for cid, cls in enumerate(scg.classes):
                for tid in net.transition_ids():
                    entries = post_set(net, cls, tid)
                    if len(entries) > 1:
                        summary.failures.append(
                            FuzzFailure(
                                "determinism",
                                trial,
                                f"Cl{cid} x {tid} has {len(entries)} successors",
                            )
                        )
        for j in range(runs_per_trial):
            run = random_run(net, seed=trial * 1009 + j, max_steps=max_run_steps, delay_grid=grid)
            report = check_completeness(net, run, scg)
            if not report.ok:
                summary.failures.append(
                    FuzzFailure(
                        "completeness",
                        trial,
                        report.detail
                        + " | moves="
                        + ";".join(f"({s.delay},{s.transition})" for s in run.steps),
                    )
                )
        for j in range(paths_per_trial):
            path = random_path(scg, seed=trial * 2003 + j, max_edges=max_run_steps)
            try:
                check_soundness(net, path, scg)
            except RealizationFailedError as exc:
                trail = " ".join(
                    f"{e.transition}{[interval_str(iv) for iv in e.intervals]}" for e in path
                )
                summary.failures.append(
                    FuzzFailure("soundness", trial, f"{exc} | path={trail}")
                )
    return summary
