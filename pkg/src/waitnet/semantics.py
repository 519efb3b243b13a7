"""Exact concrete semantics: configurations, moves, runs, timed words.

A configuration pairs a marking with one clock per transition.  Clocks of
disabled transitions hold the ``DISABLED`` sentinel; clocks of waiting
transitions grow with time but freeze at the transition's upper bound;
clocks of fully enabled transitions enforce urgency.  All arithmetic is
exact rational.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .constraints import INF, is_finite
from .errors import (
    ClockOutOfIntervalError,
    NotFullyEnabledError,
    UrgencyViolationError,
)
from .model import EPSILON, Marking, WaitingNet

DISABLED = None  # clock value of a transition whose standard preset is unfilled


@dataclass(frozen=True)
class Configuration:
    marking: Marking
    clocks: tuple  # Fraction per transition in net order, or DISABLED

    def clock(self, net: WaitingNet, tid: str) -> Fraction | None:
        return self.clocks[net.transition_ids().index(tid)]


@dataclass(frozen=True)
class RunStep:
    delay: Fraction
    transition: str
    config: Configuration


@dataclass(frozen=True)
class Run:
    """An alternating sequence of timed and discrete moves."""

    initial: Configuration
    steps: tuple[RunStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def final(self) -> Configuration:
        return self.steps[-1].config if self.steps else self.initial


def initial_configuration(net: WaitingNet) -> Configuration:
    marking = net.initial_marking
    enabled = set(net.enabled(marking))
    clocks = tuple(
        Fraction(0) if t.tid in enabled else DISABLED for t in net.transitions
    )
    return Configuration(marking, clocks)


def timed_move(net: WaitingNet, config: Configuration, delay: Fraction) -> Configuration:
    """Let ``delay`` time units elapse.

    Fully enabled clocks advance and must stay within their upper bound;
    waiting clocks advance but saturate at the bound; disabled clocks stay
    put.  Raises UrgencyViolationError when some fully enabled transition
    would overshoot.
    """
    delay = Fraction(delay)
    if delay < 0:
        raise ValueError("delays are non-negative")
    full = set(net.fully_enabled(config.marking))
    waiting = set(net.waiting(config.marking))
    new_clocks = []
    for t, v in zip(net.transitions, config.clocks):
        if v is DISABLED:
            new_clocks.append(DISABLED)
        elif t.tid in full:
            moved = v + delay
            if is_finite(t.hi) and moved > t.hi:
                raise UrgencyViolationError(
                    f"{t.tid!r} is urgent: clock {v} + {delay} exceeds {t.hi}"
                )
            new_clocks.append(moved)
        else:
            assert t.tid in waiting
            moved = v + delay
            if is_finite(t.hi) and moved > t.hi:
                moved = t.hi  # frozen at the bound
            new_clocks.append(moved)
    return Configuration(config.marking, tuple(new_clocks))


def can_elapse(net: WaitingNet, config: Configuration, delay: Fraction) -> bool:
    try:
        timed_move(net, config, delay)
    except UrgencyViolationError:
        return False
    return True


def discrete_move(net: WaitingNet, config: Configuration, tid: str) -> Configuration:
    """Fire ``tid`` with zero delay from ``config``."""
    if tid not in net.fully_enabled(config.marking):
        raise NotFullyEnabledError(f"{tid!r} is not fully enabled")
    t = net.transition(tid)
    v = config.clock(net, tid)
    if v < t.lo or (is_finite(t.hi) and v > t.hi):
        raise ClockOutOfIntervalError(
            f"{tid!r}: clock {v} outside {t.interval_str()}"
        )
    marking = net.fire_marking(config.marking, tid)
    newly = set(net.newly_enabled(config.marking, tid))
    enabled_after = set(net.enabled(marking))
    clocks = []
    for tr, old in zip(net.transitions, config.clocks):
        if tr.tid in newly:
            clocks.append(Fraction(0))
        elif tr.tid not in enabled_after:
            clocks.append(DISABLED)
        else:
            clocks.append(old)
    return Configuration(marking, tuple(clocks))


def composite_move(
    net: WaitingNet, config: Configuration, delay: Fraction, tid: str
) -> Configuration:
    return discrete_move(net, timed_move(net, config, delay), tid)


def firable_delays(net: WaitingNet, config: Configuration, tid: str):
    """The exact interval of delays after which ``tid`` can fire, or None.

    Only meaningful for transitions fully enabled in ``config``: the
    marking, and with it the enablement status, cannot change during a
    timed move.
    """
    if tid not in net.fully_enabled(config.marking):
        return None
    t = net.transition(tid)
    v = config.clock(net, tid)
    lo = max(Fraction(0), t.lo - v)
    hi = (t.hi - v) if is_finite(t.hi) else INF
    if is_finite(hi) and hi < lo:
        return None
    # Urgency of the other fully enabled transitions caps the delay.
    for other in net.fully_enabled(config.marking):
        ot = net.transition(other)
        if not is_finite(ot.hi):
            continue
        cap = ot.hi - config.clock(net, other)
        if cap < hi:
            hi = cap
    if is_finite(hi) and hi < lo:
        return None
    return (lo, hi)


def timed_word_of(net: WaitingNet, run: Run, include_epsilon: bool = False):
    """(label, date) pairs with dates as prefix sums of the run's delays."""
    word = []
    now = Fraction(0)
    for step in run.steps:
        now += step.delay
        label = net.transition(step.transition).label
        if label is EPSILON and not include_epsilon:
            continue
        word.append((label, now))
    return tuple(word)


def make_delay_grid(max_value: Fraction, denominators: Sequence[int] = (1, 2, 3)):
    """Sorted distinct rational delays 0..max_value over the denominators."""
    grid = set()
    for d in denominators:
        k = 0
        while Fraction(k, d) <= max_value:
            grid.add(Fraction(k, d))
            k += 1
    return tuple(sorted(grid))


def default_delay_grid(net: WaitingNet):
    """A grid wide enough to cross every finite bound of the net."""
    finite = [t.hi for t in net.transitions if is_finite(t.hi)]
    finite += [t.lo for t in net.transitions]
    top = max(finite) if finite else Fraction(1)
    return make_delay_grid(top + 1)


def random_run(
    net: WaitingNet,
    seed: int,
    max_steps: int,
    delay_grid: Iterable[Fraction] | None = None,
) -> Run:
    """A legal run sampled uniformly over grid delays; fixed seed, fixed run.

    Each step draws a delay from the grid among those that both pass the
    urgency check and leave at least one transition firable, then draws one
    of the firable transitions.  The run stops early when no grid delay
    admits a discrete move.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    rng = random.Random(seed)
    grid = tuple(delay_grid) if delay_grid is not None else default_delay_grid(net)
    config = initial_configuration(net)
    steps = []
    for _ in range(max_steps):
        options = []
        for delay in grid:
            try:
                moved = timed_move(net, config, delay)
            except UrgencyViolationError:
                continue
            firables = [
                t.tid
                for t in net.transitions
                if _can_fire_now(net, moved, t.tid)
            ]
            if firables:
                options.append((delay, firables))
        if not options:
            break
        delay, firables = options[rng.randrange(len(options))]
        tid = firables[rng.randrange(len(firables))]
        config = composite_move(net, config, delay, tid)
        steps.append(RunStep(delay, tid, config))
    return Run(initial_configuration(net), tuple(steps))


def _can_fire_now(net: WaitingNet, config: Configuration, tid: str) -> bool:
    if tid not in net.fully_enabled(config.marking):
        return False
    t = net.transition(tid)
    v = config.clock(net, tid)
    return v >= t.lo and (not is_finite(t.hi) or v <= t.hi)


def replay(net: WaitingNet, moves: Iterable[tuple[Fraction, str]]) -> Run:
    """Build a run from (delay, transition) pairs, validating every move."""
    config = initial_configuration(net)
    steps = []
    for delay, tid in moves:
        config = composite_move(net, config, delay, tid)
        steps.append(RunStep(Fraction(delay), tid, config))
    return Run(initial_configuration(net), tuple(steps))
