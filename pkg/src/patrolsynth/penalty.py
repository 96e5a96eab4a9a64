"""Per-state stochastic penalty processes and their expectations.

A penalty is a level in {0, 1/r, ..., 1} attached to each state.  Below 1 it
climbs deterministically by 1/r per time unit; at 1 it either holds (with the
state's probability p) or resets to 0.  All expectations are computed with
exact rationals; floats appear only when sampling and at output boundaries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Mapping


class PenaltyError(ValueError):
    pass


class PenaltyField:
    """Rate r >= 1 and a hold probability p(s) in (0, 1] for every state.

    p(s) = 0 is rejected: a deterministic reset breaks the probabilistic
    guarantees the round controller relies on.
    """

    def __init__(self, rate, prob: Mapping[str, Fraction]):
        if not isinstance(rate, int) or isinstance(rate, bool) or rate < 1:
            raise PenaltyError(f"rate must be an integer >= 1, got {rate!r}")
        self.rate: int = rate
        checked = {}
        for s, p in dict(prob).items():
            p = Fraction(p)
            if not 0 < p <= 1:
                raise PenaltyError(f"probability for state {s!r} must lie in (0, 1], got {p}")
            checked[s] = p
        self.prob: dict[str, Fraction] = dict(sorted(checked.items()))

    def states(self):
        return tuple(self.prob)

    def level(self, index: int) -> Fraction:
        return Fraction(index, self.rate)

    def level_index(self, value: Fraction) -> int:
        value = Fraction(value)
        index = value * self.rate
        if index.denominator != 1 or not 0 <= index <= self.rate:
            raise PenaltyError(f"{value} is not a level of a rate-{self.rate} process")
        return int(index)

    def __repr__(self):
        return f"PenaltyField(rate={self.rate}, {len(self.prob)} states)"


@dataclass
class PenaltyState:
    """Snapshot of every state's penalty level at a point in time.

    `levels` holds integer level indexes (value = index / rate).  The random
    generator is part of the process state: stepping consumes draws from it,
    so replaying a trajectory means re-initializing from the same seed.
    """

    rate: int
    levels: dict[str, int]
    clock: int
    rng: random.Random

    def value(self, s: str) -> Fraction:
        return Fraction(self.levels[s], self.rate)

    def level(self, s: str) -> int:
        return self.levels[s]


def init_penalties(field: PenaltyField, seed: int) -> PenaltyState:
    """Independent uniform draw over the r+1 levels for every state, clock 0."""
    rng = random.Random(seed)
    levels = {s: rng.randrange(field.rate + 1) for s in field.prob}
    return PenaltyState(field.rate, levels, 0, rng)


def step_penalties(field: PenaltyField, state: PenaltyState) -> PenaltyState:
    """Advance every state's penalty by one time unit.

    Levels below the top climb by one; a state at the top holds with
    probability p(s) and resets to 0 otherwise, independently per state
    (states are visited in lexicographic order, one draw per top-level state).
    """
    r = field.rate
    rng = state.rng
    levels = {}
    for s, lvl in state.levels.items():
        if lvl < r:
            levels[s] = lvl + 1
        else:
            levels[s] = r if rng.random() < field.prob[s] else 0
    return PenaltyState(r, levels, state.clock + 1, rng)


def expected_penalty(field: PenaltyField, s: str) -> Fraction:
    """Planning expectation (1 + p(s)) / 2; always within [1/2, 1]."""
    return (1 + field.prob[s]) / 2


# --- exact forward propagation (oracle and default planning backend) -------

@lru_cache(maxsize=None)
def _advance(rate: int, p: Fraction, start: tuple[Fraction, ...], steps: int) -> tuple[Fraction, ...]:
    dist = list(start)
    for _ in range(steps):
        nxt = [Fraction(0)] * (rate + 1)
        for lvl, mass in enumerate(dist):
            if not mass:
                continue
            if lvl < rate:
                nxt[lvl + 1] += mass
            else:
                nxt[rate] += mass * p
                nxt[0] += mass * (1 - p)
        dist = nxt
    return tuple(dist)


def _point_distribution(rate: int, level: int) -> tuple[Fraction, ...]:
    dist = [Fraction(0)] * (rate + 1)
    dist[level] = Fraction(1)
    return tuple(dist)


def uniform_distribution(rate: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, rate + 1) for _ in range(rate + 1))


def level_distribution(field: PenaltyField, s: str, observed: Fraction | None, elapsed: int) -> tuple[Fraction, ...]:
    """Exact level distribution after `elapsed` steps.

    `observed` is the current level, or None for the uniform initial law.
    """
    if elapsed < 0:
        raise PenaltyError("elapsed time must be >= 0")
    if observed is None:
        start = uniform_distribution(field.rate)
    else:
        start = _point_distribution(field.rate, field.level_index(observed))
    return _advance(field.rate, field.prob[s], start, elapsed)


def dp_expected_penalty(field: PenaltyField, s: str, observed: Fraction, elapsed: int) -> Fraction:
    """Exact E[penalty after `elapsed` units | current level `observed`]."""
    dist = level_distribution(field, s, observed, elapsed)
    return sum(
        (mass * Fraction(lvl, field.rate) for lvl, mass in enumerate(dist)),
        Fraction(0),
    )


# --- closed-form simulated expectation --------------------------------------

def _hold_paths(p: Fraction, z: int, r: int) -> Fraction:
    # Probability of sitting at the top level z units after first reaching it:
    # z decomposes into `drops` full reset-and-climb excursions of r+1 units
    # and `stays` single-unit holds, in any order.
    z1, z2 = divmod(z, r + 1)
    total = Fraction(0)
    for y in range(z1 + 1):
        drops = z1 - y
        stays = z2 + y * (r + 1)
        total += comb(drops + stays, drops) * (1 - p) ** drops * p**stays
    return total


def simulated_expected_penalty(
    field: PenaltyField,
    s: str,
    observed: Fraction | None,
    elapsed: int,
    visible: bool,
    horizon: int,
    fallback: Fraction | None = None,
) -> Fraction:
    """Expected penalty incurred at a state visited `elapsed` units from now.

    Observable states within the planning horizon are simulated from the
    observed level: either a pure deterministic climb, or the closed-form sum
    over reset histories.  Everything else falls back to the static planning
    expectation.
    """
    if fallback is None:
        fallback = expected_penalty(field, s)
    if not visible or elapsed > horizon:
        return fallback
    if observed is None:
        raise PenaltyError("observed level required for a visible state")
    r = field.rate
    p = field.prob[s]
    start = field.level_index(observed)
    if start + elapsed <= r:
        return Fraction(start + elapsed, r)
    total = Fraction(0)
    for x in range(r + 1):
        z = elapsed - (r - start) - x - 1
        if z < 0:
            continue
        total += _hold_paths(p, z, r) * (1 - p) * Fraction(x, r)
    z_top = elapsed - (r - start) - 1
    if z_top >= 0:
        total += _hold_paths(p, z_top, r) * p
    return total


def planning_penalty(
    field: PenaltyField,
    s: str,
    observed: Fraction | None,
    elapsed: int,
    visible: bool,
    horizon: int,
    fallback: Fraction | None = None,
    backend: str = "dp",
) -> Fraction:
    """Penalty estimate used by the receding-horizon planner.

    backend "dp" propagates the exact level distribution; "tableI" uses the
    closed form.  The two agree; both are kept so each can check the other.
    """
    if backend == "tableI":
        return simulated_expected_penalty(field, s, observed, elapsed, visible, horizon, fallback)
    if backend != "dp":
        raise PenaltyError(f"unknown penalty backend {backend!r}")
    if fallback is None:
        fallback = expected_penalty(field, s)
    if not visible or elapsed > horizon:
        return fallback
    return dp_expected_penalty(field, s, observed, elapsed)
