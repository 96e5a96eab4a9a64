"""Round-based offline control: reach an accepting state, then track the
optimal cycle until the round's running average is good enough.

Each round has two phases.  The mission phase walks a minimum-weight route to
the accepting set of the chosen component; the average phase follows the
optimal cycle and ends once a surveillance cycle completes with the round's
average penalty per surveillance cycle at or below the optimum plus 2/i (for
round i), or once enough cycles guarantee that bound with high confidence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .penalty import PenaltyField, level_distribution
from .product import Product, UnsatisfiableError
from .reduction import OptimalCycle


class MissionStrategy:
    """Memoryless steps that strictly shrink the distance to the accepting set."""

    def __init__(self, product: Product, accepting_targets):
        self.targets = frozenset(accepting_targets)
        self.dist = product.distance_to(self.targets)
        nxt = {}
        for x in product.states:
            if x not in self.dist:
                continue
            if x in self.targets:
                # next visit of the target set, at least one transition away
                best = None
                for y in product.successors(x):
                    dy = self.dist.get(y)
                    if dy is None:
                        continue
                    cand = (product.weight(x, y) + dy, y)
                    if best is None or cand < best:
                        best = cand
                if best is not None:
                    nxt[x] = best[1]
                continue
            dx = self.dist[x]
            for y in product.successors(x):
                dy = self.dist.get(y)
                if dy is not None and dx - product.weight(x, y) == dy:
                    nxt[x] = y
                    break
        self._next = nxt

    def covers(self, x) -> bool:
        return x in self._next

    def next_state(self, x):
        return self._next[x]


class CycleStrategy:
    """Track the optimal cycle: approach it on minimum-weight routes, then
    step position by position (finite memory when states repeat)."""

    def __init__(self, product: Product, cycle: OptimalCycle):
        self.cycle = cycle
        self.states = tuple(cycle.cycle)
        self.member = frozenset(self.states)
        self.dist = product.distance_to(self.member)
        nxt = {}
        for x in product.states:
            if x in self.member or x not in self.dist:
                continue
            dx = self.dist[x]
            for y in product.successors(x):
                dy = self.dist.get(y)
                if dy is not None and dx - product.weight(x, y) == dy:
                    nxt[x] = y
                    break
        self._approach = nxt

    def entry_position(self, x) -> int:
        return self.states.index(x)

    def position_after(self, position: int) -> int:
        return (position + 1) % len(self.states)

    def state_at(self, position: int):
        return self.states[position]

    def covers(self, x) -> bool:
        return x in self.member or x in self._approach

    def approach_step(self, x):
        return self._approach[x]

    def induced_run(self, x, position, stop):
        """The run this strategy produces from `x` until `stop` is reached.

        `position` is the cycle position when `x` lies on the cycle, else
        None.  Returns a tuple of product states ending at `stop`.
        """
        run = [x]
        cur = x
        guard = 0
        limit = len(self._approach) + 2 * len(self.states) + 2
        while True:
            if position is None:
                if cur in self.member:
                    position = self.entry_position(cur)
                    continue
                cur = self._approach[cur]
            else:
                position = self.position_after(position)
                cur = self.state_at(position)
            run.append(cur)
            if cur == stop:
                return tuple(run)
            guard += 1
            if guard > limit:
                raise RuntimeError("cycle strategy failed to reach its target")


class EstimateCapExceeded(Exception):
    """The confidence search hit its cap; carries the best cycle count seen."""

    def __init__(self, best, fraction):
        super().__init__(
            f"confidence not reached within {best} surveillance cycles "
            f"(best fraction {fraction:.3f})"
        )
        self.best = best
        self.fraction = fraction


def estimate_required_cycles(
    product: Product,
    cycle: OptimalCycle,
    fieldp: PenaltyField,
    epsilon: Fraction,
    start,
    samples: int,
    surveillance_prop: str = "sur",
    cap: int = 10_000,
    seed: int = 0,
    cycle_strategy: CycleStrategy | None = None,
) -> int:
    """Surveillance cycles after which the average stays near the optimum.

    Simulates the cycle strategy from `start` with fresh uniformly drawn
    penalties, doubling the cycle count until the empirical fraction of runs
    whose average penalty per surveillance cycle is at most optimum + epsilon
    reaches 1 - epsilon.  Monte Carlo stands in for the exact (exponential)
    trajectory enumeration, so the answer carries sampling confidence.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if epsilon >= 1:
        return 1
    strategy = cycle_strategy or CycleStrategy(product, cycle)
    threshold = cycle.appc_value + epsilon
    rng = random.Random(seed)
    rate = fieldp.rate

    sample_cache: dict = {}

    def cumulative(s, last_level, elapsed):
        key = (fieldp.prob[s], last_level, elapsed)
        table = sample_cache.get(key)
        if table is None:
            if last_level is None:
                dist = level_distribution(fieldp, s, None, elapsed)
            else:
                dist = level_distribution(fieldp, s, Fraction(last_level, rate), elapsed)
            acc = 0.0
            table = []
            for lvl, mass in enumerate(dist):
                acc += float(mass)
                table.append((acc, lvl))
            table[-1] = (1.0, table[-1][1])
            sample_cache[key] = table
        return table

    def sample_average(cycles_wanted: int) -> Fraction:
        seen: dict = {}
        clock = 0
        total_levels = 0
        visits = 0
        cur = start
        position = strategy.entry_position(cur) if cur in strategy.member else None
        completed = 0

        def visit(s):
            nonlocal total_levels, visits
            if s in seen:
                last_clock, last_level = seen[s]
                table = cumulative(s, last_level, clock - last_clock)
            else:
                table = cumulative(s, None, clock)
            u = rng.random()
            level = next(lvl for acc, lvl in table if u <= acc)
            seen[s] = (clock, level)
            total_levels += level
            visits += 1

        visit(cur)
        while completed < cycles_wanted:
            if position is None:
                nxt = strategy.approach_step(cur)
            else:
                position = strategy.position_after(position)
                nxt = strategy.state_at(position)
            clock += product.weight(cur, nxt)
            cur = nxt
            if position is None and cur in strategy.member:
                position = strategy.entry_position(cur)
            visit(cur)
            if surveillance_prop in product.label(cur):
                completed += 1
        return Fraction(total_levels, rate) / cycles_wanted

    cycles = 1
    best_fraction = 0.0
    while cycles <= cap:
        good = sum(1 for _ in range(samples) if sample_average(cycles) <= threshold)
        fraction = good / samples
        if fraction >= 1 - epsilon:
            return cycles
        best_fraction = max(best_fraction, fraction)
        cycles *= 2
    raise EstimateCapExceeded(min(cycles // 2, cap), best_fraction)


@dataclass
class RoundStats:
    """One completed round of a controller run."""

    round_index: int
    phase1_steps: int
    phase2_cycles: int
    round_penalty: Fraction
    round_appc: Fraction
    cumulative_appc: Fraction
    accepting_visits: int
    exit_reason: str


@dataclass
class ControllerConfig:
    strict: bool = False
    estimate_samples: int = 64
    estimate_cap: int = 10_000
    seed: int = 0


class RoundController:
    """Shared two-phase round bookkeeping for both controllers.

    Subclasses provide the per-step move choice.  Penalties are booked once
    per visit: the starting occupancy of round 1 is charged to round 1, and
    each later round starts at the state where its predecessor ended, whose
    penalty was already booked there.
    """

    def __init__(
        self,
        product: Product,
        component,
        mission: MissionStrategy,
        cycle_strategy: CycleStrategy,
        fieldp: PenaltyField,
        appc_value: Fraction,
        surveillance_prop: str,
        config: ControllerConfig | None = None,
    ):
        self.product = product
        self.component = component
        self.mission = mission
        self.cycle_strategy = cycle_strategy
        self.fieldp = fieldp
        self.appc_value = Fraction(appc_value)
        self.surveillance_prop = surveillance_prop
        self.config = config or ControllerConfig()

        self.current = None
        self.time = 0
        self.round_index = 1
        self.phase = 1
        self.phase1_steps = 0
        self.round_penalty = Fraction(0)
        self.round_cycles = 0
        self.phase2_cycles = 0
        self.required_cycles = None
        self.cycle_position = None

        self.total_penalty = Fraction(0)
        self.total_cycles = 0
        self.accepting_visits = 0
        self.rounds_completed = 0
        self.stats: list[RoundStats] = []
        self.warnings: list[str] = []
        self.trace: list = []
        self.last_candidates = 0

        if not mission.covers(product.initial):
            raise UnsatisfiableError(
                "the accepting set is unreachable from the initial state"
            )

    # -- simulation interface -------------------------------------------

    def start(self, state, penalty: Fraction):
        self.current = state
        self.total_penalty += penalty
        self.round_penalty += penalty
        if state in self.product.accepting:
            self.accepting_visits += 1
        self._enter_phase1()
        self._record(penalty)

    def record_arrival(self, state, penalty: Fraction):
        self.time += self.product.weight(self.current, state)
        previous = self.current
        self.current = state
        self.total_penalty += penalty
        self.round_penalty += penalty
        if self.phase == 1:
            self.phase1_steps += 1
        if state in self.product.accepting:
            self.accepting_visits += 1
        surveillance = self._is_surveillance(state)
        if surveillance:
            self.total_cycles += 1
            self.round_cycles += 1
            if self.phase == 2:
                self.phase2_cycles += 1
        self._after_arrival(previous, state)
        if self.phase == 1:
            if state in self.mission.targets:
                self._enter_phase2()
        elif surveillance:
            self._evaluate_exit()
        self._record(penalty)

    def choose_next(self):
        raise NotImplementedError

    # -- phase machinery --------------------------------------------------

    def _is_surveillance(self, state) -> bool:
        return self.surveillance_prop in self.product.label(state)

    def _enter_phase1(self):
        self.phase = 1
        if self.current in self.mission.targets:
            self._enter_phase2()

    def _enter_phase2(self):
        self.phase = 2
        if self.current in self.cycle_strategy.member:
            self.cycle_position = self.cycle_strategy.entry_position(self.current)
        else:
            self.cycle_position = None
        self._on_phase2_entry()

    def _threshold(self) -> Fraction:
        return self.appc_value + Fraction(2, self.round_index)

    def _evaluate_exit(self):
        average = self.round_penalty / self.round_cycles
        threshold = self._threshold()
        trigger = max(1, self.round_index * self.phase1_steps)
        if not self.config.strict and average <= threshold:
            self._end_round("threshold")
            return
        if self.required_cycles is None and self.phase2_cycles >= trigger:
            if self.config.strict or average > threshold:
                self._estimate_required()
        if self.required_cycles is not None and self.phase2_cycles >= max(
            self.required_cycles, self.round_index * self.phase1_steps
        ):
            self._end_round("cycle-bound")

    def _estimate_required(self):
        try:
            self.required_cycles = estimate_required_cycles(
                self.product,
                self.cycle_strategy.cycle,
                self.fieldp,
                Fraction(1, self.round_index),
                self.current,
                self.config.estimate_samples,
                surveillance_prop=self.surveillance_prop,
                cap=self.config.estimate_cap,
                seed=self.config.seed * 2654435761 + self.round_index,
                cycle_strategy=self.cycle_strategy,
            )
        except EstimateCapExceeded as exc:
            self.warnings.append(
                f"round {self.round_index}: {exc}; continuing with {exc.best}"
            )
            self.required_cycles = exc.best

    def _end_round(self, reason: str):
        self.rounds_completed += 1
        self.stats.append(
            RoundStats(
                self.round_index,
                self.phase1_steps,
                self.phase2_cycles,
                self.round_penalty,
                self.round_penalty / self.round_cycles,
                self.total_penalty / self.total_cycles,
                self.accepting_visits,
                reason,
            )
        )
        self.round_index += 1
        self.phase1_steps = 0
        self.round_penalty = Fraction(0)
        self.round_cycles = 0
        self.phase2_cycles = 0
        self.required_cycles = None
        self._enter_phase1()

    # -- hooks -------------------------------------------------------------

    def _after_arrival(self, previous, state):
        pass

    def _on_phase2_entry(self):
        pass

    def _record(self, penalty: Fraction):
        self.trace.append(
            (
                self.time,
                self.round_index,
                self.phase,
                self.current,
                penalty,
                self.phase2_cycles,
                self.last_candidates,
            )
        )


class OfflineController(RoundController):
    """Plays the mission strategy, then the cycle strategy, round by round."""

    def choose_next(self):
        self.last_candidates = 0
        if self.phase == 1:
            return self.mission.next_state(self.current)
        if self.cycle_position is None:
            if self.current in self.cycle_strategy.member:
                self.cycle_position = self.cycle_strategy.entry_position(self.current)
            else:
                return self.cycle_strategy.approach_step(self.current)
        self._pending_position = self.cycle_strategy.position_after(self.cycle_position)
        return self.cycle_strategy.state_at(self._pending_position)

    def _after_arrival(self, previous, state):
        pending = getattr(self, "_pending_position", None)
        if pending is not None and self.cycle_strategy.state_at(pending) == state:
            self.cycle_position = pending
        elif state in self.cycle_strategy.member and self.cycle_position is None:
            self.cycle_position = self.cycle_strategy.entry_position(state)
        self._pending_position = None
