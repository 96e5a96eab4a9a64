"""Receding-horizon control that locally improves the offline strategy.

At every step the controller enumerates a finite set of candidate runs from
the current state (always containing the run the offline strategy would
take), scores each by the expected average penalty per surveillance cycle the
round would reach if the run were executed next, and applies the first
transition of the best one.  Observed penalties of visible states are
simulated forward over the planning horizon; everything else falls back to
the static expectation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graphs import unweighted_distances
from .model import min_weights
from .offline import RoundController
from .penalty import PenaltyState, expected_penalty, planning_penalty
from .product import Product


class DistanceIndicator:
    """Marks transitions that lead strictly closer to a target set."""

    def __init__(self, product: Product, targets):
        self.targets = frozenset(targets)
        self.dist = product.distance_to(self.targets)

    def shortens(self, x, y) -> bool:
        dx = self.dist.get(x)
        dy = self.dist.get(y)
        if dy is None:
            return False
        return dx is None or dy < dx


def enumerate_shortening_runs(product: Product, start, indicator: DistanceIndicator, weight_cap: int):
    """All runs from `start` into the indicator's target set whose every
    transition shortens the distance, pruned at the weight cap.

    From a state already inside the target set this is the single zero-length
    run.  The cap must admit the minimum-weight route.
    """
    if start in indicator.targets:
        return [(start,)]
    base = indicator.dist.get(start)
    if base is None:
        raise ValueError(f"target set unreachable from {start!r}")
    if weight_cap < base:
        raise ValueError(f"weight cap {weight_cap} below minimum route weight {base}")
    runs = []
    stack = [((start,), 0)]
    while stack:
        path, weight = stack.pop()
        x = path[-1]
        for y in sorted(product.successors(x), reverse=True):
            if not indicator.shortens(x, y):
                continue
            w2 = weight + product.weight(x, y)
            if w2 > weight_cap:
                continue
            extended = path + (y,)
            if y in indicator.targets:
                runs.append(extended)
            else:
                stack.append((extended, w2))
    return sorted(runs)


def enumerate_segment_runs(
    product: Product,
    start,
    target,
    indicator: DistanceIndicator,
    length_allowance: int,
    weight_cap: int,
):
    """Runs from `start` ending at `target` that either shorten the distance
    at every transition or fit within the remaining length allowance.

    `length_allowance` bounds a candidate's state count.  A run may pass
    through the target and come back, as long as it ends there.
    """
    min_steps = unweighted_distances(
        {x: set(row) for x, row in product.pred.items()}, [target]
    )
    runs = set()
    stack = [((start,), 0, True)]
    while stack:
        path, weight, shortening = stack.pop()
        x = path[-1]
        for y in sorted(product.successors(x), reverse=True):
            w2 = weight + product.weight(x, y)
            if w2 > weight_cap:
                continue
            still = shortening and indicator.shortens(x, y)
            states = len(path) + 1
            extended = path + (y,)
            if y == target and (still or states <= length_allowance):
                runs.add(extended)
            within_length = states + min_steps.get(y, 10**9) <= length_allowance
            if still or within_length:
                stack.append((extended, w2, still))
    return sorted(runs)


@dataclass
class OnlineRoundState:
    """What the score function needs to know about the round so far."""

    history_penalty: Fraction
    history_cycles: int
    current: tuple


def evaluate_run(
    state: OnlineRoundState,
    run,
    product: Product,
    fieldp,
    penalties: PenaltyState,
    visible: frozenset,
    horizon: int,
    backend: str = "dp",
    cache: dict | None = None,
    surveillance_prop: str = "sur",
) -> Fraction:
    """Expected average penalty per surveillance cycle for the round if `run`
    were executed next from the current state."""
    total = state.history_penalty
    cycles = state.history_cycles
    elapsed = 0
    for prev, nxt in zip(run, run[1:]):
        elapsed += product.weight(prev, nxt)
        s = nxt[0]
        key = (s, elapsed)
        value = cache.get(key) if cache is not None else None
        if value is None:
            seen = s in visible
            value = planning_penalty(
                fieldp,
                s,
                penalties.value(s) if seen else None,
                elapsed,
                seen,
                horizon,
                fallback=expected_penalty(fieldp, s),
                backend=backend,
            )
            if cache is not None:
                cache[key] = value
        total += value
        if surveillance_prop in product.label(nxt):
            cycles += 1
    if surveillance_prop not in product.label(run[-1]):
        cycles += 1
    return total / max(cycles, 1)


@dataclass
class OnlineConfig:
    visibility: int
    horizon: int
    weight_cap: int | None = None  # default: max(route weight, 2 * horizon)
    segment_split_factor: int = 3
    backend: str = "dp"


class OnlineController(RoundController):
    """Round controller whose every move is chosen by candidate-run scoring.

    Phase 1 considers all distance-shortening runs to the accepting set.
    Phase 2 first approaches the optimal cycle the same way, then repeatedly
    optimizes the stretch to the next surveillance state on the cycle (split
    at an intermediate state when the stretch is long), allowing detours that
    keep the executed stretch no longer than following the cycle itself.
    """

    def __init__(
        self,
        *args,
        online_config: OnlineConfig,
        ts_distances: dict | None = None,
        **kwargs,
    ):
        super().__init__(*args, **kwargs)
        self.online_config = online_config
        self.penalties: PenaltyState | None = None
        self.ts_distances = (
            ts_distances if ts_distances is not None else min_weights(self.product.ts)
        )
        self.mission_indicator = DistanceIndicator(self.product, self.mission.targets)
        self.cycle_indicator = DistanceIndicator(
            self.product, self.cycle_strategy.member
        )
        self._target_indicators: dict = {}
        self._visible_cache: dict = {}
        self.anchor_position = None
        self.target_position = None
        self.executed_length = 0

    def observe(self, penalties: PenaltyState):
        """Expose the current penalty snapshot before the next decision."""
        self.penalties = penalties

    def _visible(self, s: str) -> frozenset:
        cached = self._visible_cache.get(s)
        if cached is None:
            v = self.online_config.visibility
            dist = self.ts_distances
            cached = frozenset(
                t
                for t in self.product.ts.states
                if (s, t) in dist and dist[(s, t)] <= v
            )
            self._visible_cache[s] = cached
        return cached

    def _indicator_for(self, target) -> DistanceIndicator:
        ind = self._target_indicators.get(target)
        if ind is None:
            ind = DistanceIndicator(self.product, [target])
            self._target_indicators[target] = ind
        return ind

    # -- candidate selection ------------------------------------------------

    def choose_next(self):
        if self.phase == 1:
            candidates = self._mission_candidates()
        elif self.anchor_position is None:
            candidates = self._approach_candidates()
        else:
            candidates = self._segment_candidates()
        self.last_candidates = len(candidates)
        return self._argmin(candidates)[1]

    def _cap(self, base: int) -> int:
        override = self.online_config.weight_cap
        if override is not None:
            return max(override, base)
        return max(base, 2 * self.online_config.horizon)

    def _mission_candidates(self):
        dist = self.mission_indicator.dist[self.current]
        return enumerate_shortening_runs(
            self.product, self.current, self.mission_indicator, self._cap(dist)
        )

    def _approach_candidates(self):
        dist = self.cycle_indicator.dist[self.current]
        return enumerate_shortening_runs(
            self.product, self.current, self.cycle_indicator, self._cap(dist)
        )

    def _segment_candidates(self):
        target = self.cycle_strategy.state_at(self.target_position)
        indicator = self._indicator_for(target)
        allowance = self._segment_budget() - self.executed_length
        base = indicator.dist.get(self.current, 0)
        runs = enumerate_segment_runs(
            self.product,
            self.current,
            target,
            indicator,
            allowance,
            self._cap(base),
        )
        baseline = self.cycle_strategy.induced_run(
            self.current, self.cycle_position, target
        )
        if baseline not in runs:
            runs.append(baseline)
        return runs

    def _segment_budget(self) -> int:
        length = len(self.cycle_strategy.states)
        span = (self.target_position - self.anchor_position) % length
        if span == 0:
            span = length  # target only reached by wrapping the whole cycle
        return span + 2

    def _argmin(self, candidates):
        if len(candidates) == 1:
            return candidates[0]
        state = OnlineRoundState(self.round_penalty, self.round_cycles, self.current)
        visible = self._visible(self.current[0])
        cache: dict = {}
        best = None
        for run in candidates:
            score = evaluate_run(
                state,
                run,
                self.product,
                self.fieldp,
                self.penalties,
                visible,
                self.online_config.horizon,
                backend=self.online_config.backend,
                cache=cache,
                surveillance_prop=self.surveillance_prop,
            )
            key = (score, run)
            if best is None or key < best:
                best = key
        return best[1]

    # -- phase hooks ----------------------------------------------------------

    def _on_phase2_entry(self):
        self.anchor_position = None
        self.target_position = None
        self.executed_length = 0
        if self.cycle_position is not None:
            self._anchor(self.cycle_position)

    def _anchor(self, position: int):
        self.anchor_position = position
        self.cycle_position = position
        self.executed_length = 1
        self.target_position = self._next_target(position)

    def _next_target(self, anchor: int) -> int:
        """Next surveillance position along the cycle, or an intermediate
        split state when the stretch outweighs split factor times horizon."""
        cyc = self.cycle_strategy
        length = len(cyc.states)
        sur = set(cyc.cycle.surveillance_positions)
        pos = anchor
        cumulative = 0
        walked = []
        for _ in range(length):
            nxt = cyc.position_after(pos)
            cumulative += self.product.weight(cyc.state_at(pos), cyc.state_at(nxt))
            walked.append((nxt, cumulative))
            pos = nxt
            if nxt in sur:
                break
        target, segment_weight = walked[-1]
        limit = self.online_config.segment_split_factor * self.online_config.horizon
        if segment_weight > limit and len(walked) > 1:
            half = Fraction(segment_weight, 2)
            split = min(walked[:-1], key=lambda item: (abs(item[1] - half), item[0]))
            return split[0]
        return target

    def _after_arrival(self, previous, state):
        if self.phase != 2:
            self.cycle_position = None
            return
        # keep the cycle position when the move followed the cycle, otherwise
        # re-derive it from state identity (first matching position)
        old = self.cycle_position
        new_position = None
        if old is not None:
            follow = self.cycle_strategy.position_after(old)
            if self.cycle_strategy.state_at(follow) == state:
                new_position = follow
        if new_position is None and state in self.cycle_strategy.member:
            new_position = self.cycle_strategy.entry_position(state)
        self.cycle_position = new_position

        if self.anchor_position is None:
            if state in self.cycle_strategy.member:
                self._anchor(self.cycle_position)
            return
        self.executed_length += 1
        if state == self.cycle_strategy.state_at(self.target_position):
            self._anchor(self.target_position)
