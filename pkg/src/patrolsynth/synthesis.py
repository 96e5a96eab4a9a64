"""End-to-end strategy synthesis pipeline.

Formula -> automaton -> product -> accepting components -> per-component
reduction and minimum mean cycle -> choice of the best component -> mission
and cycle strategies.  The result carries everything the controllers and the
simulation harness need.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from . import ltl
from .buchi import BuchiAutomaton, to_buchi
from .model import TransitionSystem, min_weights
from .offline import CycleStrategy, MissionStrategy
from .penalty import PenaltyField, expected_penalty
from .product import (
    AcceptingComponent,
    Product,
    UnsatisfiableError,
    accepting_sccs,
    build_product,
)
from .reduction import OptimalCycle, ReducedSystem, optimal_cycle, reduce_ascc

log = logging.getLogger(__name__)


@dataclass
class SynthesisResult:
    ts: TransitionSystem
    fieldp: PenaltyField
    formula: ltl.Formula
    automaton: BuchiAutomaton
    product: Product
    components: list[AcceptingComponent]
    component: AcceptingComponent
    reduced: ReducedSystem
    cycle: OptimalCycle
    appc_value: Fraction
    mission: MissionStrategy
    cycle_strategy: CycleStrategy
    surveillance_prop: str
    expected_penalties: dict
    ts_distances: dict

    @property
    def appc_float(self) -> float:
        return float(self.appc_value)


def synthesize(
    ts: TransitionSystem,
    formula,
    fieldp: PenaltyField,
    surveillance_prop: str = "sur",
) -> SynthesisResult:
    """Compute the optimal-average strategy components for one problem.

    Raises EmptyProductError when no run can satisfy the formula at all and
    UnsatisfiableError when no reachable accepting component (with
    surveillance states) exists.
    """
    if isinstance(formula, str):
        formula = ltl.parse_ltl(formula)
    unknown = ltl.atoms(formula) - ts.ap
    if unknown:
        raise UnsatisfiableError(
            f"formula uses propositions absent from the model: {sorted(unknown)}"
        )
    automaton = to_buchi(formula, ap=ts.ap)
    product = build_product(ts, automaton)
    components = accepting_sccs(product, surveillance_prop)

    usable = [c for c in components if c.surveillance]
    for comp in components:
        if not comp.surveillance:
            log.warning(
                "accepting component with %d states has no surveillance states; skipped",
                len(comp.states),
            )
    if not usable:
        raise UnsatisfiableError(
            "no reachable accepting component contains a surveillance state"
        )

    pen = {x: expected_penalty(fieldp, x[0]) for x in product.states}
    best = None
    for comp in usable:
        reduced = reduce_ascc(comp, pen)
        cyc = optimal_cycle(comp, reduced)
        key = (cyc.appc_value, comp.min_state)
        if best is None or key < best[0]:
            best = (key, comp, reduced, cyc)
    _, component, reduced, cycle = best

    mission = MissionStrategy(product, component.accepting)
    cycle_strategy = CycleStrategy(product, cycle)
    return SynthesisResult(
        ts=ts,
        fieldp=fieldp,
        formula=formula,
        automaton=automaton,
        product=product,
        components=components,
        component=component,
        reduced=reduced,
        cycle=cycle,
        appc_value=cycle.appc_value,
        mission=mission,
        cycle_strategy=cycle_strategy,
        surveillance_prop=surveillance_prop,
        expected_penalties=pen,
        ts_distances=min_weights(ts),
    )
