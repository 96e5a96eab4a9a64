"""Seeded end-to-end simulation of strategies against the penalty process.

Penalties at all states advance once per time unit, including while a
transition is in flight; a penalty is incurred exactly when a state is
entered (and once for the initial state at time zero).  Identical
configuration and seed give byte-identical CSV artifacts; replication k uses
seed XOR k for its penalty process and an independent derived stream for any
confidence estimation inside the controller.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .offline import ControllerConfig, OfflineController, RoundStats
from .online import OnlineConfig, OnlineController
from .penalty import init_penalties, step_penalties
from .synthesis import SynthesisResult, synthesize

_STEP_LIMIT = 1_000_000


@dataclass
class SimulationConfig:
    formula: str
    rounds: int
    seed: int
    replications: int = 1
    strategy: str = "offline"
    visibility: int = 6
    horizon: int = 9
    penalty_backend: str = "dp"
    strict: bool = False
    weight_cap: int | None = None
    segment_split_factor: int = 3
    estimate_samples: int = 64
    estimate_cap: int = 10_000
    surveillance_prop: str = "sur"

    def __post_init__(self):
        if self.rounds < 0 or self.replications < 1:
            raise ValueError("rounds must be >= 0 and replications >= 1")
        if self.strategy not in ("offline", "online"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.visibility < 0 or self.horizon < 0:
            raise ValueError("visibility and horizon must be >= 0")


@dataclass
class VerificationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class ReplicationResult:
    replication: int
    rounds: list[RoundStats]
    trace: list
    warnings: list[str]
    report: VerificationReport

    @property
    def final_appc(self) -> Fraction | None:
        return self.rounds[-1].cumulative_appc if self.rounds else None

    @property
    def accepting_visits(self) -> int:
        return self.rounds[-1].accepting_visits if self.rounds else 0


@dataclass
class ExperimentResult:
    config: SimulationConfig
    synthesis: SynthesisResult
    replications: list[ReplicationResult]
    artifacts: dict


def _make_controller(synth: SynthesisResult, cfg: SimulationConfig, seed: int):
    base = ControllerConfig(
        strict=cfg.strict,
        estimate_samples=cfg.estimate_samples,
        estimate_cap=cfg.estimate_cap,
        seed=seed,
    )
    args = (
        synth.product,
        synth.component,
        synth.mission,
        synth.cycle_strategy,
        synth.fieldp,
        synth.appc_value,
        synth.surveillance_prop,
        base,
    )
    if cfg.strategy == "offline":
        return OfflineController(*args)
    online = OnlineConfig(
        visibility=cfg.visibility,
        horizon=cfg.horizon,
        weight_cap=cfg.weight_cap,
        segment_split_factor=cfg.segment_split_factor,
        backend=cfg.penalty_backend,
    )
    return OnlineController(
        *args, online_config=online, ts_distances=synth.ts_distances
    )


def simulate_replication(
    synth: SynthesisResult, cfg: SimulationConfig, replication: int
) -> ReplicationResult:
    seed = cfg.seed ^ replication
    penalties = init_penalties(synth.fieldp, seed)
    controller = _make_controller(synth, cfg, seed)
    state = synth.product.initial
    if isinstance(controller, OnlineController):
        controller.observe(penalties)
    controller.start(state, penalties.value(state[0]))
    steps = 0
    while controller.rounds_completed < cfg.rounds:
        if isinstance(controller, OnlineController):
            controller.observe(penalties)
        nxt = controller.choose_next()
        for _ in range(synth.product.weight(state, nxt)):
            penalties = step_penalties(synth.fieldp, penalties)
        controller.record_arrival(nxt, penalties.value(nxt[0]))
        state = nxt
        steps += 1
        if steps > _STEP_LIMIT:
            raise RuntimeError("simulation exceeded the step limit")
    trace_states = [row[3] for row in controller.trace]
    report = verify_satisfaction(synth, trace_states, controller.rounds_completed)
    return ReplicationResult(
        replication,
        controller.stats,
        controller.trace,
        controller.warnings,
        report,
    )


def verify_satisfaction(
    synth: SynthesisResult, trace_states, rounds_completed: int
) -> VerificationReport:
    """Check an executed product-state trace against the specification.

    Accepting visits must cover the completed rounds, every visited state
    must keep the accepting set reachable, and the trace must stay within the
    pruned product (so a successor is always enabled and no safety conjunct
    was violated).
    """
    report = VerificationReport()
    if not trace_states:
        return report
    product = synth.product
    accepting_visits = sum(1 for x in trace_states if x in product.accepting)
    if accepting_visits < rounds_completed:
        report.violations.append(
            f"accepting visits {accepting_visits} < completed rounds {rounds_completed}"
        )
    for x in trace_states:
        if x not in product.succ or not product.succ[x]:
            report.violations.append(f"trace enters state {x!r} outside the viable product")
            break
    for x in trace_states:
        if x not in synth.mission.dist:
            report.violations.append(
                f"trace enters state {x!r} from which the accepting set is unreachable"
            )
            break
    for a, b in zip(trace_states, trace_states[1:]):
        if not product.has_transition(a, b):
            report.violations.append(f"trace step ({a!r} -> {b!r}) is not a transition")
            break
    return report


def _format_fraction(x: Fraction | None) -> str:
    if x is None:
        return ""
    return f"{float(x):.9f}"


def _state_key(x) -> str:
    return f"{x[0]}|{x[1]}"


def rounds_csv(results: list[ReplicationResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["replication", "round", "k_i", "cycles", "round_appc", "cumulative_appc"]
    )
    for rep in results:
        for st in rep.rounds:
            writer.writerow(
                [
                    rep.replication,
                    st.round_index,
                    st.phase1_steps,
                    st.phase2_cycles,
                    _format_fraction(st.round_appc),
                    _format_fraction(st.cumulative_appc),
                ]
            )
    return buf.getvalue()


def summary_csv(results: list[ReplicationResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["replication", "final_appc", "accepting_visits", "violations"])
    for rep in results:
        writer.writerow(
            [
                rep.replication,
                _format_fraction(rep.final_appc),
                rep.accepting_visits,
                len(rep.report.violations),
            ]
        )
    return buf.getvalue()


def trace_csv(result: ReplicationResult, online: bool) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["time", "round", "phase", "product_state", "ts_state", "penalty", "cycles_done"]
    if online:
        header.append("candidates_evaluated")
    writer.writerow(header)
    for time, rnd, phase, state, penalty, cycles, candidates in result.trace:
        row = [
            time,
            rnd,
            phase,
            _state_key(state),
            state[0],
            _format_fraction(penalty),
            cycles,
        ]
        if online:
            row.append(candidates)
        writer.writerow(row)
    return buf.getvalue()


def run_experiment(
    ts,
    fieldp,
    cfg: SimulationConfig,
    out_dir: str | None = None,
    synth: SynthesisResult | None = None,
) -> ExperimentResult:
    """Synthesize (unless given), simulate every replication, emit CSVs."""
    if synth is None:
        synth = synthesize(ts, cfg.formula, fieldp, cfg.surveillance_prop)
    results = [
        simulate_replication(synth, cfg, rep) for rep in range(cfg.replications)
    ]
    artifacts = {
        f"{cfg.strategy}_rounds.csv": rounds_csv(results),
        f"{cfg.strategy}_summary.csv": summary_csv(results),
    }
    for rep in results:
        artifacts[f"{cfg.strategy}_trace_{rep.replication:03d}.csv"] = trace_csv(
            rep, cfg.strategy == "online"
        )
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, content in artifacts.items():
            with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
    return ExperimentResult(cfg, synth, results, artifacts)


def paired_comparison(ts, fieldp, cfg: SimulationConfig, out_dir=None):
    """Run offline and online with the same seeds; returns both experiments."""
    offline_cfg = replace(cfg, strategy="offline")
    online_cfg = replace(cfg, strategy="online")
    synth = synthesize(ts, cfg.formula, fieldp, cfg.surveillance_prop)
    off = run_experiment(ts, fieldp, offline_cfg, out_dir=out_dir, synth=synth)
    on = run_experiment(ts, fieldp, online_cfg, out_dir=out_dir, synth=synth)
    return off, on
