"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 specification unsatisfiable,
3 parse or validation error.  Machine-readable summary lines are prefixed
with `#`.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .buchi import to_buchi
from .gridworld import case_study, generate_grid, radial_probability_map
from .harness import (
    SimulationConfig,
    run_experiment,
    verify_satisfaction,
)
from .ltl import LtlSyntaxError, parse_ltl
from .model import ModelError, load_problem, save_model
from .penalty import PenaltyError
from .product import EmptyProductError, UnsatisfiableError, product_document
from .synthesis import synthesize

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_UNSAT = 2
EXIT_INVALID = 3


def _read_formula(args) -> str:
    if getattr(args, "formula", None):
        return args.formula
    if getattr(args, "formula_file", None):
        with open(args.formula_file, "r", encoding="utf-8") as fh:
            return fh.read().strip()
    raise SystemExit("one of --formula / --formula-file is required")


def _load(args):
    ts, fieldp = load_problem(args.model)
    if fieldp is None:
        raise ModelError("model file has no penalty section")
    return ts, fieldp


def _add_model_formula(parser):
    parser.add_argument("--model", required=True, help="model file (JSON)")
    parser.add_argument("--formula", help="LTL formula text")
    parser.add_argument("--formula-file", help="file containing the formula")


def _dump_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_translate_ltl(args) -> int:
    formula = parse_ltl(_read_formula(args))
    ba = to_buchi(formula)
    print(f"# states {ba.n_states}")
    print(f"# transitions {ba.transition_count}")
    print(f"# accepting {len(ba.accepting)}")
    if args.dump:
        payload = {
            "states": ba.n_states,
            "initial": ba.initial,
            "accepting": sorted(ba.accepting),
            "sink": ba.sink,
            "transitions": [
                [q, str(guard), dst]
                for q in ba.states
                for guard, dst in ba.transitions[q]
            ],
        }
        _dump_json(args.dump, payload)
    return EXIT_OK


def _reduced_document(synth):
    return {
        "states": [f"{u[0]}|{u[1]}" for u in synth.reduced.states],
        "edges": [
            {
                "from": f"{u[0]}|{u[1]}",
                "to": f"{v[0]}|{v[1]}",
                "weight": str(w),
                "run": [f"{x[0]}|{x[1]}" for x in synth.reduced.run_map[(u, v)]],
            }
            for (u, v), w in sorted(synth.reduced.weight.items())
        ],
    }


def cmd_synthesize(args) -> int:
    ts, fieldp = _load(args)
    synth = synthesize(ts, _read_formula(args), fieldp)
    print(f"# appc {synth.appc_value} {float(synth.appc_value):.9f}")
    print(f"# product_states {len(synth.product.states)}")
    print(f"# components {len(synth.components)}")
    print(f"# component_states {len(synth.component.states)}")
    print(f"# cycle_length {len(synth.cycle.cycle)}")
    cycle_text = " ".join(f"{x[0]}|{x[1]}" for x in synth.cycle.cycle)
    print(f"# cycle {cycle_text}")
    if args.dump_product:
        _dump_json(args.dump_product, product_document(synth.product))
    if args.dump_reduced:
        _dump_json(args.dump_reduced, _reduced_document(synth))
    if args.out_dir:
        import os

        os.makedirs(args.out_dir, exist_ok=True)
        _dump_json(
            os.path.join(args.out_dir, "synthesis.json"),
            {
                "appc": str(synth.appc_value),
                "appc_decimal": f"{float(synth.appc_value):.9f}",
                "cycle": [f"{x[0]}|{x[1]}" for x in synth.cycle.cycle],
                "surveillance_positions": list(synth.cycle.surveillance_positions),
                "component_states": len(synth.component.states),
                "automaton_states": synth.automaton.n_states,
            },
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    ts, fieldp = _load(args)
    settings = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            settings.update(json.load(fh))
    overrides = {
        "formula": _read_formula(args) if (args.formula or args.formula_file or "formula" not in settings) else None,
        "rounds": args.rounds,
        "seed": args.seed,
        "replications": args.replications,
        "strategy": args.strategy,
        "visibility": args.visibility,
        "horizon": args.horizon,
        "penalty_backend": args.penalty_backend,
        "strict": args.strict_prop1 or None,
        "weight_cap": args.weight_cap,
    }
    for key, value in overrides.items():
        if value is not None:
            settings[key] = value
    cfg = SimulationConfig(**settings)
    result = run_experiment(ts, fieldp, cfg, out_dir=args.out_dir)
    synth = result.synthesis
    print(f"# appc {synth.appc_value} {float(synth.appc_value):.9f}")
    violations = 0
    for rep in result.replications:
        final = rep.final_appc
        final_text = f"{float(final):.9f}" if final is not None else "-"
        print(
            f"# replication {rep.replication} final_appc {final_text} "
            f"accepting_visits {rep.accepting_visits} violations {len(rep.report.violations)}"
        )
        violations += len(rep.report.violations)
        for warning in rep.warnings:
            print(f"# warning {warning}")
    if args.out_dir:
        for name in sorted(result.artifacts):
            print(f"# artifact {name}")
    return EXIT_OK if violations == 0 else EXIT_INTERNAL


def cmd_verify(args) -> int:
    ts, fieldp = _load(args)
    synth = synthesize(ts, _read_formula(args), fieldp)
    states = []
    rounds = 0
    with open(args.trace, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            s, _, q = row["product_state"].partition("|")
            states.append((s, int(q)))
            rounds = max(rounds, int(row["round"]))
    completed = max(0, rounds - 1)
    report = verify_satisfaction(synth, states, completed)
    print(f"# trace_states {len(states)}")
    print(f"# rounds_completed {completed}")
    print(f"# violations {len(report.violations)}")
    for violation in report.violations:
        print(f"# violation {violation}")
    return EXIT_OK if report.ok else EXIT_INTERNAL


def cmd_generate_grid(args) -> int:
    if args.case_study:
        ts, fieldp, formula, params = case_study()
        save_model(args.out, ts, fieldp)
        print(f"# model {args.out}")
        print(f"# formula {formula}")
        print(f"# visibility {params['visibility']} horizon {params['horizon']}")
        return EXIT_OK

    def parse_cell(text):
        row, col = text.split(",")
        return int(row), int(col)

    stocks = [parse_cell(c) for c in args.stock]
    base = parse_cell(args.base)
    unsafe = {parse_cell(c) for c in args.unsafe}
    if args.uniform_prob is not None:
        value = Fraction(args.uniform_prob)
        prob = {
            (r, c): value for r in range(args.height) for c in range(args.width)
        }
    else:
        prob = radial_probability_map(args.width, args.height)
    ts, fieldp = generate_grid(
        args.width, args.height, stocks, base, unsafe, prob, rate=args.rate
    )
    save_model(args.out, ts, fieldp)
    print(f"# model {args.out}")
    print(f"# states {len(ts.states)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patrolsynth",
        description="Surveillance-strategy synthesis and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate-ltl", help="translate a formula to an automaton")
    p.add_argument("--formula")
    p.add_argument("--formula-file")
    p.add_argument("--dump", help="write the automaton as JSON")
    p.set_defaults(func=cmd_translate_ltl)

    p = sub.add_parser("synthesize", help="compute the optimal strategy")
    _add_model_formula(p)
    p.add_argument("--dump-product")
    p.add_argument("--dump-reduced")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="simulate a strategy, write CSV artifacts")
    _add_model_formula(p)
    p.add_argument("--config", help="JSON file with simulation settings")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--strategy", choices=("offline", "online"))
    p.add_argument("--visibility", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--penalty-backend", choices=("dp", "tableI"))
    p.add_argument("--weight-cap", type=int)
    p.add_argument("--strict-prop1", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="re-check a recorded trace")
    _add_model_formula(p)
    p.add_argument("--trace", required=True, help="trace CSV from simulate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate-grid", help="write a grid-world model file")
    p.add_argument("--width", type=int, default=9)
    p.add_argument("--height", type=int, default=5)
    p.add_argument("--stock", action="append", default=[], help="row,col (twice)")
    p.add_argument("--base", help="row,col")
    p.add_argument("--unsafe", action="append", default=[], help="row,col")
    p.add_argument("--rate", type=int, default=5)
    p.add_argument("--uniform-prob", help="use one probability everywhere")
    p.add_argument("--case-study", action="store_true", help="write the packaged scenario")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LtlSyntaxError, ModelError, PenaltyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EmptyProductError, UnsatisfiableError) as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
