"""Weighted deterministic transition systems, runs, and the on-disk model format.

States carry string ids; every ordering used internally is the lexicographic
order of those ids, so identical inputs always produce identical outputs.
Unreachable pairs are simply absent from distance maps; no sentinel integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .penalty import PenaltyField


class ModelError(Exception):
    """Base class for model loading and validation failures."""


class ModelFormatError(ModelError):
    """The document is not syntactically valid (carries line/column when known)."""


class ModelValidationError(ModelError):
    """The document parses but violates a structural invariant."""


class TransitionSystem:
    """A finite weighted transition system with labeled states.

    Every state must have at least one outgoing transition, all weights are
    integers >= 1 (time units), and the initial state must exist. Instances
    are immutable after construction and safe to share between threads.
    """

    def __init__(self, states, transitions, labels, initial, ap=None):
        self.states: tuple[str, ...] = tuple(sorted(set(states)))
        if not self.states:
            raise ModelValidationError("transition system has no states")
        state_set = set(self.states)

        succ: dict[str, dict[str, int]] = {s: {} for s in self.states}
        for src, dst, weight in transitions:
            if src not in state_set:
                raise ModelValidationError(f"transition source {src!r} is not a declared state")
            if dst not in state_set:
                raise ModelValidationError(f"transition target {dst!r} is not a declared state")
            if not isinstance(weight, int) or isinstance(weight, bool) or weight < 1:
                raise ModelValidationError(
                    f"transition ({src!r}, {dst!r}) has weight {weight!r}; weights must be integers >= 1"
                )
            succ[src][dst] = weight
        self._succ = {s: dict(sorted(d.items())) for s, d in succ.items()}

        for s in self.states:
            if not self._succ[s]:
                raise ModelValidationError(f"state {s} has no successor")

        label_map = {s: frozenset() for s in self.states}
        for s, props in dict(labels).items():
            if s not in state_set:
                raise ModelValidationError(f"label refers to unknown state {s!r}")
            label_map[s] = frozenset(props)
        self._labels = label_map

        used = frozenset(p for props in label_map.values() for p in props)
        self.ap: frozenset[str] = frozenset(ap) if ap is not None else used
        extra = used - self.ap
        if extra:
            raise ModelValidationError(
                f"labels use propositions not in the declared set: {sorted(extra)}"
            )

        if initial not in state_set:
            raise ModelValidationError(f"initial state {initial!r} is not a declared state")
        self.initial: str = initial

    def successors(self, s: str) -> tuple[str, ...]:
        return tuple(self._succ[s])

    def weight(self, src: str, dst: str) -> int:
        try:
            return self._succ[src][dst]
        except KeyError:
            raise ModelValidationError(f"({src!r}, {dst!r}) is not a transition") from None

    def has_transition(self, src: str, dst: str) -> bool:
        return dst in self._succ.get(src, ())

    def label(self, s: str) -> frozenset[str]:
        return self._labels[s]

    def transitions(self):
        """Yield (src, dst, weight) triples in lexicographic order."""
        for s, row in self._succ.items():
            for t, w in row.items():
                yield s, t, w

    @property
    def transition_count(self) -> int:
        return sum(len(row) for row in self._succ.values())

    def with_labels(self, labels: Mapping[str, Iterable[str]], ap=None) -> "TransitionSystem":
        """Copy of this system with a replacement label map."""
        triples = list(self.transitions())
        return TransitionSystem(self.states, triples, labels, self.initial, ap=ap)

    def __repr__(self):
        return (
            f"TransitionSystem({len(self.states)} states, "
            f"{self.transition_count} transitions, initial={self.initial!r})"
        )


def validate_run(ts: TransitionSystem, run) -> None:
    """Raise unless `run` is a non-empty sequence of consecutive transitions."""
    if not run:
        raise ModelValidationError("a finite run must contain at least one state")
    for s in run:
        if s not in ts._succ:
            raise ModelValidationError(f"run visits unknown state {s!r}")
    for a, b in zip(run, run[1:]):
        if not ts.has_transition(a, b):
            raise ModelValidationError(f"({a!r}, {b!r}) is not a transition")


def run_weight(ts: TransitionSystem, run) -> int:
    """Total weight of a finite run; 0 for a single-state run."""
    validate_run(ts, run)
    return sum(ts.weight(a, b) for a, b in zip(run, run[1:]))


def min_weights(ts: TransitionSystem) -> dict[tuple[str, str], int]:
    """All-pairs minimum run weights (Floyd-Warshall).

    The self-distance is 0 for every state.  Unreachable pairs are absent
    from the returned map.
    """
    dist: dict[tuple[str, str], int] = {}
    for s, t, w in ts.transitions():
        if s != t:
            key = (s, t)
            if key not in dist or w < dist[key]:
                dist[key] = w
    for s in ts.states:
        dist[(s, s)] = 0
    for k in ts.states:
        for i in ts.states:
            d_ik = dist.get((i, k))
            if d_ik is None:
                continue
            for j in ts.states:
                d_kj = dist.get((k, j))
                if d_kj is None:
                    continue
                cand = d_ik + d_kj
                cur = dist.get((i, j))
                if cur is None or cand < cur:
                    dist[(i, j)] = cand
    return dist


def single_source_min_weights(ts: TransitionSystem, source: str) -> dict[str, int]:
    """Minimum run weight from `source` to every reachable state (Dijkstra)."""
    import heapq

    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, s = heapq.heappop(heap)
        if d > dist.get(s, d):
            continue
        for t in ts.successors(s):
            nd = d + ts.weight(s, t)
            if t not in dist or nd < dist[t]:
                dist[t] = nd
                heapq.heappush(heap, (nd, t))
    return dist


def visible_set(ts: TransitionSystem, s: str, visibility: int, dist=None) -> frozenset[str]:
    """States within weighted distance `visibility` of `s`; always contains `s`."""
    if dist is None:
        dist = single_source_min_weights(ts, s)
        return frozenset(t for t, d in dist.items() if d <= visibility)
    return frozenset(t for t in ts.states if dist.get((s, t), None) is not None and dist[(s, t)] <= visibility)


@dataclass(frozen=True)
class SurveillanceSpec:
    """The surveillance proposition and the set of states carrying it."""

    prop: str
    states: frozenset[str]

    @classmethod
    def of(cls, ts: TransitionSystem, prop: str) -> "SurveillanceSpec":
        return cls(prop, frozenset(s for s in ts.states if prop in ts.label(s)))


def count_surveillance_cycles(spec: SurveillanceSpec, run) -> int:
    """Number of surveillance cycles charged to a finite run.

    Visits to surveillance states strictly after the first position each
    complete one cycle; a run that does not end in a surveillance state is
    charged one extra (its cycle in progress).
    """
    complete = sum(1 for s in run[1:] if s in spec.states)
    if run[-1] in spec.states:
        return complete
    return complete + 1


def universal_surveillance(ts: TransitionSystem, prop: str = "sur") -> TransitionSystem:
    """Copy of `ts` with the surveillance proposition added to every state.

    Under the result, one surveillance cycle elapses per stage, so the
    per-cycle average objective becomes a per-stage average.  Idempotent.
    """
    labels = {s: ts.label(s) | {prop} for s in ts.states}
    return ts.with_labels(labels, ap=ts.ap | {prop})


# --- on-disk format -------------------------------------------------------
#
# A model file is a JSON document with the top-level keys
#   format_version : 1
#   states         : list of state ids
#   ap             : list of proposition names
#   labels         : {state: [prop, ...]}   (states may be omitted)
#   transitions    : list of [src, dst, weight] triples
#   initial        : state id
#   penalty        : {"rate": int, "prob": {state: p}}   (optional)
# where p is an int, a decimal number, or a string like "3/10".  Unknown
# top-level keys are rejected.

_KNOWN_KEYS = {"format_version", "states", "ap", "labels", "transitions", "initial", "penalty"}


def _parse_probability(value) -> Fraction:
    if isinstance(value, bool):
        raise ModelValidationError(f"invalid probability {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float) or isinstance(value, str):
        try:
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            raise ModelValidationError(f"invalid probability {value!r}") from None
    raise ModelValidationError(f"invalid probability {value!r}")


def _read_document(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ModelValidationError(f"unknown top-level keys: {sorted(unknown)}")
    if doc.get("format_version") != 1:
        raise ModelValidationError("missing or unsupported format_version (expected 1)")
    for key in ("states", "transitions", "initial"):
        if key not in doc:
            raise ModelValidationError(f"missing required key {key!r}")
    return doc


def _system_from_document(doc: dict) -> TransitionSystem:
    transitions = []
    for entry in doc["transitions"]:
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ModelValidationError(f"transition entries must be [src, dst, weight]; got {entry!r}")
        transitions.append(tuple(entry))
    return TransitionSystem(
        doc["states"],
        transitions,
        doc.get("labels", {}),
        doc["initial"],
        ap=doc.get("ap"),
    )


def load_model(path) -> TransitionSystem:
    """Load and validate a transition system from a model file."""
    return _system_from_document(_read_document(path))


def load_problem(path) -> tuple[TransitionSystem, PenaltyField | None]:
    """Load a transition system plus its penalty section, when present.

    The penalty probability map must cover every state of the system.
    """
    doc = _read_document(path)
    ts = _system_from_document(doc)
    if "penalty" not in doc:
        return ts, None
    section = doc["penalty"]
    if not isinstance(section, dict) or set(section) - {"rate", "prob"}:
        raise ModelValidationError("penalty section must be {'rate': ..., 'prob': {...}}")
    prob = {s: _parse_probability(v) for s, v in dict(section.get("prob", {})).items()}
    missing = set(ts.states) - set(prob)
    if missing:
        raise ModelValidationError(f"penalty probabilities missing for states: {sorted(missing)}")
    extra = set(prob) - set(ts.states)
    if extra:
        raise ModelValidationError(f"penalty probabilities for unknown states: {sorted(extra)}")
    field = PenaltyField(section.get("rate"), prob)
    return ts, field


def model_document(ts: TransitionSystem, field: PenaltyField | None = None) -> dict:
    """The JSON document describing `ts` (inverse of load_problem)."""
    doc = {
        "format_version": 1,
        "states": list(ts.states),
        "ap": sorted(ts.ap),
        "labels": {s: sorted(ts.label(s)) for s in ts.states if ts.label(s)},
        "transitions": [[s, t, w] for s, t, w in ts.transitions()],
        "initial": ts.initial,
    }
    if field is not None:
        doc["penalty"] = {
            "rate": field.rate,
            "prob": {s: str(field.prob[s]) for s in sorted(field.prob)},
        }
    return doc


def save_model(path, ts: TransitionSystem, field: PenaltyField | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_document(ts, field), fh, indent=2, sort_keys=False)
        fh.write("\n")
