"""Adaptive measurement patterns over resource graph states.

A pattern measures every non-output site of its resource graph once, in
declared order.  Command angles adapt to earlier outcomes by the frozen
rule ``theta_eff = (-1)^s * theta + pi * t`` where ``s`` and ``t`` are
XOR-parities of the outcomes at the command's ``s_deps`` / ``t_deps``.

The engine never auto-corrects: a run returns the raw post-measurement
state on the output sites together with the Pauli frame implied by the
pattern's correction table, and ``check_determinism`` applies frames
explicitly.  Branch enumeration shares measurement prefixes and compacts
measured qubits as it descends, so exhausting 2^k branches costs about
k full-state passes rather than 2^k.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import CapacityError, ContradictionError, ValidationError
from .graphs import Graph
from .rng import OutcomeSource, as_outcome_source
from .statevector import (DEFAULT_CAP, StateVector, apply_cz, apply_pauli, compact,
                          extract_qubits, fidelity_up_to_phase,
                          measure_angle, measure_probability, permute_qubits, tensor)
from .tableau import Tableau, extract_subtableau, graph_state_tableau, tableau_to_statevector

PROB_TOL = 1e-12
HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class MeasurementCommand:
    """One adaptive single-site measurement."""

    site: int
    plane: str                      # "XY" or "Z"
    angle: float = 0.0
    s_deps: frozenset[int] = frozenset()
    t_deps: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "s_deps", frozenset(int(s) for s in self.s_deps))
        object.__setattr__(self, "t_deps", frozenset(int(t) for t in self.t_deps))
        if self.plane not in ("XY", "Z"):
            raise ValidationError(f"plane must be XY or Z, got {self.plane!r}")
        if not math.isfinite(self.angle):
            raise ValidationError("angle must be finite")

    def effective_angle(self, outcomes: Mapping[int, int]) -> float:
        s = 0
        for d in self.s_deps:
            s ^= outcomes[d] & 1
        t = 0
        for d in self.t_deps:
            t ^= outcomes[d] & 1
        return (-self.angle if s else self.angle) + (math.pi if t else 0.0)


@dataclass(frozen=True)
class PauliFrame:
    """Byproduct record: X/Z exponents per output site."""

    x: dict[int, int] = field(default_factory=dict)
    z: dict[int, int] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"x": {str(k): v for k, v in sorted(self.x.items())},
                "z": {str(k): v for k, v in sorted(self.z.items())}}


@dataclass
class BranchRecord:
    """One complete outcome assignment with its frame and output state."""

    outcomes: dict[int, int]
    frame: PauliFrame
    output_state: Union[StateVector, Tableau]
    probability: float
    output_sites: tuple[int, ...]


class MeasurementPattern:
    """Resource graph + ordered commands + correction table.

    ``corrections`` maps a measured site to the output sites whose X/Z
    frame exponents its outcome toggles:
    ``{site: {"x_on": [...], "z_on": [...]}}``.
    """

    def __init__(self, resource: Graph, input_sites: Sequence[int],
                 output_sites: Sequence[int],
                 commands: Sequence[MeasurementCommand],
                 corrections: Optional[Mapping[int, Mapping[str, Sequence[int]]]] = None):
        self.resource = resource
        self.input_sites = tuple(int(s) for s in input_sites)
        self.output_sites = tuple(int(s) for s in output_sites)
        self.commands = tuple(commands)
        self.corrections = {
            int(site): {"x_on": tuple(int(o) for o in rule.get("x_on", ())),
                        "z_on": tuple(int(o) for o in rule.get("z_on", ()))}
            for site, rule in (corrections or {}).items()}

    @property
    def measured_sites(self) -> tuple[int, ...]:
        return tuple(c.site for c in self.commands)

    def frame_for(self, outcomes: Mapping[int, int]) -> PauliFrame:
        x = {o: 0 for o in self.output_sites}
        z = {o: 0 for o in self.output_sites}
        for site, rule in self.corrections.items():
            m = outcomes.get(site, 0) & 1
            if not m:
                continue
            for o in rule["x_on"]:
                x[o] ^= 1
            for o in rule["z_on"]:
                z[o] ^= 1
        return PauliFrame(x, z)

    # -- JSON ---------------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "resource": self.resource.to_json_dict(),
            "inputs": list(self.input_sites),
            "outputs": list(self.output_sites),
            "commands": [{"site": c.site, "plane": c.plane, "angle": c.angle,
                          "s": sorted(c.s_deps), "t": sorted(c.t_deps)}
                         for c in self.commands],
            "corrections": {str(site): {"x_on": sorted(rule["x_on"]),
                                        "z_on": sorted(rule["z_on"])}
                            for site, rule in sorted(self.corrections.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "MeasurementPattern":
        try:
            resource = Graph.from_json_dict(d["resource"])
            commands = [MeasurementCommand(int(c["site"]), c.get("plane", "XY"),
                                           float(c.get("angle", 0.0)),
                                           frozenset(c.get("s", ())),
                                           frozenset(c.get("t", ())))
                        for c in d.get("commands", ())]
            corrections = {int(site): rule
                           for site, rule in d.get("corrections", {}).items()}
            return cls(resource, d.get("inputs", ()), d.get("outputs", ()),
                       commands, corrections)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad pattern JSON: {exc}") from exc

    @classmethod
    def from_json(cls, s: str) -> "MeasurementPattern":
        return cls.from_json_dict(json.loads(s))


def validate_pattern(p: MeasurementPattern) -> list[str]:
    """All violations of the pattern invariants (empty list means ok)."""
    issues: list[str] = []
    n = p.resource.n_vertices
    for label, sites in (("input", p.input_sites), ("output", p.output_sites)):
        for s in sites:
            if not (0 <= s < n):
                issues.append(f"{label} site {s} out of range")
    if len(set(p.output_sites)) != len(p.output_sites):
        issues.append("duplicate output sites")
    if len(set(p.input_sites)) != len(p.input_sites):
        issues.append("duplicate input sites")

    out_set = set(p.output_sites)
    seen: set[int] = set()
    for k, c in enumerate(p.commands):
        if not (0 <= c.site < n):
            issues.append(f"command {k}: site {c.site} out of range")
            continue
        if c.site in out_set:
            issues.append(f"command {k}: output site {c.site} must not be measured")
        if c.site in seen:
            issues.append(f"command {k}: site {c.site} measured twice")
        for d in sorted(c.s_deps | c.t_deps):
            if d == c.site:
                issues.append(f"command {k}: depends on itself")
            elif d not in seen:
                issues.append(
                    f"command {k}: dependency {d} precedes order "
                    f"(not measured before site {c.site})")
        seen.add(c.site)
    unmeasured = set(range(n)) - seen - out_set
    if unmeasured:
        issues.append(f"non-output sites never measured: {sorted(unmeasured)}")
    for site, rule in p.corrections.items():
        if site not in seen:
            issues.append(f"correction keyed by unmeasured site {site}")
        for o in rule["x_on"] + rule["z_on"]:
            if o not in out_set:
                issues.append(f"correction for site {site} targets non-output {o}")
    return issues


def _require_valid(p: MeasurementPattern) -> None:
    issues = validate_pattern(p)
    if issues:
        raise ValidationError("invalid pattern: " + "; ".join(issues))


def _stabilizer_eligible(p: MeasurementPattern) -> bool:
    """True when every possible effective angle is a multiple of pi/2."""
    for c in p.commands:
        if c.plane == "Z":
            continue
        k = c.angle / HALF_PI
        if abs(k - round(k)) > 1e-12:
            return False
    return True


def _prepare_statevector(p: MeasurementPattern,
                         input_state: Optional[StateVector], cap: int) -> StateVector:
    n = p.resource.n_vertices
    if n > cap:
        raise CapacityError(f"resource has {n} sites, cap {cap}")
    if input_state is None:
        state = StateVector.plus_state(n) if n else StateVector(0, np.ones(1))
    else:
        if input_state.n != len(p.input_sites):
            raise ValidationError("input state size does not match input sites")
        rest = [s for s in range(n) if s not in set(p.input_sites)]
        state = tensor(input_state, StateVector.plus_state(len(rest)))
        # current qubit order is (inputs..., rest...); bring into site order
        current = list(p.input_sites) + rest
        state = permute_qubits(state, [current.index(s) for s in range(n)])
    for a, b in p.resource.edges:
        apply_cz(state, a, b)
    return state


def _angle_to_pauli(theta: float) -> tuple[str, int]:
    """Effective XY angle (multiple of pi/2) -> (Pauli basis, outcome flip)."""
    k = round(theta / HALF_PI) % 4
    if abs(theta / HALF_PI - round(theta / HALF_PI)) > 1e-12:
        raise ValidationError(f"angle {theta} is not a multiple of pi/2")
    return [("X", 0), ("Y", 0), ("X", 1), ("Y", 1)][k]


def run_pattern(p: MeasurementPattern, input_state: Optional[StateVector] = None,
                backend: str = "statevector",
                randomness: Union[int, OutcomeSource, None] = None,
                forced: Optional[Mapping[int, int]] = None,
                cap: int = DEFAULT_CAP) -> BranchRecord:
    """Execute one branch of the pattern; see module docstring for semantics."""
    _require_valid(p)
    src = as_outcome_source(randomness, forced=forced)
    if backend == "statevector":
        return _run_statevector(p, input_state, src, cap)
    if backend == "stabilizer":
        if input_state is not None:
            raise CapacityError("stabilizer backend does not take injected inputs")
        if not _stabilizer_eligible(p):
            raise CapacityError(
                "stabilizer backend requires all angles to be multiples of pi/2")
        return _run_stabilizer(p, src)
    raise ValidationError(f"unknown backend {backend!r}")


def _choose_outcome(src: OutcomeSource, site: int, p0: float) -> int:
    if src.has_forced(site):
        return src.forced[site] & 1
    if p0 > 1.0 - PROB_TOL:
        return 0
    if p0 < PROB_TOL:
        return 1
    return src.draw(site)


def _run_statevector(p: MeasurementPattern, input_state, src: OutcomeSource,
                     cap: int) -> BranchRecord:
    state = _prepare_statevector(p, input_state, cap)
    outcomes: dict[int, int] = {}
    prob = 1.0
    for c in p.commands:
        theta = c.effective_angle(outcomes) if c.plane == "XY" else 0.0
        p0 = measure_probability(state, c.site, c.plane, theta, 0)
        m = _choose_outcome(src, c.site, p0)
        pm = p0 if m == 0 else 1.0 - p0
        if pm < PROB_TOL:
            raise ContradictionError(
                f"outcome {m} at site {c.site} has probability {pm:.3e}")
        _, state = measure_angle(state, c.site, c.plane, theta, forced=m)
        outcomes[c.site] = m
        prob *= pm
    out = extract_qubits(state, p.output_sites) if p.output_sites else StateVector(0, np.ones(1))
    return BranchRecord(outcomes, p.frame_for(outcomes), out, prob, p.output_sites)


def _run_stabilizer(p: MeasurementPattern, src: OutcomeSource) -> BranchRecord:
    t = graph_state_tableau(p.resource)
    outcomes: dict[int, int] = {}
    prob = 1.0
    for c in p.commands:
        if c.plane == "Z":
            basis, flip = "Z", 0
        else:
            basis, flip = _angle_to_pauli(c.effective_angle(outcomes))
        balanced = t.outcome_is_random(basis, c.site)
        if balanced:
            if src.has_forced(c.site):
                m = src.forced[c.site] & 1
            else:
                m = src.draw(c.site)
            t.measure_pauli(basis, c.site, forced=m ^ flip)
            prob *= 0.5
        else:
            m_pauli = t.measure_pauli(basis, c.site)
            m = m_pauli ^ flip
            if src.has_forced(c.site) and (src.forced[c.site] & 1) != m:
                raise ContradictionError(
                    f"outcome at site {c.site} is deterministically {m}")
        outcomes[c.site] = m
    out = extract_subtableau(t, p.output_sites)
    return BranchRecord(outcomes, p.frame_for(outcomes), out, prob, p.output_sites)


def enumerate_branches(p: MeasurementPattern, input_state: Optional[StateVector] = None,
                       backend: str = "statevector", branch_cap: int = 1 << 16,
                       cap: int = DEFAULT_CAP) -> list[BranchRecord]:
    """Exhaustively force every realizable outcome combination.

    Zero-probability combinations are pruned (they are not branches of the
    computation); the returned probabilities sum to 1 within 1e-9.
    """
    _require_valid(p)
    k = len(p.commands)
    if 2 ** k > branch_cap:
        raise CapacityError(f"2^{k} branches exceed cap {branch_cap}")
    if backend == "statevector":
        state = _prepare_statevector(p, input_state, cap)
        positions = {s: s for s in range(p.resource.n_vertices)}
        records: list[BranchRecord] = []
        _enum_sv(p, state, 0, {}, 1.0, positions, records)
        return records
    if backend == "stabilizer":
        if input_state is not None:
            raise CapacityError("stabilizer backend does not take injected inputs")
        if not _stabilizer_eligible(p):
            raise CapacityError(
                "stabilizer backend requires all angles to be multiples of pi/2")
        t = graph_state_tableau(p.resource)
        records = []
        _enum_stab(p, t, 0, {}, 1.0, records)
        return records
    raise ValidationError(f"unknown backend {backend!r}")


def _enum_sv(p: MeasurementPattern, state: StateVector, idx: int,
             outcomes: dict[int, int], prob: float,
             positions: dict[int, int], records: list[BranchRecord]) -> None:
    if idx == len(p.commands):
        if p.output_sites:
            out = extract_qubits(state, [positions[s] for s in p.output_sites])
        else:
            out = StateVector(0, np.ones(1))
        records.append(BranchRecord(dict(outcomes), p.frame_for(outcomes), out,
                                    prob, p.output_sites))
        return
    c = p.commands[idx]
    pos = positions[c.site]
    theta = c.effective_angle(outcomes) if c.plane == "XY" else 0.0
    p0 = measure_probability(state, pos, c.plane, theta, 0)
    for m, pm in ((0, p0), (1, 1.0 - p0)):
        if pm < PROB_TOL:
            continue
        _, collapsed = measure_angle(state, pos, c.plane, theta, forced=m)
        reduced = compact(collapsed, pos)
        new_positions = {s: (q if q < pos else q - 1)
                         for s, q in positions.items() if s != c.site}
        outcomes[c.site] = m
        _enum_sv(p, reduced, idx + 1, outcomes, prob * pm, new_positions, records)
        del outcomes[c.site]


def _enum_stab(p: MeasurementPattern, t: Tableau, idx: int,
               outcomes: dict[int, int], prob: float,
               records: list[BranchRecord]) -> None:
    if idx == len(p.commands):
        records.append(BranchRecord(dict(outcomes), p.frame_for(outcomes),
                                    extract_subtableau(t, p.output_sites),
                                    prob, p.output_sites))
        return
    c = p.commands[idx]
    if c.plane == "Z":
        basis, flip = "Z", 0
    else:
        basis, flip = _angle_to_pauli(c.effective_angle(outcomes))
    balanced = t.outcome_is_random(basis, c.site)
    for m in (0, 1):
        t2 = t.copy()
        try:
            t2.measure_pauli(basis, c.site, forced=m ^ flip)
        except ContradictionError:
            continue
        outcomes[c.site] = m
        _enum_stab(p, t2, idx + 1, outcomes, prob * (0.5 if balanced else 1.0),
                   records)
        del outcomes[c.site]


@dataclass
class DeterminismReport:
    passed: bool
    n_branches: int
    min_fidelity: float
    failures: list[dict]

    def to_json_dict(self) -> dict:
        return {"passed": self.passed, "n_branches": self.n_branches,
                "min_fidelity": self.min_fidelity, "failures": self.failures}


def apply_frame(state: Union[StateVector, Tableau], frame: PauliFrame,
                output_sites: Sequence[int]) -> Union[StateVector, Tableau]:
    """Apply the frame's X then Z correction to each output qubit."""
    out_index = {s: i for i, s in enumerate(output_sites)}
    if isinstance(state, Tableau):
        t = state.copy()
        for s, e in frame.x.items():
            if e:
                t.apply_clifford("X", [out_index[s]])
        for s, e in frame.z.items():
            if e:
                t.apply_clifford("Z", [out_index[s]])
        return t
    sv = state.copy()
    for s, e in frame.x.items():
        if e:
            apply_pauli(sv, "X", out_index[s])
    for s, e in frame.z.items():
        if e:
            apply_pauli(sv, "Z", out_index[s])
    return sv


def check_determinism(branches: Sequence[BranchRecord], reference: StateVector,
                      tol: float = 1e-9) -> DeterminismReport:
    """Frame-correct every branch and compare to the reference output."""
    failures = []
    min_f = 1.0
    for i, b in enumerate(branches):
        corrected = apply_frame(b.output_state, b.frame, b.output_sites)
        if isinstance(corrected, Tableau):
            corrected = tableau_to_statevector(corrected)
        f = fidelity_up_to_phase(corrected, reference)
        min_f = min(min_f, f)
        if f < 1.0 - tol:
            failures.append({"branch": i, "outcomes": dict(b.outcomes),
                             "fidelity": f})
    return DeterminismReport(not failures, len(branches), min_f, failures)
