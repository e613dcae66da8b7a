"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its measured figure and staying inside its runtime
budget.  Tolerances are pinned here and nowhere else.

Criteria that quote "all graphs with n <= k" are exercised exhaustively
up to n = 4 and by seeded random sampling above that (the literal
enumeration at n = 7 is ~2^21 graphs and cannot fit any stated runtime
budget); the sampling sizes are fixed so the suite is deterministic.
"""
import itertools
import math
import time

import numpy as np

from conftest import random_graph, random_state
from mbqc.graphs import Graph, LatticeSpec, build_lattice, spanning_probability
from mbqc.pauli import PauliString, symplectic_rank
from mbqc.statevector import (apply_pauli, extract_qubits,
                              fidelity_up_to_phase, graph_state_vector,
                              measure_angle, measure_probability,
                              pauli_expectation)
from mbqc.tableau import graph_state_tableau, tableau_to_statevector
from mbqc.engine import check_determinism, enumerate_branches
from mbqc.compiler import Circuit, GateOp, compile_circuit, simulate_circuit
from mbqc.statmech import (SpinModel, partition_function_bruteforce,
                           partition_function_overlap)
from mbqc.surface import (HoleSpec, SliceLayout, build_two_slice_cluster,
                          carve_holes, check_operator,
                          logical_operators, present_checks,
                          project_syndrome_layer, teleport_slice,
                          verify_projection)
from mbqc.rng import OutcomeSource, make_rng

BASIS_TO_ANGLE = {"X": ("XY", 0.0), "Y": ("XY", np.pi / 2), "Z": ("Z", 0.0)}


def _announce(name, ok, detail, budget_s, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"\n[{status}] {name}: {detail} ({elapsed:.1f}s / budget {budget_s}s)")
    assert ok
    assert elapsed < budget_s, f"{name} exceeded its runtime budget"


def test_criterion_1_stabilizer_correctness():
    """200 random graphs, n <= 10: every correlation operator has
    statevector expectation 1 within 1e-10 and the two backends agree to
    fidelity 1 - 1e-10."""
    t0 = time.time()
    rng = np.random.default_rng(101)
    worst_exp, worst_fid = 0.0, 0.0
    for _ in range(200):
        n = int(rng.integers(1, 11))
        g = random_graph(n, rng)
        t = graph_state_tableau(g)
        sv = graph_state_vector(g)
        for j in range(n):
            kj = t.stabilizer_row(j)
            val = pauli_expectation(sv, kj)
            worst_exp = max(worst_exp, abs(val - 1))
        f = fidelity_up_to_phase(tableau_to_statevector(t, cap=10), sv)
        worst_fid = max(worst_fid, 1 - f)
    ok = worst_exp < 1e-10 and worst_fid < 1e-10
    _announce("criterion 1 (stabilizer correctness)", ok,
              f"max |<K_j>-1| = {worst_exp:.2e}, max infidelity = {worst_fid:.2e}",
              30, time.time() - t0)


def test_criterion_2_backend_equivalence():
    """500 random length-3 Pauli measurement sequences on graphs with
    n <= 8: outcome probabilities within 1e-12 and post-states within
    fidelity 1 - 1e-10 across backends."""
    t0 = time.time()
    rng = np.random.default_rng(202)
    worst_p, worst_f = 0.0, 0.0
    for _ in range(500):
        n = int(rng.integers(1, 9))
        g = random_graph(n, rng)
        t = graph_state_tableau(g)
        sv = graph_state_vector(g)
        for _ in range(3):
            q = int(rng.integers(0, n))
            basis = str(rng.choice(["X", "Y", "Z"]))
            plane, theta = BASIS_TO_ANGLE[basis]
            p0_sv = measure_probability(sv, q, plane, theta, 0)
            p0_tab = 0.5 if t.outcome_is_random(basis, q) else \
                (1.0 if t.copy().measure_pauli(basis, q) == 0 else 0.0)
            worst_p = max(worst_p, abs(p0_sv - p0_tab))
            m = 0 if p0_sv > 0.5 else 1
            t.measure_pauli(basis, q, forced=m)
            _, sv = measure_angle(sv, q, plane, theta, forced=m)
            worst_f = max(worst_f, 1 - fidelity_up_to_phase(
                tableau_to_statevector(t, cap=10), sv))
    ok = worst_p < 1e-12 and worst_f < 1e-10
    _announce("criterion 2 (backend equivalence)", ok,
              f"max prob diff = {worst_p:.2e}, max infidelity = {worst_f:.2e}",
              120, time.time() - t0)


def _random_circuit(r):
    n = int(r.integers(1, 4))
    d = int(r.integers(1, 6))
    gates = []
    for _ in range(d):
        opts = ["H", "S", "Rz", "Rx", "CZ", "CNOT"] if n > 1 else ["H", "S", "Rz", "Rx"]
        kind = str(r.choice(opts))
        if kind in ("CZ", "CNOT"):
            a = int(r.integers(0, n - 1))
            pair = (a, a + 1) if r.random() < 0.5 else (a + 1, a)
            gates.append(GateOp(kind, pair))
        elif kind in ("Rz", "Rx"):
            theta = float(r.choice([np.pi / 4, np.pi / 3,
                                    r.uniform(-np.pi, np.pi)]))
            gates.append(GateOp(kind, (int(r.integers(0, n)),), theta))
        else:
            gates.append(GateOp(kind, (int(r.integers(0, n)),)))
    return Circuit(n, gates)


def test_criterion_3_one_way_determinism():
    """50 random circuits (n <= 3, depth <= 5, Clifford + arbitrary-angle
    rotations): exhaustive branch enumeration of the compiled pattern
    frame-corrects onto simulate_circuit with fidelity >= 1 - 1e-9 in
    every branch.  Compiled patterns beyond the 2^16 branch cap are
    resampled (the enumerate_branches precondition)."""
    t0 = time.time()
    rng = np.random.default_rng(303)
    done = 0
    worst = 1.0
    total_branches = 0
    while done < 50:
        circ = _random_circuit(rng)
        prog = compile_circuit(circ)
        if len(prog.pattern.commands) > 14:
            continue
        psi = random_state(circ.n_logical, rng)
        branches = enumerate_branches(prog.pattern, input_state=psi)
        assert abs(sum(b.probability for b in branches) - 1) < 1e-9
        report = check_determinism(branches, simulate_circuit(circ, psi), tol=1e-9)
        assert report.passed, report.failures[:3]
        worst = min(worst, report.min_fidelity)
        total_branches += report.n_branches
        done += 1
    _announce("criterion 3 (one-way determinism)", worst >= 1 - 1e-9,
              f"50 circuits, {total_branches} branches, min fidelity = {worst:.12f}",
              600, time.time() - t0)


def test_criterion_4_z_removal_rule():
    """Z-measuring vertex v then applying Z^m to its neighbors leaves the
    graph state of G minus v: exhaustive over all graphs with n <= 4,
    seeded sampling for n in 5..7, every vertex and both outcomes."""
    t0 = time.time()
    worst = 0.0
    cases = 0

    def check(g, v, m):
        nonlocal worst, cases
        sv = graph_state_vector(g)
        _, post = measure_angle(sv, v, "Z", 0.0, forced=m)
        if m:
            for u in g.neighbors(v):
                apply_pauli(post, "Z", u)
        reduced = extract_qubits(post, [q for q in range(g.n_vertices) if q != v])
        ref = graph_state_vector(g.without_vertices([v]))
        worst = max(worst, 1 - fidelity_up_to_phase(reduced, ref))
        cases += 1

    for n in range(2, 5):
        pairs = list(itertools.combinations(range(n), 2))
        for bits in range(1 << len(pairs)):
            g = Graph(n, [pairs[k] for k in range(len(pairs)) if bits >> k & 1])
            for v in range(n):
                for m in (0, 1):
                    check(g, v, m)
    rng = np.random.default_rng(404)
    for n in (5, 6, 7):
        for _ in range(60):
            g = random_graph(n, rng)
            for v in range(n):
                check(g, v, int(rng.integers(0, 2)))
    _announce("criterion 4 (Z-removal rule)", worst < 1e-10,
              f"{cases} cases, max infidelity = {worst:.2e}",
              60, time.time() - t0)


def test_criterion_5_partition_identity():
    """100 random spin models on chains, stars and 2x2/2x3 grids with
    J,h in [-2,2], beta in {0.1, 0.5, 1}: overlap-based Z within relative
    1e-8 of brute force; both analytic cases within 1e-10."""
    t0 = time.time()
    rng = np.random.default_rng(505)
    worst = 0.0
    shapes = [LatticeSpec("chain", [3]), LatticeSpec("chain", [5]),
              LatticeSpec("star", [4]), LatticeSpec("star", [6]),
              LatticeSpec("grid2d", [2, 2]), LatticeSpec("grid2d", [2, 3])]
    for k in range(100):
        g = build_lattice(shapes[k % len(shapes)])
        m = SpinModel.build(
            g, {e: float(rng.uniform(-2, 2)) for e in g.edges},
            {v: float(rng.uniform(-2, 2)) for v in range(g.n_vertices)},
            float(rng.choice([0.1, 0.5, 1.0])))
        zb = partition_function_bruteforce(m)
        worst = max(worst, abs(partition_function_overlap(m) - zb) / zb)

    h, beta = 1.3, 0.7
    m1 = SpinModel.build(Graph(1, []), {}, {0: h}, beta)
    za1 = 2 * math.cosh(beta * h)
    err1 = abs(partition_function_overlap(m1) - za1) / za1
    j, beta = 0.9, 1.1
    m2 = SpinModel.build(Graph(2, [(0, 1)]), {(0, 1): j}, {0: 0.0, 1: 0.0}, beta)
    za2 = 2 * math.exp(beta * j) + 2 * math.exp(-beta * j)
    err2 = abs(partition_function_overlap(m2) - za2) / za2
    ok = worst < 1e-8 and err1 < 1e-10 and err2 < 1e-10
    _announce("criterion 5 (partition identity)", ok,
              f"worst rel err = {worst:.2e}, analytic errs = {err1:.2e}/{err2:.2e}",
              120, time.time() - t0)


def test_criterion_6_surface_code_projection():
    """2x2 and 3x3 code lattices, 100 random syndrome samples each: every
    A_s/B_p is in the projected group with the predicted sign; with one
    magnetic and one electric hole pair carved, exactly the holed checks
    are absent and the logical operators satisfy the commutation table."""
    t0 = time.time()
    checked = 0
    for dims in [(2, 2), (3, 3)]:
        L = SliceLayout(*dims)
        for seed in range(100):
            res = project_syndrome_layer(L, randomness=seed)
            rep = verify_projection(res)
            assert rep["passed"], (dims, seed, rep["failures"][:3])
            checked += rep["n_checks"]

    L = SliceLayout(3, 3)
    holes = HoleSpec(electric=((1, 1), (1, 2)), magnetic=((0, 0), (2, 2)))
    plan = carve_holes(L, holes)
    for seed in range(20):
        res = project_syndrome_layer(L, randomness=seed, plan=plan)
        rep = verify_projection(res)
        assert rep["passed"], (seed, rep["failures"][:3])
    zb_e, xb_e = logical_operators(L, holes, "electric")
    zb_m, xb_m = logical_operators(L, holes, "magnetic")
    assert not zb_e.commutes_with(xb_e) and not zb_m.commutes_with(xb_m)
    for a in (zb_e, xb_e):
        for b in (zb_m, xb_m):
            assert a.commutes_with(b)
    ops = [check_operator(L, k, p) for k, p in present_checks(L, plan)]
    base_rank = symplectic_rank(ops)
    for lo in (zb_e, xb_e, zb_m, xb_m):
        assert all(lo.commutes_with(op) for op in ops)
        assert symplectic_rank(ops + [lo]) == base_rank + 1
    _announce("criterion 6 (surface-code projection)", True,
              f"{checked} membership checks + holes/logicals on 3x3",
              60, time.time() - t0)


def test_criterion_7_slice_teleportation():
    """Stabilizer-group transport through one teleportation step on the
    minimal 1x2 two-slice cluster, 50 random samples; the all-zero case
    re-verified on the statevector backend."""
    t0 = time.time()
    L = SliceLayout(1, 2)
    for seed in range(50):
        rep = teleport_slice(L, randomness=seed)
        assert rep.passed, (seed, rep.failures[:2])

    g2 = build_two_slice_cluster(L)
    sv = graph_state_vector(g2, cap=22)
    n1 = L.n_cluster
    for (i, j) in L.all_sites():
        _, sv = measure_angle(sv, L.site_qubit(i, j), "Z", 0.0, forced=0)
    for (i, j) in L.all_faces():
        _, sv = measure_angle(sv, L.face_qubit(i, j), "XY", 0.0, forced=0)
    for e in range(L.n_code):
        _, sv = measure_angle(sv, e, "XY", 0.0, forced=0)
    worst = 0.0
    for kind, pos in present_checks(L, carve_holes(L, HoleSpec())):
        base = check_operator(L, kind, pos)
        emb = PauliString(g2.n_vertices)
        for k in range(L.n_code):
            xb = (int(base.x[k >> 6]) >> (k & 63)) & 1
            zb = (int(base.z[k >> 6]) >> (k & 63)) & 1
            q = n1 + k
            if zb:
                emb.x[q >> 6] |= np.uint64(1) << np.uint64(q & 63)
            if xb:
                emb.z[q >> 6] |= np.uint64(1) << np.uint64(q & 63)
        worst = max(worst, abs(pauli_expectation(sv, emb) - 1.0))
    _announce("criterion 7 (slice teleportation)", worst < 1e-9,
              f"50 tableau samples + statevector all-zero, max dev = {worst:.2e}",
              60, time.time() - t0)


def test_criterion_8_percolation():
    """50x50 grid, 200 seeds per rate: spanning probability >= 0.9 at
    defect rate 0.1, <= 0.1 at 0.6, monotone non-increasing across
    {0.1..0.6} within sampling error."""
    t0 = time.time()
    spec = LatticeSpec("grid2d", [50, 50])
    seeds = list(range(200))
    rates = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
    probs = [spanning_probability(spec, r, seeds) for r in rates]
    sampling_error = 3 * math.sqrt(0.25 / len(seeds))
    monotone = all(probs[i + 1] <= probs[i] + sampling_error
                   for i in range(len(probs) - 1))
    ok = probs[0] >= 0.9 and probs[-1] <= 0.1 and monotone
    detail = ", ".join(f"p({r})={p:.2f}" for r, p in zip(rates, probs))
    _announce("criterion 8 (percolation)", ok, detail, 300, time.time() - t0)


def test_criterion_9_out_of_scope_statement():
    """The fault-tolerance thresholds (3%, 6.7e-3, 7.5e-3), the photon
    efficiency bound, and large-scale universality claims are documented
    as out of scope, replaced by the property suites above."""
    import os
    readme = os.path.join(os.path.dirname(__file__), "..", "README.md")
    with open(readme, encoding="utf-8") as fh:
        text = fh.read()
    for token in ("3%", "6.7", "7.5", "out of scope"):
        assert token in text, f"README must state the exclusion ({token})"
    print("\n[PASS] criterion 9 (out-of-scope statement): thresholds and "
          "large-scale claims documented as not reproduced at desk scale")


def test_criterion_10_measurement_throughput():
    """The tableau backend sustains >= 1e4 single-qubit Pauli measurements
    per second at n = 1000 (mixed X/Y/Z on a 25x40 cluster state)."""
    n = 1000
    t = graph_state_tableau(build_lattice(LatticeSpec("grid2d", [25, 40])))
    rng = make_rng(42)
    src = OutcomeSource(rng=rng)
    qubits = rng.integers(0, n, size=20000)
    bases = rng.integers(0, 3, size=20000)
    names = "XYZ"
    t0 = time.perf_counter()
    for q, b in zip(qubits, bases):
        t.measure_pauli(names[b], int(q), src)
    rate = 20000 / (time.perf_counter() - t0)
    _announce("criterion 10 (throughput)", rate >= 1e4,
              f"{rate:,.0f} measurements/s at n=1000", 120,
              time.perf_counter() - t0)
