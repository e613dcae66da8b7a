"""Surface-code slices carved out of 2D cluster states.

Geometry: an r x c code lattice has (r+1)(c+1) sites, r*c faces, and one
code qubit per lattice edge.  The slice cluster places a qubit on every
edge (code), every site (site-syndrome), and every face
(plaquette-syndrome); each syndrome qubit is linked to exactly the code
qubits on its incident/boundary edges.

Projection: site-syndromes are measured in Z (removing them, the
cluster-surgery primitive), plaquette-syndromes in X.  The surviving
stabilizer group on the code qubits then contains, with no Hadamard
dressing,

* ``A_s`` (X on the edges at site s) with sign
  ``(-1)^{deg(s) m_s + sum_{s'~s} m_{s'}}`` from the site outcomes, and
* ``B_p`` (Z on the edges of face p) with sign ``(-1)^{m_p}``,

because ``prod_{e at s} K_e`` survives as A_s once the measured site
ancillas are folded in, and ``K_p`` folds with the face outcome into
B_p.  These sign rules are frozen here and verified against both
backends in the tests.

Holes: a magnetic hole at face p re-bases that ancilla to Z (B_p never
read out); an electric hole pair occupies two adjacent sites and is
carved by Z-measuring their shared code qubit, which destroys exactly
those two A_s.  Logical operators follow the
string/loop geometry: electric pairs get a Z-string between the holes
and the X-star loop around one hole; magnetic pairs get the Z-loop
around one hole and an X-string along a dual path between them.

Teleportation: a second layer of code qubits, each linked only to its
slice-1 partner, receives the projected code state under per-qubit
Hadamards once the slice-1 code qubits are measured in X; every imposed
check transports with the outcome signs predicted by H-conjugation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ValidationError
from .graphs import Graph
from .pauli import PauliString, symplectic_rank
from .rng import OutcomeSource, as_outcome_source
from .tableau import Tableau, extract_subtableau, graph_state_tableau


@dataclass(frozen=True)
class SliceLayout:
    """Code-lattice dimensions plus the fixed slice-qubit enumeration.

    Cluster indexing: code qubits come first (all horizontal edges in
    row-major order, then all vertical edges row-major), then
    site-syndromes row-major, then plaquette-syndromes row-major.
    """

    code_rows: int
    code_cols: int

    def __post_init__(self):
        if self.code_rows < 1 or self.code_cols < 1:
            raise ValidationError("code lattice dimensions must be >= 1")

    # -- counts -------------------------------------------------------------

    @property
    def n_sites(self) -> int:
        return (self.code_rows + 1) * (self.code_cols + 1)

    @property
    def n_faces(self) -> int:
        return self.code_rows * self.code_cols

    @property
    def n_horizontal(self) -> int:
        return (self.code_rows + 1) * self.code_cols

    @property
    def n_code(self) -> int:
        return self.n_horizontal + self.code_rows * (self.code_cols + 1)

    @property
    def n_cluster(self) -> int:
        return self.n_code + self.n_sites + self.n_faces

    # -- index maps ----------------------------------------------------------

    def hedge(self, i: int, j: int) -> int:
        """Code qubit on the horizontal edge (i,j)-(i,j+1)."""
        if not (0 <= i <= self.code_rows and 0 <= j < self.code_cols):
            raise ValidationError(f"horizontal edge ({i},{j}) out of range")
        return i * self.code_cols + j

    def vedge(self, i: int, j: int) -> int:
        """Code qubit on the vertical edge (i,j)-(i+1,j)."""
        if not (0 <= i < self.code_rows and 0 <= j <= self.code_cols):
            raise ValidationError(f"vertical edge ({i},{j}) out of range")
        return self.n_horizontal + i * (self.code_cols + 1) + j

    def site_qubit(self, i: int, j: int) -> int:
        if not (0 <= i <= self.code_rows and 0 <= j <= self.code_cols):
            raise ValidationError(f"site ({i},{j}) out of range")
        return self.n_code + i * (self.code_cols + 1) + j

    def face_qubit(self, i: int, j: int) -> int:
        if not (0 <= i < self.code_rows and 0 <= j < self.code_cols):
            raise ValidationError(f"face ({i},{j}) out of range")
        return self.n_code + self.n_sites + i * self.code_cols + j

    def site_edges(self, i: int, j: int) -> list[int]:
        """Code qubits on the edges incident to site (i,j)."""
        out = []
        if j > 0:
            out.append(self.hedge(i, j - 1))
        if j < self.code_cols:
            out.append(self.hedge(i, j))
        if i > 0:
            out.append(self.vedge(i - 1, j))
        if i < self.code_rows:
            out.append(self.vedge(i, j))
        return sorted(out)

    def face_edges(self, i: int, j: int) -> list[int]:
        """Code qubits on the boundary edges of face (i,j)."""
        return sorted([self.hedge(i, j), self.hedge(i + 1, j),
                       self.vedge(i, j), self.vedge(i, j + 1)])

    def site_degree(self, i: int, j: int) -> int:
        return len(self.site_edges(i, j))

    def site_neighbors(self, i: int, j: int) -> list[tuple[int, int]]:
        out = []
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ni, nj = i + di, j + dj
            if 0 <= ni <= self.code_rows and 0 <= nj <= self.code_cols:
                out.append((ni, nj))
        return out

    def all_sites(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.code_rows + 1)
                for j in range(self.code_cols + 1)]

    def all_faces(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.code_rows)
                for j in range(self.code_cols)]

    def shared_edge(self, s0: tuple[int, int], s1: tuple[int, int]) -> int:
        """Code qubit on the edge joining two adjacent sites."""
        (i0, j0), (i1, j1) = sorted((tuple(s0), tuple(s1)))
        if (i0, j0) == (i1, j1):
            raise ValidationError("sites coincide")
        if i0 == i1 and j1 == j0 + 1:
            return self.hedge(i0, j0)
        if j0 == j1 and i1 == i0 + 1:
            return self.vedge(i0, j0)
        raise ValidationError(f"sites {s0} and {s1} are not adjacent")

    def to_json_dict(self) -> dict:
        return {"code_rows": self.code_rows, "code_cols": self.code_cols}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SliceLayout":
        try:
            return cls(int(d["code_rows"]), int(d["code_cols"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad layout JSON: {exc}") from exc


def build_slice_cluster(layout: SliceLayout) -> Graph:
    """Cluster graph of one slice: syndrome qubits linked to their edges."""
    edges = []
    for (i, j) in layout.all_sites():
        u = layout.site_qubit(i, j)
        for e in layout.site_edges(i, j):
            edges.append((e, u))
    for (i, j) in layout.all_faces():
        u = layout.face_qubit(i, j)
        for e in layout.face_edges(i, j):
            edges.append((e, u))
    return Graph(layout.n_cluster, edges)


@dataclass(frozen=True)
class HoleSpec:
    """Hole positions: electric at sites, magnetic at faces (pairs)."""

    electric: tuple[tuple[int, int], ...] = ()
    magnetic: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "electric",
                           tuple(tuple(p) for p in self.electric))
        object.__setattr__(self, "magnetic",
                           tuple(tuple(p) for p in self.magnetic))

    def to_json_dict(self) -> dict:
        return {"electric": [list(p) for p in self.electric],
                "magnetic": [list(p) for p in self.magnetic]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "HoleSpec":
        return cls(tuple(tuple(p) for p in d.get("electric", ())),
                   tuple(tuple(p) for p in d.get("magnetic", ())))


@dataclass
class MeasurementPlan:
    """Which basis each ancilla gets, plus code qubits removed by Z."""

    face_bases: dict[tuple[int, int], str]
    code_z: tuple[int, ...]
    absent_checks: tuple[tuple[str, tuple[int, int]], ...]
    holes: HoleSpec


def carve_holes(layout: SliceLayout, holes: HoleSpec) -> MeasurementPlan:
    """Plan the measurement-basis changes that carve the requested holes.

    Magnetic hole at p: its plaquette ancilla is measured in Z instead of
    X, so B_p is never read out.  An electric pair must occupy two
    adjacent sites; Z-measuring their shared code qubit destroys exactly
    those two A_s.  Supported hole counts per type: 0 or 2.
    """
    for (i, j) in holes.electric:
        if not (0 <= i <= layout.code_rows and 0 <= j <= layout.code_cols):
            raise ValidationError(f"electric hole {(i, j)} outside the lattice")
    for (i, j) in holes.magnetic:
        if not (0 <= i < layout.code_rows and 0 <= j < layout.code_cols):
            raise ValidationError(f"magnetic hole {(i, j)} outside the lattice")
    if len(set(holes.electric)) != len(holes.electric):
        raise ValidationError("duplicate electric holes")
    if len(set(holes.magnetic)) != len(holes.magnetic):
        raise ValidationError("duplicate magnetic holes")
    if len(holes.electric) not in (0, 2) or len(holes.magnetic) not in (0, 2):
        raise ValidationError("holes are carved in pairs (0 or 2 per type)")

    face_bases = {f: "X" for f in layout.all_faces()}
    absent: list[tuple[str, tuple[int, int]]] = []
    code_z: list[int] = []
    if holes.magnetic:
        for p in holes.magnetic:
            face_bases[p] = "Z"
            absent.append(("B", p))
    if holes.electric:
        s0, s1 = holes.electric
        code_z.append(layout.shared_edge(s0, s1))   # adjacency required
        absent.append(("A", s0))
        absent.append(("A", s1))
    return MeasurementPlan(face_bases, tuple(code_z), tuple(absent), holes)


def check_operator(layout: SliceLayout, kind: str, pos: tuple[int, int],
                   n_qubits: Optional[int] = None) -> PauliString:
    """A_s (X-star) or B_p (Z-plaquette) over the code qubits.

    ``n_qubits`` embeds the operator into a larger register (identity
    elsewhere) when checking membership in a full slice tableau.
    """
    n = layout.n_code if n_qubits is None else n_qubits
    p = PauliString(n)
    i, j = pos
    if kind == "A":
        for e in layout.site_edges(i, j):
            p.x[e >> 6] |= np.uint64(1) << np.uint64(e & 63)
    elif kind == "B":
        for e in layout.face_edges(i, j):
            p.z[e >> 6] |= np.uint64(1) << np.uint64(e & 63)
    else:
        raise ValidationError("check kind must be 'A' or 'B'")
    return p


def predicted_sign(layout: SliceLayout, kind: str, pos: tuple[int, int],
                   outcomes: dict[int, int]) -> int:
    """Frozen outcome-to-sign rule for a projected check (see module doc)."""
    i, j = pos
    if kind == "B":
        m = outcomes[layout.face_qubit(i, j)]
        return -1 if m else +1
    exp = (layout.site_degree(i, j) & 1) * outcomes[layout.site_qubit(i, j)]
    for (ni, nj) in layout.site_neighbors(i, j):
        exp ^= outcomes[layout.site_qubit(ni, nj)]
    return -1 if (exp & 1) else +1


@dataclass
class ProjectionResult:
    outcomes: dict[int, int]                  # cluster qubit -> measured bit
    code_tableau: Tableau                     # state restricted to code qubits
    dressing: dict[int, str]                  # per code qubit (identity here)
    plan: MeasurementPlan
    layout: SliceLayout

    def check_sign(self, kind: str, pos: tuple[int, int]) -> Optional[int]:
        """Measured membership sign of a check in the projected group."""
        op = check_operator(self.layout, kind, pos)
        return self.code_tableau.stabilizer_group_contains(op)

    def predicted(self, kind: str, pos: tuple[int, int]) -> int:
        return predicted_sign(self.layout, kind, pos, self.outcomes)


def project_syndrome_layer(layout: SliceLayout,
                           randomness: Union[int, OutcomeSource, None] = None,
                           plan: Optional[MeasurementPlan] = None,
                           forced: Optional[dict[int, int]] = None) -> ProjectionResult:
    """Measure the slice ancillas (sites in Z, faces per plan) in the
    tableau backend and return the projected code-qubit state."""
    if plan is None:
        plan = carve_holes(layout, HoleSpec())
    src = as_outcome_source(randomness, forced=forced)
    t = graph_state_tableau(build_slice_cluster(layout))
    outcomes: dict[int, int] = {}
    for (i, j) in layout.all_sites():
        q = layout.site_qubit(i, j)
        outcomes[q] = t.measure_pauli("Z", q, src)
    for (i, j) in layout.all_faces():
        q = layout.face_qubit(i, j)
        outcomes[q] = t.measure_pauli(plan.face_bases[(i, j)], q, src)
    for e in plan.code_z:
        outcomes[e] = t.measure_pauli("Z", e, src)
    code_tab = extract_subtableau(t, list(range(layout.n_code)))
    dressing = {e: "I" for e in range(layout.n_code)}
    return ProjectionResult(outcomes, code_tab, dressing, plan, layout)


def present_checks(layout: SliceLayout, plan: MeasurementPlan
                   ) -> list[tuple[str, tuple[int, int]]]:
    absent = set(plan.absent_checks)
    out = [("A", s) for s in layout.all_sites() if ("A", s) not in absent]
    out += [("B", f) for f in layout.all_faces() if ("B", f) not in absent]
    return out


def imposed_rank(layout: SliceLayout, plan: MeasurementPlan) -> int:
    """GF(2) rank of the imposed (non-holed) check set."""
    ops = [check_operator(layout, kind, pos)
           for kind, pos in present_checks(layout, plan)]
    return symplectic_rank(ops)


def verify_projection(result: ProjectionResult) -> dict:
    """Membership + sign check for every non-holed stabilizer, absence for
    holed ones; returns a report dict (used by tests and the CLI)."""
    layout, plan = result.layout, result.plan
    failures = []
    for kind, pos in present_checks(layout, plan):
        got = result.check_sign(kind, pos)
        want = result.predicted(kind, pos)
        if got != want:
            failures.append({"check": f"{kind}{pos}", "got": got, "want": want})
    for kind, pos in plan.absent_checks:
        if result.check_sign(kind, pos) is not None:
            failures.append({"check": f"{kind}{pos}", "got": "present",
                             "want": "absent"})
    return {"passed": not failures, "failures": failures,
            "n_checks": len(present_checks(layout, plan)) + len(plan.absent_checks)}


# -- logical operators -------------------------------------------------------

def _site_path(layout: SliceLayout, s0: tuple[int, int], s1: tuple[int, int]
               ) -> list[tuple[int, int]]:
    """Shortest site path, deterministic tie-break (BFS, sorted neighbors)."""
    from collections import deque
    start, goal = tuple(s0), tuple(s1)
    prev: dict[tuple[int, int], tuple[int, int]] = {start: start}
    dq = deque([start])
    while dq:
        cur = dq.popleft()
        if cur == goal:
            break
        for nxt in sorted(layout.site_neighbors(*cur)):
            if nxt not in prev:
                prev[nxt] = cur
                dq.append(nxt)
    if goal not in prev:
        raise ValidationError("no path between the hole sites")
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return path[::-1]


def _dual_path(layout: SliceLayout, p0: tuple[int, int], p1: tuple[int, int]
               ) -> list[tuple[int, int]]:
    """Shortest face path (faces adjacent when they share an edge)."""
    from collections import deque
    start, goal = tuple(p0), tuple(p1)
    prev: dict[tuple[int, int], tuple[int, int]] = {start: start}
    dq = deque([start])
    while dq:
        cur = dq.popleft()
        if cur == goal:
            break
        i, j = cur
        for nxt in sorted((i + di, j + dj) for di, dj in
                          ((-1, 0), (1, 0), (0, -1), (0, 1))):
            if (0 <= nxt[0] < layout.code_rows and 0 <= nxt[1] < layout.code_cols
                    and nxt not in prev):
                prev[nxt] = cur
                dq.append(nxt)
    if goal not in prev:
        raise ValidationError("no dual path between the hole faces")
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return path[::-1]


def _face_shared_edge(layout: SliceLayout, f0: tuple[int, int],
                      f1: tuple[int, int]) -> int:
    (i0, j0), (i1, j1) = sorted((f0, f1))
    if i0 == i1 and j1 == j0 + 1:
        return layout.vedge(i0, j1)
    if j0 == j1 and i1 == i0 + 1:
        return layout.hedge(i1, j0)
    raise ValidationError(f"faces {f0} and {f1} are not adjacent")


def logical_operators(layout: SliceLayout, holes: HoleSpec, kind: str,
                      path: Optional[Sequence[tuple[int, int]]] = None
                      ) -> tuple[PauliString, PauliString]:
    """(Z-bar, X-bar) for the requested encoded qubit, as code-qubit Paulis.

    Electric pair {s, s'}: Z-bar is a Z-string along a site path from s
    to s' (default: the shared edge), X-bar the X-star loop around s.
    Magnetic pair {p, p'}: Z-bar is the Z-loop around p (its plaquette),
    X-bar an X-string along a dual path from p to p'.  ``path`` overrides
    the auto-routed site path (electric) or face path (magnetic).
    """
    n = layout.n_code
    if kind == "electric":
        if len(holes.electric) != 2:
            raise ValidationError("electric qubit needs exactly two electric holes")
        s0, s1 = holes.electric
        sites = [tuple(p) for p in path] if path else _site_path(layout, s0, s1)
        if sites[0] != tuple(s0) or sites[-1] != tuple(s1):
            raise ValidationError("path must run from the first hole to the second")
        zbar = PauliString(n)
        for a, b in zip(sites, sites[1:]):
            e = layout.shared_edge(a, b)
            zbar.z[e >> 6] ^= np.uint64(1) << np.uint64(e & 63)
        xbar = check_operator(layout, "A", s0)
        return zbar, xbar
    if kind == "magnetic":
        if len(holes.magnetic) != 2:
            raise ValidationError("magnetic qubit needs exactly two magnetic holes")
        p0, p1 = holes.magnetic
        zbar = check_operator(layout, "B", p0)
        faces = [tuple(p) for p in path] if path else _dual_path(layout, p0, p1)
        if faces[0] != tuple(p0) or faces[-1] != tuple(p1):
            raise ValidationError("path must run from the first hole to the second")
        xbar = PauliString(n)
        for a, b in zip(faces, faces[1:]):
            e = _face_shared_edge(layout, a, b)
            xbar.x[e >> 6] ^= np.uint64(1) << np.uint64(e & 63)
        return zbar, xbar
    raise ValidationError("encoded qubit kind must be 'electric' or 'magnetic'")


# -- slice-to-slice teleportation ---------------------------------------------

def build_two_slice_cluster(layout: SliceLayout,
                            drop_link: Optional[int] = None) -> Graph:
    """Slice 1 (full) plus a second layer of code qubits, each linked to
    its slice-1 partner; ``drop_link`` removes one inter-slice edge (the
    negative control)."""
    base = build_slice_cluster(layout)
    n1 = layout.n_cluster
    edges = list(base.edges)
    for e in range(layout.n_code):
        if e == drop_link:
            continue
        edges.append((e, n1 + e))
    return Graph(n1 + layout.n_code, edges)


@dataclass
class TeleportReport:
    passed: bool
    failures: list[dict]
    outcomes: dict[int, int]
    n_checks: int


def teleport_slice(layout: SliceLayout,
                   randomness: Union[int, OutcomeSource, None] = None,
                   forced: Optional[dict[int, int]] = None,
                   drop_link: Optional[int] = None) -> TeleportReport:
    """Project slice 1, X-measure its code qubits, and verify that every
    check lands on slice 2 Hadamard-conjugated with the predicted signs."""
    src = as_outcome_source(randomness, forced=forced)
    g = build_two_slice_cluster(layout, drop_link=drop_link)
    t = graph_state_tableau(g)
    n1 = layout.n_cluster
    outcomes: dict[int, int] = {}
    for (i, j) in layout.all_sites():
        q = layout.site_qubit(i, j)
        outcomes[q] = t.measure_pauli("Z", q, src)
    for (i, j) in layout.all_faces():
        q = layout.face_qubit(i, j)
        outcomes[q] = t.measure_pauli("X", q, src)
    for e in range(layout.n_code):
        outcomes[e] = t.measure_pauli("X", e, src)

    slice2 = [n1 + e for e in range(layout.n_code)]
    code_tab = extract_subtableau(t, slice2)

    failures = []
    checks = present_checks(layout, carve_holes(layout, HoleSpec()))
    for kind, pos in checks:
        base = check_operator(layout, kind, pos)
        sign = predicted_sign(layout, kind, pos, outcomes)
        # transport: H per qubit (X<->Z) and an X^w sign for X-support
        transported = PauliString(layout.n_code, base.z.copy(), base.x.copy(), +1)
        if kind == "A":
            for e in layout.site_edges(*pos):
                sign *= -1 if outcomes[e] else +1
        got = code_tab.stabilizer_group_contains(transported)
        if got != sign:
            failures.append({"check": f"{kind}{pos}", "got": got, "want": sign})
    return TeleportReport(not failures, failures, outcomes, len(checks))
