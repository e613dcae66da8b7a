"""Dense complex statevector backend.

This is the exact oracle every other module is checked against at small
sizes.  Conventions, fixed once for the whole package:

* qubit 0 is the most significant index bit, so basis index
  ``b = z_0 z_1 ... z_{n-1}`` read left to right;
* equatorial measurement at angle ``theta`` uses the basis
  ``|+_theta> = (|0> + e^{i theta}|1>)/sqrt(2)`` (outcome 0) and
  ``|-_theta> = (|0> - e^{i theta}|1>)/sqrt(2)`` (outcome 1);
* Z-plane outcome m projects onto ``|m>``;
* a measured qubit stays in place until an explicit ``compact``.

Default capacity is 22 qubits; operations beyond a cap fail fast with
CapacityError instead of thrashing memory.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CapacityError, ContradictionError, ValidationError
from .graphs import Graph
from .rng import OutcomeSource, as_outcome_source

DEFAULT_CAP = 22
NORM_TOL = 1e-12
FORCE_TOL = 1e-12


class StateVector:
    """n-qubit pure state as 2^n complex amplitudes."""

    __slots__ = ("n", "amps")

    def __init__(self, n: int, amps: np.ndarray):
        self.n = int(n)
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValidationError(
                f"amplitude array has shape {amps.shape}, expected {(1 << self.n,)}")
        self.amps = amps

    @classmethod
    def computational(cls, n: int, index: int = 0) -> "StateVector":
        v = np.zeros(1 << n, dtype=np.complex128)
        v[index] = 1.0
        return cls(n, v)

    @classmethod
    def plus_state(cls, n: int) -> "StateVector":
        v = np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)
        return cls(n, v)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check_normalized(self) -> None:
        if abs(self.norm() - 1.0) > NORM_TOL * 10:
            raise ValidationError(f"state norm drifted to {self.norm()}")

    def _bitpos(self, qubit: int) -> int:
        if not (0 <= qubit < self.n):
            raise ValidationError(f"qubit {qubit} out of range")
        return self.n - 1 - qubit

    def _split(self, qubit: int) -> tuple[np.ndarray, np.ndarray, tuple]:
        """View amplitudes as (left, 2, right) blocks around one qubit."""
        p = self._bitpos(qubit)
        shaped = self.amps.reshape(1 << (self.n - 1 - p), 2, 1 << p)
        return shaped[:, 0, :], shaped[:, 1, :], shaped.shape


def graph_state_vector(graph: Graph, cap: int = DEFAULT_CAP) -> StateVector:
    """|G> = prod_edges CZ |+>^n; amplitudes are exactly +/- 2^{-n/2}."""
    n = graph.n_vertices
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds cap {cap}")
    state = StateVector.plus_state(n)
    for a, b in graph.edges:
        apply_cz(state, a, b)
    return state


def apply_cz(state: StateVector, a: int, b: int) -> StateVector:
    """In-place CZ; sign flip where both qubits read 1."""
    if a == b:
        raise ValidationError("CZ targets must differ")
    pa, pb = state._bitpos(a), state._bitpos(b)
    idx = np.arange(state.amps.size, dtype=np.int64)
    both = ((idx >> pa) & (idx >> pb) & 1).astype(bool)
    state.amps[both] *= -1.0
    return state


def apply_local(state: StateVector, u: np.ndarray, qubit: int) -> StateVector:
    """In-place 2x2 unitary on one qubit; validates unitarity to 1e-12."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValidationError("local gate must be a 2x2 matrix")
    if not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12):
        raise ValidationError("matrix is not unitary within 1e-12")
    a0, a1, _ = state._split(qubit)
    new0 = u[0, 0] * a0 + u[0, 1] * a1
    new1 = u[1, 0] * a0 + u[1, 1] * a1
    a0[:] = new0
    a1[:] = new1
    return state


def apply_pauli(state: StateVector, kind: str, qubit: int) -> StateVector:
    """X/Y/Z without the generic-matrix overhead."""
    a0, a1, _ = state._split(qubit)
    if kind == "X":
        tmp = a0.copy()
        a0[:] = a1
        a1[:] = tmp
    elif kind == "Z":
        a1 *= -1.0
    elif kind == "Y":
        tmp = a0.copy()
        a0[:] = -1j * a1
        a1[:] = 1j * tmp
    else:
        raise ValidationError(f"kind must be X, Y or Z, got {kind!r}")
    return state


def _projection_weight(state: StateVector, qubit: int, plane: str, theta: float,
                       m: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Probability of outcome ``m`` plus the two collapsed half-blocks."""
    a0, a1, _ = state._split(qubit)
    if plane == "Z":
        if m == 0:
            return float(np.vdot(a0, a0).real), a0.copy(), np.zeros_like(a1)
        return float(np.vdot(a1, a1).real), np.zeros_like(a0), a1.copy()
    if plane != "XY":
        raise ValidationError(f"plane must be XY or Z, got {plane!r}")
    phase = np.exp(-1j * theta)
    sgn = 1.0 if m == 0 else -1.0
    c = (a0 + sgn * phase * a1) / math.sqrt(2.0)
    prob = float(np.vdot(c, c).real)
    # collapsed qubit state |+/-_theta>: (|0> +/- e^{i theta}|1>)/sqrt(2)
    new0 = c / math.sqrt(2.0)
    new1 = sgn * np.conj(phase) * c / math.sqrt(2.0)
    return prob, new0, new1


def measure_angle(state: StateVector, qubit: int, plane: str, theta: float,
                  randomness: Union[int, OutcomeSource, None] = None,
                  forced: Optional[int] = None) -> tuple[int, StateVector]:
    """Projective measurement in the XY plane at ``theta`` (or the Z basis).

    Returns (outcome, post-state); the input is untouched and the measured
    qubit remains in place, collapsed onto the observed basis vector.
    Forcing an outcome of probability below 1e-12 raises ContradictionError.
    """
    src = as_outcome_source(randomness,
                            forced=None if forced is None else {qubit: forced})
    out = state.copy()
    p0, new0_0, new0_1 = _projection_weight(out, qubit, plane, theta, 0)

    if src.has_forced(qubit):
        m = src.forced[qubit] & 1
    else:
        if p0 > 1.0 - FORCE_TOL:
            m = src.check_deterministic(qubit, 0)
        elif p0 < FORCE_TOL:
            m = src.check_deterministic(qubit, 1)
        else:
            m = src.draw(qubit)

    if m == 0:
        prob, n0, n1 = p0, new0_0, new0_1
    else:
        prob, n0, n1 = _projection_weight(out, qubit, plane, theta, 1)
    if prob < FORCE_TOL:
        raise ContradictionError(
            f"outcome {m} at qubit {qubit} has probability {prob:.3e}")
    a0, a1, _ = out._split(qubit)
    scale = 1.0 / math.sqrt(prob)
    a0[:] = n0 * scale
    a1[:] = n1 * scale
    return m, out


def measure_probability(state: StateVector, qubit: int, plane: str, theta: float,
                        m: int) -> float:
    """Probability of outcome ``m`` without collapsing."""
    p, _, _ = _projection_weight(state, qubit, plane, theta, m)
    return p


class ProductState:
    """Unnormalized per-qubit coefficient pairs (c0, c1)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[tuple[complex, complex]]):
        self.coeffs = [(complex(c0), complex(c1)) for c0, c1 in coeffs]
        for i, (c0, c1) in enumerate(self.coeffs):
            if c0 == 0 and c1 == 0:
                raise ValidationError(f"qubit {i} has both coefficients zero")

    @property
    def n(self) -> int:
        return len(self.coeffs)


def overlap(state: StateVector, product: ProductState) -> complex:
    """Bilinear contraction sum_b (prod_k c_{k, b_k}) amp_b.

    The product coefficients enter **unconjugated** (the bra is built from
    the given numbers as written), so with real coefficients this is the
    plain real pairing used by the partition-function identity.  Cost is
    O(2^n) by contracting one qubit at a time, never forming 2^n x 2^n
    objects.
    """
    if product.n != state.n:
        raise ValidationError("qubit counts differ")
    acc = state.amps
    for k in range(state.n - 1, -1, -1):
        c0, c1 = product.coeffs[k]
        half = acc.reshape(-1, 2)
        acc = c0 * half[:, 0] + c1 * half[:, 1]
    return complex(acc[0])


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized inputs."""
    if a.n != b.n:
        raise ValidationError("qubit counts differ")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def apply_pauli_string(state: StateVector, pauli) -> StateVector:
    """New state pauli @ state, for a packed PauliString of matching size."""
    if pauli.n != state.n:
        raise ValidationError("qubit counts differ")
    n = state.n
    xmask = zmask = 0
    ycount = 0
    for k in range(n):
        xb = (int(pauli.x[k >> 6]) >> (k & 63)) & 1
        zb = (int(pauli.z[k >> 6]) >> (k & 63)) & 1
        if xb:
            xmask |= 1 << (n - 1 - k)
        if zb:
            zmask |= 1 << (n - 1 - k)
        ycount += xb & zb
    idx = np.arange(state.amps.size, dtype=np.int64)
    phases = 1.0 - 2.0 * (np.bitwise_count(idx & zmask) & 1)
    coeff = pauli.sign * (1j ** (ycount % 4))
    return StateVector(n, (coeff * phases * state.amps)[idx ^ xmask])


def pauli_expectation(state: StateVector, pauli) -> complex:
    """<state| pauli |state>."""
    return complex(np.vdot(state.amps, apply_pauli_string(state, pauli).amps))


def compact(state: StateVector, qubit: int) -> StateVector:
    """Remove a qubit that is in a product state with the rest.

    Picks the dominant local branch deterministically; raises if the qubit
    is still entangled (residual above 1e-9).
    """
    a0, a1, _ = state._split(qubit)
    v0 = a0.reshape(-1)
    v1 = a1.reshape(-1)
    n0 = float(np.linalg.norm(v0))
    n1 = float(np.linalg.norm(v1))
    major, minor, nmaj = (v0, v1, n0) if n0 >= n1 else (v1, v0, n1)
    if nmaj < 1e-12:
        raise ValidationError("qubit amplitudes vanish; state not normalized")
    coef = np.vdot(major, minor) / (nmaj * nmaj)
    residual = float(np.linalg.norm(minor - coef * major))
    if residual > 1e-9:
        raise ValidationError(
            f"qubit {qubit} is still entangled (residual {residual:.2e})")
    return StateVector(state.n - 1, major / nmaj)


def extract_qubits(state: StateVector, keep: Sequence[int]) -> StateVector:
    """State restricted to ``keep`` (reordered as given); the discarded
    qubits must each be in a product state with the rest."""
    keep = [int(q) for q in keep]
    if len(set(keep)) != len(keep):
        raise ValidationError("keep list has duplicates")
    cur = state
    labels = list(range(state.n))
    for q in sorted((set(range(state.n)) - set(keep)), reverse=True):
        cur = compact(cur, labels.index(q))
        labels.remove(q)
    perm = [labels.index(q) for q in keep]
    shaped = cur.amps.reshape([2] * cur.n)
    reordered = np.transpose(shaped, perm).reshape(-1)
    return StateVector(cur.n, reordered)


def permute_qubits(state: StateVector, order: Sequence[int]) -> StateVector:
    """New state whose qubit k is the input's qubit order[k]."""
    order = [int(q) for q in order]
    if sorted(order) != list(range(state.n)):
        raise ValidationError("order must be a permutation of all qubits")
    shaped = state.amps.reshape([2] * state.n)
    return StateVector(state.n, np.transpose(shaped, order).reshape(-1))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """a (qubits first) tensored with b."""
    return StateVector(a.n + b.n, np.kron(a.amps, b.amps))


def dump_binary(state: StateVector) -> bytes:
    """Golden-test format: u64 qubit count, then little-endian (re, im) f64."""
    header = np.array([state.n], dtype="<u8").tobytes()
    inter = np.empty(2 * state.amps.size, dtype="<f8")
    inter[0::2] = state.amps.real
    inter[1::2] = state.amps.imag
    return header + inter.tobytes()


def load_binary(blob: bytes) -> StateVector:
    n = int(np.frombuffer(blob[:8], dtype="<u8")[0])
    flat = np.frombuffer(blob[8:], dtype="<f8")
    if flat.size != 2 << n:
        raise ValidationError("binary dump has wrong length")
    return StateVector(n, flat[0::2] + 1j * flat[1::2])
