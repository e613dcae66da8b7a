"""Stabilizer tableau backend: Clifford gates and Pauli-basis measurements.

The tableau keeps ``n`` destabilizer rows (indices ``0..n-1``) and ``n``
stabilizer rows (``n..2n-1``), each a bit-packed Pauli with a sign bit.
Row ``i`` of the destabilizers anticommutes with stabilizer row ``i`` and
commutes with every other stabilizer row; all updates preserve this
pairing, which is what makes measurement updates O(n*w) word operations.

Measurement handles X, Y and Z observables through one code path: an
observable that anticommutes with some stabilizer row gives a fair random
(or forced) outcome and a pivot row replacement; otherwise the outcome is
read off deterministically from a destabilizer-selected product of
stabilizer rows, before any randomness is consumed.

Phases are tracked internally modulo 4 (products of rows pass through
``+/-i``); every exposed row sign is real.
"""
from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from .errors import CapacityError, ValidationError, VerificationError
from .graphs import Graph
from .pauli import PauliString, n_words, symplectic_rank, unpack_bits
from .rng import OutcomeSource, as_outcome_source

_ONE = np.uint64(1)

_OBS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

# Debug mode: re-assert commutation structure and rank after every gate and
# measurement.  Costs O(n^2) per operation, so it is off by default.
DEBUG_CHECKS = False


class Tableau:
    """Mutable stabilizer + destabilizer tableau for ``n`` qubits."""

    __slots__ = ("n", "w", "xs", "zs", "signs")

    def __init__(self, n: int):
        self.n = int(n)
        self.w = n_words(self.n)
        self.xs = np.zeros((2 * self.n, self.w), dtype=np.uint64)
        self.zs = np.zeros((2 * self.n, self.w), dtype=np.uint64)
        self.signs = np.zeros(2 * self.n, dtype=np.uint8)

    # -- construction -----------------------------------------------------

    @classmethod
    def zero_state(cls, n: int) -> "Tableau":
        """|0...0>: stabilizers Z_k, destabilizers X_k."""
        t = cls(n)
        for k in range(n):
            w, m = k >> 6, _ONE << np.uint64(k & 63)
            t.xs[k, w] |= m          # destabilizer X_k
            t.zs[n + k, w] |= m      # stabilizer Z_k
        return t

    @classmethod
    def plus_state(cls, n: int) -> "Tableau":
        """|+...+>: stabilizers X_k, destabilizers Z_k."""
        t = cls(n)
        for k in range(n):
            w, m = k >> 6, _ONE << np.uint64(k & 63)
            t.zs[k, w] |= m          # destabilizer Z_k
            t.xs[n + k, w] |= m      # stabilizer X_k
        return t

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n, t.w = self.n, self.w
        t.xs = self.xs.copy()
        t.zs = self.zs.copy()
        t.signs = self.signs.copy()
        return t

    # -- row access -------------------------------------------------------

    def stabilizer_row(self, i: int) -> PauliString:
        return PauliString(self.n, self.xs[self.n + i].copy(), self.zs[self.n + i].copy(),
                           -1 if self.signs[self.n + i] else +1)

    def destabilizer_row(self, i: int) -> PauliString:
        return PauliString(self.n, self.xs[i].copy(), self.zs[i].copy(),
                           -1 if self.signs[i] else +1)

    def stabilizer_rows(self) -> list[PauliString]:
        return [self.stabilizer_row(i) for i in range(self.n)]

    def dump(self) -> str:
        """Golden-test text form: one stabilizer row per line."""
        return "\n".join(p.to_text() for p in self.stabilizer_rows())

    # -- internal word-parallel helpers ------------------------------------

    def _col_bits(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """(x, z) bits of column ``q`` for all 2n rows, as uint64 0/1."""
        w, b = q >> 6, np.uint64(q & 63)
        return (self.xs[:, w] >> b) & _ONE, (self.zs[:, w] >> b) & _ONE

    def _mul_rows(self, rows: np.ndarray, px: np.ndarray, pz: np.ndarray,
                  psign: int) -> None:
        """Left-multiply the Pauli (px, pz, psign) into each row in ``rows``.

        Phase bookkeeping is word-parallel: count +i and -i qubit
        contributions, fold with both sign bits, and require a real result.
        """
        if rows.size == 0:
            return
        x2 = self.xs[rows]
        z2 = self.zs[rows]
        plus = (px & ~pz & x2 & z2) | (px & pz & ~x2 & z2) | (~px & pz & x2 & ~z2)
        anti = (px & z2) ^ (pz & x2)
        minus = anti & ~plus
        cnt = (np.bitwise_count(plus).sum(axis=1).astype(np.int64)
               - np.bitwise_count(minus).sum(axis=1).astype(np.int64))
        phase = (cnt + 2 * (int(psign) + self.signs[rows].astype(np.int64))) % 4
        if np.any(phase % 2):
            raise VerificationError("row product produced an imaginary phase")
        self.signs[rows] = (phase // 2).astype(np.uint8)
        self.xs[rows] = x2 ^ px
        self.zs[rows] = z2 ^ pz

    # -- Clifford gates -----------------------------------------------------

    def apply_clifford(self, gate: str, targets: Sequence[int]) -> "Tableau":
        """Conjugate every row by the gate; mutates and returns self."""
        targets = [int(q) for q in targets]
        for q in targets:
            if not (0 <= q < self.n):
                raise ValidationError(f"target {q} out of range")
        if len(set(targets)) != len(targets):
            raise ValidationError("targets must be distinct")

        one_qubit = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "CZ": 2, "CNOT": 2}
        if gate not in one_qubit:
            raise ValidationError(f"unsupported gate {gate!r}")
        if len(targets) != one_qubit[gate]:
            raise ValidationError(f"{gate} takes {one_qubit[gate]} target(s)")

        if gate in ("H", "S", "X", "Y", "Z"):
            q = targets[0]
            w, b = q >> 6, np.uint64(q & 63)
            xcol = (self.xs[:, w] >> b) & _ONE
            zcol = (self.zs[:, w] >> b) & _ONE
            if gate == "H":
                self.signs ^= (xcol & zcol).astype(np.uint8)
                self.xs[:, w] ^= (xcol ^ zcol) << b
                self.zs[:, w] ^= (xcol ^ zcol) << b
            elif gate == "S":
                self.signs ^= (xcol & zcol).astype(np.uint8)
                self.zs[:, w] ^= xcol << b
            elif gate == "X":
                self.signs ^= zcol.astype(np.uint8)
            elif gate == "Z":
                self.signs ^= xcol.astype(np.uint8)
            else:  # Y
                self.signs ^= (xcol ^ zcol).astype(np.uint8)
            if DEBUG_CHECKS:
                self.check_invariants()
            return self

        a, b = targets
        wa, ba = a >> 6, np.uint64(a & 63)
        wb, bb = b >> 6, np.uint64(b & 63)
        xa = (self.xs[:, wa] >> ba) & _ONE
        za = (self.zs[:, wa] >> ba) & _ONE
        xb = (self.xs[:, wb] >> bb) & _ONE
        zb = (self.zs[:, wb] >> bb) & _ONE
        if gate == "CNOT":
            self.signs ^= (xa & zb & (xb ^ za ^ _ONE)).astype(np.uint8)
            self.xs[:, wb] ^= xa << bb
            self.zs[:, wa] ^= zb << ba
        else:  # CZ
            self.signs ^= (xa & xb & (za ^ zb)).astype(np.uint8)
            self.zs[:, wa] ^= xb << ba
            self.zs[:, wb] ^= xa << bb
        if DEBUG_CHECKS:
            self.check_invariants()
        return self

    # -- measurement --------------------------------------------------------

    def measure_pauli(self, basis: str, qubit: int,
                      randomness: Union[int, OutcomeSource, None] = None,
                      forced: Optional[int] = None) -> int:
        """Measure X/Y/Z on one qubit in place; returns the outcome bit.

        Deterministic outcomes are detected before any randomness is drawn,
        so a fixed seed yields the same trace whatever the branch structure.
        ``forced`` (or a forced entry in an OutcomeSource keyed by qubit)
        pins the outcome of a balanced measurement and raises
        ContradictionError against a conflicting deterministic outcome.
        """
        if basis not in _OBS_BITS:
            raise ValidationError(f"basis must be X, Y or Z, got {basis!r}")
        if not (0 <= qubit < self.n):
            raise ValidationError(f"qubit {qubit} out of range")
        src = as_outcome_source(randomness,
                                forced=None if forced is None else {qubit: forced})
        xo, zo = _OBS_BITS[basis]

        xcol, zcol = self._col_bits(qubit)
        if xo and zo:
            anti = xcol ^ zcol
        elif xo:
            anti = zcol
        else:
            anti = xcol
        anti = anti.astype(bool)

        stab_anti = np.flatnonzero(anti[self.n:])
        if stab_anti.size:
            p = self.n + int(stab_anti[0])
            m = src.draw(qubit)
            rows = np.flatnonzero(anti)
            rows = rows[(rows != p) & (rows != p - self.n)]
            self._mul_rows(rows, self.xs[p].copy(), self.zs[p].copy(),
                           int(self.signs[p]))
            # old pivot becomes the paired destabilizer; pivot becomes +/-P
            self.xs[p - self.n] = self.xs[p]
            self.zs[p - self.n] = self.zs[p]
            self.signs[p - self.n] = self.signs[p]
            self.xs[p] = 0
            self.zs[p] = 0
            w, bmask = qubit >> 6, _ONE << np.uint64(qubit & 63)
            if xo:
                self.xs[p, w] |= bmask
            if zo:
                self.zs[p, w] |= bmask
            self.signs[p] = m
            if DEBUG_CHECKS:
                self.check_invariants()
            return m

        m_det = self._deterministic_outcome(anti, qubit, xo, zo)
        return src.check_deterministic(qubit, m_det)

    def outcome_is_random(self, basis: str, qubit: int) -> bool:
        """True when measuring the observable would give a fair coin."""
        if basis not in _OBS_BITS:
            raise ValidationError(f"basis must be X, Y or Z, got {basis!r}")
        if not (0 <= qubit < self.n):
            raise ValidationError(f"qubit {qubit} out of range")
        xo, zo = _OBS_BITS[basis]
        xcol, zcol = self._col_bits(qubit)
        if xo and zo:
            anti = xcol ^ zcol
        elif xo:
            anti = zcol
        else:
            anti = xcol
        return bool(np.any(anti[self.n:]))

    def _stab_row_product(self, sel: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
        """Product of the selected stabilizer rows (they all commute).

        Balanced pairwise reduction so the phase bookkeeping stays
        word-parallel and row-parallel; returns (x, z, i-exponent mod 4).
        """
        if sel.size == 0:
            return (np.zeros(self.w, dtype=np.uint64),
                    np.zeros(self.w, dtype=np.uint64), 0)
        idx = self.n + sel
        xs = self.xs[idx]
        zs = self.zs[idx]
        ph = (2 * self.signs[idx].astype(np.int64)) % 4
        while xs.shape[0] > 1:
            k = xs.shape[0] & ~1
            x1, z1 = xs[0:k:2], zs[0:k:2]
            x2, z2 = xs[1:k:2], zs[1:k:2]
            plus = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2)
            anti = (x1 & z2) ^ (z1 & x2)
            minus = anti & ~plus
            cnt = (np.bitwise_count(plus).sum(axis=1).astype(np.int64)
                   - np.bitwise_count(minus).sum(axis=1).astype(np.int64))
            newph = (ph[0:k:2] + ph[1:k:2] + cnt) % 4
            newx = x1 ^ x2
            newz = z1 ^ z2
            if xs.shape[0] & 1:
                newx = np.concatenate([newx, xs[-1:]])
                newz = np.concatenate([newz, zs[-1:]])
                newph = np.concatenate([newph, ph[-1:]])
            xs, zs, ph = newx, newz, newph
        return xs[0], zs[0], int(ph[0]) % 4

    def _deterministic_outcome(self, anti: np.ndarray, qubit: int,
                               xo: int, zo: int) -> int:
        """Product of stabilizer rows selected by anticommuting destabilizers."""
        sel = np.flatnonzero(anti[:self.n])
        acc_x, acc_z, phase = self._stab_row_product(sel)
        w, bmask = qubit >> 6, _ONE << np.uint64(qubit & 63)
        exp_x = bmask if xo else np.uint64(0)
        exp_z = bmask if zo else np.uint64(0)
        ok = (acc_x[w] == exp_x and acc_z[w] == exp_z
              and not np.any(np.delete(acc_x, w)) and not np.any(np.delete(acc_z, w))
              and phase % 2 == 0)
        if not ok:
            raise VerificationError("deterministic-outcome reconstruction failed")
        return phase // 2

    # -- group queries ------------------------------------------------------

    def stabilizer_group_contains(self, p: PauliString) -> Optional[int]:
        """Membership of ``+/-p`` in the stabilizer group.

        Returns the sign ``s`` such that ``s*p`` is a group member, or None.
        Decided by the destabilizer pairing: the candidate subset of
        generators is read off from which destabilizers anticommute with
        ``p``, then the reconstructed product is compared bit-for-bit.
        """
        if p.n != self.n:
            raise ValidationError("qubit counts differ")
        anti = (np.bitwise_count((self.xs & p.z) ^ (self.zs & p.x)).sum(axis=1)
                & 1).astype(bool)
        if np.any(anti[self.n:]):
            return None
        sel = np.flatnonzero(anti[:self.n])
        acc_x, acc_z, phase = self._stab_row_product(sel)
        if not (np.array_equal(acc_x, p.x) and np.array_equal(acc_z, p.z)):
            return None
        if phase % 2:
            raise VerificationError("group member with imaginary phase")
        rel = (phase // 2) ^ p.sign_bit
        return -1 if rel else +1

    def check_invariants(self) -> None:
        """Assert commutation structure and full rank; debug aid."""
        for i in range(self.n):
            si = self.stabilizer_row(i)
            for j in range(i + 1, self.n):
                if not si.commutes_with(self.stabilizer_row(j)):
                    raise VerificationError(f"stabilizer rows {i},{j} anticommute")
            for j in range(self.n):
                dj = self.destabilizer_row(j)
                want_anti = (i == j)
                if si.commutes_with(dj) == want_anti:
                    raise VerificationError(
                        f"destabilizer pairing broken at ({i},{j})")
        if symplectic_rank(self.stabilizer_rows()) != self.n:
            raise VerificationError("stabilizer rows not independent")


def graph_state_tableau(graph: Graph) -> Tableau:
    """Tableau of |G>: stabilizer row j is X_j Z_{N(j)}, destabilizer Z_j."""
    n = graph.n_vertices
    t = Tableau(n)
    for j in range(n):
        w, m = j >> 6, _ONE << np.uint64(j & 63)
        t.zs[j, w] |= m           # destabilizer Z_j
        t.xs[n + j, w] |= m       # stabilizer X_j ...
    for a, b in graph.edges:
        wa, ma = a >> 6, _ONE << np.uint64(a & 63)
        wb, mb = b >> 6, _ONE << np.uint64(b & 63)
        t.zs[n + a, wb] |= mb     # ... dressed with Z on each neighbor
        t.zs[n + b, wa] |= ma
    return t


def apply_clifford(t: Tableau, gate: str, targets: Sequence[int]) -> Tableau:
    """Functional wrapper: returns an updated copy, input untouched."""
    return t.copy().apply_clifford(gate, targets)


def measure_pauli(t: Tableau, basis: str, qubit: int,
                  randomness: Union[int, OutcomeSource, None] = None,
                  forced: Optional[int] = None) -> tuple[int, Tableau]:
    """Functional wrapper around ``Tableau.measure_pauli``."""
    out = t.copy()
    m = out.measure_pauli(basis, qubit, randomness, forced)
    return m, out


def stabilizer_group_contains(t: Tableau, p: PauliString) -> Optional[int]:
    """Functional wrapper around ``Tableau.stabilizer_group_contains``."""
    return t.stabilizer_group_contains(p)


def tableau_to_statevector(t: Tableau, cap: int = 14):
    """Dense unit vector stabilized by all rows (global phase arbitrary).

    Finds one basis state of nonzero amplitude by Z-measuring a scratch
    copy, then applies the stabilizer projectors (I+S)/2 and normalizes.
    """
    from .statevector import StateVector

    if t.n > cap:
        raise CapacityError(f"{t.n} qubits exceeds statevector cap {cap}")
    n = t.n
    scratch = t.copy()
    src = OutcomeSource.from_seed(0)
    support = 0
    for q in range(n):
        m = scratch.measure_pauli("Z", q, src)
        support |= m << (n - 1 - q)

    vec = np.zeros(1 << n, dtype=np.complex128)
    vec[support] = 1.0
    idx = np.arange(1 << n, dtype=np.int64)
    for i in range(n):
        row = t.stabilizer_row(i)
        xb = unpack_row_mask(row.x, n)
        zb = unpack_row_mask(row.z, n)
        y_count = int(np.bitwise_count(row.x & row.z).sum())
        coeff = row.sign * (1j ** (y_count % 4))
        phases = 1 - 2 * (np.bitwise_count(idx & zb) & 1).astype(np.float64)
        moved = (coeff * phases * vec)[idx ^ xb]
        vec = (vec + moved) / 2.0
    norm = np.linalg.norm(vec)
    if norm < 1e-9:
        raise VerificationError("projector product vanished; tableau inconsistent")
    return StateVector(n, vec / norm)


def unpack_row_mask(words: np.ndarray, n: int) -> int:
    """Packed qubit bits -> dense integer mask with qubit 0 most significant."""
    mask = 0
    for k in range(n):
        if (int(words[k >> 6]) >> (k & 63)) & 1:
            mask |= 1 << (n - 1 - k)
    return mask


def extract_subtableau(t: Tableau, keep: Sequence[int]) -> Tableau:
    """Tableau of the state restricted to ``keep`` (in the given order).

    Requires the state to be a product across the cut (true after the
    discarded qubits have been measured).  Stabilizer generators supported
    only on ``keep`` are found by sign-tracked Gaussian elimination; fresh
    destabilizers are completed symplectically.
    """
    keep = [int(q) for q in keep]
    if len(set(keep)) != len(keep):
        raise ValidationError("keep list has duplicates")
    for q in keep:
        if not (0 <= q < t.n):
            raise ValidationError(f"qubit {q} out of range")
    drop = [q for q in range(t.n) if q not in set(keep)]

    rows = [t.stabilizer_row(i) for i in range(t.n)]
    used = [False] * t.n
    for q in drop:
        for which in ("x", "z"):
            pivot = None
            for i, r in enumerate(rows):
                if used[i]:
                    continue
                bits = r.x if which == "x" else r.z
                if (int(bits[q >> 6]) >> (q & 63)) & 1:
                    pivot = i
                    break
            if pivot is None:
                continue
            used[pivot] = True
            for i, r in enumerate(rows):
                if i == pivot or used[i]:
                    continue
                bits = r.x if which == "x" else r.z
                if (int(bits[q >> 6]) >> (q & 63)) & 1:
                    rows[i] = rows[pivot] * r

    kept_rows = []
    for i, r in enumerate(rows):
        if used[i]:
            continue
        for q in drop:
            if ((int(r.x[q >> 6]) >> (q & 63)) & 1) or ((int(r.z[q >> 6]) >> (q & 63)) & 1):
                raise VerificationError(
                    "state is not a product across the requested cut")
        kept_rows.append(r)
    if len(kept_rows) != len(keep):
        raise VerificationError(
            f"expected {len(keep)} generators on the kept qubits, "
            f"found {len(kept_rows)}")

    nk = len(keep)
    stabs = []
    for r in kept_rows:
        xb = [(int(r.x[q >> 6]) >> (q & 63)) & 1 for q in keep]
        zb = [(int(r.z[q >> 6]) >> (q & 63)) & 1 for q in keep]
        stabs.append(PauliString.from_bits(xb, zb, r.sign))

    destabs = _complete_destabilizers(stabs, nk)
    out = Tableau(nk)
    for i in range(nk):
        out.xs[i] = destabs[i].x
        out.zs[i] = destabs[i].z
        out.signs[i] = 0
        out.xs[nk + i] = stabs[i].x
        out.zs[nk + i] = stabs[i].z
        out.signs[nk + i] = stabs[i].sign_bit
    return out


def _complete_destabilizers(stabs: list[PauliString], n: int) -> list[PauliString]:
    """Solve for rows pairing symplectically with the given stabilizers.

    d_i must anticommute with stabs[i] only, and destabilizers must commute
    pairwise; signs are irrelevant and set to +.
    """
    m = np.zeros((n, 2 * n), dtype=np.uint8)
    for j, s in enumerate(stabs):
        m[j, :n] = unpack_bits(s.z, n)      # coefficient of d_x
        m[j, n:] = unpack_bits(s.x, n)      # coefficient of d_z
    aug = np.concatenate([m, np.eye(n, dtype=np.uint8)], axis=1)
    pivots = []
    r = 0
    for c in range(2 * n):
        rows_with = np.flatnonzero(aug[r:, c]) + r
        if rows_with.size == 0:
            continue
        if rows_with[0] != r:
            aug[[r, rows_with[0]]] = aug[[rows_with[0], r]]
        for i in range(n):
            if i != r and aug[i, c]:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == n:
            break
    if r < n:
        raise VerificationError("stabilizer generators are not independent")

    destabs = []
    for i in range(n):
        rhs = aug[:, 2 * n + i]          # solve M d = e_i
        d = np.zeros(2 * n, dtype=np.uint8)
        for row_idx, c in enumerate(pivots):
            d[c] = rhs[row_idx]
        destabs.append(PauliString.from_bits(d[:n], d[n:], +1))

    for i in range(n):
        for j in range(i + 1, n):
            if not destabs[i].commutes_with(destabs[j]):
                prod = destabs[j] * stabs[i]
                destabs[j] = PauliString(n, prod.x, prod.z, +1)
    return destabs
