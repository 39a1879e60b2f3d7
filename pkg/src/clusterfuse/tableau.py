"""Binary-symplectic stabilizer simulation.

A state on n qubits is held as n generator rows, each an X bit-vector, a
Z bit-vector and a sign bit: row i represents
``(-1)^sign[i] * prod_j P_j`` with ``P_j`` the literal Pauli letter given
by ``(x[i,j], z[i,j])`` (``11`` is Y).  Rows are kept independent and
mutually commuting.

No destabilizer rows are stored; deterministic measurements are resolved
by a GF(2) solve over the generator matrix instead.  For the sizes this
package handles (a few tens of qubits) that is plenty fast and keeps the
representation identical to its on-paper definition.

Phase bookkeeping for row products follows the Aaronson-Gottesman rowsum
rules (PRA 70, 052328): multiplying two rows accumulates a power of i per
qubit which always lands back on a +/-1 overall sign for commuting rows.
"""

from __future__ import annotations

import numpy as np


class TableauError(ValueError):
    pass


def _g_exponent(x1, z1, x2, z2):
    """Power of i contributed per qubit when multiplying row1 * row2."""
    # vectorized Aaronson-Gottesman g() over all qubit positions
    out = np.zeros(x1.shape, dtype=np.int64)
    m11 = (x1 == 1) & (z1 == 1)
    m10 = (x1 == 1) & (z1 == 0)
    m01 = (x1 == 0) & (z1 == 1)
    out[m11] = (z2 - x2)[m11]
    out[m10] = (z2 * (2 * x2 - 1))[m10]
    out[m01] = (x2 * (1 - 2 * z2))[m01]
    return int(out.sum())


class StabilizerTableau:
    """n commuting independent Pauli generators with signs."""

    __slots__ = ("x", "z", "sign")

    def __init__(self, x, z, sign):
        self.x = np.asarray(x, dtype=np.uint8) % 2
        self.z = np.asarray(z, dtype=np.uint8) % 2
        self.sign = np.asarray(sign, dtype=np.uint8) % 2

    @property
    def n(self):
        return self.x.shape[1] if self.x.ndim == 2 else 0

    @property
    def n_rows(self):
        return self.x.shape[0]

    @classmethod
    def plus_states(cls, n):
        """|+>^n : generators X_i."""
        eye = np.eye(n, dtype=np.uint8)
        return cls(eye, np.zeros((n, n), dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    def copy(self):
        return StabilizerTableau(self.x.copy(), self.z.copy(), self.sign.copy())

    # -- row algebra -------------------------------------------------------

    def _rowsum(self, i, j):
        """row_i <- row_j * row_i with exact sign tracking."""
        ph = 2 * (int(self.sign[i]) + int(self.sign[j]))
        ph += _g_exponent(self.x[j].astype(np.int64), self.z[j].astype(np.int64),
                          self.x[i].astype(np.int64), self.z[i].astype(np.int64))
        if ph % 4 not in (0, 2):
            raise TableauError("row product is not Hermitian (anticommuting rows?)")
        self.sign[i] = (ph % 4) // 2
        self.x[i] ^= self.x[j]
        self.z[i] ^= self.z[j]

    def _product_of_rows(self, rows):
        """(x, z, sign) of the product of the given generator rows."""
        px = np.zeros(self.n, dtype=np.int64)
        pz = np.zeros(self.n, dtype=np.int64)
        ph = 0
        for r in rows:
            ph += 2 * int(self.sign[r])
            ph += _g_exponent(px, pz, self.x[r].astype(np.int64),
                              self.z[r].astype(np.int64))
            px ^= self.x[r]
            pz ^= self.z[r]
        if ph % 4 not in (0, 2):
            raise TableauError("non-Hermitian product")
        return px.astype(np.uint8), pz.astype(np.uint8), (ph % 4) // 2

    def _anticommuting_rows(self, px, pz):
        comm = (self.x @ pz + self.z @ px) % 2
        return np.flatnonzero(comm)

    def _solve_membership(self, px, pz):
        """Express the Pauli (px, pz) over the generator rows.

        Returns the row subset as an index array, or None if (px, pz) is
        not in the sign-stripped group.
        """
        a = np.concatenate([self.x, self.z], axis=1).T.astype(np.uint8)  # 2n x rows
        b = np.concatenate([px, pz]).astype(np.uint8)
        m, k = a.shape
        aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
        piv_cols = []
        row = 0
        for col in range(k):
            hit = np.flatnonzero(aug[row:, col] == 1)
            if hit.size == 0:
                piv_cols.append(-1)
                continue
            r = row + int(hit[0])
            if r != row:
                aug[[row, r]] = aug[[r, row]]
            elim = np.flatnonzero(aug[:, col] == 1)
            for e in elim:
                if e != row:
                    aug[e] ^= aug[row]
            piv_cols.append(row)
            row += 1
            if row == m:
                break
        # consistency: rows of aug with zero lhs must have zero rhs
        lhs_zero = ~aug[:, :k].any(axis=1)
        if np.any(aug[lhs_zero, k] == 1):
            return None
        sol = np.zeros(k, dtype=np.uint8)
        for col in range(k):
            if col < len(piv_cols) and piv_cols[col] >= 0:
                sol[col] = aug[piv_cols[col], k]
        return np.flatnonzero(sol)

    # -- Clifford gates ----------------------------------------------------

    def hadamard(self, q):
        self.sign ^= self.x[:, q] & self.z[:, q]
        tmp = self.x[:, q].copy()
        self.x[:, q] = self.z[:, q]
        self.z[:, q] = tmp

    def phase(self, q):
        """S gate."""
        self.sign ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def phase_dag(self, q):
        self.phase(q)
        self.pauli_z(q)

    def pauli_x(self, q):
        self.sign ^= self.z[:, q]

    def pauli_z(self, q):
        self.sign ^= self.x[:, q]

    def pauli_y(self, q):
        self.sign ^= self.x[:, q] ^ self.z[:, q]

    def cz(self, a, b):
        self.hadamard(b)
        self.cx(a, b)
        self.hadamard(b)

    def cx(self, c, t):
        self.sign ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    # -- measurement and surgery --------------------------------------------

    def measure_pauli(self, px, pz, rng=None, forced=None):
        """Measure a Pauli observable given by bit vectors (px, pz).

        Returns the outcome bit (0 for +1, 1 for -1).  ``forced`` picks the
        branch when the outcome is random and must match when it is
        deterministic.
        """
        px = np.asarray(px, dtype=np.uint8)
        pz = np.asarray(pz, dtype=np.uint8)
        anti = self._anticommuting_rows(px, pz)
        if anti.size:
            if forced is None:
                if rng is None:
                    raise TableauError("random outcome needs an rng or forced bit")
                outcome = int(rng.integers(0, 2))
            else:
                outcome = int(forced)
            p = int(anti[0])
            for r in anti[1:]:
                self._rowsum(int(r), p)
            self.x[p] = px
            self.z[p] = pz
            self.sign[p] = outcome
            return outcome
        rows = self._solve_membership(px, pz)
        if rows is None:
            raise TableauError("observable neither commutes into the group "
                               "nor anticommutes with it")
        gx, gz, gs = self._product_of_rows([int(r) for r in rows])
        if not (np.array_equal(gx, px) and np.array_equal(gz, pz)):
            raise TableauError("membership solve failed")
        outcome = int(gs)
        if forced is not None and int(forced) != outcome:
            raise TableauError(
                f"forced outcome {forced} contradicts deterministic value {outcome}")
        return outcome

    def measure_z(self, q, rng=None, forced=None):
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        pz[q] = 1
        return self.measure_pauli(px, pz, rng, forced)

    def measure_x(self, q, rng=None, forced=None):
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        px[q] = 1
        return self.measure_pauli(px, pz, rng, forced)

    def measure_y(self, q, rng=None, forced=None):
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        px[q] = 1
        pz[q] = 1
        return self.measure_pauli(px, pz, rng, forced)

    def add_plus_qubit(self):
        """Append a fresh qubit in |+>; returns its column index."""
        n, rows = self.n, self.n_rows
        self.x = np.concatenate([self.x, np.zeros((rows, 1), np.uint8)], axis=1)
        self.z = np.concatenate([self.z, np.zeros((rows, 1), np.uint8)], axis=1)
        new_x = np.zeros((1, n + 1), np.uint8)
        new_x[0, n] = 1
        self.x = np.concatenate([self.x, new_x], axis=0)
        self.z = np.concatenate([self.z, np.zeros((1, n + 1), np.uint8)], axis=0)
        self.sign = np.concatenate([self.sign, np.zeros(1, np.uint8)])
        return n

    def remove_collapsed(self, q, basis="Z"):
        """Drop a qubit that is in a definite single-qubit Pauli eigenstate.

        The group must contain +/- P_q for the given basis letter; the
        matching generator is isolated by row operations and deleted along
        with the qubit's columns.
        """
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        if basis == "Z":
            pz[q] = 1
        elif basis == "X":
            px[q] = 1
        elif basis == "Y":
            px[q] = 1
            pz[q] = 1
        else:
            raise TableauError(f"unsupported removal basis {basis}")
        if self._anticommuting_rows(px, pz).size:
            raise TableauError(f"qubit {q} is not collapsed in {basis}")
        rows = self._solve_membership(px, pz)
        if rows is None:
            raise TableauError(f"qubit {q} is not collapsed in {basis}")
        rows = [int(r) for r in rows]
        pivot = rows[0]
        for r in rows[1:]:
            self._rowsum(pivot, r)
        # pivot row is now exactly +/- P_q; clear its letter from the rest
        support = np.flatnonzero((self.x[:, q] | self.z[:, q]) == 1)
        for r in support:
            if r != pivot:
                self._rowsum(int(r), pivot)
        keep_rows = [r for r in range(self.n_rows) if r != pivot]
        keep_cols = [c for c in range(self.n) if c != q]
        self.x = self.x[np.ix_(keep_rows, keep_cols)]
        self.z = self.z[np.ix_(keep_rows, keep_cols)]
        self.sign = self.sign[keep_rows]

    # -- canonical form and comparison --------------------------------------

    def canonical(self, with_signs=True):
        """Row-reduced echelon form over the (x|z) matrix.

        Returns (matrix, signs) with rows sorted; two tableaus describe the
        same signed stabilizer group iff their canonical forms match, and
        the same group modulo Pauli conjugation iff the matrices match.
        """
        work = self.copy()
        m = work.n_rows
        cols = [("x", c) for c in range(work.n)] + [("z", c) for c in range(work.n)]
        row = 0
        for kind, c in cols:
            arr = work.x if kind == "x" else work.z
            hit = [r for r in range(row, m) if arr[r, c]]
            if not hit:
                continue
            r0 = hit[0]
            if r0 != row:
                work.x[[row, r0]] = work.x[[r0, row]]
                work.z[[row, r0]] = work.z[[r0, row]]
                work.sign[[row, r0]] = work.sign[[r0, row]]
            for r in range(m):
                if r != row and arr[r, c]:
                    work._rowsum(r, row)
            row += 1
            if row == m:
                break
        mat = np.concatenate([work.x, work.z], axis=1)
        if with_signs:
            return mat, work.sign.copy()
        return mat, None

    def same_group(self, other, up_to_signs=False):
        if self.n != other.n or self.n_rows != other.n_rows:
            return False
        m1, s1 = self.canonical(with_signs=not up_to_signs)
        m2, s2 = other.canonical(with_signs=not up_to_signs)
        if not np.array_equal(m1, m2):
            return False
        return up_to_signs or np.array_equal(s1, s2)

    def statevector(self, rng=None):
        """Dense unit vector stabilized by the group (global phase arbitrary).

        Projects a reference vector with prod (1 + s_i G_i)/2; reference
        vectors are tried until one survives the projection.
        """
        n = self.n
        if n > 16:
            raise TableauError("statevector extraction capped at 16 qubits")
        if self.n_rows != n:
            raise TableauError("need a full generating set")
        dim = 1 << n
        idx = np.arange(dim)
        trials = [0, dim - 1]
        if rng is not None:
            trials += [int(rng.integers(0, dim)) for _ in range(4)]
        trials += list(range(1, min(dim, 64)))
        for ref in trials:
            vec = np.zeros(dim, dtype=complex)
            vec[ref] = 1.0
            ok = True
            for r in range(n):
                gv = self._apply_pauli_dense(vec, r, idx)
                vec = 0.5 * (vec + (-1.0 if self.sign[r] else 1.0) * gv)
                nrm = np.linalg.norm(vec)
                if nrm < 1e-12:
                    ok = False
                    break
                vec /= nrm
            if ok:
                return vec
        raise TableauError("failed to extract a stabilized vector")

    def _apply_pauli_dense(self, vec, row, idx):
        """Apply generator ``row`` (without its sign) to a dense vector.

        Qubit 0 is the most significant bit, matching the kron ordering
        used across the package.
        """
        n = self.n
        xmask = 0
        for q in range(n):
            if self.x[row, q]:
                xmask |= 1 << (n - 1 - q)
        phase = np.ones(len(vec), dtype=complex)
        for q in range(n):
            bit = (idx >> (n - 1 - q)) & 1
            if self.x[row, q] and self.z[row, q]:
                # Y = i X Z: phase on the *source* amplitude
                phase = phase * np.where(bit, -1j, 1j)
            elif self.z[row, q]:
                phase = phase * np.where(bit, -1.0, 1.0)
        out = np.empty_like(vec)
        out[idx ^ xmask] = vec * phase
        return out


class TableauState:
    """Stabilizer backend with stable vertex labels.

    Mirrors the operation surface of :class:`clusterfuse.graph.GraphState`
    but runs everything through generic tableau measurements, so the two
    backends share no update rules and can check each other.  Vertex ids
    are allocated by the same monotonic scheme, which keeps parallel op
    sequences aligned.
    """

    _BASIS_BITS = {"Z": (0, 1), "X": (1, 0), "Y": (1, 1)}

    def __init__(self):
        self.tab = StabilizerTableau.plus_states(0)
        self.order = []          # column index -> vertex label
        self._next_id = 0

    def copy(self):
        ts = TableauState()
        ts.tab = self.tab.copy()
        ts.order = list(self.order)
        ts._next_id = self._next_id
        return ts

    @property
    def vertices(self):
        return set(self.order)

    def _col(self, v):
        try:
            return self.order.index(v)
        except ValueError:
            raise TableauError(f"vertex {v} absent") from None

    def add_plus(self):
        v = self._next_id
        self._next_id += 1
        self.tab.add_plus_qubit()
        self.order.append(v)
        return v

    def add_bell_pair(self):
        a = self.add_plus()
        b = self.add_plus()
        self.apply_cz(a, b)
        return a, b

    def apply_cz(self, u, v):
        self.tab.cz(self._col(u), self._col(v))
        return self

    def measure_pauli(self, v, basis, *, rng=None, forced=None, remove=True):
        q = self._col(v)
        bx, bz = self._BASIS_BITS[basis]
        px = np.zeros(self.tab.n, dtype=np.uint8)
        pz = np.zeros(self.tab.n, dtype=np.uint8)
        px[q], pz[q] = bx, bz
        outcome = self.tab.measure_pauli(px, pz, rng=rng, forced=forced)
        if remove:
            self.tab.remove_collapsed(q, basis)
            self.order.pop(q)
        return outcome, self

    def remove_if_collapsed(self, v):
        """Drop a vertex that is in a definite single-qubit eigenstate.

        Returns the basis letter used, or None if the vertex is still
        entangled (nothing is removed then).
        """
        q = self._col(v)
        for basis in ("Z", "X", "Y"):
            try:
                self.tab.remove_collapsed(q, basis)
            except TableauError:
                continue
            self.order.pop(q)
            return basis
        return None

    def pauli_x(self, v):
        self.tab.pauli_x(self._col(v))

    def pauli_z(self, v):
        self.tab.pauli_z(self._col(v))

    def phase(self, v, power=1):
        for _ in range(power % 4):
            self.tab.phase(self._col(v))

    def aligned_tableau(self):
        """Tableau with columns permuted into sorted-label order."""
        perm = sorted(range(len(self.order)), key=lambda i: self.order[i])
        t = self.tab
        return StabilizerTableau(t.x[:, perm], t.z[:, perm], t.sign.copy())

    def statevector(self, rng=None):
        return self.aligned_tableau().statevector(rng)
