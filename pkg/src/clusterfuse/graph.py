"""Cluster states as graphs with Pauli frames and redundant encoding.

Vertices are photons.  Edges record CZ bonds.  A partition of the
vertices into *logical groups* captures redundant encoding: a group of n
photons represents one logical qubit spanned by |H...H> and |V...V>, and
photons within a group are never bonded to each other.  Because all
photons of a group carry the same computational value, a bond to any
member is the same logical bond; bonds between a vertex and a group are
therefore kept parity-normalized (two bonds to one group cancel).

Every vertex carries a frame entry ``(x, z, s)``: the physical state is

    prod_v  S_v^s  Z_v^z  X_v^x  |canonical graph state>

with the canonical state built from per-group GHZ factors and CZ bonds.
The x and z bits are pending Pauli corrections; the s slot (mod 4) holds
pending quarter-turn z-rotations left behind by Y measurements, consumed
when the photon is eventually measured.

Measurement rewrites implemented here (the linear-cluster cases):

* Z on any vertex: vertex removed, bonds broken, Z correction on the
  neighbors for the |V> outcome.  On a multi-photon group this collapses
  the whole logical qubit.
* X on a multi-photon group member: removes the photon from the encoding
  (its bonds transfer to a surviving member); logical Z correction on the
  minus outcome.
* X on a bare vertex of degree 2: merges the two neighbors into one
  redundantly encoded qubit.  Degree 1 collapses the neighbor in Z;
  degree 0 is deterministic.
* Y on a bare vertex of degree <= 2: neighbors are linked (edge toggled)
  and each picks up a pending quarter-turn; degree <= 1 degenerates
  accordingly.  On a group member it removes the photon and leaves the
  quarter-turn on the logical qubit.

X and Y on bare vertices of degree > 2 fall outside these rules and
raise; the tableau backend (:mod:`clusterfuse.tableau`) covers the
general case and is used to cross-check every rule above.

Operations mutate the state in place and return it; use
:meth:`GraphState.copy` for snapshots.  Instances are independent values;
keep each instance on a single thread.
"""

from __future__ import annotations

import numpy as np

from .tableau import StabilizerTableau


class GraphError(ValueError):
    pass


class GraphState:
    __slots__ = ("adj", "frame", "group_of", "groups", "_next_id")

    def __init__(self):
        self.adj = {}        # vertex -> set of neighbors
        self.frame = {}      # vertex -> [x, z, s]  (s mod 4)
        self.group_of = {}   # vertex -> group id
        self.groups = {}     # group id -> set of vertices
        self._next_id = 0

    # -- construction -------------------------------------------------------

    def new_vertex(self):
        v = self._next_id
        self._next_id += 1
        self.adj[v] = set()
        self.frame[v] = [0, 0, 0]
        self.group_of[v] = v
        self.groups[v] = {v}
        return v

    def add_plus(self):
        """One fresh unbonded |+> photon."""
        return self.new_vertex()

    def add_bell_pair(self):
        """Two bonded |+> photons: the 2-qubit cluster |HH>+|HV>+|VH>-|VV>."""
        a = self.new_vertex()
        b = self.new_vertex()
        self.adj[a].add(b)
        self.adj[b].add(a)
        return a, b

    def copy(self):
        g = GraphState()
        g.adj = {v: set(nb) for v, nb in self.adj.items()}
        g.frame = {v: list(f) for v, f in self.frame.items()}
        g.group_of = dict(self.group_of)
        g.groups = {k: set(s) for k, s in self.groups.items()}
        g._next_id = self._next_id
        return g

    # -- queries --------------------------------------------------------------

    @property
    def vertices(self):
        return self.adj.keys()

    def edges(self):
        return {frozenset((u, v)) for u, nbs in self.adj.items() for v in nbs}

    def n_vertices(self):
        return len(self.adj)

    def degree(self, v):
        return len(self.adj[v])

    def group(self, v):
        return self.groups[self.group_of[v]]

    def logical_neighbors(self, gid):
        """Union of bond targets over a group's members."""
        out = set()
        for p in self.groups[gid]:
            out |= self.adj[p]
        return out

    def _check_vertex(self, v):
        if v not in self.adj:
            raise GraphError(f"vertex {v} absent")

    # -- elementary rewrites ----------------------------------------------------

    def apply_cz(self, u, v):
        """Toggle the logical bond between the groups of two photons.

        An existing bond between u's group and v's group (wherever it is
        attached) is cancelled; otherwise a bond u-v is created.
        """
        if u == v:
            raise GraphError("CZ needs two distinct vertices")
        self._check_vertex(u)
        self._check_vertex(v)
        if self.group_of[u] == self.group_of[v]:
            raise GraphError("CZ within a logical group is not representable")
        self._toggle_logical_bond(u, v)
        return self

    def _toggle_logical_bond(self, u, v):
        gu, gv = self.group_of[u], self.group_of[v]
        for p in self.groups[gu]:
            hit = self.adj[p] & self.groups[gv]
            if hit:
                q = next(iter(hit))
                self.adj[p].discard(q)
                self.adj[q].discard(p)
                return
        self.adj[u].add(v)
        self.adj[v].add(u)

    def _drop_vertex(self, v):
        for nb in self.adj[v]:
            self.adj[nb].discard(v)
        del self.adj[v]
        del self.frame[v]
        gid = self.group_of.pop(v)
        members = self.groups[gid]
        members.discard(v)
        if not members:
            del self.groups[gid]
        elif gid == v:
            new_gid = min(members)
            self.groups[new_gid] = self.groups.pop(gid)
            for p in members:
                self.group_of[p] = new_gid

    def _flip_z(self, vs):
        for v in vs:
            self.frame[v][1] ^= 1

    def _apply_outside_pauli(self, v, px, pz):
        """Compose a fresh Pauli correction onto a vertex frame.

        The frame order is S^s Z^z X^x; pushing a new X through an odd S
        power turns it into XZ (up to a dropped global phase), so the z
        bit flips along with x in that case.
        """
        f = self.frame[v]
        if px and f[2] % 2:
            pz ^= 1
        f[0] ^= px
        f[1] ^= pz

    def _merge_groups(self, ga, gb):
        """Union two logical groups, cancelling doubled outside bonds."""
        ga, gb = self.group_of[min(self.groups[ga])], self.group_of[min(self.groups[gb])]
        if ga == gb:
            return ga
        if len(self.groups[gb]) > len(self.groups[ga]):
            ga, gb = gb, ga
        members = self.groups.pop(gb)
        self.groups[ga] |= members
        for p in members:
            self.group_of[p] = ga
        merged = self.groups[ga]
        # parity-normalize: an outside vertex bonded to several members
        # keeps one bond per odd count, none per even
        outside = {}
        for p in merged:
            for nb in self.adj[p]:
                outside.setdefault(nb, []).append(p)
        for y, ports in outside.items():
            if len(ports) > 1:
                for p in ports:
                    self.adj[p].discard(y)
                    self.adj[y].discard(p)
                if len(ports) % 2:
                    keep = min(ports)
                    self.adj[keep].add(y)
                    self.adj[y].add(keep)
        return ga

    def move_bonds(self, src, dst):
        """Transfer all bonds of one photon to another (parity-toggled)."""
        for nb in list(self.adj[src]):
            self.adj[src].discard(nb)
            self.adj[nb].discard(src)
            self._toggle_logical_bond(dst, nb)

    # -- frame handling -----------------------------------------------------------

    def _conjugated_basis(self, v, basis):
        """Push a measurement basis through the vertex frame.

        Measuring P on S^s Z^z X^x |c> equals measuring the conjugated
        Pauli on |c>; returns (basis', sign_flip).
        """
        x, z, s = self.frame[v]
        b, sign = basis, 0
        for _ in range(s % 4):          # S^dag X S = -Y,  S^dag Y S = X
            if b == "X":
                b, sign = "Y", sign ^ 1
            elif b == "Y":
                b = "X"
        if z and b in ("X", "Y"):
            sign ^= 1
        if x and b in ("Z", "Y"):
            sign ^= 1
        return b, sign

    # -- measurements ----------------------------------------------------------------

    def measure_pauli(self, v, basis, *, rng=None, forced=None):
        """Measure one photon in a Pauli basis.

        ``forced`` fixes the physical outcome bit (0 meaning the +1
        eigenvalue); otherwise ``rng`` samples it 50/50, which is the true
        distribution for every non-deterministic case this model reaches.
        Returns ``(outcome, self)``.
        """
        self._check_vertex(v)
        if basis not in ("X", "Y", "Z"):
            raise GraphError(f"unknown basis {basis!r}")
        eff_basis, flip = self._conjugated_basis(v, basis)

        if eff_basis == "X" and len(self.group(v)) == 1 and self.degree(v) == 0:
            outcome = flip  # lone |+> photon: X is deterministic
            if forced is not None and int(forced) != outcome:
                raise GraphError("forced outcome contradicts a deterministic "
                                 "X measurement")
            self._drop_vertex(v)
            return outcome, self

        if forced is not None:
            outcome = int(forced)
        else:
            if rng is None:
                raise GraphError("sampled measurement needs an rng")
            outcome = int(rng.integers(0, 2))
        m = outcome ^ flip  # outcome as seen by the canonical state

        if eff_basis == "Z":
            self._rule_z(v, m)
        elif eff_basis == "X":
            self._rule_x(v, m)
        else:
            self._rule_y(v, m)
        return outcome, self

    def _rule_z(self, v, m):
        members = self.group(v)
        if len(members) == 1:
            nbs = set(self.adj[v])
            self._drop_vertex(v)
            if m:
                self._flip_z(nbs)
            return
        # collapsing one photon of a redundant group collapses the qubit
        gid = self.group_of[v]
        nbs = self.logical_neighbors(gid)
        for p in list(members):
            self._drop_vertex(p)
        if m:
            self._flip_z(nbs)

    def _rule_x(self, v, m):
        members = self.group(v)
        if len(members) > 1:
            bonds = set(self.adj[v])
            survivors = set(members) - {v}
            self._drop_vertex(v)
            target = min(survivors)
            for nb in bonds:
                self._toggle_logical_bond(target, nb)
            if m:
                self.frame[target][1] ^= 1  # logical Z on the minus branch
            return

        deg = self.degree(v)
        if deg == 0:
            raise GraphError("deterministic X measurement reached the "
                             "random path")
        if deg == 1:
            (a,) = self.adj[v]
            self._drop_vertex(v)
            # the neighbor collapses in Z with the same canonical bit;
            # only a's x frame re-interprets a Z collapse
            self._rule_z(a, m ^ self.frame[a][0])
            return
        if deg == 2:
            a, b = sorted(self.adj[v])
            ga, gb = self.group_of[a], self.group_of[b]
            if ga == gb:
                raise GraphError("X on a vertex doubly bonded to one group "
                                 "is deterministic; not supported here")
            a_side = set(self.groups[ga])
            a_outside = (self.logical_neighbors(ga) - {v}) - self.groups[gb]
            bonded = bool(self.logical_neighbors(ga) & self.groups[gb])
            self._drop_vertex(v)
            if bonded:
                # cancel the direct bond before identifying the groups
                self._toggle_logical_bond(a, b)
            gid = self._merge_groups(self.group_of[a], self.group_of[b])
            if bonded and m == 0:
                # internal bond restricted to the even branch = logical Z
                self.frame[min(self.groups[gid])][1] ^= 1
            if m:
                # odd branch: logical X on the old a side, Z on its bonds
                for p in a_side:
                    self._apply_outside_pauli(p, 1, 0)
                self._flip_z(a_outside)
            return
        raise GraphError("X rule supports degree <= 2 only; use the tableau "
                         "backend for higher degree")

    def _rule_y(self, v, m):
        members = self.group(v)
        # bare-vertex link rule: + outcome leaves S on the neighbors, - S^dag
        sdelta = 1 if m == 0 else 3
        if len(members) > 1:
            # redundant removal has the opposite handedness: + leaves S^dag
            sdelta = 3 if m == 0 else 1
            bonds = set(self.adj[v])
            survivors = set(members) - {v}
            self._drop_vertex(v)
            target = min(survivors)
            for nb in bonds:
                self._toggle_logical_bond(target, nb)
            self.frame[target][2] = (self.frame[target][2] + sdelta) % 4
            return
        deg = self.degree(v)
        if deg == 0:
            self._drop_vertex(v)
            return
        if deg == 1:
            (a,) = self.adj[v]
            self._drop_vertex(v)
            self.frame[a][2] = (self.frame[a][2] + sdelta) % 4
            return
        if deg == 2:
            a, b = sorted(self.adj[v])
            if self.group_of[a] == self.group_of[b]:
                raise GraphError("Y on a vertex doubly bonded to one group "
                                 "is not supported here")
            self._drop_vertex(v)
            self._toggle_logical_bond(a, b)
            for t in (a, b):
                self.frame[t][2] = (self.frame[t][2] + sdelta) % 4
            return
        raise GraphError("Y rule supports degree <= 2 only; use the tableau "
                         "backend for higher degree")

    # -- dense and tableau views --------------------------------------------------------

    def vertex_order(self):
        return sorted(self.adj)

    def to_statevector(self, include_pending=True):
        """Dense state over the sorted vertices (lowest id = most significant)."""
        order = self.vertex_order()
        n = len(order)
        if n > 16:
            raise GraphError("statevector capped at 16 photons")
        pos = {v: i for i, v in enumerate(order)}
        shift = {v: n - 1 - pos[v] for v in order}
        dim = 1 << n
        vec = np.zeros(dim, dtype=complex)
        gids = sorted(self.groups)
        masks = []
        for gid in gids:
            mask = 0
            for p in self.groups[gid]:
                mask |= 1 << shift[p]
            masks.append(mask)
        amp = 1.0 / np.sqrt(2.0 ** len(gids))
        for bits in range(1 << len(gids)):
            idx = 0
            for i, mask in enumerate(masks):
                if (bits >> i) & 1:
                    idx |= mask
            vec[idx] = amp
        idxs = np.arange(dim)
        for e in self.edges():
            u, w = tuple(e)
            both = (((idxs >> shift[u]) & 1) & ((idxs >> shift[w]) & 1)).astype(bool)
            vec = np.where(both, -vec, vec)
        for v in order:
            x, z, s = self.frame[v]
            bit = ((idxs >> shift[v]) & 1).astype(bool)
            if x:
                vec = vec[idxs ^ (1 << shift[v])]
            if z:
                vec = np.where(bit, -vec, vec)
            if include_pending and s % 4:
                vec = vec * np.where(bit, 1j ** (s % 4), 1.0)
        return vec

    def to_tableau(self, include_pending=True):
        """Stabilizer tableau of the exact state, columns in sorted-id order."""
        order = self.vertex_order()
        n = len(order)
        pos = {v: i for i, v in enumerate(order)}
        x = np.zeros((n, n), dtype=np.uint8)
        z = np.zeros((n, n), dtype=np.uint8)
        sign = np.zeros(n, dtype=np.uint8)
        row = 0
        for gid in sorted(self.groups):
            members = sorted(self.groups[gid])
            for p in members:
                x[row, pos[p]] = 1
            for nb in self.logical_neighbors(gid):
                z[row, pos[nb]] ^= 1
            row += 1
            for a, b in zip(members, members[1:]):
                z[row, pos[a]] = 1
                z[row, pos[b]] = 1
                row += 1
        tab = StabilizerTableau(x, z, sign)
        for v in order:
            xf, zf, s = self.frame[v]
            q = pos[v]
            if xf:
                tab.pauli_x(q)
            if zf:
                tab.pauli_z(q)
            if include_pending:
                for _ in range(s % 4):
                    tab.phase(q)
        return tab

    def equal_up_to_pauli(self, other):
        """Same stabilizer group modulo signs a Pauli correction can absorb.

        Pending quarter-turn slots are folded in exactly: they are local
        Clifford, not Pauli, so states differing by one are not equal.
        Vertex sets must coincide.
        """
        if set(self.adj) != set(other.adj):
            raise GraphError("vertex sets differ")
        return self.to_tableau().same_group(other.to_tableau(), up_to_signs=True)


def new_bell_pair():
    """Fresh state holding one polarization Bell pair (a 2-qubit cluster)."""
    g = GraphState()
    g.add_bell_pair()
    return g


def linear_cluster(n):
    """Fresh state holding an n-photon linear cluster built by a CZ chain."""
    g = GraphState()
    vs = [g.add_plus() for _ in range(n)]
    for a, b in zip(vs, vs[1:]):
        g.apply_cz(a, b)
    return g
