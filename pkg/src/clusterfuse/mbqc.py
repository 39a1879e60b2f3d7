"""Measurement patterns: compiling small circuits onto the tiled layout.

The computational model drives a cluster by measuring, qubit by qubit,
the observable ``cos(t) X + sin(t) Y``; each wire measurement teleports
the wire's logical state one step while applying ``H Rz(-t)`` up to a
Pauli byproduct, and a vertical bond between two wires applies a CZ when
its endpoints are measured.  The sign of later measurement angles, and
pi-shifts of them, depend on earlier outcomes; those dependencies are
compiled symbolically as XOR lists of step indices, so a pattern is
executable on any sampled branch and the corrected output is branch
independent.

Conventions (oracle-checked in the tests, see ``simulate_circuit``):

* ``rz(t)`` is ``diag(1, exp(i t))``; ``rx(t) = H rz(t) H``.
* Logical inputs start in |+>, matching a cluster wire's first qubit.
* A gate column occupies two wire positions with angles ``(-t, 0)`` for
  rz, ``(0, -t)`` for rx, and ``(0, 0)`` plus a vertical bond for cz.
* Layout: wire w holds positions x = 0 .. 2*columns + 2 (a two-qubit
  lead-in, then two positions per column, then the output); column c is
  the slot (2c+2, 2c+3), and a cz between wires w and w+1 bonds the two
  qubits at the slot's first position x = 2c + 2.  This is exactly the
  graph :func:`clusterfuse.strategies.tile_target_graph` declares.

Pending quarter-turn frames on cluster photons (left by Y measurements
during construction) are folded into the measurement angles at execution
time: a photon carrying S^s is measured at ``t + s * pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphState, GraphError


class PatternError(ValueError):
    pass


# ---------------------------------------------------------------------------
# logical circuits and the dense oracle
# ---------------------------------------------------------------------------

SUPPORTED_GATES = ("rz", "rx", "cz")


@dataclass
class LogicalCircuit:
    n_qubits: int
    gates: list = field(default_factory=list)

    def rz(self, q, theta):
        self.gates.append(("rz", q, float(theta)))
        return self

    def rx(self, q, theta):
        self.gates.append(("rx", q, float(theta)))
        return self

    def cz(self, a, b):
        self.gates.append(("cz", a, b))
        return self

    def validate(self):
        for gate in self.gates:
            name = gate[0]
            if name in ("rz", "rx"):
                _, q, _ = gate
                if not 0 <= q < self.n_qubits:
                    raise PatternError(f"qubit {q} out of range")
            elif name == "cz":
                _, a, b = gate
                if abs(a - b) != 1 or not (0 <= a < self.n_qubits
                                           and 0 <= b < self.n_qubits):
                    raise PatternError("cz acts on adjacent wires only")
            else:
                raise PatternError(f"unsupported gate {name!r}")
        return self


def _rz(theta):
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * theta)]], dtype=complex)


_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)


def _apply_1q(state, mat, q, n):
    t = state.reshape([2] * n)
    t = np.tensordot(mat, t, axes=([1], [q]))
    return np.moveaxis(t, 0, q).reshape(-1)


def _apply_cz_dense(state, a, b, n):
    t = state.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1.0
    return t.reshape(-1)


def simulate_circuit(circuit):
    """Exact dense simulation from |+>^n; the oracle for everything here."""
    circuit.validate()
    n = circuit.n_qubits
    if n > 10:
        raise PatternError("oracle capped at 10 qubits")
    state = np.full(1 << n, 1.0 / math.sqrt(1 << n), dtype=complex)
    for gate in circuit.gates:
        if gate[0] == "rz":
            state = _apply_1q(state, _rz(gate[2]), gate[1], n)
        elif gate[0] == "rx":
            state = _apply_1q(state, _H @ _rz(gate[2]) @ _H, gate[1], n)
        else:
            state = _apply_cz_dense(state, gate[1], gate[2], n)
    return state


# ---------------------------------------------------------------------------
# patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternStep:
    vertex: tuple
    angle: float
    sign_deps: tuple = ()   # outcomes whose XOR flips the angle's sign


@dataclass
class MeasurementPattern:
    steps: list
    outputs: list            # output vertex per wire
    final_x: dict            # wire -> tuple of step indices (XOR set)
    final_z: dict

    def validate(self):
        for j, s in enumerate(self.steps):
            for dep in s.sign_deps:
                if not 0 <= dep < j:
                    raise PatternError(
                        f"step {j} depends on non-earlier step {dep}")
        seen = set()
        for s in self.steps:
            if s.vertex in seen:
                raise PatternError(f"vertex {s.vertex} measured twice")
            seen.add(s.vertex)
        return self


@dataclass
class Layout:
    """Cluster layout: wire grid plus the cz bond columns."""

    n_wires: int
    columns: int
    cz_bonds: list           # [(wire, x)] lower-wire attachment points

    @property
    def width(self):
        return 2 * self.columns + 3

    def vertices(self):
        return [(w, x) for w in range(self.n_wires)
                for x in range(self.width)]

    def edges(self):
        out = []
        for w in range(self.n_wires):
            for x in range(self.width - 1):
                out.append(((w, x), (w, x + 1)))
        for (w, x) in self.cz_bonds:
            out.append(((w, x), (w + 1, x)))
        return out

    def build_graph(self):
        """CZ-constructed GraphState of the layout; returns (g, vertex map)."""
        g = GraphState()
        ids = {}
        for v in self.vertices():
            ids[v] = g.add_plus()
        for a, b in self.edges():
            g.apply_cz(ids[a], ids[b])
        return g, ids


def compile_pattern(circuit):
    """Compile a logical circuit to (Layout, MeasurementPattern).

    One gate per column; every wire advances two qubits per column, idle
    wires carrying identity slots.  Steps are ordered position-major so
    every dependency references an earlier step.
    """
    circuit.validate()
    n = circuit.n_qubits
    cols = len(circuit.gates)
    width = 2 * cols + 3
    angles = {(w, x): 0.0 for w in range(n) for x in range(width - 1)}
    bonds = {}   # x -> (upper wire w); bond between (w, x) and (w+1, x)
    for c, gate in enumerate(circuit.gates):
        x1, x2 = 2 * c + 2, 2 * c + 3
        if gate[0] == "rz":
            angles[(gate[1], x1)] = -gate[2]
        elif gate[0] == "rx":
            angles[(gate[1], x2)] = -gate[2]
        else:
            w = min(gate[1], gate[2])
            bonds[x1] = w
    layout = Layout(n, cols, [(bonds[x], x) for x in sorted(bonds)])

    steps = []
    a_set = {w: frozenset() for w in range(n)}
    b_set = {w: frozenset() for w in range(n)}
    for x in range(width - 1):
        bond_w = bonds.get(x)
        if bond_w is not None:
            # pending X byproducts commute through the bond CZ as Z on
            # the partner wire (CZ X(x)I CZ = X(x)Z); both sets are known
            aw, av = a_set[bond_w], a_set[bond_w + 1]
            b_set[bond_w] = b_set[bond_w] ^ av
            b_set[bond_w + 1] = b_set[bond_w + 1] ^ aw
        for w in range(n):
            j = len(steps)
            steps.append(PatternStep((w, x), angles[(w, x)],
                                     tuple(sorted(a_set[w]))))
            a_set[w], b_set[w] = frozenset({j}) ^ b_set[w], a_set[w]
    pattern = MeasurementPattern(
        steps=steps,
        outputs=[(w, width - 1) for w in range(n)],
        final_x={w: tuple(sorted(a_set[w])) for w in range(n)},
        final_z={w: tuple(sorted(b_set[w])) for w in range(n)},
    )
    return layout, pattern.validate()


def wire_pattern(angles):
    """Free-form single-wire pattern of len(angles) measurements.

    The cluster is a path of len(angles) + 1 photons; byproduct algebra
    as in :func:`compile_pattern`.  Useful for small hand-built cases.
    """
    steps = []
    a_set, b_set = frozenset(), frozenset()
    for j, t in enumerate(angles):
        steps.append(PatternStep((0, j), float(t), tuple(sorted(a_set))))
        a_set, b_set = frozenset({j}) ^ b_set, a_set
    return MeasurementPattern(
        steps=steps, outputs=[(0, len(angles))],
        final_x={0: tuple(sorted(a_set))},
        final_z={0: tuple(sorted(b_set))}).validate()


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _xor(outcomes, deps):
    bit = 0
    for d in deps:
        bit ^= outcomes[d]
    return bit


class _StreamState:
    """Dense state over only the live frontier of a cluster.

    Photons are materialized as |+> when first needed, bonds are applied
    once both endpoints are live, and a photon's frame is folded in just
    before its first measurement (frames sit outside all bonds, so this
    is exact).  Keeps memory at the frontier width instead of the whole
    cluster.  Supports singleton logical groups only.
    """

    def __init__(self, g):
        if any(len(m) > 1 for m in g.groups.values()):
            raise PatternError("streaming execution supports bare photons "
                               "only (no redundant groups)")
        self.g = g
        self.state = np.ones(1, dtype=complex)
        self.live = []
        self._measured = set()
        self._bonds_done = set()
        self._frame_done = set()

    def _axis(self, v):
        return self.live.index(v)

    def _materialize(self, v):
        if v in self.live or v in self._measured:
            return
        self.state = np.kron(self.state, np.full(2, 1 / math.sqrt(2.0),
                                                 dtype=complex))
        self.live.append(v)

    def _apply_bond(self, u, v):
        key = frozenset((u, v))
        if key in self._bonds_done:
            return
        self._bonds_done.add(key)
        n = len(self.live)
        t = self.state.reshape([2] * n).copy()
        idx = [slice(None)] * n
        idx[self._axis(u)] = 1
        idx[self._axis(v)] = 1
        t[tuple(idx)] *= -1.0
        self.state = t.reshape(-1)

    def _apply_frame(self, v):
        if v in self._frame_done:
            return
        self._frame_done.add(v)
        x, z, s = self.g.frame[v]
        n = len(self.live)
        t = self.state.reshape([2] * n)
        q = self._axis(v)
        if x:
            t = np.flip(t, axis=q)
        if z or s % 4:
            idx = [slice(None)] * n
            idx[q] = 1
            t = t.copy()
            t[tuple(idx)] *= (-1.0) ** z * (1j ** (s % 4))
        self.state = t.reshape(-1)

    def prepare(self, v):
        """Make v measurable: materialize it, its bonds, and its frame."""
        self._materialize(v)
        for u in self.g.adj[v]:
            self._materialize(u)
            self._apply_bond(v, u)
        self._apply_frame(v)

    def finalize(self):
        """Materialize whatever the pattern never measured (outputs)."""
        for v in self.g.vertex_order():
            if v not in self._measured:
                self.prepare(v)

    def branches(self, v, theta):
        """Unnormalized projections of v onto the two M(theta) outcomes."""
        axis = self._axis(v)
        n = len(self.live)
        t = self.state.reshape([2] * n)
        moved = np.moveaxis(t, axis, 0).reshape(2, -1)
        # eigenvectors of cos X + sin Y: (|0> +/- e^{i t}|1>)/sqrt 2
        plus = (moved[0] + np.exp(-1j * theta) * moved[1]) / math.sqrt(2.0)
        minus = (moved[0] - np.exp(-1j * theta) * moved[1]) / math.sqrt(2.0)
        return plus, minus

    def collapse(self, v, branch):
        nrm = np.linalg.norm(branch)
        if nrm < 1e-12:
            raise PatternError("forced branch has zero probability")
        self.live.pop(self._axis(v))
        self._measured.add(v)
        self.state = (branch / nrm).reshape(-1)


def execute_pattern(g, pattern, id_map, *, rng=None, forced=None):
    """Run a pattern on a cluster state by direct dense projection.

    ``id_map`` sends pattern vertices to graph vertex ids.  Outcomes are
    sampled from the true Born distribution unless ``forced`` (a list of
    bits) pins every branch.  Pending quarter-turns on measured photons
    are folded into the angles.  Returns a dict with the outcome bits,
    the residual state over the unmeasured qubits (sorted by graph id),
    and the evaluated output corrections per wire.
    """
    pattern.validate()
    sim = _StreamState(g)
    outcomes = []
    for j, step in enumerate(pattern.steps):
        vid = id_map[step.vertex]
        theta = step.angle
        if _xor(outcomes, step.sign_deps):
            theta = -theta
        # fold the photon's frame into the angle: measuring
        # M((-1)^x t + pi z + pi/2 s) on S^s Z^z X^x |c> acts as M(t) on
        # |c> with unchanged outcome labels
        fx, fz, fs = g.frame[vid]
        if fx:
            theta = -theta
        theta += math.pi * fz + (math.pi / 2.0) * (fs % 4)
        sim.prepare(vid)
        plus, minus = sim.branches(vid, theta)
        if forced is not None:
            bit = int(forced[j])
        else:
            if rng is None:
                raise PatternError("sampled execution needs an rng")
            bit = int(rng.random() > float(np.vdot(plus, plus).real))
        sim.collapse(vid, minus if bit else plus)
        outcomes.append(bit)
    sim.finalize()
    live = sim.live
    state = sim.state

    corrections = {}
    for w, deps in pattern.final_x.items():
        corrections[w] = (_xor(outcomes, deps),
                          _xor(outcomes, pattern.final_z[w]))
    residual_order = sorted(live)
    perm = [live.index(v) for v in residual_order]
    state = np.transpose(state.reshape([2] * len(live)), perm).reshape(-1)
    return {"outcomes": outcomes, "state": state,
            "residual_order": residual_order, "corrections": corrections}


def corrected_output(result, pattern, id_map, g=None):
    """Fold the byproduct corrections into the residual state.

    Output wires are ordered by wire index; correction X^a Z^b is undone
    on each output qubit, giving the branch-independent logical state.
    Passing the cluster ``g`` also strips construction frames still
    sitting on the output photons (fusion-built clusters carry them).
    """
    state = result["state"]
    order = result["residual_order"]
    n = len(order)
    t = state.reshape([2] * n)
    for w, (a, b) in result["corrections"].items():
        vid = id_map[pattern.outputs[w]]
        q = order.index(vid)
        fx, fz, fs = g.frame[vid] if g is not None else (0, 0, 0)
        if fs % 4 or fz:
            idx = [slice(None)] * n
            idx[q] = 1
            t = t.copy()
            t[tuple(idx)] *= (-1.0) ** fz * (-1j) ** (fs % 4)
        if fx:
            t = np.flip(t, axis=q)
        if b:
            idx = [slice(None)] * n
            idx[q] = 1
            t = t.copy()
            t[tuple(idx)] *= -1.0
        if a:
            t = np.flip(t, axis=q)
    # reorder axes so wire 0 is the most significant qubit
    wire_axes = [order.index(id_map[pattern.outputs[w]])
                 for w in sorted(result["corrections"])]
    rest = [i for i in range(n) if i not in wire_axes]
    t = np.transpose(t, wire_axes + rest)
    return t.reshape(-1)
