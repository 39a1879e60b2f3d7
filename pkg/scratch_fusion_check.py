"""Scratch: verify fusion graph ops against Kraus-applied dense states."""
import numpy as np
from clusterfuse.fock import derive_channel, type_i_circuit, type_ii_circuit, cz_redundant_circuit
from clusterfuse.fusion import FusionKind, fuse_type_i, fuse_type_ii, cz_redundant
from clusterfuse.graph import GraphState


def kraus_ref(psi, order, u, v, K):
    n = len(order)
    iu, iv = order.index(u), order.index(v)
    t = psi.reshape([2] * n)
    t = np.moveaxis(t, (iu, iv), (0, 1)).reshape(4, -1)
    return (K @ t)  # (dout, rest...) rest axes: order minus u,v in rel. order


def fidelity(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return abs(np.vdot(a, b)) ** 2 / (na * nb) ** 2


def project_removed(ref, kept_axes_order, graph_order):
    """ref: array over kept_axes_order; graph kept graph_order (subset).
    Project out axes not in graph_order by picking the dominant branch."""
    extra = [a for a in kept_axes_order if a not in graph_order]
    arr = ref.reshape([2] * len(kept_axes_order))
    names = list(kept_axes_order)
    for vtx in extra:
        ax = names.index(vtx)
        s0 = np.take(arr, 0, axis=ax)
        s1 = np.take(arr, 1, axis=ax)
        arr = s0 if np.linalg.norm(s0) >= np.linalg.norm(s1) else s1
        names.pop(ax)
    # reorder to graph_order
    perm = [names.index(vtx) for vtx in graph_order]
    if arr.ndim:
        arr = np.transpose(arr, perm)
    return arr.reshape(-1)


def classify_i(label):
    (nh, nv), = label
    tot = nh + nv
    if tot == 1:
        return FusionKind.SUCCESS_H if nh else FusionKind.SUCCESS_V
    return FusionKind.FAIL_ZERO if tot == 0 else FusionKind.FAIL_TWO


def classify_ii(label):
    c0, c1 = label
    n0 = sum(c0[1]); n1 = sum(c1[1])
    if n0 == 1 and n1 == 1:
        even = (c0[1] == c1[1])
        return FusionKind.SUCCESS_EVEN if even else FusionKind.SUCCESS_ODD
    return FusionKind.FAIL_A if n0 == 2 else FusionKind.FAIL_B


def check(name, make_graph, uv, fuse_fn, channel, classify):
    print(f"== {name}")
    for entry in channel.entries:
        kind = classify(entry.label)
        g0 = make_graph()
        u, v = uv
        order0 = g0.vertex_order()
        psi0 = g0.to_statevector()
        ref = kraus_ref(psi0, order0, u, v, entry.kraus)
        if np.linalg.norm(ref) < 1e-9:
            continue
        kept = [x for x in order0 if x not in (u, v)]
        g1 = g0.copy()
        out, g1 = fuse_fn(g1, u, v, forced=kind)
        new_vs = sorted(set(g1.vertex_order()) - set(order0))
        # reference axes: output axis/axes first then kept
        if entry.kraus.shape[0] == 2 and new_vs:
            # one qubit output -> new vertex (last in sorted order)
            ref_axes = new_vs + kept
            arr = ref.reshape([2] * (1 + len(kept)))
            names = ref_axes
        else:
            arr = ref.reshape([2] * len(kept)) if kept else ref.reshape(-1)
            names = kept
        flat = arr.reshape(-1)
        got_order = g1.vertex_order()
        ref_vec = project_removed(flat, names, got_order)
        psi1 = g1.to_statevector()
        f = fidelity(ref_vec, psi1)
        status = "OK " if abs(f - 1) < 1e-9 else "FAIL"
        print(f"  {status} {kind.value:13s} label={entry.label} fid={f:.12f}")


# --- Type-I on two Bell pairs (fuse one end of each) ---
def two_bells():
    g = GraphState()
    g.add_bell_pair()   # 0-1
    g.add_bell_pair()   # 2-3
    return g

ch1 = derive_channel(type_i_circuit(), [0, 1])
check("type-I, two Bell pairs, fuse 1&2", two_bells, (1, 2),
      fuse_type_i, ch1, classify_i)

# --- Type-II on the 2+1 configuration: redundant pair + chain end ---
def two_plus_one():
    g = GraphState()
    # 3-chain 0-1-2 then X-measure 1 -> group {0,2} bonded to nothing; give it
    # context: build 4-chain 0-1-2-3, X on 1: group {0,2} bonded to 3
    for _ in range(4):
        g.add_plus()
    g.apply_cz(0, 1); g.apply_cz(1, 2); g.apply_cz(2, 3)
    g.measure_pauli(1, "X", forced=0)
    # lower: bell pair 4-5
    g.add_bell_pair()
    return g

ch2 = derive_channel(type_ii_circuit(), [0, 1])
check("type-II, 2-photon group {0,2} + bell end, fuse 0&4", two_plus_one,
      (0, 4), fuse_type_ii, ch2, classify_ii)

# --- CZ-redundant on two redundant pairs with context ---
def two_pairs():
    g = GraphState()
    for _ in range(4):
        g.add_plus()
    g.apply_cz(0, 1); g.apply_cz(1, 2); g.apply_cz(2, 3)
    g.measure_pauli(1, "X", forced=0)   # group {0,2} + neighbor 3
    for _ in range(4):
        g.add_plus()
    g.apply_cz(4, 5); g.apply_cz(5, 6); g.apply_cz(6, 7)
    g.measure_pauli(5, "X", forced=0)   # group {4,6} + neighbor 7
    return g

chz = derive_channel(cz_redundant_circuit(), [0, 1])
check("cz_redundant, two redundant pairs, photons 0&4", two_pairs, (0, 4),
      cz_redundant, chz, classify_ii)
