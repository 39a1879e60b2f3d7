"""Fusion gates acting on cluster states.

Each operation mirrors, outcome by outcome, the measurement channel of
the corresponding optical circuit in :mod:`clusterfuse.fock`; the frame
corrections tabulated here are pinned by tests that apply the derived
Kraus operators to dense states and demand fidelity 1 per branch.

Outcome labels and their graph-level actions:

Type-I (u enters the detected arm, v the kept arm; both must be bare
single-photon logical qubits):

====================  =====================================================
SUCCESS_H  (p 1/4)    u, v replaced by a fresh vertex holding the union of
                      their bonds, Z correction on it
SUCCESS_V  (p 1/4)    same merge, no correction
FAIL_ZERO  (p 1/4)    nothing detected; both photons exit the kept arm as a
                      flagged non-qubit residue; acts as Z measurements
                      with values (V, H)
FAIL_TWO   (p 1/4)    both photons detected; acts as Z measurements with
                      values (H, V)
====================  =====================================================

Type-II (u -> rail 0, v -> rail 1; at least one side should be a
redundantly encoded group so a photon survives):

====================  =====================================================
SUCCESS_EVEN (p 1/4)  photons destroyed, their logical groups merge into
                      one qubit keeping all bonds
SUCCESS_ODD  (p 1/4)  same merge, logical X fold on the v side
FAIL_A       (p 1/4)  both photons bunched on rail 0: X measurements with
                      values (-, +)
FAIL_B       (p 1/4)  bunched on rail 1: X measurements with values (+, -)
====================  =====================================================

CZ variant (extra 45-degree rotation on the u input): success consumes one
photon from each group and toggles a logical CZ bond between the groups
(Z correction on the u side for the even detector patterns).  Its failure
branch is *not* symmetric: the optics collapses the u photon in Z (taking
u's whole logical qubit with it) and the v photon in X.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .graph import GraphError, GraphState


class FusionKind(Enum):
    SUCCESS_H = "success_h"
    SUCCESS_V = "success_v"
    FAIL_ZERO = "fail_zero"
    FAIL_TWO = "fail_two"
    SUCCESS_EVEN = "success_even"
    SUCCESS_ODD = "success_odd"
    FAIL_A = "fail_a"
    FAIL_B = "fail_b"

    @property
    def is_success(self):
        return self.value.startswith("success")


TYPE_I_KINDS = (FusionKind.SUCCESS_H, FusionKind.SUCCESS_V,
                FusionKind.FAIL_ZERO, FusionKind.FAIL_TWO)
TYPE_II_KINDS = (FusionKind.SUCCESS_EVEN, FusionKind.SUCCESS_ODD,
                 FusionKind.FAIL_A, FusionKind.FAIL_B)


@dataclass(frozen=True)
class FusionOutcome:
    kind: FusionKind
    probability: float
    detail: str = ""

    @property
    def is_success(self):
        return self.kind.is_success


def _draw(kinds, rng, forced):
    """Pick an outcome kind: forced takes precedence, else uniform.

    The four branches of each gate are equiprobable for every input this
    model admits (each fused side entangled beyond the fused pair, so all
    single- and two-qubit reduced coherences vanish); sampling is uniform.
    """
    if forced is not None:
        if isinstance(forced, FusionOutcome):
            forced = forced.kind
        if forced not in kinds:
            raise GraphError(f"forced outcome {forced} invalid here")
        return forced
    if rng is None:
        raise GraphError("sampled fusion needs an rng")
    return kinds[int(rng.integers(0, len(kinds)))]


def _log(log, op, inputs, kind, **extra):
    if log is not None:
        log.append({"op": op, "inputs": list(inputs), "outcome": kind.value,
                    **extra})


def _prefold_x(g, t):
    """Clear a pending X on a photon using the logical-X stabilizer.

    X on one photon of a group equals X on the other members times Z on
    the group's bond targets, so the frame moves off the photon without
    changing the state.
    """
    if not g.frame[t][0]:
        return
    g.frame[t][0] = 0
    gid = g.group_of[t]
    for p in g.groups[gid]:
        if p != t:
            g._apply_outside_pauli(p, 1, 0)
    g._flip_z(g.logical_neighbors(gid))


def _bump_s(g, v, delta):
    """Add quarter turns to a frame, folding half turns into the z bit."""
    f = g.frame[v]
    s = (f[2] + delta) % 4
    if s >= 2:
        s -= 2
        f[1] ^= 1
    f[2] = s


def _consume_cross_bonds(g, gu, gv):
    """Remove direct bonds between two groups, returning how many."""
    zcount = 0
    for p in list(g.groups[gu]):
        for q in list(g.adj[p] & g.groups[gv]):
            g.adj[p].discard(q)
            g.adj[q].discard(p)
            zcount += 1
    return zcount


def _fold_logical_x(g, t, consumed=()):
    """Apply a logical X to the qubit holding t, using its stabilizer.

    X on the group equals X on every member times Z on the group's bond
    targets; the X part is placed on the members *other than t* and t's
    own letter is absorbed by the identity, so t's frame is untouched.
    Z landing on a photon listed in ``consumed`` is returned as a parity
    bit instead (the caller folds it into the post-fusion logical frame).
    """
    gid = g.group_of[t]
    for p in g.groups[gid]:
        if p != t:
            g._apply_outside_pauli(p, 1, 0)
    zextra = 0
    for nb in g.logical_neighbors(gid):
        if nb in consumed:
            zextra ^= 1
        else:
            g.frame[nb][1] ^= 1
    return zextra


# ---------------------------------------------------------------------------
# Type-I
# ---------------------------------------------------------------------------

def fuse_type_i(g, u, v, *, rng=None, forced=None, log=None):
    """Type-I fusion of two bare cluster photons.

    Returns ``(FusionOutcome, g)``.  On success the photons are replaced
    by one fresh vertex inheriting both bond sets; on failure both are
    measured in Z with the branch's correlated values and the leftover
    two-photon residue (FAIL_ZERO) is discarded.
    """
    g._check_vertex(u)
    g._check_vertex(v)
    if u == v:
        raise GraphError("fusion needs two distinct photons")
    if g.group_of[u] == g.group_of[v]:
        raise GraphError("cannot fuse photons of one logical group")
    if len(g.group(u)) != 1 or len(g.group(v)) != 1:
        raise GraphError("type-I fusion acts on bare (singleton) qubits")

    kind = _draw(TYPE_I_KINDS, rng, forced)

    if kind in (FusionKind.FAIL_ZERO, FusionKind.FAIL_TWO):
        mu, mv = (1, 0) if kind is FusionKind.FAIL_ZERO else (0, 1)
        g.measure_pauli(u, "Z", forced=mu)
        g.measure_pauli(v, "Z", forced=mv)
        detail = ("non-qubit two-photon residue discarded"
                  if kind is FusionKind.FAIL_ZERO else "both photons detected")
        _log(log, "fuse_type_i", (u, v), kind, detail=detail)
        return FusionOutcome(kind, 0.25, detail), g

    _prefold_x(g, u)
    _prefold_x(g, v)
    _, z_u, s_u = g.frame[u]
    _, z_v, s_v = g.frame[v]
    bonded = _consume_cross_bonds(g, g.group_of[u], g.group_of[v])

    w = g.new_vertex()
    g.move_bonds(u, w)
    g.move_bonds(v, w)
    g._drop_vertex(u)
    g._drop_vertex(v)

    zbit = (1 if kind is FusionKind.SUCCESS_H else 0) ^ z_u ^ z_v ^ (bonded & 1)
    g.frame[w][1] = zbit
    _bump_s(g, w, s_u + s_v)
    _log(log, "fuse_type_i", (u, v), kind, fused=w)
    return FusionOutcome(kind, 0.25), g


# ---------------------------------------------------------------------------
# Type-II
# ---------------------------------------------------------------------------

def _typeii_preconditions(g, u, v):
    g._check_vertex(u)
    g._check_vertex(v)
    if u == v:
        raise GraphError("fusion needs two distinct photons")
    if g.group_of[u] == g.group_of[v]:
        raise GraphError("cannot fuse photons of one logical group")


def fuse_type_ii(g, u, v, *, rng=None, forced=None, log=None):
    """Type-II fusion: destructive Bell-type parity measurement.

    Both photons are consumed.  On success their logical groups merge
    into a single qubit inheriting every bond; on failure each photon is
    measured in X (shrinking redundant encodings, or applying the linear
    X rule to bare photons).

    If neither side has a spare photon, success degenerates to a parity
    projection on the two bond partners; that is representable here only
    when both photons have degree 1 (the partners then merge into a
    redundant pair), and the outcome is flagged.
    """
    _typeii_preconditions(g, u, v)
    kind = _draw(TYPE_II_KINDS, rng, forced)

    if kind in (FusionKind.FAIL_A, FusionKind.FAIL_B):
        mu, mv = (1, 0) if kind is FusionKind.FAIL_A else (0, 1)
        g.measure_pauli(u, "X", forced=mu)
        g.measure_pauli(v, "X", forced=mv)
        _log(log, "fuse_type_ii", (u, v), kind)
        return FusionOutcome(kind, 0.25), g

    gu, gv = g.group_of[u], g.group_of[v]
    su = g.groups[gu] - {u}
    sv = g.groups[gv] - {v}
    if not (su or sv):
        return _typeii_bare_success(g, u, v, kind, log)

    _prefold_x(g, u)
    _prefold_x(g, v)
    zextra = 0
    if kind is FusionKind.SUCCESS_ODD:
        # fold the odd branch's logical X onto the v side before merging;
        # Z landing on the consumed u photon becomes a logical Z after it
        zextra = _fold_logical_x(g, v, consumed=(u,))

    _, z_u, s_u = g.frame[u]
    _, z_v, s_v = g.frame[v]
    zcross = _consume_cross_bonds(g, gu, gv)

    target_u = min(su) if su else min(sv)
    target_v = min(sv) if sv else min(su)
    g.move_bonds(u, target_u)
    g.move_bonds(v, target_v)
    g._drop_vertex(u)
    g._drop_vertex(v)
    if su and sv:
        gid = g._merge_groups(g.group_of[min(su)], g.group_of[min(sv)])
    else:
        gid = g.group_of[min(su or sv)]
    anchor = min(g.groups[gid])
    g.frame[anchor][1] ^= z_u ^ z_v ^ (zcross & 1) ^ zextra
    _bump_s(g, anchor, s_u + s_v)
    _log(log, "fuse_type_ii", (u, v), kind, merged=sorted(g.groups[gid]))
    return FusionOutcome(kind, 0.25), g


def _typeii_bare_success(g, u, v, kind, log):
    """Success on two bare photons: parity projection on their partners."""
    if g.degree(u) != 1 or g.degree(v) != 1:
        raise GraphError("type-II success with no surviving photon is only "
                         "representable when both photons have degree 1")
    _prefold_x(g, u)
    _prefold_x(g, v)
    _, z_u, s_u = g.frame[u]
    _, z_v, s_v = g.frame[v]
    if (s_u + s_v) % 4:
        raise GraphError("pending quarter turns on a fully consumed fusion "
                         "pair are not representable")
    (a,) = g.adj[u]
    (b,) = g.adj[v]
    g._drop_vertex(u)
    g._drop_vertex(v)
    # (1 +/- Z_a Z_b)/2: the even branch merges the partners directly, the
    # odd branch is the even merge of the X_b-folded state
    m = 0 if kind is FusionKind.SUCCESS_EVEN else 1
    m ^= z_u ^ z_v
    ga, gb = g.group_of[a], g.group_of[b]
    a_side = set(g.groups[ga])
    a_out = (g.logical_neighbors(ga)) - g.groups[gb]
    bonded = bool(g.logical_neighbors(ga) & g.groups[gb])
    if bonded:
        g._toggle_logical_bond(a, b)
    gid = g._merge_groups(ga, gb)
    if bonded and m == 0:
        g.frame[min(g.groups[gid])][1] ^= 1
    if m:
        for p in a_side:
            g._apply_outside_pauli(p, 1, 0)
        g._flip_z(a_out)
    _log(log, "fuse_type_ii", (u, v), kind, detail="bare pair consumed",
         merged=sorted(g.groups[gid]))
    return FusionOutcome(kind, 0.25, "bare pair consumed"), g


# ---------------------------------------------------------------------------
# CZ between redundantly encoded qubits
# ---------------------------------------------------------------------------

def cz_redundant(g, u, v, *, rng=None, forced=None, log=None):
    """Parity-gate CZ between the logical qubits holding u and v.

    On success one photon leaves each encoding and a logical CZ bond is
    toggled between the groups (even detector patterns add a Z on the u
    side).  On failure the u photon is collapsed in Z, measuring u's
    whole logical qubit out of the cluster, and the v photon in X.
    """
    _typeii_preconditions(g, u, v)
    kind = _draw(TYPE_II_KINDS, rng, forced)

    if kind in (FusionKind.FAIL_A, FusionKind.FAIL_B):
        mu, mv = (1, 0) if kind is FusionKind.FAIL_A else (0, 1)
        g.measure_pauli(u, "Z", forced=mu)
        g.measure_pauli(v, "X", forced=mv)
        _log(log, "cz_redundant", (u, v), kind)
        return FusionOutcome(kind, 0.25), g

    gu, gv = g.group_of[u], g.group_of[v]
    if len(g.groups[gu]) < 2 or len(g.groups[gv]) < 2:
        raise GraphError("cz_redundant success needs a spare photon on "
                         "each side")
    _prefold_x(g, u)
    _prefold_x(g, v)
    _, z_u, s_u = g.frame[u]
    _, z_v, s_v = g.frame[v]
    zcross = _consume_cross_bonds(g, gu, gv)

    tu = min(g.groups[gu] - {u})
    tv = min(g.groups[gv] - {v})
    g.move_bonds(u, tu)
    g.move_bonds(v, tv)
    g._drop_vertex(u)
    g._drop_vertex(v)
    # the gate's CZ composes with any pre-existing inter-group bond
    if (zcross + 1) % 2:
        g._toggle_logical_bond(tu, tv)
    g.frame[tu][1] ^= z_u ^ (1 if kind is FusionKind.SUCCESS_EVEN else 0)
    g.frame[tv][1] ^= z_v
    _bump_s(g, tu, s_u)
    _bump_s(g, tv, s_v)
    _log(log, "cz_redundant", (u, v), kind)
    return FusionOutcome(kind, 0.25), g
