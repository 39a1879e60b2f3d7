"""Exact Fock-space simulation of small polarization-optics circuits.

A state lives on a set of spatial rails, each carrying two polarization
modes (H and V).  States are sparse maps from photon-occupation vectors to
complex amplitudes, so only the populated part of Fock space is stored.
Circuits are lists of passive elements (polarizing beam splitters and
polarization rotators) followed by photon counters.

The module's main product is :func:`derive_channel`, which turns a circuit
plus a set of dual-rail qubit inputs into the list of Kraus operators the
circuit implements, one per detection outcome.  The canonical fusion-gate
circuits are provided by :func:`type_i_circuit`, :func:`type_ii_circuit`
and :func:`cz_redundant_circuit`.

Conventions (fixed once, tests assert only phase-insensitive statements):

* PBS: H transmits, V reflects with phase ``+1``.
* Rotation by ``t`` (degrees) acts on creation operators as
  ``aH -> cos(t) aH + sin(t) aV``, ``aV -> -sin(t) aH + cos(t) aV``.
* Computational basis ordering is H before V; multi-qubit bases are
  lexicographic in the order the input rails are listed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: amplitudes below this are dropped from the sparse map
PRUNE_TOL = 1e-12

#: hard cap on the total photon number per simulation
MAX_PHOTONS = 8

H, V = 0, 1  # polarization sub-mode index within a rail


class FockError(ValueError):
    """Raised for invalid rails, photon-number overflow, or bad circuits."""


@dataclass(frozen=True)
class PBS:
    """Polarizing beam splitter between two rails (H passes, V swaps rails)."""

    rail_a: int
    rail_b: int


@dataclass(frozen=True)
class Rotation:
    """Polarization rotation of one rail by an angle in degrees."""

    rail: int
    angle_deg: float


@dataclass(frozen=True)
class Detector:
    """Polarization-discriminating photon counter on one rail.

    ``number_resolving=False`` merges all photon numbers >= 1 per
    polarization into a single "click".  ``basis="D45"`` measures in the
    45-degree rotated basis (implemented as a -45 rotation before an H/V
    count; outcome labels then refer to the rotated frame).
    """

    rail: int
    number_resolving: bool = True
    basis: str = "HV"


@dataclass
class OpticalCircuit:
    n_rails: int
    elements: list = field(default_factory=list)

    def detected_rails(self):
        return [e.rail for e in self.elements if isinstance(e, Detector)]

    def validate(self):
        seen = set()
        for el in self.elements:
            if isinstance(el, PBS):
                rails = (el.rail_a, el.rail_b)
            elif isinstance(el, Rotation):
                rails = (el.rail,)
            elif isinstance(el, Detector):
                rails = (el.rail,)
                if el.rail in seen:
                    raise FockError(f"rail {el.rail} detected twice")
                seen.add(el.rail)
            else:
                raise FockError(f"unknown element {el!r}")
            for r in rails:
                if not 0 <= r < self.n_rails:
                    raise FockError(f"rail {r} outside 0..{self.n_rails - 1}")


class FockState:
    """Sparse complex-amplitude state over the Fock basis of ``n_rails`` rails.

    Occupation vectors are tuples of length ``2 * n_rails`` ordered as
    (rail0 H, rail0 V, rail1 H, rail1 V, ...).
    """

    __slots__ = ("n_rails", "amps")

    def __init__(self, n_rails, amps=None):
        self.n_rails = n_rails
        self.amps = amps if amps is not None else {}

    @classmethod
    def vacuum(cls, n_rails):
        return cls(n_rails, {(0,) * (2 * n_rails): 1.0 + 0.0j})

    @classmethod
    def from_photons(cls, n_rails, photons):
        """State with one photon per (rail, pol) entry in ``photons``."""
        occ = [0] * (2 * n_rails)
        for rail, pol in photons:
            occ[2 * rail + pol] += 1
        if sum(occ) > MAX_PHOTONS:
            raise FockError(f"photon number {sum(occ)} exceeds cap {MAX_PHOTONS}")
        return cls(n_rails, {tuple(occ): 1.0 + 0.0j})

    def norm(self):
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def total_photons(self):
        return max((sum(occ) for occ in self.amps), default=0)

    def copy(self):
        return FockState(self.n_rails, dict(self.amps))

    def prune(self, tol=PRUNE_TOL):
        self.amps = {occ: a for occ, a in self.amps.items() if abs(a) > tol}
        return self

    def renormalize(self):
        n = self.norm()
        if n == 0.0:
            raise FockError("cannot renormalize the zero state")
        self.amps = {occ: a / n for occ, a in self.amps.items()}
        return self

    def overlap(self, other):
        """<self|other> over the shared sparse support."""
        return sum(self.amps[occ].conjugate() * other.amps[occ]
                   for occ in self.amps.keys() & other.amps.keys())

    def _check_rail(self, rail):
        if not 0 <= rail < self.n_rails:
            raise FockError(f"rail {rail} outside 0..{self.n_rails - 1}")


def _apply_mode_map(state, mode_map):
    """Apply a linear map of creation operators to a sparse state.

    ``mode_map`` sends a mode index to a list of (mode, coeff) terms; modes
    absent from the map are untouched.  The map must be unitary on the
    touched modes for the result to stay normalized (not checked here).
    """
    touched = set(mode_map)
    out = {}
    for occ, amp in state.amps.items():
        if sum(occ) > MAX_PHOTONS:
            raise FockError(f"photon number {sum(occ)} exceeds cap {MAX_PHOTONS}")
        base = list(occ)
        coeff = amp
        photons = []
        for m in touched:
            photons.extend([m] * base[m])
            # |n> = (a^dag)^n / sqrt(n!) |0>: divide out the source norm
            coeff /= math.sqrt(math.factorial(base[m]))
            base[m] = 0
        terms = {tuple(base): coeff}
        for m in photons:
            nxt = {}
            for occ2, c2 in terms.items():
                for tgt, u in mode_map[m]:
                    occ3 = list(occ2)
                    occ3[tgt] += 1
                    c3 = c2 * u * math.sqrt(occ3[tgt])
                    key = tuple(occ3)
                    nxt[key] = nxt.get(key, 0.0j) + c3
            terms = nxt
        for occ2, c2 in terms.items():
            out[occ2] = out.get(occ2, 0.0j) + c2
    res = FockState(state.n_rails, out)
    return res.prune()


def apply_pbs(state, rail_a, rail_b):
    """Mix two rails on a polarizing beam splitter (H passes, V swaps rails)."""
    state._check_rail(rail_a)
    state._check_rail(rail_b)
    aV, bV = 2 * rail_a + V, 2 * rail_b + V
    return _apply_mode_map(state, {aV: [(bV, 1.0)], bV: [(aV, 1.0)]})


def apply_rotation(state, rail, angle_deg):
    """Rotate the polarization of one rail by ``angle_deg`` degrees."""
    state._check_rail(rail)
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    mh, mv = 2 * rail + H, 2 * rail + V
    return _apply_mode_map(state, {mh: [(mh, c), (mv, s)],
                                   mv: [(mh, -s), (mv, c)]})


def _strip_rail(occ, rail):
    return occ[: 2 * rail] + occ[2 * rail + 2:]


def _project_rail(state, rail):
    """Split a state by the (nH, nV) photon count on one rail.

    Returns {(nH, nV): FockState-without-that-rail} with unnormalized
    amplitudes (squared norms are the outcome probabilities).
    """
    sectors = {}
    for occ, amp in state.amps.items():
        key = (occ[2 * rail + H], occ[2 * rail + V])
        sectors.setdefault(key, {})[_strip_rail(occ, rail)] = amp
    return {k: FockState(state.n_rails - 1, m) for k, m in sectors.items()}


def measure_rail(state, rail, number_resolving=True):
    """Measure one rail with a polarization-discriminating counter.

    Returns a list of ``(outcome, probability, collapsed)`` entries.  With
    ``number_resolving`` the outcome is the exact ``(nH, nV)`` count;
    otherwise it is a ``(click_H, click_V)`` boolean pair and photon
    numbers >= 1 are indistinguishable.  Collapsed states are renormalized
    with the measured rail removed.  If a merged (non-resolving) outcome
    mixes different photon-number sectors the collapse is no longer a pure
    state and ``None`` is returned in its slot.
    """
    state._check_rail(rail)
    sectors = _project_rail(state, rail)
    if number_resolving:
        out = []
        for key in sorted(sectors):
            sub = sectors[key]
            p = sub.norm() ** 2
            if p <= PRUNE_TOL ** 2:
                continue
            out.append((key, p, sub.renormalize().prune()))
        return out
    merged = {}
    for (nh, nv), sub in sectors.items():
        click = (nh > 0, nv > 0)
        merged.setdefault(click, []).append(sub)
    out = []
    for click in sorted(merged):
        subs = [s for s in merged[click] if s.norm() > PRUNE_TOL]
        p = sum(s.norm() ** 2 for s in subs)
        if p <= PRUNE_TOL ** 2:
            continue
        collapsed = subs[0].renormalize().prune() if len(subs) == 1 else None
        out.append((click, p, collapsed))
    return out


# ---------------------------------------------------------------------------
# Channel derivation
# ---------------------------------------------------------------------------

def _occ_label(occ, rails):
    """Human-readable label for a residual occupation, e.g. '1H' or '2V'."""
    if sum(occ) == 0:
        return "0"
    parts = []
    for i, rail in enumerate(rails):
        nh, nv = occ[2 * i + H], occ[2 * i + V]
        prefix = f"r{rail}:" if len(rails) > 1 else ""
        if nh:
            parts.append(f"{prefix}{nh}H")
        if nv:
            parts.append(f"{prefix}{nv}V")
    return " ".join(parts)


@dataclass
class ChannelEntry:
    """One detection outcome of a derived channel.

    ``kraus`` maps the input-qubit computational basis (columns, H before
    V, rails in the order passed to :func:`derive_channel`) to the listed
    ``output_basis`` of residual Fock states (rows).  ``qubit_output`` is
    true when every residual basis state has exactly one photon per
    surviving rail (the dual-rail qubit subspace; vacuously true when the
    circuit detects everything).
    """

    label: tuple
    kraus: np.ndarray
    output_basis: tuple
    output_occupations: tuple
    qubit_output: bool
    probability: float


@dataclass
class OutcomeChannel:
    input_rails: tuple
    surviving_rails: tuple
    entries: list

    def completeness(self):
        """Sum of K^dag K over all outcomes (identity for a valid channel)."""
        d = 2 ** len(self.input_rails)
        total = np.zeros((d, d), dtype=complex)
        for e in self.entries:
            total += e.kraus.conj().T @ e.kraus
        return total

    def entry(self, label):
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


def _detector_outcomes(state, det):
    """Branch a pure state over one detector's outcomes.

    Yields ``(outcome_label, unnormalized residual FockState)``.  For a
    non-resolving detector, distinct photon-number sectors that share a
    click pattern stay separate branches (they are orthogonal, so this is
    a valid refinement); the label carries the sector to keep the branch
    keys unambiguous across inputs.
    """
    work = state
    if det.basis == "D45":
        work = apply_rotation(state, det.rail, -45.0)
    elif det.basis != "HV":
        raise FockError(f"unknown detector basis {det.basis!r}")
    for (nh, nv), sub in sorted(_project_rail(work, det.rail).items()):
        if sub.norm() <= PRUNE_TOL:
            continue
        if det.number_resolving:
            label = (nh, nv)
        else:
            label = ((nh > 0, nv > 0), (nh, nv))
        yield label, sub


def classify_click(label, number_resolving=True):
    """Photon count classification of a single detector outcome label."""
    if number_resolving:
        nh, nv = label
    else:
        nh, nv = label[1]
    return nh + nv


def derive_channel(circuit, input_rails):
    """Derive the measurement channel a circuit implements on qubit inputs.

    Each input rail carries exactly one photon in an H/V superposition.
    The circuit's unitary elements are applied in order and the detectors
    are then evaluated jointly; for every joint detection outcome the
    linear map from the input computational basis to the residual Fock
    space is returned as a Kraus matrix together with its probability on
    the maximally mixed qubit input.
    """
    circuit.validate()
    detected = circuit.detected_rails()
    if not detected:
        raise FockError("circuit has no detectors")
    surviving = [r for r in range(circuit.n_rails) if r not in detected]
    if set(input_rails) - set(range(circuit.n_rails)):
        raise FockError("input rails outside circuit")

    n_in = len(input_rails)
    d = 2 ** n_in
    detectors = [e for e in circuit.elements if isinstance(e, Detector)]

    # branch map: joint outcome -> {input column: residual amplitude map}
    branches = {}
    for col in range(d):
        pols = [(col >> (n_in - 1 - i)) & 1 for i in range(n_in)]
        state = FockState.from_photons(
            circuit.n_rails, [(r, p) for r, p in zip(input_rails, pols)])
        for el in circuit.elements:
            if isinstance(el, PBS):
                state = apply_pbs(state, el.rail_a, el.rail_b)
            elif isinstance(el, Rotation):
                state = apply_rotation(state, el.rail, el.angle_deg)
        # joint detector evaluation: fold the branch tree left to right
        partial = [((), state)]
        for det_idx, det in enumerate(detectors):
            # rails shrink as detectors fire; recompute the live index
            live = det.rail - sum(1 for q in detectors[:det_idx] if q.rail < det.rail)
            nxt = []
            for labels, st in partial:
                shifted = Detector(live, det.number_resolving, det.basis)
                for lab, sub in _detector_outcomes(st, shifted):
                    nxt.append((labels + (lab,), sub))
            partial = nxt
        for labels, residual in partial:
            branches.setdefault(labels, {})[col] = dict(residual.amps)

    entries = []
    for labels in sorted(branches, key=repr):
        per_col = branches[labels]
        occs = sorted({occ for m in per_col.values() for occ in m})
        qubit_out = all(
            all(occ[2 * i] + occ[2 * i + 1] == 1 for i in range(len(surviving)))
            for occ in occs)
        if qubit_out and surviving:
            # computational ordering: H counts as 0, V as 1, rails big-endian
            occs.sort(key=lambda occ: tuple(occ[2 * i + 1]
                                            for i in range(len(surviving))))
        kraus = np.zeros((len(occs), d), dtype=complex)
        for col, amp_map in per_col.items():
            for occ, a in amp_map.items():
                kraus[occs.index(occ), col] = a
        prob = float(np.trace(kraus.conj().T @ kraus).real) / d
        entries.append(ChannelEntry(
            label=labels,
            kraus=kraus,
            output_basis=tuple(_occ_label(o, surviving) for o in occs),
            output_occupations=tuple(occs),
            qubit_output=qubit_out,
            probability=prob,
        ))
    return OutcomeChannel(tuple(input_rails), tuple(surviving), entries)


# ---------------------------------------------------------------------------
# Canonical fusion circuits
# ---------------------------------------------------------------------------

def type_i_circuit():
    """Type-I fusion: PBS, 45-degree rotation on rail 0, count rail 0.

    Rail 0 is the detected arm, rail 1 the surviving output.  Inputs are
    listed detected-rail first, so the derived Kraus bras read
    (detected qubit, kept qubit).
    """
    return OpticalCircuit(2, [
        PBS(0, 1),
        Rotation(0, 45.0),
        Detector(0, number_resolving=True),
    ])


def type_ii_circuit(number_resolving=False):
    """Type-II fusion: 45-degree rotations on both inputs, PBS, both
    outputs counted in the rotated basis.  Number resolution is not
    required for its operation; the flag exists to check exactly that.
    """
    return OpticalCircuit(2, [
        Rotation(0, 45.0),
        Rotation(1, 45.0),
        PBS(0, 1),
        Rotation(0, 45.0),
        Rotation(1, 45.0),
        Detector(0, number_resolving=number_resolving),
        Detector(1, number_resolving=number_resolving),
    ])


def cz_redundant_circuit(number_resolving=False):
    """Type-II circuit with one extra 45-degree rotation on input rail 0.

    On success this implements a CZ (up to local Paulis) between two
    redundantly encoded logical qubits, consuming one photon from each.
    """
    circ = type_ii_circuit(number_resolving)
    return OpticalCircuit(2, [Rotation(0, 45.0)] + list(circ.elements))
