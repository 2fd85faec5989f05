"""Lowering commuting Z-string Hamiltonians to idealized pulse programs.

A program is an ordered list of rotations, delays and barriers plus a
per-spin phase frame.  Everything simulates as its ideal unitary:

* a rotation is exp(-i angle I_axis) on its spin, instantaneous for hard
  pulses and carrying the nominal selective-pulse duration as metadata;
* a delay evolves exp(-i pi J t 2 I_kz I_lz) for each listed active pair
  and nothing else -- decoupling is ideal, an unlisted pair simply does not
  evolve (the decoupled set is bookkeeping for the report);
* the phase frame holds z rotations that commute to the end of the
  sequence.  A spectrometer realizes a frame angle phi as a phase shift of
  -phi on the spin's subsequent pulses and on its receiver; here the frame
  is applied as trailing z rotations when the program is simulated.

Weight-1 terms become frame updates, weight-2 terms become coupling delays
(with a pi-pulse sandwich flipping the sign when the required angle and the
coupling constant disagree), a missing coupling is routed through a relay
spin, and weight-3 terms are conjugated down to a bilinear evolution.  The
compiled program is always checked against the exact exponential of its
source Hamiltonian before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, Union

import numpy as np

from .spin_algebra import (
    OperatorSum,
    ProductOperatorTerm,
    SpinAlgebraError,
    SpinSystem,
    exp_commuting_zsum,
    rotation_matrix,
)

# Nominal durations of shaped single-spin pulses (seconds), metadata only.
SELECTIVE_90_DURATION = 224e-6
SELECTIVE_180_DURATION = 250e-6

VERIFY_TOL = 1e-9

_ANGLE_EPS = 1e-12


class CompilationError(ValueError):
    """A Hamiltonian term cannot be realized on the given topology."""


@dataclass(frozen=True)
class Rotation:
    """Ideal rotation exp(-i angle I_axis) of one spin."""

    spin: int
    axis: str
    angle: float
    kind: str = "hard"
    duration: float = 0.0
    annotation: str = ""

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise SpinAlgebraError(f"rotation axis must be x/y/z, got {self.axis!r}")
        if self.kind not in ("hard", "selective"):
            raise SpinAlgebraError(f"rotation kind must be hard/selective, got {self.kind!r}")
        if self.duration < 0.0:
            raise SpinAlgebraError("durations must be non-negative")


@dataclass(frozen=True)
class Delay:
    """Free evolution window; only the listed coupling pairs evolve."""

    duration: float
    active_couplings: frozenset[tuple[int, int]]
    decoupled_spins: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.duration < 0.0:
            raise SpinAlgebraError("durations must be non-negative")
        pairs = frozenset(
            (min(k, l), max(k, l)) for k, l in self.active_couplings
        )
        if any(k == l for k, l in pairs):
            raise SpinAlgebraError("coupling pairs must join distinct spins")
        object.__setattr__(self, "active_couplings", pairs)
        object.__setattr__(self, "decoupled_spins", frozenset(self.decoupled_spins))


@dataclass(frozen=True)
class Barrier:
    """Zero-duration annotation marker; simulates as the identity."""

    annotation: str = ""


PulseEvent = Union[Rotation, Delay, Barrier]


@dataclass(frozen=True)
class PulseProgram:
    """Ordered pulse events plus the accumulated per-spin phase frame."""

    system: SpinSystem
    events: tuple[PulseEvent, ...] = ()
    phase_frame: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        frame = self.phase_frame or (0.0,) * self.system.nspins
        if len(frame) != self.system.nspins:
            raise SpinAlgebraError("phase frame must cover every spin")
        object.__setattr__(self, "phase_frame", tuple(float(a) for a in frame))
        for ev in self.events:
            if isinstance(ev, Delay):
                for k, l in ev.active_couplings:
                    if not (1 <= k <= self.system.nspins and 1 <= l <= self.system.nspins):
                        raise SpinAlgebraError(f"delay pair ({k}, {l}) outside the system")
                    if self.system.j(k, l) == 0.0:
                        raise SpinAlgebraError(
                            f"delay lists pair ({k}, {l}) but J is zero in the topology"
                        )
            elif isinstance(ev, Rotation):
                if not 1 <= ev.spin <= self.system.nspins:
                    raise SpinAlgebraError(f"rotation spin {ev.spin} outside the system")

    @property
    def total_duration(self) -> float:
        return sum(getattr(ev, "duration", 0.0) for ev in self.events)

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        if other.system is not self.system and other.system != self.system:
            raise SpinAlgebraError("cannot concatenate programs over different systems")
        frame = tuple(a + b for a, b in zip(self.phase_frame, other.phase_frame))
        return PulseProgram(self.system, self.events + other.events, frame)


def empty_program(system: SpinSystem) -> PulseProgram:
    return PulseProgram(system=system)


# --- pulse bookkeeping -----------------------------------------------------


def _pulse_kind(system: SpinSystem, spin: int) -> str:
    """Selective if another spin shares this spin's r.f. channel."""
    ch = system.channels[spin - 1]
    shared = sum(1 for c in system.channels if c == ch)
    return "selective" if shared > 1 else "hard"


def _pulse_duration(kind: str, angle: float) -> float:
    if kind == "hard":
        return 0.0
    return (
        SELECTIVE_90_DURATION
        if abs(angle) <= math.pi / 2 + 1e-9
        else SELECTIVE_180_DURATION
    )


def _rotation(system: SpinSystem, spin: int, axis: str, angle: float) -> Rotation:
    kind = _pulse_kind(system, spin)
    note = "nonresonant compensation assumed" if kind == "selective" else ""
    return Rotation(
        spin=spin,
        axis=axis,
        angle=angle,
        kind=kind,
        duration=_pulse_duration(kind, angle),
        annotation=note,
    )


def _decoupled_spins(system: SpinSystem, pair: tuple[int, int]) -> frozenset[int]:
    out = set()
    for spin in pair:
        out.update(system.coupled_partners(spin))
    return frozenset(out - set(pair))


def _zz_events(
    system: SpinSystem, k: int, l: int, theta: float
) -> list[PulseEvent]:
    """Events realizing exp(-i theta 2 I_kz I_lz) through the J coupling.

    The delay duration is |theta| / (pi J); when theta and J disagree in
    sign the delay runs between two same-phase pi pulses on the smaller
    spin, which flips the effective coupling (up to a global phase).
    """
    if abs(theta) < _ANGLE_EPS:
        return []
    J = system.j(k, l)
    if J == 0.0:
        raise CompilationError(f"spins {k} and {l} are not coupled")
    delay = Delay(
        duration=abs(theta) / (math.pi * abs(J)),
        active_couplings=frozenset({(min(k, l), max(k, l))}),
        decoupled_spins=_decoupled_spins(system, (k, l)),
    )
    if (theta < 0.0) == (J < 0.0):
        return [delay]
    flip = _rotation(system, min(k, l), "x", math.pi)
    return [flip, delay, flip]


# --- conjugation factor lists ----------------------------------------------
#
# A factor is ("rot", spin, axis, angle) or ("zz", k, l, theta), and a factor
# list [F1, ..., Fn] denotes the matrix product F1 @ ... @ Fn, so the LAST
# factor acts first.  Events are therefore emitted in reverse list order.


def _factor_events(system: SpinSystem, factor: tuple) -> list[PulseEvent]:
    if factor[0] == "rot":
        _, spin, axis, angle = factor
        return [_rotation(system, spin, axis, angle)]
    _, k, l, theta = factor
    return _zz_events(system, k, l, theta)


def _product_events(system: SpinSystem, factors: Sequence[tuple]) -> list[PulseEvent]:
    events: list[PulseEvent] = []
    for factor in reversed(factors):
        events.extend(_factor_events(system, factor))
    return events


def _inverse_events(system: SpinSystem, factors: Sequence[tuple]) -> list[PulseEvent]:
    events: list[PulseEvent] = []
    for factor in factors:
        inverted = factor[:-1] + (-factor[-1],)
        events.extend(_factor_events(system, inverted))
    return events


def _transfer_factors(k: int, r: int) -> list[tuple]:
    """Unitary V with V I_rz V^-1 = I_kz, built from the (k, r) coupling."""
    return [
        ("rot", k, "x", math.pi / 2),
        ("zz", k, r, math.pi / 2),
        ("rot", k, "y", math.pi / 2),
        ("rot", r, "x", math.pi / 2),
        ("zz", k, r, math.pi / 2),
        ("rot", r, "y", math.pi / 2),
    ]


def _raise_weight_factors(k: int, m: int) -> list[tuple]:
    """Unitary W with W (I_kz I_lz) W^-1 = 2 I_kz I_lz I_mz for any l."""
    return [
        ("rot", k, "x", math.pi / 2),
        ("zz", k, m, math.pi / 2),
        ("rot", k, "y", math.pi / 2),
    ]


def transfer_unitary(system: SpinSystem, k: int, r: int) -> np.ndarray:
    """Dense matrix of the relay transfer V for tests and verification."""
    U = np.eye(2 ** system.nspins, dtype=complex)
    for factor in _transfer_factors(k, r):
        prog = PulseProgram(system, tuple(_factor_events(system, factor)))
        U = U @ simulate_program(prog)
    return U


def raise_weight_unitary(system: SpinSystem, k: int, m: int) -> np.ndarray:
    """Dense matrix of the weight-raising conjugation W."""
    U = np.eye(2 ** system.nspins, dtype=complex)
    for factor in _raise_weight_factors(k, m):
        prog = PulseProgram(system, tuple(_factor_events(system, factor)))
        U = U @ simulate_program(prog)
    return U


# --- per-term compilers ----------------------------------------------------


def _term_spins(term: ProductOperatorTerm, weight: int) -> tuple[int, ...]:
    if not term.is_zstring():
        raise CompilationError(f"only Z-string terms are compilable, got {term}")
    spins = term.spins
    if len(spins) != weight:
        raise CompilationError(f"expected a weight-{weight} term, got {term}")
    if abs(term.coeff.imag) > _ANGLE_EPS:
        raise CompilationError(f"term coefficient must be real, got {term}")
    return spins


def compile_linear(
    term: ProductOperatorTerm, system: SpinSystem, tau: float = 1.0
) -> PulseProgram:
    """A single-spin Z term is pure z-rotation bookkeeping: zero duration.

    The rotation angle coeff * tau lands in the spin's phase frame; on a
    spectrometer this is a phase shift of minus that angle applied to all
    following pulses on the spin and to its receiver.
    """
    (spin,) = _term_spins(term, 1)
    angle = term.coeff.real * tau
    if abs(angle) < _ANGLE_EPS:
        return empty_program(system)
    frame = [0.0] * system.nspins
    frame[spin - 1] = angle
    return PulseProgram(system, (), tuple(frame))


def compile_bilinear(
    term: ProductOperatorTerm, system: SpinSystem, tau: float = 1.0
) -> PulseProgram:
    """Evolve a coupled pair directly; route through a relay otherwise.

    The stored coefficient c gives the target angle theta = c tau / 2 of
    exp(-i theta 2 I_kz I_lz), so theta = pi/2 needs a delay of 1/(2 J).
    """
    k, l = _term_spins(term, 2)
    theta = term.coeff.real * tau / 2.0
    if abs(theta) < _ANGLE_EPS:
        return empty_program(system)
    if system.j(k, l) != 0.0:
        return PulseProgram(system, tuple(_zz_events(system, k, l, theta)))
    for relay in range(1, system.nspins + 1):
        if relay in (k, l):
            continue
        if system.j(k, relay) != 0.0 and system.j(relay, l) != 0.0:
            return compile_relayed_bilinear(term, relay, system, tau)
    raise CompilationError(
        f"no coupling between spins {k} and {l} and no relay spin joins them"
    )


def compile_relayed_bilinear(
    term: ProductOperatorTerm,
    relay: int,
    system: SpinSystem,
    tau: float = 1.0,
) -> PulseProgram:
    """Simulate a missing coupling: conjugate the (relay, l) evolution.

    With V transferring I_relay,z to I_kz, the program V (delay on relay-l)
    V^-1 exponentiates the uncoupled k-l term up to a global phase.  Needs
    J(k, relay) and J(relay, l) both nonzero.
    """
    k, l = _term_spins(term, 2)
    theta = term.coeff.real * tau / 2.0
    if relay == k or relay == l:
        return compile_bilinear(term, system, tau)
    if not 1 <= relay <= system.nspins:
        raise CompilationError(f"relay spin {relay} outside the system")
    if system.j(k, relay) == 0.0 or system.j(relay, l) == 0.0:
        raise CompilationError(
            f"relay {relay} must couple to both {k} and {l}"
        )
    if abs(theta) < _ANGLE_EPS:
        return empty_program(system)
    # Target exp(-i theta 2 I_kz I_lz) = V exp(-i theta 2 I_rz I_lz) V^-1,
    # so chronologically V^-1 runs first and V closes the conjugation.
    factors = _transfer_factors(k, relay)
    events: list[PulseEvent] = []
    events.extend(_inverse_events(system, factors))
    events.extend(_zz_events(system, relay, l, theta))
    events.extend(_product_events(system, factors))
    return PulseProgram(system, tuple(events))


def compile_trilinear(
    term: ProductOperatorTerm, system: SpinSystem, tau: float = 1.0
) -> PulseProgram:
    """Conjugate a bilinear evolution up to a three-spin Z product.

    The pivot k and helper m (maximizing |J(k, m)|) form the conjugation W;
    the remaining spin l supplies the inner k-l evolution at half the
    trilinear angle, itself compiled directly or through a relay.
    """
    spins = _term_spins(term, 3)
    theta3 = term.coeff.real * tau / 2.0
    if abs(theta3) < _ANGLE_EPS:
        return empty_program(system)

    def inner_direct(k: int, l: int) -> bool:
        return system.j(k, l) != 0.0

    def inner_possible(k: int, l: int) -> bool:
        if inner_direct(k, l):
            return True
        return any(
            r not in (k, l) and system.j(k, r) != 0.0 and system.j(r, l) != 0.0
            for r in range(1, system.nspins + 1)
        )

    candidates = []
    for k in spins:
        for m in spins:
            if m == k or system.j(k, m) == 0.0:
                continue
            (l,) = (s for s in spins if s not in (k, m))
            if not inner_possible(k, l):
                continue
            candidates.append((0 if inner_direct(k, l) else 1, k, -abs(system.j(k, m)), m, l))
    if not candidates:
        raise CompilationError(
            f"no conjugation realizes {term} on this topology"
        )
    _, k, _, m, l = min(candidates)

    factors = _raise_weight_factors(k, m)
    inner = ProductOperatorTerm(theta3 / tau, _axes_for(system.nspins, (k, l)))
    events: list[PulseEvent] = []
    events.extend(_inverse_events(system, factors))
    events.extend(compile_bilinear(inner, system, tau).events)
    events.extend(_product_events(system, factors))
    return PulseProgram(system, tuple(events))


def _axes_for(nspins: int, spins: Iterable[int]) -> tuple[str, ...]:
    spins = set(spins)
    return tuple("Z" if s in spins else "E" for s in range(1, nspins + 1))


def compile_hamiltonian(
    terms: OperatorSum,
    system: SpinSystem,
    tau: float = 1.0,
    grid_delta: float | None = None,
    streamlined: bool = True,
) -> PulseProgram:
    """Compile every term, streamline, and verify against the exact target.

    The terms all commute, so the per-term segments may run in any order;
    couplings are compiled first (in canonical term order, each behind an
    annotation barrier) and the z-rotation frame updates last.  Identity
    terms contribute only a global phase and emit nothing.  The compiled
    program is verified against exp(-i H tau) at the standard tolerance
    before gridding; with ``grid_delta`` set, every delay is then rounded to
    the nearest grid multiple (the induced error is the caller's to report).
    """
    if not terms.is_zsum():
        raise CompilationError("the Hamiltonian must consist of Z-strings")
    if terms.nspins != system.nspins:
        raise SpinAlgebraError(
            f"Hamiltonian spans {terms.nspins} spins, system has {system.nspins}"
        )
    program = empty_program(system)
    linear: list[ProductOperatorTerm] = []
    for term in terms:
        w = term.weight
        if w == 0:
            continue
        if w == 1:
            linear.append(term)
            continue
        if w == 2:
            segment = compile_bilinear(term, system, tau)
        elif w == 3:
            segment = compile_trilinear(term, system, tau)
        else:
            raise CompilationError(
                f"term {term} has weight {w}; only weights up to 3 are realizable"
            )
        if segment.events:
            program += PulseProgram(system, (Barrier(annotation=str(term)),))
            program += segment
    for term in linear:
        program += compile_linear(term, system, tau)

    if streamlined:
        program = streamline(program)
    report = verify(program, exp_commuting_zsum(terms, tau))
    if not report.passed:
        raise CompilationError(
            f"compiled program misses its target by {report.distance:.3e}"
        )
    if grid_delta is not None:
        program = snap_to_grid(program, grid_delta)
    return program


# --- peephole streamlining ---------------------------------------------------


def _normalize_angle(angle: float) -> float:
    """Fold into (-pi, pi]; a 2 pi turn is a global phase and folds to zero."""
    folded = math.remainder(angle, 2.0 * math.pi)
    if folded <= -math.pi + 1e-15:
        folded += 2.0 * math.pi
    return folded


def _is_pi(angle: float) -> bool:
    return abs(abs(angle) - math.pi) < 1e-12


def _zpreserving(ev: PulseEvent, spin: int) -> bool:
    """Can a z rotation on ``spin`` commute rightward past this event?"""
    if isinstance(ev, (Delay, Barrier)):
        return True
    return ev.spin != spin or ev.axis == "z"


def _cancel_pi_pairs(events: list[PulseEvent]) -> tuple[list[PulseEvent], bool]:
    """Drop adjacent same-phase pi pulses on the same spin (barriers are
    transparent for adjacency)."""
    out: list[PulseEvent] = []
    i = 0
    changed = False
    while i < len(events):
        ev = events[i]
        if isinstance(ev, Rotation) and _is_pi(ev.angle):
            j = i + 1
            while j < len(events) and isinstance(events[j], Barrier):
                j += 1
            if j < len(events):
                nxt = events[j]
                if (
                    isinstance(nxt, Rotation)
                    and nxt.spin == ev.spin
                    and nxt.axis == ev.axis
                    and _is_pi(nxt.angle)
                    and (nxt.angle > 0) == (ev.angle > 0)
                ):
                    out.extend(events[i + 1 : j])  # keep intervening barriers
                    i = j + 1
                    changed = True
                    continue
        out.append(ev)
        i += 1
    return out, changed


def _merge_rotations(events: list[PulseEvent]) -> tuple[list[PulseEvent], bool]:
    """Sum the first adjacent same-spin, same-axis rotation pair found."""
    for i, ev in enumerate(events):
        if not isinstance(ev, Rotation):
            continue
        j = i + 1
        while j < len(events) and isinstance(events[j], Barrier):
            j += 1
        if j >= len(events):
            continue
        nxt = events[j]
        if (
            isinstance(nxt, Rotation)
            and nxt.spin == ev.spin
            and nxt.axis == ev.axis
            and nxt.kind == ev.kind
        ):
            angle = _normalize_angle(ev.angle + nxt.angle)
            merged: list[PulseEvent] = []
            if abs(angle) >= _ANGLE_EPS:
                merged = [
                    replace(ev, angle=angle, duration=_pulse_duration(ev.kind, angle))
                ]
            barriers = events[i + 1 : j]
            return events[:i] + barriers + merged + events[j + 1 :], True
    return events, False


def _drop_null_events(events: list[PulseEvent]) -> tuple[list[PulseEvent], bool]:
    out = []
    for ev in events:
        if isinstance(ev, Rotation) and abs(_normalize_angle(ev.angle)) < _ANGLE_EPS:
            continue
        if isinstance(ev, Delay) and ev.duration < 1e-15:
            continue
        out.append(ev)
    return out, len(out) != len(events)


def _absorb_z_rotations(
    events: list[PulseEvent], frame: list[float]
) -> tuple[list[PulseEvent], bool]:
    """Fold z rotations that commute to the end of the program into the frame."""
    changed = False
    out = list(events)
    i = 0
    while i < len(out):
        ev = out[i]
        if isinstance(ev, Rotation) and ev.axis == "z":
            if all(_zpreserving(later, ev.spin) for later in out[i + 1 :]):
                frame[ev.spin - 1] += ev.angle
                del out[i]
                changed = True
                continue
        i += 1
    return out, changed


def streamline(p: PulseProgram) -> PulseProgram:
    """Fixed-point peephole simplification; unitary preserved up to phase.

    Passes: cancel adjacent same-phase pi pulses, merge adjacent same-axis
    rotations, drop null rotations and zero delays, and absorb z rotations
    that commute past everything after them into the phase frame.  The event
    count never increases.
    """
    events = list(p.events)
    frame = list(p.phase_frame)
    for _ in range(10 * len(events) + 10):
        events, c1 = _drop_null_events(events)
        events, c2 = _cancel_pi_pairs(events)
        events, c3 = _merge_rotations(events)
        events, c4 = _absorb_z_rotations(events, frame)
        if not (c1 or c2 or c3 or c4):
            break
    return PulseProgram(p.system, tuple(events), tuple(frame))


def snap_to_grid(p: PulseProgram, delta: float) -> PulseProgram:
    """Round every delay to the nearest integer multiple of ``delta``."""
    if delta <= 0.0:
        raise SpinAlgebraError("grid spacing must be positive")
    events = []
    for ev in p.events:
        if isinstance(ev, Delay):
            snapped = round(ev.duration / delta) * delta
            ev = replace(ev, duration=snapped)
            if ev.duration < 1e-15:
                continue
        events.append(ev)
    return PulseProgram(p.system, tuple(events), p.phase_frame)


# --- simulation and verification ---------------------------------------------


def _delay_unitary(system: SpinSystem, ev: Delay) -> np.ndarray:
    m = system.nspins
    exponent = np.zeros(2 ** m)
    idx = np.arange(2 ** m)
    for k, l in ev.active_couplings:
        theta = math.pi * system.j(k, l) * ev.duration
        sk = 1.0 - 2.0 * ((idx >> (m - k)) & 1)
        sl = 1.0 - 2.0 * ((idx >> (m - l)) & 1)
        exponent = exponent + 0.5 * theta * sk * sl
    return np.diag(np.exp(-1j * exponent))


def simulate_program(p: PulseProgram) -> np.ndarray:
    """Ideal unitary of the whole program, phase frame included."""
    m = p.system.nspins
    U = np.eye(2 ** m, dtype=complex)
    for ev in p.events:
        if isinstance(ev, Rotation):
            U = rotation_matrix(m, ev.spin, ev.axis, ev.angle) @ U
        elif isinstance(ev, Delay):
            U = _delay_unitary(p.system, ev) @ U
    for spin, angle in enumerate(p.phase_frame, start=1):
        if angle != 0.0:
            U = rotation_matrix(m, spin, "z", angle) @ U
    return U


@dataclass(frozen=True)
class VerificationReport:
    distance: float
    passed: bool
    global_phase: complex
    tolerance: float

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{status}: phase-aligned Frobenius distance {self.distance:.3e} (tol {self.tolerance:.0e})"


def verify(p: PulseProgram, target: np.ndarray, tol: float = VERIFY_TOL) -> VerificationReport:
    """Compare the simulated program against a target, ignoring global phase."""
    target = np.asarray(target, dtype=complex)
    U = simulate_program(p)
    if target.shape != U.shape:
        raise SpinAlgebraError("target dimension does not match the program's system")
    overlap = complex(np.trace(target.conj().T @ U))
    phase = overlap / abs(overlap) if abs(overlap) > 0.0 else 1.0
    distance = float(np.linalg.norm(U - phase * target))
    return VerificationReport(
        distance=distance,
        passed=distance <= tol,
        global_phase=phase,
        tolerance=tol,
    )


# --- serialization -----------------------------------------------------------


def _fmt_pairs(pairs: Iterable[tuple[int, int]]) -> str:
    return ",".join(f"{k}-{l}" for k, l in sorted(pairs)) or "-"


def serialize_program(p: PulseProgram) -> str:
    """Line-oriented text form: one tab-separated event per line.

    Columns: EVENT, kind, spin(s), axis, angle_deg, duration_us, flags.
    Frame angles follow the events as FRAME lines.  The output is
    deterministic, so programs can be diffed as fixtures.
    """
    lines = [
        "# pulse program"
        f" ({p.system.nspins} spins, {len(p.events)} events,"
        f" {p.total_duration * 1e6:.3f} us)",
        "# EVENT\tkind\tspins\taxis\tangle_deg\tduration_us\tflags",
    ]
    for ev in p.events:
        if isinstance(ev, Rotation):
            flags = ev.annotation.replace(" ", "_") if ev.annotation else "-"
            lines.append(
                f"ROT\t{ev.kind}\t{ev.spin}\t{ev.axis}\t"
                f"{math.degrees(ev.angle):.6f}\t{ev.duration * 1e6:.3f}\t{flags}"
            )
        elif isinstance(ev, Delay):
            dec = ",".join(str(s) for s in sorted(ev.decoupled_spins)) or "none"
            lines.append(
                f"DELAY\t-\t{_fmt_pairs(ev.active_couplings)}\t-\t-\t"
                f"{ev.duration * 1e6:.3f}\tdecoupled={dec}"
            )
        else:
            note = ev.annotation.replace(" ", "_") if ev.annotation else "-"
            lines.append(f"BARRIER\t-\t-\t-\t-\t0.000\t{note}")
    for spin, angle in enumerate(p.phase_frame, start=1):
        if angle != 0.0:
            lines.append(
                f"FRAME\t-\t{spin}\tz\t{math.degrees(angle):.6f}\t0.000\t-"
            )
    return "\n".join(lines) + "\n"
