"""Multiplet prediction: what a density operator looks like at the detector.

The detected spin's resonance splits into one line per up/down configuration
of the spins it is J-coupled to, at offset sum_k J_dk s_k (s_k = +-1/2).
Line intensities follow from the product-operator expansion: a term
contributes to the absorptive channel iff it carries X on the detected spin
and only E or Z factors elsewhere, and it multiplies each line by its
coefficient times the product of 2 s_k ... / 2 over its Z spins.  Intensities
are normalized so the bare in-phase state I_dx gives every line intensity 1,
matching the integer ratio notation (1:1:1:1, -1:1:0:0, ...).

Two consequences worth noting: a Z factor on a spin that is *not* coupled to
the detector does not split anything but forces every line of the term to
zero (no in-phase signal can develop from it), and Y-on-detect terms are
dispersive; they are reported in a separate phase channel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .spin_algebra import OperatorSum, SpinAlgebraError, SpinSystem


@dataclass(frozen=True)
class Line:
    offset_hz: float
    intensity: float
    partner_state: str
    dispersive: float = 0.0


@dataclass(frozen=True)
class Multiplet:
    detect: int
    partners: tuple[int, ...]
    lines: tuple[Line, ...]

    def intensities(self) -> tuple[float, ...]:
        return tuple(line.intensity for line in self.lines)

    def ratio_string(self) -> str:
        return ":".join(_fmt_ratio(line.intensity) for line in self.lines)


def _fmt_ratio(x: float) -> str:
    if abs(x - round(x)) < 1e-9:
        return str(int(round(x)))
    return f"{x:.4g}"


def multiplet_of(
    rho_terms: OperatorSum, detect: int, topology: SpinSystem
) -> Multiplet:
    """Lines of the detected spin's multiplet for a product-operator state."""
    m = topology.nspins
    if rho_terms.nspins != m:
        raise SpinAlgebraError(
            f"state spans {rho_terms.nspins} spins, topology has {m}"
        )
    if not 1 <= detect <= m:
        raise SpinAlgebraError(f"no spin {detect} in a {m}-spin system")
    partners = topology.coupled_partners(detect)

    # (coefficient, Z-spin set, dispersive?) for every observable term
    contributions = []
    for t in rho_terms:
        axes = {k + 1: a for k, a in enumerate(t.axes)}
        if axes[detect] not in ("X", "Y"):
            continue
        rest = {k: a for k, a in axes.items() if k != detect}
        if any(a in ("X", "Y") for a in rest.values()):
            continue
        zspins = frozenset(k for k, a in rest.items() if a == "Z")
        if not zspins <= set(partners):
            continue  # a longitudinal factor off the coupled set kills the term
        contributions.append((t.coeff.real, zspins, axes[detect] == "Y"))

    lines = []
    for states in itertools.product((0, 1), repeat=len(partners)):
        s = {k: 0.5 - b for k, b in zip(partners, states)}  # bit 0 -> +1/2
        offset = sum(topology.j(detect, k) * s[k] for k in partners)
        absorptive = 0.0
        dispersive = 0.0
        for coeff, zspins, is_y in contributions:
            value = coeff
            for k in zspins:
                value *= s[k]
            if is_y:
                dispersive += value
            else:
                absorptive += value
        lines.append(
            Line(
                offset_hz=offset,
                intensity=absorptive,
                partner_state="".join(str(b) for b in states),
                dispersive=dispersive,
            )
        )
    lines.sort(key=lambda line: (line.offset_hz, line.partner_state))
    return Multiplet(detect=detect, partners=partners, lines=tuple(lines))


def integrated_signal(rho_terms: OperatorSum, detect: int) -> float:
    """<I_detect,x>: only the bare in-phase term contributes to the integral."""
    m = rho_terms.nspins
    if not 1 <= detect <= m:
        raise SpinAlgebraError(f"no spin {detect} in a {m}-spin system")
    axes = tuple("X" if k == detect else "E" for k in range(1, m + 1))
    return rho_terms.coefficient(axes).real * 2.0 ** (m - 2)


def cnot(control: int, target: int, nspins: int) -> np.ndarray:
    """Controlled-NOT permutation in the computational basis (spin 1 = MSB)."""
    if control == target:
        raise SpinAlgebraError("control and target must be distinct spins")
    if not (1 <= control <= nspins and 1 <= target <= nspins):
        raise SpinAlgebraError("control/target outside the system")
    dim = 2 ** nspins
    cbit = nspins - control
    tbit = nspins - target
    out = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        image = j ^ (1 << tbit) if (j >> cbit) & 1 else j
        out[image, j] = 1.0
    return out


def render_spectrum(
    m: Multiplet,
    linewidth_hz: float,
    span_hz: float | None = None,
    points: int = 2001,
) -> np.ndarray:
    """Sample the multiplet as a sum of unit-height Lorentzians.

    Returns a (points, 2) array of (frequency_hz, amplitude) rows covering
    [-span, span] around the detected spin's resonance.  Each line is
    intensity * (w/2)^2 / ((nu - nu0)^2 + (w/2)^2) so a resolved line peaks
    at its intensity.
    """
    if linewidth_hz <= 0.0:
        raise SpinAlgebraError("linewidth must be positive")
    if span_hz is None:
        reach = max((abs(line.offset_hz) for line in m.lines), default=0.0)
        span_hz = reach + 10.0 * linewidth_hz
    freqs = np.linspace(-span_hz, span_hz, points)
    amp = np.zeros_like(freqs)
    hw2 = (linewidth_hz / 2.0) ** 2
    for line in m.lines:
        amp += line.intensity * hw2 / ((freqs - line.offset_hz) ** 2 + hw2)
    return np.column_stack([freqs, amp])


def spectrum_table(samples: np.ndarray) -> str:
    """Two-column text form of ``render_spectrum`` output."""
    lines = ["# frequency_hz\tamplitude"]
    for f, a in samples:
        lines.append(f"{f:.6f}\t{a:.9f}")
    return "\n".join(lines) + "\n"


def save_spectrum_figure(
    samples: np.ndarray, path: str, title: str = "", ratio: str = ""
) -> None:
    """Render the sampled spectrum to an image file with matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(samples[:, 0], samples[:, 1], lw=1.0, color="#1f3b73")
    ax.axhline(0.0, lw=0.5, color="0.6")
    ax.set_xlabel("offset (Hz)")
    ax.set_ylabel("amplitude")
    ax.invert_xaxis()  # NMR convention: frequency decreases left to right
    label = title if not ratio else (f"{title}   [{ratio}]" if title else f"[{ratio}]")
    if label:
        ax.set_title(label, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
