"""High-temperature thermal equilibrium state and the algorithm's inputs.

The thermal state is the first-order Boltzmann operator
``(1/N)(1 - sum_l alpha_l I_lz)`` with per-spin polarizations
``alpha_l = hbar omega_l / kT``; the expansion assumes |alpha_l| << 1 but the
magnitudes are not enforced.  From it the computation's starting states are
derived: rho0 = (1/N)(1 + alpha_1 I_1z), modeled as an ideal non-unitary
filter standing in for the usual gradient/polarization-transfer preparation
(it discards every single-spin term except spin 1 and flips that term's
sign), and rho1 = (1/N)(1 + alpha_1 I_1x) obtained from rho0 by an ideal
90-degree y rotation of spin 1.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .spin_algebra import (
    OperatorSum,
    ProductOperatorTerm,
    SpinAlgebraError,
    SpinSystem,
    conjugate,
    matrix_to_terms,
    rotation_matrix,
)


@dataclass(frozen=True)
class ThermalParams:
    """Per-spin polarizations alpha_l, plus a flag to drop the identity term.

    ``reduced_mode`` keeps the 1/N scale but drops the (1/N) identity, which
    only shifts every expectation value by a state-independent constant.
    """

    alphas: tuple[float, ...]
    reduced_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not all(math.isfinite(a) for a in self.alphas):
            raise SpinAlgebraError("polarizations must be finite")

    @classmethod
    def uniform(cls, nspins: int, alpha: float = 1.0, reduced_mode: bool = False) -> "ThermalParams":
        return cls(alphas=(alpha,) * nspins, reduced_mode=reduced_mode)

    @property
    def alpha1(self) -> float:
        return self.alphas[0]


def _axes_with_z(nspins: int, spin: int) -> tuple[str, ...]:
    return tuple("Z" if k == spin else "E" for k in range(1, nspins + 1))


def thermal_state(sys: SpinSystem, p: ThermalParams) -> OperatorSum:
    """First-order thermal state (1/N)(1 - sum_l alpha_l I_lz)."""
    m = sys.nspins
    if len(p.alphas) != m:
        raise SpinAlgebraError(
            f"{len(p.alphas)} polarizations for {m} spins"
        )
    scale = 1.0 / 2 ** m
    terms = [
        ProductOperatorTerm(-a * scale, _axes_with_z(m, k + 1))
        for k, a in enumerate(p.alphas)
    ]
    if not p.reduced_mode:
        terms.append(ProductOperatorTerm(scale, ("E",) * m))
    return OperatorSum(terms, nspins=m)


def prepare_rho0(sys: SpinSystem, p: ThermalParams) -> OperatorSum:
    """Ideal preparation filter: (1/N)(1 + alpha_1 I_1z).

    Starting from the thermal state, every single-spin order except spin 1
    is discarded and the surviving spin-1 term has its sign flipped.  This is
    an idealization of the experimental preparation sequence, which is out of
    scope here; only its net effect on the density operator is kept.
    """
    if sys.nspins < 1:
        raise SpinAlgebraError("system must contain spin 1")
    rho_th = thermal_state(sys, p)
    z1 = _axes_with_z(sys.nspins, 1)
    kept = []
    for t in rho_th.terms:
        if t.weight == 0:
            kept.append(t)
        elif t.axes == z1:
            kept.append(ProductOperatorTerm(-t.coeff, t.axes))
    return OperatorSum(kept, nspins=sys.nspins)


@functools.lru_cache(maxsize=None)
def _y90_matrix(nspins: int):
    out = rotation_matrix(nspins, 1, "y", math.pi / 2.0)
    out.flags.writeable = False
    return out


def prepare_rho1(rho0: OperatorSum) -> OperatorSum:
    """Rotate spin 1 by 90 degrees about y: (1/N)(1 + alpha_1 I_1x)."""
    return matrix_to_terms(conjugate(_y90_matrix(rho0.nspins), rho0.to_matrix()))
