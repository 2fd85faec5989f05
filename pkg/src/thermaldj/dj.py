"""Two-step ensemble Deutsch-Jozsa run on the thermal starting state.

Step 1 conjugates rho1 = (1/N)(1 + alpha_1 I_1x) by the controlled oracle;
step 2 reads out <I_1x>.  The controlled form matters: I_1x is the sum of
the outer products |0,j><1,j| + |1,j><0,j|, so a control on spin 1 acts on
one side of each outer product only and the readout picks up the phases
(-1)^f(j) coherently, giving +alpha_1/4, -alpha_1/4, or 0 for constant-0,
constant-1, and balanced functions.  The run is fully deterministic.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from . import oracle as _oracle
from .spin_algebra import (
    OperatorSum,
    ProductOperatorTerm,
    SpinAlgebraError,
    SpinSystem,
    conjugate,
    expectation,
    matrix_to_terms,
    term_to_matrix,
)
from .thermal import ThermalParams, prepare_rho0, prepare_rho1

# Decision margin relative to alpha_1; numerics only, there is no noise model.
DECISION_TOL = 1e-9


class DjDecision(enum.Enum):
    CONSTANT0 = "constant-0"
    CONSTANT1 = "constant-1"
    BALANCED = "balanced"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class DjOutcome:
    """Readout value, its classification and the final state's expansion.

    ``expectation`` is <I_1x> on rho2 (so in units of alpha_1/4 times the
    class sign).  ``rho2_terms`` is the traceless part of the conjugated
    observable cU_f I_1x cU_f-dagger, i.e. the final density operator in the
    reduced convention that drops the identity and sets alpha_1 = 1.
    """

    expectation: float
    decision: DjDecision
    rho2_terms: OperatorSum


@functools.lru_cache(maxsize=None)
def _i1x_matrix(nspins: int) -> np.ndarray:
    out = term_to_matrix(
        ProductOperatorTerm(1.0, ("X",) + ("E",) * (nspins - 1))
    )
    out.flags.writeable = False
    return out


@functools.lru_cache(maxsize=32)
def _rho1_matrix(nspins: int, alphas: tuple[float, ...]) -> np.ndarray:
    """Dense rho1 for a given polarization vector; constant across runs."""
    from .spin_algebra import SpinSystem

    plain = SpinSystem.from_couplings(nspins)
    p = ThermalParams(alphas=alphas)
    out = prepare_rho1(prepare_rho0(plain, p)).to_matrix()
    out.flags.writeable = False
    return out


def closed_form_expectation(f: _oracle.BooleanOracle, alpha1: float = 1.0) -> float:
    """(alpha_1/4) (zeros - ones) / 2^n, the readout in closed form."""
    size = 2 ** f.n
    return alpha1 / 4.0 * (size - 2 * f.ones()) / size


def decide(value: float, alpha1: float = 1.0) -> DjDecision:
    """Classify a readout value against {+alpha_1/4, -alpha_1/4, 0}."""
    tol = DECISION_TOL * abs(alpha1)
    if abs(value - alpha1 / 4.0) < tol:
        return DjDecision.CONSTANT0
    if abs(value + alpha1 / 4.0) < tol:
        return DjDecision.CONSTANT1
    if abs(value) < tol:
        return DjDecision.BALANCED
    return DjDecision.INDETERMINATE


def run_dj(
    sys: SpinSystem,
    f: _oracle.BooleanOracle,
    p: ThermalParams | None = None,
) -> DjOutcome:
    """Execute the algorithm exactly on the density-operator model.

    The controlled oracle is built (and applied) exactly once, as the
    problem's single-query setting requires.  The run always starts from the
    unit-trace rho1 regardless of ``p.reduced_mode``; the readout would be
    unchanged either way since the identity is invisible to <I_1x>.
    """
    if sys.nspins != f.n + 1:
        raise SpinAlgebraError(
            f"system has {sys.nspins} spins but the function needs {f.n + 1}"
        )
    if p is None:
        p = ThermalParams.uniform(sys.nspins)
    rho1 = _rho1_matrix(sys.nspins, p.alphas)
    cu = _oracle.controlled_u(_oracle.u_f(f))
    rho2 = conjugate(cu, rho1)
    value = expectation(_i1x_matrix(sys.nspins), rho2)
    observable = conjugate(cu, _i1x_matrix(sys.nspins))
    return DjOutcome(
        expectation=value,
        decision=decide(value, p.alpha1),
        rho2_terms=matrix_to_terms(observable).traceless(),
    )


def rho2_product_operators(f: _oracle.BooleanOracle) -> OperatorSum:
    """Product-operator expansion of the traceless part of cU_f I_1x cU_f-dagger."""
    cu = _oracle.controlled_u(_oracle.u_f(f))
    conjugated = conjugate(cu, _i1x_matrix(f.n + 1))
    return matrix_to_terms(conjugated).traceless()


def outer_product_expansion(nspins: int) -> list[tuple[int, int]]:
    """Basis-index pairs (a, b) with I_1x = (1/2) sum |a><b| + |b><a|.

    The pairs are (j, j + N/2): states differing only in spin 1.  There are
    2^(m-1) of them, so the state space the algorithm manipulates is
    exponential in the spin count.  The identity is verified numerically
    before returning.
    """
    if nspins < 1:
        raise SpinAlgebraError("need at least one spin")
    half = 2 ** (nspins - 1)
    pairs = [(j, j + half) for j in range(half)]
    rebuilt = np.zeros((2 * half, 2 * half), dtype=complex)
    for a, b in pairs:
        rebuilt[a, b] += 0.5
        rebuilt[b, a] += 0.5
    if np.max(np.abs(rebuilt - _i1x_matrix(nspins))) > 1e-12:
        raise SpinAlgebraError("outer-product reconstruction failed")
    return pairs
