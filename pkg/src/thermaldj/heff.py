"""Effective Hamiltonians generating a diagonal controlled oracle.

Any diagonal unitary is exp(-i H tau) for a diagonal H, but only up to the
branch of the logarithm: each eigenphase is free mod 2pi, and different
choices decompose into very different sets of Z-product terms.  Two choices
are implemented:

* ``effective_hamiltonian`` takes the principal branch (phases in (-pi, pi]),
  optionally shifted by a caller-supplied integer vector of 2pi multiples to
  steer the decomposition toward terms a given coupling topology supports.
* ``anf_hamiltonian`` arithmetizes the function's XOR-of-monomials normal
  form: each monomial contributes pi times the product of (1 - sigma_z)/2
  projectors over its spins and the control.  The resulting term weights are
  bounded by 1 + the monomial degree, which is what makes the balanced demo
  function compilable on a partially coupled four-spin system.

``decompose_diagonal`` expands any diagonal Hamiltonian exactly over the
2^m Z-string basis via trace inner products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .oracle import BooleanOracle, anf
from .spin_algebra import (
    MATCH_TOL,
    OperatorSum,
    ProductOperatorTerm,
    SpinAlgebraError,
    _check_dense,
    zstring_diagonal,
)


@dataclass(frozen=True)
class DiagonalHamiltonian:
    """Eigenphases of H*tau (dimensionless) together with the duration tau."""

    tau: float
    phases: tuple[float, ...]

    def __post_init__(self):
        if self.tau <= 0.0 or not math.isfinite(self.tau):
            raise SpinAlgebraError("tau must be a positive duration")
        n = len(self.phases)
        if n < 2 or n & (n - 1):
            raise SpinAlgebraError(f"phase count {n} is not a power of two")
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    @property
    def nspins(self) -> int:
        return len(self.phases).bit_length() - 1

    def unitary(self) -> np.ndarray:
        """exp(-i H tau) rebuilt entrywise from the phases."""
        return np.diag(np.exp(-1j * np.asarray(self.phases)))


def effective_hamiltonian(
    cU: np.ndarray,
    tau: float,
    shifts: Sequence[int] | None = None,
) -> DiagonalHamiltonian:
    """Principal-branch logarithm of a diagonal unitary: H = (i/tau) log cU.

    Phases are -arg(cU_jj) normalized to (-pi, pi] (so -1 entries map to pi),
    which makes the result deterministic.  ``shifts``, if given, adds 2pi
    times each integer to the corresponding phase; this is the hook for
    reproducing a specific branch known to suit a coupling topology.
    """
    cU = np.asarray(cU, dtype=complex)
    _check_dense(cU)
    diag = np.diag(cU)
    if np.max(np.abs(cU - np.diag(diag))) > MATCH_TOL:
        raise SpinAlgebraError("effective Hamiltonian requires a diagonal unitary")
    if np.max(np.abs(np.abs(diag) - 1.0)) > MATCH_TOL:
        raise SpinAlgebraError("diagonal entries must have unit modulus")
    phases = -np.angle(diag)
    phases[phases <= -math.pi + 1e-15] += 2.0 * math.pi
    if shifts is not None:
        shifts = list(shifts)
        if len(shifts) != len(phases):
            raise SpinAlgebraError(
                f"{len(shifts)} shifts for {len(phases)} diagonal entries"
            )
        if any(s != int(s) for s in shifts):
            raise SpinAlgebraError("branch shifts must be integers (times 2pi)")
        phases = phases + 2.0 * math.pi * np.asarray(shifts, dtype=float)
    return DiagonalHamiltonian(tau=tau, phases=tuple(phases))


def decompose_diagonal(H: DiagonalHamiltonian, nspins: int | None = None) -> OperatorSum:
    """Exact Z-string expansion of a diagonal Hamiltonian.

    Coefficients (rad/s) are c_S = Tr(B_S H) / Tr(B_S^2) for each Z-product
    B_S; the expansion reconstructs the diagonal exactly, so exponentiating
    the result over tau reproduces the source unitary.
    """
    m = H.nspins
    if nspins is not None and nspins != m:
        raise SpinAlgebraError(f"Hamiltonian spans {m} spins, expected {nspins}")
    diag = np.asarray(H.phases) / H.tau
    terms = []
    for mask in range(2 ** m):
        axes = tuple(
            "Z" if (mask >> (m - 1 - k)) & 1 else "E" for k in range(m)
        )
        basis = zstring_diagonal(1.0, axes, m).real
        coeff = float(diag @ basis) / float(basis @ basis)
        terms.append(ProductOperatorTerm(coeff, axes))
    return OperatorSum(terms, nspins=m)


class TracelessResult(NamedTuple):
    terms: OperatorSum
    identity_coefficient: float


def drop_identity(terms: OperatorSum) -> TracelessResult:
    """Remove the all-identity term, recording its coefficient (rad/s).

    The dropped term only contributes the global phase exp(-i c tau) to the
    generated unitary; the coefficient is returned so a verifier can account
    for it.  Applying the operation twice is the same as applying it once.
    """
    ident = terms.coefficient(("E",) * terms.nspins)
    return TracelessResult(terms.traceless(), float(ident.real))


def anf_hamiltonian(f: BooleanOracle, tau: float) -> OperatorSum:
    """Topology-friendly branch: pi/tau times the arithmetized normal form.

    Writing f as an XOR of AND-monomials and summing the monomials over the
    integers (instead of mod 2) gives eigenphases pi * x1 * sum_i m_i(x),
    which exponentiate to (-1)^(x1 f(x)) as required.  Each monomial S
    expands over Z-strings supported on {1} union S only, so the maximum
    term weight is 1 + deg(f) rather than the full spin count the principal
    branch generally needs.
    """
    if tau <= 0.0 or not math.isfinite(tau):
        raise SpinAlgebraError("tau must be a positive duration")
    m = f.n + 1
    terms: list[ProductOperatorTerm] = []
    for monomial in anf(f):
        support = sorted({1} | set(monomial))
        # Product of (1 - 2 I_kz) / 2 over the support, expanded over subsets.
        for sub in range(2 ** len(support)):
            spins = [support[i] for i in range(len(support)) if (sub >> i) & 1]
            coeff = (
                math.pi
                * (-1.0) ** len(spins)
                * 2.0 ** len(spins)
                / 2.0 ** len(support)
                / tau
            )
            axes = tuple("Z" if k in spins else "E" for k in range(1, m + 1))
            terms.append(ProductOperatorTerm(coeff, axes))
    return OperatorSum(terms, nspins=m)


def export_terms(terms: OperatorSum) -> str:
    """One term per line: coefficient, then the spin mask as an E/Z word."""
    lines = []
    for t in terms:
        if not t.is_zstring():
            raise SpinAlgebraError(f"export is defined for Z-strings only, got {t}")
        lines.append(f"{t.coeff.real:.12g}\t{''.join(t.axes)}")
    return "\n".join(lines) + ("\n" if lines else "")
