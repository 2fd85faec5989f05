"""Exact operator algebra for systems of spin-1/2 nuclei.

States and Hamiltonians are represented either symbolically, as sums of
weighted products of single-spin operators (``OperatorSum``), or as dense
complex matrices in the computational basis |0...0> ... |1...1> with spin 1
as the most significant bit.  Single-spin operators carry the conventional
factor 1/2 (``I_z = sigma_z / 2``); identity factors in a product are the
full 2x2 identity, so a term with coefficient c and all-identity axes is
c times the identity operator.

All functions are pure and all values immutable after construction, so
everything here is safe to call from concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Axis codes: identity factor plus the three spin components.
AXES = ("E", "X", "Y", "Z")

# Coefficients smaller than this are dropped during canonicalization.
PRUNE_TOL = 1e-12
# Tolerance for matrix comparisons (unitarity, hermiticity, round trips).
MATCH_TOL = 1e-10
# Dense matrices are capped at this many spins (dimension 4096).
MAX_DENSE_SPINS = 12

_HALF_SIGMA = {
    "E": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
    "Z": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
}


class SpinAlgebraError(ValueError):
    """Raised when an operation's preconditions are violated."""


def pauli_factor(axis: str) -> np.ndarray:
    """2x2 factor for one spin: identity for E, sigma_axis/2 otherwise."""
    try:
        return _HALF_SIGMA[axis].copy()
    except KeyError:
        raise SpinAlgebraError(f"unknown axis {axis!r}, expected one of {AXES}")


def _check_axes(axes: Sequence[str]) -> tuple[str, ...]:
    axes = tuple(axes)
    for a in axes:
        if a not in AXES:
            raise SpinAlgebraError(f"unknown axis {a!r}, expected one of {AXES}")
    return axes


@dataclass(frozen=True)
class ProductOperatorTerm:
    """A weighted product of single-spin operators, one axis per spin.

    The matrix realization is ``coeff * kron(factor(axes[0]), ...)`` where
    a non-E factor is sigma/2.  Products such as 2 I1z I2z are stored with
    the explicit numeric coefficient 2.
    """

    coeff: complex
    axes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", _check_axes(self.axes))
        object.__setattr__(self, "coeff", complex(self.coeff))

    @property
    def nspins(self) -> int:
        return len(self.axes)

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return sum(1 for a in self.axes if a != "E")

    @property
    def spins(self) -> tuple[int, ...]:
        """1-indexed spins carrying a non-identity factor."""
        return tuple(k + 1 for k, a in enumerate(self.axes) if a != "E")

    def is_zstring(self) -> bool:
        return all(a in ("E", "Z") for a in self.axes)

    def __str__(self) -> str:
        c = self.coeff
        cs = f"{c.real:g}" if abs(c.imag) < PRUNE_TOL else f"({c:g})"
        if self.weight == 0:
            return f"{cs} E"
        ops = "".join(f"I{k + 1}{a.lower()}" for k, a in enumerate(self.axes) if a != "E")
        return f"{cs} {ops}"


class OperatorSum:
    """Canonicalized sum of product-operator terms over a fixed spin count.

    Terms with identical axes are merged, coefficients below ``PRUNE_TOL``
    are dropped, and the terms are sorted lexicographically (E < X < Y < Z)
    so equal operators compare and print identically.
    """

    __slots__ = ("terms", "nspins")

    def __init__(self, terms: Iterable[ProductOperatorTerm], nspins: int | None = None):
        merged: dict[tuple[str, ...], complex] = {}
        for t in terms:
            if not isinstance(t, ProductOperatorTerm):
                t = ProductOperatorTerm(*t)
            if nspins is None:
                nspins = t.nspins
            elif t.nspins != nspins:
                raise SpinAlgebraError(
                    f"term has {t.nspins} spins, expected {nspins}"
                )
            merged[t.axes] = merged.get(t.axes, 0.0) + t.coeff
        if nspins is None:
            raise SpinAlgebraError("cannot infer spin count of an empty sum")
        kept = [
            ProductOperatorTerm(c, ax)
            for ax, c in merged.items()
            if abs(c) >= PRUNE_TOL
        ]
        kept.sort(key=lambda t: t.axes)
        self.terms = tuple(kept)
        self.nspins = nspins

    @classmethod
    def zero(cls, nspins: int) -> "OperatorSum":
        return cls([], nspins=nspins)

    @classmethod
    def single(cls, coeff: complex, axes: Sequence[str]) -> "OperatorSum":
        return cls([ProductOperatorTerm(coeff, tuple(axes))])

    def coefficient(self, axes: Sequence[str]) -> complex:
        axes = tuple(axes)
        for t in self.terms:
            if t.axes == axes:
                return t.coeff
        return 0.0

    def to_matrix(self) -> np.ndarray:
        dim = 2 ** self.nspins
        out = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            out += term_to_matrix(t, self.nspins)
        return out

    def traceless(self) -> "OperatorSum":
        """Drop the all-identity term."""
        return OperatorSum(
            [t for t in self.terms if t.weight > 0], nspins=self.nspins
        )

    def is_zsum(self) -> bool:
        return all(t.is_zstring() for t in self.terms)

    def scaled(self, factor: complex) -> "OperatorSum":
        return OperatorSum(
            [ProductOperatorTerm(t.coeff * factor, t.axes) for t in self.terms],
            nspins=self.nspins,
        )

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        if other.nspins != self.nspins:
            raise SpinAlgebraError("spin-count mismatch in sum")
        return OperatorSum(self.terms + other.terms, nspins=self.nspins)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + other.scaled(-1.0)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.nspins == other.nspins and self.terms == other.terms

    def __hash__(self):
        return hash((self.nspins, self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(t) for t in self.terms)

    def __repr__(self) -> str:
        return f"OperatorSum({self})"


@dataclass(frozen=True)
class SpinSystem:
    """Spin count, labels, resonance offsets (Hz) and J couplings (Hz).

    ``couplings`` is a symmetric m x m matrix with zero diagonal; it defines
    which spin pairs the pulse compiler may evolve during delays.  The
    optional ``channels`` tags group spins sharing an r.f. channel (used
    only to mark pulses as selective); by default every spin gets its own.
    """

    nspins: int
    labels: tuple[str, ...]
    offsets: tuple[float, ...]
    couplings: tuple[tuple[float, ...], ...]
    channels: tuple[str, ...] = ()

    def __post_init__(self):
        m = self.nspins
        if len(self.labels) != m or len(self.offsets) != m:
            raise SpinAlgebraError("labels/offsets length must equal spin count")
        J = np.asarray(self.couplings, dtype=float)
        if J.shape != (m, m):
            raise SpinAlgebraError(f"coupling matrix must be {m}x{m}")
        if not np.all(np.isfinite(J)) or not all(np.isfinite(self.offsets)):
            raise SpinAlgebraError("offsets and couplings must be finite")
        if np.max(np.abs(J - J.T), initial=0.0) > 0.0:
            raise SpinAlgebraError("coupling matrix must be symmetric")
        if np.max(np.abs(np.diag(J)), initial=0.0) > 0.0:
            raise SpinAlgebraError("self-couplings must be zero")
        if not self.channels:
            object.__setattr__(self, "channels", tuple(f"ch{k}" for k in range(1, m + 1)))
        elif len(self.channels) != m:
            raise SpinAlgebraError("channels length must equal spin count")

    @classmethod
    def from_couplings(
        cls,
        nspins: int,
        couplings: dict[tuple[int, int], float] | None = None,
        offsets: Sequence[float] | None = None,
        labels: Sequence[str] | None = None,
        channels: Sequence[str] | None = None,
    ) -> "SpinSystem":
        """Build a system from a sparse {(k, l): J_hz} map (1-indexed)."""
        J = np.zeros((nspins, nspins))
        for (k, l), j in (couplings or {}).items():
            if not (1 <= k <= nspins and 1 <= l <= nspins) or k == l:
                raise SpinAlgebraError(f"bad coupling pair ({k}, {l})")
            J[k - 1, l - 1] = j
            J[l - 1, k - 1] = j
        return cls(
            nspins=nspins,
            labels=tuple(labels) if labels else tuple(str(k) for k in range(1, nspins + 1)),
            offsets=tuple(offsets) if offsets else (0.0,) * nspins,
            couplings=tuple(map(tuple, J)),
            channels=tuple(channels) if channels else (),
        )

    def j(self, k: int, l: int) -> float:
        """Coupling constant between 1-indexed spins k and l."""
        return self.couplings[k - 1][l - 1]

    def coupled_partners(self, spin: int) -> tuple[int, ...]:
        return tuple(
            l for l in range(1, self.nspins + 1) if l != spin and self.j(spin, l) != 0.0
        )

    def spin_index(self, label: str) -> int:
        """1-indexed spin position for a label."""
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise SpinAlgebraError(f"unknown spin label {label!r}")


def _check_dense(A: np.ndarray) -> int:
    """Validate a dense operator and return its spin count."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SpinAlgebraError(f"operator must be square, got shape {A.shape}")
    dim = A.shape[0]
    m = dim.bit_length() - 1
    if 2 ** m != dim:
        raise SpinAlgebraError(f"dimension {dim} is not a power of two")
    if m > MAX_DENSE_SPINS:
        raise SpinAlgebraError(f"dense backend capped at {MAX_DENSE_SPINS} spins")
    return m


def term_to_matrix(term: ProductOperatorTerm, nspins: int | None = None) -> np.ndarray:
    """Dense realization of a product-operator term.

    The factor for spin l is the identity for axis E and sigma/2 otherwise;
    the result is the coefficient times the Kronecker product over spins,
    with spin 1 the most significant tensor factor.
    """
    if nspins is not None and term.nspins != nspins:
        raise SpinAlgebraError(
            f"term spans {term.nspins} spins, expected {nspins}"
        )
    if term.nspins > MAX_DENSE_SPINS:
        raise SpinAlgebraError(f"dense backend capped at {MAX_DENSE_SPINS} spins")
    out = np.array([[term.coeff]], dtype=complex)
    for a in term.axes:
        factor = _HALF_SIGMA[a]
        rows, cols = out.shape
        out = (out[:, None, :, None] * factor[None, :, None, :]).reshape(
            2 * rows, 2 * cols
        )
    return out


def _decompose_blocks(A: np.ndarray, tol: float) -> list[tuple[tuple[str, ...], complex]]:
    """Recursive Pauli-product expansion, pruning all-zero subtrees."""
    if A.shape[0] == 1:
        c = complex(A[0, 0])
        return [((), c)] if abs(c) > tol else []
    h = A.shape[0] // 2
    a00, a01 = A[:h, :h], A[:h, h:]
    a10, a11 = A[h:, :h], A[h:, h:]
    blocks = {
        "E": (a00 + a11) / 2.0,
        "X": a01 + a10,
        "Y": 1j * (a01 - a10),
        "Z": a00 - a11,
    }
    out: list[tuple[tuple[str, ...], complex]] = []
    for axis in AXES:
        sub = blocks[axis]
        if not sub.any() or np.max(np.abs(sub)) <= tol:
            continue
        for axes, coeff in _decompose_blocks(sub, tol):
            out.append(((axis,) + axes, coeff))
    return out


# Per-spin extraction table: coefficient of axis p from a (row, col) block
# pair, flattened as rc = 2 r + c.  Derived from the block identities
# c_E = (A00 + A11)/2, c_X = A01 + A10, c_Y = i (A01 - A10), c_Z = A00 - A11.
_EXTRACT = np.array(
    [
        [0.5, 0.0, 0.0, 0.5],
        [0.0, 1.0, 1.0, 0.0],
        [0.0, 1.0j, -1.0j, 0.0],
        [1.0, 0.0, 0.0, -1.0],
    ],
    dtype=complex,
)

# Above this spin count the full 4^m coefficient tensor is not worth the
# memory; fall back to the pruned recursion (fast for sparse operators).
_TENSOR_DECOMP_LIMIT = 7


def _decompose_tensor(A: np.ndarray, m: int, tol: float) -> list[tuple[tuple[str, ...], complex]]:
    """Vectorized expansion: contract every spin's (row, col) pair at once."""
    T = A.reshape((2,) * (2 * m))
    order = [ax for k in range(m) for ax in (k, m + k)]
    T = T.transpose(order).reshape((4,) * m)
    # Contract the leading axis with the extraction table m times, cycling
    # the fresh coefficient axis to the back; after m rounds the axes are
    # (p_1, ..., p_m) in spin order again.
    for _ in range(m):
        T = np.moveaxis((_EXTRACT @ T.reshape(4, -1)).reshape((4,) * m), 0, -1)
    flat = T.reshape(-1)
    out = []
    for pos in np.flatnonzero(np.abs(flat) > tol):
        digits = tuple((pos >> (2 * (m - 1 - k))) & 3 for k in range(m))
        axes = tuple(AXES[d] for d in digits)
        out.append((axes, complex(flat[pos])))
    return out


def matrix_to_terms(A: np.ndarray) -> OperatorSum:
    """Expand a dense operator over the product-operator basis.

    Coefficients are the trace inner products Tr(B A) / Tr(B B) against each
    basis string B; ``term_to_matrix`` composed with this is the identity to
    within MATCH_TOL.
    """
    A = np.asarray(A, dtype=complex)
    m = _check_dense(A)
    tol = PRUNE_TOL / 10.0
    if m <= _TENSOR_DECOMP_LIMIT:
        found = _decompose_tensor(A, m, tol)
    else:
        found = _decompose_blocks(A, tol)
    return OperatorSum(
        [ProductOperatorTerm(c, axes) for axes, c in found], nspins=m
    )


def is_hermitian(A: np.ndarray, tol: float = MATCH_TOL) -> bool:
    A = np.asarray(A)
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= tol)


def is_unitary(U: np.ndarray, tol: float = MATCH_TOL) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0) <= tol)


def conjugate(U: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Return U A U-dagger for a unitary U."""
    U = np.asarray(U, dtype=complex)
    A = np.asarray(A, dtype=complex)
    _check_dense(U)
    if A.shape != U.shape:
        raise SpinAlgebraError(f"dimension mismatch: U {U.shape}, A {A.shape}")
    if not is_unitary(U):
        raise SpinAlgebraError("U is not unitary to working tolerance")
    return U @ A @ U.conj().T


def expectation(A: np.ndarray, rho: np.ndarray) -> float:
    """Tr(A rho) for a Hermitian observable A and a unit-trace state rho."""
    A = np.asarray(A, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _check_dense(A)
    if rho.shape != A.shape:
        raise SpinAlgebraError("observable and state dimensions differ")
    if not is_hermitian(A):
        raise SpinAlgebraError("observable is not Hermitian")
    if not is_hermitian(rho):
        raise SpinAlgebraError("state is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > MATCH_TOL:
        raise SpinAlgebraError(f"state trace is {tr:g}, expected 1")
    val = complex(np.trace(A @ rho))
    if abs(val.imag) > MATCH_TOL:
        raise SpinAlgebraError(
            f"expectation has imaginary residue {val.imag:g}; upstream inputs are inconsistent"
        )
    return float(val.real)


_SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def rotation_matrix(nspins: int, spin: int, axis: str, angle: float) -> np.ndarray:
    """exp(-i angle I_axis) acting on one spin of an m-spin register."""
    if nspins > MAX_DENSE_SPINS:
        raise SpinAlgebraError(f"dense backend capped at {MAX_DENSE_SPINS} spins")
    if not 1 <= spin <= nspins:
        raise SpinAlgebraError(f"no spin {spin} in a {nspins}-spin system")
    axis = axis.lower()
    if axis not in _SIGMA:
        raise SpinAlgebraError(f"rotation axis must be x/y/z, got {axis!r}")
    half = angle / 2.0
    gate = np.cos(half) * np.eye(2) - 1j * np.sin(half) * _SIGMA[axis]
    out = np.array([[1.0]], dtype=complex)
    for k in range(1, nspins + 1):
        out = np.kron(out, gate if k == spin else np.eye(2))
    return out


def zstring_diagonal(coeff: complex, axes: Sequence[str], nspins: int) -> np.ndarray:
    """Diagonal of a Z-string term: coeff * (1/2)^w * (-1)^(bits under the mask)."""
    axes = _check_axes(axes)
    signs = np.ones(2 ** nspins)
    scale = coeff
    for k, a in enumerate(axes):
        if a == "E":
            continue
        if a != "Z":
            raise SpinAlgebraError(f"non-Z axis {a!r} in Z-string")
        bit = (np.arange(2 ** nspins) >> (nspins - 1 - k)) & 1
        signs *= 1.0 - 2.0 * bit
        scale *= 0.5
    return scale * signs


def exp_commuting_zsum(H: OperatorSum, tau: float) -> np.ndarray:
    """exp(-i H tau) for a Hamiltonian made entirely of commuting Z-strings.

    Every term must have axes in {E, Z} with a real coefficient (rad/s), so
    the matrix is diagonal and the exponential is taken entrywise; no general
    matrix exponential is involved.
    """
    if H.nspins > MAX_DENSE_SPINS:
        raise SpinAlgebraError(f"dense backend capped at {MAX_DENSE_SPINS} spins")
    diag = np.zeros(2 ** H.nspins)
    for t in H.terms:
        if not t.is_zstring():
            raise SpinAlgebraError(f"non-Z term in Hamiltonian: {t}")
        if abs(t.coeff.imag) > PRUNE_TOL:
            raise SpinAlgebraError(f"complex coefficient in Hamiltonian term: {t}")
        diag += zstring_diagonal(t.coeff.real, t.axes, H.nspins).real
    return np.diag(np.exp(-1j * diag * tau))
