"""Boolean test functions and their controlled phase-oracle unitaries.

A function over n input bits is stored as its full truth table, indexed by
j = x2 * 2^(n-1) + x3 * 2^(n-2) + ... + x_{n+1}, i.e. the variables are named
x2 ... x_{n+1} after the spins they live on and x2 is the most significant
bit.  ``u_f`` realizes the phase oracle U_f |j> = (-1)^f(j) |j>, and
``controlled_u`` extends any unitary over spins 2..n+1 with a control on
spin 1 (the most significant qubit).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .spin_algebra import MAX_DENSE_SPINS, SpinAlgebraError, is_unitary


class FunctionClass(enum.Enum):
    CONSTANT0 = "constant-0"
    CONSTANT1 = "constant-1"
    BALANCED = "balanced"
    NEITHER = "neither"


class FunctionParseError(ValueError):
    """Syntax or name error in a function expression, with its position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class BooleanOracle:
    """Truth table of a boolean function over input bits x2 ... x_{n+1}."""

    n: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise SpinAlgebraError("need at least one input bit")
        table = tuple(int(bool(v)) for v in self.table)
        if len(table) != 2 ** self.n:
            raise SpinAlgebraError(
                f"table length {len(table)}, expected {2 ** self.n}"
            )
        object.__setattr__(self, "table", table)

    @classmethod
    def from_bits(cls, bits: str) -> "BooleanOracle":
        """Parse a truth table from bit-string text such as "01010110"."""
        bits = bits.strip()
        if not bits or any(c not in "01" for c in bits):
            raise SpinAlgebraError(f"truth table must be a string of 0/1, got {bits!r}")
        n = len(bits).bit_length() - 1
        if 2 ** n != len(bits):
            raise SpinAlgebraError(f"table length {len(bits)} is not a power of two")
        return cls(n=n, table=tuple(int(c) for c in bits))

    def to_bits(self) -> str:
        return "".join(str(v) for v in self.table)

    def value(self, j: int) -> int:
        return self.table[j]

    def ones(self) -> int:
        return sum(self.table)


def classify(f: BooleanOracle) -> FunctionClass:
    """Sort a table into the promise classes by counting ones."""
    ones = f.ones()
    size = 2 ** f.n
    if ones == 0:
        return FunctionClass.CONSTANT0
    if ones == size:
        return FunctionClass.CONSTANT1
    if 2 * ones == size:
        return FunctionClass.BALANCED
    return FunctionClass.NEITHER


# --- expression parsing ----------------------------------------------------
#
# Grammar (precedence NOT > AND > XOR, AND also by adjacency):
#   xor    := and (('^' | 'XOR-sign') and)*
#   and    := unary (('*' unary) | unary)*
#   unary  := '!' unary | atom
#   atom   := variable | '0' | '1' | '(' xor ')'


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        """(kind, value, position) of the next token without consuming it."""
        t = self.text
        i = self.pos
        while i < len(t) and t[i].isspace():
            i += 1
        if i >= len(t):
            return ("end", "", i)
        c = t[i]
        if c in "^⊕":
            return ("xor", c, i)
        if c == "*":
            return ("and", c, i)
        if c == "!":
            return ("not", c, i)
        if c == "(":
            return ("lparen", c, i)
        if c == ")":
            return ("rparen", c, i)
        if c in "01":
            return ("const", c, i)
        if c in "xX":
            j = i + 1
            while j < len(t) and t[j].isdigit():
                j += 1
            if j == i + 1:
                raise FunctionParseError("variable needs an index, e.g. x2", i)
            return ("var", t[i:j], i)
        raise FunctionParseError(f"unexpected character {c!r}", i)

    def take(self) -> tuple[str, str, int]:
        kind, value, pos = self.peek()
        self.pos = pos + len(value)
        return kind, value, pos


def _parse_xor(tk: _Tokenizer, n: int):
    node = _parse_and(tk, n)
    while tk.peek()[0] == "xor":
        tk.take()
        rhs = _parse_and(tk, n)
        lhs = node
        node = (lambda a, l=lhs, r=rhs: l(a) ^ r(a))
    return node


def _parse_and(tk: _Tokenizer, n: int):
    node = _parse_unary(tk, n)
    while True:
        kind = tk.peek()[0]
        if kind == "and":
            tk.take()
        elif kind not in ("var", "const", "not", "lparen"):
            return node
        rhs = _parse_unary(tk, n)
        lhs = node
        node = (lambda a, l=lhs, r=rhs: l(a) & r(a))


def _parse_unary(tk: _Tokenizer, n: int):
    kind, value, pos = tk.peek()
    if kind == "not":
        tk.take()
        inner = _parse_unary(tk, n)
        return lambda a, f=inner: 1 - f(a)
    return _parse_atom(tk, n)


def _parse_atom(tk: _Tokenizer, n: int):
    kind, value, pos = tk.take()
    if kind == "const":
        v = int(value)
        return lambda a, v=v: v
    if kind == "var":
        idx = int(value[1:])
        if not (2 <= idx <= n + 1):
            raise FunctionParseError(
                f"unknown variable {value}; valid variables are x2..x{n + 1}", pos
            )
        return lambda a, i=idx - 2: a[i]
    if kind == "lparen":
        inner = _parse_xor(tk, n)
        kind2, _, pos2 = tk.take()
        if kind2 != "rparen":
            raise FunctionParseError("expected ')'", pos2)
        return inner
    if kind == "end":
        raise FunctionParseError("unexpected end of expression", pos)
    raise FunctionParseError(f"unexpected token {value!r}", pos)


def parse_function(expr: str, n: int) -> BooleanOracle:
    """Evaluate a boolean expression over x2..x_{n+1} into a truth table.

    Operators: NOT '!', AND '*' or adjacency, XOR '^'; constants 0 and 1;
    parentheses for grouping.  Raises FunctionParseError with the offending
    position on bad syntax or out-of-range variables.
    """
    if n < 1:
        raise SpinAlgebraError("need at least one input bit")
    tk = _Tokenizer(expr)
    fn = _parse_xor(tk, n)
    kind, value, pos = tk.peek()
    if kind != "end":
        raise FunctionParseError(f"trailing input {value!r}", pos)
    table = []
    for j in range(2 ** n):
        assignment = tuple((j >> (n - 1 - b)) & 1 for b in range(n))
        table.append(fn(assignment))
    return BooleanOracle(n=n, table=tuple(table))


# --- oracle unitaries ------------------------------------------------------


def u_f(f: BooleanOracle) -> np.ndarray:
    """Diagonal phase oracle with entries (-1)^f(j)."""
    signs = 1.0 - 2.0 * np.array(f.table, dtype=float)
    return np.diag(signs.astype(complex))


def controlled_u(U: np.ndarray) -> np.ndarray:
    """Add a control on spin 1: identity block for |0>, U for |1>."""
    U = np.asarray(U, dtype=complex)
    dim = U.shape[0]
    if U.ndim != 2 or U.shape[1] != dim or dim & (dim - 1):
        raise SpinAlgebraError(f"controlled operand must be square power-of-two, got {U.shape}")
    if 2 * dim > 2 ** MAX_DENSE_SPINS:
        raise SpinAlgebraError(f"dense backend capped at {MAX_DENSE_SPINS} spins")
    if not is_unitary(U):
        raise SpinAlgebraError("controlled operand is not unitary")
    out = np.eye(2 * dim, dtype=complex)
    out[dim:, dim:] = U
    return out


def anf(f: BooleanOracle) -> tuple[frozenset[int], ...]:
    """Algebraic normal form: the XOR-of-AND-monomials expansion of f.

    Returns the monomials as frozensets of spin indices (2..n+1); the empty
    set is the constant-1 monomial.  Computed with the standard in-place
    Moebius transform over GF(2).
    """
    coeffs = list(f.table)
    size = len(coeffs)
    step = 1
    while step < size:
        for block in range(0, size, 2 * step):
            for i in range(block, block + step):
                coeffs[i + step] ^= coeffs[i]
        step *= 2
    monomials = []
    for mask in range(size):
        if not coeffs[mask]:
            continue
        spins = frozenset(
            b + 2 for b in range(f.n) if (mask >> (f.n - 1 - b)) & 1
        )
        monomials.append(spins)
    return tuple(monomials)
