import itertools
import math
import random

import numpy as np
import pytest

from thermaldj.oracle import (
    BooleanOracle,
    FunctionClass,
    FunctionParseError,
    anf,
    classify,
    controlled_u,
    parse_function,
    u_f,
)

import reference as ref


# --- an independent random-expression oracle --------------------------------
#
# Expressions are generated as explicit ASTs, rendered to text for the
# parser, and evaluated directly on the AST for comparison.


def _gen_ast(rng, n, depth):
    choices = ["var", "const"]
    if depth > 0:
        choices += ["not", "and", "xor"]
    kind = rng.choice(choices)
    if kind == "var":
        return ("var", rng.randrange(2, n + 2))
    if kind == "const":
        return ("const", rng.randrange(2))
    if kind == "not":
        return ("not", _gen_ast(rng, n, depth - 1))
    return (kind, _gen_ast(rng, n, depth - 1), _gen_ast(rng, n, depth - 1))


def _render(node, rng):
    kind = node[0]
    if kind == "var":
        return f"x{node[1]}"
    if kind == "const":
        return str(node[1])
    if kind == "not":
        return "!" + _wrap(node[1], rng)
    op = rng.choice(["*", ""]) if kind == "and" else rng.choice(["^", "⊕"])
    sep = f" {op} " if op else " "
    return _wrap(node[1], rng) + sep + _wrap(node[2], rng)


def _wrap(node, rng):
    text = _render(node, rng)
    if node[0] in ("and", "xor", "not") or rng.random() < 0.3:
        return "(" + text + ")"
    return text


def _eval_ast(node, assignment):
    kind = node[0]
    if kind == "var":
        return assignment[node[1]]
    if kind == "const":
        return node[1]
    if kind == "not":
        return 1 - _eval_ast(node[1], assignment)
    a = _eval_ast(node[1], assignment)
    b = _eval_ast(node[2], assignment)
    return a & b if kind == "and" else a ^ b


class TestParseFunction:
    def test_balanced_demo_table(self):
        f = parse_function("x2*x3 ^ x4", 3)
        # independent evaluation of x2 x3 XOR x4 over all eight inputs
        expected = []
        for x2, x3, x4 in itertools.product((0, 1), repeat=3):
            expected.append((x2 & x3) ^ x4)
        assert list(f.table) == expected == [0, 1, 0, 1, 0, 1, 1, 0]

    def test_constant_zero(self):
        assert parse_function("0", 3).table == (0,) * 8

    def test_xor_with_itself_vanishes(self):
        assert parse_function("x2 ^ x2", 1).table == (0, 0)

    def test_adjacency_means_and(self):
        assert parse_function("x2 x3", 2) == parse_function("x2*x3", 2)

    def test_precedence_not_over_and_over_xor(self):
        # !x2*x3 ^ x4 parses as ((!x2) AND x3) XOR x4
        f = parse_function("!x2*x3 ^ x4", 3)
        for j, (x2, x3, x4) in enumerate(itertools.product((0, 1), repeat=3)):
            assert f.table[j] == ((1 - x2) & x3) ^ x4

    def test_parentheses(self):
        f = parse_function("x2*(x3 ^ x4)", 3)
        for j, (x2, x3, x4) in enumerate(itertools.product((0, 1), repeat=3)):
            assert f.table[j] == x2 & (x3 ^ x4)

    def test_syntax_error_carries_position(self):
        with pytest.raises(FunctionParseError) as err:
            parse_function("x2 ^ ", 3)
        assert err.value.position == 5

    def test_unknown_variable_rejected(self):
        with pytest.raises(FunctionParseError):
            parse_function("x9", 3)
        with pytest.raises(FunctionParseError):
            parse_function("x1", 3)  # the control spin is not an input

    def test_trailing_garbage_rejected(self):
        with pytest.raises(FunctionParseError):
            parse_function("x2 )", 3)

    def test_agrees_with_independent_evaluator(self):
        rng = random.Random(2024)
        for _ in range(100):
            n = rng.randrange(1, 5)
            ast = _gen_ast(rng, n, depth=4)
            text = _render(ast, rng)
            f = parse_function(text, n)
            for j in range(2**n):
                assignment = {
                    b + 2: (j >> (n - 1 - b)) & 1 for b in range(n)
                }
                assert f.table[j] == _eval_ast(ast, assignment), text


class TestClassify:
    def test_basic_classes(self):
        assert classify(BooleanOracle.from_bits("00000000")) is FunctionClass.CONSTANT0
        assert classify(BooleanOracle.from_bits("11111111")) is FunctionClass.CONSTANT1
        assert classify(BooleanOracle.from_bits("01010110")) is FunctionClass.BALANCED
        assert classify(BooleanOracle.from_bits("0001")) is FunctionClass.NEITHER

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exhaustive_class_counts(self, n):
        counts = {cls: 0 for cls in FunctionClass}
        for bits in itertools.product((0, 1), repeat=2**n):
            counts[classify(BooleanOracle(n=n, table=bits))] += 1
        assert counts[FunctionClass.CONSTANT0] == 1
        assert counts[FunctionClass.CONSTANT1] == 1
        assert counts[FunctionClass.BALANCED] == math.comb(2**n, 2 ** (n - 1))
        total = 2 ** (2**n)
        assert sum(counts.values()) == total


class TestUf:
    def test_constant_zero_is_identity(self, f_zero):
        assert np.allclose(u_f(f_zero), np.eye(8))

    def test_balanced_demo_diagonal(self, f_balanced):
        # apply the definition (-1)^f(j) to the independently checked table
        expected = np.diag([(-1.0) ** v for v in [0, 1, 0, 1, 0, 1, 1, 0]])
        assert np.allclose(u_f(f_balanced), expected)

    def test_involution(self):
        rng = random.Random(1)
        for _ in range(10):
            bits = tuple(rng.randrange(2) for _ in range(8))
            U = u_f(BooleanOracle(n=3, table=bits))
            assert np.allclose(U @ U, np.eye(8))


class TestControlledU:
    def test_reference_diagonal(self, f_balanced):
        cu = controlled_u(u_f(f_balanced))
        assert np.allclose(np.diag(cu), np.array(ref.CU_FB_DIAGONAL, dtype=complex))
        assert np.allclose(cu, np.diag(np.diag(cu)))

    def test_controlled_identity(self):
        assert np.allclose(controlled_u(np.eye(8)), np.eye(16))

    def test_control_zero_block_untouched(self):
        rng = np.random.default_rng(8)
        U = ref.random_unitary(rng, 4)
        cu = controlled_u(U)
        assert np.allclose(cu[:4, :4], np.eye(4))
        assert np.allclose(cu[4:, 4:], U)
        assert np.allclose(cu[:4, 4:], 0.0)

    def test_commutes_with_z_strings(self, f_balanced):
        cu = controlled_u(u_f(f_balanced))
        for axes in ("ZEEE", "EZZE", "ZZZZ"):
            B = ref.term_matrix(1.0, axes)
            assert np.max(np.abs(cu @ B - B @ cu)) < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(Exception):
            controlled_u(np.ones((4, 4)))


class TestAnf:
    def test_balanced_demo_monomials(self, f_balanced):
        assert set(anf(f_balanced)) == {frozenset({2, 3}), frozenset({4})}

    def test_constant_one(self, f_one):
        assert anf(f_one) == (frozenset(),)

    def test_reconstructs_table(self):
        rng = random.Random(17)
        for _ in range(50):
            n = rng.randrange(1, 4)
            bits = tuple(rng.randrange(2) for _ in range(2**n))
            f = BooleanOracle(n=n, table=bits)
            monomials = anf(f)
            for j in range(2**n):
                x = {b + 2: (j >> (n - 1 - b)) & 1 for b in range(n)}
                val = 0
                for mono in monomials:
                    val ^= all(x[k] for k in mono)
                assert val == bits[j]


class TestBitStrings:
    def test_round_trip(self):
        f = BooleanOracle.from_bits("01010110")
        assert f.n == 3
        assert f.to_bits() == "01010110"

    def test_rejects_bad_strings(self):
        with pytest.raises(Exception):
            BooleanOracle.from_bits("012")
        with pytest.raises(Exception):
            BooleanOracle.from_bits("010")
