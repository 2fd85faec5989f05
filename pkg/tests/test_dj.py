import itertools
import random

import numpy as np
import pytest

import thermaldj.oracle as oracle_mod
from thermaldj.dj import (
    DjDecision,
    closed_form_expectation,
    outer_product_expansion,
    rho2_product_operators,
    run_dj,
)
from thermaldj.oracle import BooleanOracle
from thermaldj.spin_algebra import SpinSystem
from thermaldj.thermal import ThermalParams

import reference as ref
from test_spin_algebra import assert_terms


def brute_force_expectation(f, alpha1=1.0):
    """<I_1x> on rho2 by direct dense linear algebra, no library calls."""
    m = f.n + 1
    N = 2**m
    uf = np.diag([(-1.0) ** v for v in f.table]).astype(complex)
    cu = np.eye(N, dtype=complex)
    cu[N // 2 :, N // 2 :] = uf
    i1x = ref.spin_operator(m, 1, "X")
    rho2 = (np.eye(N) + alpha1 * cu @ i1x @ cu.conj().T) / N
    return float(np.trace(i1x @ rho2).real)


class TestRunDj:
    def test_constant_zero(self, glycine, f_zero):
        out = run_dj(glycine, f_zero)
        assert out.expectation == pytest.approx(0.25, abs=1e-12)
        assert out.decision is DjDecision.CONSTANT0
        assert_terms(out.rho2_terms, {"XEEE": 1.0})

    def test_constant_one(self, glycine, f_one):
        out = run_dj(glycine, f_one)
        assert out.expectation == pytest.approx(-0.25, abs=1e-12)
        assert out.decision is DjDecision.CONSTANT1

    def test_balanced(self, glycine, f_balanced):
        out = run_dj(glycine, f_balanced)
        assert abs(out.expectation) < 1e-10
        assert out.decision is DjDecision.BALANCED

    def test_alpha_scales_readout(self, glycine, f_zero):
        p = ThermalParams.uniform(4, alpha=0.2)
        out = run_dj(glycine, f_zero, p)
        assert out.expectation == pytest.approx(0.05, abs=1e-12)

    def test_promise_violator_is_indeterminate(self):
        sys3 = SpinSystem.from_couplings(3)
        f = BooleanOracle(n=2, table=(0, 0, 0, 1))
        out = run_dj(sys3, f)
        # brute-force dense value: alpha1/8 for a 3-ones/1-one table
        assert out.expectation == pytest.approx(brute_force_expectation(f), abs=1e-12)
        assert out.expectation == pytest.approx(1 / 8, abs=1e-10)
        assert out.decision is DjDecision.INDETERMINATE

    def test_spin_count_mismatch(self, glycine):
        with pytest.raises(Exception):
            run_dj(glycine, BooleanOracle(n=2, table=(0, 0, 0, 0)))

    def test_deterministic_repetition(self, glycine, f_balanced):
        first = run_dj(glycine, f_balanced)
        for _ in range(3):
            again = run_dj(glycine, f_balanced)
            assert again.expectation == first.expectation  # bitwise identical
            assert again.decision is first.decision
            assert again.rho2_terms == first.rho2_terms

    def test_oracle_built_exactly_once(self, glycine, f_balanced, monkeypatch):
        calls = {"n": 0}
        real = oracle_mod.controlled_u

        def counting(U):
            calls["n"] += 1
            return real(U)

        monkeypatch.setattr(oracle_mod, "controlled_u", counting)
        run_dj(glycine, f_balanced)
        assert calls["n"] == 1

    def test_promise_completeness_n3(self):
        """All 2 constant and 70 balanced tables decide correctly."""
        sys4 = SpinSystem.from_couplings(4)
        balanced_seen = 0
        for bits in itertools.product((0, 1), repeat=8):
            f = BooleanOracle(n=3, table=bits)
            ones = sum(bits)
            if ones not in (0, 4, 8):
                continue
            out = run_dj(sys4, f)
            if ones == 0:
                assert out.decision is DjDecision.CONSTANT0
                assert out.expectation == pytest.approx(0.25, abs=1e-10)
            elif ones == 8:
                assert out.decision is DjDecision.CONSTANT1
                assert out.expectation == pytest.approx(-0.25, abs=1e-10)
            else:
                balanced_seen += 1
                assert out.decision is DjDecision.BALANCED
                assert abs(out.expectation) < 1e-10
        assert balanced_seen == 70

    def test_closed_form_matches_dense_on_random_tables(self):
        rng = random.Random(77)
        for _ in range(200):
            n = rng.randrange(1, 5)
            bits = tuple(rng.randrange(2) for _ in range(2**n))
            f = BooleanOracle(n=n, table=bits)
            sysm = SpinSystem.from_couplings(n + 1)
            out = run_dj(sysm, f)
            assert out.expectation == pytest.approx(
                closed_form_expectation(f), abs=1e-10
            )
            assert out.expectation == pytest.approx(
                brute_force_expectation(f), abs=1e-10
            )

    @pytest.mark.parametrize("n", list(range(1, 8)))
    def test_signal_does_not_decay_with_input_size(self, n):
        f = BooleanOracle(n=n, table=(0,) * 2**n)
        out = run_dj(SpinSystem.from_couplings(n + 1), f)
        assert out.expectation == pytest.approx(0.25, abs=1e-10)


class TestRho2ProductOperators:
    def test_balanced_demo_expansion(self, f_balanced):
        assert_terms(rho2_product_operators(f_balanced), ref.RHO_B_PRIME)

    def test_constant_is_bare_transverse_order(self, f_zero):
        assert_terms(rho2_product_operators(f_zero), {"XEEE": 1.0})

    def test_single_input_identity_function(self):
        f = BooleanOracle(n=1, table=(0, 1))  # f(x2) = x2
        # brute-force 2x2-block conjugation: cU (I1x) cU+ for diag(1,1,1,-1)
        cu = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
        expected = cu @ ref.spin_operator(2, 1, "X") @ cu.conj().T
        got = rho2_product_operators(f)
        assert np.max(np.abs(got.to_matrix() - expected)) < 1e-12
        assert_terms(got, {"XZ": 2.0})


class TestOuterProductExpansion:
    def test_single_spin(self):
        assert outer_product_expansion(1) == [(0, 1)]

    def test_pair_count_grows_exponentially(self):
        for m in (1, 2, 3, 4, 5):
            assert len(outer_product_expansion(m)) == 2 ** (m - 1)

    def test_reconstruction_checked_against_kron(self):
        m = 4
        pairs = outer_product_expansion(m)
        rebuilt = np.zeros((16, 16), dtype=complex)
        for a, b in pairs:
            rebuilt[a, b] += 0.5
            rebuilt[b, a] += 0.5
        assert np.max(np.abs(rebuilt - ref.spin_operator(m, 1, "X"))) < 1e-12
