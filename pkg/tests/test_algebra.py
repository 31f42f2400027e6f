import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentcrit import algebra as alg
from momentcrit import fock
from momentcrit.algebra import Monomial, PolyOperator, Word, a, ad, commutator, normal_product, rewrite_normal
from momentcrit.oracle import materialize

I = PolyOperator.identity()
n0, n1 = alg.number(0), alg.number(1)


def mono(coeff=1.0, **exps):
    return Monomial.of(coeff, **exps).to_poly()


class TestPolyOperator:
    def test_zero_terms_dropped(self):
        assert (a() - a()).is_zero()
        assert PolyOperator({(): 0.0}).is_zero()

    def test_identity_key(self):
        assert I.terms == {(): 1}

    def test_simplify_threshold(self):
        op = a() + 1e-16 * ad()
        assert op == a()

    def test_degree_modes(self):
        op = mono(a=(2, 1), b=(0, 3))
        assert op.degree() == 6 and op.modes() == {0, 1} and op.num_modes == 2

    def test_coerce(self):
        assert PolyOperator.coerce(2) == 2 * I
        assert PolyOperator.coerce(Word.parse("a a^")) == n0 + 1

    def test_pow(self):
        assert a() ** 0 == I
        assert a() ** 3 == mono(a=(0, 3))


class TestAdjoint:
    def test_ladder(self):
        assert alg.adjoint(a()) == ad()

    def test_hermitian_v(self):
        V = alg.V(0.37)
        assert alg.adjoint(V).is_close(V, 1e-15) and V.is_hermitian(1e-15)

    def test_monomial(self):
        c = 0.3 - 2j
        op = c * a(0) ** 2 * ad(1)
        assert alg.adjoint(op) == c.conjugate() * ad(0) ** 2 * a(1)

    def test_involution(self):
        op = (1 + 2j) * mono(a=(1, 2), b=(3, 0)) + 0.5j * I
        assert op.adjoint().adjoint() == op


class TestNormalProduct:
    def test_simple(self):
        assert normal_product(ad(), a()) == n0

    def test_number_square(self):
        assert normal_product(n0, n0) == mono(a=(2, 2))

    def test_quadrature_square(self):
        X = a() + ad()
        assert normal_product(X, X) == a() ** 2 + 2 * n0 + ad() ** 2

    def test_differs_from_product(self):
        assert normal_product(a(), ad()) == n0
        assert a() * ad() == n0 + 1


class TestRewriteNormal:
    def test_commutator_rule(self):
        assert rewrite_normal(Word.parse("a a^")) == n0 + 1

    def test_double(self):
        assert rewrite_normal(Word.parse("a a a^ a^")) == mono(a=(2, 2)) + 4 * n0 + 2

    def test_cross_mode(self):
        assert rewrite_normal(Word.parse("a b^")) == mono(a=(0, 1), b=(1, 0))

    def test_coefficient(self):
        assert rewrite_normal(Word.parse("a a^", 3j)) == 3j * (n0 + 1)

    @pytest.mark.parametrize("q,p", [(0, 0), (1, 1), (2, 3), (3, 2), (5, 4)])
    def test_reorder_coefficients(self, q, p):
        expected = {(p - k, q - k): math.factorial(k) * math.comb(q, k) * math.comb(p, k)
                    for k in range(min(p, q) + 1)}
        got = rewrite_normal(Word(((0, False),) * q + ((0, True),) * p))
        assert {alg.key_dict(k).get(0, (0, 0)): c for k, c in got.items()} == expected

    def test_idempotent_on_normal(self):
        op = mono(a=(2, 1), b=(0, 1)) + 3 * I
        assert rewrite_normal(op) == op

    def test_large_degree_exact(self):
        # 20! * C(20,20)^2 overflows float precision if computed naively
        got = rewrite_normal(Word(((0, False),) * 20 + ((0, True),) * 20))
        assert got.coefficient(()) == math.factorial(20)


class TestCommutator:
    def test_canonical(self):
        assert commutator(a(), ad()) == I

    @pytest.mark.parametrize("phi", [0.0, 0.4, math.pi / 3, 2.0])
    def test_sum_squeezing_pair(self, phi):
        c = commutator(alg.V(phi), alg.V(phi + math.pi / 2))
        assert c.is_close(0.5j * (n0 + n1 + 1), 1e-15)

    @pytest.mark.parametrize("phi", [0.0, 0.4, 1.3])
    def test_multimode_difference_pair(self, phi):
        modes = (0, 1, 2)
        c = commutator(alg.W_multi(phi, modes, 1), alg.W_multi(phi + math.pi / 2, modes, 1))
        assert c.is_close(0.5j * alg.C_diff(modes, 1), 1e-15)

    @pytest.mark.parametrize("phi", [0.0, 0.7])
    def test_multimode_sum_pair(self, phi):
        modes = (0, 1, 2)
        c = commutator(alg.V_multi(phi, modes), alg.V_multi(phi + math.pi / 2, modes))
        assert c.is_close(0.5j * alg.C_sum(modes), 1e-15)

    def test_antisymmetry(self):
        f = mono(a=(1, 2)) + 2j * mono(b=(1, 0))
        g = alg.V(0.3) + n1
        assert commutator(f, g) == -commutator(g, f)


class TestNamed:
    def test_quadrature_single(self):
        assert alg.quadrature(0.0) == a() + ad()

    def test_quadrature_phase(self):
        assert alg.quadrature(math.pi / 2) == 1j * a() - 1j * ad()

    def test_v(self):
        assert alg.V(0.0) == 0.5 * (a(0) * a(1) + ad(0) * ad(1))

    def test_w_multi_reduces(self):
        assert alg.W_multi(0.0, (0, 1), 1) == 0.5 * (a(0) * ad(1) + ad(0) * a(1))
        assert alg.W_multi(0.0, (0, 1), 1) == alg.W(0.0)

    def test_w_multi_phase_convention(self):
        assert alg.W_multi(0.4, (0, 1), 1).is_close(alg.W(-0.4), 1e-15)

    def test_w_multi_k_range(self):
        with pytest.raises(ValueError):
            alg.W_multi(0.0, (0, 1), 2)

    def test_build_named(self):
        assert alg.build_named("V", phi=0.0) == alg.V(0.0)
        with pytest.raises(KeyError):
            alg.build_named("nope")

    def test_n_pm(self):
        assert alg.n_pm(-1) == n0 - n1


class TestShift:
    def test_vacuum(self):
        assert alg.shift_by_mean(a(), fock.make_fock((4,), (0,))) == a()

    def test_coherent(self):
        s = fock.make_coherent((30,), 1.0)
        assert alg.shift_by_mean(a(), s).is_close(a() - 1, 1e-12)

    def test_fock(self):
        assert alg.shift_by_mean(n0, fock.make_fock((4,), (2,))).is_close(n0 - 2, 1e-14)


class TestRender:
    def test_format(self):
        assert alg.render(0.5 * mono(b=(0, 1), a=(1, 0))) == "(0.5+0i) ad^1 a^0 bd^0 b^1"

    def test_zero(self):
        assert alg.render(PolyOperator.zero()) == "(0+0i)"

    def test_sum(self):
        assert alg.render(a() + 1) == "(1+0i) ad^0 a^0 + (1+0i) ad^0 a^1"


class TestWord:
    def test_parse(self):
        assert Word.parse("a a^ b†").letters == ((0, False), (0, True), (1, True))

    def test_adjoint_involution(self):
        wd = Word.parse("a b^ c", 1 + 1j)
        assert wd.adjoint().adjoint() == wd


class TestCSignBand:
    def test_c_minus_d_nonpositive(self, rng):
        modes = (0, 1, 2)
        C, D = alg.C_diff(modes, 1), alg.D_diff(modes, 1)
        for _ in range(10):
            v = rng.normal(size=64) + 1j * rng.normal(size=64)
            s = fock.from_amplitudes((4, 4, 4), v / np.linalg.norm(v))
            assert alg.expect(C - D, s).real <= 1e-10
            assert alg.expect(C + D, s).real >= -1e-10


# dense-matrix faithfulness of the rewriter ---------------------------------

letters = st.lists(st.tuples(st.integers(0, 1), st.booleans()), min_size=0, max_size=6)


def _check_faithful(word: Word, d: int):
    M = 1 + max([m for m, _ in word.letters], default=0)
    shape = fock.ModeShape((d,) * M)
    plain = materialize(word, shape).matrix
    normal = materialize(rewrite_normal(word), shape).matrix
    # keep basis states far enough from the cutoff for the word to act faithfully
    deg = len(word)
    idx = np.array([i for i, occ in enumerate(np.ndindex(*shape.cutoffs)) if max(occ) <= d - 1 - deg])
    np.testing.assert_allclose(normal[np.ix_(idx, idx)], plain[np.ix_(idx, idx)], atol=1e-10)


@settings(max_examples=80, deadline=None)
@given(letters)
def test_rewrite_matches_dense(lets):
    _check_faithful(Word(tuple(lets)), 12)


@pytest.mark.parametrize("text", ["a b c", "c^ a b^ c a", "a a^ b b^ c c^", "c c c^ b a^ a"])
def test_rewrite_matches_dense_three_modes(text):
    _check_faithful(Word.parse(text), 8)


@settings(max_examples=60, deadline=None)
@given(letters)
def test_word_hermiticity(lets):
    s = fock.make_coherent((10, 10, 6), (0.3 + 0.1j, -0.2, 0.25j))
    wd = Word(tuple(lets))
    assert abs(fock.expect_word(s, wd.adjoint()) - np.conj(fock.expect_word(s, wd))) < 1e-12
