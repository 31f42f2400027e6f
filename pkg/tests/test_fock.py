import math

import numpy as np
import pytest

from momentcrit import algebra as alg
from momentcrit import fock
from momentcrit.algebra import Word
from momentcrit.errors import CutoffError, TruncationError
from momentcrit.fock import (
    CoherentMixtureSpec,
    ModeShape,
    MomentCache,
    expect_normal,
    expect_word,
    make_coherent,
    make_fock,
    make_sq_vac,
    make_thermal,
    make_tmsv,
    mix,
    tensor,
)


def w(text):
    return Word.parse(text)


class TestModeShape:
    def test_basic(self):
        s = ModeShape((3, 4))
        assert s.num_modes == 2 and s.dimension == 12

    @pytest.mark.parametrize("cutoffs", [(), (1,), (3, 0)])
    def test_rejects_bad(self, cutoffs):
        with pytest.raises(ValueError):
            ModeShape(cutoffs)

    def test_rejects_overflow(self):
        with pytest.raises(ValueError):
            ModeShape((1000, 1000))


class TestCoherent:
    def test_vacuum(self):
        s = make_coherent((6, 6), (0, 0))
        assert s.leakage == 0
        assert abs(s.amplitudes[0] - 1) < 1e-15

    def test_mean_number(self):
        s = make_coherent((30,), 1.0)
        assert abs(expect_word(s, w("a^ a")) - 1) < 1e-12

    def test_mean_field(self):
        s = make_coherent((25,), 0.5 + 0.5j)
        assert abs(expect_word(s, w("a")) - (0.5 + 0.5j)) < 1e-10

    def test_guard(self):
        with pytest.raises(CutoffError, match="cutoff guard"):
            make_coherent((8,), 2.0)

    def test_guard_override_records_leakage(self):
        with pytest.raises(TruncationError):
            make_coherent((8,), 2.0, allow_large_amplitude=True)
        s = make_coherent((8,), 2.0, allow_large_amplitude=True, leakage_tol=1.0)
        assert s.leakage > 1e-3
        assert abs(s.norm() - (1 - s.leakage)) < 1e-14

    def test_not_renormalised(self):
        s = make_coherent((12,), 1.2, leakage_tol=1e-4)
        expected = 1 - math.exp(-1.44) * sum(1.44 ** n / math.factorial(n) for n in range(12))
        assert s.leakage == pytest.approx(expected, abs=1e-15)


class TestFock:
    def test_vacuum(self):
        s = make_fock((5,), (0,))
        assert abs(expect_word(s, w("a^ a"))) == 0

    def test_number_product(self):
        s = make_fock((4, 4), (1, 1))
        assert expect_word(s, w("a^ a b^ b")) == pytest.approx(1)

    def test_normal_square(self):
        s = make_fock((5, 3), (2, 0))
        assert expect_word(s, w("a^ a^ a a")) == pytest.approx(2)

    def test_out_of_range(self):
        with pytest.raises(CutoffError):
            make_fock((3,), (3,))


class TestThermal:
    def test_zero(self):
        s = make_thermal((5,), 0.0)
        assert s.density()[0, 0] == 1 and s.leakage == 0

    def test_second_moment(self):
        s = make_thermal((40,), 0.5)
        assert expect_word(s, w("a^ a a^ a")).real == pytest.approx(1.0, abs=1e-8)

    def test_normal_second_moment(self):
        s = make_thermal((60,), 1.0)
        assert expect_word(s, w("a^ a^ a a")).real == pytest.approx(2.0, abs=1e-8)

    def test_negative(self):
        with pytest.raises(ValueError):
            make_thermal((5,), -0.1)


class TestSqueezedVacuum:
    def test_zero(self):
        s = make_sq_vac((10,), 0.0)
        assert abs(s.amplitudes[0] - 1) < 1e-15

    def test_quadrature_variance(self, sq_vac_half):
        X = alg.quadrature(math.pi / 2)
        v = alg.expect(alg.normal_product(X, X), sq_vac_half) - alg.expect(X, sq_vac_half) ** 2
        assert v.real == pytest.approx(math.exp(-1) - 1, abs=1e-8)

    def test_mean_number(self, sq_vac_half):
        assert expect_word(sq_vac_half, w("a^ a")).real == pytest.approx(math.sinh(0.5) ** 2, abs=1e-8)

    def test_phase_convention(self):
        s = make_sq_vac((40,), 0.5, 0.3)
        expected = np.exp(0.3j) * math.sinh(0.5) * math.cosh(0.5)
        assert abs(expect_word(s, w("a a")) - expected) < 1e-8


class TestTMSV:
    def test_vacuum(self):
        s = make_tmsv((4, 4), 0.0)
        assert abs(s.amplitudes[0] - 1) < 1e-15

    def test_ab(self, tmsv_one):
        assert abs(expect_word(tmsv_one, w("a b")) - math.sinh(1) * math.cosh(1)) < 1e-6

    def test_numbers(self, tmsv_one):
        for text in ("a^ a", "b^ b"):
            assert expect_word(tmsv_one, w(text)).real == pytest.approx(math.sinh(1) ** 2, abs=1e-6)

    def test_cutoff_30_leaks_beyond_default_tolerance(self):
        # tanh(1)^60 ~ 8e-8 > 1e-8
        with pytest.raises(TruncationError):
            make_tmsv((30, 30), 1.0)

    def test_needs_two_modes(self):
        with pytest.raises(ValueError):
            make_tmsv((5,), 0.1)


class TestTensorMix:
    def test_tensor_vacuum(self):
        v = make_fock((3,), (0,))
        t = tensor(v, v)
        assert t.shape.cutoffs == (3, 3) and abs(t.amplitudes[0] - 1) < 1e-15

    def test_tensor_promotes(self):
        t = tensor(make_fock((3,), (1,)), make_thermal((20,), 0.2))
        assert t.kind == fock.DENSITY

    def test_mix_single(self):
        s = make_coherent((10,), 0.3)
        m = mix([(1.0, s)])
        assert m.kind == fock.DENSITY
        np.testing.assert_allclose(m.density(), s.density(), atol=1e-15)

    def test_mix_cat(self):
        shape = (30,)
        m = mix([(0.5, make_coherent(shape, 1.0)), (0.5, make_coherent(shape, -1.0))])
        assert abs(expect_word(m, w("a"))) < 1e-12
        assert expect_word(m, w("a^ a")).real == pytest.approx(1.0, abs=1e-10)

    def test_mix_validates(self):
        s = make_fock((3,), (0,))
        with pytest.raises(ValueError):
            mix([(0.5, s), (0.4, s)])
        with pytest.raises(ValueError):
            mix([(0.5, s), (0.5, make_fock((4,), (0,)))])


class TestExpectations:
    def test_empty_word(self):
        s = make_coherent((9,), 1.0, leakage_tol=1e-4)
        assert expect_word(s, Word()).real == pytest.approx(1 - s.leakage, abs=1e-15)

    def test_number_on_one(self):
        assert expect_word(make_fock((3,), (1,)), w("a^ a")) == pytest.approx(1)

    def test_antinormal_coherent(self):
        s = make_coherent((40,), 1.0)
        assert expect_word(s, w("a a^")).real == pytest.approx(2.0, abs=1e-10)

    def test_word_coefficient(self):
        s = make_fock((3,), (1,))
        assert expect_word(s, Word.parse("a^ a", 2 - 1j)) == pytest.approx(2 - 1j)

    def test_normal_matches_word(self, coherent2):
        key = alg.make_key({0: (2, 1), 1: (0, 2)})
        word = w("a^ a^ a b b")
        assert abs(expect_normal(coherent2, key) - expect_word(coherent2, word)) < 1e-12

    def test_cache_identity_is_norm(self):
        s = make_coherent((9,), 1.0, leakage_tol=1e-4)
        c = MomentCache(s)
        assert c.normal(()) == pytest.approx(1 - s.leakage)
        assert len(c) == 1

    def test_word_bad_mode(self):
        with pytest.raises(ValueError):
            expect_word(make_fock((3,), (0,)), w("b"))

    @pytest.mark.parametrize("text", ["a", "a^ a", "a b^ a", "b b a^ a^ b^"])
    def test_coherent_eigenrelation(self, coherent2, text):
        alpha = 0.7 + 0.2j
        lhs = expect_word(coherent2, w(text + " a"))
        rhs = alpha * expect_word(coherent2, w(text))
        assert abs(lhs - rhs) < 1e-10


class TestCoherentMixtureSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            CoherentMixtureSpec(((0.5, (1,)), (0.4, (0,))))
        with pytest.raises(ValueError):
            CoherentMixtureSpec(((0.5, (1,)), (0.5, (0, 1))))

    def test_random_is_valid(self, rng):
        for _ in range(10):
            spec = CoherentMixtureSpec.random(rng, 2, 5, 1.5)
            assert abs(sum(wt for wt, _ in spec.components) - 1) <= 1e-12
            assert all(abs(a) <= 1.5 for _, al in spec.components for a in al)

    def test_to_state(self):
        spec = CoherentMixtureSpec(((0.25, (0.5,)), (0.75, (-0.2j,))))
        s = spec.to_state((20,))
        expected = 0.25 * 0.5 + 0.75 * (-0.2j)
        assert abs(expect_word(s, w("a")) - expected) < 1e-12


class TestSuggestCutoff:
    @pytest.mark.parametrize("kind,params", [("coherent", {"alpha": 1.5}), ("thermal", {"nbar": 0.5}),
                                             ("squeezed_vacuum", {"r": 0.5}), ("tmsv", {"r": 1.0})])
    def test_doubling_is_stable(self, kind, params):
        d = fock.suggest_cutoff(kind, **params)
        build = {
            "coherent": lambda d: make_coherent((d,), params.get("alpha", 0)),
            "thermal": lambda d: make_thermal((d,), params.get("nbar", 0)),
            "squeezed_vacuum": lambda d: make_sq_vac((d,), params.get("r", 0)),
            "tmsv": lambda d: make_tmsv((d, d), params.get("r", 0)),
        }[kind]
        s1, s2 = build(d), build(2 * d)
        for text in ("a^ a", "a a", "a^ a^ a a", "a^ a a^ a"):
            x, y = expect_word(s1, w(text)), expect_word(s2, w(text))
            assert abs(x - y) <= 1e-8 * max(1.0, abs(y))

    def test_tmsv_floor(self):
        assert fock.suggest_cutoff("tmsv", r=0.0) == 24

    def test_unknown(self):
        with pytest.raises(ValueError):
            fock.suggest_cutoff("cat")
