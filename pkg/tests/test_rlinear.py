import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lempertkit import indicatrix as ind
from lempertkit import rlinear as rl
from lempertkit.errors import ConfigError, HypothesisError

C, ANTI, NEITHER = rl.Linearity.CLINEAR, rl.Linearity.ANTI_CLINEAR, rl.Linearity.NEITHER


def cmat(rng):
    return rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))


def random_map(rng, kind):
    zero = np.zeros((2, 2))
    if kind is C:
        return rl.RLinearMap2(cmat(rng), zero)
    if kind is ANTI:
        return rl.RLinearMap2(zero, cmat(rng))
    return rl.RLinearMap2(cmat(rng), cmat(rng))


def random_cvec(rng):
    return rng.standard_normal(2) + 1j * rng.standard_normal(2)


class TestOneVariable:
    def test_known_example(self):
        m = rl.RLinearMap1(1, 0.5)
        assert rl.circle_image_radii(m) == (0.5, 1.5)
        assert not rl.is_circle_image(m)

    def test_modulus_formula_matches_direct_evaluation(self, rng):
        theta = np.linspace(0, 2 * np.pi, 4001)
        for _ in range(100):
            a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
            m = rl.RLinearMap1(a, b)
            r = rng.uniform(0.1, 3)
            direct = np.abs(m(r * np.exp(1j * theta))) ** 2
            np.testing.assert_allclose(rl.image_modulus_sq(m, theta, r), direct, atol=1e-12)

    def test_radii_match_dense_sampling(self, rng):
        theta = np.linspace(0, 2 * np.pi, 20001)
        for _ in range(100):
            m = rl.RLinearMap1(complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2)))
            mod = np.abs(m(np.exp(1j * theta)))
            lo, hi = rl.circle_image_radii(m)
            # a grid can only overshoot the true minimum (and undershoot the maximum)
            assert lo - 1e-12 <= mod.min() <= lo + 1e-5
            assert hi - 1e-5 <= mod.max() <= hi + 1e-12

    def test_circle_iff_one_coefficient_vanishes(self, rng):
        for _ in range(200):
            a = complex(*rng.standard_normal(2))
            assert rl.is_circle_image(rl.RLinearMap1(a, 0))
            assert rl.is_circle_image(rl.RLinearMap1(0, a))
            b = 0.1 * np.exp(2j * np.pi * rng.uniform()) * rng.uniform(1, 10)
            a = 0.1 * np.exp(2j * np.pi * rng.uniform()) * rng.uniform(1, 10)
            m = rl.RLinearMap1(a, b)
            lo, hi = rl.circle_image_radii(m)
            assert not rl.is_circle_image(m)
            assert hi - lo == pytest.approx(2 * min(abs(a), abs(b)), abs=1e-12)


class TestRealMatrix:
    def test_matrix_acts_like_the_map(self, rng):
        for _ in range(100):
            T = random_map(rng, NEITHER)
            X = random_cvec(rng)
            np.testing.assert_allclose(T.matrix @ rl.to_real(X), rl.to_real(T(X)), atol=1e-12)

    def test_from_matrix_round_trip(self, rng):
        for _ in range(100):
            M = rng.standard_normal((4, 4))
            np.testing.assert_allclose(rl.RLinearMap2.from_matrix(M).matrix, M, atol=1e-13)

    def test_compose_is_function_composition(self, rng):
        for _ in range(100):
            S, T = random_map(rng, NEITHER), random_map(rng, NEITHER)
            X = random_cvec(rng)
            np.testing.assert_allclose(S.compose(T)(X), S(T(X)), atol=1e-12)
            np.testing.assert_allclose(S.compose(T).matrix, S.matrix @ T.matrix, atol=1e-12)

    def test_complex_structure(self):
        X = np.array([1 + 2j, -0.5j])
        np.testing.assert_allclose(rl.J4 @ rl.to_real(X), rl.to_real(1j * X))

    def test_nonfinite_blocks_rejected(self):
        with pytest.raises(ConfigError):
            rl.RLinearMap2(np.full((2, 2), np.nan), np.zeros((2, 2)))


class TestClassify:
    def test_basic(self):
        assert rl.classify(rl.RLinearMap2.identity()).label is C
        assert rl.classify(rl.RLinearMap2.conjugation()).label is ANTI
        mixed = rl.RLinearMap2(np.diag([0, 1]), np.diag([1, 0]))
        assert rl.classify(mixed).label is NEITHER

    @pytest.mark.parametrize("kind", [C, ANTI, NEITHER])
    def test_random_families(self, rng, kind):
        for _ in range(200):
            assert rl.classify(random_map(rng, kind), 1e-8).label is kind

    def test_zero_map_is_flagged(self):
        c = rl.classify(rl.RLinearMap2(np.zeros((2, 2)), np.zeros((2, 2))))
        assert c.degenerate

    def test_composition_table(self, rng):
        table = {(C, C): C, (ANTI, ANTI): C, (ANTI, C): ANTI, (C, ANTI): ANTI}
        for (s, t), expected in table.items():
            for _ in range(50):
                S, T = random_map(rng, s), random_map(rng, t)
                assert rl.classify(S.compose(T), 1e-8).label is expected

    def test_commutator_criterion_agrees(self, rng):
        for kind in (C, ANTI, NEITHER):
            for _ in range(100):
                c = rl.classify(random_map(rng, kind))
                assert (c.commutator <= 1e-12) == (c.norm_B <= 1e-12)
                assert (c.anticommutator <= 1e-12) == (c.norm_A <= 1e-12)


@pytest.fixture
def origin_model(dab):
    return ind.build_indicatrix(dab, (0, 0))


class TestLineMaps:
    def test_identity_and_swap(self, origin_model):
        lines = ind.line_configuration(origin_model)
        assert rl.maps_lines(rl.RLinearMap2.identity(), lines, lines).permutation == [0, 1, 2]
        swap = rl.RLinearMap2(np.array([[0, 1], [1, 0]]), np.zeros((2, 2)))
        assert rl.maps_lines(swap, lines, lines).permutation == [1, 0, 2]

    def test_mixed_map_tears_the_antidiagonal(self, origin_model):
        lines = ind.line_configuration(origin_model)
        mixed = rl.RLinearMap2(np.diag([0, 1]), np.diag([1, 0]))
        match = rl.maps_lines(mixed, lines, lines)
        assert not match.ok and match.failed_source == 2

    def test_permutations_compose(self, rng):
        src = [random_cvec(rng) for _ in range(3)]
        for _ in range(50):
            T = random_map(rng, C if rng.random() < 0.5 else ANTI)
            S = random_map(rng, C if rng.random() < 0.5 else ANTI)
            mid = [T(v) for v in src][::-1]
            dst = [S(w) for w in mid]
            sigma = rl.maps_lines(T, src, mid).permutation
            tau = rl.maps_lines(S, mid, dst).permutation
            both = rl.maps_lines(S.compose(T), src, dst).permutation
            assert both == [tau[s] for s in sigma]


class TestLineRigidity:
    def test_too_few_lines(self, bidisc):
        model = ind.build_indicatrix(bidisc, (0, 0))
        with pytest.raises(HypothesisError):
            rl.line_rigidity_verdict(rl.RLinearMap2.identity(), model, model)

    def test_identity_and_conjugation(self, origin_model):
        v = rl.line_rigidity_verdict(rl.RLinearMap2.identity(), origin_model, origin_model)
        assert v.hypotheses_hold and v.classification.label is C and not v.contradiction
        v = rl.line_rigidity_verdict(rl.RLinearMap2.conjugation(), origin_model, origin_model)
        assert v.hypotheses_hold and v.classification.label is ANTI and not v.contradiction

    def test_unimodular_and_conjugation_families(self, origin_model, rng):
        for _ in range(100):
            phases = np.exp(2j * np.pi * rng.uniform(0, 1, 2))
            if rng.random() < 0.5:
                phases[:] = phases[0]
            D = np.diag(phases)
            T = rl.RLinearMap2(D, np.zeros((2, 2)))
            if rng.random() < 0.5:
                T = rl.RLinearMap2(np.zeros((2, 2)), D)
            v = rl.line_rigidity_verdict(T, origin_model, origin_model, n_samples=500)
            assert not v.contradiction
            if v.hypotheses_hold:
                assert v.classification.label is not NEITHER

    def test_documents(self, rng):
        T = random_map(rng, NEITHER)
        back = rl.map_from_document(rl.map_to_document(T))
        np.testing.assert_array_equal(back.A, T.A)
        np.testing.assert_array_equal(back.B, T.B)
        with pytest.raises(ConfigError):
            rl.map_from_document({"A": [[1]]})


_floats = st.floats(-10, 10, allow_nan=False)
_blocks = st.lists(_floats, min_size=8, max_size=8).map(
    lambda v: np.array(v[:4]).reshape(2, 2) + 1j * np.array(v[4:]).reshape(2, 2)
)


@given(_blocks, _blocks)
def test_real_matrix_round_trip(A, B):
    T = rl.RLinearMap2(A, B)
    back = rl.RLinearMap2.from_matrix(T.matrix)
    np.testing.assert_allclose(back.A, A, atol=1e-12)
    np.testing.assert_allclose(back.B, B, atol=1e-12)


@given(_blocks, _blocks)
def test_commutator_measures_the_conjugate_part(A, B):
    # ||MJ - JM||_F = 2 sqrt(2) ||B||_F and likewise for the anticommutator and A
    c = rl.classify(rl.RLinearMap2(A, B))
    assert c.commutator == pytest.approx(2 * np.sqrt(2) * c.norm_B, abs=1e-9)
    assert c.anticommutator == pytest.approx(2 * np.sqrt(2) * c.norm_A, abs=1e-9)
