import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import CONSTANTS, CORPUS, F3, random_tree
from lempertkit import expr as E
from lempertkit.errors import (
    ExprError,
    LexError,
    PoleError,
    SyntaxParseError,
    UnboundIdentifierError,
)

class TestParse:
    def test_f3_structure(self):
        node = E.parse(F3, CONSTANTS)
        assert isinstance(node, E.Div)
        assert E.evaluate(node, (0, 0)) == 0
        assert E.validate_holomorphic(node).ok

    def test_imaginary_unit(self):
        assert E.evaluate(E.parse("2*i"), (0, 0)) == 2j

    def test_precedence(self):
        assert E.evaluate(E.parse("1+2*3"), (0, 0)) == 7
        assert E.evaluate(E.parse("8/4/2"), (0, 0)) == 1
        assert E.evaluate(E.parse("2-3-4"), (0, 0)) == -5
        assert E.evaluate(E.parse("-2*3"), (0, 0)) == -6

    @pytest.mark.parametrize("bad", ["z1 +", "(z1", "z1)", "*z1", "conj z1", ""])
    def test_syntax_errors(self, bad):
        with pytest.raises(SyntaxParseError):
            E.parse(bad)

    def test_lex_error_position(self):
        with pytest.raises(LexError) as info:
            E.parse("z1 + $")
        assert info.value.pos == 5

    def test_unbound_identifier(self):
        with pytest.raises(UnboundIdentifierError) as info:
            E.parse("q*z1")
        assert info.value.name == "q"

    def test_reserved_names_cannot_be_constants(self):
        with pytest.raises(ExprError):
            E.parse("z1", {"z1": 1.0})


class TestHolomorphy:
    def test_conj_of_variable_rejected(self):
        report = E.validate_holomorphic(E.parse("conj(z1)"))
        assert not report.ok
        assert report.violations[0][1] == "conj(z1)"

    def test_conj_of_constant_allowed(self):
        assert E.validate_holomorphic(E.parse("conj(a)*z1", CONSTANTS))

    def test_nested_violation_reports_position(self):
        report = E.validate_holomorphic(E.parse("z1 + 2*conj(z2*z1)"))
        assert [pos for pos, _ in report.violations] == [7]


class TestRoundTrip:
    @pytest.mark.parametrize("src", CORPUS)
    def test_corpus(self, src):
        ast = E.parse(src, CONSTANTS)
        again = E.parse(E.pretty_print(ast), CONSTANTS)
        assert again == ast
        assert E.normalize(again) == E.normalize(ast)

    def test_random_trees(self, rng):
        for _ in range(200):
            ast = random_tree(rng)
            back = E.parse(E.pretty_print(ast))
            assert E.normalize(back) == E.normalize(ast)

    def test_normalize_folds_constants(self):
        assert E.normalize(E.parse("(1+2)*z1")) == E.Mul(E.Const(3 + 0j), E.Var(1))


class TestEvaluation:
    def test_vectorized(self):
        f = E.compile_expr(E.parse(F3, CONSTANTS))
        z1 = np.array([0.1, 0.2j])
        z2 = np.array([0.0, -0.3])
        out = f(z1, z2)
        for k in range(2):
            assert out[k] == pytest.approx(E.evaluate(E.parse(F3, CONSTANTS), (z1[k], z2[k])))

    def test_pole(self):
        with pytest.raises(PoleError):
            E.evaluate(E.parse("1/(z1-z2)"), (0.5, 0.5))


class TestDerivative:
    def test_f3_at_origin(self):
        node = E.parse(F3, {"a": 0.6, "b": 0.6})
        assert E.evaluate(E.d_dz(node, 1), (0, 0)) == pytest.approx(-0.6)
        assert E.evaluate(E.d_dz(node, 2), (0, 0)) == pytest.approx(-0.6)

    def test_conj_of_variable_not_differentiable(self):
        with pytest.raises(ExprError):
            E.d_dz(E.parse("conj(z1)"), 1)

    def test_matches_central_differences(self, rng):
        h = 1e-5
        for _ in range(100):
            node = random_tree(rng, depth=4)
            z = (rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.5, 0.5, 2)) / np.sqrt(2)
            f = E.compile_expr(node)
            for j in (1, 2):
                e = np.zeros(2, complex)
                e[j - 1] = 1
                fd = (f(*(z + h * e)) - f(*(z - h * e))) / (2 * h)
                formal = E.evaluate(E.d_dz(node, j), z)
                assert abs(formal - fd) <= 1e-6 * (1 + abs(formal))

    def test_holomorphic_trees_have_zero_wirtinger_bar(self, rng):
        h = 1e-6
        for _ in range(50):
            node = random_tree(rng)
            f = E.compile_expr(node)
            z = 0.3 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
            for j in range(2):
                e = np.zeros(2, complex)
                e[j] = 1
                dx = (f(*(z + h * e)) - f(*(z - h * e))) / (2 * h)
                dy = (f(*(z + 1j * h * e)) - f(*(z - 1j * h * e))) / (2 * h)
                assert abs(0.5 * (dx + 1j * dy)) <= 1e-8 * (1 + abs(dx))


_leaf = st.one_of(
    st.builds(E.Var, st.sampled_from([1, 2])),
    st.builds(
        lambda re_, im: E.Const(complex(re_, im)),
        st.floats(-1e3, 1e3, allow_nan=False),
        st.sampled_from([0.0, 1.0, -2.5, 0.125]),
    ),
    st.sampled_from([E.Const(CONSTANTS["a"], "a"), E.Const(CONSTANTS["b"], "b")]),
)
_trees = st.recursive(
    _leaf,
    lambda sub: st.one_of(
        st.builds(E.Neg, sub),
        st.builds(E.Conj, sub),
        *(st.builds(op, sub, sub) for op in (E.Add, E.Sub, E.Mul, E.Div)),
    ),
    max_leaves=12,
)


@given(_trees)
def test_pretty_print_round_trips_any_tree(tree):
    # negative and complex literals come back as Neg/Add nodes, hence normalize
    back = E.parse(E.pretty_print(tree), CONSTANTS)
    assert E.normalize(back) == E.normalize(tree)
    assert E.parse(E.pretty_print(back), CONSTANTS) == back


@given(_trees)
def test_holomorphy_check_agrees_with_conj_placement(tree):
    def bad(n):
        if isinstance(n, E.Conj) and E.has_var(n.arg):
            return True
        return any(bad(c) for c in E.children(n))

    assert E.validate_holomorphic(tree).ok is not bad(tree)
