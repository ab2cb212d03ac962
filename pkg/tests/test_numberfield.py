"""Tests for number field arithmetic, units and Galois structure.

Frozen values (minimal polynomials, conjugate coordinates) are verified
against sympy oracles computed from the defining real numbers, and against
exact resubstitution identities that do not depend on this module's own
arithmetic being right.
"""

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from lcpforge._backend import QQ
from lcpforge.errors import (
    InconclusiveIrreducibilityError,
    InputError,
    NonUnitError,
    NotCyclicError,
    NotNormalError,
    ReduciblePolynomialError,
)
from lcpforge.numberfield import (
    GaloisMap,
    conjugates_in_field,
    dirichlet_rank_bound,
    elem_arith,
    elem_from_json,
    field_new,
    galois_generator,
    irreducibility_heuristic,
    is_unit,
    minimal_polynomial,
    require_unit,
)
from lcpforge.polynomials import IntPoly, RatPoly

M7 = IntPoly((-1, -2, 1, 1))  # x^3 + x^2 - 2x - 1
PLASTIC = IntPoly((-1, -1, 0, 1))  # x^3 - x - 1
GOLDEN = IntPoly((-1, 1, 1))  # x^2 + x - 1


@pytest.fixture(scope="module")
def m7():
    return field_new(M7)


def _coords(elems):
    return st.lists(elems, min_size=3, max_size=3)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=6).map(
    lambda f: QQ(f.numerator, f.denominator)
)


class TestFieldNew:
    def test_signatures(self, m7):
        assert m7.degree == 3
        assert m7.signature == (3, 0)
        assert field_new(PLASTIC).signature == (1, 1)
        assert field_new(GOLDEN).signature == (2, 0)

    def test_witness_recorded(self, m7):
        assert m7.irreducibility
        assert "degree <= 3" in m7.irreducibility

    def test_rejects_reducible(self):
        with pytest.raises(ReduciblePolynomialError):
            field_new(IntPoly((-1, 0, 1)))  # x^2 - 1
        with pytest.raises(ReduciblePolynomialError):
            field_new(IntPoly((1, 0, 2, 0, 1)))  # (x^2 + 1)^2

    def test_rejects_non_monic_or_constant(self):
        with pytest.raises(InputError):
            field_new(IntPoly((-1, 2)))  # 2x - 1 is not monic
        with pytest.raises(InputError):
            field_new(IntPoly((1,)))
        # degree 1 is legal and describes the rationals
        assert field_new(IntPoly((1, 1))).degree == 1

    def test_inconclusive_requires_force(self):
        quartic = IntPoly((1, 0, 0, 0, 1))  # x^4 + 1, reducible mod every prime
        with pytest.raises(InconclusiveIrreducibilityError):
            field_new(quartic)
        field = field_new(quartic, force=True)
        assert field.signature == (0, 2)
        assert "assumed by caller" in field.irreducibility

    def test_modular_witness(self):
        field = field_new(IntPoly((1, 1, 0, 0, 1)))  # x^4 + x + 1
        assert "modulo" in field.irreducibility


class TestIrreducibilityHeuristic:
    def test_layers(self):
        assert irreducibility_heuristic(IntPoly((-2, 1)))[0] == "irreducible"
        verdict, witness = irreducibility_heuristic(IntPoly((-1, 0, 1)))
        assert verdict == "reducible" and "root" in witness
        verdict, witness = irreducibility_heuristic(IntPoly((1, 2, 1)))
        assert verdict == "reducible" and "repeated" in witness
        assert irreducibility_heuristic(M7)[0] == "irreducible"
        assert irreducibility_heuristic(IntPoly((1, 0, 0, 0, 1)))[0] == "inconclusive"
        # x^4 - 10x^2 + 1 is irreducible but splits modulo every prime
        assert irreducibility_heuristic(IntPoly((1, 0, -10, 0, 1)))[0] == "inconclusive"


class TestElementArithmetic:
    def test_constructors(self, m7):
        assert m7.one() == m7.from_rational(1)
        assert m7.from_coords((1, 0, 0)) == m7.one()
        assert not m7.zero()
        assert m7.gen().coords == (0, 1, 0)
        with pytest.raises(InputError):
            m7.from_coords((1, 2))

    @given(_coords(rationals), _coords(rationals), _coords(rationals))
    def test_ring_axioms(self, ca, cb, cc):
        field = field_new(M7)
        a, b, c = (field.from_coords(x) for x in (ca, cb, cc))
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert a + (-a) == field.zero()
        assert a * field.one() == a

    @given(_coords(rationals))
    def test_inverse(self, ca):
        field = field_new(M7)
        a = field.from_coords(ca)
        if not a:
            with pytest.raises(ZeroDivisionError):
                a.inverse()
        else:
            assert a * a.inverse() == field.one()
            assert a ** -1 == a.inverse()
            assert 1 / a == a.inverse()

    @given(_coords(rationals))
    def test_minimal_polynomial_annihilates(self, ca):
        field = field_new(M7)
        a = field.from_coords(ca)
        mp = minimal_polynomial(a)
        assert mp.is_monic()
        assert not mp(a)

    def test_scalar_mixing(self, m7):
        alpha = m7.gen()
        assert (alpha + 1) - 1 == alpha
        assert 2 * alpha == alpha + alpha
        assert (3 - alpha) + alpha == m7.from_rational(3)
        assert alpha * QQ(1, 2) + alpha * QQ(1, 2) == alpha

    def test_powers(self, m7):
        alpha = m7.gen()
        # alpha^3 = -alpha^2 + 2 alpha + 1 in this field
        assert alpha ** 3 == m7.from_coords((1, 2, -1))
        assert alpha ** 0 == m7.one()

    def test_cross_field_mixing_rejected(self, m7):
        other = field_new(GOLDEN)
        with pytest.raises(InputError):
            m7.gen() + other.gen()

    def test_elem_arith_dispatch(self, m7):
        a, b = m7.gen(), m7.from_rational(2)
        assert elem_arith(a, b, "add") == a + b
        assert elem_arith(a, b, "sub") == a - b
        assert elem_arith(a, b, "mul") == a * b
        assert elem_arith(a, b, "div") == a * b.inverse()
        assert elem_arith(a, b, "pow") == a ** 2
        assert elem_arith(a, m7.from_rational(-3), "pow") == a.inverse() ** 3
        with pytest.raises(InputError):
            elem_arith(a, b, "rem")
        with pytest.raises(InputError):
            elem_arith(a, a, "pow")
        with pytest.raises(InputError):
            elem_arith(a, m7.from_rational(QQ(1, 2)), "pow")

    def test_json_round_trip(self, m7):
        a = m7.from_coords((QQ(1, 2), QQ(-3), QQ(7, 5)))
        data = a.to_json()
        assert data == ["1/2", "-3", "7/5"]
        assert elem_from_json(m7, data) == a
        with pytest.raises(InputError):
            elem_from_json(m7, ["1", "2", "x"])


class TestMinimalPolynomial:
    def test_generator(self, m7):
        assert minimal_polynomial(m7.gen()) == M7.to_rat()

    def test_rational(self, m7):
        assert minimal_polynomial(m7.from_rational(QQ(5))) == RatPoly((-5, 1))

    def test_frozen_quadratic_sum(self, m7):
        # beta = alpha + alpha^2 has minimal polynomial x^3 - 4x^2 + 3x + 1
        alpha = m7.gen()
        beta = alpha + alpha ** 2
        got = minimal_polynomial(beta)
        assert got == RatPoly((1, 3, -4, 1))
        # independent oracle from the defining real number
        x = sympy.Symbol("x")
        root = 2 * sympy.cos(2 * sympy.pi / 7)
        expected = sympy.minimal_polynomial(root + root ** 2, x)
        assert sympy.Poly(expected, x).all_coeffs() == [1, -4, 3, 1]


class TestUnits:
    def test_generator_is_unit(self, m7):
        assert is_unit(m7.gen())
        assert is_unit(m7.gen() + 1)
        assert is_unit(m7.gen() + m7.gen() ** 2)

    def test_non_units(self, m7):
        assert not is_unit(m7.zero())
        assert not is_unit(m7.from_rational(2))
        assert not is_unit(2 * m7.gen())
        assert not is_unit(m7.gen() * QQ(1, 2))
        with pytest.raises(NonUnitError):
            require_unit(m7.from_rational(3))

    def test_unit_closure(self, m7):
        alpha = m7.gen()
        assert is_unit(alpha.inverse())
        assert is_unit(alpha * (alpha + 1))


class TestGalois:
    def test_cubic_generator_golden(self, m7):
        tau = galois_generator(m7)
        assert tau.image.coords == (-2, 0, 1)
        assert tau.order() == 3
        assert tau.power(3).is_identity()
        # orbit of the generator: alpha -> alpha^2 - 2 -> -alpha^2 - alpha + 1
        second = tau.apply(tau.image)
        assert second.coords == (1, -1, -1)
        assert tau.apply(second) == m7.gen()

    def test_conjugates_cubic(self, m7):
        conj = conjugates_in_field(m7)
        assert len(conj) == 3
        assert m7.gen() in conj

    def test_quadratic_shortcut(self):
        field = field_new(GOLDEN)
        tau = galois_generator(field)
        assert tau.image.coords == (-1, -1)
        assert tau.order() == 2

    def test_quadratic_search_path(self):
        # x^2 - 2 is not a trace-polynomial field, so the numeric
        # reconstruction runs; the only conjugate is -alpha
        field = field_new(IntPoly((-2, 0, 1)))
        tau = galois_generator(field)
        assert tau.image == -field.gen()
        assert tau.order() == 2

    def test_not_normal(self):
        with pytest.raises(NotNormalError):
            galois_generator(field_new(PLASTIC))

    def test_not_normal_complex_quartic(self):
        field = field_new(IntPoly((1, 1, 0, 0, 1)))  # x^4 + x + 1
        with pytest.raises(NotNormalError):
            galois_generator(field)

    def test_not_cyclic(self):
        # x^4 - 10x^2 + 1 generates the compositum of sqrt(2) and sqrt(3);
        # every automorphism has order 2
        field = field_new(IntPoly((1, 0, -10, 0, 1)), force=True)
        with pytest.raises(NotCyclicError):
            galois_generator(field)

    def test_degree_one_identity(self):
        field = field_new(IntPoly((-2, 1)))  # x - 2, the rationals
        assert field.signature == (1, 0)
        assert field.gen() == field.from_rational(2)
        tau = galois_generator(field)
        assert tau.is_identity()
        assert tau.order() == 1
        assert conjugates_in_field(field) == [field.gen()]

    def test_map_validation(self, m7):
        with pytest.raises(InputError):
            GaloisMap(m7, m7.from_rational(1))

    def test_apply_is_homomorphism(self, m7):
        tau = galois_generator(m7)
        a = m7.from_coords((QQ(1, 2), 2, -1))
        b = m7.from_coords((0, QQ(5), QQ(1, 3)))
        assert tau.apply(a * b) == tau.apply(a) * tau.apply(b)
        assert tau.apply(a + b) == tau.apply(a) + tau.apply(b)

    def test_compose(self, m7):
        tau = galois_generator(m7)
        assert tau.compose(tau) == tau.power(2)
        assert tau.compose(tau.power(2)).is_identity()


class TestRankBound:
    def test_dirichlet_bound(self, m7):
        assert dirichlet_rank_bound(m7) == 2
        assert dirichlet_rank_bound(field_new(PLASTIC)) == 1
        assert dirichlet_rank_bound(field_new(GOLDEN)) == 1


class TestFieldIdentity:
    def test_equality_and_hash(self, m7):
        again = field_new(M7)
        assert m7 == again
        assert hash(m7) == hash(again)
        assert m7 != field_new(GOLDEN)

    def test_immutable(self, m7):
        with pytest.raises(AttributeError):
            m7.degree = 5
        alpha = m7.gen()
        with pytest.raises(AttributeError):
            alpha.coords = ()
