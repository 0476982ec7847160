from fractions import Fraction
import pytest
from errors import (EnclosureMismatch, NotAdmissible, PrecisionCapExceeded,
                    SpecSyntaxError, UsageError)
from funclib import (CertifiedValue, DyadicInterval, FunctionSpec, Term,
                     Window, compare, current_cap, evaluate, floor_block,
                     floor_exact, frac_in_window, invert_derivative,
                     locate_frac, precision_cap, resolve,
                     second_derivative_bound, second_derivative_sup,
                     second_derivative_threshold, sign_cutoff)


class TestParse:
    def test_single_power(self):
        spec = FunctionSpec.parse("x^(3/2)")
        assert spec.terms == (Term(Fraction(1), Fraction(3, 2)),)
        assert str(spec) == "x^(3/2)"

    def test_mixed_terms_sorted_descending(self):
        spec = FunctionSpec.parse("7 - 3*x + (1/2)*x^(5/3)")
        assert [t.exponent for t in spec.terms] == [Fraction(5, 3), 1, 0]
        assert [t.coeff for t in spec.terms] == [Fraction(1, 2), -3, 7]

    def test_decimal_coefficient_and_integer_power(self):
        spec = FunctionSpec.parse("1.5*x^2 + x")
        assert spec.terms[0] == Term(Fraction(3, 2), Fraction(2))
        assert spec.integer_only

    def test_like_terms_merge(self):
        spec = FunctionSpec.parse("x + x")
        assert spec.terms == (Term(Fraction(2), Fraction(1)),)

    @pytest.mark.parametrize("text", ["", "x - x", "2*y", "x^(-1)", "x^(3/2",
                                      "x +", "x ++ 1"])
    def test_rejects_bad_input(self, text):
        with pytest.raises(SpecSyntaxError):
            FunctionSpec.parse(text)

    def test_canonical_reparses(self):
        spec = FunctionSpec.parse("(1/2)*x^(5/3) - 3*x + 7")
        again = FunctionSpec.parse(spec.canonical())
        assert again.terms == spec.terms

    def test_scaled_label_reparses(self, three_halves):
        half = three_halves.scaled(Fraction(1, 2))
        assert half.leading.coeff == Fraction(1, 2)
        assert FunctionSpec.parse(str(half)).terms == half.terms

    def test_admissibility(self, three_halves, identity):
        assert three_halves.admissible
        assert not identity.admissible
        assert identity.integer_only
        assert not FunctionSpec.parse("-x^(3/2)").admissible
        assert not FunctionSpec.parse("x^(5/2)").admissible


class TestIntervals:
    def test_dyadic_endpoints_required(self):
        with pytest.raises(ValueError):
            DyadicInterval(Fraction(1, 3), Fraction(1, 2))

    def test_around_is_outward(self):
        box = DyadicInterval.around(Fraction(1, 3), 10)
        assert box.contains(Fraction(1, 3))
        assert box.width == Fraction(1, 1024)

    def test_disjoint_intersection_is_loud(self):
        a = DyadicInterval(Fraction(0), Fraction(1, 2))
        b = DyadicInterval(Fraction(3, 4), Fraction(1))
        with pytest.raises(EnclosureMismatch):
            a.intersect(b)

    def test_window_validation(self):
        with pytest.raises(UsageError):
            Window.half_open(Fraction(1, 2), Fraction(1, 3))

    def test_window_boundaries(self):
        window = Window.half_open(0, Fraction(1, 2))
        assert window.classify(Fraction(0), Fraction(0)) is True
        assert window.classify(Fraction(1, 2), Fraction(1, 2)) is False
        assert window.classify(Fraction(1, 4), Fraction(3, 4)) is None
        assert Window.closed(0, Fraction(1, 2)).classify(
            Fraction(1, 2), Fraction(1, 2)) is True

    def test_precision_cap_context(self):
        default = current_cap()
        with precision_cap(128):
            assert current_cap() == 128
        assert current_cap() == default
        with pytest.raises(UsageError):
            with precision_cap(2 ** 15 + 1):
                pass


class TestEvaluation:
    def test_examples(self, three_halves):
        assert floor_exact(three_halves, 0, 10) == 31
        assert floor_exact(three_halves, 0, 4) == 8
        assert floor_exact(three_halves, 1, 4) == 3

    def test_enclosure_contains_value(self, three_halves):
        value = evaluate(three_halves, 0, 2, 64)
        box = value.enclosure
        assert box.width <= Fraction(1, 2 ** 64)
        assert box.lo >= 0 and box.lo ** 2 <= 8 <= box.hi ** 2

    def test_enclosure_endpoints_are_plain_fractions(self, three_halves):
        box = evaluate(three_halves, 1, 2, 64).enclosure
        assert type(box.lo.numerator) is int and type(box.hi.denominator) is int
        assert box.shift(-2).lo < Fraction(13, 100)

    def test_perfect_power_is_exact(self, three_halves):
        value = resolve(three_halves, 0, 9)
        assert value.enclosure.lo == value.enclosure.hi == 27

    def test_order_and_point_checks(self, three_halves):
        with pytest.raises(UsageError):
            evaluate(three_halves, 3, 5, 64)
        with pytest.raises(UsageError):
            floor_exact(three_halves, 0, 0)

    def test_request_above_cap(self, three_halves):
        with precision_cap(100):
            with pytest.raises(PrecisionCapExceeded):
                evaluate(three_halves, 0, 5, 128)

    @pytest.mark.parametrize("p, q", [(3, 2), (5, 3), (7, 4)])
    def test_floor_matches_integer_root_oracle(self, p, q, rng, power_floor):
        spec = FunctionSpec.parse(f"x^({p}/{q})")
        for _ in range(10 ** 4):
            n = rng.randint(1, 10 ** 9)
            assert floor_exact(spec, 0, n) == power_floor(n, p, q)

    def test_floor_block_matches_pointwise(self, power_floor):
        spec = FunctionSpec.parse("x^(5/3)")
        assert floor_block(spec, 1, 300) == [power_floor(n, 5, 3)
                                             for n in range(1, 301)]

    def test_floor_block_negative_coefficient(self, power_floor):
        spec = FunctionSpec.parse("-x^(3/2)")
        expected = []
        for n in range(1, 60):
            root = power_floor(n, 3, 2)
            expected.append(-root if root * root == n ** 3 else -root - 1)
        assert floor_block(spec, 1, 59) == expected
        assert [floor_exact(spec, 0, n) for n in range(1, 60)] == expected

    def test_multi_term_floor(self):
        spec = FunctionSpec.parse("x^(3/2) + x")
        assert floor_exact(spec, 0, 9) == 36
        assert floor_exact(spec, 0, 10) == 41

    def test_integer_only_is_exact(self):
        spec = FunctionSpec.parse("(1/3)*x^2 + 1")
        assert floor_exact(spec, 0, 3) == 4
        assert floor_exact(spec, 1, 3) == 2

    def test_adversarial_zero_hits_cap(self):
        spec = FunctionSpec.parse("x^(3/2) - 2*x^(1/2)")
        with precision_cap(256):
            with pytest.raises(PrecisionCapExceeded):
                floor_exact(spec, 0, 2)


class TestComparisons:
    def test_compare_exact_boundaries(self, three_halves):
        assert compare(three_halves, 0, 4, 8) == 0
        assert compare(three_halves, 0, 4, 7) == 1
        assert compare(three_halves, 1, 4, 3) == 0
        assert compare(three_halves, 1, 4, Fraction(301, 100)) == -1

    def test_compare_multi_term(self):
        spec = FunctionSpec.parse("x^(3/2) - x")
        assert compare(spec, 0, 10, 21) == 1
        assert compare(spec, 0, 10, 22) == -1

    def test_locate_frac(self, three_halves):
        decision = locate_frac(three_halves, 0, 4, Window.closed(0, Fraction(1, 3)))
        assert decision.inside and decision.floor == 8
        assert decision.margin == 0
        assert not frac_in_window(three_halves, 0, 10,
                                  Window.closed(0, Fraction(1, 3)))

    def test_frac_of_derivative(self, three_halves):
        # f'(2) = 2.1213...
        assert frac_in_window(three_halves, 1, 2,
                              Window.open(Fraction(12, 100), Fraction(13, 100)))
        assert not frac_in_window(three_halves, 1, 2,
                                  Window.open(Fraction(2, 10), Fraction(3, 10)))

    def test_locate_frac_integer_only_exact(self, doubled):
        decision = locate_frac(doubled, 1, 7, Window.closed(Fraction(1, 18),
                                                            Fraction(1, 6)))
        assert not decision.inside
        assert decision.margin == Fraction(-1, 18)


class TestMonotonicity:
    def test_sign_cutoff(self):
        spec = FunctionSpec.parse("x^(3/2) - 100*x")
        assert sign_cutoff(spec, 1) == (1, 4445)
        assert sign_cutoff(FunctionSpec.parse("x^(3/2)"), 2) == (1, 1)

    def test_invert_derivative(self, three_halves):
        assert invert_derivative(three_halves, 3) == 4
        assert invert_derivative(three_halves, 30) == 400
        assert invert_derivative(three_halves, 30, lo_hint=500) == 500
        assert invert_derivative(three_halves, 6) == 16
        assert invert_derivative(three_halves, 100) == 4445

    def test_invert_requires_unbounded_derivative(self):
        with pytest.raises(NotAdmissible):
            invert_derivative(FunctionSpec.parse("-x^(3/2)"), 3)

    def test_second_derivative_threshold(self, three_halves):
        bound = Fraction(1, 400 ** 3)
        x0 = second_derivative_threshold(three_halves, bound)
        assert x0 == 9 * 400 ** 6 // 16 == 2304 * 10 ** 12
        assert compare(three_halves, 2, x0, bound) == 0
        assert compare(three_halves, 2, x0 - 1, bound) == 1
        assert second_derivative_threshold(three_halves, Fraction(3, 4)) == 1
        assert second_derivative_threshold(three_halves, Fraction(3, 8)) == 4

    def test_threshold_needs_vanishing_second_derivative(self):
        with pytest.raises(NotAdmissible):
            second_derivative_threshold(FunctionSpec.parse("x^2"), Fraction(1, 10))

    def test_second_derivative_bound(self, three_halves):
        passed, sup = second_derivative_bound(three_halves, 900, 902, Fraction(1, 40))
        assert passed and sup <= Fraction(1, 40) + Fraction(1, 2 ** 60)
        assert not second_derivative_bound(three_halves, 100, 102,
                                           Fraction(1, 40))[0]
        assert second_derivative_sup(FunctionSpec.parse("2*x"), 1, 5) == 0


def test_certified_value_floor_and_frac():
    value = CertifiedValue.from_rational(Fraction(79, 10))
    assert value.floor == 7
    assert value.frac().contains(Fraction(9, 10))
    straddling = CertifiedValue(DyadicInterval(Fraction(15, 2), Fraction(17, 2)), 1)
    assert straddling.floor is None and straddling.frac() is None


@pytest.fixture(params=["x^(3/2)", "(1/2)*x^(5/3) - 3*x"])
def smooth(request):
    return FunctionSpec.parse(request.param)


class TestRandomProperties:
    def test_refinement_never_widens(self, smooth, rng):
        for _ in range(200):
            x, order = rng.randint(2, 10 ** 9), rng.randint(0, 2)
            coarse = evaluate(smooth, order, x, 64).enclosure
            fine = evaluate(smooth, order, x, 128).enclosure
            assert max(coarse.lo, fine.lo) <= min(coarse.hi, fine.hi)
            refined = evaluate(smooth, order, x, 128,
                               within=evaluate(smooth, order, x, 64),
                               tighten=True).enclosure
            assert coarse.lo <= refined.lo <= refined.hi <= coarse.hi

    def test_central_difference_within_second_derivative(self, smooth, rng):
        for _ in range(200):
            n = rng.randint(2, 10 ** 8)
            left = evaluate(smooth, 0, n - 1, 64).enclosure
            right = evaluate(smooth, 0, n + 1, 64).enclosure
            slope = evaluate(smooth, 1, n, 64).enclosure
            sup = second_derivative_sup(smooth, n - 1, n + 1)
            assert (right.lo - left.hi) / 2 <= slope.hi + sup
            assert (right.hi - left.lo) / 2 >= slope.lo - sup

    @pytest.mark.parametrize("text", ["x^(3/2)", "x^(5/3)"])
    def test_inversion_brackets_target(self, text, rng):
        spec = FunctionSpec.parse(text)
        for _ in range(200):
            y = Fraction(rng.randint(2, 10 ** 7), rng.randint(1, 50))
            m = invert_derivative(spec, y)
            assert compare(spec, 1, m, y) >= 0
            if m > 1:
                assert compare(spec, 1, m - 1, y) < 0
