import itertools
import math
from fractions import Fraction
import pytest
from pydantic import ValidationError
from errors import IntervalTooLong, PrecisionCapExceeded, UsageError
from funclib import CertifiedValue, DyadicInterval
from ntcore import (PairwiseResult, Primality, Primorial, floor_is_even,
                    is_prime, max_coprime_subset, next_prime, pairwise_coprime,
                    primes_upto, primorial)


class TestPrimes:
    def test_primorial_examples(self):
        assert primorial(2).value == 2
        assert primorial(4).value == 6
        assert primorial(10).value == 210

    def test_primorial_recurrence(self):
        previous = primorial(2).value
        for H in range(3, 200):
            current = primorial(H).value
            expected = previous * H if is_prime(H).is_prime else previous
            assert current == expected
            previous = current

    def test_primorial_rejects_small_h(self):
        with pytest.raises(UsageError):
            primorial(1)

    def test_primorial_model_validates_value(self):
        with pytest.raises(ValidationError):
            Primorial(H=5, value=31)

    def test_primorial_json_uses_decimal_string(self):
        assert primorial(10).model_dump(mode="json") == {"H": 10, "value": "210"}

    def test_primes_upto(self):
        assert primes_upto(1) == []
        assert primes_upto(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    @pytest.mark.parametrize("n, verdict", [
        (2, Primality.PRIME),
        (11, Primality.PRIME),
        (2 ** 10, Primality.COMPOSITE),
        (561, Primality.COMPOSITE),
        (1000003, Primality.PRIME),
        (3215031751, Primality.COMPOSITE),
        (2 ** 61 - 1, Primality.PRIME),
        (2 ** 64 + 1, Primality.COMPOSITE),
        (2 ** 89 - 1, Primality.PROBABLE_PRIME),
    ])
    def test_is_prime(self, n, verdict):
        assert is_prime(n) is verdict

    def test_is_prime_matches_sieve(self):
        sieve = set(primes_upto(5000))
        assert [n for n in range(2, 5001) if is_prime(n).is_prime] == sorted(sieve)

    def test_is_prime_rejects_small_n(self):
        with pytest.raises(UsageError):
            is_prime(1)

    def test_next_prime(self):
        assert next_prime(10) == (11, Primality.PRIME)
        assert next_prime(13)[0] == 17
        assert next_prime(0)[0] == 2


class TestPairwise:
    def test_examples(self):
        assert pairwise_coprime([3, 4, 5]).coprime
        result = pairwise_coprime([6, 10, 15])
        assert result.status == "failure"
        assert (result.failing_pair.i, result.failing_pair.j,
                result.failing_pair.gcd) == (0, 1, 2)

    def test_first_pair_is_lexicographic(self):
        result = pairwise_coprime([7, 9, 11, 14, 3])
        assert (result.failing_pair.i, result.failing_pair.j) == (0, 3)
        assert result.failing_pair.gcd == 7

    def test_ones_are_coprime_to_everything(self):
        assert pairwise_coprime([1, 1, 1]).coprime
        assert pairwise_coprime([1]).coprime

    def test_rejects_bad_input(self):
        with pytest.raises(UsageError):
            pairwise_coprime([])
        with pytest.raises(UsageError):
            pairwise_coprime([3, 0, 5])

    def test_matches_naive_loop(self, rng):
        for _ in range(1000):
            values = [rng.randint(1, 500) for _ in range(rng.randint(1, 8))]
            expected = None
            for i, j in itertools.combinations(range(len(values)), 2):
                if math.gcd(values[i], values[j]) > 1:
                    expected = (i, j, math.gcd(values[i], values[j]))
                    break
            result = pairwise_coprime(values)
            if expected is None:
                assert result.coprime
            else:
                pair = result.failing_pair
                assert (pair.i, pair.j, pair.gcd) == expected

    def test_big_values(self):
        p, q = 2 ** 127 - 1, 2 ** 89 - 1
        assert pairwise_coprime([p, q, p * q + 1]).coprime
        result = pairwise_coprime([p * 3, q, p * 5])
        assert result.failing_pair.gcd == p
        assert result.model_dump(mode="json")["failing_pair"]["gcd"] == str(p)

    def test_status_and_pair_must_agree(self):
        with pytest.raises(ValidationError):
            PairwiseResult(status="all_coprime",
                           failing_pair={"i": 0, "j": 1, "gcd": 2})


class TestParity:
    @pytest.mark.parametrize("value, even", [
        (Fraction(79, 10), False),
        (Fraction(81, 10), True),
        (Fraction(3, 10), True),
        (Fraction(8), True),
        (Fraction(-3, 10), False),
    ])
    def test_examples(self, value, even):
        assert ntcore_parity(value) is even

    def test_matches_direct_floor(self, rng):
        for _ in range(10 ** 4):
            value = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 1000))
            assert ntcore_parity(value) == (math.floor(value) % 2 == 0)

    def test_unresolved_floor(self):
        value = CertifiedValue(DyadicInterval(Fraction(15, 2), Fraction(17, 2)), 8)
        with pytest.raises(PrecisionCapExceeded):
            floor_is_even(value)

    def test_exact_integers_are_points(self):
        for k in range(-6, 7):
            value = CertifiedValue.from_rational(Fraction(k))
            assert value.enclosure.width == 0
            assert floor_is_even(value) is (k % 2 == 0)


def ntcore_parity(value: Fraction) -> bool:
    return floor_is_even(CertifiedValue.from_rational(value))


class TestMaxCoprimeSubset:
    @staticmethod
    def brute_force(a: int, L: int) -> int:
        values = list(range(a, a + L))
        for size in range(L, 0, -1):
            for subset in itertools.combinations(values, size):
                if all(math.gcd(x, y) == 1
                       for x, y in itertools.combinations(subset, 2)):
                    return size
        return 0

    def test_examples(self):
        assert max_coprime_subset(1, 1) == (1, [1])
        assert max_coprime_subset(2, 3)[0] == 2
        assert max_coprime_subset(1, 0) == (0, [])

    def test_matches_brute_force(self, rng):
        for _ in range(100):
            a, L = rng.randint(1, 10 ** 6), rng.randint(1, 12)
            size, witness = max_coprime_subset(a, L)
            assert size == self.brute_force(a, L)
            assert len(witness) == size
            assert all(a <= v < a + L for v in witness)
            assert pairwise_coprime(witness).coprime

    def test_monotone_in_length(self):
        sizes = [max_coprime_subset(90, L)[0] for L in range(1, 21)]
        assert sizes == sorted(sizes)

    def test_limits(self):
        assert max_coprime_subset(1, 32)[0] >= 12
        with pytest.raises(IntervalTooLong):
            max_coprime_subset(1, 33)
        with pytest.raises(UsageError):
            max_coprime_subset(0, 3)
