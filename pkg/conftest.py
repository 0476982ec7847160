'''
 # @ Create Time: 2026-10-16 14:20:33
 # @ Description: 测试公共夹具，独立的整数开方对照实现
'''

import math
import random
import sys
from pathlib import Path
from typing import Callable, List
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from funclib import FunctionSpec  # noqa: E402


def integer_root(y: int, k: int) -> int:
    """⌊y^(1/k)⌋，纯整数牛顿迭代，不依赖 gmpy2"""
    if y < 2:
        return y
    x = 1 << -(-y.bit_length() // k)
    while True:
        t = ((k - 1) * x + y // x ** (k - 1)) // k
        if t >= x:
            return x
        x = t


def naive_power_floor(n: int, p: int, q: int) -> int:
    """⌊n^(p/q)⌋"""
    return integer_root(n ** p, q)


def naive_coprime(values: List[int]) -> bool:
    return all(math.gcd(a, b) == 1
               for i, a in enumerate(values) for b in values[i + 1:])


@pytest.fixture
def three_halves() -> FunctionSpec:
    return FunctionSpec.parse("x^(3/2)")


@pytest.fixture
def identity() -> FunctionSpec:
    return FunctionSpec.parse("x")


@pytest.fixture
def doubled() -> FunctionSpec:
    return FunctionSpec.parse("2*x")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20261019)


@pytest.fixture
def power_floor() -> Callable[[int, int, int], int]:
    return naive_power_floor


@pytest.fixture
def all_pairs_coprime() -> Callable[[List[int]], bool]:
    return naive_coprime
