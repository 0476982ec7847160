'''
 # @ Create Time: 2026-10-13 09:12:44
 # @ Modified time: 2026-10-17 15:02:19
 # @ Description: 精确整数数论
 # @ 主要功能：
 #   1. 两两互素判定，失败时给出字典序最小的见证对
 #   2. 素数筛、素数连乘积、素性检验
 #   3. 由 {x/2} 判定 ⌊x⌋ 的奇偶
 #   4. 区间内最大两两互素子集的精确搜索
'''

import math
from enum import Enum
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple
import gmpy2
from pydantic import BaseModel, ConfigDict, Field, model_validator
from errors import (IntervalTooLong, ParityMismatch, PrecisionCapExceeded,
                    UsageError)
from funclib import CertifiedValue, Window
from tools.logging_config import setup_logger
from tools.output import BigInt

logger = setup_logger(__name__)

# 对 n < 3.3·10^24 都是确定性的，覆盖 2^64
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_DETERMINISTIC_LIMIT = 2 ** 64
MAX_SUBSET_LENGTH = 32


class Primality(str, Enum):
    PRIME = "prime"
    PROBABLE_PRIME = "probable-prime"
    COMPOSITE = "composite"

    @property
    def is_prime(self) -> bool:
        return self is not Primality.COMPOSITE


def _strong_probable_prime(n: int, base: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(base, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = pow(x, 2, n)
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> Primality:
    """素性检验

    n < 2^64 时用固定底的 Miller-Rabin，结论确定；更大的 n 用强 BPSW
    并标记为 probable。

    Args:
        n: 不小于 2 的整数

    Returns:
        Primality: 判定结果
    """
    if n < 2:
        raise UsageError(f"素性检验要求 n ≥ 2: {n}")
    for p in _DETERMINISTIC_BASES:
        if n == p:
            return Primality.PRIME
        if n % p == 0:
            return Primality.COMPOSITE
    if n < _DETERMINISTIC_LIMIT:
        if all(_strong_probable_prime(n, base) for base in _DETERMINISTIC_BASES):
            return Primality.PRIME
        return Primality.COMPOSITE
    if gmpy2.is_strong_bpsw_prp(n):
        return Primality.PROBABLE_PRIME
    return Primality.COMPOSITE


def next_prime(n: int) -> Tuple[int, Primality]:
    """大于 n 的最小素数，以及它的判定等级"""
    candidate = max(n + 1, 2)
    while True:
        verdict = is_prime(candidate)
        if verdict.is_prime:
            return candidate, verdict
        candidate += 1


def primes_upto(H: int) -> List[int]:
    """埃氏筛，返回不超过 H 的全部素数"""
    if H < 2:
        return []
    sieve = bytearray([1]) * (H + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(H) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(range(p * p, H + 1, p)))
    return [i for i, flag in enumerate(sieve) if flag]


class Primorial(BaseModel):
    """不超过 H 的全部素数之积 Π_H"""

    model_config = ConfigDict(frozen=True)

    H: int = Field(ge=2)
    value: BigInt

    @model_validator(mode="after")
    def _check_value(self) -> "Primorial":
        if self.value != math.prod(primes_upto(self.H)):
            raise ValueError(f"Π_{self.H} 不等于 {self.value}")
        return self


def primorial(H: int) -> Primorial:
    """Π_H，H ≥ 2"""
    if H < 2:
        raise UsageError(f"素数连乘积要求 H ≥ 2: {H}")
    value = math.prod(primes_upto(H))
    if value != int(gmpy2.primorial(H)):
        raise RuntimeError(f"筛法与 gmpy2 给出的 Π_{H} 不一致")
    return Primorial(H=H, value=value)


class FailingPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int = Field(ge=0)
    j: int = Field(ge=0)
    gcd: BigInt


class PairwiseResult(BaseModel):
    """两两互素判定；failure 时附带见证对"""

    model_config = ConfigDict(frozen=True)

    status: Literal["all_coprime", "failure"]
    failing_pair: Optional[FailingPair] = None

    @model_validator(mode="after")
    def _check_pair(self) -> "PairwiseResult":
        failed = self.status == "failure"
        if failed != (self.failing_pair is not None):
            raise ValueError("status 与 failing_pair 不匹配")
        if failed and (self.failing_pair.gcd <= 1
                       or self.failing_pair.i >= self.failing_pair.j):
            raise ValueError(f"见证对不合法: {self.failing_pair}")
        return self

    @property
    def coprime(self) -> bool:
        return self.status == "all_coprime"


def pairwise_coprime(values: Sequence[int]) -> PairwiseResult:
    """判定 values 是否两两互素

    先用后缀积筛出第一个有公因子的位置，再逐个求 gcd 找到字典序最小的
    失败对 (i, j)。

    Args:
        values: 非空、元素都不小于 1 的整数列表

    Returns:
        PairwiseResult: 判定结果
    """
    if not values:
        raise UsageError("pairwise_coprime 需要非空列表")
    if any(v < 1 for v in values):
        raise UsageError(f"元素必须不小于 1: {list(values)}")
    values = [gmpy2.mpz(v) for v in values]
    suffix = [gmpy2.mpz(1)] * (len(values) + 1)
    for i in range(len(values) - 1, -1, -1):
        suffix[i] = suffix[i + 1] * values[i]
    for i, value in enumerate(values):
        if gmpy2.gcd(value, suffix[i + 1]) == 1:
            continue
        for j in range(i + 1, len(values)):
            g = gmpy2.gcd(value, values[j])
            if g > 1:
                return PairwiseResult(
                    status="failure",
                    failing_pair=FailingPair(i=i, j=j, gcd=int(g)))
    return PairwiseResult(status="all_coprime")


def floor_is_even(value: CertifiedValue) -> bool:
    """⌊x⌋ 为偶数当且仅当 {x/2} ∈ [0, 1/2)

    用 x/2 的包络判定，再与 ⌊x⌋ 的直接奇偶交叉校验。

    Args:
        value: 取整已确定的包络

    Returns:
        bool: 偶数为 True
    """
    k = value.floor
    if k is None:
        raise PrecisionCapExceeded(
            f"包络 {value.enclosure} 未确定取整，无法判定奇偶", value.frac_bits)
    half = value.halved().enclosure.shift(-(k // 2))
    criterion = Window.half_open(0, Fraction(1, 2)).classify(half.lo, half.hi)
    direct = k % 2 == 0
    if criterion is None or criterion != direct:
        raise ParityMismatch(
            f"⌊x⌋ = {k}: {{x/2}} 包络 {half} 与直接奇偶 {direct} 不一致")
    return direct


def _conflict_masks(values: List[int]) -> List[int]:
    masks = [0] * len(values)
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if math.gcd(values[i], values[j]) > 1:
                masks[i] |= 1 << j
                masks[j] |= 1 << i
    return masks


def max_coprime_subset(a: int, L: int) -> Tuple[int, List[int]]:
    """{a, ..., a+L−1} 中两两互素子集的最大规模

    在冲突图上做分支定界：没有冲突的元素直接选入，其余按冲突数最多者
    先分支。

    Args:
        a: 区间起点，a ≥ 1
        L: 区间长度，不超过 32

    Returns:
        Tuple[int, List[int]]: (最大规模, 一个达到该规模的子集)
    """
    if L > MAX_SUBSET_LENGTH:
        raise IntervalTooLong(f"L = {L} 超过精确搜索上限 {MAX_SUBSET_LENGTH}")
    if a < 1 or L < 0:
        raise UsageError(f"要求 a ≥ 1 且 L ≥ 0: a={a}, L={L}")
    values = list(range(a, a + L))
    conflicts = _conflict_masks(values)
    best = [-1, 0]

    def branch(candidates: int, chosen: int, size: int) -> None:
        if size + candidates.bit_count() <= best[0]:
            return
        if candidates == 0:
            best[0], best[1] = size, chosen
            return
        free = 0
        for v in range(L):
            if candidates >> v & 1 and conflicts[v] & candidates == 0:
                free |= 1 << v
        if free:
            branch(candidates & ~free, chosen | free, size + free.bit_count())
            return
        pivot = max((v for v in range(L) if candidates >> v & 1),
                    key=lambda v: (conflicts[v] & candidates).bit_count())
        bit = 1 << pivot
        branch(candidates & ~bit & ~conflicts[pivot], chosen | bit, size + 1)
        branch(candidates & ~bit, chosen, size)

    branch((1 << L) - 1, 0, 0)
    witness = [values[v] for v in range(L) if best[1] >> v & 1]
    logger.debug("区间 [%s, %s] 最大互素子集规模 %s", a, a + L - 1, best[0])
    return best[0], witness
