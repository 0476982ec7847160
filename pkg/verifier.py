'''
 # @ Create Time: 2026-10-13 17:40:02
 # @ Modified time: 2026-10-18 11:26:35
 # @ Description: 线性化条件检查与互素块证书
 # @ 主要功能：
 #   1. 在 (spec, n, H) 处逐条检查小数部分、二阶导数、整除、互素五个条件
 #   2. 由 ⌊f(n)⌋、⌊f'(n)⌋ 预测块内取整值
 #   3. 直接计算块内取整并签发两两互素证书
 #   4. 对已序列化的证书独立复核
'''

import json
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union
from pydantic import (BaseModel, ConfigDict, Field, ValidationError,
                      computed_field)
from errors import (CertificateMismatch, ConditionsNotMet, NotAdmissible,
                    PropositionViolation, SpecSyntaxError, UsageError)
from funclib import (FunctionSpec, Window, floor_exact, locate_frac,
                     second_derivative_bound)
from ntcore import PairwiseResult, pairwise_coprime, primes_upto, primorial
from tools.logging_config import setup_logger
from tools.output import BigInt, ratio_text

logger = setup_logger(__name__)


class Condition(BaseModel):
    """单个条件的判定结果

    Attributes:
        margin: 带符号的可证余量，"p/q" 字符串；非负表示通过
        value: 判定所用的包络或整数值
    """

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    margin: str
    value: str


class ConditionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    spec: str
    n: BigInt
    H: int = Field(ge=2)
    floor_f: BigInt
    floor_f1: BigInt
    h1_frac_f: Condition
    h1_frac_f1: Condition
    h1_second: Condition
    h2_divisible: Condition
    h3_gcd: Condition

    @property
    def conditions(self) -> List[Condition]:
        return [self.h1_frac_f, self.h1_frac_f1, self.h1_second,
                self.h2_divisible, self.h3_gcd]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failed(self) -> List[str]:
        return [c.name for c in self.conditions if not c.passed]


class BlockCertificate(BaseModel):
    """块 {⌊f(n+h)⌋ : h ∈ offsets} 的互素证书"""

    model_config = ConfigDict(frozen=True)

    spec: str
    n: BigInt
    H: int = Field(ge=1)
    offsets: List[int]
    floors: List[BigInt]
    coprimality: PairwiseResult
    conditions: Optional[ConditionReport] = None

    @computed_field
    @property
    def coprime(self) -> bool:
        return self.coprimality.coprime


def block_offsets(H: int) -> List[int]:
    """h ∈ ⌈H/2⌉..H"""
    if H < 1:
        raise UsageError(f"H 须为正: {H}")
    return list(range((H + 1) // 2, H + 1))


def linearized_block(floor_f: int, floor_f1: int, H: int) -> List[int]:
    """⌊f(n)⌋ + h·⌊f'(n)⌋，h ∈ block_offsets(H)"""
    return [floor_f + h * floor_f1 for h in block_offsets(H)]


def _frac_condition(name: str, spec: FunctionSpec, order: int, n: int,
                    window: Window) -> Condition:
    decision = locate_frac(spec, order, n, window)
    return Condition(name=name, passed=decision.inside,
                     margin=ratio_text(decision.margin),
                     value=f"{{f^({order})}} ∈ {decision.frac} vs {window}")


def check_conditions(spec: FunctionSpec, n: int, H: int) -> ConditionReport:
    """逐条判定线性化条件

    Args:
        spec: 可容许或全整数指数的函数
        n: 块起点
        H: 块参数，H ≥ 2

    Returns:
        ConditionReport: 五个条件各自的结论和余量
    """
    if H < 2:
        raise UsageError(f"H 须不小于 2: {H}")
    if n < 1:
        raise UsageError(f"n 须为正整数: {n}")
    if not (spec.admissible or spec.integer_only):
        raise NotAdmissible(f"{spec} 既不可容许也不是整数指数")
    h1_frac_f = _frac_condition("h1_frac_f", spec, 0, n,
                                Window.closed(0, Fraction(1, 3)))
    h1_frac_f1 = _frac_condition(
        "h1_frac_f1", spec, 1, n,
        Window.closed(Fraction(1, 9 * H), Fraction(1, 3 * H)))
    bound = Fraction(1, 10 * H * H)
    within, sup = second_derivative_bound(spec, n, n + H, bound)
    h1_second = Condition(name="h1_second", passed=within,
                          margin=ratio_text(bound - sup),
                          value=f"sup|f''| ≤ {ratio_text(sup)} on [{n}, {n + H}]")
    floor_f = floor_exact(spec, 0, n)
    floor_f1 = floor_exact(spec, 1, n)
    modulus = primorial(H).value
    residue = floor_f1 % modulus
    h2_divisible = Condition(name="h2_divisible", passed=residue == 0,
                             margin=ratio_text(-residue),
                             value=f"{floor_f1} mod {modulus} = {residue}")
    g = math.gcd(floor_f, floor_f1)
    h3_gcd = Condition(name="h3_gcd", passed=g == 1,
                       margin=ratio_text(1 - g) if g else "-1",
                       value=f"gcd({floor_f}, {floor_f1}) = {g}")
    report = ConditionReport(
        spec=spec.label, n=n, H=H, floor_f=floor_f, floor_f1=floor_f1,
        h1_frac_f=h1_frac_f, h1_frac_f1=h1_frac_f1, h1_second=h1_second,
        h2_divisible=h2_divisible, h3_gcd=h3_gcd)
    logger.debug("%s 在 n=%s, H=%s 处条件: 通过=%s 失败项=%s",
                 spec, n, H, report.passed, report.failed)
    return report


def predicted_block(spec: FunctionSpec, n: int, H: int) -> List[int]:
    """条件成立时由线性化恒等式给出块内取整，不在 n+h 处重新求值"""
    report = check_conditions(spec, n, H)
    if not report.passed:
        raise ConditionsNotMet(
            f"{spec} 在 n={n}, H={H} 处条件不成立: {', '.join(report.failed)}")
    return linearized_block(report.floor_f, report.floor_f1, H)


def small_prime_exclusion(certificate: BlockCertificate, H: int) -> List[int]:
    """整除块内任一取整值的素数 p ≤ H"""
    return [p for p in primes_upto(H)
            if any(v % p == 0 for v in certificate.floors)]


def _report_or_none(spec: FunctionSpec, n: int,
                    H: int) -> Optional[ConditionReport]:
    if H < 2 or not (spec.admissible or spec.integer_only):
        return None
    return check_conditions(spec, n, H)


def verify_block(spec: FunctionSpec, n: int, H: int) -> BlockCertificate:
    """直接计算 ⌊f(n+h)⌋ 并签发互素证书

    条件成立时还会断言：证书两两互素、取整值等于线性化预测、
    没有不超过 H 的素因子。任一断言失败都说明实现有缺陷。

    Raises:
        PropositionViolation: 条件成立但结论不成立
    """
    offsets = block_offsets(H)
    floors = [floor_exact(spec, 0, n + h) for h in offsets]
    if any(v < 1 for v in floors):
        raise UsageError(f"{spec} 在 n={n} 附近的取整值不是正整数: {floors}")
    report = _report_or_none(spec, n, H)
    certificate = BlockCertificate(
        spec=spec.label, n=n, H=H, offsets=offsets, floors=floors,
        coprimality=pairwise_coprime(floors), conditions=report)
    if report is not None and report.passed:
        predicted = linearized_block(report.floor_f, report.floor_f1, H)
        if not certificate.coprime:
            raise PropositionViolation(
                f"{spec} 在 n={n}, H={H} 条件成立但块不互素: "
                f"{certificate.coprimality.failing_pair}")
        if floors != predicted:
            raise PropositionViolation(
                f"{spec} 在 n={n}, H={H} 的取整 {floors} 与预测 {predicted} 不一致")
        divisors = small_prime_exclusion(certificate, H)
        if divisors:
            raise PropositionViolation(
                f"{spec} 在 n={n}, H={H} 的块被小素数 {divisors} 整除")
    logger.info("%s 在 n=%s, H=%s 处块互素: %s", spec, n, H, certificate.coprime)
    return certificate


def recheck_certificate(document: Union[str, Dict[str, Any]]) -> BlockCertificate:
    """从序列化的证书出发，只用 funclib 和 ntcore 重新计算并逐项比对

    Args:
        document: JSON 文本或已解析的字典

    Returns:
        BlockCertificate: 重新计算得到的证书

    Raises:
        CertificateMismatch: 任一字段与重新计算的结果不同
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise UsageError(f"证书不是合法 JSON: {e}") from e
    try:
        claimed = BlockCertificate.model_validate(document)
    except ValidationError as e:
        raise UsageError(f"证书格式不合法: {e}") from e
    try:
        spec = FunctionSpec.parse(claimed.spec)
    except SpecSyntaxError as e:
        raise CertificateMismatch(f"证书中的函数无法解析: {claimed.spec}") from e
    fresh = verify_block(spec, claimed.n, claimed.H)
    expected = fresh.model_dump(mode="json")
    given = claimed.model_dump(mode="json")
    differing = sorted(key for key in expected if expected[key] != given.get(key))
    if differing:
        raise CertificateMismatch(f"证书字段与复核结果不一致: {differing}")
    return fresh
