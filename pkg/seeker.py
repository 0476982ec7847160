'''
 # @ Create Time: 2026-10-15 08:52:17
 # @ Modified time: 2026-10-18 23:05:48
 # @ Description: 构造性搜索
 # @ 主要功能：
 #   1. 互素块见证：定位 x0、素数 q、m、n0、b、k0，得到满足线性化条件的 n
 #   2. 偶数块：对 f/2 重复定位，再在 10H 个点内找至少 H 个连续偶数取整
 #   3. 稠密集合：首轮用见证，后续轮次用扫描并与已选取整值逐个求 gcd
 #   4. 每个阶段的可证余量可通过 trace 回调逐条输出
'''

import math
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator
from errors import (EscalationExhausted, NotAdmissible, ParityMismatch,
                    RoundFailed, RunNotFound, UsageError, WindowMissed)
from funclib import (START_FRAC_BITS, FunctionSpec, Window, compare, evaluate,
                     floor_exact, invert_derivative, locate_frac, resolve,
                     second_derivative_threshold)
from ntcore import (PairwiseResult, Primality, Primorial, floor_is_even,
                    next_prime, pairwise_coprime, primorial)
from scanner import ScanHit, find_first
from tools.logging_config import setup_logger
from tools.output import BigInt, ratio_text
from verifier import (BlockCertificate, ConditionReport, check_conditions,
                      verify_block)

logger = setup_logger(__name__)

DEFAULT_RETRIES = 25
DEFAULT_BUDGET = 10 ** 6

TraceHook = Optional[Callable[[Dict[str, Any]], None]]


def _lap(timings: Dict[str, float], stage: str, since: float) -> float:
    """把 since 以来的耗时累加到 stage，返回当前时刻"""
    now = time.perf_counter()
    timings[stage] = timings.get(stage, 0.0) + now - since
    return now


def _emit(trace: TraceHook, stage: str, **fields: Any) -> None:
    """记录一个构造阶段；整数转十进制串，有理数转 "p/q" 串"""
    record: Dict[str, Any] = {"stage": stage}
    for key, value in fields.items():
        if isinstance(value, bool) or value is None:
            record[key] = value
        elif isinstance(value, int):
            record[key] = str(value)
        elif isinstance(value, Fraction):
            record[key] = ratio_text(value)
        else:
            record[key] = str(value)
    logger.info("阶段 %s: %s", stage, record)
    if trace is not None:
        trace(record)


class ProofWitness(BaseModel):
    """互素块构造的全部中间量，返回前已完整复核

    Attributes:
        timings: 各阶段耗时（秒），随 JSON 一起序列化；命令行把它单独输出，
            不进入结果文档
    """

    model_config = ConfigDict(frozen=True)

    spec: str
    H: int = Field(ge=2)
    L_requested: int = Field(ge=1)
    q: BigInt
    q_probable: bool
    primorial: Primorial
    x0: BigInt
    m: BigInt
    n0: BigInt
    K: BigInt
    b: BigInt
    k0: int = Field(ge=0)
    n: BigInt
    report: ConditionReport
    certificate: BlockCertificate
    timings: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_invariants(self) -> "ProofWitness":
        modulus = self.primorial.value
        problems = []
        if self.K != 15 * self.H * modulus:
            problems.append("K ≠ 15·H·Π_H")
        if self.report.floor_f1 != self.q * modulus:
            problems.append("⌊f'(n)⌋ ≠ q·Π_H")
        if self.b % modulus != 1 % modulus or self.b % self.q == 0:
            problems.append("b 不满足同余条件")
        if self.n != self.n0 + self.k0 or not self.x0 <= self.m <= self.n0:
            problems.append("n、n0、m、x0 的次序不对")
        if not (self.report.passed and self.certificate.coprime):
            problems.append("条件或证书未通过")
        if problems:
            raise ValueError("; ".join(problems))
        return self


class EvenBlock(BaseModel):
    """连续偶数取整块

    Attributes:
        n: 锚点，块为 n + offsets
        indicators: h = 0..10H−1 上 {f(n+h)/2} ∈ [0, 1/2) 的指示序列，
            扫描得到的块为空
        method: construction 为构造所得，scan 为整数指数函数的扫描所得
    """

    model_config = ConfigDict(frozen=True)

    spec: str
    H: int = Field(ge=1)
    n: BigInt
    x0: Optional[BigInt] = None
    j: Optional[BigInt] = None
    offsets: List[int]
    floors: List[BigInt]
    indicators: List[bool] = Field(default_factory=list)
    method: Literal["construction", "scan"] = "construction"
    timings: Dict[str, float] = Field(default_factory=dict)


class DensitySegment(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: BigInt
    H: int = Field(ge=1)
    offsets: List[int]
    floors: List[BigInt]
    source: Literal["witness", "scan"]

    @property
    def indices(self) -> List[int]:
        return [self.n + h for h in self.offsets]


class DensityPlan(BaseModel):
    """稠密集合的选取方案，timings 按轮次记录耗时"""

    model_config = ConfigDict(frozen=True)

    spec: str
    mode: Literal["strict", "relaxed"]
    schedule: List[int]
    segments: List[DensitySegment]
    all_floors: List[BigInt]
    coprimality: PairwiseResult
    timings: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_segments(self) -> "DensityPlan":
        for left, right in zip(self.segments, self.segments[1:]):
            if left.n + left.H >= right.n:
                raise ValueError(f"区段相交: {left.n}+{left.H} ≥ {right.n}")
        if not self.coprimality.coprime:
            raise ValueError(f"全局不互素: {self.coprimality.failing_pair}")
        return self

    @property
    def indices(self) -> List[int]:
        return [i for segment in self.segments for i in segment.indices]


def _locate_m(spec: FunctionSpec, H: int, target: int, x0: int,
              trace: TraceHook) -> int:
    m = invert_derivative(spec, target, lo_hint=x0 + 1)
    below = floor_exact(spec, 1, m - 1)
    if below >= target:
        raise WindowMissed("m", f"⌊f'(m−1)⌋ = {below} 未落在 q·Π_H 之下")
    decision = locate_frac(spec, 1, m, Window.half_open(0, Fraction(1, 100 * H)))
    if decision.floor != target or not decision.inside:
        raise WindowMissed(
            "m", f"⌊f'(m)⌋ = {decision.floor}, {{f'(m)}} ∈ {decision.frac}")
    _emit(trace, "m", m=m, floor_f1=decision.floor, frac_margin=decision.margin)
    return m


def _locate_n0(spec: FunctionSpec, H: int, target: int, m: int,
               trace: TraceHook) -> Tuple[int, Fraction]:
    n0 = invert_derivative(spec, target + Fraction(1, 6 * H), lo_hint=m)
    decision = locate_frac(spec, 1, n0, Window.open(Fraction(1, 6 * H),
                                                    Fraction(1, 5 * H)))
    if decision.floor != target or not decision.inside:
        raise WindowMissed(
            "n0", f"⌊f'(n0)⌋ = {decision.floor}, {{f'(n0)}} ∈ {decision.frac}")
    _emit(trace, "n0", n0=n0, frac_margin=decision.margin)
    return n0, decision.frac.hi


def _choose_b(spec: FunctionSpec, n0: int, K: int, target: int, modulus: int,
              q: int, trace: TraceHook) -> int:
    floor_a0 = floor_exact(spec, 0, n0)
    ceil_a0 = floor_a0 if compare(spec, 0, n0, floor_a0) == 0 else floor_a0 + 1
    b = ceil_a0 + (1 - ceil_a0) % modulus
    while b % q == 0:
        b += modulus
    if compare(spec, 0, n0 + K, b + K * target) <= 0:
        raise WindowMissed("b", f"a_K 未超过 b = {b}")
    a0 = evaluate(spec, 0, n0, START_FRAC_BITS).enclosure
    a_K = evaluate(spec, 0, n0 + K, START_FRAC_BITS).enclosure.shift(-K * target)
    growth = a_K.lo - a0.hi
    if growth <= 2 * modulus:
        raise WindowMissed("b", f"a_K − a_0 ≥ {growth} 不足 2Π_H")
    _emit(trace, "b", b=b, growth_margin=growth - 2 * modulus)
    return b


def _locate_k0(spec: FunctionSpec, n0: int, K: int, target: int, b: int,
               slope: Fraction, trace: TraceHook) -> int:
    """最小的 k 使 a_k = f(n0+k) − k·q·Π_H ≥ b；a_k 随 k 严格递增"""
    def reached(k: int) -> bool:
        return compare(spec, 0, n0 + k, b + k * target) >= 0

    a0 = evaluate(spec, 0, n0, START_FRAC_BITS).enclosure.lo
    k = min(max(math.ceil((b - a0) / slope), 0), K)
    steps = 0
    while k > 0 and reached(k - 1):
        k -= 1
        steps += 1
    while not reached(k):
        k += 1
        steps += 1
        if k > K:
            raise WindowMissed("k0", f"k 超过 K = {K} 仍未达到 b")
    floor = floor_exact(spec, 0, n0 + k)
    if floor != b + k * target:
        raise WindowMissed("k0", f"⌊a_k0⌋ = {floor - k * target} ≠ b")
    _emit(trace, "k0", k0=k, walk=steps)
    return k


def seek_witness(spec: FunctionSpec, L: int, retries: int = DEFAULT_RETRIES,
                 trace: TraceHook = None) -> ProofWitness:
    """构造 L+1 个两两互素的连续取整值

    取 H = 2L，块为 h ∈ ⌈H/2⌉..H。任一阶段的可证检查失败时换下一个素数 q，
    最多换 retries 次。

    Args:
        spec: 可容许函数
        L: 用户要求的块长度
        retries: 换素数的次数上限
        trace: 每个阶段调用一次的回调

    Returns:
        ProofWitness: 已通过条件检查和互素证书的见证
    """
    if L < 1:
        raise UsageError(f"L 须为正: {L}")
    if not spec.admissible:
        raise NotAdmissible(f"{spec} 不可容许：首项须为正系数、指数在 (1, 2) 内")
    timings: Dict[str, float] = {}
    began = clock = time.perf_counter()
    H = 2 * L
    prim = primorial(H)
    modulus = prim.value
    bound = Fraction(1, (100 * H * modulus) ** 3)
    x0 = second_derivative_threshold(spec, bound)
    clock = _lap(timings, "x0", clock)
    _emit(trace, "x0", H=H, primorial=modulus, bound=bound, x0=x0)
    K = 15 * H * modulus
    q, verdict = next_prime(max(H + 1, floor_exact(spec, 1, x0 + 1) // modulus + 1) - 1)
    for attempt in range(retries + 1):
        target = q * modulus
        _emit(trace, "q", q=q, attempt=attempt, probable=verdict is Primality.PROBABLE_PRIME)
        try:
            m = _locate_m(spec, H, target, x0, trace)
            clock = _lap(timings, "m", clock)
            n0, slope = _locate_n0(spec, H, target, m, trace)
            clock = _lap(timings, "n0", clock)
            b = _choose_b(spec, n0, K, target, modulus, q, trace)
            clock = _lap(timings, "b", clock)
            k0 = _locate_k0(spec, n0, K, target, b, slope, trace)
            clock = _lap(timings, "k0", clock)
            n = n0 + k0
            report = check_conditions(spec, n, H)
            clock = _lap(timings, "conditions", clock)
            if not report.passed:
                raise WindowMissed("conditions", f"未通过: {report.failed}")
            break
        except WindowMissed as e:
            clock = _lap(timings, e.stage, clock)
            logger.warning("q = %s 失败于阶段 %s: %s，换下一个素数", q, e.stage, e)
            q, verdict = next_prime(q)
    else:
        raise EscalationExhausted(f"{spec}, H={H}: 连续 {retries + 1} 个素数 q 均失败")
    certificate = verify_block(spec, n, H)
    clock = _lap(timings, "verify", clock)
    timings["total"] = clock - began
    _emit(trace, "verified", n=n, floors=" ".join(map(str, certificate.floors)))
    return ProofWitness(
        spec=spec.label, H=H, L_requested=L, q=q,
        q_probable=verdict is Primality.PROBABLE_PRIME, primorial=prim,
        x0=x0, m=m, n0=n0, K=K, b=b, k0=k0, n=n, report=report,
        certificate=certificate, timings=timings)


def _first_run(indicators: List[bool], H: int) -> Optional[Tuple[int, int]]:
    """第一个长度不小于 H 的极大真值段，返回 (起点, 长度)"""
    start = None
    for h, inside in enumerate(indicators + [False]):
        if inside and start is None:
            start = h
        elif not inside and start is not None:
            if h - start >= H:
                return start, h - start
            start = None
    return None


def _even_block_by_scan(spec: FunctionSpec, H: int, budget: int) -> EvenBlock:
    hit, scanned = find_first(spec, "even_block", H - 1, start=1, budget=budget)
    if hit is None:
        raise NotAdmissible(
            f"{spec} 不可容许，前 {scanned} 个起点内也没有 {H} 个连续偶数取整")
    return EvenBlock(spec=spec.label, H=H, n=hit.n, offsets=list(range(H)),
                     floors=hit.floors, method="scan")


def seek_even_block(spec: FunctionSpec, H: int, retries: int = DEFAULT_RETRIES,
                    trace: TraceHook = None,
                    budget: int = DEFAULT_BUDGET) -> EvenBlock:
    """构造至少 H 个连续的偶数取整值

    x0 取自 f 本身的 |f''| ≤ 1/(1000H³)；再对 g = f/2 定位 n 使
    {g'(n)} ∈ (1/(6H), 1/(5H))，然后在 h = 0..10H−1 上判定 {g(n+h)} ∈ [0, 1/2)，
    取第一个长度 ≥ H 的极大段。整数指数但不可容许的函数（如 x）改用扫描。

    Raises:
        RunNotFound: 定位成功却找不到足够长的段，说明实现有缺陷
    """
    if H < 1:
        raise UsageError(f"H 须为正: {H}")
    if not spec.admissible:
        if spec.integer_only:
            return _even_block_by_scan(spec, H, budget)
        raise NotAdmissible(f"{spec} 不可容许")
    timings: Dict[str, float] = {}
    began = clock = time.perf_counter()
    half = spec.scaled(Fraction(1, 2))
    x0 = second_derivative_threshold(spec, Fraction(1, 1000 * H ** 3))
    clock = _lap(timings, "x0", clock)
    _emit(trace, "x0", H=H, x0=x0)
    window = Window.open(Fraction(1, 6 * H), Fraction(1, 5 * H))
    j = floor_exact(half, 1, x0) + 1
    for attempt in range(retries + 1):
        n = invert_derivative(half, j + Fraction(1, 6 * H), lo_hint=x0)
        decision = locate_frac(half, 1, n, window)
        if decision.inside and decision.floor == j:
            _emit(trace, "n", n=n, j=j, frac_margin=decision.margin)
            break
        logger.warning("j = %s 处 {g'(n)} ∈ %s 未落窗，换下一个整数", j, decision.frac)
        j += 1
    else:
        raise EscalationExhausted(f"{spec}, H={H}: 连续 {retries + 1} 个 j 均未落窗")
    clock = _lap(timings, "n", clock)
    lower_half = Window.half_open(0, Fraction(1, 2))
    indicators = [locate_frac(half, 0, n + h, lower_half).inside
                  for h in range(10 * H)]
    clock = _lap(timings, "indicators", clock)
    run = _first_run(indicators, H)
    if run is None:
        raise RunNotFound(f"{spec} 在 n={n} 起 {10 * H} 个点内没有长度 {H} 的段")
    start, length = run
    offsets = list(range(start, start + length))
    floors = []
    for h in offsets:
        value = resolve(spec, 0, n + h)
        direct = floor_exact(spec, 0, n + h)
        if value.floor != direct or not floor_is_even(value) or direct % 2:
            raise ParityMismatch(f"n+h = {n + h} 处奇偶判定不一致: ⌊f⌋ = {direct}")
        floors.append(direct)
    clock = _lap(timings, "parity", clock)
    timings["total"] = clock - began
    _emit(trace, "run", start=start, length=length)
    return EvenBlock(spec=spec.label, H=H, n=n, x0=x0, j=j, offsets=offsets,
                     floors=floors, indicators=indicators,
                     timings=timings)


def _coprime_to_all(selected: List[int]) -> Callable[[ScanHit], bool]:
    product = math.prod(selected)

    def accept(hit: ScanHit) -> bool:
        return all(math.gcd(v, product) == 1 for v in hit.floors)
    return accept


def _first_segment(spec: FunctionSpec, L: int, retries: int, budget: int,
                   chunk: int, trace: TraceHook) -> DensitySegment:
    try:
        witness = seek_witness(spec, L, retries=retries, trace=trace)
        return DensitySegment(n=witness.n, H=witness.H,
                              offsets=witness.certificate.offsets,
                              floors=witness.certificate.floors, source="witness")
    except (NotAdmissible, EscalationExhausted) as e:
        logger.warning("首轮构造失败 (%s)，改用扫描", e)
    hit, scanned = find_first(spec, "coprime_block", L, start=1, budget=budget,
                              chunk=chunk)
    if hit is None:
        raise RoundFailed(f"第 1 轮在 {scanned} 个起点内未找到 H={L} 的互素块")
    return DensitySegment(n=hit.n, H=L, offsets=list(range(L + 1)),
                          floors=hit.floors, source="scan")


def build_density_set(spec: FunctionSpec, rounds: int, H_schedule: List[int],
                      mode: str = "relaxed", retries: int = DEFAULT_RETRIES,
                      budget: int = DEFAULT_BUDGET, chunk: int = 4096,
                      trace: TraceHook = None) -> DensityPlan:
    """逐轮选出互不相交的块，使全部取整值两两互素

    Args:
        spec: 函数
        rounds: 轮数
        H_schedule: 每轮的 H，严格递增，长度等于 rounds
        mode: strict 只做第 1 轮并报告第 2 轮所需的 H 下界；relaxed 后续轮次
            用扫描并与已选取整值逐个求 gcd
        retries: 首轮换素数次数上限
        budget: 每轮扫描的起点个数上限

    Returns:
        DensityPlan: 带全局互素证书的选取方案

    Raises:
        RoundFailed: 某一轮在预算内找不到合格块
    """
    if rounds < 1 or len(H_schedule) != rounds:
        raise UsageError(f"轮数 {rounds} 与 H 序列 {H_schedule} 长度不符")
    if any(a >= b for a, b in zip(H_schedule, H_schedule[1:])) or H_schedule[0] < 1:
        raise UsageError(f"H 序列须为严格递增的正整数: {H_schedule}")
    if mode not in ("strict", "relaxed"):
        raise UsageError(f"未知模式: {mode}")
    timings: Dict[str, float] = {}
    began = clock = time.perf_counter()
    segments = [_first_segment(spec, H_schedule[0], retries, budget, chunk, trace)]
    clock = _lap(timings, "round_1", clock)
    _emit(trace, "round", round=1, n=segments[0].n, H=segments[0].H)
    if mode == "strict" and rounds > 1:
        first = segments[0]
        required = first.H + max(abs(v) for v in first.floors)
        raise RoundFailed(
            f"严格模式第 2 轮要求 H_2 > H_1 + max|⌊f⌋| = {required}，"
            f"给定 {H_schedule[1]}，无法在可行规模内执行")
    for index, H in enumerate(H_schedule[1:], start=2):
        previous = segments[-1]
        selected = [v for segment in segments for v in segment.floors]
        hit, scanned = find_first(
            spec, "coprime_block", H, start=previous.n + previous.H + 1,
            budget=budget, chunk=chunk, accept=_coprime_to_all(selected))
        if hit is None:
            raise RoundFailed(f"第 {index} 轮在 {scanned} 个起点内未找到合格块")
        segments.append(DensitySegment(n=hit.n, H=H, offsets=list(range(H + 1)),
                                       floors=hit.floors, source="scan"))
        clock = _lap(timings, f"round_{index}", clock)
        _emit(trace, "round", round=index, n=hit.n, H=H, scanned=scanned)
    all_floors = [v for segment in segments for v in segment.floors]
    coprimality = pairwise_coprime(all_floors)
    clock = _lap(timings, "certificate", clock)
    timings["total"] = clock - began
    return DensityPlan(spec=spec.label, mode=mode, schedule=list(H_schedule),
                       segments=segments, all_floors=all_floors,
                       coprimality=coprimality, timings=timings)
