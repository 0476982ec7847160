'''
 # @ Create Time: 2026-10-14 10:05:51
 # @ Modified time: 2026-10-18 16:47:33
 # @ Description: 区间暴力扫描
 # @ 主要功能：
 #   1. 在 [n_lo, n_hi] 上找出 ⌊f(n)⌋..⌊f(n+H)⌋ 两两互素或全为偶数的 n
 #   2. 按块增量计算取整，滑动窗口复用 gcd 结果，命中逐个独立复核
 #   3. 预算用尽时给出部分结果和续扫游标
 #   4. 多进程分段并行，结果按 n 排序合并
'''

import asyncio
import base64
import binascii
import bisect
import functools
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Literal, Optional, Tuple
import gmpy2
from pydantic import BaseModel, ConfigDict, Field, computed_field
from errors import BudgetExceeded, CertificateMismatch, SpecSyntaxError, UsageError
from funclib import (MAX_CAP_BITS, FunctionSpec, current_cap, floor_block,
                     floor_exact, precision_cap)
from ntcore import PairwiseResult, pairwise_coprime
from tools.logging_config import setup_logger
from tools.output import BigInt

logger = setup_logger(__name__)

ScanKind = Literal["coprime_block", "even_block"]
SCAN_KINDS = ("coprime_block", "even_block")


@dataclass(frozen=True)
class ScanJob:
    """一次扫描任务：起点 n 取遍 [n_lo, n_hi]，窗口为 h ∈ [0, H]"""

    spec: FunctionSpec
    n_lo: int
    n_hi: int
    H: int
    kind: str = "coprime_block"
    chunk: int = 4096
    cap_bits: int = MAX_CAP_BITS

    def __post_init__(self) -> None:
        if self.kind not in SCAN_KINDS:
            raise UsageError(f"未知的扫描类型: {self.kind}")
        if self.H < 0:
            raise UsageError(f"H 不能为负: {self.H}")
        if not 1 <= self.n_lo <= self.n_hi:
            raise UsageError(f"扫描区间不合法: [{self.n_lo}, {self.n_hi}]")
        if self.chunk < self.H + 1:
            raise UsageError(f"chunk = {self.chunk} 须不小于 H + 1 = {self.H + 1}")

    @property
    def size(self) -> int:
        return self.n_hi - self.n_lo + 1


class ScanHit(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: BigInt
    H: int = Field(ge=0)
    kind: ScanKind
    floors: List[BigInt]
    coprimality: Optional[PairwiseResult] = None


class ScanReport(BaseModel):
    """扫描结果；merge 满足结合律，便于分段并行

    Attributes:
        stats: 每个起点 n 处从 n 开始满足条件的最长前缀长度（上限 H+1）的直方图
    """

    model_config = ConfigDict(frozen=True)

    spec: str
    kind: ScanKind
    H: int = Field(ge=0)
    n_lo: BigInt
    n_hi: BigInt
    hits: List[ScanHit] = Field(default_factory=list)
    stats: Dict[int, int] = Field(default_factory=dict)
    scanned: int = 0

    @computed_field
    @property
    def window_offsets(self) -> List[int]:
        return list(range(self.H + 1))

    def merge(self, other: "ScanReport") -> "ScanReport":
        if (self.spec, self.kind, self.H) != (other.spec, other.kind, other.H):
            raise UsageError("只能合并同一函数、同一类型、同一 H 的扫描结果")
        stats = Counter(self.stats)
        stats.update(other.stats)
        return ScanReport(
            spec=self.spec, kind=self.kind, H=self.H,
            n_lo=min(self.n_lo, other.n_lo), n_hi=max(self.n_hi, other.n_hi),
            hits=sorted(self.hits + other.hits, key=lambda hit: hit.n),
            stats=dict(sorted(stats.items())),
            scanned=self.scanned + other.scanned)


def _coprime_reach(floors: List[int], H: int) -> List[int]:
    """reach[i]：i 之后 H 步内第一个与 floors[i] 不互素的位置，没有则为 len

    每对 (i, j) 只求一次 gcd，窗口滑动时直接复用。非正的取整值视为与
    自身冲突。
    """
    size = len(floors)
    values = [gmpy2.mpz(v) for v in floors]
    reach = [size] * size
    for i in range(size):
        if floors[i] < 1:
            reach[i] = i
            continue
        for j in range(i + 1, min(i + H, size - 1) + 1):
            if floors[j] >= 1 and gmpy2.gcd(values[i], values[j]) > 1:
                reach[i] = j
                break
    return reach


def _coprime_lengths(floors: List[int], H: int, count: int) -> List[int]:
    reach = _coprime_reach(floors, H)
    lengths = []
    for t in range(count):
        length = H + 1
        for i in range(t, t + H + 1):
            if i - t >= length:
                break
            length = min(length, reach[i] - t)
        lengths.append(length)
    return lengths


def _even_lengths(floors: List[int], H: int, count: int) -> List[int]:
    run = [0] * (len(floors) + 1)
    for i in range(len(floors) - 1, -1, -1):
        run[i] = min(run[i + 1] + 1, H + 1) if floors[i] % 2 == 0 else 0
    return run[:count]


def verify_hit(spec: FunctionSpec, hit: ScanHit) -> bool:
    """逐点 floor_exact 重新计算并复核命中

    Raises:
        CertificateMismatch: 复核不通过
    """
    floors = [floor_exact(spec, 0, hit.n + h) for h in range(hit.H + 1)]
    if floors != hit.floors:
        raise CertificateMismatch(f"n={hit.n} 处取整复核不一致: {hit.floors} vs {floors}")
    if hit.kind == "coprime_block":
        result = pairwise_coprime(floors)
        if not result.coprime or result != hit.coprimality:
            raise CertificateMismatch(f"n={hit.n} 处互素复核失败: {result}")
    elif any(v % 2 for v in floors):
        raise CertificateMismatch(f"n={hit.n} 处存在奇数取整: {floors}")
    return True


def _scan_chunk(job: ScanJob, lo: int, hi: int) -> Tuple[List[ScanHit], Counter]:
    floors = floor_block(job.spec, lo, hi + job.H)
    count = hi - lo + 1
    if job.kind == "coprime_block":
        lengths = _coprime_lengths(floors, job.H, count)
    else:
        lengths = _even_lengths(floors, job.H, count)
    hits = []
    for t, length in enumerate(lengths):
        if length != job.H + 1:
            continue
        window = floors[t:t + job.H + 1]
        hit = ScanHit(
            n=lo + t, H=job.H, kind=job.kind, floors=window,
            coprimality=pairwise_coprime(window)
            if job.kind == "coprime_block" else None)
        verify_hit(job.spec, hit)
        hits.append(hit)
    return hits, Counter(lengths)


def encode_cursor(job: ScanJob, next_n: int) -> str:
    """续扫令牌：base64url 编码的 JSON"""
    payload = {"next": str(next_n), "hi": str(job.n_hi), "H": job.H,
               "kind": job.kind, "spec": job.spec.label}
    raw = json.dumps(payload, sort_keys=True).encode("utf-8")
    return base64.urlsafe_b64encode(raw).decode("ascii")


def decode_cursor(token: str, chunk: int = 4096,
                  cap_bits: int = MAX_CAP_BITS) -> ScanJob:
    """由续扫令牌还原剩余的扫描任务"""
    try:
        payload = json.loads(base64.urlsafe_b64decode(token.encode("ascii")))
        spec = FunctionSpec.parse(payload["spec"])
        return ScanJob(spec=spec, n_lo=int(payload["next"]),
                       n_hi=int(payload["hi"]), H=int(payload["H"]),
                       kind=payload["kind"], chunk=max(chunk, int(payload["H"]) + 1),
                       cap_bits=cap_bits)
    except (binascii.Error, ValueError, KeyError, TypeError,
            UnicodeError, SpecSyntaxError) as e:
        raise UsageError(f"续扫令牌无效: {e}") from e


def _budget_hi(job: ScanJob, budget: Optional[int]) -> int:
    if budget is None or job.size <= budget:
        return job.n_hi
    if budget < 1:
        raise UsageError(f"预算须为正: {budget}")
    return job.n_lo + budget - 1


def scan(job: ScanJob, budget: Optional[int] = None) -> ScanReport:
    """扫描 job 描述的区间

    Args:
        job: 扫描任务
        budget: 本次最多处理的起点个数，为空时不限

    Returns:
        ScanReport: 全部命中（均已复核）和最长前缀直方图

    Raises:
        BudgetExceeded: 区间超出预算，携带已完成部分和续扫游标
    """
    hi_limit = _budget_hi(job, budget)
    hits: List[ScanHit] = []
    stats: Counter = Counter()
    with precision_cap(job.cap_bits):
        for lo in range(job.n_lo, hi_limit + 1, job.chunk):
            hi = min(lo + job.chunk - 1, hi_limit)
            chunk_hits, chunk_stats = _scan_chunk(job, lo, hi)
            hits.extend(chunk_hits)
            stats.update(chunk_stats)
            logger.debug("扫描 [%s, %s]: 命中 %s", lo, hi, len(chunk_hits))
    report = ScanReport(spec=job.spec.label, kind=job.kind, H=job.H,
                        n_lo=job.n_lo, n_hi=hi_limit, hits=hits,
                        stats=dict(sorted(stats.items())),
                        scanned=hi_limit - job.n_lo + 1)
    if hi_limit < job.n_hi:
        raise BudgetExceeded(
            f"扫描预算 {budget} 用尽，已完成 [{job.n_lo}, {hi_limit}]",
            report=report, cursor=encode_cursor(job, hi_limit + 1))
    return report


def _partition(lo: int, hi: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, hi - lo + 1))
    step, extra = divmod(hi - lo + 1, parts)
    bounds, start = [], lo
    for i in range(parts):
        end = start + step + (1 if i < extra else 0) - 1
        bounds.append((start, end))
        start = end + 1
    return bounds


async def scan_parallel(job: ScanJob, workers: int = 1,
                        budget: Optional[int] = None) -> ScanReport:
    """把区间等分给多个进程扫描，再按 n 合并

    Args:
        job: 扫描任务，精度上限随任务传给子进程
        workers: 进程数
        budget: 同 scan

    Returns:
        ScanReport: 与顺序扫描一致的合并结果
    """
    if workers < 1:
        raise UsageError(f"workers 须为正: {workers}")
    hi_limit = _budget_hi(job, budget)
    parts = _partition(job.n_lo, hi_limit, workers)
    if len(parts) == 1:
        report = scan(replace(job, n_hi=hi_limit))
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=len(parts)) as pool:
            reports = await asyncio.gather(*[
                loop.run_in_executor(pool, scan, replace(job, n_lo=lo, n_hi=hi))
                for lo, hi in parts])
        report = functools.reduce(ScanReport.merge, reports)
        logger.info("%s 个进程完成扫描 [%s, %s]，命中 %s",
                    len(parts), job.n_lo, hi_limit, len(report.hits))
    if hi_limit < job.n_hi:
        raise BudgetExceeded(
            f"扫描预算 {budget} 用尽，已完成 [{job.n_lo}, {hi_limit}]",
            report=report, cursor=encode_cursor(job, hi_limit + 1))
    return report


def run_scan(job: ScanJob, workers: int = 1,
             budget: Optional[int] = None) -> ScanReport:
    return asyncio.run(scan_parallel(job, workers, budget))


def find_first(spec: FunctionSpec, kind: str, H: int, start: int, budget: int,
               chunk: int = 4096,
               accept: Optional[Callable[[ScanHit], bool]] = None
               ) -> Tuple[Optional[ScanHit], int]:
    """从 start 起逐块扫描，返回第一个被 accept 接受的命中

    Returns:
        Tuple[Optional[ScanHit], int]: (命中或 None, 已扫描的起点个数)
    """
    chunk = max(chunk, H + 1)
    scanned, lo = 0, start
    while scanned < budget:
        hi = lo + min(chunk, budget - scanned) - 1
        report = scan(ScanJob(spec=spec, n_lo=lo, n_hi=hi, H=H, kind=kind,
                              chunk=chunk, cap_bits=current_cap()))
        for hit in report.hits:
            if accept is None or accept(hit):
                return hit, scanned + hit.n - lo + 1
        scanned += report.scanned
        lo = hi + 1
    return None, scanned


def density_profile(indices: Iterable[int], window: int) -> Fraction:
    """所有长为 window 的整数区间中，集合所占比例的最大值"""
    if window < 1:
        raise UsageError(f"窗口长度须为正: {window}")
    members = sorted(set(indices))
    best = 0
    for i, start in enumerate(members):
        # 最大值总在以某个成员为左端点的区间上取到
        count = bisect.bisect_right(members, start + window - 1) - i
        best = max(best, count)
    return Fraction(best, window)
