'''
 # @ Create Time: 2026-10-12 13:48:20
 # @ Modified time: 2026-10-17 22:31:08
 # @ Description: 正则函数族 f(x) = Σ c·x^e 的可证区间求值
 # @ 主要功能：
 #   1. 解析函数表达式，推导逐项导数和单调性元数据
 #   2. f、f'、f'' 在整数点上的二进有理区间包络
 #   3. 精确取整、小数部分落窗判定
 #   4. f' 的单调反演、f'' 阈值定位
'''

import math
import re
import contextvars
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, List, Optional, Tuple, TypeVar
import gmpy2
from mpmath import libmp
from errors import (EnclosureMismatch, NotAdmissible, NotMonotone,
                    PrecisionCapExceeded, SpecSyntaxError, UsageError)
from tools.logging_config import setup_logger

logger = setup_logger(__name__)

START_FRAC_BITS = 64  # 自适应精度起点
MAX_CAP_BITS = 2 ** 15  # 精度硬上限
_GUARD_BITS = 16
_MP_ATTEMPTS = 4
_MONOTONE_SEARCH_LIMIT = 2 ** 256

T = TypeVar("T")

_cap_bits = contextvars.ContextVar("regseq_precision_cap",
                                   default=MAX_CAP_BITS)


@contextmanager
def precision_cap(bits: int) -> Iterator[int]:
    """在当前上下文内设置精度上限

    Args:
        bits: 小数位精度上限，不超过 2^15

    Yields:
        int: 生效的上限
    """
    if not 1 <= bits <= MAX_CAP_BITS:
        raise UsageError(f"精度上限须在 1..{MAX_CAP_BITS} 之间: {bits}")
    token = _cap_bits.set(bits)
    try:
        yield bits
    finally:
        _cap_bits.reset(token)


def current_cap() -> int:
    """当前生效的精度上限"""
    return _cap_bits.get()


def _is_dyadic(value: Fraction) -> bool:
    den = value.denominator
    return den & (den - 1) == 0


def _sign(value) -> int:
    return (value > 0) - (value < 0)


@dataclass(frozen=True)
class DyadicInterval:
    """端点均为二进有理数的闭区间 [lo, hi]"""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not (_is_dyadic(self.lo) and _is_dyadic(self.hi)):
            raise ValueError(f"端点不是二进有理数: [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"区间端点颠倒: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: Fraction) -> "DyadicInterval":
        return cls(Fraction(value), Fraction(value))

    @classmethod
    def around(cls, value: Fraction, frac_bits: int) -> "DyadicInterval":
        """把有理数向外舍入到 2^-frac_bits 网格"""
        value = Fraction(value)
        if _is_dyadic(value):
            return cls.point(value)
        scale = 1 << frac_bits
        return cls(Fraction(math.floor(value * scale), scale),
                   Fraction(math.ceil(value * scale), scale))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def intersect(self, other: "DyadicInterval") -> "DyadicInterval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise EnclosureMismatch(f"包络不相交: {self} 与 {other}")
        return DyadicInterval(lo, hi)

    def shift(self, offset: int) -> "DyadicInterval":
        return DyadicInterval(self.lo + offset, self.hi + offset)

    def halved(self) -> "DyadicInterval":
        return DyadicInterval(self.lo / 2, self.hi / 2)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class CertifiedValue:
    """某个实数的可证包络及所用精度"""

    enclosure: DyadicInterval
    frac_bits: int

    @classmethod
    def from_rational(cls, value: Fraction,
                      frac_bits: int = START_FRAC_BITS) -> "CertifiedValue":
        return cls(DyadicInterval.around(value, frac_bits), frac_bits)

    @property
    def floor(self) -> Optional[int]:
        """包络落在某个 [k, k+1) 内时返回 k，否则为 None"""
        k = math.floor(self.enclosure.lo)
        return k if math.floor(self.enclosure.hi) == k else None

    def frac(self) -> Optional[DyadicInterval]:
        """小数部分的包络，取整未确定时为 None"""
        k = self.floor
        if k is None:
            return None
        return self.enclosure.shift(-k)

    def halved(self) -> "CertifiedValue":
        return CertifiedValue(self.enclosure.halved(), self.frac_bits + 1)


@dataclass(frozen=True)
class Window:
    """[0, 1] 内的区间，端点开闭可选"""

    lo: Fraction
    hi: Fraction
    closed_lo: bool = True
    closed_hi: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.lo < self.hi <= 1:
            raise UsageError(f"窗口须满足 0 ≤ a < b ≤ 1: ({self.lo}, {self.hi})")

    @classmethod
    def half_open(cls, lo, hi) -> "Window":
        return cls(Fraction(lo), Fraction(hi), True, False)

    @classmethod
    def open(cls, lo, hi) -> "Window":
        return cls(Fraction(lo), Fraction(hi), False, False)

    @classmethod
    def closed(cls, lo, hi) -> "Window":
        return cls(Fraction(lo), Fraction(hi), True, True)

    def _above_lo(self, value: Fraction) -> bool:
        return value > self.lo or (self.closed_lo and value == self.lo)

    def _below_hi(self, value: Fraction) -> bool:
        return value < self.hi or (self.closed_hi and value == self.hi)

    def classify(self, lo: Fraction, hi: Fraction) -> Optional[bool]:
        """[lo, hi] 整体在窗内返回 True，与窗不交返回 False，否则 None"""
        if self._above_lo(lo) and self._below_hi(hi):
            return True
        if not self._above_lo(hi) or not self._below_hi(lo):
            return False
        return None

    def margin(self, lo: Fraction, hi: Fraction) -> Fraction:
        """带符号的可证余量：窗内为到最近端点的距离，窗外为负的间隔"""
        if self.classify(lo, hi):
            return min(lo - self.lo, self.hi - hi)
        return -max(self.lo - hi, lo - self.hi, Fraction(0))

    def __str__(self) -> str:
        left = "[" if self.closed_lo else "("
        right = "]" if self.closed_hi else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


@dataclass(frozen=True)
class Term:
    """单项 coeff·x^exponent"""

    coeff: Fraction
    exponent: Fraction

    def derivative(self, order: int = 1) -> "Term":
        coeff, exponent = self.coeff, self.exponent
        for _ in range(order):
            coeff *= exponent
            exponent -= 1
        return Term(coeff, exponent)

    def __str__(self) -> str:
        coeff = f"({self.coeff})" if self.coeff.denominator != 1 \
            else str(self.coeff)
        if self.exponent == 0:
            return coeff
        power = "x" if self.exponent == 1 else (
            f"x^{self.exponent}" if self.exponent.denominator == 1
            else f"x^({self.exponent})")
        return power if self.coeff == 1 else f"{coeff}*{power}"


_NUMBER = r"\d+(?:\.\d+)?(?:/\d+)?"
_CONST_RE = re.compile(rf"^\(?({_NUMBER})\)?$")
_POWER_RE = re.compile(
    rf"^(?:\(?({_NUMBER})\)?\*?)?x(?:\^\(?(\d+(?:/\d+)?)\)?)?$")


def _split_terms(text: str) -> List[Tuple[int, str]]:
    """在括号外的 +/- 处切分"""
    pieces, depth, sign, start = [], 0, 1, 0
    for i, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char in "+-" and depth == 0:
            if text[start:i]:
                pieces.append((sign, text[start:i]))
            elif i > 0:
                raise SpecSyntaxError(f"多余的符号: {text!r}")
            sign = -1 if char == "-" else 1
            start = i + 1
    if depth != 0:
        raise SpecSyntaxError(f"括号不匹配: {text!r}")
    if not text[start:]:
        raise SpecSyntaxError(f"表达式不完整: {text!r}")
    pieces.append((sign, text[start:]))
    return pieces


@dataclass(frozen=True)
class FunctionSpec:
    """有理系数幂项之和，指数互异且按降序排列"""

    terms: Tuple[Term, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.terms:
            raise SpecSyntaxError("函数至少需要一个非零项")
        exponents = [term.exponent for term in self.terms]
        if any(e < 0 for e in exponents):
            raise SpecSyntaxError(f"指数必须非负: {exponents}")
        if any(a <= b for a, b in zip(exponents, exponents[1:])):
            raise SpecSyntaxError(f"指数须互异且降序: {exponents}")
        if any(term.coeff == 0 for term in self.terms):
            raise SpecSyntaxError("系数不能为零")
        if not self.label:
            object.__setattr__(self, "label", self.canonical())

    @classmethod
    def parse(cls, text: str) -> "FunctionSpec":
        """解析 `c1*x^(p1/q1) + c2*x^(p2/q2) + ...`

        Args:
            text: 函数表达式，如 "x^(3/2)"、"2*x"、"(1/2)*x^(5/3) - 3*x"

        Returns:
            FunctionSpec: 合并同类项、去掉零项后的函数
        """
        compact = re.sub(r"\s+", "", text or "")
        if not compact:
            raise SpecSyntaxError("空表达式")
        collected = {}
        for sign, body in _split_terms(compact):
            if match := _POWER_RE.match(body):
                coeff = Fraction(match.group(1) or 1)
                exponent = Fraction(match.group(2) or 1)
            elif match := _CONST_RE.match(body):
                coeff, exponent = Fraction(match.group(1)), Fraction(0)
            else:
                raise SpecSyntaxError(f"无法识别的项: {body!r}")
            collected[exponent] = collected.get(exponent, 0) + sign * coeff
        terms = tuple(Term(Fraction(c), e)
                      for e, c in sorted(collected.items(), reverse=True)
                      if c != 0)
        if not terms:
            raise SpecSyntaxError(f"所有项相互抵消: {text!r}")
        return cls(terms, text.strip())

    def canonical(self) -> str:
        """可被 parse 重新读入的规范写法"""
        parts = []
        for i, term in enumerate(self.terms):
            text = str(Term(abs(term.coeff), term.exponent))
            sign = "-" if term.coeff < 0 else "+"
            if i == 0:
                parts.append(text if sign == "+" else f"-{text}")
            else:
                parts.append(f"{sign} {text}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.label

    @property
    def leading(self) -> Term:
        return self.terms[0]

    @property
    def admissible(self) -> bool:
        """首项系数为正、指数严格在 (1, 2) 内：f'' → 0 且 f' → ∞"""
        return self.leading.coeff > 0 and 1 < self.leading.exponent < 2

    @property
    def integer_only(self) -> bool:
        """全部指数为整数，可走精确有理数路径"""
        return all(term.exponent.denominator == 1 for term in self.terms)

    def derivative_terms(self, order: int) -> Tuple[Term, ...]:
        """order 阶导数的非零项，指数保持降序"""
        if order < 0:
            raise UsageError(f"导数阶数不能为负: {order}")
        derived = (term.derivative(order) for term in self.terms)
        return tuple(term for term in derived if term.coeff != 0)

    def scaled(self, factor) -> "FunctionSpec":
        """factor·f，用于偶数块构造中的 f/2"""
        factor = Fraction(factor)
        if factor == 0:
            raise UsageError("缩放因子不能为零")
        return FunctionSpec(
            tuple(Term(term.coeff * factor, term.exponent)
                  for term in self.terms))


def _check_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise UsageError(f"只支持 0..2 阶导数: {order}")


def _check_point(x: int) -> None:
    if x < 1:
        raise UsageError(f"求值点须为正整数: {x}")


# ------------------------------------------------------------------ 单项包络

def _exact_term(term: Term, x: int) -> Fraction:
    return term.coeff * Fraction(x) ** int(term.exponent)


def _exact_value(terms: Tuple[Term, ...], x: int) -> Fraction:
    return sum((_exact_term(term, x) for term in terms), Fraction(0))


def _root_term(term: Term, x: int, frac_bits: int) -> Tuple[Fraction, Fraction]:
    """整数开方给出的单项包络，宽度 2^-frac_bits，完全幂时退化为点"""
    coeff = term.coeff
    p, q = term.exponent.numerator, term.exponent.denominator
    num = gmpy2.mpz(abs(coeff.numerator)) ** q << (frac_bits * q)
    den = gmpy2.mpz(coeff.denominator) ** q
    if p >= 0:
        num *= gmpy2.mpz(x) ** p
    else:
        den *= gmpy2.mpz(x) ** (-p)
    root, exact = gmpy2.iroot(num // den, q)
    root, scale = int(root), 1 << frac_bits
    if exact and num % den == 0:
        lo = hi = Fraction(root, scale)
    else:
        lo, hi = Fraction(root, scale), Fraction(root + 1, scale)
    if coeff < 0:
        lo, hi = -hi, -lo
    return lo, hi


def _mp_term(term: Term, x: int, prec: int) -> Tuple[Fraction, Fraction]:
    """exp(e·ln x) 的外向舍入区间，再乘系数"""
    fx = libmp.from_int(x)
    log_x = libmp.mpi_log((fx, fx), prec)
    e = term.exponent
    exponent = (libmp.from_rational(e.numerator, e.denominator, prec,
                                    libmp.round_floor),
                libmp.from_rational(e.numerator, e.denominator, prec,
                                    libmp.round_ceiling))
    power = libmp.mpi_exp(libmp.mpi_mul(log_x, exponent, prec), prec)
    c = term.coeff
    coeff = (libmp.from_rational(c.numerator, c.denominator, prec,
                                 libmp.round_floor),
             libmp.from_rational(c.numerator, c.denominator, prec,
                                 libmp.round_ceiling))
    lo, hi = libmp.mpi_mul(power, coeff, prec)
    # gmpy 后端下 to_rational 给出 mpz，转回 int 再进 Fraction
    return (Fraction(*map(int, libmp.to_rational(lo))),
            Fraction(*map(int, libmp.to_rational(hi))))


def _magnitude_bits(terms: Tuple[Term, ...], x: int) -> int:
    bits = 0
    for term in terms:
        power_bits = math.ceil(float(max(term.exponent, 0)) * x.bit_length())
        coeff_bits = max(abs(term.coeff.numerator).bit_length()
                         - term.coeff.denominator.bit_length(), 0)
        bits = max(bits, power_bits + coeff_bits + 2)
    return bits


def _term_enclosures(terms: Tuple[Term, ...], x: int, frac_bits: int,
                     tighten: bool) -> List[Tuple[Fraction, Fraction]]:
    """逐项包络，每项宽度不超过 2^-(frac_bits+1) / 项数"""
    term_bits = frac_bits + 1 + len(terms).bit_length()
    prec = frac_bits + _magnitude_bits(terms, x) + _GUARD_BITS \
        + len(terms).bit_length()
    limit = Fraction(1, 1 << term_bits)
    enclosures = []
    for term in terms:
        if term.exponent.denominator == 1:
            exact = DyadicInterval.around(_exact_term(term, x), term_bits)
            enclosures.append((exact.lo, exact.hi))
            continue
        work = prec
        for _ in range(_MP_ATTEMPTS):
            lo, hi = _mp_term(term, x, work)
            if hi - lo <= limit:
                break
            work *= 2
        else:
            raise PrecisionCapExceeded(
                f"{term} 在 x={x} 处 {work} 位工作精度下仍达不到宽度要求",
                frac_bits)
        if tighten or math.floor(lo) != math.floor(hi) or lo == math.floor(lo):
            # 接近整数时用整数开方交叉校验
            root_lo, root_hi = _root_term(term, x, term_bits)
            if max(lo, root_lo) > min(hi, root_hi):
                raise EnclosureMismatch(
                    f"{term} 在 x={x}: 区间 [{lo}, {hi}] 与开方界 "
                    f"[{root_lo}, {root_hi}] 不相交")
            lo, hi = max(lo, root_lo), min(hi, root_hi)
        enclosures.append((lo, hi))
    return enclosures


# ------------------------------------------------------------------ 公开运算

def evaluate(spec: FunctionSpec, order: int, x: int, frac_bits: int,
             within: Optional[CertifiedValue] = None,
             tighten: bool = False) -> CertifiedValue:
    """f^(order)(x) 的可证包络

    Args:
        spec: 函数
        order: 导数阶数 0、1、2
        x: 正整数求值点
        frac_bits: 目标小数位精度，包络宽度不超过 2^-frac_bits
        within: 上一次的包络，结果与之求交，保证加精度不会变宽
        tighten: 对每个非整数指数项都做整数开方收紧

    Returns:
        CertifiedValue: 可证包含真值的包络

    Raises:
        PrecisionCapExceeded: 超出精度上限
    """
    _check_order(order)
    _check_point(x)
    if frac_bits < 1:
        raise UsageError(f"frac_bits 须为正: {frac_bits}")
    if frac_bits > current_cap():
        raise PrecisionCapExceeded(
            f"请求 {frac_bits} 位超过上限 {current_cap()}", current_cap())
    terms = spec.derivative_terms(order)
    if spec.integer_only:
        enclosure = DyadicInterval.around(_exact_value(terms, x), frac_bits)
    elif not terms:
        enclosure = DyadicInterval.point(Fraction(0))
    else:
        parts = _term_enclosures(terms, x, frac_bits, tighten)
        enclosure = DyadicInterval(sum(lo for lo, _ in parts),
                                   sum(hi for _, hi in parts))
    if within is not None:
        enclosure = enclosure.intersect(within.enclosure)
    return CertifiedValue(enclosure, frac_bits)


def _refine(spec: FunctionSpec, order: int, x: int,
            decide: Callable[[CertifiedValue], Optional[T]], what: str) -> T:
    """自适应加精度：64 位起步，每次翻倍，直到 decide 给出结论或触顶"""
    cap = current_cap()
    bits = min(START_FRAC_BITS, cap)
    previous = None
    while True:
        value = evaluate(spec, order, x, bits, within=previous,
                         tighten=previous is not None)
        verdict = decide(value)
        if verdict is not None:
            return verdict
        if bits >= cap:
            raise PrecisionCapExceeded(
                f"{what}: {spec} 的 {order} 阶导数在 x={x} 处 "
                f"{cap} 位精度内无法判定 (包络 {value.enclosure})", cap)
        logger.debug("%s 在 x=%s 处 %s 位未判定，加倍精度", what, x, bits)
        previous, bits = value, min(bits * 2, cap)


def resolve(spec: FunctionSpec, order: int, x: int) -> CertifiedValue:
    """返回取整已确定的包络"""
    return _refine(spec, order, x,
                   lambda v: v if v.floor is not None else None, "取整")


def _root_floor(term: Term, x: int) -> int:
    # 非完全幂时真值严格落在 (lo, lo+1) 内，完全幂时等于 lo
    return int(_root_term(term, x, 0)[0])


def floor_exact(spec: FunctionSpec, order: int, x: int) -> int:
    """⌊f^(order)(x)⌋

    整数指数走精确有理数；单项函数走整数开方；其余自适应加精度。
    """
    _check_order(order)
    _check_point(x)
    terms = spec.derivative_terms(order)
    if spec.integer_only:
        return math.floor(_exact_value(terms, x))
    if not terms:
        return 0
    if len(terms) == 1:
        return _root_floor(terms[0], x)
    return resolve(spec, order, x).floor


def floor_block(spec: FunctionSpec, lo: int, hi: int) -> List[int]:
    """区间 [lo, hi] 上逐点的 ⌊f(n)⌋，单项函数共享开方常数"""
    if hi < lo:
        return []
    _check_point(lo)
    if spec.integer_only or len(spec.terms) > 1:
        return [floor_exact(spec, 0, n) for n in range(lo, hi + 1)]
    term = spec.terms[0]
    p, q = term.exponent.numerator, term.exponent.denominator
    scale = gmpy2.mpz(abs(term.coeff.numerator)) ** q
    den = gmpy2.mpz(term.coeff.denominator) ** q
    floors = []
    for n in range(lo, hi + 1):
        num = scale * gmpy2.mpz(n) ** p
        root, exact = gmpy2.iroot(num // den, q)
        root = int(root)
        if term.coeff < 0:
            root = -root if exact and num % den == 0 else -root - 1
        floors.append(root)
    return floors


def compare(spec: FunctionSpec, order: int, x: int, y) -> int:
    """f^(order)(x) − y 的可证符号，-1/0/1"""
    _check_order(order)
    _check_point(x)
    y = Fraction(y)
    terms = spec.derivative_terms(order)
    if spec.integer_only:
        return _sign(_exact_value(terms, x) - y)
    if not terms:
        return _sign(-y)
    if len(terms) == 1:
        term = terms[0]
        s = _sign(term.coeff)
        if _sign(y) != s:
            return s
        # 同号：比较 |c|^q x^p 与 |y|^q
        p, q = term.exponent.numerator, term.exponent.denominator
        lhs = abs(term.coeff) ** q * Fraction(x) ** p
        return s * _sign(lhs - abs(y) ** q)

    def decide(value: CertifiedValue) -> Optional[int]:
        enclosure = value.enclosure
        if enclosure.lo > y:
            return 1
        if enclosure.hi < y:
            return -1
        if enclosure.lo == enclosure.hi == y:
            return 0
        return None
    return _refine(spec, order, x, decide, "比较")


@dataclass(frozen=True)
class FracDecision:
    """小数部分落窗判定及其依据"""

    inside: bool
    floor: int
    frac: DyadicInterval
    margin: Fraction


def locate_frac(spec: FunctionSpec, order: int, x: int,
                window: Window) -> FracDecision:
    """判定 {f^(order)(x)} 是否落在窗口内，并给出所用包络"""
    _check_order(order)
    _check_point(x)
    if spec.integer_only:
        # 精确有理数：端点恰好命中也能判定
        value = _exact_value(spec.derivative_terms(order), x)
        floor = math.floor(value)
        frac = value - floor
        return FracDecision(bool(window.classify(frac, frac)), floor,
                            DyadicInterval.around(frac, START_FRAC_BITS),
                            window.margin(frac, frac))

    def decide(value: CertifiedValue) -> Optional[FracDecision]:
        frac = value.frac()
        if frac is None:
            return None
        verdict = window.classify(frac.lo, frac.hi)
        if verdict is None:
            return None
        return FracDecision(verdict, value.floor, frac,
                            window.margin(frac.lo, frac.hi))
    return _refine(spec, order, x, decide, f"小数部分落窗 {window}")


def frac_in_window(spec: FunctionSpec, order: int, x: int,
                   window: Window) -> bool:
    """{f^(order)(x)} ∈ window"""
    return locate_frac(spec, order, x, window).inside


# ------------------------------------------------------------------ 单调性

@lru_cache(maxsize=256)
def sign_cutoff(spec: FunctionSpec, order: int) -> Tuple[int, int]:
    """f^(order) 在 [cutoff, ∞) 上符号恒定

    主导项（指数最大）决定符号；与之异号的次要项之和被主导项严格压住的
    最小整数即为 cutoff，比值随 x 单调递减，所以只需在 cutoff 处验证。

    Returns:
        Tuple[int, int]: (符号, cutoff)，恒为零时符号为 0
    """
    terms = spec.derivative_terms(order)
    if not terms:
        return 0, 1
    dominant = terms[0]
    sign = _sign(dominant.coeff)
    opposing = [Term(abs(term.coeff / dominant.coeff),
                     term.exponent - dominant.exponent)
                for term in terms[1:] if _sign(term.coeff) != sign]
    if not opposing:
        return sign, 1

    def dominated(x: int) -> bool:
        upper = sum(_root_term(term, x, START_FRAC_BITS)[1]
                    for term in opposing)
        return upper < 1

    hi = 1
    while not dominated(hi):
        hi *= 2
        if hi > _MONOTONE_SEARCH_LIMIT:
            raise NotMonotone(f"{spec} 的 {order} 阶导数找不到符号稳定点")
    if hi == 1:
        return sign, 1
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if dominated(mid):
            hi = mid
        else:
            lo = mid
    logger.debug("%s 的 %s 阶导数自 %s 起符号为 %s", spec, order, hi, sign)
    return sign, hi


def increasing_from(spec: FunctionSpec, order: int = 1) -> int:
    """f^(order) 在 [cutoff, ∞) 上严格递增的 cutoff"""
    sign, cutoff = sign_cutoff(spec, order + 1)
    if sign <= 0:
        raise NotMonotone(f"{spec} 的 {order} 阶导数不能证明递增")
    return cutoff


def decreasing_abs_from(spec: FunctionSpec, order: int = 2) -> int:
    """|f^(order)| 在 [cutoff, ∞) 上单调递减的 cutoff"""
    sign, cutoff = sign_cutoff(spec, order)
    next_sign, next_cutoff = sign_cutoff(spec, order + 1)
    if sign == 0 or next_sign != -sign:
        raise NotMonotone(f"{spec} 的 {order} 阶导数绝对值不能证明递减")
    return max(cutoff, next_cutoff)


def _require_unbounded_derivative(spec: FunctionSpec) -> None:
    terms = spec.derivative_terms(1)
    if not terms or terms[0].coeff <= 0 or terms[0].exponent <= 0:
        raise NotAdmissible(f"{spec} 的导数不趋于 +∞")


def invert_derivative(spec: FunctionSpec, y, lo_hint: int = 1) -> int:
    """最小的整数 m ≥ lo_hint 使 f'(m) ≥ y

    先指数步长外推，再整数二分；每次比较都是可证的。m > lo_hint 时
    同时证明了 f'(m−1) < y ≤ f'(m)。

    Raises:
        NotMonotone: 搜索范围内不能证明 f' 递增
    """
    _check_point(lo_hint)
    _require_unbounded_derivative(spec)
    cutoff = increasing_from(spec, 1)
    if cutoff > max(lo_hint - 1, 1):
        raise NotMonotone(
            f"{spec} 的 f' 自 {cutoff} 起才能证明递增，起点 {lo_hint} 过小")
    y = Fraction(y)
    if compare(spec, 1, lo_hint, y) >= 0:
        return lo_hint
    lo, step = lo_hint, 1
    hi = lo + step
    while compare(spec, 1, hi, y) < 0:
        lo, step = hi, step * 2
        hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if compare(spec, 1, mid, y) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def _second_within(spec: FunctionSpec, x: int, bound: Fraction) -> bool:
    sign, _ = sign_cutoff(spec, 2)
    if sign > 0:
        return compare(spec, 2, x, bound) <= 0
    return compare(spec, 2, x, -bound) >= 0


def second_derivative_threshold(spec: FunctionSpec, bound) -> int:
    """最小的整数 x0（不小于单调起点）使 |f''(x)| ≤ bound 对所有实数 x ≥ x0 成立"""
    bound = Fraction(bound)
    if bound <= 0:
        raise UsageError(f"界须为正: {bound}")
    terms = spec.derivative_terms(2)
    if not terms or terms[0].exponent >= 0:
        raise NotAdmissible(f"{spec} 的二阶导数不趋于 0")
    start = decreasing_abs_from(spec, 2)
    if _second_within(spec, start, bound):
        return start
    lo, step = start, 1
    hi = lo + step
    while not _second_within(spec, hi, bound):
        lo, step = hi, step * 2
        hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _second_within(spec, mid, bound):
            hi = mid
        else:
            lo = mid
    return hi


def _decreasing_start(spec: FunctionSpec) -> Optional[int]:
    try:
        return decreasing_abs_from(spec, 2)
    except NotMonotone:
        return None


def second_derivative_sup(spec: FunctionSpec, lo: int, hi: int) -> Fraction:
    """实区间 [lo, hi] 上 |f''| 的可证上界

    |f''| 已证递减时取左端点包络的上端；否则逐项取端点最大值求和，
    每个幂项在 x > 0 上单调，所以这仍是上界。
    """
    _check_point(lo)
    if hi < lo:
        raise UsageError(f"区间端点颠倒: [{lo}, {hi}]")
    start = _decreasing_start(spec)
    if start is not None and lo >= start:
        value = evaluate(spec, 2, lo, START_FRAC_BITS).enclosure
        return max(abs(value.lo), abs(value.hi))
    sup = Fraction(0)
    for term in spec.derivative_terms(2):
        candidates = _root_term(term, lo, START_FRAC_BITS) \
            + _root_term(term, hi, START_FRAC_BITS)
        sup += max(abs(v) for v in candidates)
    return sup


def _abs_second_at(spec: FunctionSpec, x: int, bound: Fraction
                   ) -> Tuple[bool, Fraction]:
    """|f''(x)| ≤ bound 的判定，以及与判定一致的 |f''(x)| 上界

    恰好相等时上界就是 bound；否则加精度直到包络整体落在 bound 一侧。
    """
    sign, _ = sign_cutoff(spec, 2)
    if compare(spec, 2, x, sign * bound) == 0:
        return True, bound

    def decide(value: CertifiedValue) -> Optional[Tuple[bool, Fraction]]:
        ends = (abs(value.enclosure.lo), abs(value.enclosure.hi))
        if max(ends) <= bound:
            return True, max(ends)
        if value.enclosure.lo * value.enclosure.hi > 0 and min(ends) > bound:
            return False, max(ends)
        return None

    return _refine(spec, 2, x, decide, "二阶导数界")


def second_derivative_bound(spec: FunctionSpec, lo: int, hi: int,
                            bound) -> Tuple[bool, Fraction]:
    """实区间 [lo, hi] 上 |f''| ≤ bound 的可证判定

    Returns:
        Tuple[bool, Fraction]: (是否成立, |f''| 的上界)；成立时上界不超过 bound
    """
    if hi < lo:
        raise UsageError(f"区间端点颠倒: [{lo}, {hi}]")
    bound = Fraction(bound)
    start = _decreasing_start(spec)
    if start is not None and lo >= start:
        # 递减时 sup 在左端点取到
        return _abs_second_at(spec, lo, bound)
    sup = second_derivative_sup(spec, lo, hi)
    return sup <= bound, sup
