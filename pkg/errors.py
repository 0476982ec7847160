'''
 # @ Create Time: 2026-10-12 10:20:13
 # @ Description: 统一异常类型，每个异常自带错误码和命令行退出码
'''

from typing import Any, Optional


class RegseqError(Exception):
    """所有可预期错误的基类

    Attributes:
        code: 机器可读的错误名，写入 JSON 错误记录
        exit_code: 命令行退出码
    """

    code = "error"
    exit_code = 1

    def to_record(self) -> dict:
        """转换为 JSON 错误记录"""
        return {"error": self.code, "message": str(self),
                "exit_code": self.exit_code}


class SpecSyntaxError(RegseqError, ValueError):
    """函数表达式无法解析"""

    code = "spec-syntax"


class UsageError(RegseqError, ValueError):
    """参数不满足前置条件"""

    code = "usage"


class IntervalTooLong(UsageError):
    """穷举区间超过搜索预算"""

    code = "interval-too-long"


class PrecisionCapExceeded(RegseqError):
    """精度上限内无法给出确定结论，绝不静默舍入"""

    code = "precision-cap-exceeded"
    exit_code = 3

    def __init__(self, message: str, cap_bits: int = 0) -> None:
        super().__init__(message)
        self.cap_bits = cap_bits


class CertifiedNegative(RegseqError):
    """可证的否定结论"""

    code = "certified-negative"
    exit_code = 2


class NotAdmissible(CertifiedNegative):
    code = "not-admissible"


class NotMonotone(CertifiedNegative):
    code = "not-monotone"


class ConditionsNotMet(CertifiedNegative):
    code = "rejected-without-conditions"


class CertificateMismatch(CertifiedNegative):
    code = "certificate-mismatch"


class WindowMissed(CertifiedNegative):
    """构造中的某一步被证明不成立，触发换素数重试

    Attributes:
        stage: 失败的构造阶段
    """

    code = "window-missed"

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class Exhausted(RegseqError):
    code = "exhausted"
    exit_code = 4


class EscalationExhausted(Exhausted):
    code = "escalation-exhausted"


class RoundFailed(Exhausted):
    code = "round-failed"


class BudgetExceeded(Exhausted):
    """扫描预算用尽，携带部分结果和续扫游标

    Attributes:
        report: 已完成部分的扫描报告
        cursor: 续扫令牌
    """

    code = "budget-exceeded"

    def __init__(self, message: str, report: Any = None,
                 cursor: Optional[str] = None) -> None:
        super().__init__(message)
        self.report = report
        self.cursor = cursor

    def to_record(self) -> dict:
        record = super().to_record()
        record["cursor"] = self.cursor
        return record


class InternalInconsistency(RegseqError, RuntimeError):
    """交叉校验失败，说明实现有缺陷，必须大声中止"""

    code = "internal-inconsistency"


class PropositionViolation(InternalInconsistency):
    code = "proposition-violation"


class ParityMismatch(InternalInconsistency):
    code = "parity-mismatch"


class EnclosureMismatch(InternalInconsistency):
    code = "enclosure-mismatch"


class RunNotFound(InternalInconsistency):
    code = "run-not-found"
