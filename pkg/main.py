'''
 # @ Create Time: 2026-10-16 09:30:12
 # @ Modified time: 2026-10-19 10:41:57
 # @ Description: regseq 命令行工具
 # @ 主要功能：
 #   程序入口，子命令 eval / verify / seek / even / density / scan / oracle /
 #   schema / recheck；stdout 只输出 JSON、CSV 或文本结果，日志走 stderr
'''
import argparse
import asyncio
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional
import aiofiles
from pydantic import BaseModel
from config import RunConfig, load_run_config
from errors import BudgetExceeded, RegseqError, UsageError
from funclib import FunctionSpec, floor_exact, precision_cap, resolve
from ntcore import max_coprime_subset
from scanner import ScanJob, ScanReport, decode_cursor, density_profile, run_scan
from seeker import (DensityPlan, EvenBlock, ProofWitness, build_density_set,
                    seek_even_block, seek_witness)
from tools.logging_config import set_level, setup_logger
from tools.output import dumps, ratio_text, save_data_to_file, to_csv, to_human
from verifier import (BlockCertificate, ConditionReport, recheck_certificate,
                      verify_block)

logger = setup_logger(__name__)

# 每个子命令的 CSV 列
CSV_COLUMNS = {
    "eval": ["n", "order", "floor", "frac_lo", "frac_hi", "frac_bits"],
    "verify": ["n", "H", "offset", "floor", "coprime", "conditions_passed"],
    "recheck": ["n", "H", "offset", "floor", "coprime", "conditions_passed"],
    "seek": ["H", "q", "n", "offset", "floor"],
    "even": ["n", "offset", "floor"],
    "density": ["segment", "n", "H", "offset", "floor", "source"],
    "scan": ["n", "H", "kind", "floors", "coprime"],
    "oracle": ["a", "len", "size", "witness"],
    "schema": ["model"],
}


@dataclass
class Outcome:
    """一个子命令的结果：JSON 文档序列、CSV 行和退出码"""

    documents: List[Any] = field(default_factory=list)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    exit_code: int = 0


class _Parser(argparse.ArgumentParser):
    """参数错误按用法错误处理，退出码 1 并输出 JSON 错误记录"""

    def error(self, message: str) -> None:
        raise UsageError(message)


def _parse_range(text: str) -> List[int]:
    try:
        lo, hi = (int(part) for part in text.split(".."))
    except ValueError as e:
        raise UsageError(f"--range 须为 a..b 形式: {text!r}") from e
    return [lo, hi]


def _parse_schedule(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise UsageError(f"--schedule 须为逗号分隔的整数: {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", help="函数表达式，如 \"x^(3/2)\"")
    common.add_argument("--precision-cap", type=int, dest="precision_cap_bits",
                        help="小数位精度上限，不超过 32768")
    common.add_argument("--mode", choices=["strict", "relaxed"])
    common.add_argument("--retries", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--output", choices=["json", "csv", "human"])
    common.add_argument("--workers", type=int)
    common.add_argument("--chunk", type=int)
    common.add_argument("--log-level", dest="log_level")
    common.add_argument("--config", type=Path, help="key = value 配置文件")
    common.add_argument("--trace", action="store_true", help="逐阶段输出 JSON 行")
    common.add_argument("--timings", action="store_true",
                        help="另起一行输出各阶段耗时，结果文档本身不含耗时")
    common.add_argument("--out", type=Path, help="结果写入文件而不是 stdout")

    parser = _Parser(prog="regseq", description="⌊f(n)⌋ 中的互素块与偶数块")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("eval", parents=[common], help="取整与小数部分")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--order", type=int, choices=[0, 1, 2])

    sub = commands.add_parser("verify", parents=[common], help="条件报告与互素证书")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--H", type=int, required=True)

    sub = commands.add_parser("seek", parents=[common], help="构造互素块见证")
    sub.add_argument("--L", type=int, required=True)

    sub = commands.add_parser("even", parents=[common], help="构造连续偶数块")
    sub.add_argument("--H", type=int, required=True)

    sub = commands.add_parser("density", parents=[common], help="逐轮构造互素集合")
    sub.add_argument("--schedule", type=_parse_schedule, required=True)
    sub.add_argument("--rounds", type=int)

    sub = commands.add_parser("scan", parents=[common], help="区间扫描")
    sub.add_argument("--range", type=_parse_range, dest="range")
    sub.add_argument("--H", type=int)
    sub.add_argument("--kind", choices=["coprime_block", "even_block"],
                     default="coprime_block")
    sub.add_argument("--resume", help="上次预算用尽时输出的游标")

    sub = commands.add_parser("oracle", parents=[common], help="最大两两互素子集")
    sub.add_argument("--a", type=int, required=True)
    sub.add_argument("--len", type=int, required=True, dest="length")

    commands.add_parser("schema", parents=[common], help="输出 JSON schema")

    sub = commands.add_parser("recheck", parents=[common], help="独立复核证书文件")
    sub.add_argument("--file", type=Path, required=True)
    return parser


def _certificate_rows(certificate: BlockCertificate) -> List[Dict[str, Any]]:
    passed = certificate.conditions.passed if certificate.conditions else ""
    return [{"n": certificate.n, "H": certificate.H, "offset": h, "floor": v,
             "coprime": certificate.coprime, "conditions_passed": passed}
            for h, v in zip(certificate.offsets, certificate.floors)]


def _failed_conditions(report: Optional[ConditionReport]) -> List[str]:
    return ["admissibility"] if report is None else report.failed


def _timed_documents(args: argparse.Namespace, record: BaseModel,
                     extra: Optional[Dict[str, Any]] = None) -> List[Dict[str, Any]]:
    """结果文档去掉 timings 以保证输出确定；--timings 时耗时单独成一行"""
    document = record.model_dump(mode="json", exclude={"timings"})
    document.update(extra or {})
    documents = [document]
    if args.timings:
        documents.append({"timings": record.timings})
    return documents


def cmd_eval(args: argparse.Namespace, spec: FunctionSpec,
             config: RunConfig) -> Outcome:
    outcome = Outcome()
    orders = [args.order] if args.order is not None else [0, 1, 2]
    for order in orders:
        floor = floor_exact(spec, order, args.n)
        value = resolve(spec, order, args.n)
        frac = value.frac()
        record = {"spec": spec.label, "n": str(args.n), "order": order,
                  "floor": str(floor), "frac_lo": ratio_text(frac.lo),
                  "frac_hi": ratio_text(frac.hi), "frac_bits": value.frac_bits}
        outcome.documents.append(record)
        outcome.rows.append(record)
    return outcome


def cmd_verify(args: argparse.Namespace, spec: FunctionSpec,
               config: RunConfig) -> Outcome:
    certificate = verify_block(spec, args.n, args.H)
    document = certificate.model_dump(mode="json")
    passed = certificate.conditions is not None and certificate.conditions.passed
    if not passed:
        document["failed"] = _failed_conditions(certificate.conditions)
    return Outcome([document], _certificate_rows(certificate),
                   0 if passed else 2)


def cmd_seek(args: argparse.Namespace, spec: FunctionSpec, config: RunConfig,
             trace: Callable) -> Outcome:
    witness = seek_witness(spec, args.L, retries=config.retries, trace=trace)
    rows = [{"H": witness.H, "q": witness.q, "n": witness.n, "offset": h,
             "floor": v} for h, v in zip(witness.certificate.offsets,
                                         witness.certificate.floors)]
    return Outcome(_timed_documents(args, witness), rows)


def cmd_even(args: argparse.Namespace, spec: FunctionSpec, config: RunConfig,
             trace: Callable) -> Outcome:
    block = seek_even_block(spec, args.H, retries=config.retries, trace=trace,
                            budget=config.budget)
    rows = [{"n": block.n, "offset": h, "floor": v}
            for h, v in zip(block.offsets, block.floors)]
    return Outcome(_timed_documents(args, block), rows)


def cmd_density(args: argparse.Namespace, spec: FunctionSpec,
                config: RunConfig, trace: Callable) -> Outcome:
    rounds = args.rounds if args.rounds is not None else len(args.schedule)
    plan = build_density_set(spec, rounds, args.schedule, mode=config.mode,
                             retries=config.retries, budget=config.budget,
                             chunk=config.chunk, trace=trace)
    window_density = [
        ratio_text(density_profile(plan.indices, len(segment.offsets)))
        for segment in plan.segments]
    rows = [{"segment": i, "n": segment.n, "H": segment.H, "offset": h,
             "floor": v, "source": segment.source}
            for i, segment in enumerate(plan.segments, start=1)
            for h, v in zip(segment.offsets, segment.floors)]
    return Outcome(_timed_documents(args, plan, {"window_density": window_density}),
                   rows)


def _scan_outcome(report: ScanReport) -> Outcome:
    outcome = Outcome()
    for hit in report.hits:
        outcome.documents.append(hit)
        outcome.rows.append({"n": hit.n, "H": hit.H, "kind": hit.kind,
                             "floors": hit.floors,
                             "coprime": hit.coprimality.coprime
                             if hit.coprimality else ""})
    summary = report.model_dump(mode="json", exclude={"hits"})
    summary["hit_count"] = len(report.hits)
    outcome.documents.append({"summary": summary})
    return outcome


def cmd_scan(args: argparse.Namespace, spec: FunctionSpec,
             config: RunConfig) -> Outcome:
    if args.resume:
        job = decode_cursor(args.resume, chunk=config.chunk,
                            cap_bits=config.precision_cap_bits)
    else:
        if args.range is None or args.H is None:
            raise UsageError("scan 需要 --range 和 --H，或者 --resume")
        lo, hi = args.range
        job = ScanJob(spec=spec, n_lo=lo, n_hi=hi, H=args.H, kind=args.kind,
                      chunk=config.chunk, cap_bits=config.precision_cap_bits)
    try:
        report = run_scan(job, workers=config.workers, budget=config.budget)
    except BudgetExceeded as e:
        outcome = _scan_outcome(e.report)
        outcome.documents.append(e.to_record())
        outcome.exit_code = e.exit_code
        return outcome
    return _scan_outcome(report)


def cmd_oracle(args: argparse.Namespace, spec: FunctionSpec,
               config: RunConfig) -> Outcome:
    size, witness = max_coprime_subset(args.a, args.length)
    record = {"a": str(args.a), "len": args.length, "size": size,
              "witness": [str(v) for v in witness]}
    return Outcome([record], [record])


def schema_documents() -> Dict[str, Any]:
    """由输出模型直接生成的 JSON schema"""
    models = {"BlockCertificate": BlockCertificate,
              "ConditionReport": ConditionReport, "ProofWitness": ProofWitness,
              "EvenBlock": EvenBlock, "DensityPlan": DensityPlan,
              "ScanReport": ScanReport, "RunConfig": RunConfig}
    return {name: model.model_json_schema(mode="serialization")
            for name, model in models.items()}


def cmd_schema(args: argparse.Namespace, spec: FunctionSpec,
               config: RunConfig) -> Outcome:
    schemas = schema_documents()
    return Outcome([schemas], [{"model": name} for name in schemas])


async def _read_text(path: Path) -> str:
    async with aiofiles.open(path, "r", encoding="utf-8") as f:
        return await f.read()


def cmd_recheck(args: argparse.Namespace, spec: FunctionSpec,
                config: RunConfig) -> Outcome:
    if not args.file.is_file():
        raise UsageError(f"证书文件不存在: {args.file}")
    certificate = recheck_certificate(asyncio.run(_read_text(args.file)))
    document = certificate.model_dump(mode="json")
    document["recheck"] = "ok"
    return Outcome([document], _certificate_rows(certificate))


HANDLERS = {"eval": cmd_eval, "verify": cmd_verify, "scan": cmd_scan,
            "oracle": cmd_oracle, "schema": cmd_schema, "recheck": cmd_recheck}
TRACED_HANDLERS = {"seek": cmd_seek, "even": cmd_even, "density": cmd_density}


def render(command: str, outcome: Outcome, output: str) -> str:
    """按输出格式生成文本；JSON 为每行一个文档"""
    if output == "csv":
        return to_csv(outcome.rows, CSV_COLUMNS[command])
    if output == "human":
        return "\n\n".join(to_human(document) for document in outcome.documents
                           if isinstance(document, (dict, BaseModel))) + "\n"
    return "".join(dumps(document) + "\n" for document in outcome.documents)


def _config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    keys = ["spec", "precision_cap_bits", "mode", "retries", "budget", "output",
            "workers", "chunk", "log_level"]
    overrides = {key: getattr(args, key, None) for key in keys}
    overrides["spec_text"] = overrides.pop("spec")
    return overrides


def _write_trace(record: Dict[str, Any]) -> None:
    # 立即写出，后续阶段出错时已完成的阶段仍在输出里
    sys.stdout.write(dumps({"trace": record}) + "\n")
    sys.stdout.flush()


def _execute(args: argparse.Namespace, config: RunConfig) -> Outcome:
    spec = FunctionSpec.parse(config.spec_text)
    with precision_cap(config.precision_cap_bits):
        if args.command in TRACED_HANDLERS:
            hook = _write_trace if args.trace else None
            outcome = TRACED_HANDLERS[args.command](args, spec, config, hook)
        else:
            outcome = HANDLERS[args.command](args, spec, config)
    return outcome


def run(argv: List[str]) -> int:
    """命令行入口

    Args:
        argv: 不含程序名的参数列表

    Returns:
        int: 退出码，0 成功，1 用法或内部错误，2 可证否定，3 精度上限，
            4 预算或重试用尽
    """
    try:
        args = build_parser().parse_args(argv)
        config = load_run_config(_config_overrides(args), args.config)
        set_level(config.log_level)
        outcome = _execute(args, config)
        text = render(args.command, outcome, config.output)
        if args.out:
            asyncio.run(save_data_to_file(text, args.out))
            logger.info("结果已写入 %s", args.out)
        else:
            sys.stdout.write(text)
        return outcome.exit_code
    except RegseqError as e:
        logger.error("%s: %s", e.code, e)
        sys.stdout.write(json.dumps(e.to_record(), ensure_ascii=False,
                                    sort_keys=True) + "\n")
        return e.exit_code
    except Exception as e:
        logger.exception("内部错误")
        sys.stdout.write(json.dumps({"error": "internal", "message": str(e),
                                     "exit_code": 1}, ensure_ascii=False,
                                    sort_keys=True) + "\n")
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
