'''
 # @ Create Time: 2026-10-12 16:31:55
 # @ Modified time: 2026-10-17 10:12:40
 # @ Description: 结果序列化与输出
 # @ 主要功能：
 #   1. 大整数按十进制字符串、有理数按 "p/q" 字符串序列化
 #   2. JSON / CSV / 人类可读三种输出
 #   3. 异步写文件
'''

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, Iterable, List, Union
import aiofiles
from pydantic import BaseModel, BeforeValidator, PlainSerializer


def _to_int(value: Any) -> Any:
    if isinstance(value, str):
        return int(value.strip())
    return value


# 大整数：内存中是 int，JSON 中是十进制字符串
BigInt = Annotated[int, BeforeValidator(_to_int),
                   PlainSerializer(str, return_type=str, when_used="json")]


def ratio_text(value: Union[Fraction, int]) -> str:
    """有理数的 "p/q" 写法，整数不带分母"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_document(record: Union[BaseModel, Dict, List]) -> Any:
    """转换为可直接 json.dumps 的对象"""
    if isinstance(record, BaseModel):
        return record.model_dump(mode="json")
    return record


def dumps(record: Union[BaseModel, Dict, List], indent: int = None) -> str:
    """确定性的 JSON 文本：键排序，保留中文"""
    return json.dumps(to_document(record), ensure_ascii=False,
                      sort_keys=True, indent=indent)


def to_csv(rows: Iterable[Dict[str, Any]], columns: List[str]) -> str:
    """按给定列输出 CSV，列表值用空格连接"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: " ".join(str(v) for v in value)
                         if isinstance(value, (list, tuple)) else value
                         for key, value in row.items()})
    return buffer.getvalue()


def to_human(record: Union[BaseModel, Dict], indent: int = 0) -> str:
    """缩进的 key: value 文本"""
    document = to_document(record)
    lines = []
    pad = "  " * indent
    for key, value in sorted(document.items()):
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(to_human(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(to_human(item, indent + 1))
                lines.append(f"{pad}  --")
        elif isinstance(value, list):
            lines.append(f"{pad}{key}: {' '.join(str(v) for v in value)}")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(lines)


async def save_data_to_file(data: str, filename: Union[str, Path]) -> None:
    """将数据保存为文件

    Args:
        data: 要保存的文本
        filename: 保存的文件路径

    功能：
        1. 自动创建目标文件夹
    """
    Path(filename).parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(filename, 'w', encoding='utf-8') as f:
        await f.write(data)

