'''
 # @ Create Time: 2026-10-12 11:05:37
 # @ Modified time: 2026-10-15 09:40:12
 # @ Description: 运行配置
 # @ 主要功能：
 #   1. 从 .env 读取 REGSEQ_CONFIG，定位 key = value 格式的配置文件
 #   2. 配置文件 < 命令行参数 的覆盖顺序
 #   3. 用 pydantic 校验取值范围
'''

import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional
from dotenv import dotenv_values, load_dotenv
from pydantic import (BaseModel, ConfigDict, Field, ValidationError,
                      field_validator)
from errors import UsageError
from tools.logging_config import setup_logger

logger = setup_logger(__name__)
# 加载环境变量
load_dotenv()

MAX_PRECISION_CAP_BITS = 2 ** 15
MAX_RETRIES = 100
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
CONFIG_ENV = "REGSEQ_CONFIG"  # 环境变量只负责指定配置文件路径
# 配置文件里允许使用命令行的写法
_KEY_ALIASES = {"spec": "spec_text", "precision_cap": "precision_cap_bits"}


class RunConfig(BaseModel):
    """一次运行的完整配置"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    spec_text: str = "x^(3/2)"
    precision_cap_bits: int = Field(
        default=MAX_PRECISION_CAP_BITS, ge=64, le=MAX_PRECISION_CAP_BITS)
    mode: Literal["strict", "relaxed"] = "relaxed"
    retries: int = Field(default=25, ge=0, le=MAX_RETRIES)
    budget: int = Field(default=10 ** 6, ge=1)
    output: Literal["json", "csv", "human"] = "json"
    workers: int = Field(default=1, ge=1)
    chunk: int = Field(default=4096, ge=2)
    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        value = value.strip().upper()
        if value not in LOG_LEVELS:
            raise ValueError(f"未知的日志级别: {value}")
        return value


def _normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return _KEY_ALIASES.get(key, key)


def read_config_file(path: Optional[Path] = None) -> Dict[str, str]:
    """读取 key = value 配置文件

    Args:
        path: 配置文件路径，为空时取环境变量 REGSEQ_CONFIG

    Returns:
        Dict[str, str]: 归一化键名后的配置项，未配置时为空字典
    """
    path = path or os.getenv(CONFIG_ENV)
    if not path:
        return {}
    if not Path(path).is_file():
        raise UsageError(f"配置文件不存在: {path}")
    values = dotenv_values(path)
    logger.debug("读取配置文件 %s: %s", path, sorted(values))
    return {_normalize_key(key): value for key, value in values.items()
            if value is not None}


def load_run_config(overrides: Optional[Dict[str, Any]] = None,
                    path: Optional[Path] = None) -> RunConfig:
    """合并默认值、配置文件和命令行参数

    Args:
        overrides: 命令行参数，值为 None 的项视为未指定
        path: 显式指定的配置文件

    Returns:
        RunConfig: 校验后的配置
    """
    merged: Dict[str, Any] = read_config_file(path)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[_normalize_key(key)] = value
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise UsageError(f"配置不合法: {e}") from e
