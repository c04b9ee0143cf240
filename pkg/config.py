# config.py - единый центр конфигурации uzel и настройки логирования

import os
import logging
from typing import Dict

import colorlog

logger = logging.getLogger(__name__)


def _env(name: str, default: str = "", required: bool = False) -> str:
    val = os.getenv(name, default).strip()
    if required and not val:
        logger.warning(f"[CONFIG] Переменная окружения {name} не задана")
    return val


def _env_bool(name: str, default: str) -> bool:
    return _env(name, default).lower() in ("1", "true", "yes", "on")


# === БАЗА ===
APP_NAME = "uzel"
CODE_VERSION = "1.0.0"
LOG_LEVEL = _env("UZEL_LOG_LEVEL", "INFO").upper()

# === БЮДЖЕТЫ ===
# Сумма по состояниям стоит 2^n, перепись растёт ещё быстрее
STATE_SUM_BUDGET = int(_env("UZEL_STATE_SUM_BUDGET", "24"))
CENSUS_BUDGET = int(_env("UZEL_CENSUS_BUDGET", "8"))
SIMPLIFY_ROUNDS = int(_env("UZEL_SIMPLIFY_ROUNDS", "64"))
WORKERS = int(_env("UZEL_WORKERS", "1"))

# === КОНСТРУКЦИИ ===
MIRROR_IDENTIFY = _env_bool("UZEL_MIRROR_IDENTIFY", "true")
CLASP_SIGN = int(_env("UZEL_CLASP_SIGN", "1"))

# === АРТЕФАКТЫ ===
OUTPUT_DIR = _env("UZEL_OUTPUT_DIR", ".")

# Ключи, которые допускает файл key=value
DEFAULTS: Dict[str, str] = {
    "state_sum_budget": str(STATE_SUM_BUDGET),
    "census_budget": str(CENSUS_BUDGET),
    "simplify_rounds": str(SIMPLIFY_ROUNDS),
    "workers": str(WORKERS),
    "mirror_identify": "true" if MIRROR_IDENTIFY else "false",
    "clasp_sign": str(CLASP_SIGN),
    "output_dir": OUTPUT_DIR,
    "log_level": LOG_LEVEL,
    "seed": "0",
    "no_reduce": "false",
}


def load_kv_file(path: str) -> Dict[str, str]:
    """Читает построчный файл key=value; # - комментарий"""
    from errors import ConfigError

    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: ожидается key=value", {"line": raw.rstrip()})
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_").lower()
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: неизвестный ключ {key}", {"key": key})
            values[key] = value
    return values


def setup_logging(level: str = LOG_LEVEL) -> None:
    """Цветной вывод в stderr, stdout остаётся под JSON"""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(
        "%(log_color)s%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
    ))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
