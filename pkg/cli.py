#!/usr/bin/env python3
# cli.py - единая точка входа uzel: разбор, построение, проверка, перепись, отчёт
"""
Пример:
    python cli.py entangle --pattern hopf.pd --companion trefoil.pd
    python cli.py census --max-n 6 --out table.csk
    python cli.py budget --x 3/4 --card 114

JSON печатается в stdout, логи идут в stderr. Коды выхода: 0 - успех,
2 - ошибка использования, 3 - ошибка предметной области, 4 - превышен бюджет.
"""

import argparse
import json
import logging
import os
import random
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import jsonschema
import yaml

import config
from bounds import evaluate_constants, regularity_budget
from census import enumerate_diagrams, write_atomic
from diagram_core import Diagram, crossing_signs, emit_pd, mirror, parse_pd, writhe
from errors import ConfigError, MalformedCode, SchemaMismatch, UsageError, UzelError
from invariants import invariant_fingerprint, jones_from_bracket, kauffman_bracket
from moves import MoveTrace, normalize_writhe, random_move, simplify
from satellite import (
    AnnularDiagram,
    annular_embed,
    cable,
    component_wrapping,
    entangle,
    is_reliable,
    wrapping_number,
)
from structure import (
    denominator_closure,
    explicit_disk,
    extract_tangle,
    find_companion_disk,
    is_prime_diagram,
    numerator_closure,
    screen_tangle,
    split_connected_sum,
)

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "schemas")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"Ожидается булево значение, получено {value!r}", {"value": value})


# === КОНФИГУРАЦИЯ ЗАПУСКА ===

@dataclass
class RunConfig:
    """Параметры одного запуска: подкоманда, входы, бюджеты и флаги"""
    subcommand: str = ""
    inputs: Dict[str, str] = field(default_factory=dict)
    out: Optional[str] = None
    state_sum_budget: int = config.STATE_SUM_BUDGET
    census_budget: int = config.CENSUS_BUDGET
    simplify_rounds: int = config.SIMPLIFY_ROUNDS
    workers: int = config.WORKERS
    mirror_identify: bool = config.MIRROR_IDENTIFY
    clasp_sign: int = config.CLASP_SIGN
    no_reduce: bool = False
    seed: int = 0
    log_level: str = config.LOG_LEVEL
    pretty: bool = False
    output_dir: str = config.OUTPUT_DIR

    def validate(self) -> List[str]:
        errors = []
        for name in ("state_sum_budget", "census_budget", "simplify_rounds", "workers"):
            if getattr(self, name) < 1:
                errors.append(f"{name} должен быть положительным")
        if self.clasp_sign not in (1, -1):
            errors.append("clasp_sign должен быть +1 или -1")
        if self.log_level.upper() not in LOG_LEVELS:
            errors.append(f"Неизвестный уровень логирования {self.log_level}")
        return errors

    def apply(self, values: Dict[str, Any]) -> "RunConfig":
        """Перекрывает поля значениями из файла или флагов с приведением типов"""
        types = {f.name: f.type for f in fields(self)}
        for key, value in values.items():
            if value is None:
                continue
            if key not in types:
                raise ConfigError(f"Неизвестный параметр {key}", {"key": key})
            current = getattr(self, key)
            try:
                if isinstance(current, bool):
                    value = _parse_bool(value)
                elif isinstance(current, int):
                    value = int(value)
            except ValueError as e:
                raise ConfigError(f"Параметр {key}: {e}", {"key": key, "value": value}) from e
            setattr(self, key, value)
        return self

    def out_path(self) -> Optional[str]:
        """Относительный --out отсчитывается от output_dir"""
        if not self.out:
            return None
        if os.path.isabs(self.out):
            return self.out
        return os.path.join(self.output_dir, self.out)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), default_flow_style=False, allow_unicode=True, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return cls().apply(dict(data))

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        return cls.from_dict(yaml.safe_load(text) or {})

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        """Файл key=value (см. config.load_kv_file)"""
        try:
            values = config.load_kv_file(path)
        except OSError as e:
            raise ConfigError(f"Не удалось прочитать {path}: {e}", {"path": path}) from e
        return cls().apply(values)


# === ВХОДЫ ===

def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"Не удалось прочитать {path}: {e}", {"path": path}) from e


def read_diagram(path: str) -> Diagram:
    """PD-текст или JSON-зеркало диаграммы; '-' читает stdin"""
    text = _read_text(path)
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            return Diagram.from_json(stripped)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise MalformedCode(f"{path}: JSON диаграммы не разбирается: {e}", {"path": path}) from e
    return parse_pd(text)


def read_annular(path: str) -> AnnularDiagram:
    """JSON кольцевой диаграммы: словарь AnnularDiagram или ответ wrapping с ключом annular"""
    text = _read_text(path)
    try:
        data = json.loads(text)
        if "annular" in data:
            data = data["annular"]
        return AnnularDiagram.from_dict(data)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedCode(f"{path}: JSON кольцевой диаграммы не разбирается: {e}", {"path": path}) from e


def _disk(d: Diagram, args: argparse.Namespace):
    if getattr(args, "crossing", None) is not None:
        return explicit_disk(d, args.crossing, args.corner or 0)
    return None


# === ПОДКОМАНДЫ ===

def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    return {
        "valid": True,
        "crossings": d.crossing_count,
        "components": d.component_count,
        "loops": d.loops,
        "connected": d.is_connected(),
        "writhe": writhe(d),
        "pd": emit_pd(d),
    }


def cmd_writhe(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    return {"writhe": writhe(d), "signs": list(crossing_signs(d))}


def cmd_normalize(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    out, trace = normalize_writhe(d)
    return {"pd": emit_pd(out), "crossings": out.crossing_count, "writhe": writhe(out), "trace": trace.to_dict()}


def cmd_prime(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    prime, witness = is_prime_diagram(d)
    return {"prime": prime, "witness": witness.to_dict() if witness else None}


def cmd_split(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    factors = split_connected_sum(d)
    return {
        "crossings": d.crossing_count,
        "factors": [{"pd": emit_pd(f), "crossings": f.crossing_count} for f in factors],
    }


def cmd_disk(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    disk = _disk(d, args) or find_companion_disk(d)
    inside, outside = extract_tangle(d, disk)
    return {
        "disk": disk.to_dict(),
        "inside": inside.to_dict(),
        "outside": outside.to_dict(),
        "screen": screen_tangle(outside).to_dict(),
    }


def cmd_tangle(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    disk = _disk(d, args) or find_companion_disk(d)
    _, outside = extract_tangle(d, disk)
    return {
        "tangle": outside.to_dict(),
        "strings": [list(p) for p in outside.strings()],
        "numerator": emit_pd(numerator_closure(outside)),
        "denominator": emit_pd(denominator_closure(outside)),
        "screen": screen_tangle(outside).to_dict(),
    }


def cmd_wrapping(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    if getattr(args, "annular", None):
        a = read_annular(args.annular)
    else:
        d = read_diagram(args.input)
        a = annular_embed(d, _disk(d, args))
    return {
        "wrapping": wrapping_number(a),
        "winding": list(a.winding),
        "components": list(component_wrapping(a)),
        "reliable": is_reliable(a),
        "disk": a.disk.to_dict(),
        "annular": a.to_dict(),
    }


def cmd_entangle(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    pattern = read_diagram(args.pattern)
    companion = read_diagram(args.companion)
    result = entangle(annular_embed(pattern, _disk(pattern, args)), companion, reduce=not cfg.no_reduce)
    return result.to_dict()


def cmd_cable(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    companion = read_diagram(args.companion)
    return cable(companion, clasp_sign=cfg.clasp_sign).to_dict()


def cmd_scramble(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    if args.steps < 0:
        raise UsageError("--steps должен быть неотрицательным", {"steps": args.steps})
    d = read_diagram(args.input)
    rng = random.Random(cfg.seed)
    trace = MoveTrace(before=d.crossing_count, after=d.crossing_count)
    out = d
    for _ in range(args.steps):
        out, record = random_move(out, rng)
        trace.add(record)
    logger.info(f"[CLI] {args.steps} случайных ходов с seed={cfg.seed}: {d.crossing_count} -> {out.crossing_count}")
    return {"pd": emit_pd(out), "seed": cfg.seed, "before": d.crossing_count,
            "after": out.crossing_count, "trace": trace.to_dict()}


def cmd_bracket(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    poly = kauffman_bracket(d, cfg.state_sum_budget, cfg.workers)
    return {"bracket": poly.to_dict(), "crossings": d.crossing_count}


def cmd_jones(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    poly = jones_from_bracket(kauffman_bracket(d, cfg.state_sum_budget, cfg.workers), writhe(d))
    return {"jones": poly.to_dict(), "writhe": writhe(d), "crossings": d.crossing_count}


def cmd_fingerprint(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    fp = invariant_fingerprint(d, cfg.mirror_identify, cfg.state_sum_budget)
    return {"fingerprint": fp.to_dict(), "key": fp.key()}


def cmd_mirror(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = mirror(read_diagram(args.input))
    return {"pd": emit_pd(d), "writhe": writhe(d)}


def cmd_simplify(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    d = read_diagram(args.input)
    out, trace = simplify(d, cfg.simplify_rounds)
    return {"pd": emit_pd(out), "before": d.crossing_count, "after": out.crossing_count, "trace": trace.to_dict()}


def cmd_census(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    table = enumerate_diagrams(
        args.max_n,
        mirror_identify=cfg.mirror_identify,
        workers=cfg.workers,
        budget=cfg.census_budget,
        state_budget=cfg.state_sum_budget,
    )
    if cfg.out:
        table = table.save(cfg.out_path())
    return table.to_dict()


def cmd_bounds(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    return evaluate_constants(args.c_max).to_dict()


def cmd_budget(cfg: RunConfig, args: argparse.Namespace) -> Dict[str, Any]:
    try:
        x = Fraction(args.x)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"x не разбирается как дробь: {args.x}", {"x": args.x}) from e
    value = regularity_budget(args.card, x)
    return {"card": args.card, "x": str(x), "budget": str(value)}


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], Dict[str, Any]]] = {
    "validate": cmd_validate,
    "writhe": cmd_writhe,
    "normalize": cmd_normalize,
    "prime": cmd_prime,
    "split": cmd_split,
    "disk": cmd_disk,
    "entangle": cmd_entangle,
    "cable": cmd_cable,
    "wrapping": cmd_wrapping,
    "bracket": cmd_bracket,
    "jones": cmd_jones,
    "census": cmd_census,
    "bounds": cmd_bounds,
    "budget": cmd_budget,
    "mirror": cmd_mirror,
    "simplify": cmd_simplify,
    "scramble": cmd_scramble,
    "tangle": cmd_tangle,
    "fingerprint": cmd_fingerprint,
}

# Подкоманды, у которых --out означает свой файл, а не JSON-артефакт
OWN_OUTPUT = {"census"}


# === ПАРСЕР ===

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="Файл key=value с параметрами запуска")
    common.add_argument("--log-level", dest="log_level", choices=LOG_LEVELS, type=str.upper)
    common.add_argument("--workers", type=int)
    common.add_argument("--pretty", action="store_true", help="Человекочитаемый вывод вместо JSON")
    common.add_argument("--out", help="Куда записать артефакт (атомарно)")
    common.add_argument("--seed", type=int, help="Зерно для scramble")
    common.add_argument("--output-dir", dest="output_dir", help="Папка для относительных путей --out")
    common.add_argument("--state-sum-budget", dest="state_sum_budget", type=int)
    common.add_argument("--census-budget", dest="census_budget", type=int)
    common.add_argument("--simplify-rounds", dest="simplify_rounds", type=int)
    common.add_argument("--mirror-identify", dest="mirror_identify", action=argparse.BooleanOptionalAction)
    common.add_argument("--clasp-sign", dest="clasp_sign", type=int, choices=(1, -1))
    common.add_argument("--no-reduce", dest="no_reduce", action="store_true")

    parser = argparse.ArgumentParser(prog="uzel", description="Диаграммы узлов и зацеплений: сателлиты, инварианты, перепись")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def diagram_cmd(name: str, help_text: str, disk: bool = False) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--in", dest="input", required=True, help="PD-код или JSON диаграммы ('-' для stdin)")
        if disk:
            _disk_flags(p)
        return p

    diagram_cmd("validate", "Разобрать и проверить диаграмму")
    diagram_cmd("writhe", "Знаки перекрёстков и writhe")
    diagram_cmd("normalize", "Довести writhe узла до нуля петлями R1")
    diagram_cmd("prime", "Проверка простоты диаграммы")
    diagram_cmd("split", "Разложение диаграммы в связную сумму")
    diagram_cmd("disk", "Диск компаньона и два тэнгла", disk=True)
    diagram_cmd("tangle", "Внешний тэнгл и его замыкания", disk=True)
    diagram_cmd("bracket", "Скобка Кауффмана")
    diagram_cmd("jones", "Многочлен Джонса")
    diagram_cmd("fingerprint", "Отпечаток для дедупликации")
    diagram_cmd("mirror", "Зеркальная диаграмма")
    diagram_cmd("simplify", "Жадное сокращение R1-/R2-")

    p = sub.add_parser("wrapping", parents=[common], help="Число обмотки кольцевой диаграммы")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--in", dest="input", help="PD-код или JSON диаграммы ('-' для stdin)")
    source.add_argument("--annular", help="JSON кольцевой диаграммы (например, сохранённый ответ wrapping)")
    _disk_flags(p)

    p = diagram_cmd("scramble", "Случайные ходы Рейдемейстера (воспроизводимы по --seed)")
    p.add_argument("--steps", type=int, default=5)

    p = sub.add_parser("entangle", parents=[common], help="Сателлит паттерна с компаньоном")
    p.add_argument("--pattern", required=True)
    p.add_argument("--companion", required=True)
    _disk_flags(p)

    p = sub.add_parser("cable", parents=[common], help="Кабель компаньона: 4cr+1 перекрёстков")
    p.add_argument("--companion", required=True)

    p = sub.add_parser("census", parents=[common], help="Перепись простых диаграмм до max-n перекрёстков")
    p.add_argument("--max-n", dest="max_n", type=int, required=True)

    p = sub.add_parser("bounds", parents=[common], help="Точная проверка числовых констант")
    p.add_argument("--c-max", dest="c_max", type=int, default=20)

    p = sub.add_parser("budget", parents=[common], help="card/(152 x) для не x-регулярных узлов")
    p.add_argument("--x", required=True, help="Рациональное число, например 3/4")
    p.add_argument("--card", type=int, required=True)
    return parser


def _disk_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--crossing", type=int, default=None, help="Перекрёсток явного диска")
    p.add_argument("--corner", type=int, default=None, help="Угол (слот) явного диска")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Умолчания < файл конфигурации < флаги командной строки"""
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    flags = {f.name: getattr(args, f.name) for f in fields(RunConfig) if hasattr(args, f.name)}
    flags["subcommand"] = args.subcommand
    flags["inputs"] = {k: getattr(args, k) for k in ("input", "annular", "pattern", "companion")
                        if getattr(args, k, None) is not None}
    cfg.apply(flags)
    problems = cfg.validate()
    if problems:
        raise ConfigError("Некорректная конфигурация запуска", {"problems": problems})
    return cfg


# === ВЫВОД ===

def check_payload(subcommand: str, payload: Dict[str, Any]) -> None:
    """Сверка с JSON-схемой подкоманды, если она есть"""
    path = os.path.join(SCHEMA_DIR, f"{subcommand}.json")
    if not os.path.exists(path):
        return
    with open(path, "r", encoding="utf-8") as f:
        schema = json.load(f)
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as e:
        raise SchemaMismatch(
            f"Ответ {subcommand} не совпал со схемой: {e.message}",
            {"subcommand": subcommand, "path": [str(p) for p in e.absolute_path]},
        ) from e


def render(payload: Dict[str, Any], pretty: bool) -> str:
    if pretty:
        return yaml.safe_dump(payload, default_flow_style=False, allow_unicode=True, sort_keys=True)
    return json.dumps(payload, ensure_ascii=False, sort_keys=True) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        cfg = resolve_config(args)
        config.setup_logging(cfg.log_level)
        logger.debug(f"[CLI] {cfg.subcommand}: {cfg.inputs}")
        payload = COMMANDS[cfg.subcommand](cfg, args)
        check_payload(cfg.subcommand, payload)
    except UzelError as e:
        logger.error(f"[CLI] {e.__class__.__name__}: {e.message}")
        sys.stderr.write(json.dumps(e.to_dict(), ensure_ascii=False, sort_keys=True, default=str) + "\n")
        return e.exit_code

    text = render(payload, cfg.pretty)
    out = cfg.out_path()
    if out and cfg.subcommand not in OWN_OUTPUT:
        write_atomic(out, text)
        write_atomic(out + ".yaml", cfg.to_yaml())
        logger.info(f"[CLI] Артефакт записан: {out}")
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(run())
