# errors.py - иерархия ошибок uzel и коды выхода CLI

from typing import Any, Dict, Optional


class UzelError(Exception):
    """Базовая ошибка пакета"""
    exit_code = 1
    kind = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.__class__.__name__,
            "kind": self.kind,
            "message": self.message,
            "details": self.details,
        }


# === INTERNAL (код 1) ===

class SchemaMismatch(UzelError):
    """Ответ подкоманды не прошёл собственную JSON-схему"""
    kind = "internal"


# === USAGE (код 2) ===

class UsageError(UzelError):
    exit_code = 2
    kind = "usage"


class MalformedCode(UsageError):
    """PD-код не разбирается: каждая метка ребра должна встречаться ровно дважды"""


class NonPlanar(UsageError):
    """Система вращений не даёт вложения в сферу (проверка Эйлера)"""


class EmptyDiagram(UsageError):
    """Пустой текст вместо диаграммы"""


class ConfigError(UsageError):
    """Некорректный файл конфигурации или флаги запуска"""


# === DOMAIN (код 3) ===

class DomainError(UzelError):
    exit_code = 3
    kind = "domain"


class Disconnected(DomainError):
    """Операция требует связной диаграммы"""


class MultiComponent(DomainError):
    """Операция определена только для однокомпонентных диаграмм"""


class NotAKnot(DomainError):
    """Компаньон должен быть узлом"""


class WrappingTooSmall(DomainError):
    """Число обмотки паттерна меньше 2"""


class InvalidDisk(DomainError):
    """Диск не удовлетворяет условиям (4 точки, две дуги без перекрёстков)"""


class ScreeningFailed(DomainError):
    """Ни один кандидат не прошёл диаграммный фильтр локальной тривиальности"""


class NoInterComponentCrossing(DomainError):
    """Нет перекрёстка между разными компонентами"""


class UntaggedInput(DomainError):
    """На диаграмме нет меток петель, сокращать нечего"""


class InvalidMove(DomainError):
    """Ход Рейдемейстера неприменим в указанном месте"""


class FixedOrientation(DomainError):
    """Направление компоненты не хранится в кортежах и не может быть обращено"""


class LengthMismatch(DomainError):
    """Длины рядов не согласованы"""


class XOutOfRange(DomainError):
    """x должен лежать в (0, 1]"""


class TableMismatch(DomainError):
    """Сохранённая таблица переписи расходится с пересчётом"""


# === BUDGET (код 4) ===

class BudgetError(UzelError):
    exit_code = 4
    kind = "budget"


class BudgetExceeded(BudgetError):
    """Превышен бюджет перекрёстков для экспоненциального перебора"""
