"""Flat ``key = value`` configuration files.

Blank lines and lines starting with ``#`` are ignored. Keys are
case-insensitive and dashes are treated as underscores, so ``svm-c = 0.5``
and ``SVM_C = 0.5`` are the same setting.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    pass


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, str(path))


def to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def to_list(text: str) -> list[str]:
    return [part.strip() for part in text.replace(";", ",").split(",") if part.strip()]


class Settings:
    """Resolves a setting as command-line flag > config file > default."""

    def __init__(self, flags: dict, file_values: dict[str, str] | None = None):
        self.flags = {normalize_key(k): v for k, v in flags.items()}
        self.file_values = file_values or {}
        self.used: set[str] = set()

    def get(self, key: str, default=None, convert=str):
        key = normalize_key(key)
        self.used.add(key)
        flag = self.flags.get(key)
        if flag is not None and flag != []:
            return flag
        if key in self.file_values:
            try:
                return convert(self.file_values[key])
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from None
        return default

    def unknown_file_keys(self) -> list[str]:
        return sorted(set(self.file_values) - self.used)
