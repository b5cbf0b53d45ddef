"""Run configuration (TOML)."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import tomli

from .builder import MODES


class ConfigError(ValueError):
    """Invalid or unreadable configuration; maps to exit code 2."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    mode: str
    N: int = 12
    r: float = 1.0
    m_per_family: int = 4
    mesh: float = 1.0
    s_min: float = 0.02
    rho_max: float | None = None
    rho_pairs: tuple[tuple[float, float], ...] = ((0.0, 1.0), (1.0, 2.0), (0.5, 2.5))
    nu: tuple[float, ...] = (0.0, 1.0, 3.0)
    truncations: tuple[int, ...] = (5, 10, 20)
    tv_rho2: tuple[float, ...] = (0.5, 1.0, 2.0)
    tol: float = 1e-10
    pass_tol: float = 1e-8
    exact_tol: float = 1e-12
    annihilation_count: int = 10
    cole_family_size: int = 6
    cole_samples: int = 100
    seed: int = 0
    out: str = "out"
    timing: bool = True

    def __post_init__(self):
        validate(self)

    @property
    def effective_rho_max(self) -> float:
        need = max([b for _, b in self.rho_pairs] + list(self.tv_rho2) + [0.0])
        return need if self.rho_max is None else self.rho_max

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


KEYS = {f.name for f in fields(RunConfig)}


def validate(c: RunConfig) -> None:
    if c.mode not in MODES:
        raise ConfigError(f"mode must be one of {sorted(MODES)}, got {c.mode!r}", "mode")
    if not (isinstance(c.N, int) and c.N >= 1):
        raise ConfigError("N must be a positive integer", "N")
    if not (isinstance(c.m_per_family, int) and c.m_per_family >= 2):
        raise ConfigError("m_per_family must be an integer >= 2", "m_per_family")
    for name in ("r", "mesh", "s_min", "tol", "pass_tol", "exact_tol"):
        v = getattr(c, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(f"{name} must be positive, got {v!r}", name)
    if not c.rho_pairs:
        raise ConfigError("rho_pairs must be nonempty", "rho_pairs")
    for pair in c.rho_pairs:
        if len(pair) != 2:
            raise ConfigError(f"rho pair {pair!r} must have two entries", "rho_pairs")
        a, b = pair
        if not (0 <= a < b):
            raise ConfigError(f"rho pair {pair!r}: need 0 <= rho1 < rho2", "rho_pairs")
    if any(t < 1 or not isinstance(t, int) for t in c.truncations) or not c.truncations:
        raise ConfigError("truncations must be positive integers", "truncations")
    if any(v <= 0 for v in c.tv_rho2):
        raise ConfigError("tv_rho2 entries must be positive", "tv_rho2")
    if any(v < 0 for v in c.nu):
        raise ConfigError("nu entries must be >= 0", "nu")
    if c.rho_max is not None and c.rho_max < max([b for _, b in c.rho_pairs] + list(c.tv_rho2)):
        raise ConfigError("rho_max is below the largest rho2 in use", "rho_max")
    if not 1 <= c.cole_family_size <= 12:
        raise ConfigError("cole_family_size must be between 1 and 12", "cole_family_size")
    if c.annihilation_count < 0 or c.cole_samples < 1:
        raise ConfigError("annihilation_count must be >= 0 and cole_samples >= 1", "annihilation_count")


def _key_line(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*(\"?){re.escape(key)}\1\s*=")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return i
    return None


def _where(path, text, key) -> str:
    line = _key_line(text, key)
    return f"{path}:{line}" if line else str(path)


def parse_config(text: str, path: str = "<config>") -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = sorted(set(data) - KEYS)
    if unknown:
        k = unknown[0]
        raise ConfigError(f"{_where(path, text, k)}: unknown key {k!r}")
    if "mode" not in data:
        raise ConfigError(f"{path}: missing required key 'mode'")
    kw = {}
    for k, v in data.items():
        if k == "rho_pairs":
            v = tuple(tuple(float(x) for x in p) for p in v)
        elif k in ("nu", "tv_rho2"):
            v = tuple(float(x) for x in v)
        elif k == "truncations":
            v = tuple(v)
        elif k in ("r", "mesh", "s_min", "rho_max", "tol", "pass_tol", "exact_tol") and isinstance(v, int):
            v = float(v)
        kw[k] = v
    try:
        return RunConfig(**kw)
    except ConfigError as exc:
        where = _where(path, text, exc.key) if exc.key else path
        raise ConfigError(f"{where}: {exc}", exc.key) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, str(p))
