"""Run configuration: flags override ``QZK_*`` environment variables override defaults."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Mapping


@dataclass(frozen=True)
class Config:
    order: int | None = None      # None: the subcommand's own default
    degree: int | None = None
    ybound: int | None = None
    budget_terms: int = 50_000_000
    max_depth: int = 200
    format: str = "json"
    certify_steps: bool = False
    parallel: int = 1
    margin: int = 10

    def __post_init__(self):
        for name in ("order", "degree", "ybound"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")
        if self.budget_terms <= 0 or self.max_depth <= 0 or self.parallel <= 0:
            raise ValueError("budgets and worker counts must be positive")
        if self.format not in ("json", "text"):
            raise ValueError(f"format must be 'json' or 'text', got {self.format!r}")


_ENV = {
    "order": ("QZK_ORDER", int),
    "degree": ("QZK_DEGREE", int),
    "ybound": ("QZK_YBOUND", int),
    "budget_terms": ("QZK_BUDGET_TERMS", int),
    "max_depth": ("QZK_MAX_DEPTH", int),
    "format": ("QZK_FORMAT", str),
    "certify_steps": ("QZK_CERTIFY_STEPS", lambda v: v.strip().lower() in ("1", "true", "yes", "on")),
    "parallel": ("QZK_PARALLEL", int),
    "margin": ("QZK_MARGIN", int),
}


def from_sources(flags: Mapping[str, object] | None = None, env: Mapping[str, str] | None = None,
                 base: Config | None = None) -> Config:
    """Merge ``flags`` (``None`` values ignored) over ``env`` over ``base``."""
    env = os.environ if env is None else env
    cfg = base or Config()
    updates = {}
    for name, (var, conv) in _ENV.items():
        if var in env and env[var] != "":
            try:
                updates[name] = conv(env[var])
            except ValueError as exc:
                raise ValueError(f"bad value for {var}: {env[var]!r}") from exc
    for f in fields(Config):
        v = (flags or {}).get(f.name)
        if v is not None:
            updates[f.name] = v
    return replace(cfg, **updates)
