"""Run configuration: quadrature defaults overridden from a TOML file."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import fields
from pathlib import Path

from .errors import UsageError
from .numerics import DEFAULT_CONFIG, QuadratureConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

ENV_VAR = "ISOPERIMETRIX_CONFIG"
_KNOWN = {f.name for f in fields(QuadratureConfig)}


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> QuadratureConfig:
    """Defaults, then the ``[quadrature]`` table of the TOML file, then ``overrides``."""
    path = path if path is not None else os.environ.get(ENV_VAR)
    values: dict = {}
    if path:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        extra = set(data) - {"quadrature"}
        if extra:
            raise UsageError(f"unknown config section(s): {', '.join(sorted(extra))}")
        values.update(data.get("quadrature", {}))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(values) - _KNOWN
    if unknown:
        raise UsageError(f"unknown quadrature key(s): {', '.join(sorted(unknown))}")
    try:
        return DEFAULT_CONFIG.replace(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def config_hash(cfg: QuadratureConfig) -> str:
    blob = json.dumps(cfg.as_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
