"""Key-value configuration with flag > environment > file precedence.

The file format is a flat TOML-style document: one `key = value` per line,
`#` comments, booleans true/false, bare or quoted strings. Environment
variables override file values as SVSLAB_<KEY> (upper-cased key).
"""

from __future__ import annotations

import os

DEFAULTS = {
    "ckpt": "",
    "data_dir": "sessions",
    "port": 8642,
    "gl_iters": 40,
    "seed": 0,
}

ENV_PREFIX = "SVSLAB_"


class ConfigError(ValueError):
    pass


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            values[key.strip()] = _parse_value(raw)
    return values


def resolve_config(flags: dict | None = None, config_path: str | None = None,
                   env: dict | None = None) -> dict:
    """Merge defaults, file, environment, and explicit flags (in that order)."""
    env = os.environ if env is None else env
    merged = dict(DEFAULTS)
    path = config_path or env.get(ENV_PREFIX + "CONFIG")
    if path and os.path.exists(path):
        merged.update(load_config_file(path))
    for key in list(merged):
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            merged[key] = _parse_value(env[env_key])
    for key, value in (flags or {}).items():
        if value is not None:
            merged[key] = value
    return merged
