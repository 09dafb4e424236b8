"""Service configuration: flat key=value file with PAE_* env overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from urllib.parse import urlparse

from pae.errors import FormatError
from pae.ranking import Aggregation, Transform


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8080"
    scorer: str = "lexical"  # "lexical" or "remote:<url>"
    translator: str = "none"  # "none", "remote:<url>" or "cache:<path>"
    rules: str = ""  # empty -> packaged starter rules
    embeddings: str = ""  # empty -> embedding substitution disabled
    lexicon: str = ""  # empty -> packaged lexicon
    aggregation: Aggregation = Aggregation.MAX
    transform: Transform = Transform.IDENTITY
    default_k: int = 10
    tau: float = 0.0
    store: str = "pae_policies.jsonl"
    max_eval_rows: int = 50000
    ui_dir: str = ""  # optional static frontend bundle to serve at /

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


_ENV_PREFIX = "PAE_"


def _parse_value(name: str, raw: str):
    if name == "aggregation":
        return Aggregation(raw.lower())
    if name == "transform":
        return Transform(raw.lower())
    if name in ("default_k", "max_eval_rows"):
        return int(raw)
    if name == "tau":
        return float(raw)
    return raw


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Build a ServiceConfig from an optional key=value file, then apply
    PAE_<KEY> environment overrides, then validate."""
    env = os.environ if env is None else env
    values: dict[str, object] = {}
    known = {f.name for f in fields(ServiceConfig)}

    if path is not None:
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise FormatError("expected 'key = value'", line=lineno, path=str(path))
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in known:
                    raise FormatError(f"unknown config key {key!r}", line=lineno, path=str(path))
                try:
                    values[key] = _parse_value(key, value)
                except ValueError as exc:
                    raise FormatError(str(exc), line=lineno, path=str(path)) from None

    for name in known:
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _parse_value(name, raw)

    config = ServiceConfig(**values)
    validate_config(config)
    return config


def validate_config(config: ServiceConfig) -> None:
    if config.default_k < 1:
        raise ValueError("default_k must be >= 1")
    for spec, kinds in (("scorer", ("lexical", "remote")), ("translator", ("none", "remote", "cache"))):
        value = getattr(config, spec)
        kind = value.split(":", 1)[0].lower()
        if kind not in kinds:
            raise ValueError(f"{spec} must be one of {kinds}, got {value!r}")
        if kind == "remote":
            url = value.split(":", 1)[1]
            parsed = urlparse(url)
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise ValueError(f"{spec} url {url!r} is not a well-formed http(s) url")
        if kind == "cache":
            cache_path = value.split(":", 1)[1]
            if not Path(cache_path).exists():
                raise ValueError(f"translator cache {cache_path!r} does not exist")
    for name in ("rules", "embeddings", "lexicon"):
        value = getattr(config, name)
        if value and not Path(value).exists():
            raise ValueError(f"{name} path {value!r} does not exist")
